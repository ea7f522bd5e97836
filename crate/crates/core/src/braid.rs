//! Braid words of the energy strings and invariants of their closures.
//!
//! Strands are projected onto the axis `Re(e^{-iθ} E)`. A generator `σ_p`
//! is emitted whenever the strands at rank positions `p` and `p + 1` trade
//! places; its sign is `+1` when the strand moving from the lower to the
//! higher rank has the larger projected imaginary part.
//!
//! Strands are identified by their rank position at `k = 0`. Closing the
//! braid connects the end of each strand to the start of the strand whose
//! position it arrives at, so closure components are the cycles of the
//! positional permutation.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::best_assignment4;
use crate::spectral::{bloch_eigenvalues, EnergyStrings};

pub const STRANDS: usize = 4;
/// Projected separations below this at a sample count as a tangency.
pub const TANGENCY_TOL: f64 = 1e-9;
pub const THETA_STEP: f64 = 0.01;
pub const MAX_PERTURBATIONS: usize = 5;
/// Crossings are localized to a k-interval shorter than this.
pub const LOCALIZE_DK: f64 = 2.0 * PI * 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    /// 1-based position: `σ_p` exchanges ranks `p` and `p + 1`.
    pub position: usize,
    pub sign: i8,
    pub k: f64,
}

impl Generator {
    pub fn inverse(self) -> Self {
        Self { sign: -self.sign, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BraidWord {
    pub generators: Vec<Generator>,
    pub strand_count: usize,
    /// Band label sitting at each rank position at `k = 0`.
    pub initial_order: Vec<usize>,
    /// Projection angle actually used.
    pub theta: f64,
}

/// One crossing resolved to the two strands involved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StrandCrossing {
    /// Strand coming from the lower rank.
    pub from_left: usize,
    pub from_right: usize,
    pub sign: i8,
}

impl BraidWord {
    pub fn new(strand_count: usize, generators: Vec<Generator>) -> Self {
        Self { generators, strand_count, initial_order: (0..strand_count).collect(), theta: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    /// Exponent sum of the word.
    pub fn total_sign(&self) -> i32 {
        self.generators.iter().map(|g| g.sign as i32).sum()
    }

    /// Replays the word, returning the strands of each crossing and the final
    /// `position -> strand` map.
    pub fn replay(&self) -> (Vec<StrandCrossing>, Vec<usize>) {
        let mut at: Vec<usize> = (0..self.strand_count).collect();
        let mut out = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let p = g.position - 1;
            out.push(StrandCrossing { from_left: at[p], from_right: at[p + 1], sign: g.sign });
            at.swap(p, p + 1);
        }
        (out, at)
    }

    /// `perm[s]` is the final position of the strand that starts at position `s`.
    pub fn permutation(&self) -> Vec<usize> {
        let (_, at) = self.replay();
        let mut perm = vec![0; self.strand_count];
        for (pos, &strand) in at.iter().enumerate() {
            perm[strand] = pos;
        }
        perm
    }

    /// Cancels adjacent `σ_p σ_p⁻¹` pairs until none remain.
    pub fn free_reduce(&self) -> BraidWord {
        let mut stack: Vec<Generator> = Vec::with_capacity(self.generators.len());
        for &g in &self.generators {
            match stack.last() {
                Some(top) if top.position == g.position && top.sign == -g.sign => {
                    stack.pop();
                }
                _ => stack.push(g),
            }
        }
        BraidWord { generators: stack, ..self.clone() }
    }

    /// Free reduction followed by sorting of commuting generators that occur
    /// at the same momentum (within `k_tol`), so that words extracted at
    /// different resolutions can be compared token by token.
    pub fn canonical(&self, k_tol: f64) -> BraidWord {
        let mut word = self.free_reduce();
        let gens = &mut word.generators;
        let mut changed = true;
        while changed {
            changed = false;
            for i in 1..gens.len() {
                let (a, b) = (gens[i - 1], gens[i]);
                if a.position.abs_diff(b.position) >= 2 && (a.k - b.k).abs() < k_tol && a.position > b.position {
                    gens.swap(i - 1, i);
                    changed = true;
                }
            }
        }
        word
    }

    /// Conjugates the word by a single generator: `g · w · g⁻¹`.
    pub fn conjugated_by(&self, g: Generator) -> BraidWord {
        let mut generators = Vec::with_capacity(self.generators.len() + 2);
        generators.push(g);
        generators.extend_from_slice(&self.generators);
        generators.push(g.inverse());
        BraidWord { generators, ..self.clone() }
    }

    /// Space-separated token stream, e.g. `s1 s2^-1 s3`.
    pub fn tokens(&self) -> String {
        self.generators
            .iter()
            .map(|g| if g.sign > 0 { format!("s{}", g.position) } else { format!("s{}^-1", g.position) })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses a token stream. Momenta are not part of the text form; parsed
    /// generators get `k = index`.
    pub fn from_tokens(strand_count: usize, text: &str) -> Result<BraidWord> {
        let mut generators = Vec::new();
        for (idx, tok) in text.split_whitespace().enumerate() {
            let body = tok
                .strip_prefix('s')
                .ok_or_else(|| Error::InvalidParams(format!("bad braid token {tok:?}")))?;
            let (num, sign) = match body.strip_suffix("^-1") {
                Some(n) => (n, -1),
                None => (body, 1),
            };
            let position: usize = num
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad braid token {tok:?}")))?;
            if position == 0 || position >= strand_count {
                return Err(Error::InvalidParams(format!("generator {tok} out of range for {strand_count} strands")));
            }
            generators.push(Generator { position, sign, k: idx as f64 });
        }
        Ok(BraidWord::new(strand_count, generators))
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens())
    }
}

#[derive(Debug)]
enum Attempt {
    Tangent,
    Fatal(Error),
}

impl From<Error> for Attempt {
    fn from(e: Error) -> Self {
        Attempt::Fatal(e)
    }
}

/// Braid word of the energy strings projected at angle `theta`.
///
/// If two strands are (nearly) level in projection at any sample, the angle
/// is advanced by [`THETA_STEP`] and extraction restarts, at most
/// [`MAX_PERTURBATIONS`] times.
pub fn extract_braid(strings: &EnergyStrings, theta: f64) -> Result<BraidWord> {
    let mut angle = theta;
    for _ in 0..=MAX_PERTURBATIONS {
        match extract_at(strings, angle) {
            Ok(word) => return Ok(word),
            Err(Attempt::Tangent) => angle += THETA_STEP,
            Err(Attempt::Fatal(e)) => return Err(e),
        }
    }
    Err(Error::DegenerateProjection { attempts: MAX_PERTURBATIONS })
}

struct Projector {
    rot: c64,
}

impl Projector {
    fn x(&self, z: c64) -> f64 {
        (z * self.rot).re
    }

    fn y(&self, z: c64) -> f64 {
        (z * self.rot).im
    }

    /// Band labels sorted by projected real part.
    fn order(&self, values: &[c64; 4]) -> [usize; 4] {
        let mut idx = [0, 1, 2, 3];
        idx.sort_by(|&a, &b| self.x(values[a]).total_cmp(&self.x(values[b])));
        idx
    }

    fn min_separation(&self, values: &[c64; 4]) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..4 {
            for j in i + 1..4 {
                best = best.min((self.x(values[i]) - self.x(values[j])).abs());
            }
        }
        best
    }
}

fn extract_at(strings: &EnergyStrings, theta: f64) -> std::result::Result<BraidWord, Attempt> {
    let proj = Projector { rot: c64::from_polar(1.0, -theta) };
    if strings.bands.iter().any(|v| proj.min_separation(v) < TANGENCY_TOL) {
        return Err(Attempt::Tangent);
    }
    let first = proj.order(&strings.bands[0]);
    let mut generators = Vec::new();
    for m in 0..strings.len() - 1 {
        let (ea, eb) = (strings.bands[m], strings.bands[m + 1]);
        if proj.order(&ea) != proj.order(&eb) {
            localize(strings, &proj, strings.k_grid[m], ea, strings.k_grid[m + 1], eb, &mut generators)?;
        }
    }
    let word = BraidWord { generators, strand_count: STRANDS, initial_order: first.to_vec(), theta };

    // The positional permutation must reproduce the label shuffle between
    // k = 0 and k = 2π recorded by the tracker.
    let perm = word.permutation();
    for s in 0..STRANDS {
        if strings.endpoint_permutation[first[s]] != first[perm[s]] {
            return Err(Attempt::Fatal(Error::GridTooCoarse { k: 2.0 * PI }));
        }
    }
    Ok(word)
}

fn localize(
    strings: &EnergyStrings,
    proj: &Projector,
    ka: f64,
    ea: [c64; 4],
    kb: f64,
    eb: [c64; 4],
    out: &mut Vec<Generator>,
) -> std::result::Result<(), Attempt> {
    let (oa, ob) = (proj.order(&ea), proj.order(&eb));
    if oa == ob {
        return Ok(());
    }
    if kb - ka < LOCALIZE_DK {
        // Only disjoint adjacent transpositions can be resolved at this scale.
        let mut cur = oa;
        let mut p = 0;
        let mut swaps = Vec::new();
        while p + 1 < STRANDS {
            if cur[p] != ob[p] && cur[p] == ob[p + 1] && cur[p + 1] == ob[p] {
                swaps.push(p);
                cur.swap(p, p + 1);
                p += 2;
            } else {
                p += 1;
            }
        }
        if cur != ob {
            return Err(Error::GridTooCoarse { k: ka }.into());
        }
        let k = 0.5 * (ka + kb);
        for p in swaps {
            let (left, right) = (oa[p], oa[p + 1]);
            let y_left = proj.y(0.5 * (ea[left] + eb[left]));
            let y_right = proj.y(0.5 * (ea[right] + eb[right]));
            let sign = if y_left > y_right { 1 } else { -1 };
            out.push(Generator { position: p + 1, sign, k });
        }
        return Ok(());
    }
    let km = 0.5 * (ka + kb);
    let raw = bloch_eigenvalues(&strings.params, km)?;
    let (perm, _, _) = best_assignment4(&ea, &raw);
    let em = [raw[perm[0]], raw[perm[1]], raw[perm[2]], raw[perm[3]]];
    localize(strings, proj, ka, ea, km, em, out)?;
    localize(strings, proj, km, em, kb, eb, out)
}

/// Cycles of the positional permutation, each listing its strands in order
/// of traversal starting from the smallest.
pub fn closure_components(word: &BraidWord) -> Vec<Vec<usize>> {
    let perm = word.permutation();
    let mut seen = vec![false; word.strand_count];
    let mut cycles = Vec::new();
    for start in 0..word.strand_count {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut s = start;
        while !seen[s] {
            seen[s] = true;
            cycle.push(s);
            s = perm[s];
        }
        cycles.push(cycle);
    }
    cycles
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkingMatrix {
    pub components: Vec<Vec<usize>>,
    /// Pairwise linking numbers; symmetric with zero diagonal.
    pub lk: Vec<Vec<i32>>,
    /// Signed self-crossing sum of each component.
    pub writhe: Vec<i32>,
}

impl LinkingMatrix {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn strand_count(&self) -> usize {
        self.components.iter().map(Vec::len).sum()
    }
}

pub fn linking_invariants(word: &BraidWord) -> LinkingMatrix {
    let components = closure_components(word);
    let mut owner = vec![0; word.strand_count];
    for (c, cycle) in components.iter().enumerate() {
        for &s in cycle {
            owner[s] = c;
        }
    }
    let n = components.len();
    let mut twice_lk = vec![vec![0i32; n]; n];
    let mut writhe = vec![0i32; n];
    let (crossings, _) = word.replay();
    for x in crossings {
        let (a, b) = (owner[x.from_left], owner[x.from_right]);
        if a == b {
            writhe[a] += x.sign as i32;
        } else {
            twice_lk[a][b] += x.sign as i32;
            twice_lk[b][a] += x.sign as i32;
        }
    }
    // Crossings between two closed components always come in an even count.
    let lk = twice_lk
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| {
                    debug_assert!(v % 2 == 0, "odd inter-component crossing sum");
                    v / 2
                })
                .collect()
        })
        .collect();
    LinkingMatrix { components, lk, writhe }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KnotTag {
    /// Every strand closes on itself; no linking.
    Unlink(usize),
    /// Unlinked components, at least one winding several times.
    Unknots(usize),
    /// A single Hopf-linked pair, any further components unlinked.
    HopfLinkPlus,
    /// One cluster of `m ≥ 3` components linked pairwise once.
    CatenaneChain(usize),
    Other,
}

impl fmt::Display for KnotTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KnotTag::Unlink(n) => write!(f, "Unlink({n})"),
            KnotTag::Unknots(n) => write!(f, "Unknots({n})"),
            KnotTag::HopfLinkPlus => f.write_str("HopfLinkPlus"),
            KnotTag::CatenaneChain(m) => write!(f, "CatenaneChain({m})"),
            KnotTag::Other => f.write_str("Other"),
        }
    }
}

impl FromStr for KnotTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("unknown knot tag {s:?}"));
        let arg = |prefix: &str| -> Option<usize> {
            s.strip_prefix(prefix)?.strip_suffix(')')?.parse().ok()
        };
        match s {
            "HopfLinkPlus" => Ok(KnotTag::HopfLinkPlus),
            "Other" => Ok(KnotTag::Other),
            _ => {
                if let Some(n) = arg("Unlink(") {
                    Ok(KnotTag::Unlink(n))
                } else if let Some(n) = arg("Unknots(") {
                    Ok(KnotTag::Unknots(n))
                } else if let Some(m) = arg("CatenaneChain(") {
                    Ok(KnotTag::CatenaneChain(m))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub strands: usize,
    pub components: usize,
    /// Upper-triangle `|lk|` entries, ascending.
    pub abs_lk: Vec<u32>,
    pub total_writhe: i32,
    /// Sizes of the connected clusters (two or more components) of the
    /// linking graph, descending.
    pub linked_clusters: Vec<usize>,
}

impl InvariantSummary {
    pub fn from_linking(inv: &LinkingMatrix) -> Self {
        let n = inv.component_count();
        let mut abs_lk = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                abs_lk.push(inv.lk[a][b].unsigned_abs());
            }
        }
        abs_lk.sort_unstable();

        // Union-find over linked pairs.
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for a in 0..n {
            for b in a + 1..n {
                if inv.lk[a][b] != 0 {
                    let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for a in 0..n {
            *sizes.entry(root(&mut parent, a)).or_default() += 1;
        }
        let mut linked_clusters: Vec<usize> = sizes.into_values().filter(|&s| s >= 2).collect();
        linked_clusters.sort_unstable_by(|a, b| b.cmp(a));

        Self {
            strands: inv.strand_count(),
            components: n,
            abs_lk,
            total_writhe: inv.writhe.iter().sum(),
            linked_clusters,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnotClass {
    pub tag: KnotTag,
    pub summary: InvariantSummary,
}

/// Assigns a knot category from the closure invariants.
///
/// The tag depends on the invariant summary only. A component made of `m`
/// strands needs at least `m - 1` self-crossings to connect them; the
/// unknotted categories require the total writhe not to exceed that budget,
/// `strands - components`.
pub fn classify_knot(inv: &LinkingMatrix) -> KnotClass {
    let summary = InvariantSummary::from_linking(inv);
    let tag = tag_for(&summary);
    KnotClass { tag, summary }
}

fn tag_for(s: &InvariantSummary) -> KnotTag {
    let writhe_budget = s.strands.saturating_sub(s.components) as i32;
    if s.total_writhe.abs() > writhe_budget {
        return KnotTag::Other;
    }
    let linked: Vec<u32> = s.abs_lk.iter().copied().filter(|&v| v != 0).collect();
    if linked.is_empty() {
        return if s.components == s.strands && s.total_writhe == 0 {
            KnotTag::Unlink(s.components)
        } else {
            KnotTag::Unknots(s.components)
        };
    }
    if linked.iter().any(|&v| v != 1) {
        return KnotTag::Other;
    }
    if linked.len() == 1 {
        return KnotTag::HopfLinkPlus;
    }
    match s.linked_clusters.as_slice() {
        [m] if *m >= 3 => KnotTag::CatenaneChain(*m),
        _ => KnotTag::Other,
    }
}

/// Tracks, extracts and classifies in one call.
pub fn knot_class_of(strings: &EnergyStrings, theta: f64) -> Result<(BraidWord, LinkingMatrix, KnotClass)> {
    let word = extract_braid(strings, theta)?;
    let inv = linking_invariants(&word);
    let class = classify_knot(&inv);
    Ok((word, inv, class))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(position: usize, sign: i8) -> Generator {
        Generator { position, sign, k: 0.0 }
    }

    #[test]
    fn empty_word_is_four_component_unlink() {
        let w = BraidWord::new(4, vec![]);
        assert_eq!(closure_components(&w).len(), 4);
        let inv = linking_invariants(&w);
        assert!(inv.lk.iter().flatten().all(|&v| v == 0));
        assert_eq!(classify_knot(&inv).tag, KnotTag::Unlink(4));
    }

    #[test]
    fn double_transposition_gives_two_pairs() {
        let w = BraidWord::new(4, vec![g(1, 1), g(3, 1)]);
        let comps = closure_components(&w);
        assert_eq!(comps, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn sigma_one_squared_is_hopf() {
        let w = BraidWord::new(4, vec![g(1, 1), g(1, 1)]);
        let inv = linking_invariants(&w);
        assert_eq!(inv.component_count(), 4);
        assert_eq!(inv.lk[0][1], 1);
        assert_eq!(classify_knot(&inv).tag, KnotTag::HopfLinkPlus);

        let w = BraidWord::new(4, vec![g(1, -1), g(1, -1)]);
        assert_eq!(linking_invariants(&w).lk[0][1], -1);
    }

    #[test]
    fn single_crossing_closes_to_unknot() {
        let w = BraidWord::new(4, vec![g(2, 1)]);
        let inv = linking_invariants(&w);
        assert_eq!(inv.component_count(), 3);
        assert_eq!(inv.writhe.iter().sum::<i32>(), 1);
        assert_eq!(classify_knot(&inv).tag, KnotTag::Unknots(3));
    }

    #[test]
    fn trefoil_like_component_is_other() {
        // σ1³ on two strands: one component, writhe 3 > budget 1.
        let w = BraidWord::new(4, vec![g(1, 1), g(1, 1), g(1, 1)]);
        assert_eq!(classify_knot(&linking_invariants(&w)).tag, KnotTag::Other);
    }

    #[test]
    fn fully_linked_quadruple_is_catenane() {
        // Full twist on four strands links every pair once.
        let mut gens = Vec::new();
        for _ in 0..2 {
            gens.extend([g(1, 1), g(2, 1), g(3, 1), g(1, 1), g(2, 1), g(1, 1)]);
        }
        let inv = linking_invariants(&BraidWord::new(4, gens));
        assert_eq!(inv.component_count(), 4);
        assert!((0..4).all(|a| (0..4).all(|b| a == b || inv.lk[a][b] == 1)));
        assert_eq!(classify_knot(&inv).tag, KnotTag::CatenaneChain(4));
    }

    #[test]
    fn signed_crossings_decompose() {
        let w = BraidWord::new(4, vec![g(1, 1), g(2, -1), g(1, 1), g(3, 1), g(2, 1), g(3, 1)]);
        let inv = linking_invariants(&w);
        let n = inv.component_count();
        let mut pair_sum = 0;
        for a in 0..n {
            assert_eq!(inv.lk[a][a], 0);
            for b in a + 1..n {
                assert_eq!(inv.lk[a][b], inv.lk[b][a]);
                pair_sum += inv.lk[a][b];
            }
        }
        assert_eq!(w.total_sign(), 2 * pair_sum + inv.writhe.iter().sum::<i32>());
    }

    #[test]
    fn free_reduction_cancels_nested_pairs() {
        let w = BraidWord::new(4, vec![g(1, 1), g(2, 1), g(2, -1), g(1, -1), g(3, 1)]);
        assert_eq!(w.free_reduce().tokens(), "s3");
    }

    #[test]
    fn token_round_trip_and_errors() {
        let w = BraidWord::from_tokens(4, "s1 s2^-1 s3").unwrap();
        assert_eq!(w.tokens(), "s1 s2^-1 s3");
        assert_eq!(BraidWord::from_tokens(4, "").unwrap().len(), 0);
        assert!(BraidWord::from_tokens(4, "s4").is_err());
        assert!(BraidWord::from_tokens(4, "x1").is_err());
    }

    #[test]
    fn tag_text_round_trip() {
        for tag in [KnotTag::Unlink(4), KnotTag::Unknots(3), KnotTag::HopfLinkPlus, KnotTag::CatenaneChain(4), KnotTag::Other] {
            assert_eq!(tag.to_string().parse::<KnotTag>().unwrap(), tag);
        }
        assert!("Hopf".parse::<KnotTag>().is_err());
    }

    #[test]
    fn representative_points_give_expected_closures() {
        use crate::model::RepresentativePoint;
        use crate::spectral::track_bands;
        let mut seen = Vec::new();
        for point in RepresentativePoint::ALL {
            let strings = track_bands(&point.params(), 512).unwrap();
            let (_, _, class) = knot_class_of(&strings, 0.0).unwrap();
            seen.push(class);
        }
        let tags: Vec<KnotTag> = seen.iter().map(|c| c.tag).collect();
        assert_eq!(
            tags,
            vec![KnotTag::Unlink(4), KnotTag::Unknots(3), KnotTag::HopfLinkPlus, KnotTag::HopfLinkPlus, KnotTag::CatenaneChain(4)]
        );
        for i in 0..5 {
            for j in i + 1..5 {
                assert_ne!(seen[i], seen[j]);
            }
        }
    }
}
