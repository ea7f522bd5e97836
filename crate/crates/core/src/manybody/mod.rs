//! Half-filled biorthogonal Slater states of the real-space chain.
//!
//! The right ground state fills the right eigenvectors of the lowest real
//! energies; the left ground state fills the matching left eigenvectors.
//! Everything else (correlations, entropy, overlaps) follows from the
//! occupied-orbital matrices.

use std::ops::Range;

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity_residual, ComplexMatrix};
use crate::model::{build_real_hamiltonian, LatticeSpec, ModelParams};
use crate::spectral::{biorthogonal_eigensystem, eigenvalues_dense};

mod fidelity;
mod fit;

pub use fidelity::*;
pub use fit::*;

/// Real parts closer than this count as level with the Fermi level.
pub const FERMI_TIE_TOL: f64 = 1e-9;
/// Smallest acceptable separation between occupied and empty levels.
pub const MIN_FERMI_GAP: f64 = 1e-10;
/// `η` this close to 0 or 1 contributes nothing to the entropy.
pub const ETA_CUTOFF: f64 = 1e-12;
/// Imaginary entropy above this is flagged on the result.
pub const ENTROPY_IMAG_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct BiorthogonalGroundState {
    pub sites: usize,
    /// Indices into `energies`, in filling order.
    pub occupied: Vec<usize>,
    pub energies: Vec<c64>,
    /// Occupied right orbitals as columns.
    pub right_occ: ComplexMatrix,
    /// Occupied left orbitals as columns, `left_occᴴ right_occ = I`.
    pub left_occ: ComplexMatrix,
    /// Separation between the last filled and first empty level. When real
    /// parts tie at the Fermi level this is the imaginary-part separation
    /// inside the tie.
    pub fermi_gap: f64,
    /// Whether the filling had to be decided by imaginary parts.
    pub imag_tie_break: bool,
    /// Condition number of the right eigenvector matrix.
    pub condition: f64,
}

impl BiorthogonalGroundState {
    pub fn occupied_count(&self) -> usize {
        self.occupied.len()
    }

    pub fn biorthogonality_residual(&self) -> f64 {
        identity_residual(&(self.left_occ.adjoint() * &self.right_occ))
    }

    /// Sum of occupied energies.
    pub fn energy(&self) -> c64 {
        self.occupied.iter().map(|&i| self.energies[i]).sum()
    }
}

/// Picks `n_occ` levels of lowest real part.
///
/// Levels whose real part is within [`FERMI_TIE_TOL`] of the last filled
/// level form a tie window, filled by ascending imaginary part and then by
/// index. Returns the filling order, the Fermi gap and whether the tie
/// window was used.
pub fn fill_levels(energies: &[c64], n_occ: usize) -> Result<(Vec<usize>, f64, bool)> {
    let n = energies.len();
    if n_occ == 0 || n_occ >= n {
        return Err(Error::Dimension(format!("cannot fill {n_occ} of {n} levels")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| energies[a].re.total_cmp(&energies[b].re).then(a.cmp(&b)));
    let fermi_re = energies[order[n_occ - 1]].re;
    let in_window = |i: usize| (energies[i].re - fermi_re).abs() <= FERMI_TIE_TOL;

    let below: Vec<usize> = order.iter().copied().filter(|&i| !in_window(i) && energies[i].re < fermi_re).collect();
    let mut window: Vec<usize> = order.iter().copied().filter(|&i| in_window(i)).collect();
    let above: Vec<usize> = order.iter().copied().filter(|&i| !in_window(i) && energies[i].re > fermi_re).collect();
    window.sort_by(|&a, &b| energies[a].im.total_cmp(&energies[b].im).then(a.cmp(&b)));

    let take = n_occ - below.len();
    let mut occupied = below;
    occupied.extend_from_slice(&window[..take]);

    let (gap, tie) = if take < window.len() {
        (energies[window[take]].im - energies[window[take - 1]].im, true)
    } else {
        // The whole window is filled, so the next level is strictly above it.
        (energies[above[0]].re - fermi_re, false)
    };
    if !(gap >= MIN_FERMI_GAP) {
        return Err(Error::DegenerateFilling { gap });
    }
    Ok((occupied, gap, tie))
}

/// Half-filled ground state of `h`.
pub fn ground_state(h: &ComplexMatrix) -> Result<BiorthogonalGroundState> {
    let n = h.nrows();
    if n == 0 || n % 2 != 0 {
        return Err(Error::Dimension(format!("half filling needs an even number of sites, got {n}")));
    }
    let basis = biorthogonal_eigensystem(h)?;
    let (occupied, fermi_gap, imag_tie_break) = fill_levels(&basis.eigenvalues, n / 2)?;
    let right_occ = Mat::from_fn(n, occupied.len(), |i, m| basis.right_vectors[(i, occupied[m])]);
    let left_occ = Mat::from_fn(n, occupied.len(), |i, m| basis.left_vectors[(i, occupied[m])]);
    Ok(BiorthogonalGroundState {
        sites: n,
        occupied,
        energies: basis.eigenvalues,
        right_occ,
        left_occ,
        fermi_gap,
        imag_tie_break,
        condition: basis.condition,
    })
}

/// Builds the chain and returns its half-filled ground state.
pub fn lattice_ground_state(params: &ModelParams, sites: usize) -> Result<BiorthogonalGroundState> {
    let spec = LatticeSpec::from_sites(sites)?;
    ground_state(&build_real_hamiltonian(params, &spec)?)
}

/// `C_ij = ⟨G_L| c_i† c_j |G_R⟩` on a contiguous block of sites.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    pub subsystem: Range<usize>,
    pub entries: ComplexMatrix,
}

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.subsystem.len()
    }

    /// Restriction to a sub-block given in absolute site indices.
    pub fn block(&self, range: Range<usize>) -> Result<CorrelationMatrix> {
        if range.start < self.subsystem.start || range.end > self.subsystem.end || range.is_empty() {
            return Err(Error::Dimension(format!("{range:?} is not inside {:?}", self.subsystem)));
        }
        let off = range.start - self.subsystem.start;
        let len = range.len();
        let entries = self.entries.submatrix(off, off, len, len).to_owned();
        Ok(CorrelationMatrix { subsystem: range, entries })
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    /// `‖C² - C‖` (max entry).
    pub fn idempotency_residual(&self) -> f64 {
        let sq = &self.entries * &self.entries;
        crate::linalg::max_abs_diff(&sq, &self.entries)
    }
}

pub fn correlation_matrix(gs: &BiorthogonalGroundState, subsystem: Range<usize>) -> Result<CorrelationMatrix> {
    if subsystem.is_empty() || subsystem.end > gs.sites {
        return Err(Error::Dimension(format!("subsystem {subsystem:?} outside 0..{}", gs.sites)));
    }
    let (start, len) = (subsystem.start, subsystem.len());
    let l = gs.left_occ.subrows(start, len);
    let r = gs.right_occ.subrows(start, len);
    let entries = l.conjugate() * r.transpose();
    Ok(CorrelationMatrix { subsystem, entries })
}

/// Entanglement entropy with its imaginary residue kept alongside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entropy {
    /// `Re S`.
    pub value: f64,
    /// `Im S`; zero for Hermitian models.
    pub imag: f64,
}

impl Entropy {
    pub fn is_real(&self) -> bool {
        self.imag.abs() <= ENTROPY_IMAG_TOL
    }
}

/// `-Σ [η log η + (1-η) log(1-η)]` with principal-branch logarithms.
pub fn entropy_from_eigenvalues(etas: &[c64]) -> c64 {
    let one = c64::new(1.0, 0.0);
    let term = |x: c64| if x.norm() < ETA_CUTOFF { c64::new(0.0, 0.0) } else { x * x.ln() };
    -etas.iter().map(|&eta| term(eta) + term(one - eta)).sum::<c64>()
}

pub fn entanglement_entropy(c: &CorrelationMatrix) -> Result<Entropy> {
    let etas = eigenvalues_dense(&c.entries)?;
    let s = entropy_from_eigenvalues(&etas);
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::Solver { fingerprint: crate::linalg::fingerprint(&c.entries), reason: "non-finite entropy".into() });
    }
    Ok(Entropy { value: s.re, imag: s.im })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveMode {
    VaryCut,
    VarySize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub mode: CurveMode,
    /// Total sites for cut curves.
    pub sites: Option<usize>,
    /// `L_A` for cut curves, `L` for size curves.
    pub abscissa: Vec<usize>,
    pub entropy: Vec<f64>,
    pub entropy_imag: Vec<f64>,
}

impl EntropyCurve {
    pub fn max_imag(&self) -> f64 {
        self.entropy_imag.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Entropy of the first `L_A` sites for every cut, from a single solve.
pub fn entropy_vs_cut(params: &ModelParams, sites: usize, cuts: &[usize]) -> Result<EntropyCurve> {
    if let Some(&bad) = cuts.iter().find(|&&c| c == 0 || c >= sites) {
        return Err(Error::InvalidParams(format!("cut {bad} outside [1, {}]", sites.saturating_sub(1))));
    }
    let gs = lattice_ground_state(params, sites)?;
    entropy_vs_cut_from(&gs, cuts)
}

/// As [`entropy_vs_cut`] for an existing ground state.
///
/// Cuts past the middle are evaluated on the complementary block. The two
/// correlation spectra agree up to `η ↔ 1 - η` and trivial 0/1 modes, which
/// leaves the entropy unchanged, and the smaller block is cheaper.
pub fn entropy_vs_cut_from(gs: &BiorthogonalGroundState, cuts: &[usize]) -> Result<EntropyCurve> {
    let sites = gs.sites;
    let mut curve = EntropyCurve {
        mode: CurveMode::VaryCut,
        sites: Some(sites),
        abscissa: Vec::with_capacity(cuts.len()),
        entropy: Vec::with_capacity(cuts.len()),
        entropy_imag: Vec::with_capacity(cuts.len()),
    };
    if let Some(&bad) = cuts.iter().find(|&&c| c == 0 || c >= sites) {
        return Err(Error::InvalidParams(format!("cut {bad} outside [1, {}]", sites.saturating_sub(1))));
    }
    if cuts.is_empty() {
        return Ok(curve);
    }
    let block_of = |cut: usize| if 2 * cut <= sites { 0..cut } else { cut..sites };
    let lo = cuts.iter().map(|&c| block_of(c).start).min().unwrap_or(0);
    let hi = cuts.iter().map(|&c| block_of(c).end).max().unwrap_or(sites);
    let full = correlation_matrix(gs, lo..hi)?;
    for &cut in cuts {
        let s = entanglement_entropy(&full.block(block_of(cut))?)?;
        curve.abscissa.push(cut);
        curve.entropy.push(s.value);
        curve.entropy_imag.push(s.imag);
    }
    Ok(curve)
}

/// Half-system entropy `S(L/2)` for each lattice size.
pub fn entropy_vs_size(params: &ModelParams, sizes: &[usize], workers: usize) -> Result<EntropyCurve> {
    let values = crate::parallel::map_indexed(workers, sizes, |_, &l| -> Result<Entropy> {
        let gs = lattice_ground_state(params, l)?;
        entanglement_entropy(&correlation_matrix(&gs, 0..l / 2)?)
    });
    let mut curve = EntropyCurve {
        mode: CurveMode::VarySize,
        sites: None,
        abscissa: sizes.to_vec(),
        entropy: Vec::with_capacity(sizes.len()),
        entropy_imag: Vec::with_capacity(sizes.len()),
    };
    for v in values {
        let s = v?;
        curve.entropy.push(s.value);
        curve.entropy_imag.push(s.imag);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RepresentativePoint;

    #[test]
    fn filling_prefers_lower_real_then_lower_imag() {
        let e = [c64::new(-1.0, 0.0), c64::new(0.0, 0.5), c64::new(0.0, -0.5), c64::new(1.0, 0.0)];
        let (occ, gap, tie) = fill_levels(&e, 2).unwrap();
        assert_eq!(occ, vec![0, 2]);
        assert!(tie);
        assert!((gap - 1.0).abs() < 1e-15);

        let (occ, gap, tie) = fill_levels(&[c64::new(2.0, 0.0), c64::new(-2.0, 0.0)], 1).unwrap();
        assert_eq!(occ, vec![1]);
        assert!(!tie);
        assert_eq!(gap, 4.0);
    }

    #[test]
    fn exact_degeneracy_at_fermi_level_is_rejected() {
        let e = [c64::new(-1.0, 0.0), c64::new(0.0, 0.0), c64::new(0.0, 0.0), c64::new(1.0, 0.0)];
        assert!(matches!(fill_levels(&e, 2), Err(Error::DegenerateFilling { .. })));
    }

    #[test]
    fn entropy_of_half_and_product_states() {
        let s = entropy_from_eigenvalues(&[c64::new(0.5, 0.0)]);
        assert!((s.re - 2f64.ln()).abs() < 1e-15);
        assert!(entropy_from_eigenvalues(&[c64::new(0.0, 0.0), c64::new(1.0, 0.0)]).norm() < 1e-15);
    }

    #[test]
    fn hermitian_ground_state_is_orthonormal() {
        let gs = lattice_ground_state(&ModelParams::default().with_t2(2.0), 16).unwrap();
        assert_eq!(gs.occupied_count(), 8);
        assert!(gs.biorthogonality_residual() < 1e-10);
        // Degenerate levels leave a gauge freedom in the orbitals, so compare
        // the spectral projector: it must be the orthogonal one.
        let c = correlation_matrix(&gs, 0..16).unwrap();
        assert!(crate::linalg::max_abs_diff(&c.entries, &c.entries.adjoint().to_owned()) < 1e-10);
        let half = correlation_matrix(&gs, 0..8).unwrap();
        for eta in eigenvalues_dense(&half.entries).unwrap() {
            assert!(eta.im.abs() < 1e-10 && eta.re > -1e-10 && eta.re < 1.0 + 1e-10);
        }
    }

    #[test]
    fn point_b_ground_state() {
        let gs = lattice_ground_state(&RepresentativePoint::B.params(), 160).unwrap();
        assert!(gs.fermi_gap > 0.0);
        assert!(gs.biorthogonality_residual() < 1e-8);
        let c = correlation_matrix(&gs, 0..160).unwrap();
        assert!(c.idempotency_residual() < 1e-7);
        assert!((c.trace() - c64::new(80.0, 0.0)).norm() < 1e-7);
    }
}
