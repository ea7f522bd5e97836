#![allow(dead_code)]

//! Test-side reference implementations that share no code with the library
//! beyond the single-particle Hamiltonian builder.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use nhknot::c64;

pub fn z(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

/// Minimum over permutations of the largest pairwise distance, computed by
/// sorting both sides the same way and then fixing up with greedy matching.
pub fn matched_distance(a: &[c64], b: &[c64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    let mut order: Vec<usize> = (0..a.len()).collect();
    // Match the most isolated values first so clusters do not steal partners.
    order.sort_by(|&i, &j| a[i].re.total_cmp(&a[j].re).then(a[i].im.total_cmp(&a[j].im)));
    for i in order {
        let (mut best, mut bd) = (usize::MAX, f64::INFINITY);
        for (j, &y) in b.iter().enumerate() {
            if !used[j] && (a[i] - y).norm() < bd {
                best = j;
                bd = (a[i] - y).norm();
            }
        }
        used[best] = true;
        worst = worst.max(bd);
    }
    worst
}

/// Half-filled sector of the many-body Hamiltonian built from a
/// single-particle matrix, with Jordan-Wigner signs; site `i` is bit `i`.
pub struct Fock {
    pub sites: usize,
    pub states: Vec<u32>,
    pub index: std::collections::HashMap<u32, usize>,
}

fn jw_sign(state: u32, site: usize) -> f64 {
    if (state & ((1u32 << site) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `c_i† c_j |state⟩` as `(sign, new_state)`.
pub fn hop(state: u32, i: usize, j: usize) -> Option<(f64, u32)> {
    if state & (1 << j) == 0 {
        return None;
    }
    let s1 = jw_sign(state, j);
    let mid = state ^ (1 << j);
    if mid & (1 << i) != 0 {
        return None;
    }
    let s2 = jw_sign(mid, i);
    Some((s1 * s2, mid | (1 << i)))
}

impl Fock {
    pub fn half_filled(sites: usize) -> Self {
        let states: Vec<u32> = (0u32..(1 << sites)).filter(|s| s.count_ones() as usize == sites / 2).collect();
        let index = states.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        Fock { sites, states, index }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn hamiltonian(&self, h: &Mat<c64>) -> Mat<c64> {
        let n = self.dim();
        let mut out = Mat::<c64>::zeros(n, n);
        for (col, &s) in self.states.iter().enumerate() {
            for i in 0..self.sites {
                for j in 0..self.sites {
                    let amp = h[(i, j)];
                    if amp == z(0.0, 0.0) {
                        continue;
                    }
                    if let Some((sign, t)) = hop(s, i, j) {
                        out[(self.index[&t], col)] += amp * sign;
                    }
                }
            }
        }
        out
    }
}

pub struct ManyBodyState {
    pub energy: c64,
    pub right: Vec<c64>,
    /// Normalized so that `⟨left|right⟩ = 1`.
    pub left: Vec<c64>,
    /// Distance from the chosen energy to the nearest other level.
    pub isolation: f64,
}

fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Eigenvector of `m` for the eigenvalue nearest `target` by inverse
/// iteration, normalized to unit length.
fn inverse_iteration(m: &Mat<c64>, target: c64) -> Vec<c64> {
    let n = m.nrows();
    let mut shifted = m.clone();
    // A small offset keeps the shifted matrix invertible.
    let shift = target + z(1e-9, 1e-9);
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let lu = shifted.partial_piv_lu();
    let mut x = Mat::<c64>::from_fn(n, 1, |i, _| z(1.0 + 0.1 * (i % 7) as f64, 0.05 * (i % 5) as f64));
    for _ in 0..3 {
        x = lu.solve(&x);
        let norm = x.norm_l2();
        x = x * faer::Scale(z(1.0 / norm, 0.0));
    }
    (0..n).map(|r| x[(r, 0)]).collect()
}

/// `T|s⟩` for the translation by one unit cell, `c_i† → c_{i+4}†`, as
/// `(sign, state)`. The sign is that of sorting the shifted creation
/// operators back into ascending order.
fn translate(state: u32, sites: usize) -> (f64, u32) {
    let shifted: Vec<usize> = (0..sites).filter(|&i| state >> i & 1 == 1).map(|i| (i + 4) % sites).collect();
    let mut inversions = 0;
    for a in 0..shifted.len() {
        for b in a + 1..shifted.len() {
            if shifted[a] > shifted[b] {
                inversions += 1;
            }
        }
    }
    let out = shifted.iter().fold(0u32, |acc, &i| acc | 1 << i);
    (if inversions % 2 == 0 { 1.0 } else { -1.0 }, out)
}

/// Eigenvalues of the Fock matrix, solved one momentum sector at a time.
///
/// A sector vector is `Σ_j e^{-ikj} T^j |r⟩` for one representative `r` of
/// each translation orbit; vectors from different orbits are orthogonal and
/// those that cancel are dropped. The blocks are `Bᴴ H B`.
fn sector_eigenvalues(fock: &Fock, hm: &Mat<c64>) -> Vec<c64> {
    let n = fock.dim();
    let cells = fock.sites / 4;
    let step: Vec<(f64, usize)> = fock
        .states
        .iter()
        .map(|&s| {
            let (sign, out) = translate(s, fock.sites);
            (sign, fock.index[&out])
        })
        .collect();
    let t = Mat::<c64>::from_fn(n, n, |r, c| if step[c].1 == r { z(step[c].0, 0.0) } else { z(0.0, 0.0) });
    let comm = &t * hm - hm * &t;
    assert!(comm.norm_max() < 1e-12, "translation does not commute with H");

    let mut seen = vec![false; n];
    let mut reps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        reps.push(start);
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = step[i].1;
        }
    }

    let mut values = Vec::with_capacity(n);
    for m in 0..cells {
        let phase = c64::from_polar(1.0, -2.0 * PI * m as f64 / cells as f64);
        let mut basis: Vec<Vec<c64>> = Vec::new();
        for &r in &reps {
            let mut v = vec![z(0.0, 0.0); n];
            let (mut i, mut amp) = (r, z(1.0, 0.0));
            for _ in 0..cells {
                v[i] += amp;
                amp *= phase * step[i].0;
                i = step[i].1;
            }
            let norm = inner(&v, &v).re.sqrt();
            if norm > 1e-8 {
                basis.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        let b = Mat::<c64>::from_fn(n, basis.len(), |r, c| basis[c][r]);
        let block = b.adjoint() * hm * &b;
        values.extend(block.eigenvalues().expect("eig"));
    }
    assert_eq!(values.len(), n, "momentum sectors do not cover the Fock space");
    values
}

/// Ground state by lowest real part, ties by lowest imaginary part.
///
/// Eigenvalues come from the momentum blocks; both eigenvectors are found by
/// inverse iteration on the full matrix at the chosen level.
pub fn fock_ground_state(fock: &Fock, h: &Mat<c64>) -> ManyBodyState {
    let hm = fock.hamiltonian(h);
    let vals = sector_eigenvalues(fock, &hm);
    let mut best = 0;
    for i in 1..vals.len() {
        let (a, b) = (vals[i], vals[best]);
        if a.re < b.re - 1e-9 || ((a.re - b.re).abs() <= 1e-9 && a.im < b.im) {
            best = i;
        }
    }
    let energy = vals[best];
    let isolation = vals
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, v)| (v - energy).norm())
        .fold(f64::INFINITY, f64::min);

    let right = inverse_iteration(&hm, energy);
    let mut left = inverse_iteration(&hm.adjoint().to_owned(), energy.conj());
    let ov = inner(&left, &right);
    // Want ⟨left|right⟩ = 1: scale left by 1/conj(ov).
    let scale = (z(1.0, 0.0) / ov).conj();
    for x in &mut left {
        *x *= scale;
    }
    let residual = |m: &Mat<c64>, v: &[c64], e: c64| {
        let col = Mat::from_fn(v.len(), 1, |i, _| v[i]);
        let r = m * &col;
        (0..v.len()).map(|i| (r[(i, 0)] - e * v[i]).norm()).fold(0.0, f64::max)
            / v.iter().map(|x| x.norm()).fold(0.0, f64::max)
    };
    assert!(residual(&hm, &right, energy) < 1e-9, "right ground state did not converge");
    assert!(residual(&hm.adjoint().to_owned(), &left, energy.conj()) < 1e-9, "left ground state did not converge");
    ManyBodyState { energy, right, left, isolation }
}

/// `⟨L| c_i† c_j |R⟩` for all sites in `0..n`.
pub fn fock_correlation(fock: &Fock, gs: &ManyBodyState, n: usize) -> Mat<c64> {
    let mut c = Mat::<c64>::zeros(n, n);
    for (col, &s) in fock.states.iter().enumerate() {
        let r = gs.right[col];
        for i in 0..n {
            for j in 0..n {
                if let Some((sign, t)) = hop(s, i, j) {
                    c[(i, j)] += gs.left[fock.index[&t]].conj() * r * sign;
                }
            }
        }
    }
    c
}

/// `ρ_A = Tr_B |R⟩⟨L|` with `A` the first `n_a` sites.
///
/// With `A` first in the Jordan-Wigner order the partial trace is a plain
/// reshape: `ρ_A[a, a'] = Σ_b R(a, b) conj(L(a', b))`.
pub fn fock_reduced_density(fock: &Fock, gs: &ManyBodyState, n_a: usize) -> Mat<c64> {
    let dim_a = 1usize << n_a;
    let mask = (1u32 << n_a) - 1;
    let mut rho = Mat::<c64>::zeros(dim_a, dim_a);
    let mut by_b: std::collections::HashMap<u32, Vec<(usize, usize)>> = Default::default();
    for (k, &s) in fock.states.iter().enumerate() {
        by_b.entry(s >> n_a).or_default().push(((s & mask) as usize, k));
    }
    for group in by_b.values() {
        for &(a, ka) in group {
            for &(a2, kb) in group {
                rho[(a, a2)] += gs.right[ka] * gs.left[kb].conj();
            }
        }
    }
    rho
}

/// `-Tr ρ_A log ρ_A` with the principal matrix logarithm.
pub fn fock_entropy(fock: &Fock, gs: &ManyBodyState, n_a: usize) -> c64 {
    let p: Vec<c64> = fock_reduced_density(fock, gs, n_a).eigenvalues().expect("eig");
    -p.iter().filter(|x| x.norm() > 1e-14).map(|&x| x * x.ln()).sum::<c64>()
}

/// All `2^n` products `Π_m (η_m or 1 - η_m)`.
pub fn gaussian_spectrum(etas: &[c64]) -> Vec<c64> {
    let one = z(1.0, 0.0);
    (0..1u32 << etas.len())
        .map(|mask| {
            etas.iter()
                .enumerate()
                .map(|(m, &e)| if mask >> m & 1 == 1 { e } else { one - e })
                .product()
        })
        .collect()
}

/// Whether principal logarithms add up over every product of mode factors,
/// so that the matrix logarithm of a Gaussian `ρ_A` and the per-mode sum
/// agree. Factors close to the negative real axis make the branch ambiguous.
pub fn principal_logs_additive(etas: &[c64]) -> bool {
    let one = z(1.0, 0.0);
    // Factors this small carry negligible weight whatever their phase.
    let arg = |x: c64| if x.norm() < 1e-9 { 0.0 } else { x.arg() };
    let (mut hi, mut lo) = (0.0, 0.0);
    for &e in etas {
        let (a, b) = (arg(e), arg(one - e));
        hi += a.max(b);
        lo += a.min(b);
    }
    hi < PI - 1e-6 && lo > -PI + 1e-6
}

/// `⟨L_a|R_b⟩ ⟨L_b|R_a⟩` for biorthonormal many-body states.
pub fn fock_fidelity(a: &ManyBodyState, b: &ManyBodyState) -> c64 {
    inner(&a.left, &b.right) * inner(&b.left, &a.right)
}
