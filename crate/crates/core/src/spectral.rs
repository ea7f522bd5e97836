//! Eigenvalues of the Bloch and real-space matrices.
//!
//! Bloch spectra are available both numerically ([`eig_dense`] on
//! [`build_bloch`]) and in closed form ([`analytic_eigenvalues`]). Bands are
//! followed across the Brillouin zone by exact optimal assignment between
//! neighbouring k samples, which yields the energy strings consumed by the
//! braid extraction.

use std::f64::consts::PI;

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, best_assignment4, fingerprint, norm_one, ComplexMatrix};
use crate::model::{bloch_potential, build_bloch, ModelParams};

/// Assignments whose costs differ by less than this are treated as ambiguous.
pub const AMBIGUITY_TOL: f64 = 1e-12;
/// Maximum bisection depth used to resolve an ambiguous assignment.
pub const MAX_REFINE_DEPTH: usize = 12;
/// Eigenvector condition number beyond which a matrix is treated as defective.
pub const NEAR_EP_CONDITION: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<c64>,
    /// Right eigenvectors as unit-norm columns.
    pub vectors: ComplexMatrix,
}

/// Dense eigendecomposition of a general complex matrix.
pub fn eig_dense(h: &ComplexMatrix) -> Result<Eigensystem> {
    if h.nrows() != h.ncols() {
        return Err(Error::Dimension(format!("matrix is {}x{}, not square", h.nrows(), h.ncols())));
    }
    if !all_finite(h) {
        return Err(Error::Solver { fingerprint: fingerprint(h), reason: "non-finite entries".into() });
    }
    let evd = h.eigen().map_err(|e| Error::Solver {
        fingerprint: fingerprint(h),
        reason: format!("{e:?}"),
    })?;
    let values: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    let mut vectors = evd.U().to_owned();
    for j in 0..vectors.ncols() {
        let norm = (0..vectors.nrows()).map(|i| vectors[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Solver { fingerprint: fingerprint(h), reason: format!("degenerate eigenvector {j}") });
        }
        for i in 0..vectors.nrows() {
            vectors[(i, j)] /= norm;
        }
    }
    Ok(Eigensystem { values, vectors })
}

/// Eigenvalues only; cheaper than [`eig_dense`].
pub fn eigenvalues_dense(h: &ComplexMatrix) -> Result<Vec<c64>> {
    if !all_finite(h) {
        return Err(Error::Solver { fingerprint: fingerprint(h), reason: "non-finite entries".into() });
    }
    h.eigenvalues().map_err(|e| Error::Solver { fingerprint: fingerprint(h), reason: format!("{e:?}") })
}

/// Closed-form Bloch eigenvalues `±sqrt(u/2 ± sqrt(u²/4 - v) + V²)`.
///
/// Order is `(+,+), (+,-), (-,+), (-,-)` for (outer, inner) signs; all square
/// roots are principal.
pub fn analytic_eigenvalues(params: &ModelParams, k: f64) -> [c64; 4] {
    let u = params.u();
    let v = params.v(k);
    let pot = bloch_potential(params, k);
    let inner = c64::new(u * u / 4.0 - v, 0.0).sqrt();
    let base = c64::new(u / 2.0, 0.0) + pot * pot;
    let plus = (base + inner).sqrt();
    let minus = (base - inner).sqrt();
    [plus, minus, -plus, -minus]
}

/// Numerical Bloch eigenvalues at a single k.
pub fn bloch_eigenvalues(params: &ModelParams, k: f64) -> Result<[c64; 4]> {
    let values = eigenvalues_dense(&build_bloch(params, k))?;
    let mut out = [c64::new(0.0, 0.0); 4];
    out.copy_from_slice(&values);
    Ok(out)
}

/// Order used to label bands at k = 0: ascending real part, ties by imaginary part.
pub fn label_order(values: &[c64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (values[a], values[b]);
        if (x.re - y.re).abs() > 1e-9 {
            x.re.total_cmp(&y.re)
        } else {
            x.im.total_cmp(&y.im)
        }
    });
    idx
}

/// Continuity-tracked bands over `[0, 2π]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyStrings {
    pub params: ModelParams,
    /// Ascending samples; uniform except where ambiguous steps were refined.
    pub k_grid: Vec<f64>,
    /// `bands[m][i]` is band `i` at `k_grid[m]`.
    pub bands: Vec<[c64; 4]>,
    /// `endpoint_permutation[i] = j` when band `i` at `k = 2π` arrives at the
    /// value band `j` had at `k = 0`.
    pub endpoint_permutation: [usize; 4],
}

impl EnergyStrings {
    pub fn len(&self) -> usize {
        self.k_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_grid.is_empty()
    }

    pub fn band(&self, i: usize) -> impl Iterator<Item = c64> + '_ {
        self.bands.iter().map(move |row| row[i])
    }

    /// Largest jump of any band between neighbouring samples.
    pub fn max_step(&self) -> f64 {
        self.bands
            .windows(2)
            .flat_map(|w| (0..4).map(move |i| (w[1][i] - w[0][i]).norm()))
            .fold(0.0, f64::max)
    }

    pub fn is_identity_permutation(&self) -> bool {
        self.endpoint_permutation == [0, 1, 2, 3]
    }
}

/// Follows the four Bloch bands across `k ∈ [0, 2π]` on `n_k` uniform steps.
///
/// Each step is assigned by exact minimum-cost matching over the 24
/// permutations. A step whose best and runner-up costs are within
/// [`AMBIGUITY_TOL`] is bisected, up to [`MAX_REFINE_DEPTH`] levels.
pub fn track_bands(params: &ModelParams, n_k: usize) -> Result<EnergyStrings> {
    params.validate()?;
    if n_k < 64 {
        return Err(Error::InvalidParams(format!("n_k = {n_k} is below the minimum of 64")));
    }
    let start_raw = bloch_eigenvalues(params, 0.0)?;
    let order = label_order(&start_raw);
    let start = [start_raw[order[0]], start_raw[order[1]], start_raw[order[2]], start_raw[order[3]]];

    let mut k_grid = vec![0.0];
    let mut bands = vec![start];
    for m in 1..=n_k {
        let k = 2.0 * PI * m as f64 / n_k as f64;
        let values = bloch_eigenvalues(params, k)?;
        let (prev_k, prev) = (*k_grid.last().unwrap(), *bands.last().unwrap());
        extend_tracked(params, prev_k, prev, k, values, 0, &mut k_grid, &mut bands)?;
    }

    let end = *bands.last().unwrap();
    let (perm, cost, _) = best_assignment4(&end, &start);
    if cost / 4.0 > 1e-8 * (1.0 + start.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
        return Err(Error::DegenerateSpectrum { k: 2.0 * PI });
    }
    Ok(EnergyStrings { params: *params, k_grid, bands, endpoint_permutation: perm })
}

#[allow(clippy::too_many_arguments)]
fn extend_tracked(
    params: &ModelParams,
    k_a: f64,
    prev: [c64; 4],
    k_b: f64,
    values: [c64; 4],
    depth: usize,
    k_grid: &mut Vec<f64>,
    bands: &mut Vec<[c64; 4]>,
) -> Result<()> {
    let (perm, best, second) = best_assignment4(&prev, &values);
    if second - best > AMBIGUITY_TOL {
        k_grid.push(k_b);
        bands.push([values[perm[0]], values[perm[1]], values[perm[2]], values[perm[3]]]);
        return Ok(());
    }
    if depth >= MAX_REFINE_DEPTH {
        return Err(Error::DegenerateSpectrum { k: k_b });
    }
    let k_mid = 0.5 * (k_a + k_b);
    let mid = bloch_eigenvalues(params, k_mid)?;
    extend_tracked(params, k_a, prev, k_mid, mid, depth + 1, k_grid, bands)?;
    let (k_m, tracked_mid) = (*k_grid.last().unwrap(), *bands.last().unwrap());
    extend_tracked(params, k_m, tracked_mid, k_b, values, depth + 1, k_grid, bands)
}

/// Eigenvalues with paired left and right eigenvectors, normalized so that
/// `left_vectorsᴴ · right_vectors = I`.
#[derive(Clone, Debug)]
pub struct BiorthogonalBasis {
    pub eigenvalues: Vec<c64>,
    pub right_vectors: ComplexMatrix,
    pub left_vectors: ComplexMatrix,
    /// 1-norm condition number of the unit-column right eigenvector matrix.
    pub condition: f64,
}

impl BiorthogonalBasis {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `‖Lᴴ R - I‖` (max entry).
    pub fn biorthogonality_residual(&self) -> f64 {
        crate::linalg::identity_residual(&(self.left_vectors.adjoint() * &self.right_vectors))
    }
}

/// Biorthonormal eigensystem of a diagonalizable matrix.
///
/// Left eigenvectors are the rows of the inverse of the right eigenvector
/// matrix, which pairs them with the right vectors by construction, including
/// inside degenerate eigenspaces. A right eigenvector matrix with condition
/// number above [`NEAR_EP_CONDITION`] is reported as a near-exceptional point.
pub fn biorthogonal_eigensystem(h: &ComplexMatrix) -> Result<BiorthogonalBasis> {
    let Eigensystem { values, vectors } = eig_dense(h)?;
    let inverse = vectors.partial_piv_lu().inverse();
    if !all_finite(&inverse) {
        return Err(Error::NearExceptionalPoint { condition: f64::INFINITY });
    }
    let condition = norm_one(&vectors) * norm_one(&inverse);
    if !(condition <= NEAR_EP_CONDITION) {
        return Err(Error::NearExceptionalPoint { condition });
    }
    let left_vectors = inverse.adjoint().to_owned();
    Ok(BiorthogonalBasis { eigenvalues: values, right_vectors: vectors, left_vectors, condition })
}

/// Residual `max_j ‖H v_j - E_j v_j‖ / ‖v_j‖` of an eigensystem.
pub fn eigen_residual(h: &ComplexMatrix, values: &[c64], vectors: &ComplexMatrix) -> f64 {
    let hv = h * vectors;
    let mut worst = 0.0f64;
    for (j, &e) in values.iter().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..vectors.nrows() {
            num += (hv[(i, j)] - vectors[(i, j)] * e).norm_sqr();
            den += vectors[(i, j)].norm_sqr();
        }
        worst = worst.max((num / den).sqrt());
    }
    worst
}

/// Builds a matrix from a closure; handy for small fixtures.
pub fn matrix_from_rows(rows: &[&[c64]]) -> ComplexMatrix {
    Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}
