//! The four-band non-Hermitian chain: parameters, real-space and Bloch
//! Hamiltonians, and the symmetry checks they satisfy.
//!
//! Sites are ordered cell-major with sublattices `A, B, C, D` inside a cell,
//! so site `4 n + α` is sublattice `α` of cell `n`. The same order is the
//! basis of the 4x4 Bloch matrix, which makes the real-space matrix block
//! circulant with Bloch blocks.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, conjugate, identity2, kron, max_abs_diff, scale, sigma_x, sigma_y, sigma_z, transpose,
    ComplexMatrix, I,
};

/// Sublattice signs `s_A, s_B, s_C, s_D` for same-sublattice hopping.
pub const SUBLATTICE_SIGN: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

/// Couplings of the chain.
///
/// `lambda` is the non-reciprocal part of the same-sublattice hopping and
/// `mu` the reciprocal part; `q` is the range of that hopping in cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub lambda: f64,
    pub mu: f64,
    pub q: u32,
}

impl Default for ModelParams {
    /// `t1 = t3 = t4 = 1`, `t2 = 2`, `mu = 0.5`, `q = 1`, `lambda = 0`.
    fn default() -> Self {
        Self {
            t1: 1.0,
            t2: 2.0,
            t3: 1.0,
            t4: 1.0,
            lambda: 0.0,
            mu: 0.5,
            q: 1,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::InvalidParams("q must be at least 1".into()));
        }
        let fields = [
            ("t1", self.t1),
            ("t2", self.t2),
            ("t3", self.t3),
            ("t4", self.t4),
            ("lambda", self.lambda),
            ("mu", self.mu),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {value} is not finite")));
            }
        }
        Ok(())
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_t2(self, t2: f64) -> Self {
        Self { t2, ..self }
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    /// Right-moving amplitude `J_R = i(lambda + mu)`.
    pub fn j_right(&self) -> c64 {
        I * (self.lambda + self.mu)
    }

    /// Left-moving amplitude `J_L = i(lambda - mu)`.
    pub fn j_left(&self) -> c64 {
        I * (self.lambda - self.mu)
    }

    /// `u = t1² + t2² + t3² + t4²`.
    pub fn u(&self) -> f64 {
        self.t1 * self.t1 + self.t2 * self.t2 + self.t3 * self.t3 + self.t4 * self.t4
    }

    /// `v(k) = t1²t3² + t2²t4² - 2 t1 t2 t3 t4 cos k`.
    pub fn v(&self, k: f64) -> f64 {
        let (t1, t2, t3, t4) = (self.t1, self.t2, self.t3, self.t4);
        t1 * t1 * t3 * t3 + t2 * t2 * t4 * t4 - 2.0 * t1 * t2 * t3 * t4 * k.cos()
    }

    pub fn is_hermitian(&self) -> bool {
        self.lambda == 0.0
    }
}

/// The five representative points on the `t2 = 2` line, one per phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RepresentativePoint {
    A,
    B,
    C,
    D,
    E,
}

impl RepresentativePoint {
    pub const ALL: [RepresentativePoint; 5] = [Self::A, Self::B, Self::C, Self::D, Self::E];

    pub fn lambda(self) -> f64 {
        match self {
            Self::A => 0.1,
            Self::B => 0.25,
            Self::C => 0.7,
            Self::D => 1.2,
            Self::E => 1.4,
        }
    }

    pub fn label(self) -> char {
        match self {
            Self::A => 'a',
            Self::B => 'b',
            Self::C => 'c',
            Self::D => 'd',
            Self::E => 'e',
        }
    }

    pub fn params(self) -> ModelParams {
        ModelParams::default().with_lambda(self.lambda())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub cells: usize,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn periodic(cells: usize) -> Self {
        Self { cells, boundary: Boundary::Periodic }
    }

    /// Lattice with `sites` sites; `sites` must be a multiple of four.
    pub fn from_sites(sites: usize) -> Result<Self> {
        if sites == 0 || sites % 4 != 0 {
            return Err(Error::Dimension(format!("{sites} sites is not a positive multiple of 4")));
        }
        Ok(Self::periodic(sites / 4))
    }

    pub fn sites(&self) -> usize {
        4 * self.cells
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if self.cells == 0 || self.cells <= params.q as usize {
            return Err(Error::Dimension(format!(
                "need more than q = {} cells, got {}",
                params.q, self.cells
            )));
        }
        Ok(())
    }

    /// Allowed momenta `2π m / cells`.
    pub fn momenta(&self) -> Vec<f64> {
        (0..self.cells).map(|m| 2.0 * PI * m as f64 / self.cells as f64).collect()
    }
}

#[inline]
fn site(cell: usize, sublattice: usize) -> usize {
    4 * cell + sublattice
}

/// Single-particle matrix of the chain under periodic boundaries.
///
/// Entry `(row, col)` is the amplitude of `c†_row c_col`. Hops wrap modulo
/// the number of cells, and contributions that land on the same entry
/// accumulate (relevant when `cells == 2q`).
pub fn build_real_hamiltonian(params: &ModelParams, spec: &LatticeSpec) -> Result<ComplexMatrix> {
    params.validate()?;
    spec.validate(params)?;
    let cells = spec.cells;
    let n = spec.sites();
    let q = params.q as usize;
    let (jl, jr) = (params.j_left(), params.j_right());
    let mut h = Mat::<c64>::zeros(n, n);

    for cell in 0..cells {
        let ahead = (cell + q) % cells;
        for (alpha, &s) in SUBLATTICE_SIGN.iter().enumerate() {
            h[(site(cell, alpha), site(ahead, alpha))] += jl * s;
            h[(site(ahead, alpha), site(cell, alpha))] += jr * s;
        }

        let next = (cell + 1) % cells;
        let bonds = [
            (site(cell, 0), site(cell, 1), params.t1),
            (site(cell, 1), site(cell, 2), params.t2),
            (site(cell, 2), site(cell, 3), params.t3),
            (site(cell, 3), site(next, 0), params.t4),
        ];
        for (a, b, t) in bonds {
            h[(a, b)] += c64::new(t, 0.0);
            h[(b, a)] += c64::new(t, 0.0);
        }
    }
    Ok(h)
}

/// `V(k) = 2 mu sin(qk) + 2i lambda cos(qk)`.
pub fn bloch_potential(params: &ModelParams, k: f64) -> c64 {
    let qk = params.q as f64 * k;
    c64::new(2.0 * params.mu * qk.sin(), 2.0 * params.lambda * qk.cos())
}

/// Bloch Hamiltonian `H(k)` in the `(A, B, C, D)` basis, assembled from its
/// Kronecker-product terms.
pub fn build_bloch(params: &ModelParams, k: f64) -> ComplexMatrix {
    let (i2, sx, sy, sz) = (identity2(), sigma_x(), sigma_y(), sigma_z());
    let re = |x: f64| c64::new(x, 0.0);
    let (t1, t2, t3, t4) = (params.t1, params.t2, params.t3, params.t4);

    let terms = [
        (re((t1 + t3) / 2.0), kron(&i2, &sx)),
        (re((t1 - t3) / 2.0), kron(&sz, &sx)),
        (re((t2 + t4 * k.cos()) / 2.0), kron(&sx, &sx)),
        (re((t2 - t4 * k.cos()) / 2.0), kron(&sy, &sy)),
        (bloch_potential(params, k), kron(&i2, &sz)),
        (re(t4 * k.sin() / 2.0), &kron(&sy, &sx) + &kron(&sx, &sy)),
    ];
    let mut h = Mat::<c64>::zeros(4, 4);
    for (coef, m) in terms {
        h += scale(&m, coef);
    }
    h
}

/// Max-entry residuals of the three symmetry relations over sampled momenta.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `‖C H(k)* C + H(-k)‖`, `C = I ⊗ σz`.
    pub particle_hole: f64,
    /// `‖T H(k)† T - H(-k)‖`, `T = σx ⊗ σx`.
    pub time_reversal: f64,
    /// `‖Γ H(k)† Γ⁻¹ + H(k)‖`, `Γ = i(σx ⊗ σy) K`.
    pub chiral: f64,
    /// The last two relations are only expected to hold when `t1 = t3`.
    pub t1_equals_t3: bool,
}

impl SymmetryReport {
    /// Checks the residuals that the parameters are expected to satisfy.
    pub fn passes(&self, tol: f64) -> bool {
        self.particle_hole < tol
            && (!self.t1_equals_t3 || (self.time_reversal < tol && self.chiral < tol))
    }
}

pub fn symmetry_residuals(params: &ModelParams, k_samples: usize) -> Result<SymmetryReport> {
    params.validate()?;
    if k_samples < 2 {
        return Err(Error::InvalidParams("k_samples must be at least 2".into()));
    }
    let c = kron(&identity2(), &sigma_z());
    let t = kron(&sigma_x(), &sigma_x());
    let u = scale(&kron(&sigma_x(), &sigma_y()), I);
    let u_inv = adjoint(&u);

    let mut report = SymmetryReport {
        particle_hole: 0.0,
        time_reversal: 0.0,
        chiral: 0.0,
        t1_equals_t3: params.t1 == params.t3,
    };
    for m in 0..k_samples {
        let k = 2.0 * PI * m as f64 / k_samples as f64;
        let h = build_bloch(params, k);
        let h_minus = build_bloch(params, -k);

        let phs = &(&c * &conjugate(&h)) * &c;
        report.particle_hole = report.particle_hole.max(max_abs_diff(&phs, &scale(&h_minus, -c64::new(1.0, 0.0))));

        let trs = &(&t * &adjoint(&h)) * &t;
        report.time_reversal = report.time_reversal.max(max_abs_diff(&trs, &h_minus));

        // Γ = U K acting on H†: U (H†)* U⁻¹ = U Hᵀ U⁻¹.
        let chiral = &(&u * &transpose(&h)) * &u_inv;
        report.chiral = report.chiral.max(max_abs_diff(&chiral, &scale(&h, -c64::new(1.0, 0.0))));
    }
    Ok(report)
}

/// Bloch blocks `H(2π m / cells)` for every allowed momentum.
pub fn bloch_blocks(params: &ModelParams, spec: &LatticeSpec) -> Vec<(f64, ComplexMatrix)> {
    spec.momenta().into_iter().map(|k| (k, build_bloch(params, k))).collect()
}
