//! Small dense helpers shared by the model, spectral and many-body code.
//!
//! Dense storage is `faer::Mat<c64>` throughout; the helpers here cover the
//! handful of operations faer does not expose directly in the form we need
//! (Kronecker products, max-entry norms, eigenvalue matching).

use std::hash::{Hash, Hasher};

use faer::Mat;
use num_complex::Complex64 as c64;

pub type ComplexMatrix = Mat<c64>;

pub const ZERO: c64 = c64::new(0.0, 0.0);
pub const ONE: c64 = c64::new(1.0, 0.0);
pub const I: c64 = c64::new(0.0, 1.0);

pub fn identity2() -> ComplexMatrix {
    Mat::from_fn(2, 2, |i, j| if i == j { ONE } else { ZERO })
}

pub fn sigma_x() -> ComplexMatrix {
    Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

pub fn sigma_y() -> ComplexMatrix {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => -I,
        (1, 0) => I,
        _ => ZERO,
    })
}

pub fn sigma_z() -> ComplexMatrix {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => ONE,
        (1, 1) => -ONE,
        _ => ZERO,
    })
}

/// Kronecker product `a ⊗ b`; the first factor selects the outer block.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn scale(m: &ComplexMatrix, s: c64) -> ComplexMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint().to_owned()
}

pub fn conjugate(m: &ComplexMatrix) -> ComplexMatrix {
    m.conjugate().to_owned()
}

pub fn transpose(m: &ComplexMatrix) -> ComplexMatrix {
    m.transpose().to_owned()
}

pub fn max_abs_entry(m: &ComplexMatrix) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Max-entry distance between two matrices of equal shape.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}

/// Max-entry distance of `m` from the identity.
pub fn identity_residual(m: &ComplexMatrix) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let target = if i == j { ONE } else { ZERO };
            best = best.max((m[(i, j)] - target).norm());
        }
    }
    best
}

/// Induced 1-norm (max column sum).
pub fn norm_one(m: &ComplexMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))
}

/// Short identifier for a matrix, used in solver error messages.
pub fn fingerprint(m: &ComplexMatrix) -> String {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    m.nrows().hash(&mut hasher);
    m.ncols().hash(&mut hasher);
    let mut frob = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            z.re.to_bits().hash(&mut hasher);
            z.im.to_bits().hash(&mut hasher);
            frob += z.norm_sqr();
        }
    }
    format!(
        "{}x{}#{:016x}(|F|={:.6e})",
        m.nrows(),
        m.ncols(),
        hasher.finish(),
        frob.sqrt()
    )
}

/// All 24 permutations of four labels, lexicographic.
pub fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Exact minimum-cost assignment between two 4-element sets.
///
/// Returns `(perm, best_cost, runner_up_cost)` where `to[perm[i]]` is matched
/// to `from[i]` and cost is the summed distance.
pub fn best_assignment4(from: &[c64; 4], to: &[c64; 4]) -> ([usize; 4], f64, f64) {
    let mut best = ([0, 1, 2, 3], f64::INFINITY);
    let mut second = f64::INFINITY;
    for p in permutations4() {
        let cost: f64 = (0..4).map(|i| (from[i] - to[p[i]]).norm()).sum();
        if cost < best.1 {
            second = best.1;
            best = (p, cost);
        } else if cost < second {
            second = cost;
        }
    }
    (best.0, best.1, second)
}

/// Largest pairwise distance after greedily matching each element of `a` to
/// its nearest unused element of `b`.
///
/// Greedy matching can only over-estimate the optimal bottleneck distance,
/// so a small result certifies the multisets agree.
pub fn multiset_distance(a: &[c64], b: &[c64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for &x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, &y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
