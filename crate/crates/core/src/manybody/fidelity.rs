use std::collections::BTreeMap;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use super::{lattice_ground_state, BiorthogonalGroundState};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::parallel::map_indexed;
use crate::topology::{Axis, CellFlag, GridCell, GridKind, GridMetadata, PhaseDiagramGrid, GAP_TOL};

/// `|χ|` is clipped here before the log transform.
pub const CHI_CLIP: f64 = 2e4;
pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_FIDELITY_SITES: usize = 600;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    pub f: c64,
    pub chi: c64,
}

/// `⟨G_L(1)|G_R(2)⟩ ⟨G_L(2)|G_R(1)⟩` for two biorthonormal Slater states.
pub fn slater_fidelity(a: &BiorthogonalGroundState, b: &BiorthogonalGroundState) -> Result<c64> {
    if a.sites != b.sites {
        return Err(Error::Dimension(format!("{} vs {} sites", a.sites, b.sites)));
    }
    let m1 = a.left_occ.adjoint() * &b.right_occ;
    let m2 = b.left_occ.adjoint() * &a.right_occ;
    Ok(m1.determinant() * m2.determinant())
}

fn from_overlap(f: c64, epsilon: f64) -> Fidelity {
    Fidelity { f, chi: (c64::new(1.0, 0.0) - f) / (epsilon * epsilon) }
}

/// Fidelity between `λ` and `λ + ε` on a chain of `sites` sites.
pub fn fidelity(params: &ModelParams, sites: usize, epsilon: f64) -> Result<Fidelity> {
    check_epsilon(epsilon)?;
    let a = lattice_ground_state(params, sites)?;
    let b = lattice_ground_state(&params.with_lambda(params.lambda + epsilon), sites)?;
    Ok(from_overlap(slater_fidelity(&a, &b)?, epsilon))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParams(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

/// `log(1 + min(|χ|, CHI_CLIP))`.
pub fn clipped_log_chi(abs_chi: f64) -> f64 {
    abs_chi.min(CHI_CLIP).ln_1p()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    pub lambda: f64,
    /// `None` when either ground state sits on a boundary.
    pub fidelity: Option<Fidelity>,
    /// `min(|χ|, CHI_CLIP)`; boundary points get the clip value.
    pub abs_chi_clipped: f64,
    pub flag: CellFlag,
}

fn key(x: f64) -> i64 {
    (x * 1e12).round() as i64
}

enum Solved {
    State(Box<BiorthogonalGroundState>),
    Boundary(CellFlag),
}

/// Fidelity at every `λ` in `lambdas` with the other parameters of `base`.
///
/// Ground states are solved once per distinct `λ` and shared between the
/// `λ` and `λ + ε` ends of neighbouring points; only states still needed by
/// a pending point are kept in memory.
pub fn fidelity_lambda_scan(
    base: &ModelParams,
    lambdas: &[f64],
    sites: usize,
    epsilon: f64,
    workers: usize,
) -> Result<Vec<FidelityPoint>> {
    check_epsilon(epsilon)?;
    base.validate()?;
    let ends: Vec<(i64, i64)> = lambdas.iter().map(|&l| (key(l), key(l + epsilon))).collect();
    let mut values: BTreeMap<i64, f64> = BTreeMap::new();
    for &l in lambdas {
        values.insert(key(l), l);
        values.insert(key(l + epsilon), l + epsilon);
    }
    let queue: Vec<(i64, f64)> = values.into_iter().collect();
    let batch = 2 * workers.max(1);

    let mut cache: BTreeMap<i64, Solved> = BTreeMap::new();
    let mut out: Vec<Option<FidelityPoint>> = vec![None; lambdas.len()];
    let mut pending: Vec<usize> = (0..lambdas.len()).collect();

    for chunk in queue.chunks(batch) {
        let solved = map_indexed(workers, chunk, |_, &(_, lambda)| lattice_ground_state(&base.with_lambda(lambda), sites));
        for (&(k, _), r) in chunk.iter().zip(solved) {
            let entry = match r {
                Ok(gs) => Solved::State(Box::new(gs)),
                Err(e) => Solved::Boundary(CellFlag::from_error(&e).ok_or(e)?),
            };
            cache.insert(k, entry);
        }

        let mut still = Vec::with_capacity(pending.len());
        for i in pending {
            let (ka, kb) = ends[i];
            let (Some(a), Some(b)) = (cache.get(&ka), cache.get(&kb)) else {
                still.push(i);
                continue;
            };
            out[i] = Some(match (a, b) {
                (Solved::State(a), Solved::State(b)) => {
                    let fid = from_overlap(slater_fidelity(a, b)?, epsilon);
                    FidelityPoint { lambda: lambdas[i], fidelity: Some(fid), abs_chi_clipped: fid.chi.norm().min(CHI_CLIP), flag: CellFlag::Ok }
                }
                (Solved::Boundary(flag), _) | (_, Solved::Boundary(flag)) => {
                    FidelityPoint { lambda: lambdas[i], fidelity: None, abs_chi_clipped: CHI_CLIP, flag: *flag }
                }
            });
        }
        pending = still;
        let needed: Vec<i64> = pending.iter().flat_map(|&i| [ends[i].0, ends[i].1]).collect();
        cache.retain(|k, _| needed.contains(k));
    }
    Ok(out.into_iter().map(|p| p.expect("every point is evaluated")).collect())
}

/// `log(1 + min(|χ|, CHI_CLIP))` over a `(λ, t2)` grid.
pub fn fidelity_scan(
    base: &ModelParams,
    lambda_axis: Axis,
    t2_axis: Axis,
    sites: usize,
    epsilon: f64,
    workers: usize,
) -> Result<PhaseDiagramGrid> {
    if lambda_axis.count < crate::topology::MIN_GRID_RESOLUTION || t2_axis.count < crate::topology::MIN_GRID_RESOLUTION {
        return Err(Error::InvalidParams(format!(
            "grid resolution must be at least {} per axis",
            crate::topology::MIN_GRID_RESOLUTION
        )));
    }
    let lambdas = lambda_axis.values();
    let rows = map_indexed(workers, &t2_axis.values(), |_, &t2| {
        fidelity_lambda_scan(&base.with_t2(t2), &lambdas, sites, epsilon, 1)
    });
    let mut cells = Vec::with_capacity(lambda_axis.count * t2_axis.count);
    for (j, row) in rows.into_iter().enumerate() {
        for p in row? {
            cells.push(GridCell {
                lambda: p.lambda,
                t2: t2_axis.value(j),
                w: None,
                w_raw: None,
                flag: p.flag,
                knot_tag: None,
                log1p_abs_chi: Some(p.abs_chi_clipped.ln_1p()),
            });
        }
    }
    Ok(PhaseDiagramGrid {
        lambda_axis,
        t2_axis,
        params_base: *base,
        cells,
        metadata: GridMetadata {
            kind: GridKind::Fidelity,
            n_k: None,
            sites: Some(sites),
            epsilon: Some(epsilon),
            clip: Some(CHI_CLIP),
            gap_tol: GAP_TOL,
            with_knots: false,
            timestamp: chrono::Utc::now().to_rfc3339(),
        },
    })
}

/// Indices of local maxima of `values` (plateaus count once, at their first
/// index). End points count when they exceed their single neighbour.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let left_ok = i == 0 || values[i - 1] < values[i];
        let right_ok = j + 1 == n || values[j + 1] < values[i];
        if left_ok && right_ok && (i > 0 || j + 1 < n) {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RepresentativePoint;

    #[test]
    fn identical_states_have_unit_fidelity() {
        let gs = lattice_ground_state(&RepresentativePoint::C.params(), 24).unwrap();
        let f = slater_fidelity(&gs, &gs).unwrap();
        assert!((f - c64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn scan_matches_direct_evaluation() {
        let base = RepresentativePoint::A.params();
        let lambdas = [0.08, 0.09, 0.10, 0.11];
        let scan = fidelity_lambda_scan(&base, &lambdas, 24, 0.01, 1).unwrap();
        for p in &scan {
            let direct = fidelity(&base.with_lambda(p.lambda), 24, 0.01).unwrap();
            assert!((p.fidelity.unwrap().f - direct.f).norm() < 1e-12);
        }
        let two = fidelity_lambda_scan(&base, &lambdas, 24, 0.01, 2).unwrap();
        assert_eq!(scan, two);
    }

    #[test]
    fn maxima_of_simple_profiles() {
        assert_eq!(local_maxima(&[0.0, 1.0, 0.0, 2.0, 2.0, 1.0]), vec![1, 3]);
        assert_eq!(local_maxima(&[3.0, 1.0, 2.0]), vec![0, 2]);
        assert!(local_maxima(&[1.0, 1.0]).is_empty());
    }

    #[test]
    fn clip_bounds_the_log() {
        assert_eq!(clipped_log_chi(1e9), CHI_CLIP.ln_1p());
        assert_eq!(clipped_log_chi(0.0), 0.0);
    }
}
