//! Spectral winding number, closed-form phase boundaries and grid sweeps.
//!
//! The winding number counts how `f(k) = det(H(k) - Tr H(k)/4)` circles the
//! origin as `k` runs over the Brillouin zone. Phase boundaries are the
//! parameters where `f` vanishes at `k = pπ/q`; there `V(k)² = -4λ²` and
//! `f = 16λ⁴ - 4uλ² + v`, a quadratic in `λ²`.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::braid::{knot_class_of, KnotTag};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{build_bloch, ModelParams};
use crate::parallel::map_indexed;
use crate::spectral::track_bands;

/// `|f(k)|` below this marks a gapless point.
pub const GAP_TOL: f64 = 1e-8;
/// Largest argument step accepted between neighbouring samples.
pub const MAX_ARG_STEP: f64 = PI / 2.0;
pub const MIN_WINDING_SAMPLES: usize = 256;
pub const MAX_WINDING_SAMPLES: usize = 1 << 18;
/// Roots closer than this are merged.
pub const ROOT_DEDUP_TOL: f64 = 1e-12;
/// Tolerance on `|w_raw - w|` for a resolved winding number.
pub const INTEGRALITY_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    /// Accumulated argument divided by 2π.
    pub w_raw: f64,
    pub w: i64,
    pub min_abs_f: f64,
    pub n_k_used: usize,
}

/// `det(H - Tr H / 4)` of a 4×4 matrix.
pub fn shifted_determinant(h: &ComplexMatrix) -> c64 {
    let shift = (0..4).map(|i| h[(i, i)]).sum::<c64>() / 4.0;
    let mut m = h.clone();
    for i in 0..4 {
        m[(i, i)] -= shift;
    }
    m.determinant()
}

pub fn winding_integrand(params: &ModelParams, k: f64) -> c64 {
    shifted_determinant(&build_bloch(params, k))
}

/// Winding number of `f(k)` around the origin.
///
/// The grid starts at `n_k` points and is doubled until every argument
/// increment is below π/2.
pub fn winding_number(params: &ModelParams, n_k: usize) -> Result<WindingResult> {
    params.validate()?;
    if n_k < MIN_WINDING_SAMPLES {
        return Err(Error::InvalidParams(format!(
            "n_k = {n_k} is below the minimum of {MIN_WINDING_SAMPLES}"
        )));
    }
    let mut n = n_k;
    loop {
        let f: Vec<c64> = (0..=n)
            .map(|m| winding_integrand(params, 2.0 * PI * m as f64 / n as f64))
            .collect();
        let (m_min, min_abs_f) = f
            .iter()
            .map(|z| z.norm())
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (m, a)| if a < acc.1 { (m, a) } else { acc });
        if !(min_abs_f >= GAP_TOL) {
            return Err(Error::Gapless { min_abs_f, k: 2.0 * PI * m_min as f64 / n as f64 });
        }
        let steps: Vec<f64> = f.windows(2).map(|w| (w[1] / w[0]).arg()).collect();
        if steps.iter().all(|d| d.abs() < MAX_ARG_STEP) {
            let w_raw = steps.iter().sum::<f64>() / (2.0 * PI);
            return Ok(WindingResult { w_raw, w: w_raw.round() as i64, min_abs_f, n_k_used: n });
        }
        if n >= MAX_WINDING_SAMPLES {
            return Err(Error::Resolution { n_k: n });
        }
        n *= 2;
    }
}

/// One branch of the boundary condition at `k = pπ/q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRoot {
    pub p: u32,
    /// `+1` or `-1`, the sign in front of the square root.
    pub sign: i8,
    /// `None` when the branch has no real non-negative `λ`.
    pub lambda: Option<f64>,
}

/// `λ²` on each branch: `16λ² = 2u ± √(4u² - 16 v(pπ/q))`.
pub fn branch_lambda_squared(params: &ModelParams, p: u32, sign: i8) -> Option<f64> {
    let u = params.u();
    let k = p as f64 * PI / params.q as f64;
    let disc = 4.0 * u * u - 16.0 * params.v(k);
    if disc < 0.0 {
        return None;
    }
    Some((2.0 * u + sign as f64 * disc.sqrt()) / 16.0)
}

pub fn branch_roots(params: &ModelParams) -> Vec<BranchRoot> {
    let mut out = Vec::new();
    for p in 0..=params.q {
        for sign in [-1i8, 1] {
            let lambda = branch_lambda_squared(params, p, sign).and_then(|l2| {
                // Cancellation can leave a tiny negative λ² where the exact root is 0.
                if l2 >= 0.0 {
                    Some(l2.sqrt())
                } else if l2 > -1e-14 {
                    Some(0.0)
                } else {
                    None
                }
            });
            out.push(BranchRoot { p, sign, lambda });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRoots {
    /// Ascending, deduplicated non-negative roots.
    pub lambdas: Vec<f64>,
    /// Branches without a real root.
    pub dropped: usize,
}

/// Values of `λ ≥ 0` on the phase boundaries for the given `t1..t4, μ, q`;
/// `params.lambda` is ignored.
pub fn phase_boundary_lambdas(params: &ModelParams) -> BoundaryRoots {
    let roots = branch_roots(params);
    let dropped = roots.iter().filter(|r| r.lambda.is_none()).count();
    let mut lambdas: Vec<f64> = roots.iter().filter_map(|r| r.lambda).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup_by(|a, b| (*a - *b).abs() < ROOT_DEDUP_TOL);
    BoundaryRoots { lambdas, dropped }
}

/// `16λ⁴ - 4uλ² + v(pπ/q)`, which vanishes on a boundary.
pub fn boundary_residual(params: &ModelParams, p: u32) -> f64 {
    let l2 = params.lambda * params.lambda;
    let k = p as f64 * PI / params.q as f64;
    16.0 * l2 * l2 - 4.0 * params.u() * l2 + params.v(k)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub p: u32,
    pub sign: i8,
    /// `(t2, λ)` samples where the branch is real.
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurves {
    pub curves: Vec<BoundaryCurve>,
}

/// Boundary curves in the `(t2, λ)` plane sampled at `samples` values of `t2`.
pub fn boundary_curves(base: &ModelParams, t2_range: (f64, f64), samples: usize) -> BoundaryCurves {
    let axis = Axis::new(t2_range.0, t2_range.1, samples.max(2));
    let mut curves = Vec::new();
    for p in 0..=base.q {
        for sign in [-1i8, 1] {
            let points = axis
                .values()
                .into_iter()
                .filter_map(|t2| {
                    let params = base.with_t2(t2);
                    let l2 = branch_lambda_squared(&params, p, sign)?;
                    (l2 >= 0.0).then(|| (t2, l2.sqrt()))
                })
                .collect();
            curves.push(BoundaryCurve { p, sign, points });
        }
    }
    BoundaryCurves { curves }
}

/// Inclusive uniform grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, count: usize) -> Self {
        Self { start, end, count }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            return self.start;
        }
        self.start + (self.end - self.start) * i as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    pub fn step(&self) -> f64 {
        if self.count <= 1 {
            0.0
        } else {
            (self.end - self.start) / (self.count - 1) as f64
        }
    }
}

/// Why a grid cell carries no value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellFlag {
    Ok,
    Gapless,
    Unresolved,
    /// Defective or degenerate spectrum (near-EP, degenerate filling).
    Singular,
}

impl CellFlag {
    pub fn from_error(e: &Error) -> Option<Self> {
        match e {
            Error::Gapless { .. } => Some(CellFlag::Gapless),
            Error::Resolution { .. } => Some(CellFlag::Unresolved),
            Error::NearExceptionalPoint { .. }
            | Error::DegenerateFilling { .. }
            | Error::DegenerateSpectrum { .. } => Some(CellFlag::Singular),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellFlag::Ok => "",
            CellFlag::Gapless => "gapless",
            CellFlag::Unresolved => "unresolved",
            CellFlag::Singular => "singular",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "" => CellFlag::Ok,
            "gapless" => CellFlag::Gapless,
            "unresolved" => CellFlag::Unresolved,
            "singular" => CellFlag::Singular,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub lambda: f64,
    pub t2: f64,
    pub w: Option<i64>,
    pub w_raw: Option<f64>,
    pub flag: CellFlag,
    pub knot_tag: Option<KnotTag>,
    /// `log(1 + min(|χ|, clip))`, fidelity grids only.
    pub log1p_abs_chi: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    Winding,
    Fidelity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub kind: GridKind,
    pub n_k: Option<usize>,
    pub sites: Option<usize>,
    pub epsilon: Option<f64>,
    pub clip: Option<f64>,
    pub gap_tol: f64,
    pub with_knots: bool,
    pub timestamp: String,
}

/// Values on a `(λ, t2)` grid. Cells are stored row-major with `t2` as the
/// slow index: `cells[j * lambda_axis.count + i]` is at
/// `(lambda_axis.value(i), t2_axis.value(j))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramGrid {
    pub lambda_axis: Axis,
    pub t2_axis: Axis,
    pub params_base: ModelParams,
    pub cells: Vec<GridCell>,
    pub metadata: GridMetadata,
}

impl PhaseDiagramGrid {
    pub fn cell(&self, i_lambda: usize, j_t2: usize) -> &GridCell {
        &self.cells[j_t2 * self.lambda_axis.count + i_lambda]
    }

    /// Grid points in storage order.
    pub fn points(lambda_axis: &Axis, t2_axis: &Axis) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(lambda_axis.count * t2_axis.count);
        for j in 0..t2_axis.count {
            for i in 0..lambda_axis.count {
                pts.push((lambda_axis.value(i), t2_axis.value(j)));
            }
        }
        pts
    }

    /// Number of 4-connected regions of equal winding among unflagged cells.
    pub fn winding_regions(&self) -> Vec<(i64, usize)> {
        let (nx, ny) = (self.lambda_axis.count, self.t2_axis.count);
        let mut label = vec![usize::MAX; nx * ny];
        let mut regions = Vec::new();
        for start in 0..nx * ny {
            let Some(w) = self.cells[start].w else { continue };
            if label[start] != usize::MAX {
                continue;
            }
            let id = regions.len();
            let mut stack = vec![start];
            label[start] = id;
            let mut size = 0;
            while let Some(c) = stack.pop() {
                size += 1;
                let (i, j) = (c % nx, c / nx);
                let mut push = |n: usize| {
                    if label[n] == usize::MAX && self.cells[n].w == Some(w) {
                        label[n] = id;
                        stack.push(n);
                    }
                };
                if i > 0 {
                    push(c - 1);
                }
                if i + 1 < nx {
                    push(c + 1);
                }
                if j > 0 {
                    push(c - nx);
                }
                if j + 1 < ny {
                    push(c + nx);
                }
            }
            regions.push((w, size));
        }
        regions
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub lambda_axis: Axis,
    pub t2_axis: Axis,
    pub n_k: usize,
    pub with_knots: bool,
    pub workers: usize,
}

pub const MIN_GRID_RESOLUTION: usize = 16;

/// Winding number (and optionally knot class) on every grid point.
///
/// Gapless or unresolved points are flagged rather than failing the sweep.
pub fn sweep_phase_diagram(base: &ModelParams, spec: &SweepSpec) -> Result<PhaseDiagramGrid> {
    base.validate()?;
    if spec.lambda_axis.count < MIN_GRID_RESOLUTION || spec.t2_axis.count < MIN_GRID_RESOLUTION {
        return Err(Error::InvalidParams(format!(
            "grid resolution must be at least {MIN_GRID_RESOLUTION} per axis"
        )));
    }
    if spec.n_k < MIN_WINDING_SAMPLES {
        return Err(Error::InvalidParams(format!(
            "n_k = {} is below the minimum of {MIN_WINDING_SAMPLES}",
            spec.n_k
        )));
    }
    let points = PhaseDiagramGrid::points(&spec.lambda_axis, &spec.t2_axis);
    let results = map_indexed(spec.workers, &points, |_, &(lambda, t2)| {
        let params = ModelParams { lambda, t2, ..*base };
        winding_cell(&params, spec.n_k, spec.with_knots)
    });
    let cells = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagramGrid {
        lambda_axis: spec.lambda_axis,
        t2_axis: spec.t2_axis,
        params_base: *base,
        cells,
        metadata: GridMetadata {
            kind: GridKind::Winding,
            n_k: Some(spec.n_k),
            sites: None,
            epsilon: None,
            clip: None,
            gap_tol: GAP_TOL,
            with_knots: spec.with_knots,
            timestamp: chrono::Utc::now().to_rfc3339(),
        },
    })
}

/// Evaluates one phase-diagram cell; only non-boundary errors propagate.
pub fn winding_cell(params: &ModelParams, n_k: usize, with_knots: bool) -> Result<GridCell> {
    let mut cell = GridCell {
        lambda: params.lambda,
        t2: params.t2,
        w: None,
        w_raw: None,
        flag: CellFlag::Ok,
        knot_tag: None,
        log1p_abs_chi: None,
    };
    match winding_number(params, n_k) {
        Ok(r) if (r.w_raw - r.w as f64).abs() < INTEGRALITY_TOL => {
            cell.w = Some(r.w);
            cell.w_raw = Some(r.w_raw);
        }
        Ok(r) => {
            cell.w_raw = Some(r.w_raw);
            cell.flag = CellFlag::Unresolved;
        }
        Err(e) => cell.flag = CellFlag::from_error(&e).ok_or(e)?,
    }
    if with_knots && cell.flag == CellFlag::Ok {
        let n_k_braid = n_k.max(512);
        match track_bands(params, n_k_braid).and_then(|s| knot_class_of(&s, 0.0)) {
            Ok((_, _, class)) => cell.knot_tag = Some(class.tag),
            Err(e) if e.is_boundary() || matches!(e, Error::GridTooCoarse { .. } | Error::DegenerateProjection { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RepresentativePoint;

    fn caption_params() -> ModelParams {
        ModelParams::default().with_t2(2.0)
    }

    #[test]
    fn roots_on_the_t2_equals_two_line() {
        let roots = phase_boundary_lambdas(&caption_params());
        let expected = [0.190984, 0.651388, 1.151388, 1.309017];
        assert_eq!(roots.lambdas.len(), 4);
        assert_eq!(roots.dropped, 0);
        for (got, want) in roots.lambdas.iter().zip(expected) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn degenerate_minus_branch_gives_zero() {
        let p = ModelParams { t1: 1.0, t2: 1.0, t3: 1.0, t4: 1.0, ..ModelParams::default() };
        let l2 = branch_lambda_squared(&p, 0, -1).unwrap();
        assert!(l2.abs() < 1e-15);
        assert_eq!(phase_boundary_lambdas(&p).lambdas[0], 0.0);
    }

    #[test]
    fn hermitian_limit_has_zero_winding() {
        let r = winding_number(&caption_params(), 256).unwrap();
        assert_eq!(r.w, 0);
        assert!(r.w_raw.abs() < 1e-12);
    }

    #[test]
    fn representative_windings() {
        let ws: Vec<i64> = RepresentativePoint::ALL
            .iter()
            .map(|p| winding_number(&p.params(), 256).unwrap().w)
            .collect();
        assert_eq!(ws, vec![0, -1, -2, -3, -4]);
    }

    #[test]
    fn exact_root_is_gapless() {
        let base = caption_params();
        for lambda in phase_boundary_lambdas(&base).lambdas {
            let err = winding_number(&base.with_lambda(lambda), 256).unwrap_err();
            assert!(matches!(err, Error::Gapless { .. }), "{lambda}: {err}");
        }
    }

    #[test]
    fn boundary_curves_satisfy_the_condition() {
        let curves = boundary_curves(&ModelParams::default(), (0.0, 3.0), 61);
        assert_eq!(curves.curves.len(), 4);
        for c in &curves.curves {
            for &(t2, lambda) in &c.points {
                let p = ModelParams::default().with_t2(t2).with_lambda(lambda);
                assert!(boundary_residual(&p, c.p).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn small_grid_sweep_is_consistent_and_rejects_coarse_axes() {
        let spec = SweepSpec {
            lambda_axis: Axis::new(0.05, 1.45, 16),
            t2_axis: Axis::new(1.5, 2.5, 16),
            n_k: 256,
            with_knots: false,
            workers: 1,
        };
        let grid = sweep_phase_diagram(&ModelParams::default(), &spec).unwrap();
        assert_eq!(grid.cells.len(), 256);
        let c = grid.cell(3, 5);
        assert_eq!(c.lambda, spec.lambda_axis.value(3));
        assert_eq!(c.t2, spec.t2_axis.value(5));
        let coarse = SweepSpec { t2_axis: Axis::new(1.5, 2.5, 8), ..spec };
        assert!(sweep_phase_diagram(&ModelParams::default(), &coarse).is_err());
    }
}
