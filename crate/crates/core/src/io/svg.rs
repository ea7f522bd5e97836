//! Heatmaps written directly as SVG.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::topology::{BoundaryCurves, CellFlag, GridKind, PhaseDiagramGrid};

/// Categorical colours for winding numbers, indexed by `w mod 10`.
const CATEGORICAL: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];
/// Stops of the linear ramp, low to high.
const RAMP: [(u8, u8, u8); 5] = [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)];
const FLAGGED: &str = "#808080";
const MISSING: &str = "#ffffff";
const OVERLAY: &str = "#000000";

/// How cell values map to colours; stored in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorScale {
    /// `"categorical"` (winding) or `"linear"` (fidelity).
    pub kind: String,
    /// For categorical scales, `(w, colour)` for each value present.
    pub categories: Vec<(i64, String)>,
    /// For linear scales, the value range and the ramp stops spread evenly
    /// across it.
    pub range: Option<(f64, f64)>,
    pub stops: Vec<String>,
    pub flagged: String,
    pub missing: String,
}

fn hex((r, g, b): (u8, u8, u8)) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn categorical(w: i64) -> &'static str {
    CATEGORICAL[w.rem_euclid(CATEGORICAL.len() as i64) as usize]
}

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |x: u8, y: u8| (x as f64 + f * (y as f64 - x as f64)).round() as u8;
    hex((mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2)))
}

const CELL: f64 = 8.0;
const MARGIN: f64 = 48.0;

/// Renders a grid with `λ` across and `t2` up, optionally overlaying
/// boundary curves given as `(t2, λ)` samples.
pub fn heatmap_svg(grid: &PhaseDiagramGrid, overlay: Option<&BoundaryCurves>) -> (String, ColorScale) {
    let (nx, ny) = (grid.lambda_axis.count, grid.t2_axis.count);
    let (w, h) = (nx as f64 * CELL, ny as f64 * CELL);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        w + 2.0 * MARGIN,
        h + 2.0 * MARGIN,
        w + 2.0 * MARGIN,
        h + 2.0 * MARGIN
    );

    let clip = grid.metadata.clip.unwrap_or(1.0);
    let max = clip.ln_1p();
    let mut present: Vec<i64> = grid.cells.iter().filter_map(|c| c.w).collect();
    present.sort_unstable();
    present.dedup();
    let scale = match grid.metadata.kind {
        GridKind::Winding => ColorScale {
            kind: "categorical".into(),
            categories: present.iter().map(|&v| (v, categorical(v).to_string())).collect(),
            range: None,
            stops: Vec::new(),
            flagged: FLAGGED.into(),
            missing: MISSING.into(),
        },
        GridKind::Fidelity => ColorScale {
            kind: "linear".into(),
            categories: Vec::new(),
            range: Some((0.0, max)),
            stops: RAMP.iter().map(|&c| hex(c)).collect(),
            flagged: FLAGGED.into(),
            missing: MISSING.into(),
        },
    };

    for j in 0..ny {
        for i in 0..nx {
            let c = grid.cell(i, j);
            let fill = match (grid.metadata.kind, c.flag) {
                (GridKind::Winding, CellFlag::Ok) => c.w.map_or(MISSING.to_string(), |v| categorical(v).to_string()),
                (GridKind::Winding, _) => FLAGGED.to_string(),
                (GridKind::Fidelity, _) => c.log1p_abs_chi.map_or(MISSING.to_string(), |v| ramp(v / max)),
            };
            let x = MARGIN + i as f64 * CELL;
            let y = MARGIN + h - (j + 1) as f64 * CELL;
            let _ = writeln!(out, r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"/>"#);
        }
    }

    if let Some(curves) = overlay {
        let (l0, l1) = (grid.lambda_axis.start, grid.lambda_axis.end);
        let (t0, t1) = (grid.t2_axis.start, grid.t2_axis.end);
        let px = |lambda: f64| MARGIN + (lambda - l0) / (l1 - l0) * w;
        let py = |t2: f64| MARGIN + h - (t2 - t0) / (t1 - t0) * h;
        for curve in &curves.curves {
            // Break the line where the branch leaves the plot or stops being real.
            let mut pieces: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
            let gap = curve.points.windows(2).map(|p| p[1].0 - p[0].0).fold(f64::INFINITY, f64::min) * 1.5;
            let mut last_t2 = f64::NAN;
            for &(t2, lambda) in &curve.points {
                let inside = (l0..=l1).contains(&lambda) && (t0..=t1).contains(&t2);
                if !inside || t2 - last_t2 > gap {
                    pieces.push(Vec::new());
                }
                if inside {
                    pieces.last_mut().unwrap().push((px(lambda), py(t2)));
                }
                last_t2 = t2;
            }
            for piece in pieces.iter().filter(|p| p.len() >= 2) {
                let pts: Vec<String> = piece.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{OVERLAY}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
            }
        }
    }

    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="{OVERLAY}"/>"#
    );
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" font-size="11" text-anchor="{anchor}">{text}</text>"#);
    };
    label(&mut out, MARGIN, MARGIN + h + 14.0, "start", format!("{}", grid.lambda_axis.start));
    label(&mut out, MARGIN + w, MARGIN + h + 14.0, "end", format!("{}", grid.lambda_axis.end));
    label(&mut out, MARGIN + w / 2.0, MARGIN + h + 30.0, "middle", "λ".into());
    label(&mut out, MARGIN - 4.0, MARGIN + h, "end", format!("{}", grid.t2_axis.start));
    label(&mut out, MARGIN - 4.0, MARGIN + 10.0, "end", format!("{}", grid.t2_axis.end));
    label(&mut out, MARGIN / 2.0, MARGIN + h / 2.0, "middle", "t2".into());
    out.push_str("</svg>\n");
    (out, scale)
}
