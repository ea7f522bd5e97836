//! Configuration, data files and run manifests.
//!
//! Numbers are written with 12 significant digits; complex values are split
//! into `_re` and `_im` columns. Column names are fixed per schema and the
//! schema versions are recorded in the manifest.

mod config;
mod manifest;
mod svg;

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub use config::{model_params, params_to_pairs, Config, MODEL_KEYS};
pub use manifest::{sha256_file, FileRecord, OutputManifest, TOOL_NAME, TOOL_VERSION};
pub use svg::{heatmap_svg, ColorScale};

use crate::braid::BraidWord;
use crate::error::Result;
use crate::manybody::{CurveMode, EntropyCurve, FidelityPoint};
use crate::spectral::EnergyStrings;
use crate::topology::{GridKind, PhaseDiagramGrid};

pub const ENERGY_STRINGS_SCHEMA: &str = "energy-strings/1";
pub const WINDING_GRID_SCHEMA: &str = "winding-grid/1";
pub const FIDELITY_GRID_SCHEMA: &str = "fidelity-grid/1";
pub const ENTROPY_CUT_SCHEMA: &str = "entropy-cut/1";
pub const ENTROPY_SIZE_SCHEMA: &str = "entropy-size/1";
pub const FIDELITY_SCAN_SCHEMA: &str = "fidelity-scan/1";
pub const BRAID_SCHEMA: &str = "braid-tokens/1";
pub const JSON_SCHEMA: &str = "json/1";

/// 12 significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // Also folds -0 into 0.
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

pub fn energy_strings_header() -> Vec<String> {
    let mut h = vec!["k".to_string()];
    for i in 1..=4 {
        h.push(format!("E{i}_re"));
        h.push(format!("E{i}_im"));
    }
    h
}

/// One row per `k` sample: `k, E1_re, E1_im, ..., E4_im`.
pub fn write_energy_strings(path: &Path, s: &EnergyStrings) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(energy_strings_header())?;
    for (k, bands) in s.k_grid.iter().zip(&s.bands) {
        let mut row = vec![num(*k)];
        for e in bands {
            row.push(num(e.re));
            row.push(num(e.im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// The token stream, e.g. `s1 s2^-1 s3`, followed by a newline. The empty
/// word is an empty line.
pub fn write_braid(path: &Path, word: &BraidWord) -> Result<()> {
    let mut f = File::create(path)?;
    writeln!(f, "{}", word.tokens())?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

pub fn grid_header(kind: GridKind) -> &'static [&'static str] {
    match kind {
        GridKind::Winding => &["lambda", "t2", "w", "flag", "knot_tag"],
        GridKind::Fidelity => &["lambda", "t2", "log1p_abs_chi", "flag", "knot_tag"],
    }
}

pub fn grid_schema(kind: GridKind) -> &'static str {
    match kind {
        GridKind::Winding => WINDING_GRID_SCHEMA,
        GridKind::Fidelity => FIDELITY_GRID_SCHEMA,
    }
}

/// One row per cell in storage order (`t2` slow, `λ` fast).
pub fn write_grid_csv(path: &Path, grid: &PhaseDiagramGrid) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(grid_header(grid.metadata.kind))?;
    for c in &grid.cells {
        let value = match grid.metadata.kind {
            GridKind::Winding => opt(c.w),
            GridKind::Fidelity => c.log1p_abs_chi.map(num).unwrap_or_default(),
        };
        w.write_record([num(c.lambda), num(c.t2), value, c.flag.as_str().to_string(), opt(c.knot_tag)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GridSidecar<'a> {
    schema: &'static str,
    lambda_axis: &'a crate::topology::Axis,
    t2_axis: &'a crate::topology::Axis,
    params_base: &'a crate::model::ModelParams,
    metadata: &'a crate::topology::GridMetadata,
}

/// Axes, base parameters and run metadata of a grid.
pub fn write_grid_sidecar(path: &Path, grid: &PhaseDiagramGrid) -> Result<()> {
    write_json(
        path,
        &GridSidecar {
            schema: grid_schema(grid.metadata.kind),
            lambda_axis: &grid.lambda_axis,
            t2_axis: &grid.t2_axis,
            params_base: &grid.params_base,
            metadata: &grid.metadata,
        },
    )
}

pub fn entropy_curve_schema(mode: CurveMode) -> &'static str {
    match mode {
        CurveMode::VaryCut => ENTROPY_CUT_SCHEMA,
        CurveMode::VarySize => ENTROPY_SIZE_SCHEMA,
    }
}

/// `L_A, S_re, S_im` for cut curves, `L, S_re, S_im` for size curves.
pub fn write_entropy_curve(path: &Path, curve: &EntropyCurve) -> Result<()> {
    let mut w = writer(path)?;
    let x = match curve.mode {
        CurveMode::VaryCut => "L_A",
        CurveMode::VarySize => "L",
    };
    w.write_record([x, "S_re", "S_im"])?;
    for ((a, s), im) in curve.abscissa.iter().zip(&curve.entropy).zip(&curve.entropy_imag) {
        w.write_record([a.to_string(), num(*s), num(*im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve written by [`write_entropy_curve`]; the first column name
/// tells the mode.
pub fn read_entropy_curve(path: &Path) -> Result<EntropyCurve> {
    let mut r = csv::Reader::from_path(path)?;
    let bad = |m: String| crate::error::Error::Config { line: 1, message: m };
    let mode = match r.headers()?.get(0) {
        Some("L_A") => CurveMode::VaryCut,
        Some("L") => CurveMode::VarySize,
        other => return Err(bad(format!("{}: unexpected first column {other:?}", path.display()))),
    };
    let mut curve = EntropyCurve { mode, sites: None, abscissa: Vec::new(), entropy: Vec::new(), entropy_imag: Vec::new() };
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let parse_err = || crate::error::Error::Config { line, message: format!("{}: malformed row", path.display()) };
        curve.abscissa.push(field(0).parse().map_err(|_| parse_err())?);
        curve.entropy.push(field(1).parse().map_err(|_| parse_err())?);
        curve.entropy_imag.push(field(2).parse().map_err(|_| parse_err())?);
    }
    Ok(curve)
}

/// `lambda, F_re, F_im, chi_re, chi_im, abs_chi_clipped, flag`.
pub fn write_fidelity_scan(path: &Path, points: &[FidelityPoint]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["lambda", "F_re", "F_im", "chi_re", "chi_im", "abs_chi_clipped", "flag"])?;
    for p in points {
        let (f_re, f_im, c_re, c_im) = match p.fidelity {
            Some(f) => (num(f.f.re), num(f.f.im), num(f.chi.re), num(f.chi.im)),
            None => Default::default(),
        };
        w.write_record([num(p.lambda), f_re, f_im, c_re, c_im, num(p.abs_chi_clipped), p.flag.as_str().to_string()])?;
    }
    w.flush()?;
    Ok(())
}
