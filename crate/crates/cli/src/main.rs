//! `nhknot` command-line driver.
//!
//! Every command reads an optional flat `key = value` config file, applies
//! `--set key=value` and flag overrides, and echoes the resolved values in
//! `manifest.json` when it writes files.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage or config error.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use nhknot::braid::knot_class_of;
use nhknot::io::{self, Config, OutputManifest};
use nhknot::manybody::{
    entropy_vs_cut, entropy_vs_size, fidelity, fidelity_lambda_scan, fidelity_scan, fit_cardy_calabrese, fit_log_curve,
    local_maxima, CurveMode, CHI_CLIP, DEFAULT_EPSILON, DEFAULT_FIDELITY_SITES,
};
use nhknot::model::symmetry_residuals;
use nhknot::parallel::default_workers;
use nhknot::spectral::track_bands;
use nhknot::topology::{
    boundary_curves, phase_boundary_lambdas, sweep_phase_diagram, winding_number, Axis, SweepSpec,
};
use nhknot::{Error, ModelParams};

const DEFAULT_ENTROPY_SITES: usize = 1600;
const DEFAULT_SIZES: [usize; 7] = [200, 280, 400, 560, 800, 1120, 1600];

#[derive(Parser)]
#[command(name = "nhknot", version, about = "Knotted bands and entanglement of a non-Hermitian four-band chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat key = value config file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set lambda=0.7`. Repeatable.
    #[arg(short, long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory for commands that write files.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (or "auto"); defaults to $NHKNOT_WORKERS, then the CPU count.
    #[arg(short, long, global = true)]
    workers: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    t1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    t2: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    t3: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    t4: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, global = true)]
    q: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Residuals of the particle-hole, T and Γ relations of H(k).
    Symcheck(Common),
    /// Tracked complex bands E_i(k) as CSV.
    Spectrum(Common),
    /// Braid word of the bands and the invariants of its closure.
    Braid(Common),
    /// Spectral winding number at one point.
    Winding(Common),
    /// Analytic phase-boundary values of λ.
    Boundaries(Common),
    /// Winding numbers (and optionally knot classes) on a (λ, t2) grid.
    PhaseDiagram(Common),
    /// Entanglement entropy against the cut position.
    EeCut(Common),
    /// Half-chain entanglement entropy against the lattice size.
    EeSize(Common),
    /// Central charge from both scaling forms.
    Cfit(Common),
    /// Fidelity and susceptibility at one point.
    Fidelity(Common),
    /// Fidelity susceptibility along λ or over a (λ, t2) grid.
    FidelityScan(Common),
}

/// Config lookups that remember which keys were read and with what value.
struct Ctx {
    cfg: Config,
    used: BTreeSet<String>,
    echo: Vec<(String, String)>,
    out: PathBuf,
    workers: usize,
}

fn usage(message: impl Into<String>) -> Error {
    Error::Config { line: 0, message: message.into() }
}

impl Ctx {
    fn new(common: &Common, command: &str) -> Result<Self, Error> {
        let mut cfg = match &common.config {
            Some(path) => Config::load(path).map_err(|e| match e {
                Error::Config { line, message } => {
                    Error::Config { line, message: format!("{}: {message}", path.display()) }
                }
                Error::Io(err) => usage(format!("{}: {err}", path.display())),
                other => other,
            })?,
            None => Config::default(),
        };
        let flags = [
            ("t1", &common.t1),
            ("t2", &common.t2),
            ("t3", &common.t3),
            ("t4", &common.t4),
            ("lambda", &common.lambda),
            ("mu", &common.mu),
            ("q", &common.q),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v);
            }
        }
        for kv in &common.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim());
        }
        if let Some(w) = &common.workers {
            cfg.set("workers", w);
        }
        if let Some(o) = &common.out {
            cfg.set("out", o.display());
        }
        let mut ctx = Ctx { cfg, used: BTreeSet::new(), echo: Vec::new(), out: PathBuf::new(), workers: 1 };
        ctx.workers = match ctx.cfg.raw("workers") {
            None | Some("auto") => default_workers(),
            Some(_) => ctx.cfg.get::<usize>("workers")?.filter(|&n| n > 0).ok_or_else(|| {
                Error::Config { line: ctx.cfg.line_of("workers"), message: "workers must be positive or auto".into() }
            })?,
        };
        ctx.used.insert("workers".into());
        ctx.out = PathBuf::from(ctx.string("out", &format!("nhknot-out/{command}")));
        Ok(ctx)
    }

    fn value<T: std::str::FromStr + ToString>(&mut self, key: &str, default: T) -> Result<T, Error> {
        self.used.insert(key.into());
        let v = self.cfg.get_or(key, default)?;
        self.echo.push((key.into(), v.to_string()));
        Ok(v)
    }

    fn string(&mut self, key: &str, default: &str) -> String {
        self.used.insert(key.into());
        let v = self.cfg.raw(key).unwrap_or(default).to_string();
        self.echo.push((key.into(), v.clone()));
        v
    }

    fn list<T: std::str::FromStr + ToString + Clone>(&mut self, key: &str, default: &[T]) -> Result<Vec<T>, Error> {
        self.used.insert(key.into());
        let v = self.cfg.get_list(key)?.unwrap_or_else(|| default.to_vec());
        self.echo.push((key.into(), v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")));
        Ok(v)
    }

    fn model(&mut self) -> Result<ModelParams, Error> {
        let p = io::model_params(&self.cfg)?;
        for (k, v) in io::params_to_pairs(&p) {
            self.used.insert(k.into());
            self.echo.push((k.into(), v));
        }
        Ok(p)
    }

    fn n_k(&mut self, default: usize, minimum: usize) -> Result<usize, Error> {
        let n_k = self.value("n_k", default)?;
        if n_k < minimum {
            return Err(Error::Config {
                line: self.cfg.line_of("n_k"),
                message: format!("n_k = {n_k} is below the minimum of {minimum}"),
            });
        }
        Ok(n_k)
    }

    fn axis(&mut self, name: &str, start: f64, end: f64, count: usize) -> Result<Axis, Error> {
        let a = self.value(&format!("{name}_min"), start)?;
        let b = self.value(&format!("{name}_max"), end)?;
        let n = self.value(&format!("{name}_count"), count)?;
        if !(a < b) || n < 2 {
            return Err(usage(format!("{name} axis needs min < max and count >= 2")));
        }
        Ok(Axis::new(a, b, n))
    }

    /// Rejects config keys no lookup asked for.
    fn finish_reading(&self) -> Result<(), Error> {
        let known: Vec<&str> = self.used.iter().map(String::as_str).collect();
        self.cfg.check_keys(&known)
    }

    fn manifest(&self, command: &str) -> Result<OutputManifest, Error> {
        std::fs::create_dir_all(&self.out)?;
        let mut echo = self.echo.clone();
        echo.push(("workers".into(), self.workers.to_string()));
        Ok(OutputManifest::new(command, echo, self.workers))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            match &e {
                Error::Config { line: 0, message } => eprintln!("error: {message}"),
                _ => eprintln!("error: {e}"),
            }
            match e {
                Error::Config { .. } | Error::InvalidParams(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Symcheck(c) => symcheck(Ctx::new(&c, "symcheck")?),
        Command::Spectrum(c) => spectrum(Ctx::new(&c, "spectrum")?),
        Command::Braid(c) => braid(Ctx::new(&c, "braid")?),
        Command::Winding(c) => winding(Ctx::new(&c, "winding")?),
        Command::Boundaries(c) => boundaries(Ctx::new(&c, "boundaries")?),
        Command::PhaseDiagram(c) => phase_diagram(Ctx::new(&c, "phase-diagram")?),
        Command::EeCut(c) => ee_cut(Ctx::new(&c, "ee-cut")?),
        Command::EeSize(c) => ee_size(Ctx::new(&c, "ee-size")?),
        Command::Cfit(c) => cfit(Ctx::new(&c, "cfit")?),
        Command::Fidelity(c) => fidelity_point(Ctx::new(&c, "fidelity")?),
        Command::FidelityScan(c) => fidelity_scan_cmd(Ctx::new(&c, "fidelity-scan")?),
    }
}

const SYMMETRY_TOL: f64 = 1e-12;

fn symcheck(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let p = ctx.model()?;
    let k_samples = ctx.value("k_samples", 64usize)?;
    ctx.finish_reading()?;
    if k_samples < 2 {
        return Err(usage("k_samples must be at least 2"));
    }
    let r = symmetry_residuals(&p, k_samples)?;
    let status = |x: f64, asserted: bool| match (asserted, x < SYMMETRY_TOL) {
        (false, _) => "not applicable",
        (true, true) => "pass",
        (true, false) => "FAIL",
    };
    println!("{:<16} {:>12}  status", "relation", "residual");
    println!("{:<16} {:>12.3e}  {}", "particle-hole", r.particle_hole, status(r.particle_hole, true));
    println!("{:<16} {:>12.3e}  {}", "T", r.time_reversal, status(r.time_reversal, r.t1_equals_t3));
    println!("{:<16} {:>12.3e}  {}", "Gamma", r.chiral, status(r.chiral, r.t1_equals_t3));
    Ok(if r.passes(SYMMETRY_TOL) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn spectrum(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let p = ctx.model()?;
    let n_k = ctx.n_k(512, 64)?;
    ctx.finish_reading()?;
    let mut m = ctx.manifest("spectrum")?;
    let strings = m.timed("track_bands", || track_bands(&p, n_k))?;
    io::write_energy_strings(&ctx.out.join("energy_strings.csv"), &strings)?;
    m.record(&ctx.out, "energy_strings.csv", io::ENERGY_STRINGS_SCHEMA)?;
    m.write(&ctx.out)?;
    println!("endpoint permutation {:?}", strings.endpoint_permutation);
    Ok(ExitCode::SUCCESS)
}

fn braid(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let p = ctx.model()?;
    let n_k = ctx.n_k(512, 64)?;
    let theta = ctx.value("theta", 0.0f64)?;
    ctx.finish_reading()?;
    let mut m = ctx.manifest("braid")?;
    let strings = m.timed("track_bands", || track_bands(&p, n_k))?;
    let (word, inv, class) = m.timed("braid", || knot_class_of(&strings, theta))?;
    io::write_energy_strings(&ctx.out.join("energy_strings.csv"), &strings)?;
    m.record(&ctx.out, "energy_strings.csv", io::ENERGY_STRINGS_SCHEMA)?;
    io::write_braid(&ctx.out.join("word.braid"), &word)?;
    m.record(&ctx.out, "word.braid", io::BRAID_SCHEMA)?;
    let summary = serde_json::json!({
        "word": word.tokens(),
        "tag": class.tag.to_string(),
        "component_count": inv.component_count(),
        "components": inv.components,
        "linking_matrix": inv.lk,
        "writhe": inv.writhe,
        "summary": class.summary,
    });
    io::write_json(&ctx.out.join("invariants.json"), &summary)?;
    m.record(&ctx.out, "invariants.json", io::JSON_SCHEMA)?;
    m.write(&ctx.out)?;
    println!("word: {}", if word.is_empty() { "(empty)".to_string() } else { word.tokens() });
    println!("class: {}", class.tag);
    Ok(ExitCode::SUCCESS)
}

fn winding(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let p = ctx.model()?;
    let n_k = ctx.n_k(1024, nhknot::topology::MIN_WINDING_SAMPLES)?;
    ctx.finish_reading()?;
    let r = winding_number(&p, n_k)?;
    println!("w = {}  (raw {:.6}, min |f| = {:.3e}, n_k = {})", r.w, r.w_raw, r.min_abs_f, r.n_k_used);
    Ok(ExitCode::SUCCESS)
}

fn boundaries(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let p = ctx.model()?;
    ctx.finish_reading()?;
    let roots = phase_boundary_lambdas(&p);
    for l in &roots.lambdas {
        println!("{l:.6}");
    }
    if roots.dropped > 0 {
        info!("{} branches have no real root", roots.dropped);
    }
    Ok(ExitCode::SUCCESS)
}

fn phase_diagram(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let base = ctx.model()?;
    let lambda_axis = ctx.axis("lambda", 0.0, 1.5, 64)?;
    let t2_axis = ctx.axis("t2", 0.0, 3.0, 64)?;
    let n_k = ctx.n_k(512, nhknot::topology::MIN_WINDING_SAMPLES)?;
    let with_knots = ctx.value("knots", false)?;
    let svg = ctx.value("svg", true)?;
    ctx.finish_reading()?;
    let mut m = ctx.manifest("phase-diagram")?;
    let spec = SweepSpec { lambda_axis, t2_axis, n_k, with_knots, workers: ctx.workers };
    let grid = m.timed("sweep", || sweep_phase_diagram(&base, &spec))?;
    io::write_grid_csv(&ctx.out.join("phase_diagram.csv"), &grid)?;
    m.record(&ctx.out, "phase_diagram.csv", io::WINDING_GRID_SCHEMA)?;
    io::write_grid_sidecar(&ctx.out.join("phase_diagram.json"), &grid)?;
    m.record(&ctx.out, "phase_diagram.json", io::JSON_SCHEMA)?;
    if svg {
        let curves = boundary_curves(&base, (t2_axis.start, t2_axis.end), 400);
        let (text, scale) = io::heatmap_svg(&grid, Some(&curves));
        std::fs::write(ctx.out.join("phase_diagram.svg"), text)?;
        m.record(&ctx.out, "phase_diagram.svg", "svg/1")?;
        m.color_scale = Some(scale);
    }
    m.write(&ctx.out)?;
    let regions = grid.winding_regions();
    let mut values: Vec<i64> = regions.iter().map(|r| r.0).collect();
    values.sort_unstable();
    values.dedup();
    println!("winding values {values:?} in {} connected regions", regions.len());
    Ok(ExitCode::SUCCESS)
}

fn default_cuts(sites: usize, step: usize) -> Vec<usize> {
    (1..sites).filter(|c| c % step == 0).collect()
}

fn ee_cut(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let p = ctx.model()?;
    let sites = ctx.value("sites", DEFAULT_ENTROPY_SITES)?;
    let step = ctx.value("cut_step", 50usize)?.max(1);
    let cuts = ctx.list("cuts", &default_cuts(sites, step))?;
    ctx.finish_reading()?;
    let mut m = ctx.manifest("ee-cut")?;
    let curve = m.timed("entropy", || entropy_vs_cut(&p, sites, &cuts))?;
    io::write_entropy_curve(&ctx.out.join("entropy_cut.csv"), &curve)?;
    m.record(&ctx.out, "entropy_cut.csv", io::ENTROPY_CUT_SCHEMA)?;
    m.write(&ctx.out)?;
    println!("{} cuts, max |Im S| = {:.3e}", curve.abscissa.len(), curve.max_imag());
    Ok(ExitCode::SUCCESS)
}

fn ee_size(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let p = ctx.model()?;
    let sizes = ctx.list("sizes", &DEFAULT_SIZES)?;
    ctx.finish_reading()?;
    let mut m = ctx.manifest("ee-size")?;
    let curve = m.timed("entropy", || entropy_vs_size(&p, &sizes, ctx.workers))?;
    io::write_entropy_curve(&ctx.out.join("entropy_size.csv"), &curve)?;
    m.record(&ctx.out, "entropy_size.csv", io::ENTROPY_SIZE_SCHEMA)?;
    m.write(&ctx.out)?;
    println!("{} sizes, max |Im S| = {:.3e}", curve.abscissa.len(), curve.max_imag());
    Ok(ExitCode::SUCCESS)
}

/// Fits existing curve files when `cut_curve` / `size_curve` are given,
/// otherwise computes both curves first.
fn cfit(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let cut_file = ctx.string("cut_curve", "");
    let size_file = ctx.string("size_curve", "");
    let p = ctx.model()?;
    let sites = ctx.value("sites", DEFAULT_ENTROPY_SITES)?;
    let step = ctx.value("cut_step", 8usize)?.max(1);
    let cuts = ctx.list("cuts", &default_cuts(sites, step))?;
    let sizes = ctx.list("sizes", &DEFAULT_SIZES)?;
    ctx.finish_reading()?;
    let mut m = ctx.manifest("cfit")?;

    let load = |file: &str, mode: CurveMode| -> Result<Option<nhknot::manybody::EntropyCurve>, Error> {
        if file.is_empty() {
            return Ok(None);
        }
        let c = io::read_entropy_curve(Path::new(file))?;
        if c.mode != mode {
            return Err(usage(format!("{file} holds the wrong kind of curve")));
        }
        Ok(Some(c))
    };
    let cut_curve = match load(&cut_file, CurveMode::VaryCut)? {
        Some(c) => c,
        None => {
            let c = m.timed("entropy_cut", || entropy_vs_cut(&p, sites, &cuts))?;
            io::write_entropy_curve(&ctx.out.join("entropy_cut.csv"), &c)?;
            m.record(&ctx.out, "entropy_cut.csv", io::ENTROPY_CUT_SCHEMA)?;
            c
        }
    };
    let size_curve = match load(&size_file, CurveMode::VarySize)? {
        Some(c) => c,
        None => {
            let c = m.timed("entropy_size", || entropy_vs_size(&p, &sizes, ctx.workers))?;
            io::write_entropy_curve(&ctx.out.join("entropy_size.csv"), &c)?;
            m.record(&ctx.out, "entropy_size.csv", io::ENTROPY_SIZE_SCHEMA)?;
            c
        }
    };
    let cut_sites = cut_curve.sites.unwrap_or(sites);
    let cc = fit_cardy_calabrese(&cut_curve, cut_sites)?;
    let log = fit_log_curve(&size_curve)?;
    let rel = (cc.c - log.c).abs() / cc.c.abs().max(log.c.abs()).max(1.0);
    io::write_json(
        &ctx.out.join("fits.json"),
        &serde_json::json!({ "cardy_calabrese": cc, "log_scaling": log, "relative_difference": rel }),
    )?;
    m.record(&ctx.out, "fits.json", io::JSON_SCHEMA)?;
    m.write(&ctx.out)?;
    println!("c (cut fit)  = {:.4} ± {:.4}{}", cc.c, cc.c_err, if cc.poor_fit { "  [poor fit]" } else { "" });
    println!("c (size fit) = {:.4} ± {:.4}{}", log.c, log.c_err, if log.poor_fit { "  [poor fit]" } else { "" });
    println!("relative difference {rel:.4}");
    Ok(ExitCode::SUCCESS)
}

fn fidelity_point(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let p = ctx.model()?;
    let sites = ctx.value("sites", DEFAULT_FIDELITY_SITES)?;
    let eps = ctx.value("epsilon", DEFAULT_EPSILON)?;
    ctx.finish_reading()?;
    let f = fidelity(&p, sites, eps)?;
    println!("F = {:.12} {:+.12}i", f.f.re, f.f.im);
    println!("chi = {:.6e} {:+.6e}i  |chi| = {:.6e}", f.chi.re, f.chi.im, f.chi.norm());
    Ok(ExitCode::SUCCESS)
}

fn fidelity_scan_cmd(mut ctx: Ctx) -> Result<ExitCode, Error> {
    let base = ctx.model()?;
    let sites = ctx.value("sites", DEFAULT_FIDELITY_SITES)?;
    let eps = ctx.value("epsilon", DEFAULT_EPSILON)?;
    let mode = ctx.string("mode", "line");
    match mode.as_str() {
        "line" => {
            let axis = ctx.axis("lambda", 0.05, 1.45, 281)?;
            ctx.finish_reading()?;
            let mut m = ctx.manifest("fidelity-scan")?;
            let points = m.timed("scan", || fidelity_lambda_scan(&base, &axis.values(), sites, eps, ctx.workers))?;
            io::write_fidelity_scan(&ctx.out.join("fidelity_scan.csv"), &points)?;
            m.record(&ctx.out, "fidelity_scan.csv", io::FIDELITY_SCAN_SCHEMA)?;
            m.write(&ctx.out)?;
            let chi: Vec<f64> = points.iter().map(|p| p.abs_chi_clipped).collect();
            for i in local_maxima(&chi) {
                let clipped = if chi[i] >= CHI_CLIP { " (clipped)" } else { "" };
                println!("peak at lambda = {:.4}  |chi| = {:.4e}{clipped}", points[i].lambda, chi[i]);
            }
        }
        "grid" => {
            let lambda_axis = ctx.axis("lambda", 0.0, 1.5, 64)?;
            let t2_axis = ctx.axis("t2", 0.0, 3.0, 64)?;
            let svg = ctx.value("svg", true)?;
            ctx.finish_reading()?;
            let mut m = ctx.manifest("fidelity-scan")?;
            let grid = m.timed("scan", || fidelity_scan(&base, lambda_axis, t2_axis, sites, eps, ctx.workers))?;
            io::write_grid_csv(&ctx.out.join("fidelity_grid.csv"), &grid)?;
            m.record(&ctx.out, "fidelity_grid.csv", io::FIDELITY_GRID_SCHEMA)?;
            io::write_grid_sidecar(&ctx.out.join("fidelity_grid.json"), &grid)?;
            m.record(&ctx.out, "fidelity_grid.json", io::JSON_SCHEMA)?;
            if svg {
                let curves = boundary_curves(&base, (t2_axis.start, t2_axis.end), 400);
                let (text, scale) = io::heatmap_svg(&grid, Some(&curves));
                std::fs::write(ctx.out.join("fidelity_grid.svg"), text)?;
                m.record(&ctx.out, "fidelity_grid.svg", "svg/1")?;
                m.color_scale = Some(scale);
            }
            m.write(&ctx.out)?;
        }
        other => {
            return Err(Error::Config {
                line: ctx.cfg.line_of("mode"),
                message: format!("mode must be line or grid, got {other:?}"),
            })
        }
    }
    Ok(ExitCode::SUCCESS)
}
