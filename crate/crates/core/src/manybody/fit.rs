use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{CurveMode, EntropyCurve};
use crate::error::{Error, Result};

pub const MIN_CUT_POINTS: usize = 8;
pub const MIN_SIZE_POINTS: usize = 6;
pub const MIN_SIZE_SPAN: f64 = 4.0;
/// Fits with a larger rms residual are marked poor.
pub const POOR_FIT_RMS: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub c: f64,
    /// One standard error of `c`.
    pub c_err: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    /// Smallest and largest abscissa used.
    pub window: (usize, usize),
    pub points: usize,
    pub poor_fit: bool,
}

struct Line {
    slope: f64,
    slope_err: f64,
    intercept: f64,
    rms: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_err = if x.len() > 2 { (ssr / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    Line { slope, slope_err, intercept, rms: (ssr / n).sqrt() }
}

fn finish(line: Line, window: (usize, usize), points: usize) -> FitResult {
    FitResult {
        c: 3.0 * line.slope,
        c_err: 3.0 * line.slope_err,
        intercept: line.intercept,
        rms_residual: line.rms,
        window,
        points,
        poor_fit: line.rms > POOR_FIT_RMS,
    }
}

/// Chord length `(L/π) sin(π L_A / L)`.
pub fn chord_length(sites: usize, cut: usize) -> f64 {
    let l = sites as f64;
    l / PI * (PI * cut as f64 / l).sin()
}

/// Fits `S = (c/3) log[(L/π) sin(π L_A/L)] + const` over cuts in
/// `[L/16, 15L/16]`.
pub fn fit_cardy_calabrese(curve: &EntropyCurve, sites: usize) -> Result<FitResult> {
    if curve.mode != CurveMode::VaryCut {
        return Err(Error::Fit("Cardy-Calabrese fit needs a cut curve".into()));
    }
    let (lo, hi) = (sites as f64 / 16.0, 15.0 * sites as f64 / 16.0);
    let (mut x, mut y, mut used) = (Vec::new(), Vec::new(), Vec::new());
    for (&cut, &s) in curve.abscissa.iter().zip(&curve.entropy) {
        let a = cut as f64;
        if a >= lo && a <= hi {
            x.push(chord_length(sites, cut).ln());
            y.push(s);
            used.push(cut);
        }
    }
    if used.len() < MIN_CUT_POINTS {
        return Err(Error::Fit(format!(
            "{} cuts inside [L/16, 15L/16]; need at least {MIN_CUT_POINTS}",
            used.len()
        )));
    }
    let window = (*used.iter().min().unwrap(), *used.iter().max().unwrap());
    Ok(finish(least_squares(&x, &y), window, used.len()))
}

/// Fits `S = (c/3) log L + const`.
pub fn fit_log_scaling(sizes: &[usize], entropies: &[f64]) -> Result<FitResult> {
    if sizes.len() != entropies.len() {
        return Err(Error::Fit("sizes and entropies differ in length".into()));
    }
    if sizes.len() < MIN_SIZE_POINTS {
        return Err(Error::Fit(format!("{} sizes; need at least {MIN_SIZE_POINTS}", sizes.len())));
    }
    let (min, max) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
    if (max as f64) < MIN_SIZE_SPAN * min as f64 {
        return Err(Error::Fit(format!("sizes {min}..{max} span less than a factor of {MIN_SIZE_SPAN}")));
    }
    let x: Vec<f64> = sizes.iter().map(|&l| (l as f64).ln()).collect();
    Ok(finish(least_squares(&x, entropies), (min, max), sizes.len()))
}

pub fn fit_log_curve(curve: &EntropyCurve) -> Result<FitResult> {
    if curve.mode != CurveMode::VarySize {
        return Err(Error::Fit("log-scaling fit needs a size curve".into()));
    }
    fit_log_scaling(&curve.abscissa, &curve.entropy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_synthetic_cardy_curve() {
        let sites = 400;
        let cuts: Vec<usize> = (1..sites).collect();
        let entropy: Vec<f64> = cuts.iter().map(|&a| chord_length(sites, a).ln() / 3.0 + 0.7).collect();
        let curve = EntropyCurve {
            mode: CurveMode::VaryCut,
            sites: Some(sites),
            abscissa: cuts.clone(),
            entropy_imag: vec![0.0; cuts.len()],
            entropy,
        };
        let fit = fit_cardy_calabrese(&curve, sites).unwrap();
        assert!((fit.c - 1.0).abs() < 1e-10);
        assert!((fit.intercept - 0.7).abs() < 1e-10);
        assert_eq!(fit.window, (25, 375));
        assert!(!fit.poor_fit);
    }

    #[test]
    fn recovers_synthetic_log_curve() {
        let sizes = [100, 150, 200, 300, 400, 800];
        let s: Vec<f64> = sizes.iter().map(|&l| 2.0 / 3.0 * (l as f64).ln() + 0.1).collect();
        let fit = fit_log_scaling(&sizes, &s).unwrap();
        assert!((fit.c - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_thin_inputs() {
        assert!(fit_log_scaling(&[100, 200, 300, 400, 500, 600], &[0.0; 6]).is_ok());
        assert!(fit_log_scaling(&[100, 200, 300, 390, 390, 390], &[0.0; 6]).is_err());
        assert!(fit_log_scaling(&[100, 200, 400, 800, 1600], &[0.0; 5]).is_err());
    }
}
