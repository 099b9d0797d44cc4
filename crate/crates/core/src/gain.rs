//! Bogolyubov gain per Schmidt mode, renormalized weights and Schmidt number.

use crate::error::{Error, Result};
use crate::schmidt::SchmidtModes;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeGain {
    pub m: usize,
    pub n: i32,
    pub lambda: f64,
    pub cosh_r: f64,
    pub sinh_r: f64,
    pub mean_photons: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainState {
    pub gain: f64,
    pub modes: Vec<ModeGain>,
    pub lambda_tilde: Vec<f64>,
    pub total_photons: f64,
}

/// Per-mode squeezing r = G·√λ applied to every mode.
pub fn bogolyubov(modes: &SchmidtModes, gain: f64) -> GainState {
    let per_mode: Vec<ModeGain> = modes
        .modes
        .iter()
        .map(|md| {
            let r = gain * md.lambda.sqrt();
            let s = r.sinh();
            ModeGain { m: md.m, n: md.n, lambda: md.lambda, cosh_r: r.cosh(), sinh_r: s, mean_photons: s * s }
        })
        .collect();
    let total_photons = per_mode.iter().map(|m| m.mean_photons).sum();
    GainState { gain, lambda_tilde: renormalized_eigenvalues(&modes.lambdas(), gain), modes: per_mode, total_photons }
}

/// ln sinh(x) for x > 0 without overflow.
fn ln_sinh(x: f64) -> f64 {
    if x < 20.0 {
        x.sinh().ln()
    } else {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    }
}

/// λ̃ = sinh²(G√λ) / Σ sinh²(G√λ); at G = 0 the low-gain limit λ/Σλ.
pub fn renormalized_eigenvalues(lambda: &[f64], gain: f64) -> Vec<f64> {
    if gain == 0.0 {
        let total: f64 = lambda.iter().sum();
        return lambda.iter().map(|l| l / total).collect();
    }
    let logs: Vec<f64> = lambda
        .iter()
        .map(|&l| if l > 0.0 { 2.0 * ln_sinh(gain * l.sqrt()) } else { f64::NEG_INFINITY })
        .collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|&v| (v - peak).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// K = 1 / Σ λ̃².
pub fn schmidt_number(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::EmptyWeights);
    }
    Ok(1.0 / weights.iter().map(|w| w * w).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub gain: f64,
    pub schmidt_number: f64,
    pub total_photons: f64,
}

pub fn gain_scan(lambda: &[f64], gains: &[f64]) -> Result<Vec<ScanRow>> {
    if gains.is_empty() {
        return Err(Error::InvalidArgument("empty gain list".into()));
    }
    gains
        .iter()
        .map(|&g| {
            if !(g >= 0.0) {
                return Err(Error::InvalidArgument(format!("negative gain {g}")));
            }
            Ok(ScanRow {
                gain: g,
                schmidt_number: schmidt_number(&renormalized_eigenvalues(lambda, g))?,
                total_photons: lambda.iter().map(|l| (g * l.sqrt()).sinh().powi(2)).sum(),
            })
        })
        .collect()
}

/// `n` gains evenly spaced over [g_min, g_max]; a single point gives g_min.
pub fn linear_gains(g_min: f64, g_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![g_min],
        _ => (0..n).map(|i| g_min + (g_max - g_min) * i as f64 / (n - 1) as f64).collect(),
    }
}
