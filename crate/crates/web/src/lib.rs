//! Browser bindings. Every export takes plain numbers and strings and
//! returns a JSON document, so the page needs no generated types.

use robustnn::classifier::{ScanStart, ZpRule};
use robustnn::datagen::{Design, Scenario};
use robustnn::distributions::MarginalSpec;
use robustnn::experiments::{
    success_vs_c, success_vs_threshold, sweep_beta_r, threshold_distribution, Method,
};
use wasm_bindgen::prelude::*;

fn scenario(p: usize, beta: f64, r: f64, marginal: &str) -> Result<Design, String> {
    let spec: MarginalSpec = marginal.parse().map_err(|e| format!("{e}"))?;
    Ok(Scenario::independent(p, beta, r, spec).into())
}

fn grid(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| format!("`{s}` is not a number"))
        })
        .collect()
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Success of the fixed-threshold rules over `t / a_p` in `[0, max_ratio]`,
/// together with success over the coefficient `c` of the adaptive rule.
#[allow(clippy::too_many_arguments)]
pub fn threshold_curve_json(
    p: usize,
    beta: f64,
    r: f64,
    marginal: &str,
    max_ratio: f64,
    points: usize,
    trials: usize,
    seed: u64,
) -> Result<String, String> {
    if points < 2 {
        return Err("need at least two grid points".into());
    }
    let prepared = scenario(p, beta, r, marginal)?
        .prepare()
        .map_err(|e| e.to_string())?;
    let proportions: Vec<f64> = (0..points)
        .map(|i| max_ratio * i as f64 / (points - 1) as f64)
        .collect();
    let threshold =
        success_vs_threshold(&prepared, &proportions, trials, seed).map_err(|e| e.to_string())?;
    let cs: Vec<f64> = (1..=12).map(|i| i as f64 / 10.0).collect();
    let by_c =
        success_vs_c(&prepared, &cs, trials, ScanStart::Median, seed).map_err(|e| e.to_string())?;
    to_json(&serde_json::json!({
        "shift": prepared.shift_amount(),
        "threshold": threshold,
        "c": by_c,
    }))
}

/// Which of the adaptive rule, nearest neighbor and the extrema rule wins
/// each `(beta, r)` cell.
pub fn dominance_map_json(
    p: usize,
    marginal: &str,
    betas: &str,
    rs: &str,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<String, String> {
    let betas = grid(betas)?;
    let rs = grid(rs)?;
    let template = scenario(
        p,
        betas.first().copied().unwrap_or(0.6),
        rs.first().copied().unwrap_or(0.5),
        marginal,
    )?;
    let methods = [Method::robust(c), Method::StandardNn, Method::Extrema];
    to_json(
        &sweep_beta_r(&betas, &rs, &template, &methods, trials, seed).map_err(|e| e.to_string())?,
    )
}

/// Histogram of the selected threshold relative to the shift.
#[allow(clippy::too_many_arguments)]
pub fn threshold_histogram_json(
    p: usize,
    beta: f64,
    r: f64,
    marginal: &str,
    c: f64,
    trials: usize,
    bins: usize,
    seed: u64,
) -> Result<String, String> {
    let prepared = scenario(p, beta, r, marginal)?
        .prepare()
        .map_err(|e| e.to_string())?;
    let hist = threshold_distribution(
        &prepared,
        trials,
        ZpRule::independent(c),
        ScanStart::Median,
        bins,
        seed,
    )
    .map_err(|e| e.to_string())?;
    to_json(&hist)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn threshold_curve(
    p: usize,
    beta: f64,
    r: f64,
    marginal: &str,
    max_ratio: f64,
    points: usize,
    trials: usize,
    seed: u32,
) -> Result<String, JsError> {
    threshold_curve_json(p, beta, r, marginal, max_ratio, points, trials, seed.into())
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dominance_map(
    p: usize,
    marginal: &str,
    betas: &str,
    rs: &str,
    c: f64,
    trials: usize,
    seed: u32,
) -> Result<String, JsError> {
    dominance_map_json(p, marginal, betas, rs, c, trials, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn threshold_histogram(
    p: usize,
    beta: f64,
    r: f64,
    marginal: &str,
    c: f64,
    trials: usize,
    bins: usize,
    seed: u32,
) -> Result<String, JsError> {
    threshold_histogram_json(p, beta, r, marginal, c, trials, bins, seed.into())
        .map_err(|e| JsError::new(&e))
}
