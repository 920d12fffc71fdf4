//! Monte Carlo engine: paired success-rate estimates, `(β, r)` sweeps with
//! dominance maps, threshold distributions, success curves and sample-size
//! studies.
//!
//! Trial `i` of cell `c` draws its data from
//! `rng_from_seed(derive_seed(base_seed, c, i))` and forces the test label to
//! X for even `i` and Y for odd `i`. Every method in a trial sees the same
//! draw. Results are collected in trial order, so serial and parallel runs
//! agree bit for bit.

use std::collections::HashSet;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::classifier::{
    classify_extrema, classify_fixed_threshold, classify_nn_standard, classify_nn_truncated,
    select_threshold_with, ScanStart, ThresholdDecision, ThresholdScan, TruncationMode, ZpRule,
    ZpRuleKind,
};
use crate::datagen::{Design, GeneratedData, PreparedDesign};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::{parallel, Population};

/// A classifier evaluated by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Robust {
        #[serde(default)]
        rule: ZpRule,
        #[serde(default)]
        start: ScanStart,
    },
    StandardNn,
    TruncatedNn {
        t: f64,
    },
    FixedThreshold {
        t: f64,
    },
    Extrema,
}

impl Method {
    pub fn robust(c: f64) -> Self {
        Method::Robust {
            rule: ZpRule::independent(c),
            start: ScanStart::Median,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Method::Robust { rule, .. } => match rule.kind {
                ZpRuleKind::IndependentSqrtLogP => "robust",
                ZpRuleKind::DependentLogP => "robust_dep",
            },
            Method::StandardNn => "standard_nn",
            Method::TruncatedNn { .. } => "truncated_nn",
            Method::FixedThreshold { .. } => "fixed_threshold",
            Method::Extrema => "extrema",
        }
    }

    pub fn is_robust(&self) -> bool {
        matches!(self, Method::Robust { .. })
    }

    /// Label for one data draw, with the threshold decision for the robust rule.
    pub fn classify(
        &self,
        data: &GeneratedData,
    ) -> Result<(Population, Option<ThresholdDecision>)> {
        self.classify_rows(&data.x_samples, &data.y_samples, &data.z)
    }

    pub fn classify_rows(
        &self,
        x: &[Vec<f64>],
        y: &[Vec<f64>],
        z: &[f64],
    ) -> Result<(Population, Option<ThresholdDecision>)> {
        Ok(match *self {
            Method::Robust { rule, start } => {
                let d = select_threshold_with(x, y, z, rule, start.resolve(x, y), false)?;
                (d.label(), Some(d))
            }
            Method::StandardNn => (classify_nn_standard(x, y, z)?, None),
            Method::TruncatedNn { t } => (
                classify_nn_truncated(x, y, z, t, TruncationMode::ZeroedValues)?,
                None,
            ),
            Method::FixedThreshold { t } => (classify_fixed_threshold(x, y, z, t)?, None),
            Method::Extrema => (classify_extrema(x, y, z)?, None),
        })
    }
}

fn check_methods(methods: &[Method]) -> Result<()> {
    if methods.is_empty() {
        return Err(Error::Argument("no methods given".into()));
    }
    let mut seen = HashSet::new();
    for m in methods {
        if !seen.insert(m.id()) {
            return Err(Error::Argument(format!(
                "method id {} appears twice",
                m.id()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub method: String,
    pub correct: bool,
    /// Present only for the robust rule.
    pub theta: Option<f64>,
    pub defaulted: Option<bool>,
    pub z_true_label: Population,
    pub seed: u64,
}

/// Draws one data set from `seed` and evaluates every method on it.
pub fn run_trial(
    prepared: &PreparedDesign,
    methods: &[Method],
    z_label: Population,
    seed: u64,
) -> Result<Vec<TrialResult>> {
    check_methods(methods)?;
    let data = prepared.generate(z_label, &mut rng_from_seed(seed));
    evaluate_methods(&data, methods, seed)
}

fn evaluate_methods(
    data: &GeneratedData,
    methods: &[Method],
    seed: u64,
) -> Result<Vec<TrialResult>> {
    methods
        .iter()
        .map(|m| {
            let (label, decision) = m.classify(data)?;
            Ok(TrialResult {
                method: m.id().to_string(),
                correct: label == data.z_label,
                theta: decision.as_ref().map(|d| d.theta),
                defaulted: decision.as_ref().map(|d| d.defaulted),
                z_true_label: data.z_label,
                seed,
            })
        })
        .collect()
}

pub fn trial_label(trial: usize) -> Population {
    if trial.is_multiple_of(2) {
        Population::X
    } else {
        Population::Y
    }
}

pub fn trial_seed(base_seed: u64, cell: u64, trial: usize) -> u64 {
    derive_seed(base_seed, cell, trial as u64)
}

/// Generic trial loop: `f` receives the trial index, its seed and its data.
fn map_trials<T, F>(
    prepared: &PreparedDesign,
    trials: usize,
    base_seed: u64,
    cell: u64,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64, &GeneratedData) -> Result<T> + Sync + Send,
{
    if trials == 0 {
        return Err(Error::Argument("trials must be ≥ 1".into()));
    }
    parallel::map_indexed(trials, |i| {
        let seed = trial_seed(base_seed, cell, i);
        let data = prepared.generate(trial_label(i), &mut rng_from_seed(seed));
        f(i, seed, &data)
    })
    .into_iter()
    .collect()
}

/// All per-trial results of one cell, trial-major.
pub fn run_trials(
    prepared: &PreparedDesign,
    methods: &[Method],
    trials: usize,
    base_seed: u64,
    cell: u64,
) -> Result<Vec<Vec<TrialResult>>> {
    check_methods(methods)?;
    map_trials(prepared, trials, base_seed, cell, |_, seed, data| {
        evaluate_methods(data, methods, seed)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub method: String,
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    /// `√(rate (1 − rate) / trials)`.
    pub se: f64,
}

impl RateEstimate {
    pub fn new(method: impl Into<String>, successes: usize, trials: usize) -> Self {
        let rate = successes as f64 / trials as f64;
        RateEstimate {
            method: method.into(),
            successes,
            trials,
            rate,
            se: binomial_se(rate, trials),
        }
    }
}

pub fn binomial_se(rate: f64, trials: usize) -> f64 {
    (rate * (1.0 - rate) / trials as f64).sqrt()
}

/// `√(se_a² + se_b²)`, the yardstick for differences between two rates.
pub fn combined_se(a: &RateEstimate, b: &RateEstimate) -> f64 {
    a.se.hypot(b.se)
}

fn tally(methods: &[Method], results: &[Vec<TrialResult>]) -> Vec<RateEstimate> {
    methods
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let hits = results.iter().filter(|r| r[j].correct).count();
            RateEstimate::new(m.id(), hits, results.len())
        })
        .collect()
}

/// Per-method success rates over balanced, paired trials (cell index 0).
pub fn estimate_success_rate(
    prepared: &PreparedDesign,
    methods: &[Method],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<RateEstimate>> {
    estimate_cell(prepared, methods, trials, base_seed, 0)
}

pub fn estimate_cell(
    prepared: &PreparedDesign,
    methods: &[Method],
    trials: usize,
    base_seed: u64,
    cell: u64,
) -> Result<Vec<RateEstimate>> {
    let results = run_trials(prepared, methods, trials, base_seed, cell)?;
    Ok(tally(methods, &results))
}

/// `1 − 2β + r`; positive above the classification boundary.
pub fn boundary_margin(beta: f64, r: f64) -> f64 {
    1.0 - 2.0 * beta + r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub beta: f64,
    pub r: f64,
    /// Empty when the cell was skipped.
    pub estimates: Vec<RateEstimate>,
    pub skipped: Option<String>,
    /// Method id with the highest rate.
    pub dominant: Option<String>,
    /// Whether the robust rule won through a tie.
    pub tie: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub beta_axis: Vec<f64>,
    pub r_axis: Vec<f64>,
    pub methods: Vec<String>,
    /// Row-major in `(β, r)`.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, beta_index: usize, r_index: usize) -> &SweepCell {
        &self.cells[beta_index * self.r_axis.len() + r_index]
    }

    /// Long format: `beta,r,method,rate,se,trials`. Skipped cells are omitted.
    pub fn write_long_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "beta,r,method,rate,se,trials")?;
        for c in &self.cells {
            for e in &c.estimates {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    c.beta, c.r, e.method, e.rate, e.se, e.trials
                )?;
            }
        }
        Ok(())
    }

    /// One row per β, one column per r. Entries are the winning method id,
    /// suffixed with `*` for a tie resolved toward the robust rule, or
    /// `skipped`.
    pub fn write_dominance_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "beta")?;
        for r in &self.r_axis {
            write!(w, ",r={r}")?;
        }
        writeln!(w)?;
        for (i, beta) in self.beta_axis.iter().enumerate() {
            write!(w, "{beta}")?;
            for j in 0..self.r_axis.len() {
                let c = self.cell(i, j);
                match &c.dominant {
                    Some(id) if c.tie => write!(w, ",{id}*")?,
                    Some(id) => write!(w, ",{id}")?,
                    None => write!(w, ",skipped")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Method with the highest rate; ties prefer the first robust method, then
/// method order. Returns the winner and whether a tie decided it.
fn dominant(methods: &[Method], estimates: &[RateEstimate]) -> (String, bool) {
    let best = estimates
        .iter()
        .map(|e| e.rate)
        .fold(f64::NEG_INFINITY, f64::max);
    let leaders: Vec<usize> = (0..estimates.len())
        .filter(|&j| estimates[j].rate == best)
        .collect();
    let pick = leaders
        .iter()
        .copied()
        .find(|&j| methods[j].is_robust())
        .unwrap_or(leaders[0]);
    (estimates[pick].method.clone(), leaders.len() > 1)
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::Argument(format!("{name} grid is empty")));
    }
    if axis.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::Domain(format!(
            "{name} grid values must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Fills every `(β, r)` cell of a template design. Cells whose design is
/// degenerate (no shifted components) are recorded as skipped.
pub fn sweep_beta_r(
    beta_grid: &[f64],
    r_grid: &[f64],
    template: &Design,
    methods: &[Method],
    trials_per_cell: usize,
    base_seed: u64,
) -> Result<SweepGrid> {
    check_axis("beta", beta_grid)?;
    check_axis("r", r_grid)?;
    check_methods(methods)?;
    let mut beta_axis = beta_grid.to_vec();
    let mut r_axis = r_grid.to_vec();
    beta_axis.sort_by(f64::total_cmp);
    r_axis.sort_by(f64::total_cmp);
    let mut cells = Vec::with_capacity(beta_axis.len() * r_axis.len());
    for &beta in &beta_axis {
        for &r in &r_axis {
            let index = cells.len() as u64;
            let design = template.with_beta_r(beta, r).ok_or_else(|| {
                Error::Config("template design has no (beta, r) parameters".into())
            })?;
            let prepared = match design.prepare() {
                Ok(p) => p,
                Err(Error::Degenerate(msg)) => {
                    cells.push(SweepCell {
                        beta,
                        r,
                        estimates: Vec::new(),
                        skipped: Some(msg),
                        dominant: None,
                        tie: false,
                    });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let estimates = estimate_cell(&prepared, methods, trials_per_cell, base_seed, index)?;
            let (winner, tie) = dominant(methods, &estimates);
            cells.push(SweepCell {
                beta,
                r,
                estimates,
                skipped: None,
                dominant: Some(winner),
                tie,
            });
        }
    }
    Ok(SweepGrid {
        beta_axis,
        r_axis,
        methods: methods.iter().map(|m| m.id().to_string()).collect(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub proportion: f64,
}

/// Distribution of the selected threshold in units of the shift amount.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdHistogram {
    /// Proportions are over all trials, so they sum to `1 − defaulted_fraction`.
    pub bins: Vec<HistogramBin>,
    pub defaulted_fraction: f64,
    /// `θ / scale` for every non-defaulted trial, in trial order.
    pub ratios: Vec<f64>,
    /// The shift amount, or 1 when the design has none.
    pub scale: f64,
    pub trials: usize,
}

impl ThresholdHistogram {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin_left,bin_right,proportion")?;
        for b in &self.bins {
            writeln!(w, "{},{},{}", b.left, b.right, b.proportion)?;
        }
        Ok(())
    }

    /// Index of the fullest bin.
    pub fn mode_bin(&self) -> Option<usize> {
        (0..self.bins.len()).reduce(|a, b| {
            if self.bins[b].proportion > self.bins[a].proportion {
                b
            } else {
                a
            }
        })
    }
}

fn histogram(values: &[f64], bins: usize, total: usize) -> Vec<HistogramBin> {
    if values.is_empty() {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weight = 1.0 / total as f64;
    if lo == hi {
        return vec![HistogramBin {
            left: lo,
            right: hi,
            proportion: values.len() as f64 * weight,
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            left: lo + b as f64 * width,
            right: if b + 1 == bins {
                hi
            } else {
                lo + (b + 1) as f64 * width
            },
            proportion: 0.0,
        })
        .collect();
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        out[b].proportion += weight;
    }
    out
}

/// Runs the robust rule over `trials` draws and bins the selected thresholds.
pub fn threshold_distribution(
    prepared: &PreparedDesign,
    trials: usize,
    rule: ZpRule,
    start: ScanStart,
    bins: usize,
    base_seed: u64,
) -> Result<ThresholdHistogram> {
    if bins == 0 {
        return Err(Error::Argument("histogram needs at least one bin".into()));
    }
    let method = Method::Robust { rule, start };
    let decisions = map_trials(prepared, trials, base_seed, 0, |_, _, data| {
        Ok(method.classify(data)?.1.expect("robust"))
    })?;
    let amount = prepared.shift_amount();
    let scale = if amount > 0.0 { amount } else { 1.0 };
    let ratios: Vec<f64> = decisions
        .iter()
        .filter(|d| !d.defaulted)
        .map(|d| d.theta / scale)
        .collect();
    let defaulted_fraction = (trials - ratios.len()) as f64 / trials as f64;
    Ok(ThresholdHistogram {
        bins: histogram(&ratios, bins, trials),
        defaulted_fraction,
        ratios,
        scale,
        trials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurvePoint {
    /// Threshold as a multiple of the shift amount.
    pub proportion: f64,
    pub t: f64,
    /// Indicator rule at fixed `t`.
    pub indicator: RateEstimate,
    /// Nearest neighbor on values zeroed at or below `t`.
    pub truncated: RateEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub points: Vec<ThresholdCurvePoint>,
    /// Reference line.
    pub standard_nn: RateEstimate,
}

impl ThresholdCurve {
    pub fn indicator_series(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.proportion, p.indicator.rate))
            .collect()
    }

    pub fn truncated_series(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.proportion, p.truncated.rate))
            .collect()
    }
}

/// Success at fixed thresholds `t = proportion · shift`, with no selection.
/// Every grid point reuses the same trials.
pub fn success_vs_threshold(
    prepared: &PreparedDesign,
    proportions: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<ThresholdCurve> {
    if proportions.is_empty() || proportions.iter().any(|v| v.is_nan()) {
        return Err(Error::Argument(
            "threshold grid must be nonempty and free of NaN".into(),
        ));
    }
    let amount = prepared.shift_amount();
    let ts: Vec<f64> = proportions
        .iter()
        .map(|&q| if q.is_infinite() { q } else { q * amount })
        .collect();
    let per_trial = map_trials(prepared, trials, base_seed, 0, |_, _, data| {
        let (x, y, z) = (&data.x_samples, &data.y_samples, &data.z);
        let truth = data.z_label;
        let mut row = Vec::with_capacity(2 * ts.len() + 1);
        row.push(classify_nn_standard(x, y, z)? == truth);
        for &t in &ts {
            row.push(classify_fixed_threshold(x, y, z, t)? == truth);
            row.push(classify_nn_truncated(x, y, z, t, TruncationMode::ZeroedValues)? == truth);
        }
        Ok(row)
    })?;
    let count = |col: usize| per_trial.iter().filter(|r| r[col]).count();
    let points = proportions
        .iter()
        .zip(&ts)
        .enumerate()
        .map(|(i, (&proportion, &t))| ThresholdCurvePoint {
            proportion,
            t,
            indicator: RateEstimate::new("fixed_threshold", count(1 + 2 * i), trials),
            truncated: RateEstimate::new("truncated_nn", count(2 + 2 * i), trials),
        })
        .collect();
    Ok(ThresholdCurve {
        points,
        standard_nn: RateEstimate::new("standard_nn", count(0), trials),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CCurvePoint {
    pub c: f64,
    pub robust: RateEstimate,
    pub defaulted_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CCurve {
    pub points: Vec<CCurvePoint>,
    pub standard_nn: RateEstimate,
    /// Smallest `c` attaining the highest rate.
    pub argmax_c: f64,
}

impl CCurve {
    pub fn series(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.c, p.robust.rate)).collect()
    }
}

/// Robust success with `z_p = c √(ln p)` for each `c`. One scan per trial
/// serves the whole grid.
pub fn success_vs_c(
    prepared: &PreparedDesign,
    c_grid: &[f64],
    trials: usize,
    start: ScanStart,
    base_seed: u64,
) -> Result<CCurve> {
    if c_grid.is_empty() || c_grid.iter().any(|c| c.is_nan() || *c < 0.0) {
        return Err(Error::Argument(
            "c grid must be nonempty with values ≥ 0".into(),
        ));
    }
    let p = prepared.p();
    let per_trial = map_trials(prepared, trials, base_seed, 0, |_, _, data| {
        let (x, y, z) = (&data.x_samples, &data.y_samples, &data.z);
        let scan: Vec<_> = ThresholdScan::new(x, y, z, start.resolve(x, y))?.collect();
        let mut row = vec![(classify_nn_standard(x, y, z)? == data.z_label, false)];
        for &c in c_grid {
            let d = ThresholdDecision::from_scan(&scan, ZpRule::independent(c), p.max(2))
                .expect("nonempty scan");
            row.push((d.label() == data.z_label, d.defaulted));
        }
        Ok(row)
    })?;
    let points: Vec<CCurvePoint> = c_grid
        .iter()
        .enumerate()
        .map(|(i, &c)| CCurvePoint {
            c,
            robust: RateEstimate::new(
                "robust",
                per_trial.iter().filter(|r| r[i + 1].0).count(),
                trials,
            ),
            defaulted_fraction: per_trial.iter().filter(|r| r[i + 1].1).count() as f64
                / trials as f64,
        })
        .collect();
    let mut best = &points[0];
    for pt in &points[1..] {
        if pt.robust.rate > best.robust.rate
            || (pt.robust.rate == best.robust.rate && pt.c < best.c)
        {
            best = pt;
        }
    }
    let argmax_c = best.c;
    let standard_nn = RateEstimate::new(
        "standard_nn",
        per_trial.iter().filter(|r| r[0].0).count(),
        trials,
    );
    Ok(CCurve {
        points,
        standard_nn,
        argmax_c,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeRow {
    pub m: usize,
    pub n: usize,
    pub estimates: Vec<RateEstimate>,
}

/// Rates for each `(m, n)`; row `k` uses cell index `k`.
pub fn sample_size_study(
    template: &Design,
    mn_pairs: &[(usize, usize)],
    methods: &[Method],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<SampleSizeRow>> {
    if mn_pairs.iter().any(|&(m, n)| m == 0 || n == 0) {
        return Err(Error::Config("sample sizes must be ≥ 1".into()));
    }
    mn_pairs
        .iter()
        .enumerate()
        .map(|(k, &(m, n))| {
            let prepared = template.with_sizes(m, n).prepare()?;
            Ok(SampleSizeRow {
                m,
                n,
                estimates: estimate_cell(&prepared, methods, trials, base_seed, k as u64)?,
            })
        })
        .collect()
}

pub fn write_sample_size_csv<W: Write>(rows: &[SampleSizeRow], mut w: W) -> io::Result<()> {
    writeln!(w, "m,n,method,rate,se,trials")?;
    for row in rows {
        for e in &row.estimates {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.m, row.n, e.method, e.rate, e.se, e.trials
            )?;
        }
    }
    Ok(())
}

/// Two-column CSV.
pub fn write_xy_csv<W: Write>(
    x_name: &str,
    y_name: &str,
    points: &[(f64, f64)],
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "{x_name},{y_name}")?;
    for (x, y) in points {
        writeln!(w, "{x},{y}")?;
    }
    Ok(())
}

/// Confusion counts from leave-one-out classification, indexed
/// `[true][predicted]` with X = 0 and Y = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LooReport {
    pub confusion: [[usize; 2]; 2],
}

impl LooReport {
    pub fn correct(&self) -> usize {
        self.confusion[0][0] + self.confusion[1][1]
    }

    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total() as f64
    }
}

/// Classifies every sample from all the others. `classify` receives the
/// remaining X rows, Y rows and the held-out vector.
pub fn leave_one_out<F>(
    samples_x: &[Vec<f64>],
    samples_y: &[Vec<f64>],
    classify: F,
) -> Result<LooReport>
where
    F: Fn(&[Vec<f64>], &[Vec<f64>], &[f64]) -> Result<Population> + Sync + Send,
{
    if samples_x.len() < 2 || samples_y.len() < 2 {
        return Err(Error::SampleSize(format!(
            "leave-one-out needs at least two samples per class, got {} and {}",
            samples_x.len(),
            samples_y.len()
        )));
    }
    let m = samples_x.len();
    let predictions = parallel::map_indexed(m + samples_y.len(), |i| {
        let drop = |rows: &[Vec<f64>], skip: Option<usize>| -> Vec<Vec<f64>> {
            rows.iter()
                .enumerate()
                .filter(|(j, _)| Some(*j) != skip)
                .map(|(_, r)| r.clone())
                .collect()
        };
        let (held, xs, ys) = if i < m {
            (
                &samples_x[i],
                drop(samples_x, Some(i)),
                drop(samples_y, None),
            )
        } else {
            (
                &samples_y[i - m],
                drop(samples_x, None),
                drop(samples_y, Some(i - m)),
            )
        };
        classify(&xs, &ys, held)
    });
    let mut confusion = [[0usize; 2]; 2];
    for (i, pred) in predictions.into_iter().enumerate() {
        confusion[(i >= m) as usize][(pred? == Population::Y) as usize] += 1;
    }
    Ok(LooReport { confusion })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{Scenario, VarianceContrast};
    use crate::distributions::MarginalSpec;

    fn normal_design(p: usize, beta: f64, r: f64) -> Design {
        Scenario::independent(p, beta, r, MarginalSpec::STANDARD_NORMAL).into()
    }

    #[test]
    fn duplicate_and_empty_methods_rejected() {
        let prepared = normal_design(200, 0.5, 0.5).prepare().unwrap();
        let dup = [Method::robust(0.5), Method::robust(0.8)];
        assert!(matches!(
            run_trial(&prepared, &dup, Population::X, 1),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            run_trial(&prepared, &[], Population::X, 1),
            Err(Error::Argument(_))
        ));
        let both = [
            Method::robust(0.5),
            Method::Robust {
                rule: ZpRule::dependent(0.1),
                start: ScanStart::Median,
            },
        ];
        assert!(run_trial(&prepared, &both, Population::X, 1).is_ok());
    }

    #[test]
    fn trial_is_deterministic_and_theta_only_for_robust() {
        let prepared = normal_design(500, 0.5, 0.6).prepare().unwrap();
        let methods = [Method::robust(0.5), Method::StandardNn, Method::Extrema];
        let a = run_trial(&prepared, &methods, Population::Y, 42).unwrap();
        assert_eq!(
            a,
            run_trial(&prepared, &methods, Population::Y, 42).unwrap()
        );
        assert!(a[0].theta.is_some() && a[0].defaulted.is_some());
        assert!(a[1..]
            .iter()
            .all(|r| r.theta.is_none() && r.defaulted.is_none()));
        assert!(a
            .iter()
            .all(|r| r.seed == 42 && r.z_true_label == Population::Y));
    }

    #[test]
    fn methods_share_the_draw() {
        let prepared = normal_design(300, 0.5, 0.6).prepare().unwrap();
        let seed = trial_seed(9, 0, 3);
        let data = prepared.generate(Population::Y, &mut rng_from_seed(seed));
        let results = run_trial(
            &prepared,
            &[Method::StandardNn, Method::robust(0.5)],
            Population::Y,
            seed,
        )
        .unwrap();
        let nn = classify_nn_standard(&data.x_samples, &data.y_samples, &data.z).unwrap();
        assert_eq!(results[0].correct, nn == Population::Y);
        let robust = Method::robust(0.5).classify(&data).unwrap().0;
        assert_eq!(results[1].correct, robust == Population::Y);
    }

    #[test]
    fn variance_pathology_small() {
        let design = Design::VarianceContrast(VarianceContrast {
            p: 2000,
            m: 1,
            n: 1,
            sd_x: 1.0,
            sd_y: 3.0,
        });
        let prepared = design.prepare().unwrap();
        let res = run_trials(&prepared, &[Method::StandardNn], 40, 5, 0).unwrap();
        // a Y test vector still lands nearer the low-variance training vector
        for r in res.iter().filter(|r| r[0].z_true_label == Population::Y) {
            assert!(!r[0].correct);
        }
    }

    #[test]
    fn rates_and_se_are_binomial() {
        let prepared = normal_design(400, 0.5, 0.7).prepare().unwrap();
        let est =
            estimate_success_rate(&prepared, &[Method::robust(0.5), Method::StandardNn], 30, 3)
                .unwrap();
        for e in &est {
            assert_eq!(e.trials, 30);
            assert_eq!(e.rate, e.successes as f64 / 30.0);
            assert_eq!(e.se, (e.rate * (1.0 - e.rate) / 30.0).sqrt());
        }
        let two = estimate_success_rate(&prepared, &[Method::StandardNn], 2, 3).unwrap();
        assert!([0.0, 0.5, 1.0].contains(&two[0].rate));
        assert!(matches!(
            estimate_success_rate(&prepared, &[Method::StandardNn], 0, 3),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn trial_labels_alternate() {
        let prepared = normal_design(100, 0.5, 0.5).prepare().unwrap();
        let res = run_trials(&prepared, &[Method::Extrema], 6, 1, 2).unwrap();
        let labels: Vec<_> = res.iter().map(|r| r[0].z_true_label).collect();
        assert_eq!(
            labels,
            [
                Population::X,
                Population::Y,
                Population::X,
                Population::Y,
                Population::X,
                Population::Y
            ]
        );
    }

    #[test]
    fn dominance_ties_go_to_robust() {
        let methods = [Method::StandardNn, Method::robust(0.5)];
        let est = vec![
            RateEstimate::new("standard_nn", 8, 10),
            RateEstimate::new("robust", 8, 10),
        ];
        assert_eq!(dominant(&methods, &est), ("robust".to_string(), true));
        let est = vec![
            RateEstimate::new("standard_nn", 9, 10),
            RateEstimate::new("robust", 8, 10),
        ];
        assert_eq!(dominant(&methods, &est), ("standard_nn".to_string(), false));
    }

    #[test]
    fn sweep_single_cell_wraps_estimate() {
        let template = normal_design(300, 0.5, 0.5);
        let methods = [Method::robust(0.5), Method::StandardNn];
        let grid = sweep_beta_r(&[0.6], &[0.7], &template, &methods, 20, 11).unwrap();
        let direct = estimate_success_rate(
            &template.with_beta_r(0.6, 0.7).unwrap().prepare().unwrap(),
            &methods,
            20,
            11,
        )
        .unwrap();
        assert_eq!(grid.cells[0].estimates, direct);
        assert_eq!(
            grid,
            sweep_beta_r(&[0.6], &[0.7], &template, &methods, 20, 11).unwrap()
        );
    }

    #[test]
    fn sweep_skips_degenerate_cells_and_writes_csv() {
        // p = 2 with beta = 0.1 would shift every component
        let tiny = normal_design(2, 0.5, 0.5);
        let grid = sweep_beta_r(&[0.9, 0.1], &[0.5], &tiny, &[Method::StandardNn], 4, 1).unwrap();
        assert_eq!(grid.beta_axis, vec![0.1, 0.9]);
        assert!(grid.cells[0].skipped.is_some());
        assert!(grid.cells[1].skipped.is_none());
        let mut long = Vec::new();
        grid.write_long_csv(&mut long).unwrap();
        let long = String::from_utf8(long).unwrap();
        assert_eq!(long.lines().count(), 2);
        let mut dom = Vec::new();
        grid.write_dominance_csv(&mut dom).unwrap();
        let dom = String::from_utf8(dom).unwrap();
        assert_eq!(dom.lines().next().unwrap(), "beta,r=0.5");
        assert!(dom.contains("0.1,skipped"));
    }

    #[test]
    fn sweep_rejects_bad_axes() {
        let t = normal_design(100, 0.5, 0.5);
        assert!(sweep_beta_r(&[], &[0.5], &t, &[Method::StandardNn], 2, 0).is_err());
        assert!(sweep_beta_r(&[1.0], &[0.5], &t, &[Method::StandardNn], 2, 0).is_err());
    }

    #[test]
    fn histogram_point_mass_and_proportions() {
        let bins = histogram(&[0.3, 0.3, 0.3], 10, 4);
        assert_eq!(bins.len(), 1);
        assert_eq!(bins[0].proportion, 0.75);
        let bins = histogram(&[0.0, 0.5, 1.0, 1.0], 2, 4);
        assert_eq!(
            bins.iter().map(|b| b.proportion).collect::<Vec<_>>(),
            vec![0.25, 0.75]
        );
    }

    #[test]
    fn huge_c_defaults_everywhere() {
        let prepared = normal_design(400, 0.5, 0.5).prepare().unwrap();
        let h = threshold_distribution(
            &prepared,
            20,
            ZpRule::independent(1e6),
            ScanStart::Median,
            10,
            1,
        )
        .unwrap();
        assert_eq!(h.defaulted_fraction, 1.0);
        assert!(h.bins.is_empty());
    }

    #[test]
    fn threshold_curve_minus_infinity_matches_standard_nn() {
        let prepared = normal_design(400, 0.5, 0.7).prepare().unwrap();
        let curve = success_vs_threshold(&prepared, &[f64::NEG_INFINITY, 0.5], 40, 8).unwrap();
        assert_eq!(
            curve.points[0].truncated.successes,
            curve.standard_nn.successes
        );
        // every indicator is one, so T = 0 and every vector goes to X
        assert_eq!(curve.points[0].indicator.rate, 0.5);
    }

    #[test]
    fn c_curve_limit_is_default_classifier() {
        let prepared = normal_design(400, 0.5, 0.7).prepare().unwrap();
        let curve = success_vs_c(&prepared, &[0.5, 1e9], 30, ScanStart::Median, 4).unwrap();
        assert_eq!(curve.points[1].defaulted_fraction, 1.0);
        let fixed = map_trials(&prepared, 30, 4, 0, |_, _, d| {
            let t0 = ScanStart::Median.resolve(&d.x_samples, &d.y_samples);
            Ok(
                (classify_fixed_threshold(&d.x_samples, &d.y_samples, &d.z, t0)? == d.z_label)
                    as usize,
            )
        })
        .unwrap();
        assert_eq!(
            curve.points[1].robust.successes,
            fixed.iter().sum::<usize>()
        );
        // one scan reproduces direct selection
        let direct = estimate_success_rate(&prepared, &[Method::robust(0.5)], 30, 4).unwrap();
        assert_eq!(curve.points[0].robust.successes, direct[0].successes);
    }

    #[test]
    fn sample_size_first_row_matches_estimate() {
        let template = normal_design(300, 0.5, 0.7);
        let methods = [Method::robust(0.5)];
        let rows = sample_size_study(&template, &[(1, 1), (2, 3)], &methods, 10, 6).unwrap();
        let direct = estimate_success_rate(&template.prepare().unwrap(), &methods, 10, 6).unwrap();
        assert_eq!(rows[0].estimates, direct);
        assert_eq!((rows[1].m, rows[1].n), (2, 3));
        assert!(sample_size_study(&template, &[(0, 1)], &methods, 10, 6).is_err());
    }

    #[test]
    fn boundary_sign() {
        assert!(boundary_margin(0.6, 0.9) > 0.0);
        assert!(boundary_margin(0.9, 0.3) < 0.0);
    }

    #[test]
    fn loo_separable_and_identical() {
        let mut rng = rng_from_seed(3);
        let noise = MarginalSpec::STANDARD_NORMAL.sampler().unwrap();
        use rand_distr::Distribution;
        let mut rows = |mean: f64| -> Vec<Vec<f64>> {
            (0..4)
                .map(|_| (0..50).map(|_| mean + noise.sample(&mut rng)).collect())
                .collect()
        };
        let (x, y) = (rows(0.0), rows(100.0));
        let nn = leave_one_out(&x, &y, classify_nn_standard).unwrap();
        assert_eq!(nn.accuracy(), 1.0);
        let robust = leave_one_out(&x, &y, |a, b, z| {
            Ok(Method::robust(0.5).classify_rows(a, b, z)?.0)
        })
        .unwrap();
        assert_eq!(robust.accuracy(), 1.0);
        let same = vec![vec![1.0, 2.0]; 3];
        let tied = leave_one_out(&same, &same[..2], classify_nn_standard).unwrap();
        assert_eq!(tied.confusion, [[3, 0], [2, 0]]);
        assert!(tied.accuracy() <= 0.6);
        assert!(matches!(
            leave_one_out(&same[..1], &same, classify_nn_standard),
            Err(Error::SampleSize(_))
        ));
    }
}
