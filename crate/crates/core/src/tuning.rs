//! Alternative threshold selectors: leave-one-out cross-validation over the
//! truncation point, and the a priori optimal threshold for single-sample
//! independent designs.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::classifier::compute_t_s;
use crate::datagen::{DependenceModel, Scenario, ShiftPlacement};
use crate::distributions::MarginalSpec;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::{parallel, Population};

fn check_cv_samples(samples_x: &[Vec<f64>], samples_y: &[Vec<f64>]) -> Result<usize> {
    if samples_x.len() < 2 || samples_y.len() < 2 {
        return Err(Error::SampleSize(format!(
            "cross-validation needs at least two samples per population, got m = {}, n = {}",
            samples_x.len(),
            samples_y.len()
        )));
    }
    let p = samples_x[0].len();
    if samples_x.iter().chain(samples_y).any(|r| r.len() != p) {
        return Err(Error::Shape("samples differ in length".into()));
    }
    if samples_x
        .iter()
        .chain(samples_y)
        .flatten()
        .any(|v| v.is_nan())
    {
        return Err(Error::Shape("data contain NaN".into()));
    }
    Ok(p)
}

/// Misclassification tally given a symmetric distance lookup over the
/// pooled vectors (X first).
fn cv_from_distances(m: usize, n: usize, dist: impl Fn(usize, usize) -> f64) -> f64 {
    let total = m + n;
    let mut errors = [0usize; 2];
    for a in 0..total {
        let own = if a < m { 0..m } else { m..total };
        let other = if a < m { m..total } else { 0..m };
        let within = own
            .filter(|&b| b != a)
            .map(|b| dist(a, b))
            .fold(f64::INFINITY, f64::min);
        let across = other.map(|b| dist(a, b)).fold(f64::INFINITY, f64::min);
        // exact ties are not errors
        if within > across {
            errors[(a >= m) as usize] += 1;
        }
    }
    errors[0] as f64 / m as f64 + errors[1] as f64 / n as f64
}

/// Leave-one-out error-rate estimate of the truncated nearest-neighbor rule,
/// `v' = v · 1(v > t)`. Lies in `[0, 2]`.
pub fn cv_error(t: f64, samples_x: &[Vec<f64>], samples_y: &[Vec<f64>]) -> Result<f64> {
    check_cv_samples(samples_x, samples_y)?;
    let truncated: Vec<Vec<f64>> = samples_x
        .iter()
        .chain(samples_y)
        .map(|r| r.iter().map(|&v| if v > t { v } else { 0.0 }).collect())
        .collect();
    let dist = |a: usize, b: usize| -> f64 {
        truncated[a]
            .iter()
            .zip(&truncated[b])
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    };
    Ok(cv_from_distances(samples_x.len(), samples_y.len(), dist))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCurve {
    /// `(t, CV(t))` over `−∞` and one point between each pair of consecutive
    /// distinct pooled training values.
    pub grid: Vec<(f64, f64)>,
    pub minimizers: Vec<f64>,
    pub theta_cv: f64,
}

/// Evaluates `CV(t)` on the whole breakpoint grid and returns its minimizers.
///
/// Pairwise distances are updated incrementally as components drop to zero;
/// a per-pair count of differing components keeps exact-zero distances exact.
pub fn select_threshold_cv(samples_x: &[Vec<f64>], samples_y: &[Vec<f64>]) -> Result<CvCurve> {
    check_cv_samples(samples_x, samples_y)?;
    let (m, n) = (samples_x.len(), samples_y.len());
    let rows: Vec<&[f64]> = samples_x
        .iter()
        .chain(samples_y)
        .map(|r| r.as_slice())
        .collect();
    let total = rows.len();
    let mut current: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut sq = vec![0.0f64; total * total];
    let mut differ = vec![0usize; total * total];
    for a in 0..total {
        for b in a + 1..total {
            let (mut d, mut c) = (0.0, 0);
            for (u, v) in rows[a].iter().zip(rows[b]) {
                let diff = u - v;
                d += diff * diff;
                c += (diff != 0.0) as usize;
            }
            sq[a * total + b] = d;
            sq[b * total + a] = d;
            differ[a * total + b] = c;
            differ[b * total + a] = c;
        }
    }
    let mut events: Vec<(f64, usize, usize)> = rows
        .iter()
        .enumerate()
        .flat_map(|(a, r)| r.iter().enumerate().map(move |(k, &v)| (v, a, k)))
        .collect();
    events.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));

    let evaluate = |sq: &[f64], differ: &[usize]| {
        cv_from_distances(m, n, |a, b| {
            if differ[a * total + b] == 0 {
                0.0
            } else {
                sq[a * total + b].max(0.0)
            }
        })
    };
    let mut grid = vec![(f64::NEG_INFINITY, evaluate(&sq, &differ))];
    let mut pos = 0;
    while pos < events.len() {
        let value = events[pos].0;
        while pos < events.len() && events[pos].0 == value {
            let (_, a, k) = events[pos];
            let old = current[a][k];
            for b in (0..total).filter(|&b| b != a) {
                let other = current[b][k];
                let delta = other * other - (old - other) * (old - other);
                sq[a * total + b] += delta;
                sq[b * total + a] += delta;
                let change = (other != 0.0) as isize - (old != other) as isize;
                let cell = (differ[a * total + b] as isize + change) as usize;
                differ[a * total + b] = cell;
                differ[b * total + a] = cell;
            }
            current[a][k] = 0.0;
            pos += 1;
        }
        if let Some(&(next, _, _)) = events.get(pos) {
            let mid = value + 0.5 * (next - value);
            let t = if mid >= next { value } else { mid };
            grid.push((t, evaluate(&sq, &differ)));
        }
    }

    let best = grid.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let minimizers: Vec<f64> = grid.iter().filter(|g| g.1 == best).map(|g| g.0).collect();
    let theta_cv = minimizers[0];
    Ok(CvCurve {
        grid,
        minimizers,
        theta_cv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AprioriMethodKind {
    NormalApprox,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AprioriMethod {
    /// Normal approximation to `T(t)` from exact per-component moments.
    NormalApprox,
    /// Direct simulation with balanced test labels.
    MonteCarlo { trials: usize, seed: u64 },
}

impl AprioriMethod {
    pub fn kind(&self) -> AprioriMethodKind {
        match self {
            AprioriMethod::NormalApprox => AprioriMethodKind::NormalApprox,
            AprioriMethod::MonteCarlo { .. } => AprioriMethodKind::MonteCarlo,
        }
    }
}

/// Success probability averaged over the two true labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub rate: f64,
    /// Binomial standard error, present for simulated estimates.
    pub se: Option<f64>,
}

fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Marginal and (unshifted, shifted) component counts for each block.
fn apriori_blocks(
    scenario: &Scenario,
    shift_count: usize,
) -> Result<Vec<(MarginalSpec, usize, usize)>> {
    if scenario.m != 1 || scenario.n != 1 {
        return Err(Error::Unsupported(format!(
            "a priori success needs m = n = 1, got m = {}, n = {}",
            scenario.m, scenario.n
        )));
    }
    if scenario.dependence != DependenceModel::Independent {
        return Err(Error::Unsupported(
            "a priori success needs independent components".into(),
        ));
    }
    let blocks = scenario.marginal.blocks(scenario.p)?;
    if let Some(spec) = scenario.marginal.homogeneous() {
        return Ok(vec![(spec, scenario.p - shift_count, shift_count)]);
    }
    // shifts land in one known block, or in the leading components
    let host =
        match scenario.shift_placement {
            ShiftPlacement::UniformRandom => return Err(Error::Unsupported(
                "a priori success with several marginal blocks needs a deterministic shift block"
                    .into(),
            )),
            ShiftPlacement::FirstIndices => None,
            ShiftPlacement::HeavyBlock | ShiftPlacement::LightBlock => {
                let prepared = scenario.prepare()?;
                let shifts = prepared.draw_shifts(&mut rng_from_seed(0));
                Some(shifts[0])
            }
        };
    let mut remaining = shift_count;
    Ok(blocks
        .into_iter()
        .map(|(spec, range)| {
            let shifted = match host {
                Some(k) if range.contains(&k) => shift_count,
                Some(_) => 0,
                None => {
                    let s = remaining.min(range.len());
                    remaining -= s;
                    s
                }
            };
            (spec, range.len() - shifted, shifted)
        })
        .collect())
}

/// Probability of a correct label for the fixed-threshold indicator rule.
pub fn apriori_success_rate(
    scenario: &Scenario,
    t: f64,
    method: AprioriMethod,
) -> Result<SuccessEstimate> {
    let prepared = scenario.prepare()?;
    let blocks = apriori_blocks(scenario, prepared.shift_count())?;
    let a_p = prepared.scale().a_p;
    match method {
        AprioriMethod::NormalApprox => {
            let mut correct = 0.0;
            for truth in [Population::X, Population::Y] {
                let (mut mean, mut var) = (0.0, 0.0);
                for &(spec, unshifted, shifted) in &blocks {
                    let q0 = spec.survival_unchecked(t);
                    let q1 = spec.survival_unchecked(t - a_p);
                    // D = (I − J)(1 − 2K) with independent Bernoulli I, J, K
                    let null_second = 2.0 * q0 - 2.0 * q0 * q0;
                    var += unshifted as f64 * null_second;
                    let q_test = if truth == Population::X { q0 } else { q1 };
                    let mu = (q0 - q1) * (1.0 - 2.0 * q_test);
                    let second = q0 + q1 - 2.0 * q0 * q1;
                    mean += shifted as f64 * mu;
                    var += shifted as f64 * (second - mu * mu).max(0.0);
                }
                // T is integer valued: P(T ≤ 0) = P(T < 1/2)
                let p_x = if var > 0.0 {
                    standard_normal_cdf((0.5 - mean) / var.sqrt())
                } else if mean <= 0.0 {
                    1.0
                } else {
                    0.0
                };
                correct += if truth == Population::X {
                    p_x
                } else {
                    1.0 - p_x
                };
            }
            Ok(SuccessEstimate {
                rate: 0.5 * correct,
                se: None,
            })
        }
        AprioriMethod::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::Argument(
                    "Monte Carlo needs at least one trial".into(),
                ));
            }
            let hits = parallel::map_indexed(trials, |i| {
                let truth = if i % 2 == 0 {
                    Population::X
                } else {
                    Population::Y
                };
                let mut rng = rng_from_seed(derive_seed(seed, 0, i as u64));
                let data = prepared.generate(truth, &mut rng);
                compute_t_s(&data.x_samples, &data.y_samples, &data.z, t)
                    .map(|s| s.label() == truth)
            });
            let mut successes = 0usize;
            for h in hits {
                successes += h? as usize;
            }
            let rate = successes as f64 / trials as f64;
            Ok(SuccessEstimate {
                rate,
                se: Some((rate * (1.0 - rate) / trials as f64).sqrt()),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriCurve {
    /// `(t, predicted success)`.
    pub grid: Vec<(f64, f64)>,
    pub t_star: f64,
    pub method: AprioriMethodKind,
}

impl AprioriCurve {
    pub fn best_rate(&self) -> f64 {
        self.grid
            .iter()
            .map(|g| g.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Maximizes the predicted success over `t_grid`; ties go to the smallest `t`.
pub fn apriori_optimal_threshold(
    scenario: &Scenario,
    t_grid: &[f64],
    method: AprioriMethod,
) -> Result<AprioriCurve> {
    if t_grid.is_empty() {
        return Err(Error::Argument(
            "a priori threshold search needs a nonempty grid".into(),
        ));
    }
    let mut sorted = t_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let grid = sorted
        .iter()
        .map(|&t| Ok((t, apriori_success_rate(scenario, t, method)?.rate)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = grid[0];
    for &g in &grid[1..] {
        if g.1 > best.1 {
            best = g;
        }
    }
    Ok(AprioriCurve {
        grid,
        t_star: best.0,
        method: method.kind(),
    })
}
