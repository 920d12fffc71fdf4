//! Training and test vectors under sparse location-shift models.
//!
//! The base process `U` is drawn once per row. X rows are `U + ν`, Y rows are
//! an independent copy `U# + ν + μ`, where `μ` is nonzero (and equal to the
//! calibrated scale `a_p(r)`) on exactly `N_p = round(p^{1-β})` components.
//! Component indices are 0-based throughout.

use std::ops::Range;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::distributions::{solve_scale, MarginalSpec, Sampler, ScaleSolution};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed, SCALE_STREAM, STRUCTURE_STREAM};
use crate::Population;

/// Kernel coefficients below this are dropped from the exponentiated moving
/// average.
pub const KERNEL_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalBlock {
    pub spec: MarginalSpec,
    pub len: usize,
}

/// Per-component marginals: one law everywhere, or contiguous blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalLayout {
    Homogeneous(MarginalSpec),
    Blocks(Vec<MarginalBlock>),
}

impl MarginalLayout {
    /// Blocks as `(spec, index range)`, checked against `p`.
    pub fn blocks(&self, p: usize) -> Result<Vec<(MarginalSpec, Range<usize>)>> {
        match self {
            MarginalLayout::Homogeneous(spec) => {
                spec.validate()?;
                Ok(vec![(*spec, 0..p)])
            }
            MarginalLayout::Blocks(blocks) => {
                if blocks.is_empty() {
                    return Err(Error::Config("marginal block list is empty".into()));
                }
                let mut start = 0;
                let mut out = Vec::with_capacity(blocks.len());
                for b in blocks {
                    b.spec.validate()?;
                    out.push((b.spec, start..start + b.len));
                    start += b.len;
                }
                if start != p {
                    return Err(Error::Config(format!(
                        "marginal blocks cover {start} components, p = {p}"
                    )));
                }
                Ok(out)
            }
        }
    }

    pub fn homogeneous(&self) -> Option<MarginalSpec> {
        match self {
            MarginalLayout::Homogeneous(spec) => Some(*spec),
            MarginalLayout::Blocks(blocks) => {
                let first = blocks.first()?.spec;
                blocks.iter().all(|b| b.spec == first).then_some(first)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftPlacement {
    /// Uniform without replacement over all components.
    UniformRandom,
    /// The first `N_p` components.
    FirstIndices,
    /// Uniform within the block with the heaviest upper tail.
    HeavyBlock,
    /// Uniform within the block with the lightest upper tail.
    LightBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaKernel {
    /// `ω_j = lead · decay^j` for `j ≥ 1`, dropped once below [`KERNEL_CUTOFF`].
    Geometric { lead: f64, decay: f64 },
    /// `ω_1, ω_2, ...` given explicitly.
    Explicit(Vec<f64>),
}

impl MaKernel {
    pub fn coefficients(&self) -> Result<Vec<f64>> {
        let coeffs = match self {
            MaKernel::Geometric { lead, decay } => {
                if !(*decay > 0.0 && *decay < 1.0) || !(*lead > 0.0 && lead.is_finite()) {
                    return Err(Error::Config(format!(
                        "geometric kernel needs lead > 0 and 0 < decay < 1, got lead={lead} decay={decay}"
                    )));
                }
                let mut out = Vec::new();
                let mut w = lead * decay;
                while w >= KERNEL_CUTOFF {
                    out.push(w);
                    w *= decay;
                }
                out
            }
            MaKernel::Explicit(w) => w.clone(),
        };
        if coeffs.is_empty()
            || coeffs.iter().any(|w| !w.is_finite())
            || !coeffs.iter().any(|w| *w > 0.0)
        {
            return Err(Error::Config(
                "moving-average kernel needs finite coefficients, at least one positive".into(),
            ));
        }
        Ok(coeffs)
    }
}

/// Parameters of `U_k = Σ_j ω_j W_{j+k}^{α_k}` with offsets `ν_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMaParams {
    pub kernel: MaKernel,
    /// `α_k` is drawn uniformly from this range, once per `(structure_seed, p)`.
    pub alpha_range: (f64, f64),
    /// `ν_k` is drawn uniformly from `[-offset_bound, offset_bound]`; zero disables offsets.
    pub offset_bound: f64,
    /// Law of the nonnegative innovations `W_j`.
    pub innovation: MarginalSpec,
    pub structure_seed: u64,
}

impl ExpMaParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.alpha_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Config(format!(
                "alpha range must satisfy 0 < min ≤ max, got [{lo}, {hi}]"
            )));
        }
        if !(self.offset_bound >= 0.0 && self.offset_bound.is_finite()) {
            return Err(Error::Config(format!(
                "offset bound must be ≥ 0, got {}",
                self.offset_bound
            )));
        }
        self.innovation.validate()?;
        if !self.innovation.is_nonnegative() {
            return Err(Error::Config(format!(
                "exponentiated moving average needs a nonnegative innovation law, got `{}`",
                self.innovation
            )));
        }
        self.kernel.coefficients().map(|_| ())
    }

    /// `(α_k, ν_k)` for `k = 0..p`.
    pub fn structure(&self, p: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = rng_from_seed(derive_seed(self.structure_seed, STRUCTURE_STREAM, p as u64));
        let (lo, hi) = self.alpha_range;
        let alphas = (0..p)
            .map(|_| {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..=hi)
                }
            })
            .collect();
        let offsets = (0..p)
            .map(|_| {
                if self.offset_bound == 0.0 {
                    0.0
                } else {
                    rng.random_range(-self.offset_bound..=self.offset_bound)
                }
            })
            .collect();
        (alphas, offsets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceModel {
    Independent,
    /// `U_k = Σ_{j<w} weights[j] · N_{k+j}`.
    MovingAverage {
        weights: Vec<f64>,
    },
    /// `U_1 = N_0`, `U_{i+1} = α U_i + (1 - α) N_i`.
    Ar1 {
        alpha: f64,
    },
    ExponentiatedMa(ExpMaParams),
}

impl DependenceModel {
    pub fn equal_weight_ma(window: usize) -> Self {
        DependenceModel::MovingAverage {
            weights: vec![1.0 / window as f64; window],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DependenceModel::Independent => Ok(()),
            DependenceModel::MovingAverage { weights } => {
                if weights.is_empty()
                    || weights.iter().any(|w| !w.is_finite())
                    || weights.iter().all(|w| *w == 0.0)
                {
                    Err(Error::Config(
                        "moving-average weights must be finite and not all zero".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            DependenceModel::Ar1 { alpha } => {
                if (0.0..1.0).contains(alpha) {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "AR(1) alpha must lie in [0, 1), got {alpha}"
                    )))
                }
            }
            DependenceModel::ExponentiatedMa(params) => params.validate(),
        }
    }

    /// Innovations consumed to produce `p` components.
    pub fn innovations_needed(&self, p: usize) -> Result<usize> {
        Ok(match self {
            DependenceModel::Independent | DependenceModel::Ar1 { .. } => p,
            DependenceModel::MovingAverage { weights } => p + weights.len() - 1,
            DependenceModel::ExponentiatedMa(params) => p + params.kernel.coefficients()?.len(),
        })
    }
}

/// Maps an innovation sequence to the components `U_1..U_p` of one row.
///
/// For the exponentiated moving average, `innovations[i]` plays the role of
/// `W_{i+1}` and `α_k`, `ν_k` come from [`ExpMaParams::structure`]; offsets are
/// included in the output.
pub fn apply_dependence(
    model: &DependenceModel,
    innovations: &[f64],
    p: usize,
) -> Result<Vec<f64>> {
    model.validate()?;
    let needed = model.innovations_needed(p)?;
    if innovations.len() < needed {
        return Err(Error::Length {
            needed,
            got: innovations.len(),
        });
    }
    Ok(match model {
        DependenceModel::Independent => innovations[..p].to_vec(),
        DependenceModel::MovingAverage { weights } => (0..p)
            .map(|k| {
                weights
                    .iter()
                    .zip(&innovations[k..])
                    .map(|(w, x)| w * x)
                    .sum()
            })
            .collect(),
        DependenceModel::Ar1 { alpha } => {
            let mut out = Vec::with_capacity(p);
            let mut prev = innovations[0];
            out.push(prev);
            for &innov in &innovations[1..p] {
                prev = alpha * prev + (1.0 - alpha) * innov;
                out.push(prev);
            }
            out
        }
        DependenceModel::ExponentiatedMa(params) => {
            let coeffs = params.kernel.coefficients()?;
            let (alphas, offsets) = params.structure(p);
            exponentiated_ma(&coeffs, innovations, &alphas, &offsets)
        }
    })
}

fn exponentiated_ma(
    coeffs: &[f64],
    innovations: &[f64],
    alphas: &[f64],
    offsets: &[f64],
) -> Vec<f64> {
    alphas
        .iter()
        .zip(offsets)
        .enumerate()
        .map(|(k, (&alpha, &nu))| {
            let window = &innovations[k + 1..k + 1 + coeffs.len()];
            let u: f64 = if alpha == 1.0 {
                coeffs.iter().zip(window).map(|(w, x)| w * x).sum()
            } else {
                coeffs
                    .iter()
                    .zip(window)
                    .map(|(w, x)| w * x.powf(alpha))
                    .sum()
            };
            u + nu
        })
        .collect()
}

/// `N_p = round(p^{1-β})`, required to satisfy `1 ≤ N_p < p`.
pub fn shift_count(p: usize, beta: f64) -> Result<usize> {
    if p < 2 {
        return Err(Error::Degenerate(format!("dimension p = {p} is below 2")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "sparsity index beta must lie in (0, 1), got {beta}"
        )));
    }
    let count = (p as f64).powf(1.0 - beta).round() as usize;
    if count == 0 || count >= p {
        return Err(Error::Degenerate(format!(
            "round(p^(1-beta)) = {count} for p = {p}, beta = {beta}"
        )));
    }
    Ok(count)
}

/// Draws the shifted component set for a homogeneous layout.
pub fn place_shifts<R: Rng + ?Sized>(
    p: usize,
    beta: f64,
    placement: ShiftPlacement,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let count = shift_count(p, beta)?;
    Ok(place_in_range(count, 0..p, placement, rng))
}

fn place_in_range<R: Rng + ?Sized>(
    count: usize,
    range: Range<usize>,
    placement: ShiftPlacement,
    rng: &mut R,
) -> Vec<usize> {
    match placement {
        ShiftPlacement::FirstIndices => range.take(count).collect(),
        _ => {
            let mut picked: Vec<usize> = rand::seq::index::sample(rng, range.len(), count)
                .into_iter()
                .map(|i| range.start + i)
                .collect();
            picked.sort_unstable();
            picked
        }
    }
}

/// Full generative description of a sparse-shift experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub p: usize,
    pub m: usize,
    pub n: usize,
    pub beta: f64,
    pub r: f64,
    pub marginal: MarginalLayout,
    pub dependence: DependenceModel,
    pub shift_placement: ShiftPlacement,
    /// Seeds the structural draws (exponents, offsets, empirical scale), not the trials.
    pub seed: u64,
}

impl Scenario {
    pub fn independent(p: usize, beta: f64, r: f64, marginal: MarginalSpec) -> Self {
        Scenario {
            p,
            m: 1,
            n: 1,
            beta,
            r,
            marginal: MarginalLayout::Homogeneous(marginal),
            dependence: DependenceModel::Independent,
            shift_placement: ShiftPlacement::UniformRandom,
            seed: 0,
        }
    }

    pub fn prepare(&self) -> Result<PreparedScenario> {
        PreparedScenario::new(self)
    }
}

/// One draw of training data and a test vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedData {
    pub x_samples: Vec<Vec<f64>>,
    pub y_samples: Vec<Vec<f64>>,
    pub z: Vec<f64>,
    pub z_label: Population,
    pub shift_indices: Vec<usize>,
    /// Magnitude added at each shifted component.
    pub shift: f64,
}

#[derive(Debug, Clone)]
enum BaseProcess {
    Independent(Vec<(Sampler, Range<usize>)>),
    Linear {
        model: DependenceModel,
        innovation: Sampler,
    },
    ExpMa {
        coeffs: Vec<f64>,
        alphas: Vec<f64>,
        offsets: Vec<f64>,
        innovation: Sampler,
    },
}

impl BaseProcess {
    fn draw<R: Rng + ?Sized>(&self, p: usize, rng: &mut R) -> Vec<f64> {
        match self {
            BaseProcess::Independent(blocks) => {
                let mut out = Vec::with_capacity(p);
                for (sampler, range) in blocks {
                    out.extend(range.clone().map(|_| sampler.sample(rng)));
                }
                out
            }
            BaseProcess::Linear { model, innovation } => {
                let needed = model.innovations_needed(p).expect("validated model");
                let innov: Vec<f64> = (0..needed).map(|_| innovation.sample(rng)).collect();
                apply_dependence(model, &innov, p).expect("validated model")
            }
            BaseProcess::ExpMa {
                coeffs,
                alphas,
                offsets,
                innovation,
            } => {
                let innov: Vec<f64> = (0..p + coeffs.len())
                    .map(|_| innovation.sample(rng))
                    .collect();
                exponentiated_ma(coeffs, &innov, alphas, offsets)
            }
        }
    }
}

/// A validated scenario with its scale solved and samplers built; reusable
/// across trials.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    scenario: Scenario,
    base: BaseProcess,
    scale: ScaleSolution,
    shift_count: usize,
    placement_range: Range<usize>,
}

impl PreparedScenario {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let Scenario {
            p, m, n, beta, r, ..
        } = *scenario;
        if m == 0 || n == 0 {
            return Err(Error::Config(format!(
                "sample sizes must be ≥ 1, got m = {m}, n = {n}"
            )));
        }
        let shift_count = shift_count(p, beta)?;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("r must lie in (0, 1), got {r}")));
        }
        scenario.dependence.validate()?;
        let blocks = scenario.marginal.blocks(p)?;

        let placement_range = match scenario.shift_placement {
            ShiftPlacement::UniformRandom | ShiftPlacement::FirstIndices => 0..p,
            ShiftPlacement::HeavyBlock => pick_block(&blocks, |a, b| a > b),
            ShiftPlacement::LightBlock => pick_block(&blocks, |a, b| a < b),
        };
        if placement_range.len() < shift_count {
            return Err(Error::Config(format!(
                "placement block has {} components, cannot host {shift_count} shifts",
                placement_range.len()
            )));
        }

        let base = match &scenario.dependence {
            DependenceModel::Independent => BaseProcess::Independent(
                blocks
                    .iter()
                    .map(|(spec, range)| Ok((spec.sampler()?, range.clone())))
                    .collect::<Result<_>>()?,
            ),
            DependenceModel::MovingAverage { .. } | DependenceModel::Ar1 { .. } => {
                let spec = scenario.marginal.homogeneous().ok_or_else(|| {
                    Error::Config(
                        "linear dependence models need a single innovation marginal".into(),
                    )
                })?;
                BaseProcess::Linear {
                    model: scenario.dependence.clone(),
                    innovation: spec.sampler()?,
                }
            }
            DependenceModel::ExponentiatedMa(params) => {
                let (alphas, offsets) = params.structure(p);
                BaseProcess::ExpMa {
                    coeffs: params.kernel.coefficients()?,
                    alphas,
                    offsets,
                    innovation: params.innovation.sampler()?,
                }
            }
        };

        let scale = match analytic_marginals(scenario, &blocks) {
            Some(marginals) => solve_scale(&marginals, p, r)?,
            None => empirical_scale(&base, p, r, scenario.seed),
        };

        Ok(PreparedScenario {
            scenario: scenario.clone(),
            base,
            scale,
            shift_count,
            placement_range,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn scale(&self) -> &ScaleSolution {
        &self.scale
    }

    pub fn shift_count(&self) -> usize {
        self.shift_count
    }

    pub fn draw_shifts<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        place_in_range(
            self.shift_count,
            self.placement_range.clone(),
            self.scenario.shift_placement,
            rng,
        )
    }

    /// One unshifted draw of the base process (an X row).
    pub fn draw_base<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.base.draw(self.scenario.p, rng)
    }

    pub fn generate<R: Rng + ?Sized>(&self, z_from: Population, rng: &mut R) -> GeneratedData {
        let shift_indices = self.draw_shifts(rng);
        let shift = self.scale.a_p;
        let shifted_row = |rng: &mut R| {
            let mut row = self.draw_base(rng);
            for &k in &shift_indices {
                row[k] += shift;
            }
            row
        };
        let x_samples = (0..self.scenario.m).map(|_| self.draw_base(rng)).collect();
        let y_samples = (0..self.scenario.n).map(|_| shifted_row(rng)).collect();
        let z = match z_from {
            Population::X => self.draw_base(rng),
            Population::Y => shifted_row(rng),
        };
        GeneratedData {
            x_samples,
            y_samples,
            z,
            z_label: z_from,
            shift_indices,
            shift,
        }
    }
}

fn pick_block(
    blocks: &[(MarginalSpec, Range<usize>)],
    better: impl Fn((u8, f64), (u8, f64)) -> bool,
) -> Range<usize> {
    let mut best = &blocks[0];
    for b in &blocks[1..] {
        if better(b.0.tail_weight(), best.0.tail_weight()) {
            best = b;
        }
    }
    best.1.clone()
}

/// Exact component marginals of X when they are available in closed form.
fn analytic_marginals(
    scenario: &Scenario,
    blocks: &[(MarginalSpec, Range<usize>)],
) -> Option<Vec<(MarginalSpec, usize)>> {
    let p = scenario.p;
    match &scenario.dependence {
        DependenceModel::Independent => Some(blocks.iter().map(|(s, r)| (*s, r.len())).collect()),
        DependenceModel::MovingAverage { weights } => match scenario.marginal.homogeneous()? {
            MarginalSpec::Normal { mean, sd } => {
                let total: f64 = weights.iter().sum();
                let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
                Some(vec![(
                    MarginalSpec::Normal {
                        mean: mean * total,
                        sd: sd * norm,
                    },
                    p,
                )])
            }
            _ => None,
        },
        DependenceModel::Ar1 { alpha } => match scenario.marginal.homogeneous()? {
            MarginalSpec::Normal { mean, sd } => {
                let mut out: Vec<(MarginalSpec, usize)> = Vec::new();
                let mut var = sd * sd;
                for _ in 0..p {
                    let spec = MarginalSpec::Normal {
                        mean,
                        sd: var.sqrt(),
                    };
                    match out.last_mut() {
                        Some((last, count)) if *last == spec => *count += 1,
                        _ => out.push((spec, 1)),
                    }
                    var = alpha * alpha * var + (1.0 - alpha) * (1.0 - alpha) * sd * sd;
                }
                Some(out)
            }
            _ => None,
        },
        DependenceModel::ExponentiatedMa(_) => None,
    }
}

/// Monte Carlo solution of the scale equation from pooled draws of the base
/// process, for marginals without a closed form.
fn empirical_scale(base: &BaseProcess, p: usize, r: f64, seed: u64) -> ScaleSolution {
    let replicates = (200_000usize.div_ceil(p)).max(8);
    let mut rng = rng_from_seed(derive_seed(seed, SCALE_STREAM, p as u64));
    let mut pooled: Vec<f64> = (0..replicates)
        .flat_map(|_| base.draw(p, &mut rng))
        .collect();
    pooled.sort_unstable_by(|a, b| b.total_cmp(a));
    let target = (p as f64).powf(1.0 - r) * replicates as f64;
    let idx = (target.round() as usize).clamp(1, pooled.len() - 1);
    let a_p = 0.5 * (pooled[idx - 1] + pooled[idx]);
    let exceed = pooled.iter().take_while(|&&v| v > a_p).count();
    ScaleSolution {
        a_p,
        r,
        p,
        achieved_sum: exceed as f64 / replicates as f64,
        iterations: 0,
    }
}

pub fn generate<R: Rng + ?Sized>(
    scenario: &Scenario,
    z_from: Population,
    rng: &mut R,
) -> Result<GeneratedData> {
    Ok(scenario.prepare()?.generate(z_from, rng))
}

/// Which block of the light/heavy example receives the shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturb {
    HeavyBlock,
    LightBlock,
}

/// X has `round(p^{1-β})` standard normal components followed by unit
/// exponentials; Y adds `r · ln p` to that many components of one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedScenario {
    pub p: usize,
    pub m: usize,
    pub n: usize,
    pub beta: f64,
    pub r: f64,
    pub perturb: Perturb,
}

impl MixedScenario {
    pub fn normal_count(&self) -> Result<usize> {
        if self.p < 2 {
            return Err(Error::Degenerate(format!(
                "dimension p = {} is below 2",
                self.p
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Domain(format!(
                "beta must lie in (0, 1], got {}",
                self.beta
            )));
        }
        Ok(((self.p as f64).powf(1.0 - self.beta).round() as usize).max(1))
    }

    pub fn shift(&self) -> f64 {
        self.r * (self.p as f64).ln()
    }

    pub fn shift_indices(&self) -> Result<Vec<usize>> {
        let count = self.normal_count()?;
        if self.r < 0.0 || !self.r.is_finite() {
            return Err(Error::Domain(format!("r must be ≥ 0, got {}", self.r)));
        }
        match self.perturb {
            Perturb::LightBlock => Ok((0..count).collect()),
            Perturb::HeavyBlock => {
                if self.p < 2 * count {
                    return Err(Error::Config(format!(
                        "exponential block of {} components cannot host {count} shifts",
                        self.p - count
                    )));
                }
                Ok((count..2 * count).collect())
            }
        }
    }

    fn draw_base<R: Rng + ?Sized>(&self, normal_count: usize, rng: &mut R) -> Vec<f64> {
        let normal = MarginalSpec::STANDARD_NORMAL.sampler().expect("valid");
        (0..self.p)
            .map(|k| {
                if k < normal_count {
                    normal.sample(rng)
                } else {
                    rand_distr::Exp1.sample(rng)
                }
            })
            .collect()
    }

    pub fn generate<R: Rng + ?Sized>(
        &self,
        z_from: Population,
        rng: &mut R,
    ) -> Result<GeneratedData> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Config("sample sizes must be ≥ 1".into()));
        }
        let count = self.normal_count()?;
        let shift_indices = self.shift_indices()?;
        let shift = self.shift();
        let shifted = |rng: &mut R| {
            let mut row = self.draw_base(count, rng);
            for &k in &shift_indices {
                row[k] += shift;
            }
            row
        };
        let x_samples = (0..self.m).map(|_| self.draw_base(count, rng)).collect();
        let y_samples = (0..self.n).map(|_| shifted(rng)).collect();
        let z = match z_from {
            Population::X => self.draw_base(count, rng),
            Population::Y => shifted(rng),
        };
        Ok(GeneratedData {
            x_samples,
            y_samples,
            z,
            z_label: z_from,
            shift_indices,
            shift,
        })
    }
}

pub fn gen_mixed_light_heavy<R: Rng + ?Sized>(
    scenario: &MixedScenario,
    z_from: Population,
    rng: &mut R,
) -> Result<GeneratedData> {
    scenario.generate(z_from, rng)
}

/// Equal-mean i.i.d. normal populations that differ only in spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceContrast {
    pub p: usize,
    pub m: usize,
    pub n: usize,
    pub sd_x: f64,
    pub sd_y: f64,
}

impl VarianceContrast {
    pub fn generate<R: Rng + ?Sized>(
        &self,
        z_from: Population,
        rng: &mut R,
    ) -> Result<GeneratedData> {
        let nx = MarginalSpec::Normal {
            mean: 0.0,
            sd: self.sd_x,
        }
        .sampler()?;
        let ny = MarginalSpec::Normal {
            mean: 0.0,
            sd: self.sd_y,
        }
        .sampler()?;
        let row =
            |s: &Sampler, rng: &mut R| (0..self.p).map(|_| s.sample(rng)).collect::<Vec<f64>>();
        let x_samples = (0..self.m).map(|_| row(&nx, rng)).collect();
        let y_samples = (0..self.n).map(|_| row(&ny, rng)).collect();
        let z = match z_from {
            Population::X => row(&nx, rng),
            Population::Y => row(&ny, rng),
        };
        Ok(GeneratedData {
            x_samples,
            y_samples,
            z,
            z_label: z_from,
            shift_indices: Vec::new(),
            shift: 0.0,
        })
    }
}

/// Any of the supported generative designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case")]
pub enum Design {
    SparseShift(Scenario),
    MixedLightHeavy(MixedScenario),
    VarianceContrast(VarianceContrast),
}

impl From<Scenario> for Design {
    fn from(s: Scenario) -> Self {
        Design::SparseShift(s)
    }
}

impl Design {
    pub fn p(&self) -> usize {
        match self {
            Design::SparseShift(s) => s.p,
            Design::MixedLightHeavy(s) => s.p,
            Design::VarianceContrast(s) => s.p,
        }
    }

    /// Copy with `(β, r)` replaced, when the design has them.
    pub fn with_beta_r(&self, beta: f64, r: f64) -> Option<Design> {
        match self {
            Design::SparseShift(s) => Some(Design::SparseShift(Scenario {
                beta,
                r,
                ..s.clone()
            })),
            Design::MixedLightHeavy(s) => Some(Design::MixedLightHeavy(MixedScenario {
                beta,
                r,
                ..s.clone()
            })),
            Design::VarianceContrast(_) => None,
        }
    }

    pub fn with_sizes(&self, m: usize, n: usize) -> Design {
        match self {
            Design::SparseShift(s) => Design::SparseShift(Scenario { m, n, ..s.clone() }),
            Design::MixedLightHeavy(s) => {
                Design::MixedLightHeavy(MixedScenario { m, n, ..s.clone() })
            }
            Design::VarianceContrast(s) => {
                Design::VarianceContrast(VarianceContrast { m, n, ..s.clone() })
            }
        }
    }

    pub fn prepare(&self) -> Result<PreparedDesign> {
        Ok(match self {
            Design::SparseShift(s) => PreparedDesign::SparseShift(Box::new(s.prepare()?)),
            Design::MixedLightHeavy(s) => {
                s.shift_indices()?;
                PreparedDesign::MixedLightHeavy(s.clone())
            }
            Design::VarianceContrast(s) => {
                MarginalSpec::Normal {
                    mean: 0.0,
                    sd: s.sd_x,
                }
                .validate()?;
                MarginalSpec::Normal {
                    mean: 0.0,
                    sd: s.sd_y,
                }
                .validate()?;
                PreparedDesign::VarianceContrast(s.clone())
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum PreparedDesign {
    SparseShift(Box<PreparedScenario>),
    MixedLightHeavy(MixedScenario),
    VarianceContrast(VarianceContrast),
}

impl PreparedDesign {
    pub fn generate<R: Rng + ?Sized>(&self, z_from: Population, rng: &mut R) -> GeneratedData {
        match self {
            PreparedDesign::SparseShift(s) => s.generate(z_from, rng),
            PreparedDesign::MixedLightHeavy(s) => {
                s.generate(z_from, rng).expect("validated in prepare")
            }
            PreparedDesign::VarianceContrast(s) => {
                s.generate(z_from, rng).expect("validated in prepare")
            }
        }
    }

    /// The per-component shift magnitude (zero when populations differ otherwise).
    pub fn shift_amount(&self) -> f64 {
        match self {
            PreparedDesign::SparseShift(s) => s.scale().a_p,
            PreparedDesign::MixedLightHeavy(s) => s.shift(),
            PreparedDesign::VarianceContrast(_) => 0.0,
        }
    }

    pub fn p(&self) -> usize {
        match self {
            PreparedDesign::SparseShift(s) => s.scenario().p,
            PreparedDesign::MixedLightHeavy(s) => s.p,
            PreparedDesign::VarianceContrast(s) => s.p,
        }
    }

    pub fn sizes(&self) -> (usize, usize) {
        match self {
            PreparedDesign::SparseShift(s) => (s.scenario().m, s.scenario().n),
            PreparedDesign::MixedLightHeavy(s) => (s.m, s.n),
            PreparedDesign::VarianceContrast(s) => (s.m, s.n),
        }
    }
}
