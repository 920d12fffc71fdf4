//! Experiment configuration: flat `key = value` pairs grouped in sections.
//!
//! Every key has a default (see [`DEFAULT_CONFIG`]); a file only lists what
//! it changes. Unknown sections or keys are rejected. Lists are
//! comma-separated and accept `start:step:end` ranges, inclusive at both
//! ends.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use robustnn::classifier::{ScanStart, ZpRule};
use robustnn::datagen::{
    DependenceModel, Design, ExpMaParams, MaKernel, MarginalBlock, MarginalLayout, MixedScenario,
    Perturb, Scenario, ShiftPlacement, VarianceContrast,
};
use robustnn::distributions::MarginalSpec;
use robustnn::experiments::Method;

pub const DEFAULT_CONFIG: &str = "\
# robustnn configuration defaults

[run]
seed = 1
# label of the generated test row: random, X or Y
z_from = random

[scenario]
# sparse_shift, mixed_light_heavy or variance_contrast
design = sparse_shift
p = 20000
m = 1
n = 1
beta = 0.7
r = 0.4
# normal mean=0 sd=1, student_t df=4, exponential, subbotin shape=1, pareto shape=1
marginal = student_t df=4
# optional blocks, e.g. `141 normal; 19859 exponential` (overrides marginal)
blocks =
# independent, ma, ar1 or exp_ma
dependence = independent
# ma: equal weights over a window, or explicit weights
ma_window = 5
ma_weights =
ar1_alpha = 0.5
exp_ma_lead = 1
exp_ma_decay = 0.5
exp_ma_alpha_min = 0.5
exp_ma_alpha_max = 1.5
exp_ma_offset_bound = 0
exp_ma_innovation = exponential
# uniform_random, first_indices, heavy_block or light_block
placement = uniform_random
structure_seed = 0
# mixed_light_heavy: heavy_block or light_block
perturb = heavy_block
# variance_contrast
sd_x = 1
sd_y = 3

[methods]
# any of robust, robust_dep, standard_nn, truncated_nn, fixed_threshold, extrema
list = robust, standard_nn
c = 0.5
xi = 0.1
# median or a number
start = median
t = 0

[sweep]
beta = 0.55:0.05:0.95
r = 0.1:0.1:0.9
trials = 400

[threshold_dist]
trials = 400
c = 0.55
bins = 20

[curves]
# multiples of the shift amount; -inf is allowed
proportions = -inf, 0:0.05:1.5
c = 0.1:0.1:1.2
trials = 200

[apriori]
proportions = 0:0.01:1.5
# normal_approx or monte_carlo
method = normal_approx
trials = 2000

[sample_size]
pairs = 1x1, 1x3, 3x1, 2x2
trials = 400
";

pub type Sections = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    sections: Sections,
}

fn parse_ini(text: &str) -> Result<Sections> {
    let ini = ini::Ini::load_from_str(text).map_err(|e| anyhow!("config syntax: {e}"))?;
    let mut out = Sections::new();
    for (section, props) in ini.iter() {
        let entry = out.entry(section.unwrap_or("").to_string()).or_default();
        for (k, v) in props.iter() {
            entry.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    out.retain(|k, v| !(k.is_empty() && v.is_empty()));
    Ok(out)
}

impl Default for Config {
    fn default() -> Self {
        Config {
            sections: parse_ini(DEFAULT_CONFIG).expect("defaults parse"),
        }
    }
}

impl Config {
    /// Defaults overlaid with `text`.
    pub fn from_str_overrides(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.overlay(parse_ini(text)?)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_str_overrides(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn from_sections(sections: Sections) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.overlay(sections)?;
        Ok(cfg)
    }

    fn overlay(&mut self, other: Sections) -> Result<()> {
        for (section, props) in other {
            let Some(target) = self.sections.get_mut(&section) else {
                bail!("unknown config section [{section}]");
            };
            for (k, v) in props {
                let Some(slot) = target.get_mut(&k) else {
                    bail!("unknown key `{k}` in [{section}]");
                };
                *slot = v;
            }
        }
        Ok(())
    }

    pub fn sections(&self) -> &Sections {
        &self.sections
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) -> Result<()> {
        let slot = self
            .sections
            .get_mut(section)
            .and_then(|s| s.get_mut(key))
            .ok_or_else(|| anyhow!("unknown key {section}.{key}"))?;
        *slot = value.into();
        Ok(())
    }

    pub fn raw(&self, section: &str, key: &str) -> &str {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|s| s.as_str())
            .unwrap_or_else(|| panic!("key {section}.{key} missing from defaults"))
    }

    pub fn get<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(section, key);
        raw.parse()
            .map_err(|e| anyhow!("{section}.{key} = `{raw}`: {e}"))
    }

    pub fn list(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        parse_list(self.raw(section, key)).with_context(|| format!("{section}.{key}"))
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("run", "seed")
    }

    /// The generative design described by `[scenario]`.
    pub fn design(&self) -> Result<Design> {
        let s = "scenario";
        let p: usize = self.get(s, "p")?;
        let m: usize = self.get(s, "m")?;
        let n: usize = self.get(s, "n")?;
        Ok(match self.raw(s, "design") {
            "sparse_shift" => Design::SparseShift(Scenario {
                p,
                m,
                n,
                beta: self.get(s, "beta")?,
                r: self.get(s, "r")?,
                marginal: self.layout()?,
                dependence: self.dependence()?,
                shift_placement: match self.raw(s, "placement") {
                    "uniform_random" => ShiftPlacement::UniformRandom,
                    "first_indices" => ShiftPlacement::FirstIndices,
                    "heavy_block" => ShiftPlacement::HeavyBlock,
                    "light_block" => ShiftPlacement::LightBlock,
                    other => bail!("scenario.placement: unknown value `{other}`"),
                },
                seed: self.get(s, "structure_seed")?,
            }),
            "mixed_light_heavy" => Design::MixedLightHeavy(MixedScenario {
                p,
                m,
                n,
                beta: self.get(s, "beta")?,
                r: self.get(s, "r")?,
                perturb: match self.raw(s, "perturb") {
                    "heavy_block" => Perturb::HeavyBlock,
                    "light_block" => Perturb::LightBlock,
                    other => bail!("scenario.perturb: unknown value `{other}`"),
                },
            }),
            "variance_contrast" => Design::VarianceContrast(VarianceContrast {
                p,
                m,
                n,
                sd_x: self.get(s, "sd_x")?,
                sd_y: self.get(s, "sd_y")?,
            }),
            other => bail!("scenario.design: unknown value `{other}`"),
        })
    }

    fn layout(&self) -> Result<MarginalLayout> {
        let blocks = self.raw("scenario", "blocks");
        if blocks.is_empty() {
            return Ok(MarginalLayout::Homogeneous(
                self.get("scenario", "marginal")?,
            ));
        }
        let parsed = blocks
            .split(';')
            .map(|part| {
                let part = part.trim();
                let (count, spec) = part
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| anyhow!("scenario.blocks: `{part}` is not `count spec`"))?;
                Ok(MarginalBlock {
                    len: count
                        .parse()
                        .with_context(|| format!("scenario.blocks: bad count `{count}`"))?,
                    spec: spec
                        .trim()
                        .parse()
                        .map_err(|e| anyhow!("scenario.blocks: {e}"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MarginalLayout::Blocks(parsed))
    }

    fn dependence(&self) -> Result<DependenceModel> {
        let s = "scenario";
        Ok(match self.raw(s, "dependence") {
            "independent" => DependenceModel::Independent,
            "ma" => {
                let weights = self.raw(s, "ma_weights");
                if weights.is_empty() {
                    let window: usize = self.get(s, "ma_window")?;
                    if window == 0 {
                        bail!("scenario.ma_window must be ≥ 1");
                    }
                    DependenceModel::equal_weight_ma(window)
                } else {
                    DependenceModel::MovingAverage {
                        weights: self.list(s, "ma_weights")?,
                    }
                }
            }
            "ar1" => DependenceModel::Ar1 {
                alpha: self.get(s, "ar1_alpha")?,
            },
            "exp_ma" => DependenceModel::ExponentiatedMa(ExpMaParams {
                kernel: MaKernel::Geometric {
                    lead: self.get(s, "exp_ma_lead")?,
                    decay: self.get(s, "exp_ma_decay")?,
                },
                alpha_range: (
                    self.get(s, "exp_ma_alpha_min")?,
                    self.get(s, "exp_ma_alpha_max")?,
                ),
                offset_bound: self.get(s, "exp_ma_offset_bound")?,
                innovation: self.get::<MarginalSpec>(s, "exp_ma_innovation")?,
                structure_seed: self.get(s, "structure_seed")?,
            }),
            other => bail!("scenario.dependence: unknown value `{other}`"),
        })
    }

    pub fn scan_start(&self) -> Result<ScanStart> {
        match self.raw("methods", "start") {
            "median" => Ok(ScanStart::Median),
            _ => Ok(ScanStart::Fixed(self.get("methods", "start")?)),
        }
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        let start = self.scan_start()?;
        self.raw("methods", "list")
            .split(',')
            .map(|id| {
                Ok(match id.trim() {
                    "robust" => Method::Robust {
                        rule: ZpRule::independent(self.get("methods", "c")?),
                        start,
                    },
                    "robust_dep" => Method::Robust {
                        rule: ZpRule::dependent(self.get("methods", "xi")?),
                        start,
                    },
                    "standard_nn" => Method::StandardNn,
                    "truncated_nn" => Method::TruncatedNn {
                        t: self.get("methods", "t")?,
                    },
                    "fixed_threshold" => Method::FixedThreshold {
                        t: self.get("methods", "t")?,
                    },
                    "extrema" => Method::Extrema,
                    other => bail!("methods.list: unknown method `{other}`"),
                })
            })
            .collect()
    }

    pub fn pairs(&self) -> Result<Vec<(usize, usize)>> {
        self.raw("sample_size", "pairs")
            .split(',')
            .map(|pair| {
                let (m, n) = pair
                    .trim()
                    .split_once('x')
                    .ok_or_else(|| anyhow!("sample_size.pairs: `{pair}` is not `MxN`"))?;
                Ok((m.trim().parse()?, n.trim().parse()?))
            })
            .collect()
    }

    /// The effective configuration as INI text.
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        for (section, props) in &self.sections {
            out.push_str(&format!("[{section}]\n"));
            for (k, v) in props {
                out.push_str(&format!("{k} = {v}\n"));
            }
            out.push('\n');
        }
        out
    }
}

fn parse_number(s: &str) -> Result<f64> {
    match s {
        "-inf" => Ok(f64::NEG_INFINITY),
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => s.parse().map_err(|_| anyhow!("`{s}` is not a number")),
    }
}

/// Comma-separated numbers and `start:step:end` ranges.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        match parts.as_slice() {
            [single] => out.push(parse_number(single)?),
            [a, step, b] => {
                let (a, step, b) = (parse_number(a)?, parse_number(step)?, parse_number(b)?);
                if step.is_nan() || step <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
                    bail!("range `{item}` needs finite start ≤ end and step > 0");
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                // multiply rather than accumulate, then trim representation noise
                out.extend((0..=count).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12));
            }
            _ => bail!("`{item}` is neither a number nor start:step:end"),
        }
    }
    if out.is_empty() {
        bail!("empty list");
    }
    Ok(out)
}
