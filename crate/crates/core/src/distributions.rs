//! Parametric marginals: survival, inverse survival, sampling, and the scale
//! solver that calibrates shift magnitudes.
//!
//! The scale `a_p(r)` is the unique root of
//!
//! ```text
//!     Σ_k P(X^(k) > a_p) = p^(1 - r)
//! ```
//!
//! which, for identically distributed components, is the upper `p^(-r)`
//! quantile of the common marginal.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Normal, Pareto, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::{beta::beta_reg, erf::erfc, gamma::ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature;

/// A marginal law for one vector component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarginalSpec {
    Normal {
        mean: f64,
        sd: f64,
    },
    StudentT {
        df: f64,
    },
    /// Unit-rate exponential, `P(X > x) = e^{-x}` on `x ≥ 0`.
    Exponential,
    /// Exponential-power density `C_γ⁻¹ exp(-|x|^γ / γ)` with
    /// `C_γ = 2 Γ(1/γ) γ^{1/γ - 1}`.
    Subbotin {
        shape: f64,
    },
    /// `P(X > x) = x^{-γ}` for `x > 1`.
    Pareto {
        shape: f64,
    },
}

impl MarginalSpec {
    pub const STANDARD_NORMAL: MarginalSpec = MarginalSpec::Normal { mean: 0.0, sd: 1.0 };

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "{name} must be a positive finite number, got {v}"
                )))
            }
        };
        match *self {
            MarginalSpec::Normal { mean, sd } => {
                if !mean.is_finite() {
                    return Err(Error::Parameter(format!(
                        "normal mean must be finite, got {mean}"
                    )));
                }
                positive("normal sd", sd)
            }
            MarginalSpec::StudentT { df } => positive("student_t df", df),
            MarginalSpec::Exponential => Ok(()),
            MarginalSpec::Subbotin { shape } => positive("subbotin shape", shape),
            MarginalSpec::Pareto { shape } => positive("pareto shape", shape),
        }
    }

    /// `P(X > x)`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x.is_nan() {
            return Err(Error::Domain("survival evaluated at NaN".into()));
        }
        Ok(self.survival_unchecked(x))
    }

    pub(crate) fn survival_unchecked(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return 0.0;
        }
        if x == f64::NEG_INFINITY {
            return 1.0;
        }
        match *self {
            MarginalSpec::Normal { mean, sd } => {
                0.5 * erfc((x - mean) / (sd * std::f64::consts::SQRT_2))
            }
            MarginalSpec::StudentT { df } => {
                let upper = |x: f64| 0.5 * beta_reg(0.5 * df, 0.5, df / (df + x * x));
                if x >= 0.0 {
                    upper(x)
                } else {
                    1.0 - upper(-x)
                }
            }
            MarginalSpec::Exponential => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-x).exp()
                }
            }
            MarginalSpec::Subbotin { shape } => {
                if x >= 0.0 {
                    subbotin_upper(shape, x)
                } else {
                    1.0 - subbotin_upper(shape, -x)
                }
            }
            MarginalSpec::Pareto { shape } => {
                if x <= 1.0 {
                    1.0
                } else {
                    x.powf(-shape)
                }
            }
        }
    }

    /// The `x` with `P(X > x) = q`, for `0 < q < 1`.
    pub fn inverse_survival(&self, q: f64) -> Result<f64> {
        self.validate()?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!(
                "inverse survival needs 0 < q < 1, got {q}"
            )));
        }
        Ok(match *self {
            MarginalSpec::Exponential => -q.ln(),
            MarginalSpec::Pareto { shape } => q.powf(-1.0 / shape),
            MarginalSpec::Normal { mean, sd } => {
                mean + sd
                    * symmetric_inverse(q, |z| MarginalSpec::STANDARD_NORMAL.survival_unchecked(z))
            }
            MarginalSpec::StudentT { .. } | MarginalSpec::Subbotin { .. } => {
                symmetric_inverse(q, |x| self.survival_unchecked(x))
            }
        })
    }

    /// Density, used by tests and by the normalizer checks.
    pub fn density(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            MarginalSpec::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
            }
            MarginalSpec::StudentT { df } => {
                let ln_norm = ln_gamma(0.5 * (df + 1.0))
                    - ln_gamma(0.5 * df)
                    - 0.5 * (df * std::f64::consts::PI).ln();
                (ln_norm - 0.5 * (df + 1.0) * (1.0 + x * x / df).ln()).exp()
            }
            MarginalSpec::Exponential => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x).exp()
                }
            }
            MarginalSpec::Subbotin { shape } => {
                (-x.abs().powf(shape) / shape - subbotin_ln_normalizer(shape)).exp()
            }
            MarginalSpec::Pareto { shape } => {
                if x <= 1.0 {
                    0.0
                } else {
                    shape * x.powf(-shape - 1.0)
                }
            }
        })
    }

    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        let bad = |e: &dyn fmt::Display| Error::Parameter(e.to_string());
        Ok(match *self {
            MarginalSpec::Normal { mean, sd } => {
                Sampler::Normal(Normal::new(mean, sd).map_err(|e| bad(&e))?)
            }
            MarginalSpec::StudentT { df } => {
                Sampler::StudentT(StudentT::new(df).map_err(|e| bad(&e))?)
            }
            MarginalSpec::Exponential => Sampler::Exponential,
            MarginalSpec::Subbotin { shape } => Sampler::Subbotin {
                gamma: Gamma::new(1.0 / shape, 1.0).map_err(|e| bad(&e))?,
                shape,
            },
            MarginalSpec::Pareto { shape } => {
                Sampler::Pareto(Pareto::new(1.0, shape).map_err(|e| bad(&e))?)
            }
        })
    }

    /// True when every draw is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        matches!(
            self,
            MarginalSpec::Exponential | MarginalSpec::Pareto { .. }
        )
    }

    /// Ordering key for tail weight: larger means heavier upper tail.
    ///
    /// Polynomial tails (Student-t, Pareto) rank above every exponential-type
    /// tail; within a class a smaller index is heavier.
    pub fn tail_weight(&self) -> (u8, f64) {
        match *self {
            MarginalSpec::Normal { .. } => (0, -2.0),
            MarginalSpec::Subbotin { shape } => (0, -shape),
            MarginalSpec::Exponential => (0, -1.0),
            MarginalSpec::StudentT { df } => (1, -df),
            MarginalSpec::Pareto { shape } => (1, -shape),
        }
    }
}

fn subbotin_ln_normalizer(shape: f64) -> f64 {
    let a = 1.0 / shape;
    std::f64::consts::LN_2 + ln_gamma(a) + (a - 1.0) * shape.ln()
}

/// `P(X > x)` for the Subbotin law and `x ≥ 0`, by adaptive quadrature of the
/// density.
fn subbotin_upper(shape: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let a = 1.0 / shape;
    let y0 = x.powf(shape) / shape;
    if y0 <= 1.0 {
        // near the center: subtract the central mass on [0, x]
        let ln_c = subbotin_ln_normalizer(shape);
        let central = quadrature::integrate(
            |u: f64| (-u.powf(shape) / shape - ln_c).exp(),
            0.0,
            x,
            1e-16,
            1e-14,
        );
        return 0.5 - central;
    }
    // Tail: substitute w = u^γ/γ = y0 + v, which gives
    //   S(x) = e^{-y0} y0^{a-1} / (2 Γ(a)) ∫_0^∞ (1 + v/y0)^{a-1} e^{-v} dv.
    let integrand = |v: f64| ((a - 1.0) * (v / y0).ln_1p() - v).exp();
    let scale = (a - 1.0).abs().max(1.0);
    let tail = quadrature::integrate_to_infinity(integrand, 0.0, scale, 0.0, 1e-14);
    (-y0 + (a - 1.0) * y0.ln() - std::f64::consts::LN_2 - ln_gamma(a) + tail.ln()).exp()
}

/// Bisection for the upper `q` quantile of a law symmetric about zero.
fn symmetric_inverse<F: Fn(f64) -> f64>(q: f64, survival: F) -> f64 {
    if q == 0.5 {
        return 0.0;
    }
    if q > 0.5 {
        return -symmetric_inverse(1.0 - q, survival);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while survival(hi) >= q {
        lo = hi;
        hi *= 2.0;
    }
    bisect_decreasing(&survival, q, lo, hi).0
}

/// Finds `x ∈ [lo, hi]` with `f(x) ≈ target` for nonincreasing `f`, iterating
/// until the bracket cannot shrink in floating point.
fn bisect_decreasing<F: Fn(f64) -> f64>(
    f: &F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> (f64, u32) {
    let mut iterations = 0;
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi || iterations >= 2000 {
            break;
        }
        iterations += 1;
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if (f(lo) - target).abs() <= (f(hi) - target).abs() {
        lo
    } else {
        hi
    };
    (best, iterations)
}

pub fn survival(dist: &MarginalSpec, x: f64) -> Result<f64> {
    dist.survival(x)
}

pub fn inverse_survival(dist: &MarginalSpec, q: f64) -> Result<f64> {
    dist.inverse_survival(q)
}

/// Result of solving for the shift scale `a_p(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSolution {
    pub a_p: f64,
    pub r: f64,
    pub p: usize,
    /// `Σ_k P(X^(k) > a_p)` at the returned root.
    pub achieved_sum: f64,
    pub iterations: u32,
}

impl ScaleSolution {
    pub fn target(&self) -> f64 {
        (self.p as f64).powf(1.0 - self.r)
    }

    pub fn relative_residual(&self) -> f64 {
        (self.achieved_sum - self.target()).abs() / self.target()
    }
}

/// Solves `Σ_k P(X^(k) > a_p) = p^{1-r}` for a list of marginals with
/// multiplicities summing to `p`.
pub fn solve_scale(marginals: &[(MarginalSpec, usize)], p: usize, r: f64) -> Result<ScaleSolution> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!(
            "scale solver needs 0 < r < 1, got {r}"
        )));
    }
    if marginals.is_empty() {
        return Err(Error::Argument(
            "no marginals supplied to the scale solver".into(),
        ));
    }
    let total: usize = marginals.iter().map(|(_, k)| k).sum();
    if total != p {
        return Err(Error::Argument(format!(
            "marginal multiplicities sum to {total}, expected p = {p}"
        )));
    }
    for (d, _) in marginals {
        d.validate()?;
    }
    let q = (p as f64).powf(-r);
    let target = (p as f64).powf(1.0 - r);
    let sum_at = |a: f64| -> f64 {
        marginals
            .iter()
            .map(|(d, k)| *k as f64 * d.survival_unchecked(a))
            .sum()
    };

    let first = marginals[0].0;
    if marginals.iter().all(|(d, _)| *d == first) {
        let a_p = first.inverse_survival(q)?;
        return Ok(ScaleSolution {
            a_p,
            r,
            p,
            achieved_sum: sum_at(a_p),
            iterations: 0,
        });
    }

    // Each marginal's own p^{-r} quantile brackets the root: at the smallest
    // every term is ≥ p^{-r}, at the largest every term is ≤ p^{-r}.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (d, _) in marginals {
        let x = d.inverse_survival(q)?;
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let tol = 1e-10 * target;
    if sum_at(lo) < target - tol || sum_at(hi) > target + tol {
        return Err(Error::Solver(format!(
            "no sign change of the summed survival on [{lo}, {hi}] (target {target})"
        )));
    }
    let (a_p, iterations) = bisect_decreasing(&sum_at, target, lo, hi);
    let achieved_sum = sum_at(a_p);
    if (achieved_sum - target).abs() > 1e-8 * target {
        return Err(Error::Solver(format!(
            "bisection stalled at a = {a_p} with sum {achieved_sum}, target {target}"
        )));
    }
    Ok(ScaleSolution {
        a_p,
        r,
        p,
        achieved_sum,
        iterations,
    })
}

/// A ready-to-draw sampler for a validated [`MarginalSpec`].
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Normal(Normal<f64>),
    StudentT(StudentT<f64>),
    Exponential,
    Subbotin { gamma: Gamma<f64>, shape: f64 },
    Pareto(Pareto<f64>),
}

impl Distribution<f64> for Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Normal(d) => d.sample(rng),
            Sampler::StudentT(d) => d.sample(rng),
            Sampler::Exponential => Exp1.sample(rng),
            Sampler::Subbotin { gamma, shape } => {
                // |X|^γ / γ is Gamma(1/γ, 1)
                let magnitude = (shape * gamma.sample(rng)).powf(1.0 / shape);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            Sampler::Pareto(d) => d.sample(rng),
        }
    }
}

impl fmt::Display for MarginalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarginalSpec::Normal { mean, sd } => write!(f, "normal mean={mean} sd={sd}"),
            MarginalSpec::StudentT { df } => write!(f, "student_t df={df}"),
            MarginalSpec::Exponential => write!(f, "exponential"),
            MarginalSpec::Subbotin { shape } => write!(f, "subbotin shape={shape}"),
            MarginalSpec::Pareto { shape } => write!(f, "pareto shape={shape}"),
        }
    }
}

/// Parses `kind key=value ...`, e.g. `student_t df=4` or `Pareto Gamma=1`.
/// Kind and keys are case-insensitive.
impl FromStr for MarginalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind = parts
            .next()
            .ok_or_else(|| Error::Config("empty marginal specification".into()))?
            .to_ascii_lowercase();
        let mut params = Vec::new();
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::Config(format!("expected key=value in marginal spec, got `{part}`"))
            })?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("non-numeric value `{v}` for `{k}`")))?;
            params.push((k.to_ascii_lowercase(), v));
        }
        let take = |names: &[&str], default: Option<f64>| -> Result<f64> {
            params
                .iter()
                .find(|(k, _)| names.contains(&k.as_str()))
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| Error::Config(format!("marginal `{kind}` requires `{}`", names[0])))
        };
        let known: &[&str] = match kind.as_str() {
            "normal" | "gaussian" => &["mean", "sd"],
            "student_t" | "studentt" | "t" => &["df", "nu"],
            "exponential" | "exp" => &[],
            "subbotin" => &["shape", "gamma"],
            "pareto" => &["shape", "gamma"],
            other => return Err(Error::Config(format!("unknown marginal kind `{other}`"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "unknown parameter `{k}` for marginal `{kind}`"
            )));
        }
        let spec = match kind.as_str() {
            "normal" | "gaussian" => MarginalSpec::Normal {
                mean: take(&["mean"], Some(0.0))?,
                sd: take(&["sd"], Some(1.0))?,
            },
            "student_t" | "studentt" | "t" => MarginalSpec::StudentT {
                df: take(&["df", "nu"], None)?,
            },
            "exponential" | "exp" => MarginalSpec::Exponential,
            "subbotin" => MarginalSpec::Subbotin {
                shape: take(&["shape", "gamma"], None)?,
            },
            _ => MarginalSpec::Pareto {
                shape: take(&["shape", "gamma"], None)?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::gamma::gamma_ur;

    fn all_specs() -> Vec<MarginalSpec> {
        vec![
            MarginalSpec::STANDARD_NORMAL,
            MarginalSpec::Normal { mean: 1.5, sd: 0.3 },
            MarginalSpec::StudentT { df: 4.0 },
            MarginalSpec::StudentT { df: 1.0 },
            MarginalSpec::Exponential,
            MarginalSpec::Subbotin { shape: 0.5 },
            MarginalSpec::Subbotin { shape: 1.0 },
            MarginalSpec::Subbotin { shape: 2.0 },
            MarginalSpec::Subbotin { shape: 3.5 },
            MarginalSpec::Pareto { shape: 1.0 },
            MarginalSpec::Pareto { shape: 2.5 },
        ]
    }

    #[test]
    fn survival_examples() {
        assert_eq!(MarginalSpec::Exponential.survival(0.0).unwrap(), 1.0);
        assert_relative_eq!(
            MarginalSpec::Pareto { shape: 1.0 }.survival(100.0).unwrap(),
            0.01,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            MarginalSpec::StudentT { df: 4.0 }.survival(0.0).unwrap(),
            0.5,
            max_relative = 1e-15
        );
        assert_eq!(
            MarginalSpec::Pareto { shape: 2.0 }.survival(0.5).unwrap(),
            1.0
        );
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(matches!(
            MarginalSpec::StudentT { df: 0.0 }.survival(1.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            MarginalSpec::Subbotin { shape: -1.0 }.survival(1.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            MarginalSpec::Pareto { shape: 0.0 }.inverse_survival(0.5),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            MarginalSpec::Exponential.inverse_survival(0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            MarginalSpec::Exponential.inverse_survival(1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn inverse_survival_examples() {
        let q = 20000f64.powf(-0.4);
        let x = MarginalSpec::Exponential.inverse_survival(q).unwrap();
        assert_relative_eq!(x, 0.4 * 20000f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(x, 3.9613, epsilon = 1e-3);
        assert_relative_eq!(
            MarginalSpec::Pareto { shape: 1.0 }
                .inverse_survival(0.01)
                .unwrap(),
            100.0,
            max_relative = 1e-12
        );
        assert_eq!(
            MarginalSpec::STANDARD_NORMAL.inverse_survival(0.5).unwrap(),
            0.0
        );
    }

    #[test]
    fn round_trip_and_tolerance() {
        for d in all_specs() {
            for q in [1e-4, 1e-2, 0.1, 0.5, 0.9] {
                let x = d.inverse_survival(q).unwrap();
                let back = d.survival(x).unwrap();
                assert!(
                    (back - q).abs() <= 1e-10 * q,
                    "{d}: q={q} x={x} back={back}"
                );
            }
        }
    }

    #[test]
    fn survival_is_monotone() {
        for d in all_specs() {
            let mut prev = 1.0;
            for i in -80..=200 {
                let x = i as f64 * 0.1;
                let s = d.survival(x).unwrap();
                assert!((0.0..=1.0).contains(&s));
                assert!(s <= prev + 1e-15, "{d} not monotone at {x}");
                prev = s;
            }
        }
    }

    #[test]
    fn subbotin_matches_incomplete_gamma() {
        // S(x) = Q(1/γ, x^γ/γ) / 2 for x ≥ 0
        for shape in [0.3, 0.7, 1.0, 1.5, 2.0, 4.0] {
            let d = MarginalSpec::Subbotin { shape };
            for x in [0.05, 0.4, 1.0, 2.5, 6.0, 12.0] {
                let s = d.survival(x).unwrap();
                let oracle = 0.5 * gamma_ur(1.0 / shape, x.powf(shape) / shape);
                assert_relative_eq!(s, oracle, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn subbotin_two_is_standard_normal() {
        // C_2 = √(2π), so the γ = 2 density is exactly N(0, 1)
        let sub = MarginalSpec::Subbotin { shape: 2.0 };
        for x in [0.0, 1.0, 2.0] {
            let oracle = 0.5
                - quadrature::integrate(
                    |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
                    0.0,
                    x,
                    1e-15,
                    1e-14,
                );
            assert!((sub.survival(x).unwrap() - oracle).abs() < 1e-6);
            assert!((MarginalSpec::STANDARD_NORMAL.survival(x).unwrap() - oracle).abs() < 1e-6);
        }
    }

    #[test]
    fn subbotin_density_normalized() {
        for shape in [0.5, 1.0, 2.0, 3.0] {
            let d = MarginalSpec::Subbotin { shape };
            let half =
                quadrature::integrate_to_infinity(|x| d.density(x).unwrap(), 0.0, 1.0, 0.0, 1e-12);
            assert_relative_eq!(2.0 * half, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn solve_scale_examples() {
        let pareto = MarginalSpec::Pareto { shape: 1.0 };
        let s = solve_scale(&[(pareto, 10_000)], 10_000, 0.5).unwrap();
        assert_relative_eq!(s.a_p, 100.0, max_relative = 1e-12);

        let s = solve_scale(&[(MarginalSpec::Exponential, 20_000)], 20_000, 0.4).unwrap();
        assert_relative_eq!(s.a_p, 0.4 * 20000f64.ln(), max_relative = 1e-12);
        assert!(s.relative_residual() <= 1e-8);

        let s = solve_scale(&[(MarginalSpec::STANDARD_NORMAL, 100)], 100, 1e-9).unwrap();
        assert_relative_eq!(s.achieved_sum, 100.0, max_relative = 1e-7);
    }

    #[test]
    fn solve_scale_heterogeneous() {
        let parts = [
            (MarginalSpec::STANDARD_NORMAL, 300),
            (MarginalSpec::Exponential, 9_000),
            (MarginalSpec::StudentT { df: 4.0 }, 700),
        ];
        let s = solve_scale(&parts, 10_000, 0.6).unwrap();
        assert!(s.relative_residual() <= 1e-8, "{s:?}");
        assert!(s.iterations > 0);
    }

    #[test]
    fn solve_scale_matches_inverse_for_split_identical() {
        let t = MarginalSpec::StudentT { df: 4.0 };
        let s = solve_scale(&[(t, 500), (t, 1500)], 2000, 0.3).unwrap();
        let direct = t.inverse_survival(2000f64.powf(-0.3)).unwrap();
        assert_relative_eq!(s.a_p, direct, max_relative = 1e-8);
    }

    #[test]
    fn solve_scale_errors() {
        let n = MarginalSpec::STANDARD_NORMAL;
        assert!(matches!(
            solve_scale(&[(n, 10)], 10, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            solve_scale(&[(n, 10)], 10, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            solve_scale(&[(n, 9)], 10, 0.5),
            Err(Error::Argument(_))
        ));
        assert!(matches!(solve_scale(&[], 10, 0.5), Err(Error::Argument(_))));
    }

    #[test]
    fn scale_increases_with_r() {
        for d in all_specs() {
            let mut prev = f64::NEG_INFINITY;
            for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let a = solve_scale(&[(d, 5000)], 5000, r).unwrap().a_p;
                assert!(a > prev, "{d}: a_p not increasing at r={r}");
                prev = a;
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let d: MarginalSpec = "Student_T DF=4".parse().unwrap();
        assert_eq!(d, MarginalSpec::StudentT { df: 4.0 });
        assert_eq!(
            "normal".parse::<MarginalSpec>().unwrap(),
            MarginalSpec::STANDARD_NORMAL
        );
        for d in all_specs() {
            assert_eq!(d.to_string().parse::<MarginalSpec>().unwrap(), d);
        }
        assert!("cauchy".parse::<MarginalSpec>().is_err());
        assert!("student_t".parse::<MarginalSpec>().is_err());
        assert!("pareto shape=1 df=3".parse::<MarginalSpec>().is_err());
        assert!("student_t df=-1".parse::<MarginalSpec>().is_err());
    }

    #[test]
    fn tail_ordering() {
        let light = MarginalSpec::STANDARD_NORMAL.tail_weight();
        let exp = MarginalSpec::Exponential.tail_weight();
        let t4 = MarginalSpec::StudentT { df: 4.0 }.tail_weight();
        let t10 = MarginalSpec::StudentT { df: 10.0 }.tail_weight();
        assert!(light < exp && exp < t10 && t10 < t4);
    }
}
