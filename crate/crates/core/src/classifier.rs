//! Nearest-neighbor classifiers on raw, truncated and zero–one data.
//!
//! The robust classifier replaces every component `v` by `1(v > t)` and
//! compares the test vector's indicator pattern with its nearest indicator
//! neighbors in each training sample. With `I`, `J`, `K` the indicators of
//! the X neighbor, Y neighbor and test vector,
//!
//! ```text
//!     T(t)  = Σ_k (I_k − J_k)(1 − 2 K_k)        (label X iff T ≤ 0)
//!     S(t)² = Σ_k (I_k + J_k)
//! ```
//!
//! and the threshold `θ` is the smallest scanned `t ≥ t0` with
//! `|T(t)| / S(t) > z_p`. Both statistics are piecewise constant in `t`, so
//! the scan visits `t0` and then one point strictly between each pair of
//! consecutive distinct data values above `t0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Population;

/// Zero–one image of a vector at a threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorVector {
    pub bits: Vec<bool>,
    pub threshold_used: OrderedThreshold,
}

/// Threshold wrapper so indicator vectors can derive `Eq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderedThreshold(pub f64);

impl Eq for OrderedThreshold {}

/// `bits[k] = 1(v[k] > t)`.
pub fn indicator_transform(v: &[f64], t: f64) -> IndicatorVector {
    IndicatorVector {
        bits: v.iter().map(|&x| x > t).collect(),
        threshold_used: OrderedThreshold(t),
    }
}

/// `T(t)`, `S(t)²` and the neighbors that produced them (1-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdStatistics {
    pub t: f64,
    pub t_stat: i64,
    pub s_squared: u64,
    pub i_x: usize,
    pub i_y: usize,
}

impl ThresholdStatistics {
    /// `|T| / S`, undefined when `S = 0`.
    pub fn ratio(&self) -> Option<f64> {
        (self.s_squared > 0)
            .then(|| (self.t_stat.unsigned_abs() as f64) / (self.s_squared as f64).sqrt())
    }

    /// Whether the selection criterion `|T|/S > z_p` holds.
    pub fn exceeds(&self, z_p: f64) -> bool {
        self.ratio().is_some_and(|r| r > z_p)
    }

    pub fn label(&self) -> Population {
        if self.t_stat <= 0 {
            Population::X
        } else {
            Population::Y
        }
    }
}

/// Returns `p` after checking that every vector has the same length and no NaN.
pub(crate) fn check_shapes(train_x: &[Vec<f64>], train_y: &[Vec<f64>], z: &[f64]) -> Result<usize> {
    if train_x.is_empty() || train_y.is_empty() {
        return Err(Error::Shape(format!(
            "need at least one training vector per population, got m = {}, n = {}",
            train_x.len(),
            train_y.len()
        )));
    }
    let p = z.len();
    for (name, rows) in [("X", train_x), ("Y", train_y)] {
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Shape(format!(
                "{name} sample {} has length {}, test vector has {p}",
                i + 1,
                row.len()
            )));
        }
    }
    if train_x
        .iter()
        .chain(train_y)
        .any(|r| r.iter().any(|v| v.is_nan()))
        || z.iter().any(|v| v.is_nan())
    {
        return Err(Error::Shape("data contain NaN".into()));
    }
    Ok(p)
}

fn indicator_distance(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Index of the first minimum.
fn argmin<T: PartialOrd + Copy>(values: impl IntoIterator<Item = T>) -> usize {
    let mut best = 0;
    let mut best_val = None;
    for (i, v) in values.into_iter().enumerate() {
        if best_val.is_none_or(|b| v < b) {
            best = i;
            best_val = Some(v);
        }
    }
    best
}

/// Direct evaluation of `T(t)` and `S(t)²` from the indicator vectors.
pub fn compute_t_s(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    z: &[f64],
    t: f64,
) -> Result<ThresholdStatistics> {
    check_shapes(train_x, train_y, z)?;
    let k = indicator_transform(z, t).bits;
    let ix: Vec<Vec<bool>> = train_x
        .iter()
        .map(|x| indicator_transform(x, t).bits)
        .collect();
    let jy: Vec<Vec<bool>> = train_y
        .iter()
        .map(|y| indicator_transform(y, t).bits)
        .collect();
    let i_x = argmin(ix.iter().map(|i| indicator_distance(i, &k)));
    let i_y = argmin(jy.iter().map(|j| indicator_distance(j, &k)));
    let (i, j) = (&ix[i_x], &jy[i_y]);
    let mut t_stat = 0i64;
    let mut s_squared = 0u64;
    for ((&ik, &jk), &kk) in i.iter().zip(j).zip(&k) {
        let diff = ik as i64 - jk as i64;
        t_stat += diff * (1 - 2 * kk as i64);
        s_squared += ik as u64 + jk as u64;
    }
    Ok(ThresholdStatistics {
        t,
        t_stat,
        s_squared,
        i_x: i_x + 1,
        i_y: i_y + 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZpRuleKind {
    /// `z_p = ξ log p`, for dependent components.
    DependentLogP,
    /// `z_p = c (log p)^{1/2}`, for independent components.
    IndependentSqrtLogP,
}

/// Natural logarithms throughout.
pub fn zp_value(kind: ZpRuleKind, p: usize, xi_or_c: f64) -> f64 {
    zp_from_log_p(kind, (p as f64).ln(), xi_or_c)
}

pub fn zp_from_log_p(kind: ZpRuleKind, log_p: f64, xi_or_c: f64) -> f64 {
    match kind {
        ZpRuleKind::DependentLogP => xi_or_c * log_p,
        ZpRuleKind::IndependentSqrtLogP => xi_or_c * log_p.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZpRule {
    pub kind: ZpRuleKind,
    pub coefficient: f64,
}

impl ZpRule {
    pub fn independent(c: f64) -> Self {
        ZpRule {
            kind: ZpRuleKind::IndependentSqrtLogP,
            coefficient: c,
        }
    }

    pub fn dependent(xi: f64) -> Self {
        ZpRule {
            kind: ZpRuleKind::DependentLogP,
            coefficient: xi,
        }
    }

    pub fn value(&self, p: usize) -> f64 {
        zp_value(self.kind, p, self.coefficient)
    }
}

impl Default for ZpRule {
    fn default() -> Self {
        ZpRule::independent(0.5)
    }
}

/// Where the threshold scan starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScanStart {
    /// Median of the pooled training components.
    #[default]
    Median,
    Fixed(f64),
}

impl ScanStart {
    pub fn resolve(&self, train_x: &[Vec<f64>], train_y: &[Vec<f64>]) -> f64 {
        match *self {
            ScanStart::Median => median_t0(train_x, train_y),
            ScanStart::Fixed(t) => t,
        }
    }
}

/// Median of all training components pooled.
pub fn median_t0(train_x: &[Vec<f64>], train_y: &[Vec<f64>]) -> f64 {
    let mut pooled: Vec<f64> = train_x.iter().chain(train_y).flatten().copied().collect();
    if pooled.is_empty() {
        return 0.0;
    }
    let mid = pooled.len() / 2;
    let (_, upper, _) = pooled.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if pooled.len() % 2 == 1 {
        upper
    } else {
        let lower = pooled[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Selected threshold with the scan that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDecision {
    pub theta: f64,
    pub defaulted: bool,
    pub z_p: f64,
    pub rule: ZpRuleKind,
    pub xi_or_c: f64,
    pub t0: f64,
    /// Statistics at `theta`.
    pub at_theta: ThresholdStatistics,
    /// Scanned grid points up to and including `theta` (the whole scan when
    /// defaulted). Empty when tracing was disabled.
    pub trace: Vec<ThresholdStatistics>,
}

impl ThresholdDecision {
    pub fn label(&self) -> Population {
        self.at_theta.label()
    }

    /// Applies the selection rule to a precomputed scan (as produced by
    /// [`ThresholdScan`]) without storing a trace.
    pub fn from_scan(scan: &[ThresholdStatistics], rule: ZpRule, p: usize) -> Option<Self> {
        let first = *scan.first()?;
        let z_p = rule.value(p);
        let hit = scan.iter().find(|s| s.exceeds(z_p)).copied();
        Some(ThresholdDecision {
            theta: hit.map_or(first.t, |s| s.t),
            defaulted: hit.is_none(),
            z_p,
            rule: rule.kind,
            xi_or_c: rule.coefficient,
            t0: first.t,
            at_theta: hit.unwrap_or(first),
            trace: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    value: f64,
    /// Training vector index (X rows then Y rows), or `m + n` for the test vector.
    owner: u32,
    comp: u32,
}

/// Incremental sweep of `T(t)` and `S(t)²` over the breakpoint grid.
///
/// Yields the statistics at `t0` first, then at one point between each pair
/// of consecutive distinct component values above `t0`. Costs
/// `O(N log N + N (m + n))` for `N` pooled components instead of `O(N)` per
/// grid point.
pub struct ThresholdScan<'a> {
    rows: Vec<&'a [f64]>,
    m: usize,
    events: Vec<Event>,
    pos: usize,
    started: bool,
    t0: f64,
    count: Vec<i64>,
    both: Vec<i64>,
    test_on: Vec<bool>,
}

impl<'a> ThresholdScan<'a> {
    pub fn new(
        train_x: &'a [Vec<f64>],
        train_y: &'a [Vec<f64>],
        z: &'a [f64],
        t0: f64,
    ) -> Result<Self> {
        check_shapes(train_x, train_y, z)?;
        if t0.is_nan() {
            return Err(Error::Argument("scan start t0 is NaN".into()));
        }
        let rows: Vec<&[f64]> = train_x
            .iter()
            .chain(train_y)
            .map(|r| r.as_slice())
            .collect();
        let test_owner = rows.len() as u32;
        let test_on: Vec<bool> = z.iter().map(|&v| v > t0).collect();
        let mut count = Vec::with_capacity(rows.len());
        let mut both = Vec::with_capacity(rows.len());
        let mut events = Vec::new();
        for (owner, row) in rows.iter().enumerate() {
            let mut c = 0;
            let mut b = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > t0 {
                    c += 1;
                    b += test_on[k] as i64;
                    events.push(Event {
                        value: v,
                        owner: owner as u32,
                        comp: k as u32,
                    });
                }
            }
            count.push(c);
            both.push(b);
        }
        for (k, &v) in z.iter().enumerate() {
            if v > t0 {
                events.push(Event {
                    value: v,
                    owner: test_owner,
                    comp: k as u32,
                });
            }
        }
        // test-vector events first within a tie so `both` is decremented once
        events.sort_unstable_by(|a, b| a.value.total_cmp(&b.value).then(b.owner.cmp(&a.owner)));
        Ok(ThresholdScan {
            rows,
            m: train_x.len(),
            events,
            pos: 0,
            started: false,
            t0,
            count,
            both,
            test_on,
        })
    }

    fn statistics(&self, t: f64) -> ThresholdStatistics {
        let score = |v: usize| self.count[v] - 2 * self.both[v];
        let i_x = argmin((0..self.m).map(score));
        let i_y = argmin((self.m..self.rows.len()).map(score));
        let (vx, vy) = (i_x, self.m + i_y);
        ThresholdStatistics {
            t,
            t_stat: score(vx) - score(vy),
            s_squared: (self.count[vx] + self.count[vy]) as u64,
            i_x: i_x + 1,
            i_y: i_y + 1,
        }
    }

    fn pass_value(&mut self, value: f64) {
        let test_owner = self.rows.len() as u32;
        while let Some(&e) = self.events.get(self.pos) {
            if e.value != value {
                break;
            }
            let k = e.comp as usize;
            if e.owner == test_owner {
                self.test_on[k] = false;
                for (v, row) in self.rows.iter().enumerate() {
                    if row[k] >= value {
                        self.both[v] -= 1;
                    }
                }
            } else {
                let v = e.owner as usize;
                self.count[v] -= 1;
                if self.test_on[k] {
                    self.both[v] -= 1;
                }
            }
            self.pos += 1;
        }
    }
}

/// A point strictly inside `(lo, hi]` whose indicator state equals that just above `lo`.
fn between(lo: f64, hi: f64) -> f64 {
    let mid = lo + 0.5 * (hi - lo);
    if mid >= hi || !mid.is_finite() {
        lo
    } else {
        mid
    }
}

impl Iterator for ThresholdScan<'_> {
    type Item = ThresholdStatistics;

    fn next(&mut self) -> Option<ThresholdStatistics> {
        if !self.started {
            self.started = true;
            return Some(self.statistics(self.t0));
        }
        let value = self.events.get(self.pos)?.value;
        self.pass_value(value);
        let next = self.events.get(self.pos)?.value;
        Some(self.statistics(between(value, next)))
    }
}

/// Scans from `t0` and returns the first grid point where `|T|/S > z_p`,
/// defaulting to `t0` when none qualifies.
pub fn select_threshold(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    z: &[f64],
    rule: ZpRule,
    t0: f64,
) -> Result<ThresholdDecision> {
    select_threshold_with(train_x, train_y, z, rule, t0, true)
}

pub(crate) fn select_threshold_with(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    z: &[f64],
    rule: ZpRule,
    t0: f64,
    keep_trace: bool,
) -> Result<ThresholdDecision> {
    if rule.coefficient.is_nan() || rule.coefficient < 0.0 {
        return Err(Error::Argument(format!(
            "z_p coefficient must be ≥ 0, got {}",
            rule.coefficient
        )));
    }
    let p = z.len();
    let z_p = rule.value(p.max(2));
    let mut scan = ThresholdScan::new(train_x, train_y, z, t0)?;
    let first = scan.next().expect("scan yields t0");
    let mut trace = Vec::new();
    let mut hit = None;
    for s in std::iter::once(first).chain(scan) {
        if keep_trace {
            trace.push(s);
        }
        if s.exceeds(z_p) {
            hit = Some(s);
            break;
        }
    }
    Ok(ThresholdDecision {
        theta: hit.map_or(t0, |s| s.t),
        defaulted: hit.is_none(),
        z_p,
        rule: rule.kind,
        xi_or_c: rule.coefficient,
        t0,
        at_theta: hit.unwrap_or(first),
        trace,
    })
}

/// The thresholded zero–one classifier: X iff `T(θ) ≤ 0`.
pub fn classify_robust(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    z: &[f64],
    rule: ZpRule,
    t0: f64,
) -> Result<(Population, ThresholdDecision)> {
    let decision = select_threshold(train_x, train_y, z, rule, t0)?;
    Ok((decision.label(), decision))
}

/// Indicator nearest-neighbor rule at a fixed threshold.
pub fn classify_fixed_threshold(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    z: &[f64],
    t: f64,
) -> Result<Population> {
    Ok(compute_t_s(train_x, train_y, z, t)?.label())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_label<F: Fn(&[f64]) -> f64>(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    dist: F,
) -> Population {
    let dx = train_x
        .iter()
        .map(|x| dist(x))
        .fold(f64::INFINITY, f64::min);
    let dy = train_y
        .iter()
        .map(|y| dist(y))
        .fold(f64::INFINITY, f64::min);
    if dx <= dy {
        Population::X
    } else {
        Population::Y
    }
}

/// Plain nearest neighbor in squared Euclidean distance; ties go to X.
pub fn classify_nn_standard(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    z: &[f64],
) -> Result<Population> {
    check_shapes(train_x, train_y, z)?;
    Ok(nearest_label(train_x, train_y, |v| squared_distance(v, z)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationMode {
    /// Compare `Σ (X' − Z')²` with `Σ (Y' − Z')²`, `v' = v · 1(v > t)`.
    ZeroedValues,
    /// Standard nearest neighbor on the truncated vectors.
    TruncatedStandard,
}

/// Nearest neighbor after zeroing every component not above `t`.
///
/// Both modes describe the same rule and share one implementation.
pub fn classify_nn_truncated(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    z: &[f64],
    t: f64,
    mode: TruncationMode,
) -> Result<Population> {
    check_shapes(train_x, train_y, z)?;
    if t.is_nan() {
        return Err(Error::Argument("truncation point is NaN".into()));
    }
    let _ = mode;
    let trunc = |v: f64| if v > t { v } else { 0.0 };
    Ok(nearest_label(train_x, train_y, |v| {
        v.iter()
            .zip(z)
            .map(|(&a, &b)| (trunc(a) - trunc(b)).powi(2))
            .sum()
    }))
}

/// Assigns `z` to the population whose largest training component is closest
/// to `max_k z[k]`; ties go to X.
pub fn classify_extrema(
    train_x: &[Vec<f64>],
    train_y: &[Vec<f64>],
    z: &[f64],
) -> Result<Population> {
    check_shapes(train_x, train_y, z)?;
    let max_of = |rows: &[Vec<f64>]| {
        rows.iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (mx, my) = (max_of(train_x), max_of(train_y));
    let mz = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if (mz - mx).abs() <= (mz - my).abs() {
        Population::X
    } else {
        Population::Y
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn indicator_examples() {
        assert_eq!(
            indicator_transform(&[-1.0, 0.0, 2.0], 0.0).bits,
            vec![false, false, true]
        );
        assert!(indicator_transform(&[-1e300, 0.0, 2.0], f64::NEG_INFINITY)
            .bits
            .iter()
            .all(|&b| b));
        assert_eq!(
            indicator_transform(&[5.0, 5.0], 5.0).bits,
            vec![false, false]
        );
    }

    #[test]
    fn t_s_hand_example() {
        let s = compute_t_s(&v(&[&[10.0, 10.0]]), &v(&[&[0.0, 0.0]]), &[10.0, 10.0], 5.0).unwrap();
        assert_eq!((s.t_stat, s.s_squared, s.i_x, s.i_y), (-2, 2, 1, 1));
        assert_eq!(s.label(), Population::X);
    }

    #[test]
    fn identical_training_gives_zero_t() {
        let x = v(&[&[1.0, 3.0, -2.0]]);
        for t in [-5.0, 0.0, 1.5, 2.5, 10.0] {
            assert_eq!(compute_t_s(&x, &x, &[0.5, 4.0, 1.0], t).unwrap().t_stat, 0);
        }
    }

    #[test]
    fn threshold_above_data() {
        let s = compute_t_s(&v(&[&[1.0, 2.0]]), &v(&[&[3.0, 4.0]]), &[0.0, 9.0], 100.0).unwrap();
        assert_eq!((s.t_stat, s.s_squared), (0, 0));
        assert_eq!(s.ratio(), None);
    }

    #[test]
    fn shape_errors() {
        let x = v(&[&[1.0, 2.0]]);
        assert!(matches!(
            compute_t_s(&x, &v(&[&[1.0]]), &[0.0, 0.0], 0.0),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            classify_nn_standard(&x, &[], &[0.0, 0.0]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            classify_extrema(&x, &x, &[0.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn zp_examples() {
        assert!((zp_value(ZpRuleKind::IndependentSqrtLogP, 3226, 0.5) - 1.42118).abs() < 1e-4);
        assert_eq!(zp_from_log_p(ZpRuleKind::DependentLogP, 2.0, 1.0), 2.0);
        assert_eq!(zp_value(ZpRuleKind::DependentLogP, 7, 1.0), 7f64.ln());
        for p in [3usize, 100, 20_000] {
            assert!(
                zp_value(ZpRuleKind::DependentLogP, p, 0.7)
                    >= zp_value(ZpRuleKind::IndependentSqrtLogP, p, 0.7)
            );
        }
    }

    #[test]
    fn select_threshold_hand_trace() {
        let (x, y, z) = (v(&[&[10.0, 10.0]]), v(&[&[0.0, 0.0]]), [10.0, 10.0]);
        // z_p = c √(ln 2) < √2
        let d = select_threshold(&x, &y, &z, ZpRule::independent(1.0), -1.0).unwrap();
        assert!(!d.defaulted);
        assert!(d.theta > 0.0 && d.theta < 10.0);
        assert_eq!(d.trace.len(), 2);
        assert_eq!(d.trace[0].t_stat, 0);
        assert_eq!(d.at_theta.t_stat, -2);
        assert!((d.at_theta.ratio().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn select_threshold_zero_zp_picks_first_nonzero() {
        let (x, y, z) = (
            v(&[&[1.0, 4.0, 2.0]]),
            v(&[&[3.0, 5.0, 0.0]]),
            [0.5, 4.5, 2.5],
        );
        let d = select_threshold(&x, &y, &z, ZpRule::independent(0.0), -10.0).unwrap();
        let first = d
            .trace
            .iter()
            .position(|s| s.t_stat != 0 && s.s_squared > 0)
            .unwrap();
        assert_eq!(d.trace.len(), first + 1);
        assert!(!d.defaulted);
    }

    #[test]
    fn identical_training_defaults() {
        let x = v(&[&[1.0, 2.0, 3.0]]);
        let d = select_threshold(&x, &x, &[2.0, 2.0, 2.0], ZpRule::independent(0.0), 0.0).unwrap();
        assert!(d.defaulted);
        assert_eq!(d.theta, 0.0);
        assert_eq!(d.label(), Population::X);
    }

    #[test]
    fn robust_labels() {
        let (a, b) = (v(&[&[10.0, 10.0]]), v(&[&[0.0, 0.0]]));
        let z = [10.0, 10.0];
        assert_eq!(
            classify_robust(&a, &b, &z, ZpRule::independent(0.5), -1.0)
                .unwrap()
                .0,
            Population::X
        );
        let (lab, d) = classify_robust(&b, &a, &z, ZpRule::independent(0.5), -1.0).unwrap();
        assert_eq!(lab, Population::Y);
        assert_eq!(d.at_theta.t_stat, 2);
    }

    #[test]
    fn standard_nn_examples() {
        assert_eq!(
            classify_nn_standard(&v(&[&[0.0]]), &v(&[&[2.0]]), &[1.0]).unwrap(),
            Population::X
        );
        assert_eq!(
            classify_nn_standard(&v(&[&[5.0, 1.0]]), &v(&[&[0.0, 0.0]]), &[5.0, 1.0]).unwrap(),
            Population::X
        );
        assert_eq!(
            classify_nn_standard(&v(&[&[5.0, 1.0]]), &v(&[&[0.0, 0.0]]), &[0.1, 0.0]).unwrap(),
            Population::Y
        );
    }

    #[test]
    fn truncated_examples() {
        let (x, y, z) = (v(&[&[10.0, -5.0]]), v(&[&[0.0, -5.0]]), [9.0, 100.0]);
        assert_eq!(
            classify_nn_truncated(&x, &y, &z, 5.0, TruncationMode::ZeroedValues).unwrap(),
            Population::X
        );
        let above =
            classify_nn_truncated(&y, &x, &z, 1e9, TruncationMode::TruncatedStandard).unwrap();
        assert_eq!(above, Population::X);
    }

    #[test]
    fn extrema_examples() {
        assert_eq!(
            classify_extrema(&v(&[&[5.0, 1.0]]), &v(&[&[20.0, 0.0]]), &[19.0, 0.0]).unwrap(),
            Population::Y
        );
        assert_eq!(
            classify_extrema(&v(&[&[7.0]]), &v(&[&[7.0]]), &[100.0]).unwrap(),
            Population::X
        );
    }

    #[test]
    fn median_start() {
        assert_eq!(median_t0(&v(&[&[1.0, 5.0]]), &v(&[&[3.0]])), 3.0);
        assert_eq!(median_t0(&v(&[&[1.0, 5.0]]), &v(&[&[3.0, 4.0]])), 3.5);
    }

    fn small_instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>)> {
        (1usize..=20, 1usize..=3, 1usize..=3).prop_flat_map(|(p, m, n)| {
            let row = proptest::collection::vec((-4i32..=6).prop_map(f64::from), p);
            (
                proptest::collection::vec(row.clone(), m),
                proptest::collection::vec(row.clone(), n),
                row,
            )
        })
    }

    fn brute_force_label(x: &[Vec<f64>], y: &[Vec<f64>], z: &[f64], t: f64) -> Population {
        let k = indicator_transform(z, t).bits;
        let dx = x
            .iter()
            .map(|r| indicator_distance(&indicator_transform(r, t).bits, &k))
            .min()
            .unwrap();
        let dy = y
            .iter()
            .map(|r| indicator_distance(&indicator_transform(r, t).bits, &k))
            .min()
            .unwrap();
        if dx <= dy {
            Population::X
        } else {
            Population::Y
        }
    }

    proptest! {
        #[test]
        fn scan_matches_direct_evaluation((x, y, z) in small_instance(), t0 in -5i32..=3) {
            let t0 = t0 as f64 - 0.25;
            for s in ThresholdScan::new(&x, &y, &z, t0).unwrap() {
                let direct = compute_t_s(&x, &y, &z, s.t).unwrap();
                prop_assert_eq!(s, direct);
                prop_assert!(s.t_stat.unsigned_abs() <= s.s_squared);
                prop_assert!(s.s_squared as usize <= 2 * z.len());
                prop_assert_eq!(s.label(), brute_force_label(&x, &y, &z, s.t));
            }
        }

        #[test]
        fn single_pair_s_squared_nonincreasing((x, y, z) in small_instance()) {
            let (x, y) = (&x[..1], &y[..1]);
            let scan: Vec<_> = ThresholdScan::new(x, y, &z, -10.0).unwrap().collect();
            prop_assert!(scan.windows(2).all(|w| w[1].s_squared <= w[0].s_squared));
        }

        #[test]
        fn monotone_transform_invariance((x, y, z) in small_instance(), c in 0.0f64..1.5) {
            let g = |v: f64| v * v * v + v;
            let map = |rows: &Vec<Vec<f64>>| rows.iter().map(|r| r.iter().map(|&v| g(v)).collect()).collect::<Vec<Vec<f64>>>();
            let (gx, gy) = (map(&x), map(&y));
            let gz: Vec<f64> = z.iter().map(|&v| g(v)).collect();
            let t0 = -0.5;
            prop_assert_eq!(indicator_transform(&gz, g(t0)).bits, indicator_transform(&z, t0).bits);
            let (a, da) = classify_robust(&x, &y, &z, ZpRule::independent(c), t0).unwrap();
            let (b, db) = classify_robust(&gx, &gy, &gz, ZpRule::independent(c), g(t0)).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(da.trace.len(), db.trace.len());
        }

        #[test]
        fn truncation_modes_coincide((x, y, z) in small_instance(), t in -5.0f64..7.0) {
            let a = classify_nn_truncated(&x, &y, &z, t, TruncationMode::ZeroedValues).unwrap();
            let b = classify_nn_truncated(&x, &y, &z, t, TruncationMode::TruncatedStandard).unwrap();
            prop_assert_eq!(a, b);
            let inactive = classify_nn_truncated(&x, &y, &z, f64::NEG_INFINITY, TruncationMode::ZeroedValues).unwrap();
            prop_assert_eq!(inactive, classify_nn_standard(&x, &y, &z).unwrap());
        }

        #[test]
        fn deterministic((x, y, z) in small_instance()) {
            let a = classify_robust(&x, &y, &z, ZpRule::independent(0.3), -1.0).unwrap();
            let b = classify_robust(&x, &y, &z, ZpRule::independent(0.3), -1.0).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
