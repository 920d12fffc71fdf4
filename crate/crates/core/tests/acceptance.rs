//! Acceptance criteria 1 to 10. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured values before asserting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robustnn::classifier::{compute_t_s, ScanStart, ThresholdScan, ZpRule};
use robustnn::datagen::{
    DependenceModel, Design, MixedScenario, Perturb, Scenario, VarianceContrast,
};
use robustnn::distributions::{solve_scale, MarginalSpec};
use robustnn::experiments::{
    combined_se, estimate_success_rate, leave_one_out, run_trials, success_vs_c, sweep_beta_r,
    Method, RateEstimate,
};
use robustnn::tuning::{apriori_optimal_threshold, AprioriMethod};
use robustnn::Population;

const P: usize = 20_000;
const BASE_SEED: u64 = 20_240_601;

fn report(id: u32, pass: bool, detail: String) {
    println!(
        "criterion {id}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn rate<'a>(est: &'a [RateEstimate], id: &str) -> &'a RateEstimate {
    est.iter().find(|e| e.method == id).expect("method present")
}

fn student_t4(beta: f64, r: f64) -> Scenario {
    Scenario::independent(P, beta, r, MarginalSpec::StudentT { df: 4.0 })
}

/// Label from explicit indicator vectors and nearest neighbors, ties to the
/// lowest index and to X.
fn brute_force_label(xs: &[Vec<f64>], ys: &[Vec<f64>], z: &[f64], t: f64) -> Population {
    let ind = |v: &[f64]| v.iter().map(|&a| (a > t) as i64).collect::<Vec<_>>();
    let k = ind(z);
    let dist = |v: &[f64]| {
        ind(v)
            .iter()
            .zip(&k)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<i64>()
    };
    let dx = xs.iter().map(|v| dist(v)).min().unwrap();
    let dy = ys.iter().map(|v| dist(v)).min().unwrap();
    if dx <= dy {
        Population::X
    } else {
        Population::Y
    }
}

#[test]
fn criterion_01_indicator_oracle() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for _ in 0..1000 {
        let p = rng.random_range(1..=20);
        let m = rng.random_range(1..=3);
        let n = rng.random_range(1..=3);
        let row = |rng: &mut ChaCha8Rng| {
            (0..p)
                .map(|_| rng.random_range(-5..=5) as f64)
                .collect::<Vec<_>>()
        };
        let xs: Vec<_> = (0..m).map(|_| row(&mut rng)).collect();
        let ys: Vec<_> = (0..n).map(|_| row(&mut rng)).collect();
        let z = row(&mut rng);
        let scan = ThresholdScan::new(&xs, &ys, &z, -10.0).unwrap();
        for s in scan {
            checked += 1;
            let direct = compute_t_s(&xs, &ys, &z, s.t).unwrap();
            if s.label() != brute_force_label(&xs, &ys, &z, s.t) || direct.label() != s.label() {
                mismatches += 1;
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    report(
        1,
        mismatches == 0 && secs < 10.0,
        format!("{checked} grid points, {mismatches} mismatches, {secs:.2}s"),
    );
}

#[test]
fn criterion_02_boundary() {
    const TRIALS: usize = 400;
    let template: Design = Scenario::independent(P, 0.5, 0.5, MarginalSpec::STANDARD_NORMAL).into();
    let methods = [Method::robust(0.5)];
    let cell = |beta, r| {
        let grid = sweep_beta_r(&[beta], &[r], &template, &methods, TRIALS, BASE_SEED).unwrap();
        grid.cells[0].estimates[0].clone()
    };
    let above = cell(0.6, 0.9);
    let below = cell(0.9, 0.3);
    let along = sweep_beta_r(
        &[0.7],
        &[0.3, 0.6, 0.9],
        &template,
        &methods,
        TRIALS,
        BASE_SEED,
    )
    .unwrap();
    let line: Vec<&RateEstimate> = along.cells.iter().map(|c| &c.estimates[0]).collect();
    let monotone = line
        .windows(2)
        .all(|w| w[1].rate >= w[0].rate - 2.0 * combined_se(w[0], w[1]));
    let pass = above.rate >= 0.90 && below.rate <= 0.95 && monotone;
    report(
        2,
        pass,
        format!(
            "above (0.6,0.9) = {:.4}, below (0.9,0.3) = {:.4}, beta 0.7 line = {:?}",
            above.rate,
            below.rate,
            line.iter().map(|e| e.rate).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_03_heavy_tail_dominance() {
    let prepared = Design::from(student_t4(0.7, 0.4)).prepare().unwrap();
    let est = estimate_success_rate(
        &prepared,
        &[Method::robust(0.5), Method::StandardNn],
        400,
        BASE_SEED,
    )
    .unwrap();
    let (robust, nn) = (rate(&est, "robust"), rate(&est, "standard_nn"));
    let margin = robust.rate - nn.rate;
    let se = combined_se(robust, nn);
    report(
        3,
        margin > 3.0 * se,
        format!(
            "robust {:.4}, standard {:.4}, diff {margin:.4} vs 3 SE {:.4}",
            robust.rate,
            nn.rate,
            3.0 * se
        ),
    );
}

#[test]
fn criterion_04_variance_pathology() {
    let design = Design::VarianceContrast(VarianceContrast {
        p: 10_000,
        m: 1,
        n: 1,
        sd_x: 1.0,
        sd_y: 3.0,
    });
    let prepared = design.prepare().unwrap();
    let results = run_trials(&prepared, &[Method::StandardNn], 200, BASE_SEED, 0).unwrap();
    let to_x = results
        .iter()
        .filter(|r| r[0].correct == (r[0].z_true_label == Population::X))
        .count();
    let share = to_x as f64 / results.len() as f64;
    report(
        4,
        share >= 0.95,
        format!("assigned to X in {to_x}/200 trials ({share:.3})"),
    );
}

fn y_accuracy(design: &Design, method: Method) -> f64 {
    let prepared = design.prepare().unwrap();
    // odd trials draw the test vector from Y
    let results = run_trials(&prepared, &[method], 400, BASE_SEED, 5).unwrap();
    let ys: Vec<_> = results
        .iter()
        .filter(|r| r[0].z_true_label == Population::Y)
        .collect();
    ys.iter().filter(|r| r[0].correct).count() as f64 / ys.len() as f64
}

#[test]
fn criterion_05_extrema_claims() {
    let mixed = |perturb| {
        Design::MixedLightHeavy(MixedScenario {
            p: P,
            m: 1,
            n: 1,
            beta: 0.5,
            r: 0.8,
            perturb,
        })
    };
    let heavy = mixed(Perturb::HeavyBlock);
    let light = mixed(Perturb::LightBlock);
    let extrema_heavy = y_accuracy(&heavy, Method::Extrema);
    let extrema_light = y_accuracy(&light, Method::Extrema);
    let robust_rates: Vec<f64> = [&heavy, &light]
        .iter()
        .map(|d| {
            estimate_success_rate(
                &d.prepare().unwrap(),
                &[Method::robust(0.5)],
                200,
                BASE_SEED,
            )
            .unwrap()[0]
                .rate
        })
        .collect();
    let pass =
        extrema_heavy >= 0.90 && extrema_light <= 0.60 && robust_rates.iter().all(|&r| r > 0.90);
    report(
        5,
        pass,
        format!(
            "extrema Y-accuracy exponential-perturbed {extrema_heavy:.3}, normal-perturbed {extrema_light:.3}; robust {:?}",
            robust_rates
        ),
    );
}

fn c_grid() -> Vec<f64> {
    (1..=12).map(|i| i as f64 / 10.0).collect()
}

#[test]
fn criterion_06_optimal_c_range() {
    let prepared = Design::from(student_t4(0.7, 0.4)).prepare().unwrap();
    let curve = success_vs_c(&prepared, &c_grid(), 200, ScanStart::Median, BASE_SEED).unwrap();
    let pass = (0.3..=0.9).contains(&curve.argmax_c);
    report(
        6,
        pass,
        format!(
            "argmax c = {}, curve = {:?}",
            curve.argmax_c,
            curve.series()
        ),
    );
}

#[test]
fn criterion_07_apriori_bound() {
    let scenario = student_t4(0.7, 0.4);
    let prepared = Design::from(scenario.clone()).prepare().unwrap();
    let curve = success_vs_c(&prepared, &c_grid(), 200, ScanStart::Median, BASE_SEED).unwrap();
    let best = curve
        .points
        .iter()
        .max_by(|a, b| a.robust.rate.total_cmp(&b.robust.rate))
        .unwrap();
    let a_p = scenario.prepare().unwrap().scale().a_p;
    let t_grid: Vec<f64> = (0..=300).map(|i| i as f64 / 200.0 * a_p).collect();
    let apriori =
        apriori_optimal_threshold(&scenario, &t_grid, AprioriMethod::NormalApprox).unwrap();
    let predicted = apriori.best_rate();
    let floor = best.robust.rate - 2.0 * best.robust.se;
    report(
        7,
        predicted >= floor,
        format!(
            "a priori {predicted:.4} at t* = {:.3} a_p; empirical {:.4} - 2 SE = {floor:.4}",
            apriori.t_star / a_p,
            best.robust.rate
        ),
    );
}

#[test]
fn criterion_08_scale_solver() {
    let pareto = solve_scale(
        &[(MarginalSpec::Pareto { shape: 1.0 }, 10_000)],
        10_000,
        0.5,
    )
    .unwrap();
    let exp = solve_scale(&[(MarginalSpec::Exponential, 20_000)], 20_000, 0.4).unwrap();
    let pareto_err = (pareto.a_p - 100.0).abs() / 100.0;
    let target = 0.4 * 20_000f64.ln();
    let exp_err = (exp.a_p - target).abs() / target;
    report(
        8,
        pareto_err <= 1e-6 && exp_err <= 1e-8,
        format!("Pareto rel err {pareto_err:.2e}, exponential rel err {exp_err:.2e}"),
    );
}

#[test]
fn criterion_09_dependence() {
    let mut scenario = Scenario::independent(P, 0.7, 0.6, MarginalSpec::STANDARD_NORMAL);
    scenario.dependence = DependenceModel::equal_weight_ma(5);
    let prepared = Design::from(scenario).prepare().unwrap();
    let dependent = Method::Robust {
        rule: ZpRule::dependent(0.1),
        start: ScanStart::Median,
    };
    let methods = [Method::robust(0.5), dependent, Method::StandardNn];
    let results = run_trials(&prepared, &methods, 400, BASE_SEED, 0).unwrap();
    let tally = |j: usize| {
        RateEstimate::new(
            methods[j].id(),
            results.iter().filter(|r| r[j].correct).count(),
            400,
        )
    };
    let (robust, robust_dep, nn) = (tally(0), tally(1), tally(2));
    let defaulted = results
        .iter()
        .filter(|r| r[1].defaulted == Some(true))
        .count() as f64
        / 400.0;
    let pass = robust.rate >= nn.rate - 2.0 * combined_se(&robust, &nn) && defaulted < 1.0;
    report(
        9,
        pass,
        format!(
            "robust {:.4}, dependent-rule robust {:.4} (defaulted {defaulted:.3}), standard {:.4}",
            robust.rate, robust_dep.rate, nn.rate
        ),
    );
}

#[test]
fn criterion_10_loo_separable() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut rows = |mean: f64, count: usize| -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| {
                (0..50)
                    .map(|_| mean + rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect()
            })
            .collect()
    };
    let (x, y) = (rows(0.0, 7), rows(100.0, 8));
    let nn = leave_one_out(&x, &y, |a, b, z| {
        Ok(Method::StandardNn.classify_rows(a, b, z)?.0)
    })
    .unwrap();
    let robust = leave_one_out(&x, &y, |a, b, z| {
        Ok(Method::robust(0.5).classify_rows(a, b, z)?.0)
    })
    .unwrap();
    let pass = nn.accuracy() == 1.0 && robust.accuracy() == 1.0;
    report(
        10,
        pass,
        format!(
            "leave-one-out accuracy standard {}/{}, robust {}/{}; real-data replay is optional",
            nn.correct(),
            nn.total(),
            robust.correct(),
            robust.total()
        ),
    );
}
