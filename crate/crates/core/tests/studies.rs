use robustnn::classifier::{classify_nn_standard, ScanStart, ZpRule};
use robustnn::datagen::{Design, Scenario, VarianceContrast};
use robustnn::distributions::MarginalSpec;
use robustnn::experiments::{
    combined_se, estimate_success_rate, run_trial, run_trials, sample_size_study, sweep_beta_r,
    threshold_distribution, trial_label, trial_seed, Method,
};
use robustnn::seed::rng_from_seed;
use robustnn::Population;

fn equal_spread(p: usize) -> Design {
    Design::VarianceContrast(VarianceContrast {
        p,
        m: 1,
        n: 1,
        sd_x: 1.0,
        sd_y: 1.0,
    })
}

#[test]
fn zero_information_is_a_coin_flip() {
    let prepared = equal_spread(1000).prepare().unwrap();
    let est = estimate_success_rate(&prepared, &[Method::robust(0.5)], 1000, 31).unwrap();
    let e = &est[0];
    assert!(
        (e.rate - 0.5).abs() <= 3.0 * e.se,
        "rate {} ± {}",
        e.rate,
        e.se
    );
}

#[test]
fn degenerate_statistic_follows_tie_rule() {
    let prepared = equal_spread(50).prepare().unwrap();
    // above every value all indicators vanish and T = 0
    let method = [Method::FixedThreshold { t: 1e9 }];
    for (label, expected) in [(Population::X, true), (Population::Y, false)] {
        let r = run_trial(&prepared, &method, label, 8).unwrap();
        assert_eq!(r[0].correct, expected);
    }
}

#[test]
fn paired_trials_replay_from_seed() {
    let design: Design =
        Scenario::independent(2000, 0.6, 0.6, MarginalSpec::StudentT { df: 4.0 }).into();
    let prepared = design.prepare().unwrap();
    let methods = [Method::robust(0.5), Method::StandardNn];
    let results = run_trials(&prepared, &methods, 12, 4, 3).unwrap();
    for (i, trial) in results.iter().enumerate() {
        let seed = trial_seed(4, 3, i);
        assert!(trial.iter().all(|r| r.seed == seed));
        let data = prepared.generate(trial_label(i), &mut rng_from_seed(seed));
        let nn = classify_nn_standard(&data.x_samples, &data.y_samples, &data.z).unwrap();
        assert_eq!(trial[1].correct, nn == data.z_label);
        assert_eq!(
            trial.to_vec(),
            run_trial(&prepared, &methods, trial_label(i), seed).unwrap()
        );
    }
}

#[test]
fn sweep_is_reproducible_and_binomial() {
    let template: Design =
        Scenario::independent(3000, 0.6, 0.6, MarginalSpec::STANDARD_NORMAL).into();
    let methods = [Method::robust(0.5), Method::StandardNn, Method::Extrema];
    let a = sweep_beta_r(&[0.6, 0.8], &[0.3, 0.7], &template, &methods, 30, 99).unwrap();
    let b = sweep_beta_r(&[0.8, 0.6], &[0.7, 0.3], &template, &methods, 30, 99).unwrap();
    assert_eq!(a, b);
    for cell in &a.cells {
        for e in &cell.estimates {
            assert!((0.0..=1.0).contains(&e.rate));
            assert_eq!(e.se, (e.rate * (1.0 - e.rate) / e.trials as f64).sqrt());
        }
        let best = cell.estimates.iter().map(|e| e.rate).fold(0.0, f64::max);
        let winner = cell
            .estimates
            .iter()
            .find(|e| Some(&e.method) == cell.dominant.as_ref())
            .unwrap();
        assert_eq!(winner.rate, best);
    }
    assert_eq!(a.cells.len(), 4);
}

#[test]
fn threshold_distribution_has_one_mode_and_spread() {
    let design: Design =
        Scenario::independent(20_000, 0.7, 0.4, MarginalSpec::StudentT { df: 4.0 }).into();
    let h = threshold_distribution(
        &design.prepare().unwrap(),
        400,
        ZpRule::independent(0.55),
        ScanStart::Median,
        10,
        2,
    )
    .unwrap();
    let total: f64 = h.bins.iter().map(|b| b.proportion).sum();
    assert!((total + h.defaulted_fraction - 1.0).abs() < 1e-12);
    let mut sorted = h.ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    assert!(sorted[3 * n / 4] > sorted[n / 4], "no spread");
    // rises to the mode and falls after it, up to a few trials of noise
    const SLACK: f64 = 0.0125;
    let mode = h.mode_bin().unwrap();
    let props: Vec<f64> = h.bins.iter().map(|b| b.proportion).collect();
    assert!(props[..=mode].windows(2).all(|w| w[1] >= w[0] - SLACK));
    assert!(
        props[mode..].windows(2).all(|w| w[1] <= w[0] + SLACK),
        "{props:?}"
    );
}

#[test]
fn smaller_reference_sample_helps() {
    // the effect is about three points, so it needs many trials
    let design: Design =
        Scenario::independent(20_000, 0.55, 0.3, MarginalSpec::StudentT { df: 4.0 }).into();
    let rows =
        sample_size_study(&design, &[(1, 3), (3, 1)], &[Method::robust(0.5)], 3000, 9).unwrap();
    let (fewer_x, more_x) = (&rows[0].estimates[0], &rows[1].estimates[0]);
    let gap = fewer_x.rate - more_x.rate;
    assert!(
        gap > 2.0 * combined_se(fewer_x, more_x),
        "(1,3) {} vs (3,1) {}",
        fewer_x.rate,
        more_x.rate
    );
}

#[test]
fn larger_balanced_samples_do_not_hurt() {
    let design: Design =
        Scenario::independent(20_000, 0.6, 0.5, MarginalSpec::StudentT { df: 4.0 }).into();
    let rows =
        sample_size_study(&design, &[(1, 1), (2, 2)], &[Method::robust(0.5)], 400, 12).unwrap();
    let (one, two) = (&rows[0].estimates[0], &rows[1].estimates[0]);
    assert!(
        two.rate >= one.rate - 2.0 * combined_se(one, two),
        "(1,1) {} vs (2,2) {}",
        one.rate,
        two.rate
    );
    let direct =
        estimate_success_rate(&design.prepare().unwrap(), &[Method::robust(0.5)], 400, 12).unwrap();
    assert_eq!(&direct[0], one);
}
