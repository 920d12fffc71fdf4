use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use robustnn::classifier::{
    classify_extrema, classify_fixed_threshold, classify_nn_standard, classify_nn_truncated,
    select_threshold, ScanStart, TruncationMode, ZpRule,
};
use robustnn::datagen::Design;
use robustnn::experiments::{
    leave_one_out, sample_size_study, success_vs_c, success_vs_threshold, sweep_beta_r,
    threshold_distribution, write_sample_size_csv, write_xy_csv,
};
use robustnn::seed::{derive_seed, rng_from_seed};
use robustnn::tuning::{apriori_optimal_threshold, select_threshold_cv, AprioriMethod};
use robustnn::Population;
use serde::Serialize;
use serde_json::json;

use crate::config::{Config, Sections};
use crate::dataset::{load_dataset, load_table, Dataset};
use crate::manifest::{
    manifest_path, sibling, DataMethod, Manifest, MethodArgs, Request, SCHEMA_VERSION,
};

/// Files written and a short report for standard output.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub summary: String,
}

/// Runs a request and, when it writes files, a manifest next to them.
pub fn execute(request: &Request) -> Result<Outcome> {
    let mut outcome = match request {
        Request::Gen { config, out } => gen(&Config::from_sections(config.clone())?, out),
        Request::Sweep { config, out } => sweep(&Config::from_sections(config.clone())?, out),
        Request::ThresholdDist { config, out } => {
            threshold_dist(&Config::from_sections(config.clone())?, out)
        }
        Request::Curves { config, out } => curves(&Config::from_sections(config.clone())?, out),
        Request::Apriori { config, out } => apriori(&Config::from_sections(config.clone())?, out),
        Request::SampleSize { config, out } => {
            sample_size(&Config::from_sections(config.clone())?, out)
        }
        Request::Classify {
            train,
            test,
            method,
            out,
        } => classify(train, test, method, out.as_deref()),
        Request::Cv { data, out } => cv(data, out),
        Request::Loo { data, method, out } => loo(data, method, out),
    }?;
    if let Some(out) = request.out() {
        let path = manifest_path(out);
        Manifest::new(request.clone(), outcome.outputs.clone()).save(&path)?;
        outcome.outputs.push(path);
    }
    Ok(outcome)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_with<F>(path: &Path, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    Ok(path.to_path_buf())
}

fn write_json<T: Serialize>(path: &Path, command: &str, result: &T) -> Result<PathBuf> {
    let doc = json!({ "schema_version": SCHEMA_VERSION, "command": command, "result": result });
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)
    })
}

fn prepared(cfg: &Config) -> Result<(Design, robustnn::datagen::PreparedDesign)> {
    let design = cfg.design()?;
    let prepared = design.prepare()?;
    Ok((design, prepared))
}

fn gen(cfg: &Config, out: &Path) -> Result<Outcome> {
    let (_, prepared) = prepared(cfg)?;
    let seed = cfg.seed()?;
    let mut rng = rng_from_seed(derive_seed(seed, 0, 0));
    let z_from = match cfg.raw("run", "z_from") {
        "random" if derive_seed(seed, 0, 1) & 1 == 0 => Population::X,
        "random" => Population::Y,
        "X" | "x" => Population::X,
        "Y" | "y" => Population::Y,
        other => bail!("run.z_from: unknown value `{other}`"),
    };
    let data = prepared.generate(z_from, &mut rng);
    let feature_ids: Vec<String> = (1..=prepared.p()).map(|k| format!("f{k}")).collect();
    let training = Dataset {
        feature_ids: feature_ids.clone(),
        samples: data
            .x_samples
            .iter()
            .chain(&data.y_samples)
            .cloned()
            .collect(),
        labels: data
            .x_samples
            .iter()
            .map(|_| "X".to_string())
            .chain(data.y_samples.iter().map(|_| "Y".to_string()))
            .collect(),
    };
    let test = Dataset {
        feature_ids,
        samples: vec![data.z.clone()],
        labels: vec![data.z_label.to_string()],
    };
    let test_path = sibling(out, "_test", "csv");
    training.save(out)?;
    test.save(&test_path)?;
    let meta = json!({
        "p": prepared.p(),
        "z_label": data.z_label,
        "shift": data.shift,
        "shift_indices": data.shift_indices,
    });
    let json_path = write_json(&sibling(out, "", "json"), "gen", &meta)?;
    Ok(Outcome {
        outputs: vec![out.to_path_buf(), test_path, json_path],
        summary: format!(
            "generated {} training rows and one test row from {} (p = {}, shift {:.6} on {} components)",
            training.len(),
            data.z_label,
            prepared.p(),
            data.shift,
            data.shift_indices.len()
        ),
    })
}

fn sweep(cfg: &Config, out: &Path) -> Result<Outcome> {
    let grid = sweep_beta_r(
        &cfg.list("sweep", "beta")?,
        &cfg.list("sweep", "r")?,
        &cfg.design()?,
        &cfg.methods()?,
        cfg.get("sweep", "trials")?,
        cfg.seed()?,
    )?;
    let dominance = sibling(out, "_dominance", "csv");
    let outputs = vec![
        write_with(out, |w| grid.write_long_csv(w))?,
        write_with(&dominance, |w| grid.write_dominance_csv(w))?,
        write_json(&sibling(out, "", "json"), "sweep", &grid)?,
    ];
    let skipped = grid.cells.iter().filter(|c| c.skipped.is_some()).count();
    let mut summary = format!(
        "{} cells ({} skipped), methods {}\n",
        grid.cells.len(),
        skipped,
        grid.methods.join(", ")
    );
    let mut table = Vec::new();
    grid.write_dominance_csv(&mut table)?;
    summary.push_str(&String::from_utf8_lossy(&table));
    Ok(Outcome {
        outputs,
        summary: summary.trim_end().to_string(),
    })
}

fn threshold_dist(cfg: &Config, out: &Path) -> Result<Outcome> {
    let (_, prepared) = prepared(cfg)?;
    let hist = threshold_distribution(
        &prepared,
        cfg.get("threshold_dist", "trials")?,
        ZpRule::independent(cfg.get("threshold_dist", "c")?),
        cfg.scan_start()?,
        cfg.get("threshold_dist", "bins")?,
        cfg.seed()?,
    )?;
    let outputs = vec![
        write_with(out, |w| hist.write_csv(w))?,
        write_json(&sibling(out, "", "json"), "threshold-dist", &hist)?,
    ];
    let mut sorted = hist.ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted.get(sorted.len() / 2).copied();
    Ok(Outcome {
        outputs,
        summary: format!(
            "{} trials, defaulted fraction {:.4}, median threshold / shift {}",
            hist.trials,
            hist.defaulted_fraction,
            median.map_or("n/a".into(), |m| format!("{m:.4}"))
        ),
    })
}

fn curves(cfg: &Config, out: &Path) -> Result<Outcome> {
    let (_, prepared) = prepared(cfg)?;
    let trials: usize = cfg.get("curves", "trials")?;
    let seed = cfg.seed()?;
    let threshold =
        success_vs_threshold(&prepared, &cfg.list("curves", "proportions")?, trials, seed)?;
    let by_c = success_vs_c(
        &prepared,
        &cfg.list("curves", "c")?,
        trials,
        cfg.scan_start()?,
        seed,
    )?;
    let truncated = sibling(out, "_truncated", "csv");
    let c_path = sibling(out, "_c", "csv");
    let outputs = vec![
        write_with(out, |w| {
            write_xy_csv("proportion", "success", &threshold.indicator_series(), w)
        })?,
        write_with(&truncated, |w| {
            write_xy_csv("proportion", "success", &threshold.truncated_series(), w)
        })?,
        write_with(&c_path, |w| write_xy_csv("c", "success", &by_c.series(), w))?,
        write_json(
            &sibling(out, "", "json"),
            "curves",
            &json!({ "threshold": threshold, "c": by_c }),
        )?,
    ];
    let best = by_c
        .points
        .iter()
        .find(|p| p.c == by_c.argmax_c)
        .expect("argmax on grid");
    Ok(Outcome {
        outputs,
        summary: format!(
            "standard NN {:.4}; best c = {} with success {:.4} ± {:.4}",
            by_c.standard_nn.rate, by_c.argmax_c, best.robust.rate, best.robust.se
        ),
    })
}

fn apriori(cfg: &Config, out: &Path) -> Result<Outcome> {
    let Design::SparseShift(scenario) = cfg.design()? else {
        bail!("apriori needs scenario.design = sparse_shift");
    };
    let a_p = scenario.prepare()?.scale().a_p;
    let grid: Vec<f64> = cfg
        .list("apriori", "proportions")?
        .iter()
        .map(|q| q * a_p)
        .collect();
    let method = match cfg.raw("apriori", "method") {
        "normal_approx" => AprioriMethod::NormalApprox,
        "monte_carlo" => AprioriMethod::MonteCarlo {
            trials: cfg.get("apriori", "trials")?,
            seed: cfg.seed()?,
        },
        other => bail!("apriori.method: unknown value `{other}`"),
    };
    let curve = apriori_optimal_threshold(&scenario, &grid, method)?;
    let outputs = vec![
        write_with(out, |w| write_xy_csv("t", "success", &curve.grid, w))?,
        write_json(
            &sibling(out, "", "json"),
            "apriori",
            &json!({ "shift": a_p, "curve": curve }),
        )?,
    ];
    Ok(Outcome {
        outputs,
        summary: format!(
            "optimal threshold {:.6} ({:.4} of the shift), predicted success {:.4}",
            curve.t_star,
            curve.t_star / a_p,
            curve.best_rate()
        ),
    })
}

fn sample_size(cfg: &Config, out: &Path) -> Result<Outcome> {
    let rows = sample_size_study(
        &cfg.design()?,
        &cfg.pairs()?,
        &cfg.methods()?,
        cfg.get("sample_size", "trials")?,
        cfg.seed()?,
    )?;
    let outputs = vec![
        write_with(out, |w| write_sample_size_csv(&rows, w))?,
        write_json(&sibling(out, "", "json"), "sample-size", &rows)?,
    ];
    let summary = rows
        .iter()
        .map(|row| {
            let rates: Vec<String> = row
                .estimates
                .iter()
                .map(|e| format!("{} {:.4}", e.method, e.rate))
                .collect();
            format!("m = {}, n = {}: {}", row.m, row.n, rates.join(", "))
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome { outputs, summary })
}

fn scan_start(args: &MethodArgs) -> Result<ScanStart> {
    match args.start.as_str() {
        "median" => Ok(ScanStart::Median),
        s => Ok(ScanStart::Fixed(s.parse().map_err(|_| {
            anyhow!("--start must be `median` or a number, got `{s}`")
        })?)),
    }
}

/// Prediction and, for the thresholded rules, the threshold used.
#[derive(Debug, Clone, Copy)]
pub struct Prediction {
    pub label: Population,
    pub threshold: Option<f64>,
    pub defaulted: Option<bool>,
}

pub fn predict(
    args: &MethodArgs,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    z: &[f64],
) -> Result<Prediction> {
    let plain = |label| Prediction {
        label,
        threshold: None,
        defaulted: None,
    };
    Ok(match args.method {
        DataMethod::Robust | DataMethod::RobustDep => {
            let rule = if args.method == DataMethod::Robust {
                ZpRule::independent(args.c)
            } else {
                ZpRule::dependent(args.xi)
            };
            let d = select_threshold(xs, ys, z, rule, scan_start(args)?.resolve(xs, ys))?;
            Prediction {
                label: d.label(),
                threshold: Some(d.theta),
                defaulted: Some(d.defaulted),
            }
        }
        DataMethod::Standard => plain(classify_nn_standard(xs, ys, z)?),
        DataMethod::Truncated => Prediction {
            threshold: Some(args.t),
            ..plain(classify_nn_truncated(
                xs,
                ys,
                z,
                args.t,
                TruncationMode::ZeroedValues,
            )?)
        },
        DataMethod::Fixed => Prediction {
            threshold: Some(args.t),
            ..plain(classify_fixed_threshold(xs, ys, z, args.t)?)
        },
        DataMethod::Extrema => plain(classify_extrema(xs, ys, z)?),
        DataMethod::Cv => {
            let theta = select_threshold_cv(xs, ys)?.theta_cv;
            Prediction {
                threshold: Some(theta),
                ..plain(classify_nn_truncated(
                    xs,
                    ys,
                    z,
                    theta,
                    TruncationMode::ZeroedValues,
                )?)
            }
        }
    })
}

fn method_json(args: &MethodArgs) -> serde_json::Value {
    match args.method {
        DataMethod::Robust => json!({ "method": "robust", "c": args.c, "start": args.start }),
        DataMethod::RobustDep => {
            json!({ "method": "robust-dep", "xi": args.xi, "start": args.start })
        }
        DataMethod::Truncated | DataMethod::Fixed => json!({ "method": args.method, "t": args.t }),
        m => json!({ "method": m }),
    }
}

fn classify(train: &Path, test: &Path, args: &MethodArgs, out: Option<&Path>) -> Result<Outcome> {
    let data = load_dataset(train)?;
    let queries = load_table(test)?;
    if queries.feature_ids != data.feature_ids {
        bail!(
            "{} and {} have different feature columns",
            train.display(),
            test.display()
        );
    }
    let (classes, xs, ys) = data.split()?;
    let mut lines = vec!["row,truth,predicted,threshold,defaulted".to_string()];
    let mut hits = 0;
    for (i, (z, truth)) in queries.samples.iter().zip(&queries.labels).enumerate() {
        let pred = predict(args, &xs, &ys, z)?;
        let name = classes.name(pred.label);
        hits += (name == truth) as usize;
        lines.push(format!(
            "{},{},{},{},{}",
            i + 1,
            truth,
            name,
            pred.threshold.map_or(String::new(), |t| t.to_string()),
            pred.defaulted.map_or(String::new(), |d| d.to_string())
        ));
    }
    let table = lines.join("\n") + "\n";
    let mut outputs = Vec::new();
    if let Some(path) = out {
        outputs.push(write_with(path, |w| w.write_all(table.as_bytes()))?);
    }
    let known = queries
        .labels
        .iter()
        .filter(|l| **l == classes.x || **l == classes.y)
        .count();
    let mut summary = table.trim_end().to_string();
    if known > 0 {
        summary.push_str(&format!("\nmatched the given label in {hits}/{known} rows"));
    }
    Ok(Outcome { outputs, summary })
}

fn cv(data_path: &Path, out: &Path) -> Result<Outcome> {
    let data = load_dataset(data_path)?;
    let (_, xs, ys) = data.split()?;
    let curve = select_threshold_cv(&xs, &ys)?;
    let outputs = vec![
        write_with(out, |w| write_xy_csv("t", "cv", &curve.grid, w))?,
        write_json(&sibling(out, "", "json"), "cv", &curve)?,
    ];
    let best = curve
        .grid
        .iter()
        .find(|g| g.0 == curve.theta_cv)
        .map_or(f64::NAN, |g| g.1);
    Ok(Outcome {
        outputs,
        summary: format!(
            "cross-validated threshold {} (CV = {best}), {} of {} grid points minimize",
            curve.theta_cv,
            curve.minimizers.len(),
            curve.grid.len()
        ),
    })
}

/// Leave-one-out accuracy of a method on a labelled dataset.
pub fn loo_cross_validate(data: &Dataset, args: &MethodArgs) -> Result<serde_json::Value> {
    let (classes, xs, ys) = data.split()?;
    if xs.len() < 2 || ys.len() < 2 {
        bail!(
            "leave-one-out needs at least two samples per class ({}: {}, {}: {})",
            classes.x,
            xs.len(),
            classes.y,
            ys.len()
        );
    }
    scan_start(args)?;
    let report = leave_one_out(&xs, &ys, |a, b, z| {
        predict(args, a, b, z)
            .map(|p| p.label)
            .map_err(|e| match e.downcast::<robustnn::Error>() {
                Ok(core) => core,
                Err(other) => robustnn::Error::Argument(other.to_string()),
            })
    })?;
    let c = report.confusion;
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "loo",
        "method": method_json(args),
        "p": data.p(),
        "classes": { "x": classes.x, "y": classes.y },
        "confusion": {
            classes.x.clone(): { classes.x.clone(): c[0][0], classes.y.clone(): c[0][1] },
            classes.y.clone(): { classes.x.clone(): c[1][0], classes.y.clone(): c[1][1] },
        },
        "correct": report.correct(),
        "total": report.total(),
        "accuracy": report.accuracy(),
    }))
}

fn loo(data_path: &Path, args: &MethodArgs, out: &Path) -> Result<Outcome> {
    let data = load_dataset(data_path)?;
    let result = loo_cross_validate(&data, args)?;
    let path = write_with(out, |w| {
        serde_json::to_writer_pretty(&mut *w, &result)?;
        writeln!(w)
    })?;
    Ok(Outcome {
        outputs: vec![path],
        summary: format!(
            "leave-one-out accuracy {}/{} = {:.4}\nconfusion (rows true, columns predicted): {}",
            result["correct"],
            result["total"],
            result["accuracy"].as_f64().unwrap_or(f64::NAN),
            result["confusion"]
        ),
    })
}

pub fn config_request(command: &str, config: Sections, out: PathBuf) -> Result<Request> {
    Ok(match command {
        "gen" => Request::Gen { config, out },
        "sweep" => Request::Sweep { config, out },
        "threshold-dist" => Request::ThresholdDist { config, out },
        "curves" => Request::Curves { config, out },
        "apriori" => Request::Apriori { config, out },
        "sample-size" => Request::SampleSize { config, out },
        other => bail!("`{other}` does not take a config"),
    })
}
