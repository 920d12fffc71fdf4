use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use robustnn_cli::commands::{config_request, execute};
use robustnn_cli::config::Config;
use robustnn_cli::manifest::{Manifest, MethodArgs, Request};

#[derive(Parser)]
#[command(
    name = "robustnn",
    version,
    about = "Thresholded nearest-neighbor classification and simulation studies"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    /// INI file overriding the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a single setting, as `section.key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    sets: Vec<String>,
    /// Output path; related files are written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify each row of a test table using a labelled training table.
    Classify {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// Cross-validation curve of the truncated nearest-neighbor threshold.
    Cv {
        #[arg(long)]
        data: PathBuf,
    },
    /// Leave-one-out accuracy on a labelled table.
    Loo {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// Draw one training set and test row from the configured scenario.
    Gen,
    /// Success rates over a grid of sparsity and signal strength.
    Sweep,
    /// Distribution of the selected threshold.
    ThresholdDist,
    /// Success against a fixed threshold and against the coefficient c.
    Curves,
    /// Predicted success against the threshold and its maximizer.
    Apriori,
    /// Success for several training sample sizes.
    SampleSize,
    /// Rerun a command from its manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for item in &cli.sets {
        let (key, value) = item
            .split_once('=')
            .with_context(|| format!("--set `{item}`: expected SECTION.KEY=VALUE"))?;
        let (section, key) = key
            .trim()
            .split_once('.')
            .with_context(|| format!("--set `{item}`: expected SECTION.KEY=VALUE"))?;
        cfg.set(section, key, value.trim())?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("run", "seed", seed.to_string())?;
    }
    Ok(cfg)
}

fn default_out(name: &str) -> PathBuf {
    let ext = if name == "loo" { "json" } else { "csv" };
    PathBuf::from(format!("{name}.{ext}"))
}

fn build_request(cli: &Cli, command: &Command) -> Result<Request> {
    let out = |name: &str| cli.out.clone().unwrap_or_else(|| default_out(name));
    Ok(match command {
        Command::Classify {
            train,
            test,
            method,
        } => Request::Classify {
            train: train.clone(),
            test: test.clone(),
            method: method.clone(),
            out: cli.out.clone(),
        },
        Command::Cv { data } => Request::Cv {
            data: data.clone(),
            out: out("cv"),
        },
        Command::Loo { data, method } => Request::Loo {
            data: data.clone(),
            method: method.clone(),
            out: out("loo"),
        },
        Command::Replay { manifest } => {
            let mut request = Manifest::load(manifest)?.request;
            if let Some(path) = &cli.out {
                request.set_out(path.clone());
            }
            request
        }
        other => {
            let name = match other {
                Command::Gen => "gen",
                Command::Sweep => "sweep",
                Command::ThresholdDist => "threshold-dist",
                Command::Curves => "curves",
                Command::Apriori => "apriori",
                _ => "sample-size",
            };
            let cfg = load_config(cli)?;
            config_request(name, cfg.sections().clone(), out(name))?
        }
    })
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("ROBUSTNN_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .with_context(|| format!("ROBUSTNN_THREADS=`{value}` is not a count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    if cli.print_config {
        print!("{}", load_config(&cli)?.to_ini());
        return Ok(());
    }
    let Some(command) = &cli.command else {
        anyhow::bail!("no command given; see --help");
    };
    let request = build_request(&cli, command)?;
    let outcome = execute(&request)?;
    if !outcome.summary.is_empty() {
        println!("{}", outcome.summary);
    }
    for path in &outcome.outputs {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
