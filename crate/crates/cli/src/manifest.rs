use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::Sections;

pub const SCHEMA_VERSION: u32 = 1;

/// Classifier choice for the dataset commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DataMethod {
    /// Thresholded zero-one rule with `z_p = c √(ln p)`.
    Robust,
    /// Thresholded zero-one rule with `z_p = ξ ln p`.
    RobustDep,
    /// Plain nearest neighbor.
    Standard,
    /// Nearest neighbor on values zeroed at or below `t`.
    Truncated,
    /// Zero-one rule at the fixed threshold `t`.
    Fixed,
    /// Nearest maximum component.
    Extrema,
    /// Truncated nearest neighbor at the cross-validated threshold.
    Cv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, clap::Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value = "robust")]
    pub method: DataMethod,
    /// Coefficient of √(ln p) for the robust rule.
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    /// Coefficient of ln p for the dependent rule.
    #[arg(long, default_value_t = 0.1)]
    pub xi: f64,
    /// Threshold for the truncated and fixed methods.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    /// Scan start: `median` or a number.
    #[arg(long, default_value = "median", allow_hyphen_values = true)]
    pub start: String,
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Request {
    Gen {
        config: Sections,
        out: PathBuf,
    },
    Sweep {
        config: Sections,
        out: PathBuf,
    },
    ThresholdDist {
        config: Sections,
        out: PathBuf,
    },
    Curves {
        config: Sections,
        out: PathBuf,
    },
    Apriori {
        config: Sections,
        out: PathBuf,
    },
    SampleSize {
        config: Sections,
        out: PathBuf,
    },
    Classify {
        train: PathBuf,
        test: PathBuf,
        method: MethodArgs,
        out: Option<PathBuf>,
    },
    Cv {
        data: PathBuf,
        out: PathBuf,
    },
    Loo {
        data: PathBuf,
        method: MethodArgs,
        out: PathBuf,
    },
}

impl Request {
    pub fn name(&self) -> &'static str {
        match self {
            Request::Gen { .. } => "gen",
            Request::Sweep { .. } => "sweep",
            Request::ThresholdDist { .. } => "threshold-dist",
            Request::Curves { .. } => "curves",
            Request::Apriori { .. } => "apriori",
            Request::SampleSize { .. } => "sample-size",
            Request::Classify { .. } => "classify",
            Request::Cv { .. } => "cv",
            Request::Loo { .. } => "loo",
        }
    }

    pub fn out(&self) -> Option<&Path> {
        match self {
            Request::Gen { out, .. }
            | Request::Sweep { out, .. }
            | Request::ThresholdDist { out, .. }
            | Request::Curves { out, .. }
            | Request::Apriori { out, .. }
            | Request::SampleSize { out, .. }
            | Request::Cv { out, .. }
            | Request::Loo { out, .. } => Some(out),
            Request::Classify { out, .. } => out.as_deref(),
        }
    }

    pub fn set_out(&mut self, path: PathBuf) {
        match self {
            Request::Gen { out, .. }
            | Request::Sweep { out, .. }
            | Request::ThresholdDist { out, .. }
            | Request::Curves { out, .. }
            | Request::Apriori { out, .. }
            | Request::SampleSize { out, .. }
            | Request::Cv { out, .. }
            | Request::Loo { out, .. } => *out = path,
            Request::Classify { out, .. } => *out = Some(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub request: Request,
    pub outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(request: Request, outputs: Vec<PathBuf>) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            tool: "robustnn".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            request,
            outputs,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        if manifest.schema_version != SCHEMA_VERSION {
            anyhow::bail!(
                "manifest schema version {} is not supported",
                manifest.schema_version
            );
        }
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// `dir/stem{suffix}.{ext}` next to `out`.
pub fn sibling(out: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}{suffix}.{ext}"))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, ".manifest", "json")
}
