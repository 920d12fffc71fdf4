//! Robust nearest-neighbor classification for high-dimensional data.
//!
//! Components are truncated to zero–one indicators at a threshold chosen from
//! the data, which makes nearest-neighbor classification insensitive to
//! heavy tails. The crate also ships the competing classifiers, generators
//! for sparse-shift models, alternative threshold selectors, and a Monte
//! Carlo engine for success-rate studies.

pub mod classifier;
pub mod datagen;
pub mod distributions;
pub mod error;
pub mod experiments;
mod parallel;
pub mod quadrature;
pub mod seed;
pub mod tuning;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// The two populations. `X` is the reference; `Y` carries upward shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Population {
    X,
    Y,
}

impl Population {
    pub fn other(self) -> Population {
        match self {
            Population::X => Population::Y,
            Population::Y => Population::X,
        }
    }
}

impl std::fmt::Display for Population {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Population::X => "X",
            Population::Y => "Y",
        })
    }
}
