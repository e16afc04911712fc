//! Study settings and their key-value file format.
//!
//! A config file is TOML with one key per command-line flag:
//!
//! ```toml
//! example = "circle-1e6"
//! j_min = 4
//! j_max = 6
//! coarse_level = 3
//! error_grid_level = 10
//! quad_order = 5
//! solver = "direct"        # or "gmres"
//! tol = 1e-8
//! max_iter = 20000
//! cond = "dense"           # "off", "dense" or "iter"
//! normalization = "energy" # or "dyadic"
//! reference_level = 7
//! level_guard = 7
//! bases = ["augmented", "standard"]
//! out = "results"
//! ```
//!
//! Missing keys take the defaults of [`StudyConfig::default`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::Normalization;
use crate::error::{Error, Result};

use super::study::BasisKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Direct,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CondSetting {
    #[default]
    Off,
    /// Dense eigenvalues up to the dense size limit, Lanczos above it.
    Dense,
    Iter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub example: String,
    pub j_min: u32,
    /// Inclusive; `j_max < j_min` is an empty study.
    pub j_max: u32,
    pub coarse_level: u32,
    pub error_grid_level: u32,
    pub quad_order: usize,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
    pub cond: CondSetting,
    pub normalization: Normalization,
    /// Level of the augmented reference solve when no exact solution exists.
    pub reference_level: u32,
    pub level_guard: u32,
    /// Blocks of the results table, in order.
    pub bases: Vec<BasisKind>,
    pub out: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            example: "circle-1e6".into(),
            j_min: 4,
            j_max: 6,
            coarse_level: 3,
            error_grid_level: 10,
            quad_order: crate::quadrature::DEFAULT_ORDER,
            solver: SolverKind::Direct,
            tol: 1e-8,
            max_iter: 20_000,
            cond: CondSetting::Off,
            normalization: Normalization::Energy,
            reference_level: 7,
            level_guard: 7,
            bases: vec![BasisKind::Augmented, BasisKind::Standard],
            out: None,
        }
    }
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are plain values")
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        self.j_min..=self.j_max
    }

    pub fn is_empty(&self) -> bool {
        self.j_max < self.j_min
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.is_empty() {
            return Ok(());
        }
        if self.j_min <= self.coarse_level {
            return bad(format!(
                "j_min {} must exceed coarse_level {}",
                self.j_min, self.coarse_level
            ));
        }
        if self.coarse_level < 2 {
            return bad(format!("coarse_level {} is below 2", self.coarse_level));
        }
        if self.j_max > self.level_guard {
            return Err(Error::MemoryGuard {
                level: self.j_max,
                guard: self.level_guard,
            });
        }
        if self.error_grid_level < self.j_max + 2 {
            return bad(format!(
                "error_grid_level {} must be at least j_max + 2 = {}",
                self.error_grid_level,
                self.j_max + 2
            ));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(1..=10).contains(&self.quad_order) {
            return Err(Error::QuadOrder(self.quad_order));
        }
        Ok(())
    }
}
