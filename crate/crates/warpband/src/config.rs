//! Run configuration: tolerances and sweep grids, optionally read from TOML.
//!
//! ```toml
//! [tolerances]
//! first_variation = 0.1
//!
//! [sweep]
//! n = [3, 4]
//! sigma = { start = 1.0, end = 12.0, count = 12 }
//! h_minus = { start = -1.0, end = -1.0, count = 1 }
//! h_plus = { start = -1.0, end = -1.0, count = 1 }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use warpband_core::sweep::SweepSpec;

use crate::error::{CliError, Result};

/// Every tolerance used by the commands, echoed in each report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on `max |H - h|` away from the collars.
    pub first_variation: f64,
    /// Second-variation samples must be at least `-second_variation`.
    pub second_variation: f64,
    /// Relative agreement of cut values, flow values and oracle minima.
    pub cut_relative: f64,
    /// Structural inequality slack, per unit of grid step `1/nu`.
    pub structural_per_step: f64,
    /// Stability eigenvalue slack, per unit of grid step `1/nu`.
    pub stability_per_step: f64,
    /// Conformal verdict threshold relative to the operator norm.
    pub spectral_relative: f64,
    /// Bound on the pointwise curvature identity residual.
    pub identity: f64,
    /// Agreement of closed-form and integrated widths.
    pub width: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            first_variation: 0.1,
            second_variation: 1e-6,
            cut_relative: 1e-12,
            structural_per_step: 1.0,
            stability_per_step: 5.0,
            spectral_relative: 1e-8,
            identity: 1e-8,
            width: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("first_variation", self.first_variation),
            ("second_variation", self.second_variation),
            ("cut_relative", self.cut_relative),
            ("structural_per_step", self.structural_per_step),
            ("stability_per_step", self.stability_per_step),
            ("spectral_relative", self.spectral_relative),
            ("identity", self.identity),
            ("width", self.width),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Argument(format!(
                    "tolerance {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `|a - b| ≤ cut_relative·(1 + max(|a|, |b|))`
    pub fn same_cut(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.cut_relative * (1.0 + a.abs().max(b.abs()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tolerances: Tolerances,
    pub sweep: Option<SweepSpec>,
}

impl Config {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::format(origin, e))?;
        config.tolerances.validate().map_err(|e| CliError::format(origin, e))?;
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, path)
    }
}
