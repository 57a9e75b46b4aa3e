//! TOML run configuration. Unknown keys are rejected and every tolerance
//! must be positive.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub monotonicity: Option<MonotonicityConfig>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Quadrature error target.
    pub quad: Option<f64>,
    /// Pattern-search step tolerance.
    pub step: Option<f64>,
    /// Allowed negative margin for inequality checks.
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum FlowInitial {
    GrimReaper { v: f64, ycut: f64, res: usize },
    /// Closed loop through the origin pinned there at both ends.
    PinnedLoop { radius: f64, res: usize },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MonotonicityConfig {
    pub initial: FlowInitial,
    pub a: f64,
    pub b: f64,
    pub dt: f64,
    pub h: f64,
    pub report_interval: Option<f64>,
    pub model_constant: Option<f64>,
    /// Where to write the time series; relative to the config file.
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::BadInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> CliResult<()> {
        let t = &self.tolerances;
        for (name, v) in [("quad", t.quad), ("step", t.step), ("margin", t.margin)] {
            if let Some(v) = v {
                check_positive(&format!("tolerances.{name}"), v)?;
            }
        }
        if let Some(m) = &self.monotonicity {
            check_positive("monotonicity.dt", m.dt)?;
            check_positive("monotonicity.h", m.h)?;
            if let Some(c) = m.model_constant {
                check_positive("monotonicity.model_constant", c)?;
            }
            if let Some(r) = m.report_interval {
                check_positive("monotonicity.report_interval", r)?;
            }
        }
        Ok(())
    }
}

pub fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::BadInput(format!("{name} must be positive, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = RunConfig::parse(
            r#"
            seed = 3
            [tolerances]
            quad = 1e-6
            [monotonicity]
            a = -2.0
            b = -0.5
            dt = 2e-5
            h = 1e-2
            initial = { grim-reaper = { v = 1.0, ycut = 2.0, res = 256 } }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        let m = cfg.monotonicity.unwrap();
        assert_eq!(m.initial, FlowInitial::GrimReaper { v: 1.0, ycut: 2.0, res: 256 });
    }

    #[test]
    fn rejects_unknown_keys_and_bad_tolerances() {
        assert!(RunConfig::parse("sede = 1").is_err());
        assert!(RunConfig::parse("[tolerances]\nquad = 0.0").is_err());
        assert!(RunConfig::parse("[tolerances]\nquad = -1e-3").is_err());
        assert!(RunConfig::parse("[tolerances]\nfoo = 1e-3").is_err());
    }
}
