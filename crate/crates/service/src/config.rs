//! TOML configuration shared by `serve` and `simulate`.
//!
//! ```toml
//! [preference]
//! step = 0.05
//! epochs = 50
//! tol = 1e-6
//!
//! [coldstart]
//! k = 10
//! threshold = 0.5
//! weights = { country = 0.4, city = 0.2, job_skills = 0.4 }
//!
//! [session]
//! ttl_hours = 720
//! require_token = true
//!
//! [study]
//! n_learners = 23
//! min_recs = 17
//! max_recs = 20
//! noise_sd = 0.1
//! seed = 20240601
//! ```
//!
//! Every key is optional.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use oerec_core::preference::{ColdStartConfig, UpdateParams};

use crate::study::StudyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub ttl_hours: i64,
    /// Learner routes demand `Authorization: Bearer <token>` when set.
    pub require_token: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { ttl_hours: 720, require_token: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub preference: UpdateParams,
    pub coldstart: ColdStartConfig,
    pub session: SessionConfig,
    pub study: StudyConfig,
}

impl Config {
    pub fn validate(&self) -> oerec_core::Result<()> {
        self.preference.validate()?;
        self.coldstart.validate()?;
        if self.session.ttl_hours <= 0 {
            return Err(oerec_core::Error::Config("session.ttl_hours must be positive".into()));
        }
        self.study.validate()
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn nested_keys() {
        let c = Config::parse(
            "[preference]\nstep = 0.01\n[coldstart]\nk = 3\nweights = { country = 1.0, city = 0.0, job_skills = 0.0 }\n",
        )
        .unwrap();
        assert_eq!(c.preference.step, 0.01);
        assert_eq!(c.preference.epochs, UpdateParams::default().epochs);
        assert_eq!(c.coldstart.k, 3);
        assert_eq!(c.coldstart.weights.country, 1.0);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(Config::parse("[preference]\nstep = -1.0\n").is_err());
        assert!(Config::parse("[study]\nmin_recs = 5\nmax_recs = 2\n").is_err());
        assert!(Config::parse("[session]\nbogus = 1\n").is_err());
    }
}
