// SPDX-License-Identifier: Apache-2.0

//! Campaign configuration file.
//!
//! ```toml
//! seeds = "seeds"
//! grammars = "grammars"        # optional; builtin grammars otherwise
//! out = "out"
//! solvers = "solvers.toml"     # optional
//!
//! [fuzz]
//! mutations_per_seed = 10
//! timeout_s = 10
//!
//! [foundry]
//! sample_num = 20
//! max_iter = 10
//! ```
//!
//! Relative paths resolve against the file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::difftest::{SolverCmd, SolverConfig, SolverConfigError};
use crate::foundry::{FoundryConfig, GenParams};
use crate::fuzzloop::FuzzConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{path}: `{key}` points at {target}, which does not exist")]
    Missing {
        path: PathBuf,
        key: &'static str,
        target: PathBuf,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Solvers(#[from] SolverConfigError),
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FoundrySection {
    sample_num: Option<usize>,
    max_iter: Option<usize>,
    sample_seed: Option<u64>,
    distill_with_lm: Option<bool>,
    temperature: Option<f64>,
    endpoint: Option<String>,
    model: Option<String>,
    token_env: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCampaign {
    seeds: Option<PathBuf>,
    grammars: Option<PathBuf>,
    out: Option<PathBuf>,
    solvers: Option<PathBuf>,
    #[serde(default)]
    fuzz: Option<FuzzConfig>,
    #[serde(default)]
    foundry: FoundrySection,
}

/// Remote language-model settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LmSettings {
    pub endpoint: String,
    pub model: String,
    pub token_env: String,
}

#[derive(Debug, Clone, Default)]
pub struct CampaignConfig {
    pub seeds: Option<PathBuf>,
    pub grammars: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub solvers: Vec<SolverCmd>,
    pub fuzz: FuzzConfig,
    pub foundry: FoundryConfig,
    pub lm: Option<LmSettings>,
}

impl CampaignConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, path)
    }

    /// Parses `text`, resolving relative paths against `base`. `origin`
    /// only labels errors.
    pub fn from_toml(text: &str, base: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let raw: RawCampaign = toml::from_str(text).map_err(|source| ConfigError::Toml {
            path: origin.to_path_buf(),
            source,
        })?;
        let resolve = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base.join(p) });
        let must_exist = |key: &'static str, p: &Option<PathBuf>| match p {
            Some(t) if !t.exists() => Err(ConfigError::Missing {
                path: origin.to_path_buf(),
                key,
                target: t.clone(),
            }),
            _ => Ok(()),
        };
        let seeds = resolve(raw.seeds);
        let grammars = resolve(raw.grammars);
        let solvers_path = resolve(raw.solvers);
        must_exist("seeds", &seeds)?;
        must_exist("grammars", &grammars)?;
        must_exist("solvers", &solvers_path)?;
        let solvers = match &solvers_path {
            Some(p) => SolverConfig::load(p)?,
            None => Vec::new(),
        };
        let out = resolve(raw.out);
        let mut fuzz = raw.fuzz.unwrap_or_default();
        if fuzz.out.is_none() {
            fuzz.out = out.clone();
        } else {
            fuzz.out = resolve(fuzz.out);
        }
        let invalid = |message: String| ConfigError::Invalid {
            path: origin.to_path_buf(),
            message,
        };
        fuzz.validate().map_err(|e| invalid(e.to_string()))?;

        let f = raw.foundry;
        let defaults = FoundryConfig::default();
        let foundry = FoundryConfig {
            sample_num: f.sample_num.unwrap_or(defaults.sample_num),
            max_iter: f.max_iter.unwrap_or(defaults.max_iter),
            solvers: solvers.clone(),
            sample_seed: f.sample_seed.unwrap_or(defaults.sample_seed),
            distill_with_lm: f.distill_with_lm.unwrap_or(false),
            params: GenParams {
                temperature: f.temperature.unwrap_or(defaults.params.temperature),
                ..defaults.params
            },
            retry: defaults.retry,
        };
        foundry.validate().map_err(|e| invalid(e.to_string()))?;
        let lm = match (f.endpoint, f.model) {
            (Some(endpoint), Some(model)) => Some(LmSettings {
                endpoint,
                model,
                token_env: f.token_env.unwrap_or_else(|| "SKELFUZZ_LM_TOKEN".into()),
            }),
            (None, None) => None,
            _ => {
                return Err(invalid(
                    "foundry.endpoint and foundry.model must be given together".into(),
                ))
            }
        };
        Ok(CampaignConfig {
            seeds,
            grammars,
            out,
            solvers,
            fuzz,
            foundry,
            lm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("seeds")).unwrap();
        let c = CampaignConfig::from_toml(
            "seeds = \"seeds\"\nout = \"out\"\n[fuzz]\nworkers = 2\n[foundry]\nmax_iter = 3\n",
            dir.path(),
            Path::new("c.toml"),
        )
        .unwrap();
        assert_eq!(c.seeds, Some(dir.path().join("seeds")));
        assert_eq!(c.fuzz.out, Some(dir.path().join("out")));
        assert_eq!(c.fuzz.workers, 2);
        assert_eq!(c.fuzz.mutations_per_seed, 10);
        assert_eq!(c.foundry.max_iter, 3);
        assert_eq!(c.foundry.sample_num, 20);
    }

    #[test]
    fn missing_path_and_bounds() {
        let dir = tempfile::tempdir().unwrap();
        let err = CampaignConfig::from_toml("seeds = \"nope\"", dir.path(), Path::new("c.toml")).unwrap_err();
        assert!(matches!(err, ConfigError::Missing { key: "seeds", .. }));
        let err = CampaignConfig::from_toml("[fuzz]\ntimeout_s = -1.0", dir.path(), Path::new("c.toml")).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { .. }));
        let err = CampaignConfig::from_toml("[foundry]\nsample_num = 0", dir.path(), Path::new("c.toml")).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { .. }));
        assert!(CampaignConfig::from_toml("bogus = 1", dir.path(), Path::new("c.toml")).is_err());
    }
}
