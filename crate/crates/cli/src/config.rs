//! Optional TOML settings file. Every key is optional:
//!
//! ```toml
//! seed = 7
//! out_dir = "results"
//!
//! [params]
//! b = 2.0
//! c = 1.5
//! beta = 3.0
//!
//! [grid]
//! t_min = 0.1
//! t_max = 5.0
//! points = 100
//!
//! [mle]
//! level = 0.95
//!
//! [mcmc]
//! n_iter = 100000
//! burn_in = 20000
//! thin = 20
//! proposal_scale = 0.1
//!
//! [prior]
//! b = [1.0, 0.001]
//! c = [1.0, 0.001]
//! beta = [1.0, 0.001]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub mle: MleSection,
    #[serde(default)]
    pub mcmc: McmcSection,
    #[serde(default)]
    pub prior: PriorSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleSection {
    pub level: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    pub n_iter: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub proposal_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub b: Option<[f64; 2]>,
    pub c: Option<[f64; 2]>,
    pub beta: Option<[f64; 2]>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Flag (or `KUMIW_SEED`, which clap folds into the flag) first, then the file, then the default.
    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(DEFAULT_SEED)
    }
}
