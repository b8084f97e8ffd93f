//! Suite configuration: one TOML file drives all subcommands. Unknown
//! keys are rejected and a parsed config serializes back to an
//! equivalent file (lossless round-trip).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use ubmlab::estimate::McConfig;
use ubmlab::process::SymmetryPair;
use ubmlab::sim::{Scheme, TimeGrid};
use ubmlab::verify::{CheckKind, VerifyOptions};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub n_dim: usize,
    pub paths: usize,
    pub t_max: f64,
    pub step: f64,
    pub scheme: Scheme,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub fixture: FixtureConfig,
    #[serde(default)]
    pub moments: Vec<MomentRequest>,
    #[serde(default)]
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub verify: VerifySettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureConfig {
    /// +1 eigenvalue multiplicities of the two symmetries.
    pub r_plus: usize,
    pub s_plus: usize,
    /// Conjugate both symmetries by a (seeded) Haar rotation instead of
    /// keeping them diagonal.
    #[serde(default)]
    pub rotate: bool,
    #[serde(default = "default_rotate_seed")]
    pub rotate_seed: u64,
}

fn default_rotate_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// E tr(A_t^n)
    F,
    /// E tr((R S U_t)^n)
    Nu,
    /// E tr(U_t^n)
    Mu,
}

impl Quantity {
    pub fn label(&self) -> &'static str {
        match self {
            Quantity::F => "f",
            Quantity::Nu => "nu",
            Quantity::Mu => "mu",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentRequest {
    pub quantity: Quantity,
    pub orders: Vec<usize>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    pub h_fd: f64,
    pub quad_nodes: usize,
    pub retry: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        let o = VerifyOptions::default();
        Self {
            h_fd: o.h_fd,
            quad_nodes: o.quad_nodes,
            retry: o.retry,
        }
    }
}

impl SuiteConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn fixture_pair(&self) -> Result<SymmetryPair, CliError> {
        let f = &self.fixture;
        let pair = if f.rotate {
            SymmetryPair::rotated(self.n_dim, f.r_plus, f.s_plus, f.rotate_seed)
        } else {
            SymmetryPair::diagonal(self.n_dim, f.r_plus, f.s_plus)
        };
        pair.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn mc_config(&self) -> Result<McConfig, CliError> {
        let grid = TimeGrid::with_step(self.t_max, self.step)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let cfg = McConfig {
            n_dim: self.n_dim,
            paths: self.paths,
            grid,
            scheme: self.scheme,
            master_seed: self.master_seed,
            fixture: self.fixture_pair()?,
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            h_fd: self.verify.h_fd,
            quad_nodes: self.verify.quad_nodes,
            retry: self.verify.retry,
            corrupt_parity_constant: false,
        }
    }

    /// Output directory after the environment override.
    pub fn resolved_out_dir(&self) -> PathBuf {
        match std::env::var_os("UBMLAB_OUTDIR") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
n_dim = 4
paths = 100
t_max = 1.2
step = 0.002
scheme = "geometric"
master_seed = 42
out_dir = "out"

[fixture]
r_plus = 3
s_plus = 1
rotate = false
rotate_seed = 1

[[moments]]
quantity = "f"
orders = [1, 2]
times = [0.25, 0.5]

[[checks]]
kind = "moment-ode"
n = 2
t = 0.5

[[checks]]
kind = "jacobi-binomial"
k = 1
t = 0.5

[verify]
h_fd = 0.02
quad_nodes = 11
retry = true
"#;

    #[test]
    fn round_trips_losslessly() {
        let cfg: SuiteConfig = toml::from_str(FULL).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        let back: SuiteConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = FULL.replace("master_seed = 42", "master_seed = 42\ntypo_key = 1");
        assert!(toml::from_str::<SuiteConfig>(&bad).is_err());
    }

    #[test]
    fn builds_mc_config() {
        let cfg: SuiteConfig = toml::from_str(FULL).unwrap();
        let mc = cfg.mc_config().unwrap();
        assert_eq!(mc.n_dim, 4);
        assert_eq!(mc.fixture.alpha, 0.5);
        assert_eq!(mc.fixture.beta, -0.5);
    }
}
