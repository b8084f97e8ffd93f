//! Moment-table CSV output and the JSON verification report. Both are
//! byte-deterministic for a given (config, seed): runtimes and wall-clock
//! data go to the human-readable summary only.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use ubmlab::estimate::{self, Estimate};
use ubmlab::verify::{self, Verdict};

use crate::config::{Quantity, SuiteConfig};
use crate::{fmt_f64, CliError};

pub const MOMENT_CSV_HEADER: &str = "quantity,n,N,t,mean_re,mean_im,se,M,seed";

/// One line of the moment table.
pub fn moment_csv_row(
    quantity: &str,
    n: usize,
    n_dim: usize,
    t: f64,
    est: &Estimate,
    seed: u64,
) -> String {
    format!(
        "{quantity},{n},{n_dim},{},{},{},{},{},{seed}",
        fmt_f64(t),
        fmt_f64(est.mean.re),
        fmt_f64(est.mean.im),
        fmt_f64(est.se()),
        est.samples,
    )
}

/// Compute all requested moment estimates and render the CSV (LF line
/// endings, header always present).
pub fn simulate_csv(cfg: &SuiteConfig) -> Result<String, CliError> {
    let mc = cfg.mc_config()?;
    let mut out = String::from(MOMENT_CSV_HEADER);
    out.push('\n');
    for req in &cfg.moments {
        for &n in &req.orders {
            for &t in &req.times {
                let est = match req.quantity {
                    Quantity::F => estimate::estimate_f(n, t, &mc)?,
                    Quantity::Nu => estimate::estimate_nu(n, t, &mc)?,
                    Quantity::Mu => estimate::estimate_mu(n, t, &mc)?,
                };
                let _ = writeln!(
                    out,
                    "{}",
                    moment_csv_row(req.quantity.label(), n, mc.n_dim, t, &est, mc.master_seed)
                );
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub name: String,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub lhs_se: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub rhs_se: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl From<&Verdict> for VerdictRecord {
    fn from(v: &Verdict) -> Self {
        Self {
            name: v.name.clone(),
            lhs_re: v.lhs.re,
            lhs_im: v.lhs.im,
            lhs_se: v.lhs_se,
            rhs_re: v.rhs.re,
            rhs_im: v.rhs.im,
            rhs_se: v.rhs_se,
            residual: v.residual,
            tolerance: v.tolerance,
            pass: v.pass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: SuiteConfig,
    pub verdicts: Vec<VerdictRecord>,
    pub pass: bool,
}

/// Run the configured checks. Returns the report plus the verdicts (the
/// latter keep their runtimes for the human summary).
pub fn run_verification(
    cfg: &SuiteConfig,
    corrupt_parity_constant: bool,
) -> Result<(RunReport, Vec<Verdict>), CliError> {
    if cfg.checks.is_empty() {
        return Err(CliError::Config("no checks configured".to_string()));
    }
    let mc = cfg.mc_config()?;
    let mut opts = cfg.verify_options();
    opts.corrupt_parity_constant = corrupt_parity_constant;
    let verdicts = verify::run_suite(&cfg.checks, &mc, &opts)?;
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        verdicts: verdicts.iter().map(VerdictRecord::from).collect(),
        pass: verify::suite_passes(&verdicts),
    };
    Ok((report, verdicts))
}

/// One human-readable line per verdict, plus a suite summary line.
pub fn human_summary(verdicts: &[Verdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        let _ = writeln!(
            out,
            "{} {:<48} residual {:.3e}  tolerance {:.3e}  ({:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.residual,
            v.tolerance,
            v.runtime_secs,
        );
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    let _ = writeln!(
        out,
        "suite: {} ({} verdicts, {} failed)",
        if failed == 0 { "PASS" } else { "FAIL" },
        verdicts.len(),
        failed,
    );
    out
}
