//! Merge moment-table CSVs into one plot-ready long-format table with
//! analytic reference columns (the exact finite-N moment formula for
//! `mu`, the closed form for `f` at n = 1) and densely sampled analytic
//! curves alongside the Monte Carlo points.

use std::fmt::Write as _;
use std::path::Path;

use ubmlab::heat;
use ubmlab::process::SymmetryPair;

use crate::config::SuiteConfig;
use crate::report::MOMENT_CSV_HEADER;
use crate::{fmt_f64, CliError};

pub const TABLE_CSV_HEADER: &str =
    "quantity,n,N,t,mean_re,mean_im,se,M,seed,analytic_mu,analytic_f1";

#[derive(Debug, Clone)]
pub struct MomentRow {
    pub quantity: String,
    pub n: usize,
    pub n_dim: usize,
    pub t: f64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub se: f64,
    pub samples: usize,
    pub seed: u64,
}

fn parse_err(path: &Path, line_no: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}:{line_no}: {msg}", path.display()))
}

/// Parse one moment CSV produced by the simulate subcommand.
pub fn read_moment_csv(path: &Path) -> Result<Vec<MomentRow>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == MOMENT_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(parse_err(path, 1, format!("unexpected header {header:?}")))
        }
        None => return Err(parse_err(path, 1, "empty file")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(parse_err(path, line_no, format!("expected 9 fields, got {}", fields.len())));
        }
        let field = |i: usize, what: &str| -> Result<f64, CliError> {
            fields[i]
                .parse()
                .map_err(|e| parse_err(path, line_no, format!("bad {what}: {e}")))
        };
        rows.push(MomentRow {
            quantity: fields[0].to_string(),
            n: fields[1]
                .parse()
                .map_err(|e| parse_err(path, line_no, format!("bad n: {e}")))?,
            n_dim: fields[2]
                .parse()
                .map_err(|e| parse_err(path, line_no, format!("bad N: {e}")))?,
            t: field(3, "t")?,
            mean_re: field(4, "mean_re")?,
            mean_im: field(5, "mean_im")?,
            se: field(6, "se")?,
            samples: fields[7]
                .parse()
                .map_err(|e| parse_err(path, line_no, format!("bad M: {e}")))?,
            seed: fields[8]
                .parse()
                .map_err(|e| parse_err(path, line_no, format!("bad seed: {e}")))?,
        });
    }
    Ok(rows)
}

fn analytic_mu(n: usize, n_dim: usize, t: f64) -> Option<f64> {
    heat::biane_moment(n, n_dim, t).ok()
}

/// Build the merged table. `curve_points` dense samples of each analytic
/// curve over `[0, t_max]` are appended after the Monte Carlo rows.
pub fn build_table(
    cfg: &SuiteConfig,
    inputs: &[Vec<MomentRow>],
    curve_points: usize,
) -> Result<String, CliError> {
    let pair: SymmetryPair = cfg.fixture_pair()?;
    let mut out = String::from(TABLE_CSV_HEADER);
    out.push('\n');
    let mut mu_orders: Vec<(usize, usize)> = Vec::new();
    let mut has_f1 = false;
    for rows in inputs {
        for r in rows {
            let mu_col = if r.quantity == "mu" {
                if !mu_orders.contains(&(r.n, r.n_dim)) {
                    mu_orders.push((r.n, r.n_dim));
                }
                analytic_mu(r.n, r.n_dim, r.t)
            } else {
                None
            };
            let f1_col = if r.quantity == "f" && r.n == 1 {
                has_f1 = true;
                Some(heat::f1_closed_form(&pair, r.t))
            } else {
                None
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.quantity,
                r.n,
                r.n_dim,
                fmt_f64(r.t),
                fmt_f64(r.mean_re),
                fmt_f64(r.mean_im),
                fmt_f64(r.se),
                r.samples,
                r.seed,
                mu_col.map(fmt_f64).unwrap_or_default(),
                f1_col.map(fmt_f64).unwrap_or_default(),
            );
        }
    }
    // dense analytic curves for plotting
    let ts: Vec<f64> = (0..curve_points)
        .map(|k| cfg.t_max * k as f64 / (curve_points.max(2) - 1) as f64)
        .collect();
    for &(n, n_dim) in &mu_orders {
        for &t in &ts {
            if let Some(v) = analytic_mu(n, n_dim, t) {
                let _ = writeln!(
                    out,
                    "mu-analytic,{n},{n_dim},{},{},{},{},0,{},{},",
                    fmt_f64(t),
                    fmt_f64(v),
                    fmt_f64(0.0),
                    fmt_f64(0.0),
                    cfg.master_seed,
                    fmt_f64(v),
                );
            }
        }
    }
    if has_f1 {
        for &t in &ts {
            let v = heat::f1_closed_form(&pair, t);
            let _ = writeln!(
                out,
                "f1-analytic,1,{},{},{},{},{},0,{},,{}",
                cfg.n_dim,
                fmt_f64(t),
                fmt_f64(v),
                fmt_f64(0.0),
                fmt_f64(0.0),
                cfg.master_seed,
                fmt_f64(v),
            );
        }
    }
    Ok(out)
}
