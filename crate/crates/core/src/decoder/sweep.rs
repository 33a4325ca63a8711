use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{DecodeConfig, Omega};
use super::rewrite::rewrite;
use super::step::Providers;
use crate::error::{Error, Result};

/// Parses `"0,0.5,1x0,1"` into the `(λ_pos, λ_neg)` product grid, λ_pos
/// varying slowest.
pub fn parse_grid(spec: &str) -> Result<Vec<(f64, f64)>> {
    let bad = |why: &str| Error::invalid(format!("malformed grid {spec:?}: {why}"));
    let (pos, neg) = spec.split_once('x').ok_or_else(|| bad("expected <pos values>x<neg values>"))?;
    let values = |part: &str| -> Result<Vec<f64>> {
        part.split(',')
            .map(|v| {
                let x: f64 = v.trim().parse().map_err(|_| bad(&format!("{v:?} is not a number")))?;
                if !(x.is_finite() && x >= 0.0) {
                    return Err(bad("weights must be non-negative"));
                }
                Ok(x)
            })
            .collect()
    };
    let (pos, neg) = (values(pos)?, values(neg)?);
    Ok(pos.iter().flat_map(|&p| neg.iter().map(move |&n| (p, n))).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda_pos: f64,
    pub lambda_neg: f64,
    pub mean_clickbait: Option<f64>,
    pub mean_target_attr: Option<f64>,
    pub mean_fidelity: Option<f64>,
    /// Headlines rewritten successfully.
    pub n: usize,
    pub failures: usize,
}

impl SweepRow {
    pub fn is_partial(&self) -> bool {
        self.failures > 0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_CSV_HEADER: &str = "lambda_pos,lambda_neg,mean_clickbait,mean_target_attr,mean_fidelity,n,failures";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.lambda_pos,
            self.lambda_neg,
            opt(self.mean_clickbait),
            opt(self.mean_target_attr),
            opt(self.mean_fidelity),
            self.n,
            self.failures
        )
    }
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SWEEP_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.csv_line());
        }
        out
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Rewrites every headline at one grid cell. `base` supplies everything
/// except the two weights and ω; headline `i` is decoded with seed
/// `base.seed + i`, so every cell sees the same random streams.
pub fn sweep_cell(
    headlines: &[String],
    (lambda_pos, lambda_neg): (f64, f64),
    omega: Omega,
    base: &DecodeConfig,
    providers: Providers<'_>,
) -> SweepRow {
    let config = DecodeConfig {
        lambda_pos,
        lambda_neg,
        omega,
        ..base.clone()
    };
    let mut cb = Vec::new();
    let mut target = Vec::new();
    let mut fid = Vec::new();
    let mut failures = 0;
    for (i, h) in headlines.iter().enumerate() {
        let config = DecodeConfig {
            seed: base.seed.wrapping_add(i as u64),
            ..config.clone()
        };
        match rewrite(h, &config, providers) {
            Ok(r) => {
                cb.push(r.clickbait_score);
                fid.push(r.fidelity);
                if let Some(t) = r.target_score() {
                    target.push(t);
                }
            }
            Err(_) => failures += 1,
        }
    }
    SweepRow {
        lambda_pos,
        lambda_neg,
        mean_clickbait: mean(&cb),
        mean_target_attr: mean(&target),
        mean_fidelity: mean(&fid),
        n: cb.len(),
        failures,
    }
}

/// Runs every grid cell, cells in parallel, rows in grid order.
pub fn sweep(
    headlines: &[String],
    grid: &[(f64, f64)],
    omega: Omega,
    base: &DecodeConfig,
    providers: Providers<'_>,
) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("sweep grid"));
    }
    if headlines.is_empty() {
        return Err(Error::EmptyInput("sweep headlines"));
    }
    base.validate()?;
    let rows = std::thread::scope(|s| {
        let handles: Vec<_> = grid
            .iter()
            .map(|&cell| s.spawn(move || sweep_cell(headlines, cell, omega, base, providers)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    Ok(SweepReport { rows })
}
