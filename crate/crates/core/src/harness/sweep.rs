use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pipeline::{fmt_f64, run_pipeline, RunReport};
use crate::error::{Error, Result};
use crate::fit::{failure_scaling_fit, FitResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N0")]
    pub n0: usize,
    pub s: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub success_probability: f64,
    pub failure: f64,
    pub error_norm: f64,
    /// `‖U - Ũ‖²`, the right-hand side of `failure ≤ ‖U - Ũ‖²`.
    pub bound_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub fit: FitResult,
    /// Smallest coarse size in the sweep with failure below 1/2.
    pub threshold_n0: Option<usize>,
    #[serde(skip)]
    pub report: Option<RunReport>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "N0",
            "s",
            "N",
            "success_probability",
            "failure",
            "error_norm",
            "bound_rhs",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.n0.to_string(),
                r.s.to_string(),
                r.n.to_string(),
                fmt_f64(r.success_probability),
                fmt_f64(r.failure),
                fmt_f64(r.error_norm),
                fmt_f64(r.bound_rhs),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

/// Fits rows that were produced elsewhere, e.g. injected synthetic data.
pub fn fit_rows(rows: Vec<SweepRow>) -> Result<SweepResult> {
    for r in &rows {
        if r.failure > r.bound_rhs + 1e-12 {
            return Err(Error::invariant(
                "failure inequality",
                format!(
                    "N0 = {}, N = {}: failure {:e} > {:e}",
                    r.n0, r.n, r.failure, r.bound_rhs
                ),
            ));
        }
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.n0 as f64, r.failure)).collect();
    let fit = failure_scaling_fit(&samples)?;
    let threshold_n0 = rows
        .iter()
        .filter(|r| r.failure < 0.5)
        .map(|r| r.n0)
        .min();
    Ok(SweepResult {
        rows,
        fit,
        threshold_n0,
        report: None,
    })
}

/// Runs the pipeline over every coarse size and fits the failure decay.
pub fn sweep_and_fit(config: &ExperimentConfig) -> Result<SweepResult> {
    if config.n0_list.len() < 3 {
        return Err(Error::invalid("a sweep needs at least 3 coarse sizes"));
    }
    let report = run_pipeline(config)?;
    let rows = report
        .records
        .iter()
        .map(|r| SweepRow {
            n0: r.overlap.n0,
            s: r.overlap.s,
            n: r.overlap.n,
            success_probability: r.overlap.success_probability,
            failure: r.overlap.failure,
            error_norm: r.overlap.error_norm,
            bound_rhs: r.overlap.error_norm * r.overlap.error_norm,
        })
        .collect();
    let mut result = fit_rows(rows)?;
    result.report = Some(report);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injected_power_law() {
        let rows = [8usize, 16, 32, 64]
            .iter()
            .map(|&n0| {
                let failure = 5.0 / (n0 * n0) as f64;
                SweepRow {
                    n0,
                    s: 2,
                    n: 4 * n0,
                    success_probability: 1.0 - failure,
                    failure,
                    error_norm: (2.0 * failure).sqrt(),
                    bound_rhs: 2.0 * failure,
                }
            })
            .collect();
        let result = fit_rows(rows).unwrap();
        assert!((result.fit.slope + 2.0).abs() < 1e-9);
        assert_eq!(result.threshold_n0, Some(8));
    }

    #[test]
    fn injected_violation_is_reported() {
        let rows = vec![SweepRow {
            n0: 8,
            s: 1,
            n: 16,
            success_probability: 0.5,
            failure: 0.5,
            error_norm: 0.1,
            bound_rhs: 0.01,
        }];
        let err = fit_rows(rows).unwrap_err();
        assert!(err.to_string().contains("failure inequality"));
    }
}
