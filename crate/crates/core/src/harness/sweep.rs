//! Monte-Carlo sweeps over method × SNR × sample count × trial.
//!
//! CSV layout (schema v1):
//!
//! ```text
//! # isar-frand sweep schema v1
//! method,snr_db,n_samples,trial,mse_data,mse_image,psnr_db,ssim,seconds,status
//! ```
//!
//! `mse_data` is on the complex data matrix, the other metrics on
//! max-normalised magnitude images. Each cell ends with an aggregate row whose
//! `trial` is `mean` and whose metrics average the successful trials. The
//! `seconds` column is empty unless timing is enabled, which keeps reports
//! byte-reproducible by default. Failed trials keep their row with empty
//! metrics and a `error:<kind>` status.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use super::{stats, Experiment, Method};
use crate::error::Result;
use crate::imaging::{form_image, IsarImage};
use crate::metrics::{mse, mse_real, psnr_images, ssim_images, MetricReport, TrialMetrics};

pub const SWEEP_SCHEMA: &str = "# isar-frand sweep schema v1";
pub const SWEEP_COLUMNS: &str = "method,snr_db,n_samples,trial,mse_data,mse_image,psnr_db,ssim,seconds,status";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub snr_db: f64,
    pub n_samples: usize,
    /// `None` marks an aggregate row.
    pub trial: Option<usize>,
    pub metrics: Option<TrialMetrics>,
    pub seconds: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn trial_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.trial.is_some())
    }

    pub fn aggregate_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.trial.is_none())
    }

    /// Per-trial metrics of one cell, in trial order; failed trials are skipped.
    pub fn cell(&self, method: Method, snr_db: f64, n_samples: usize) -> Vec<TrialMetrics> {
        self.trial_rows()
            .filter(|r| r.method == method && r.snr_db == snr_db && r.n_samples == n_samples)
            .filter_map(|r| r.metrics)
            .collect()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut out = out;
        writeln!(out, "{SWEEP_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SWEEP_COLUMNS.split(','))?;
        for r in &self.rows {
            let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let m = r.metrics;
            w.write_record([
                r.method.name().to_string(),
                r.snr_db.to_string(),
                r.n_samples.to_string(),
                r.trial.map(|t| t.to_string()).unwrap_or_else(|| "mean".into()),
                num(m.map(|m| m.mse_data)),
                num(m.map(|m| m.mse_image)),
                num(m.map(|m| m.psnr_db)),
                num(m.map(|m| m.ssim)),
                num(r.seconds),
                r.status.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Metrics of `estimate` against the clean data and its image.
pub fn evaluate(
    exp: &Experiment,
    truth: &[crate::linalg::C64],
    truth_image: &IsarImage,
    estimate: &[crate::linalg::C64],
) -> Result<TrialMetrics> {
    let image = form_image(estimate, &exp.params, exp.zero_pad)?;
    Ok(TrialMetrics {
        mse_data: mse(truth, estimate)?,
        mse_image: mse_real(truth_image.pixels(), image.pixels())?,
        psnr_db: psnr_images(truth_image, &image)?,
        ssim: ssim_images(truth_image, &image)?,
    })
}

pub fn run_sweep(exp: &Experiment) -> Result<SweepReport> {
    let truth = exp.truth();
    let truth_image = form_image(truth.as_vec(), &exp.params, exp.zero_pad)?;

    let mut cells = Vec::new();
    for &method in &exp.methods {
        for &snr in &exp.snr_grid {
            for &k in &exp.sample_grid {
                cells.push((method, snr, k));
            }
        }
    }
    let jobs: Vec<(Method, f64, usize, usize)> = cells
        .iter()
        .flat_map(|&(m, s, k)| (0..exp.trials).map(move |t| (m, s, k, t)))
        .collect();

    let results: Vec<(Result<TrialMetrics>, f64)> = super::with_workers(exp.workers, || {
        jobs.par_iter()
            .map(|&(method, snr, k, trial)| {
                let start = Instant::now();
                let out = exp
                    .observe(&truth, k, snr, trial)
                    .and_then(|obs| exp.reconstruct(method, &obs))
                    .and_then(|est| evaluate(exp, truth.as_vec(), &truth_image, &est));
                (out, start.elapsed().as_secs_f64())
            })
            .collect()
    })?;

    let mut rows = Vec::with_capacity(jobs.len() + cells.len());
    for (c, &(method, snr_db, n_samples)) in cells.iter().enumerate() {
        let chunk = &results[c * exp.trials..(c + 1) * exp.trials];
        let mut ok = Vec::new();
        let mut secs = Vec::new();
        for (trial, (res, elapsed)) in chunk.iter().enumerate() {
            let (metrics, status) = match res {
                Ok(m) => {
                    ok.push(*m);
                    (Some(*m), "ok".to_string())
                }
                Err(e) => (None, format!("error:{}", e.kind())),
            };
            secs.push(*elapsed);
            rows.push(SweepRow {
                method,
                snr_db,
                n_samples,
                trial: Some(trial),
                metrics,
                seconds: exp.timing.then_some(*elapsed),
                status,
            });
        }
        let agg = MetricReport::aggregate(&ok, false).map(|r| TrialMetrics {
            mse_data: r.mse_data,
            mse_image: r.mse_image,
            psnr_db: r.psnr_db,
            ssim: r.ssim,
        });
        let failed = exp.trials - ok.len();
        rows.push(SweepRow {
            method,
            snr_db,
            n_samples,
            trial: None,
            metrics: agg,
            seconds: exp.timing.then(|| stats::mean(&secs)),
            status: if failed == 0 { "ok".into() } else { format!("failed:{failed}") },
        });
    }
    Ok(SweepReport { rows })
}
