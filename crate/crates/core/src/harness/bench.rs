//! Wall-clock timing per method and sample count.
//!
//! Each (method, n_samples) pair solves trial 0 at the first SNR of the grid:
//! one discarded warm-up run, then `bench_repetitions` timed runs.

use std::io::Write;
use std::time::Instant;

use super::{stats, Experiment, Method};
use crate::error::Result;

pub const BENCH_SCHEMA: &str = "# isar-frand bench schema v1";
pub const BENCH_COLUMNS: &str = "method,n_samples,repetitions,median_seconds,variance,status";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub n_samples: usize,
    pub repetitions: usize,
    pub median_seconds: Option<f64>,
    pub variance: Option<f64>,
    pub status: String,
}

pub fn run_bench(exp: &Experiment) -> Result<Vec<BenchRow>> {
    let truth = exp.truth();
    let snr = exp.snr_grid[0];
    let mut rows = Vec::new();
    for &method in &exp.methods {
        for &k in &exp.sample_grid {
            let timed = exp.observe(&truth, k, snr, 0).and_then(|obs| {
                exp.reconstruct(method, &obs)?;
                (0..exp.bench_repetitions)
                    .map(|_| {
                        let start = Instant::now();
                        exp.reconstruct(method, &obs)?;
                        Ok(start.elapsed().as_secs_f64())
                    })
                    .collect::<Result<Vec<f64>>>()
            });
            rows.push(match timed {
                Ok(t) => BenchRow {
                    method,
                    n_samples: k,
                    repetitions: t.len(),
                    median_seconds: Some(stats::median(&t)),
                    variance: Some(stats::variance(&t)),
                    status: "ok".into(),
                },
                Err(e) => BenchRow {
                    method,
                    n_samples: k,
                    repetitions: 0,
                    median_seconds: None,
                    variance: None,
                    status: format!("error:{}", e.kind()),
                },
            });
        }
    }
    Ok(rows)
}

pub fn write_bench_csv(rows: &[BenchRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{BENCH_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_COLUMNS.split(','))?;
    for r in rows {
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            r.method.name().to_string(),
            r.n_samples.to_string(),
            r.repetitions.to_string(),
            num(r.median_seconds),
            num(r.variance),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn one_row_per_method_and_sample_count() {
        let mut cfg = ExperimentConfig::default();
        cfg.radar.n_angles = 5;
        cfg.radar.n_freqs = 5;
        cfg.solver.max_iters = 3;
        cfg.solver.reweight_rounds = 1;
        cfg.experiment.methods = vec![Method::Frand, Method::Sl0];
        cfg.experiment.samples = vec![5, 10, 15, 20, 25];
        let rows = run_bench(&Experiment::from_config(&cfg).unwrap()).unwrap();
        assert_eq!(rows.len(), 10);
        for r in &rows {
            assert_eq!(r.status, "ok");
            assert_eq!(r.repetitions, 5);
            assert!(r.median_seconds.unwrap() > 0.0);
            assert!(r.variance.unwrap() >= 0.0);
        }
        let mut buf = Vec::new();
        write_bench_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 12);
    }
}
