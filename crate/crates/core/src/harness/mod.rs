//! Experiment orchestration: method dispatch, Monte-Carlo sweeps, timing
//! benchmarks and the command line.
//!
//! Trial `t` of a sweep uses seed `base_seed + t` for both its aperture mask
//! and its noise (on separate RNG streams). The same trial therefore sees the
//! same mask and noise shape at every SNR and for every method.

pub mod bench;
pub mod cli;
pub mod stats;
pub mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{Baseline, BaselineConfig};
use crate::config::{ExperimentConfig, LambdaMode, LambdaSpec};
use crate::error::{Error, Result};
use crate::frand::{select_lambda, solve, SolverConfig};
use crate::linalg::C64;
use crate::model::{
    add_awgn, noise_variance, observed_power, random_mask, synthesize_echo, ApertureMask, DataMatrix,
    RadarParams, Scene,
};

pub use bench::{run_bench, BenchRow};
pub use sweep::{run_sweep, SweepReport, SweepRow};

/// Relative λ floor used when the data carry no noise.
pub const NOISELESS_LAMBDA_FLOOR: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Frand,
    Music,
    Cadzow,
    Sl0,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Frand, Method::Music, Method::Cadzow, Method::Sl0];

    pub fn name(self) -> &'static str {
        match self {
            Method::Frand => "frand",
            Method::Music => "music",
            Method::Cadzow => "cadzow",
            Method::Sl0 => "sl0",
        }
    }

    pub fn baseline(self) -> Option<Baseline> {
        match self {
            Method::Frand => None,
            Method::Music => Some(Baseline::Music),
            Method::Cadzow => Some(Baseline::Cadzow),
            Method::Sl0 => Some(Baseline::Sl0),
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.map(Method::name).join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}`; valid methods: {}", Self::valid_names()))
    }
}

/// Fully resolved experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub params: RadarParams,
    pub scene: Scene,
    pub methods: Vec<Method>,
    pub snr_grid: Vec<f64>,
    pub sample_grid: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub workers: usize,
    pub timing: bool,
    pub bench_repetitions: usize,
    pub zero_pad: usize,
    pub solver: SolverConfig,
    pub lambda: LambdaSpec,
    pub baselines: BaselineConfig,
}

impl Experiment {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let e = &cfg.experiment;
        Ok(Self {
            params: cfg.radar.params()?,
            scene: cfg.scene.scene()?,
            methods: e.methods.clone(),
            snr_grid: e.snr_db.clone(),
            sample_grid: e.samples.clone(),
            trials: e.trials,
            base_seed: e.base_seed,
            workers: e.workers,
            timing: e.timing,
            bench_repetitions: e.bench_repetitions,
            zero_pad: e.zero_pad,
            solver: cfg.solver.clone(),
            lambda: cfg.lambda.clone(),
            baselines: cfg.baselines.clone(),
        })
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }

    /// Clean full-aperture echo of the scene.
    pub fn truth(&self) -> DataMatrix {
        synthesize_echo(&self.scene, &self.params)
    }

    /// Mask and noisy observation for one trial.
    pub fn observe(&self, truth: &DataMatrix, n_samples: usize, snr_db: f64, trial: usize) -> Result<Observation> {
        let seed = self.trial_seed(trial);
        let mask = random_mask(self.params.nm(), n_samples, seed)?;
        let z = add_awgn(truth, &mask, snr_db, seed)?;
        let noise_std = noise_variance(truth, &mask, snr_db)?.sqrt();
        Ok(Observation { z, mask, noise_std })
    }

    /// Solver settings with λ resolved for the given noise level.
    pub fn solver_for(&self, obs: &Observation) -> Result<SolverConfig> {
        resolve_solver(&self.solver, &self.lambda, obs)
    }

    /// Runs `method` on one observation and returns the full-length estimate.
    pub fn reconstruct(&self, method: Method, obs: &Observation) -> Result<Vec<C64>> {
        reconstruct(method, obs, &self.params, &self.solver_for(obs)?, &self.baselines)
    }
}

/// Masked data together with the noise level it was generated with.
#[derive(Clone, Debug)]
pub struct Observation {
    pub z: DataMatrix,
    pub mask: ApertureMask,
    /// Standard deviation of the complex noise; 0 for noiseless data.
    pub noise_std: f64,
}

pub fn resolve_solver(base: &SolverConfig, rule: &LambdaSpec, obs: &Observation) -> Result<SolverConfig> {
    let mut cfg = base.clone();
    if rule.mode == LambdaMode::Noise {
        let nm = obs.z.nm();
        let calibration = rule.calibration.unwrap_or(1.0 / (nm as f64).sqrt());
        let floor = NOISELESS_LAMBDA_FLOOR * observed_power(&obs.z, &obs.mask)?.sqrt();
        cfg.lambda = select_lambda(obs.noise_std, nm, calibration).max(floor);
        if !(cfg.lambda > 0.0) {
            return Err(Error::Parameter("cannot pick lambda for all-zero noiseless data".into()));
        }
    }
    Ok(cfg)
}

pub fn reconstruct(
    method: Method,
    obs: &Observation,
    params: &RadarParams,
    solver: &SolverConfig,
    baselines: &BaselineConfig,
) -> Result<Vec<C64>> {
    match method {
        Method::Frand => Ok(solve(&obs.z, &obs.mask, solver)?.r_hat),
        _ => reconstruct_baseline(method, obs, params, baselines),
    }
}

#[cfg(feature = "baselines")]
fn reconstruct_baseline(
    method: Method,
    obs: &Observation,
    params: &RadarParams,
    cfg: &BaselineConfig,
) -> Result<Vec<C64>> {
    use crate::baselines::{cadzow, music2d, sl0};
    Ok(match method {
        Method::Music => music2d(&obs.z, &obs.mask, params, cfg)?.r_hat,
        Method::Cadzow => cadzow(&obs.z, &obs.mask, cfg)?.r_hat,
        Method::Sl0 => sl0(&obs.z, &obs.mask, cfg)?.r_hat,
        Method::Frand => unreachable!("handled by the caller"),
    })
}

#[cfg(not(feature = "baselines"))]
fn reconstruct_baseline(method: Method, _: &Observation, _: &RadarParams, _: &BaselineConfig) -> Result<Vec<C64>> {
    Err(Error::Parameter(format!("`{method}` needs the `baselines` feature")))
}

/// Runs `f` on a pool of `workers` threads (0 means the rayon default).
pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        let err = "fft".parse::<Method>().unwrap_err();
        assert!(err.contains("frand, music, cadzow, sl0"));
    }

    #[test]
    fn lambda_follows_noise_and_floors_when_noiseless() {
        let exp = Experiment::from_config(&ExperimentConfig::default()).unwrap();
        let truth = exp.truth();
        let noisy = exp.observe(&truth, 79, 0.0, 0).unwrap();
        let clean = exp.observe(&truth, 79, f64::INFINITY, 0).unwrap();
        assert_eq!(clean.noise_std, 0.0);
        let ln = exp.solver_for(&noisy).unwrap().lambda;
        let lc = exp.solver_for(&clean).unwrap().lambda;
        let want = noisy.noise_std * (256f64.ln()).sqrt();
        assert!((ln - want).abs() < 1e-12 * want);
        assert!(lc > 0.0 && lc < 1e-3 * ln);
    }

    #[test]
    fn same_trial_shares_mask_across_snr() {
        let exp = Experiment::from_config(&ExperimentConfig::default()).unwrap();
        let truth = exp.truth();
        let a = exp.observe(&truth, 50, -10.0, 3).unwrap();
        let b = exp.observe(&truth, 50, 10.0, 3).unwrap();
        assert_eq!(a.mask, b.mask);
        assert_ne!(a.mask, exp.observe(&truth, 50, 10.0, 4).unwrap().mask);
    }
}
