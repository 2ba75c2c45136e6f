//! Comparison reconstructors: 2D MUSIC, Cadzow denoising and SL0.
//!
//! Each takes the masked observation and returns a full-length estimate
//! `r_hat` in the same flat layout as [`SolveResult::r_hat`](crate::frand::SolveResult),
//! so callers can swap methods freely through [`Estimate`].

#[cfg(feature = "baselines")]
pub mod cadzow;
#[cfg(feature = "baselines")]
pub mod music;
#[cfg(feature = "baselines")]
pub mod sl0;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::frand::SolveResult;
use crate::linalg::C64;

#[cfg(feature = "baselines")]
pub use cadzow::{cadzow, CadzowResult};
#[cfg(feature = "baselines")]
pub use music::{music2d, music_pseudospectrum, MusicResult, Pseudospectrum};
#[cfg(feature = "baselines")]
pub use sl0::{sl0, Sl0Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Music,
    Cadzow,
    Sl0,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Number of scatterers assumed by MUSIC and Cadzow.
    pub model_order: usize,
    /// Pseudospectrum grid points per frequency axis.
    pub music_grid: usize,
    pub cadzow_iters: usize,
    pub sl0_sigma_decay: f64,
    pub sl0_inner_steps: usize,
    pub sl0_grid_factor: usize,
    pub sl0_step: f64,
    /// The σ schedule stops once `σ < sl0_sigma_min_ratio · σ_0`.
    pub sl0_sigma_min_ratio: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            model_order: 3,
            music_grid: 128,
            cadzow_iters: 20,
            sl0_sigma_decay: 0.5,
            sl0_inner_steps: 10,
            sl0_grid_factor: 2,
            sl0_step: 2.0,
            sl0_sigma_min_ratio: 1e-3,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self, method: Baseline) -> Result<()> {
        match method {
            Baseline::Music => {
                if self.music_grid < 2 {
                    return param("music_grid must be at least 2");
                }
            }
            Baseline::Cadzow => {
                if self.cadzow_iters == 0 {
                    return param("cadzow_iters must be at least 1");
                }
            }
            Baseline::Sl0 => {
                if !(self.sl0_sigma_decay > 0.0 && self.sl0_sigma_decay < 1.0) {
                    return param("sl0_sigma_decay must lie in (0, 1)");
                }
                if self.sl0_grid_factor == 0 {
                    return param("sl0_grid_factor must be at least 1");
                }
                if self.sl0_inner_steps == 0 {
                    return param("sl0_inner_steps must be at least 1");
                }
                if !(self.sl0_step > 0.0 && self.sl0_step.is_finite()) {
                    return param("sl0_step must be positive");
                }
                if !(self.sl0_sigma_min_ratio > 0.0 && self.sl0_sigma_min_ratio < 1.0) {
                    return param("sl0_sigma_min_ratio must lie in (0, 1)");
                }
            }
        }
        Ok(())
    }
}

/// Anything that carries a completed data estimate.
pub trait Estimate {
    /// Flat `N·M` estimate, angle-major.
    fn r_hat(&self) -> &[C64];
}

impl Estimate for SolveResult {
    fn r_hat(&self) -> &[C64] {
        &self.r_hat
    }
}

#[cfg(feature = "baselines")]
impl Estimate for MusicResult {
    fn r_hat(&self) -> &[C64] {
        &self.r_hat
    }
}

#[cfg(feature = "baselines")]
impl Estimate for CadzowResult {
    fn r_hat(&self) -> &[C64] {
        &self.r_hat
    }
}

#[cfg(feature = "baselines")]
impl Estimate for Sl0Result {
    fn r_hat(&self) -> &[C64] {
        &self.r_hat
    }
}

#[cfg(all(test, feature = "baselines"))]
mod tests {
    use super::*;
    use crate::frand::{solve, SolverConfig};
    use crate::model::{random_mask, synthesize_echo, RadarParams, Scatterer, Scene};

    fn length_of(e: &impl Estimate) -> usize {
        e.r_hat().len()
    }

    #[test]
    fn every_method_shares_the_estimate_contract() {
        let params = RadarParams::square_cells(6, 6, 10e9, 500e6).unwrap();
        let scene = Scene::new(vec![Scatterer { x: 0.5, y: -0.4, sigma: 1.0 }]).unwrap();
        let z = synthesize_echo(&scene, &params);
        let mask = random_mask(36, 30, 1).unwrap();
        let cfg = BaselineConfig { model_order: 1, ..Default::default() };
        let f = solve(&z, &mask, &SolverConfig { lambda: 0.01, max_iters: 20, ..Default::default() }).unwrap();
        let mu = music2d(&z, &mask, &params, &cfg).unwrap();
        let ca = cadzow(&z, &mask, &cfg).unwrap();
        let s = sl0(&z, &mask, &cfg).unwrap();
        let lens = [length_of(&f), length_of(&mu), length_of(&ca), length_of(&s)];
        assert!(lens.iter().all(|&l| l == 36));
    }

    #[test]
    fn per_method_validation() {
        let bad = BaselineConfig { sl0_sigma_decay: 1.0, music_grid: 1, cadzow_iters: 0, ..Default::default() };
        for m in [Baseline::Music, Baseline::Cadzow, Baseline::Sl0] {
            assert!(bad.validate(m).is_err());
            assert!(BaselineConfig::default().validate(m).is_ok());
        }
    }
}
