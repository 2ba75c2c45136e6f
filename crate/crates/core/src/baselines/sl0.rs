//! Smoothed-ℓ0 recovery on an oversampled 2D DFT grid.
//!
//! The dictionary atom for grid point `(k1, k2)` is
//! `exp(j 2π (k1 n / G1 + k2 m / G2))` with `G1 = g·N`, `G2 = g·M`. Because
//! `|n − n'| < G1` and `|m − m'| < G2`, the rows of the dictionary are
//! orthogonal with squared norm `G1·G2`, on any subset of rows. The
//! pseudo-inverse is therefore `A* / (G1 G2)` and projection onto
//! `{s : A s = z}` costs two transforms.

use std::f64::consts::PI;

use super::{Baseline, BaselineConfig};
use crate::error::Result;
use crate::linalg::{CMatrix, C64, ZERO};
use crate::model::{ApertureMask, DataMatrix};

/// State of the σ schedule after the inner steps at one level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sl0Level {
    pub sigma: f64,
    /// Number of coefficients with `|s| > sigma`.
    pub above: usize,
}

#[derive(Clone, Debug)]
pub struct Sl0Result {
    /// `G1 × G2` grid of coefficients.
    pub coefficients: CMatrix,
    pub r_hat: Vec<C64>,
    pub trace: Vec<Sl0Level>,
}

struct Dictionary {
    f1: CMatrix,
    f2t: CMatrix,
    f1h: CMatrix,
    f2c: CMatrix,
    scale: f64,
}

impl Dictionary {
    fn new(n: usize, m: usize, g1: usize, g2: usize) -> Self {
        let f1 = CMatrix::from_fn(n, g1, |i, k| C64::from_polar(1.0, 2.0 * PI * (k * i) as f64 / g1 as f64));
        let f2 = CMatrix::from_fn(m, g2, |i, k| C64::from_polar(1.0, 2.0 * PI * (k * i) as f64 / g2 as f64));
        Self { f1h: f1.adjoint(), f2t: f2.transpose(), f2c: f2.adjoint().transpose(), f1, scale: (g1 * g2) as f64 }
    }

    /// Full-aperture synthesis `F1 S F2ᵀ`.
    fn synth(&self, s: &CMatrix) -> CMatrix {
        self.f1.matmul(&s.matmul(&self.f2t).expect("dims")).expect("dims")
    }

    /// Adjoint `F1* Y conj(F2)`.
    fn analyse(&self, y: &CMatrix) -> CMatrix {
        self.f1h.matmul(&y.matmul(&self.f2c).expect("dims")).expect("dims")
    }

    /// `s − A⁺(A s − z)` with rows restricted to `observed`.
    fn project(&self, s: &CMatrix, z: &[C64], observed: &[usize]) -> CMatrix {
        let full = self.synth(s);
        let mut resid = CMatrix::zeros(full.rows(), full.cols());
        for &i in observed {
            resid.as_mut_slice()[i] = full.as_slice()[i] - z[i];
        }
        s - &self.analyse(&resid).scale(1.0 / self.scale)
    }
}

pub fn sl0(z_obs: &DataMatrix, mask: &ApertureMask, cfg: &BaselineConfig) -> Result<Sl0Result> {
    cfg.validate(Baseline::Sl0)?;
    let z = z_obs.masked(mask)?;
    let (n, m) = (z.n_angles(), z.n_freqs());
    let (g1, g2) = (cfg.sl0_grid_factor * n, cfg.sl0_grid_factor * m);
    let dict = Dictionary::new(n, m, g1, g2);

    let mut s = dict.analyse(z.as_matrix()).scale(1.0 / dict.scale);
    let peak = s.as_slice().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut trace = Vec::new();
    if peak == 0.0 {
        return Ok(Sl0Result { coefficients: s, r_hat: vec![ZERO; n * m], trace });
    }
    let sigma_min = cfg.sl0_sigma_min_ratio * 2.0 * peak;
    let mut sigma = 2.0 * peak;
    while sigma >= sigma_min {
        for _ in 0..cfg.sl0_inner_steps {
            let inv = 1.0 / (2.0 * sigma * sigma);
            for v in s.as_mut_slice() {
                *v -= *v * (cfg.sl0_step * (-v.norm_sqr() * inv).exp());
            }
            s = dict.project(&s, z.as_vec(), mask.observed());
        }
        let above = s.as_slice().iter().filter(|v| v.norm() > sigma).count();
        trace.push(Sl0Level { sigma, above });
        sigma *= cfg.sl0_sigma_decay;
    }
    let r_hat = dict.synth(&s).into_vec();
    Ok(Sl0Result { coefficients: s, r_hat, trace })
}
