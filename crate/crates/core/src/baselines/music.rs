//! 2D MUSIC with spatial smoothing.
//!
//! Gaps in the aperture are zero-filled. The covariance is averaged over all
//! `⌈N/2⌉ × ⌈M/2⌉` subarrays, the top `K` eigenvectors span the signal
//! subspace, and the pseudospectrum `1 / ‖E_n* a(ω)‖²` is scanned on a
//! uniform grid over `[-π, π)²`.

use std::f64::consts::PI;

use super::{Baseline, BaselineConfig};
use crate::error::{dim, Error, Result};
use crate::imaging::top_peaks;
use crate::linalg::{hermitian_eig, CMatrix, C64, ZERO};
use crate::model::{fit_atom_coefficients, synthesize_atoms, ApertureMask, DataMatrix, RadarParams, ScattererEstimate};

/// Pseudospectrum samples; `values[i * grid + j]` is at `(omega(i), omega(j))`.
#[derive(Clone, Debug)]
pub struct Pseudospectrum {
    pub grid: usize,
    pub values: Vec<f64>,
}

impl Pseudospectrum {
    pub fn omega(&self, i: usize) -> f64 {
        -PI + 2.0 * PI * i as f64 / self.grid as f64
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid + j]
    }

    /// Grid indices of the `k` largest local maxima, wrapping at the edges.
    pub fn peaks(&self, k: usize) -> Vec<(usize, usize)> {
        top_peaks(&self.values, self.grid, self.grid, k)
    }
}

#[derive(Clone, Debug)]
pub struct MusicResult {
    pub estimates: Vec<ScattererEstimate>,
    pub frequencies: Vec<(f64, f64)>,
    pub r_hat: Vec<C64>,
}

pub fn subarray_dims(n: usize, m: usize) -> (usize, usize) {
    (n.div_ceil(2), m.div_ceil(2))
}

/// Spatially smoothed covariance of `x` with `p1 × p2` subarrays.
pub fn smoothed_covariance(x: &CMatrix, p1: usize, p2: usize) -> CMatrix {
    let (n, m) = (x.rows(), x.cols());
    let (l1, l2) = (n - p1 + 1, m - p2 + 1);
    let d = p1 * p2;
    let mut r = CMatrix::zeros(d, d);
    let mut v = vec![ZERO; d];
    for a in 0..l1 {
        for b in 0..l2 {
            for i in 0..p1 {
                for j in 0..p2 {
                    v[i * p2 + j] = x[(a + i, b + j)];
                }
            }
            for i in 0..d {
                for j in 0..d {
                    r[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
    }
    r.scale(1.0 / (l1 * l2) as f64)
}

fn check_order(k: usize, n: usize, m: usize) -> Result<(usize, usize)> {
    let (p1, p2) = subarray_dims(n, m);
    if k >= p1 * p2 {
        return Err(Error::Order(format!("model order {k} needs a subarray larger than {p1}x{p2}")));
    }
    Ok((p1, p2))
}

pub fn music_pseudospectrum(z_obs: &DataMatrix, mask: &ApertureMask, cfg: &BaselineConfig) -> Result<Pseudospectrum> {
    cfg.validate(Baseline::Music)?;
    let (n, m) = (z_obs.n_angles(), z_obs.n_freqs());
    let k = cfg.model_order;
    let (p1, p2) = check_order(k, n, m)?;
    let filled = z_obs.masked(mask)?;
    let cov = smoothed_covariance(filled.as_matrix(), p1, p2);
    let eig = hermitian_eig(&cov)?;
    let d = p1 * p2;
    let g = cfg.music_grid;
    let omega = |i: usize| -PI + 2.0 * PI * i as f64 / g as f64;
    let tw1 = CMatrix::from_fn(g, p1, |i, p| C64::from_polar(1.0, -omega(i) * p as f64));
    let tw2 = CMatrix::from_fn(p2, g, |p, j| C64::from_polar(1.0, -omega(j) * p as f64));

    // ‖E_s* a(ω)‖² accumulated over the signal eigenvectors.
    let mut signal = vec![0.0; g * g];
    for col in (d - k)..d {
        let e = CMatrix::from_fn(p1, p2, |i, j| eig.eigenvectors[(i * p2 + j, col)].conj());
        let proj = tw1.matmul(&e.matmul(&tw2)?)?;
        for (s, v) in signal.iter_mut().zip(proj.as_slice()) {
            *s += v.norm_sqr();
        }
    }
    let floor = 1e-12 * d as f64;
    let values = signal.iter().map(|s| 1.0 / (d as f64 - s).max(floor)).collect();
    Ok(Pseudospectrum { grid: g, values })
}

pub fn music2d(
    z_obs: &DataMatrix,
    mask: &ApertureMask,
    params: &RadarParams,
    cfg: &BaselineConfig,
) -> Result<MusicResult> {
    cfg.validate(Baseline::Music)?;
    if !z_obs.matches(params) {
        return dim("data dimensions differ from the radar parameters");
    }
    mask.check_len(z_obs.nm())?;
    let (n, m) = (z_obs.n_angles(), z_obs.n_freqs());
    if cfg.model_order == 0 {
        return Ok(MusicResult { estimates: Vec::new(), frequencies: Vec::new(), r_hat: vec![ZERO; n * m] });
    }
    let spectrum = music_pseudospectrum(z_obs, mask, cfg)?;
    let frequencies: Vec<(f64, f64)> = spectrum
        .peaks(cfg.model_order)
        .into_iter()
        .map(|(i, j)| (spectrum.omega(i), spectrum.omega(j)))
        .collect();
    let coeffs = fit_atom_coefficients(&frequencies, z_obs, mask)?;
    let estimates = frequencies
        .iter()
        .zip(&coeffs)
        .map(|(&(w1, w2), &c)| {
            let (x, y) = params.freq_to_position(w1, w2);
            ScattererEstimate { x, y, amplitude: c.norm(), coefficient: c }
        })
        .collect();
    let r_hat = synthesize_atoms(&frequencies, &coeffs, n, m);
    Ok(MusicResult { estimates, frequencies, r_hat })
}
