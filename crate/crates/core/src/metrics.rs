//! Reconstruction quality: MSE, PSNR and SSIM.
//!
//! MSE works on complex data and on real images alike. PSNR and SSIM take
//! row-major real images. SSIM uses an 11×11 Gaussian window with standard
//! deviation 1.5 over all fully contained windows, with `C1 = (0.01 L)²` and
//! `C2 = (0.03 L)²` where `L` is the maximum of the reference (or 1 when the
//! reference is identically zero).

use serde::Serialize;

use crate::error::{dim, param, Result};
use crate::imaging::IsarImage;
use crate::linalg::C64;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_STD: f64 = 1.5;

/// Mean of `|ref − est|²` over complex entries.
pub fn mse(reference: &[C64], estimate: &[C64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return dim(format!("{} vs {} entries", reference.len(), estimate.len()));
    }
    if reference.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = reference.iter().zip(estimate).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(sum / reference.len() as f64)
}

pub fn mse_real(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return dim(format!("{} vs {} entries", reference.len(), estimate.len()));
    }
    if reference.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = reference.iter().zip(estimate).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / reference.len() as f64)
}

/// `10 log10(peak² / mse)` with `peak = max |ref|`; identical inputs give `+∞`.
pub fn psnr(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    let err = mse_real(reference, estimate)?;
    let peak = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return param("PSNR needs a reference that is not all zero");
    }
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / err).log10())
}

fn gaussian_window() -> Vec<f64> {
    let c = (SSIM_WINDOW / 2) as f64;
    let g: Vec<f64> = (0..SSIM_WINDOW).map(|i| (-(i as f64 - c).powi(2) / (2.0 * SSIM_STD * SSIM_STD)).exp()).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// Mean structural similarity of two `rows × cols` images.
pub fn ssim(reference: &[f64], estimate: &[f64], rows: usize, cols: usize) -> Result<f64> {
    if reference.len() != rows * cols || estimate.len() != rows * cols {
        return dim(format!("images must hold {rows}x{cols} pixels"));
    }
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return param(format!("{rows}x{cols} image is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"));
    }
    let top = reference.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let l = if top > 0.0 { top } else { 1.0 };
    let (c1, c2) = ((0.01 * l).powi(2), (0.03 * l).powi(2));
    let g = gaussian_window();
    let (vr, vc) = (rows - SSIM_WINDOW + 1, cols - SSIM_WINDOW + 1);
    let mut total = 0.0;
    for r0 in 0..vr {
        for c0 in 0..vc {
            let (mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (i, gi) in g.iter().enumerate() {
                let row = (r0 + i) * cols + c0;
                for (j, gj) in g.iter().enumerate() {
                    let w = gi * gj;
                    let (x, y) = (reference[row + j], estimate[row + j]);
                    mx += w * x;
                    my += w * y;
                    xx += w * x * x;
                    yy += w * y * y;
                    xy += w * x * y;
                }
            }
            let (sx, sy, sxy) = (xx - mx * mx, yy - my * my, xy - mx * my);
            total += ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sx + sy + c2));
        }
    }
    Ok(total / (vr * vc) as f64)
}

pub fn ssim_images(reference: &IsarImage, estimate: &IsarImage) -> Result<f64> {
    if (reference.rows(), reference.cols()) != (estimate.rows(), estimate.cols()) {
        return dim("image sizes differ");
    }
    ssim(reference.pixels(), estimate.pixels(), reference.rows(), reference.cols())
}

pub fn psnr_images(reference: &IsarImage, estimate: &IsarImage) -> Result<f64> {
    if (reference.rows(), reference.cols()) != (estimate.rows(), estimate.cols()) {
        return dim("image sizes differ");
    }
    psnr(reference.pixels(), estimate.pixels())
}

/// Metrics from a single reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialMetrics {
    /// On the complex data matrix.
    pub mse_data: f64,
    /// On max-normalised magnitude images.
    pub mse_image: f64,
    pub psnr_db: f64,
    pub ssim: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub mse_data: f64,
    pub mse_image: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub n_trials: usize,
    pub per_trial: Option<Vec<TrialMetrics>>,
}

impl MetricReport {
    /// Means over `trials`; `None` when the list is empty.
    pub fn aggregate(trials: &[TrialMetrics], keep_trials: bool) -> Option<Self> {
        if trials.is_empty() {
            return None;
        }
        let k = trials.len() as f64;
        let mean = |f: fn(&TrialMetrics) -> f64| trials.iter().map(f).sum::<f64>() / k;
        Some(Self {
            mse_data: mean(|t| t.mse_data),
            mse_image: mean(|t| t.mse_image),
            psnr_db: mean(|t| t.psnr_db),
            ssim: mean(|t| t.ssim),
            n_trials: trials.len(),
            per_trial: keep_trials.then(|| trials.to_vec()),
        })
    }
}
