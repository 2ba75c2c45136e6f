//! Cadzow denoising on the two-level Hankel lift.
//!
//! `X` (`N × M`) lifts to `H[(i1, i2), (j1, j2)] = X[i1 + j1, i2 + j2]` with
//! pencil sizes `K1 = ⌈(N+1)/2⌉`, `K2 = ⌈(M+1)/2⌉`. A sum of `K` 2D
//! exponentials lifts to a rank-`K` matrix. Each round re-imposes the data
//! on the mask, lifts, truncates to rank `K` and averages back along the
//! Hankel orbits.

use super::{Baseline, BaselineConfig};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, C64, ZERO};
use crate::model::{ApertureMask, DataMatrix};

#[derive(Clone, Debug)]
pub struct CadzowResult {
    pub r_hat: Vec<C64>,
    /// Frobenius change of the de-lifted matrix in each round.
    pub changes: Vec<f64>,
}

pub fn pencil_dims(n: usize, m: usize) -> (usize, usize) {
    ((n + 1).div_ceil(2), (m + 1).div_ceil(2))
}

/// Two-level Hankel lift of `x` with pencils `(k1, k2)`.
pub fn hankel_lift(x: &CMatrix, k1: usize, k2: usize) -> CMatrix {
    let (n, m) = (x.rows(), x.cols());
    let (l1, l2) = (n + 1 - k1, m + 1 - k2);
    CMatrix::from_fn(k1 * k2, l1 * l2, |r, c| {
        let (i1, i2) = (r / k2, r % k2);
        let (j1, j2) = (c / l2, c % l2);
        x[(i1 + j1, i2 + j2)]
    })
}

/// Orbit-averaging inverse of [`hankel_lift`] back to `n × m`.
pub fn hankel_delift(h: &CMatrix, n: usize, m: usize, k2: usize) -> CMatrix {
    let l2 = m + 1 - k2;
    let mut sum = CMatrix::zeros(n, m);
    let mut count = vec![0usize; n * m];
    for r in 0..h.rows() {
        let (i1, i2) = (r / k2, r % k2);
        for c in 0..h.cols() {
            let (j1, j2) = (c / l2, c % l2);
            let (a, b) = (i1 + j1, i2 + j2);
            sum[(a, b)] += h[(r, c)];
            count[a * m + b] += 1;
        }
    }
    for (v, &k) in sum.as_mut_slice().iter_mut().zip(&count) {
        *v /= k as f64;
    }
    sum
}

/// Best rank-`k` approximation, with singular triplets read off the
/// Hermitian dilation `[0 H; H* 0]`.
pub fn rank_truncate(h: &CMatrix, k: usize) -> Result<CMatrix> {
    let (a, b) = (h.rows(), h.cols());
    let mut dil = CMatrix::zeros(a + b, a + b);
    dil.set_block(0, a, h);
    dil.set_block(a, 0, &h.adjoint());
    let eig = hermitian_eig(&dil)?;
    let mut out = CMatrix::zeros(a, b);
    let total = a + b;
    for idx in (total.saturating_sub(k)..total).rev() {
        let s = eig.eigenvalues[idx];
        if s <= 0.0 {
            break;
        }
        // Eigenvector [u; v] / √2 for singular value s.
        let v = &eig.eigenvectors;
        for i in 0..a {
            let ui = v[(i, idx)] * (2.0 * s);
            if ui == ZERO {
                continue;
            }
            for j in 0..b {
                out[(i, j)] += ui * v[(a + j, idx)].conj();
            }
        }
    }
    Ok(out)
}

pub fn cadzow(z_obs: &DataMatrix, mask: &ApertureMask, cfg: &BaselineConfig) -> Result<CadzowResult> {
    cfg.validate(Baseline::Cadzow)?;
    mask.check_len(z_obs.nm())?;
    let (n, m) = (z_obs.n_angles(), z_obs.n_freqs());
    let (k1, k2) = pencil_dims(n, m);
    let bound = (k1 * k2).min((n + 1 - k1) * (m + 1 - k2));
    if cfg.model_order > bound {
        return Err(Error::Order(format!("model order {} exceeds Hankel rank bound {bound}", cfg.model_order)));
    }
    let mut x = z_obs.masked(mask)?.into_matrix();
    let mut changes = Vec::with_capacity(cfg.cadzow_iters);
    for _ in 0..cfg.cadzow_iters {
        let mut current = x.clone();
        for &i in mask.observed() {
            current.as_mut_slice()[i] = z_obs.as_vec()[i];
        }
        let h = rank_truncate(&hankel_lift(&current, k1, k2), cfg.model_order)?;
        let next = hankel_delift(&h, n, m, k2);
        changes.push((&next - &x).frobenius_norm());
        x = next;
    }
    Ok(CadzowResult { r_hat: x.into_vec(), changes })
}
