//! Magnitude images and scatterer read-out.
//!
//! Images are the centred 2D DFT of the recovered data, flipped so that both
//! pixel axes increase with the physical coordinate: row `i` sits at
//! `x_i = 2π (i − P/2) / (α P)` and column `j` at `y_j = 2π (j − Q/2) / (β Q)`,
//! where `α` and `β` are the cross-range and range phase rates.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{dim, Result};
use crate::linalg::{dft2, hermitian_eig, least_squares, CMatrix, C64};
use crate::model::{fit_atom_coefficients, ApertureMask, DataMatrix, RadarParams, ScattererEstimate};
use crate::toeplitz::{build_toeplitz, ToeplitzParam};

pub const DEFAULT_ZERO_PAD: usize = 4;

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct IsarImage {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
    /// `(x_min, x_max, y_min, y_max)` in metres, pixel centres.
    pub extent: (f64, f64, f64, f64),
    pub normalized: bool,
}

impl IsarImage {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pixels[i * self.cols + j]
    }

    pub fn x_at(&self, i: usize) -> f64 {
        lerp(self.extent.0, self.extent.1, i, self.rows)
    }

    pub fn y_at(&self, j: usize) -> f64 {
        lerp(self.extent.2, self.extent.3, j, self.cols)
    }

    /// Position of the brightest pixel (first one on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, &v) in self.pixels.iter().enumerate() {
            if v > self.pixels[best] {
                best = k;
            }
        }
        (best / self.cols, best % self.cols)
    }

    /// Binary 16-bit PGM, one row per `x` sample.
    pub fn write_pgm(&self, mut out: impl Write) -> Result<()> {
        let peak = self.pixels.iter().copied().fold(0.0, f64::max);
        write!(out, "P5\n{} {}\n65535\n", self.cols, self.rows)?;
        let mut buf = Vec::with_capacity(2 * self.pixels.len());
        for &v in &self.pixels {
            let level = if peak > 0.0 { (v / peak * 65535.0).round() as u16 } else { 0 };
            buf.extend_from_slice(&level.to_be_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    /// `key = value` lines describing the pixel grid.
    pub fn write_sidecar(&self, mut out: impl Write) -> Result<()> {
        let (x0, x1, y0, y1) = self.extent;
        writeln!(out, "rows = {}", self.rows)?;
        writeln!(out, "cols = {}", self.cols)?;
        writeln!(out, "x_min = {x0}")?;
        writeln!(out, "x_max = {x1}")?;
        writeln!(out, "y_min = {y0}")?;
        writeln!(out, "y_max = {y1}")?;
        writeln!(out, "normalized = {}", self.normalized)?;
        Ok(())
    }
}

fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if n < 2 {
        return lo;
    }
    lo + (hi - lo) * i as f64 / (n - 1) as f64
}

fn axis_extent(rate: f64, p: usize) -> (f64, f64) {
    if rate <= 0.0 {
        return (0.0, 0.0);
    }
    let at = |i: usize| 2.0 * PI * (i as f64 - (p / 2) as f64) / (rate * p as f64);
    (at(0), at(p - 1))
}

/// Max-normalised magnitude image of `r_hat`.
pub fn form_image(r_hat: &[C64], params: &RadarParams, zero_pad: usize) -> Result<IsarImage> {
    let (n, m) = (params.n_angles, params.n_freqs);
    if r_hat.len() != n * m {
        return dim(format!("{} samples for a {n}x{m} grid", r_hat.len()));
    }
    if zero_pad == 0 {
        return crate::error::param("zero_pad must be at least 1");
    }
    let spectrum = dft2(&CMatrix::from_vec(n, m, r_hat.to_vec())?, zero_pad);
    let (p, q) = (spectrum.rows(), spectrum.cols());
    let mut pixels = Vec::with_capacity(p * q);
    for i in 0..p {
        for j in 0..q {
            pixels.push(spectrum[((p - i) % p, (q - j) % q)].norm());
        }
    }
    let peak = pixels.iter().copied().fold(0.0, f64::max);
    let normalized = peak > 0.0;
    if normalized {
        pixels.iter_mut().for_each(|v| *v /= peak);
    }
    let (x0, x1) = axis_extent(params.cross_range_rate(), p);
    let (y0, y1) = axis_extent(params.range_rate(), q);
    Ok(IsarImage { rows: p, cols: q, pixels, extent: (x0, x1, y0, y1), normalized })
}

/// Data synthesised from a scatterer list, for rendering a parametric image.
pub fn resynthesize(estimates: &[ScattererEstimate], params: &RadarParams) -> Vec<C64> {
    let freqs: Vec<(f64, f64)> = estimates.iter().map(|e| params.position_to_freq(e.x, e.y)).collect();
    let coeffs: Vec<C64> = estimates.iter().map(|e| e.coefficient).collect();
    crate::model::synthesize_atoms(&freqs, &coeffs, params.n_angles, params.n_freqs)
}

/// Indices of the `k` largest local maxima of a `rows × cols` grid, with
/// wrap-around neighbourhoods. Plateaus report their first cell only.
pub fn top_peaks(values: &[f64], rows: usize, cols: usize, k: usize) -> Vec<(usize, usize)> {
    let mut found = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = values[i * cols + j];
            let mut is_peak = true;
            'nb: for di in [rows - 1, 0, 1] {
                for dj in [cols - 1, 0, 1] {
                    let (ni, nj) = ((i + di) % rows, (j + dj) % cols);
                    if (ni, nj) == (i, j) {
                        continue;
                    }
                    let w = values[ni * cols + nj];
                    if w > v || (w == v && ni * cols + nj < i * cols + j) {
                        is_peak = false;
                        break 'nb;
                    }
                }
            }
            if is_peak {
                found.push((v, i, j));
            }
        }
    }
    found.sort_by(|a, b| b.0.total_cmp(&a.0));
    found.into_iter().take(k).map(|(_, i, j)| (i, j)).collect()
}

/// `Σ_i |v_i* a(ω)|²` over the columns of `basis` (each an `N·M` vector).
fn subspace_power(basis: &[Vec<C64>], n: usize, m: usize, w1: f64, w2: f64) -> f64 {
    let e1: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, -w1 * i as f64)).collect();
    let e2: Vec<C64> = (0..m).map(|i| C64::from_polar(1.0, -w2 * i as f64)).collect();
    basis
        .iter()
        .map(|v| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..n {
                let row: C64 = (0..m).map(|b| v[a * m + b].conj() * e2[b]).sum();
                acc += row * e1[a];
            }
            acc.norm_sqr()
        })
        .sum()
}

/// Scatterers read off the dominant eigenvectors of `T(u_hat)`.
///
/// Frequencies are the peaks of the signal-subspace spectrum
/// `Σ_i |v_i* a(ω)|²` on a 4× oversampled grid, refined by parabolic
/// interpolation and a short golden-section search per axis. Coefficients
/// are least-squares fits against `data` on its mask when given, otherwise
/// against the lags of `u_hat` themselves.
pub fn extract_scatterers(
    u_hat: &ToeplitzParam,
    k: usize,
    params: &RadarParams,
    data: Option<(&DataMatrix, &ApertureMask)>,
) -> Result<Vec<ScattererEstimate>> {
    let (n, m) = u_hat.dims();
    if (n, m) != (params.n_angles, params.n_freqs) {
        return dim("lag array dimensions differ from the radar parameters");
    }
    let eig = hermitian_eig(&build_toeplitz(u_hat)?)?;
    let top = eig.max_eigenvalue();
    if k == 0 || top <= 0.0 {
        return Ok(Vec::new());
    }
    let nm = n * m;
    let basis: Vec<Vec<C64>> = (0..nm)
        .rev()
        .take(k)
        .take_while(|&c| eig.eigenvalues[c] > RANK_THRESHOLD * top)
        .map(|c| eig.eigenvectors.column(c))
        .collect();
    if basis.is_empty() {
        return Ok(Vec::new());
    }

    let (g1, g2) = (DEFAULT_ZERO_PAD * n, DEFAULT_ZERO_PAD * m);
    let step1 = 2.0 * PI / g1 as f64;
    let step2 = 2.0 * PI / g2 as f64;
    let mut grid = vec![0.0; g1 * g2];
    for i in 0..g1 {
        for j in 0..g2 {
            grid[i * g2 + j] = subspace_power(&basis, n, m, i as f64 * step1, j as f64 * step2);
        }
    }
    let power = |w1: f64, w2: f64| subspace_power(&basis, n, m, w1, w2);
    let freqs: Vec<(f64, f64)> = top_peaks(&grid, g1, g2, basis.len())
        .into_iter()
        .map(|(i, j)| {
            let at = |a: usize, b: usize| grid[(a % g1) * g2 + (b % g2)];
            let d1 = parabolic(at(i + g1 - 1, j), at(i, j), at(i + 1, j));
            let d2 = parabolic(at(i, j + g2 - 1), at(i, j), at(i, j + 1));
            let mut w1 = (i as f64 + d1) * step1;
            let mut w2 = (j as f64 + d2) * step2;
            for _ in 0..2 {
                w1 = golden_max(|w| power(w, w2), w1 - 0.5 * step1, w1 + 0.5 * step1);
                w2 = golden_max(|w| power(w1, w), w2 - 0.5 * step2, w2 + 0.5 * step2);
            }
            (w1, w2)
        })
        .collect();

    let coeffs = match data {
        Some((z, mask)) => fit_atom_coefficients(&freqs, z, mask)?,
        None => fit_lags(u_hat, &freqs)?,
    };
    Ok(freqs
        .iter()
        .zip(coeffs)
        .map(|(&(w1, w2), c)| {
            let (x, y) = params.freq_to_position(w1, w2);
            ScattererEstimate { x, y, amplitude: c.norm(), coefficient: c }
        })
        .collect())
}

/// Vertex offset of the parabola through three equally spaced samples.
fn parabolic(left: f64, mid: f64, right: f64) -> f64 {
    let denom = left - 2.0 * mid + right;
    if denom.abs() < f64::MIN_POSITIVE {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..40 {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Least-squares powers `P_k` with `u[p, q] ≈ Σ_k P_k exp(-j(ω1_k p + ω2_k q))`.
fn fit_lags(u: &ToeplitzParam, freqs: &[(f64, f64)]) -> Result<Vec<C64>> {
    let lags: Vec<(isize, isize)> =
        u.p_range().flat_map(|p| u.q_range().map(move |q| (p, q))).collect();
    let a = CMatrix::from_fn(lags.len(), freqs.len(), |r, c| {
        let (p, q) = lags[r];
        let (w1, w2) = freqs[c];
        C64::from_polar(1.0, -(w1 * p as f64 + w2 * q as f64))
    });
    let b: Vec<C64> = lags.iter().map(|&(p, q)| u.get(p, q)).collect();
    least_squares(&a, &b)
}

/// Writes `x,y,amplitude` rows.
pub fn write_scatterers_csv(estimates: &[ScattererEstimate], mut out: impl Write) -> Result<()> {
    writeln!(out, "x,y,amplitude")?;
    for e in estimates {
        writeln!(out, "{},{},{}", e.x, e.y, e.amplitude)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{random_mask, synthesize_echo, wrap_phase, Scatterer, Scene};

    fn desk() -> RadarParams {
        RadarParams::desk_scale()
    }

    fn cell(params: &RadarParams) -> (f64, f64) {
        let (n, m) = (params.n_angles as f64, params.n_freqs as f64);
        (2.0 * PI / (n * params.cross_range_rate()), 2.0 * PI / (m * params.range_rate()))
    }

    #[test]
    fn single_scatterer_peak_within_half_cell() {
        let params = desk();
        let (cx, cy) = cell(&params);
        for (x, y) in [(0.31, -0.52), (-0.9, 0.77), (0.0, 0.0)] {
            let z = synthesize_echo(&Scene::new(vec![Scatterer { x, y, sigma: 1.0 }]).unwrap(), &params);
            let img = form_image(z.as_vec(), &params, 4).unwrap();
            let (i, j) = img.argmax();
            assert!((img.x_at(i) - x).abs() <= 0.5 * cx / 4.0 + 1e-12, "x {} vs {x}", img.x_at(i));
            assert!((img.y_at(j) - y).abs() <= 0.5 * cy / 4.0 + 1e-12, "y {} vs {y}", img.y_at(j));
            assert!(img.normalized && (img.get(i, j) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_data_gives_blank_unnormalized_image() {
        let params = desk();
        let img = form_image(&vec![C64::new(0.0, 0.0); 256], &params, 2).unwrap();
        assert!(img.pixels().iter().all(|&v| v == 0.0));
        assert!(!img.normalized);
        assert!(form_image(&[C64::new(0.0, 0.0); 3], &params, 2).is_err());
    }

    #[test]
    fn two_equal_scatterers_give_equal_maxima() {
        let params = desk();
        let (cx, cy) = cell(&params);
        // On-grid positions, well separated.
        let scene = Scene::new(vec![
            Scatterer { x: -3.0 * cx, y: 2.0 * cy, sigma: 1.0 },
            Scatterer { x: 3.0 * cx, y: -2.0 * cy, sigma: 1.0 },
        ])
        .unwrap();
        let img = form_image(synthesize_echo(&scene, &params).as_vec(), &params, 4).unwrap();
        let peaks = top_peaks(img.pixels(), img.rows(), img.cols(), 2);
        let (a, b) = (img.get(peaks[0].0, peaks[0].1), img.get(peaks[1].0, peaks[1].1));
        assert!((a - b).abs() <= 0.01 * a);
    }

    #[test]
    fn one_cell_shift_in_range_moves_peak_one_cell() {
        let params = desk();
        let (_, cy) = cell(&params);
        let pad = 2;
        let base = Scatterer { x: 0.0, y: 2.0 * cy, sigma: 1.0 };
        let moved = Scatterer { y: 3.0 * cy, ..base };
        let peak = |s: Scatterer| {
            let z = synthesize_echo(&Scene::new(vec![s]).unwrap(), &params);
            form_image(z.as_vec(), &params, pad).unwrap().argmax()
        };
        let (i0, j0) = peak(base);
        let (i1, j1) = peak(moved);
        assert_eq!((i1, j1), (i0, j0 + pad));
    }

    #[test]
    fn pgm_and_sidecar_layout() {
        let params = RadarParams::square_cells(4, 3, 10e9, 500e6).unwrap();
        let z = synthesize_echo(&Scene::quadcopter(), &params);
        let img = form_image(z.as_vec(), &params, 2).unwrap();
        let mut pgm = Vec::new();
        img.write_pgm(&mut pgm).unwrap();
        let header = b"P5\n6 8\n65535\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(pgm.len(), header.len() + 2 * 48);
        let mut side = Vec::new();
        img.write_sidecar(&mut side).unwrap();
        let text = String::from_utf8(side).unwrap();
        assert!(text.contains("rows = 8") && text.contains("normalized = true"));
    }

    #[test]
    fn unit_atom_lags_give_one_unit_scatterer() {
        let params = desk();
        let (x, y) = (0.43, -0.61);
        let (w1, w2) = params.position_to_freq(x, y);
        let u = ToeplitzParam::from_atoms(16, 16, &[(1.0, w1, w2)]);
        let est = extract_scatterers(&u, 3, &params, None).unwrap();
        assert_eq!(est.len(), 1);
        assert!((est[0].x - x).abs() < 1e-6 && (est[0].y - y).abs() < 1e-6);
        assert!((est[0].amplitude - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn zero_lags_give_no_scatterers() {
        let params = desk();
        assert!(extract_scatterers(&ToeplitzParam::zeros(16, 16), 3, &params, None).unwrap().is_empty());
    }

    #[test]
    fn three_atoms_matched_within_half_padded_cell() {
        let params = desk();
        let truth = [(0.6, 1.1, 1.0), (-1.2, 0.2, 0.7), (0.3, -1.4, 1.3)];
        let atoms: Vec<(f64, f64, f64)> = truth
            .iter()
            .map(|&(x, y, p)| {
                let (w1, w2) = params.position_to_freq(x, y);
                (p, w1, w2)
            })
            .collect();
        let u = ToeplitzParam::from_atoms(16, 16, &atoms);
        let est = extract_scatterers(&u, 3, &params, None).unwrap();
        assert_eq!(est.len(), 3);
        let half1 = 0.5 * 2.0 * PI / (4.0 * 16.0);
        // Brute-force assignment over the 3! permutations.
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let ok = perms.iter().any(|perm| {
            perm.iter().enumerate().all(|(t, &e)| {
                let (a1, a2) = params.position_to_freq(truth[t].0, truth[t].1);
                let (b1, b2) = params.position_to_freq(est[e].x, est[e].y);
                wrap_phase(a1 - b1).abs() <= half1 && wrap_phase(a2 - b2).abs() <= half1
            })
        });
        assert!(ok, "{est:?}");
    }

    #[test]
    fn count_bounded_by_k_and_rank() {
        let params = desk();
        let u = ToeplitzParam::from_atoms(16, 16, &[(1.0, 0.5, 0.5), (1.0, -1.0, 2.0)]);
        assert_eq!(extract_scatterers(&u, 1, &params, None).unwrap().len(), 1);
        assert_eq!(extract_scatterers(&u, 5, &params, None).unwrap().len(), 2);
    }

    #[test]
    fn amplitudes_from_masked_data() {
        let params = desk();
        let s = Scatterer { x: 0.2, y: 0.9, sigma: 1.7 };
        let z = synthesize_echo(&Scene::new(vec![s]).unwrap(), &params);
        let (w1, w2) = params.position_to_freq(s.x, s.y);
        let u = ToeplitzParam::from_atoms(16, 16, &[(0.3, w1, w2)]);
        let mask = random_mask(256, 60, 1).unwrap();
        let est = extract_scatterers(&u, 2, &params, Some((&z, &mask))).unwrap();
        assert!((est[0].amplitude - 1.7).abs() < 1e-6);
        let back = resynthesize(&est, &params);
        for (a, b) in back.iter().zip(z.as_vec()) {
            assert!((a - b).norm() < 1e-5);
        }
    }
}
