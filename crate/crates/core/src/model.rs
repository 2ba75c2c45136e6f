//! Scenes, radar parameters and the dechirped echo model.
//!
//! After translational and rotational motion compensation the echo of a
//! point-scatterer scene at angle `θ_n` and frequency `f_m` is
//!
//! ```text
//! r(θ_n, f_m) = Σ_k σ_k exp(-j h_n x_k - j h_m y_k)
//! h_n = 4π f0 θ_n / c,   h_m = 4π (f0 + m Δf) / c
//! ```
//!
//! Rows of a [`DataMatrix`] index angle, columns index frequency step, and
//! the flat index `n·M + m` is the vectorisation order used everywhere else.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{dim, param, Result};
use crate::linalg::{CMatrix, C64, ZERO};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier of the reference FSCS waveform (10 GHz).
pub const REFERENCE_F0: f64 = 10e9;
/// Burst bandwidth of the reference waveform (500 MHz).
pub const REFERENCE_BANDWIDTH: f64 = 500e6;
/// Sub-pulse width of the reference waveform. Not used by the dechirped model;
/// kept so presets document the full waveform they stand for.
pub const REFERENCE_PULSE_WIDTH: f64 = 0.4e-6;

/// RNG stream used for aperture masks.
pub const MASK_STREAM: u64 = 0;
/// RNG stream used for receiver noise.
pub const NOISE_STREAM: u64 = 1;

/// Seeded ChaCha8 generator on a given stream. ChaCha8 output is specified
/// bit-for-bit, so masks and noise reproduce across platforms.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarParams {
    /// Start carrier frequency (Hz).
    pub f0: f64,
    /// Frequency step between pulses (Hz).
    pub delta_f: f64,
    /// Number of frequency steps `M`.
    pub n_freqs: usize,
    /// Number of observation angles `N`.
    pub n_angles: usize,
    /// Total rotation over the aperture (rad).
    pub theta_span: f64,
    /// Propagation speed (m/s).
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

impl RadarParams {
    pub fn new(
        f0: f64,
        delta_f: f64,
        n_freqs: usize,
        n_angles: usize,
        theta_span: f64,
    ) -> Result<Self> {
        let p = Self { f0, delta_f, n_freqs, n_angles, theta_span, c: SPEED_OF_LIGHT };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with square resolution cells: `Δf = B/M` and a rotation
    /// span chosen so the cross-range cell `c / (2 f0 Δθ N)` equals the range
    /// cell `c / 2B`.
    pub fn square_cells(n_angles: usize, n_freqs: usize, f0: f64, bandwidth: f64) -> Result<Self> {
        if n_angles < 2 || n_freqs < 1 {
            return param("square_cells needs at least 2 angles and 1 frequency");
        }
        let n = n_angles as f64;
        Self::new(f0, bandwidth / n_freqs as f64, n_freqs, n_angles, (n - 1.0) * bandwidth / (f0 * n))
    }

    /// 40×40 grid (1600 candidate samples) at 10 GHz / 500 MHz.
    pub fn full_scale() -> Self {
        Self::square_cells(40, 40, REFERENCE_F0, REFERENCE_BANDWIDTH).expect("valid preset")
    }

    /// 16×16 grid used for fast sweeps.
    pub fn desk_scale() -> Self {
        Self::square_cells(16, 16, REFERENCE_F0, REFERENCE_BANDWIDTH).expect("valid preset")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_freqs < 1 || self.n_angles < 1 {
            return param("N and M must be at least 1");
        }
        if !(self.f0 > 0.0 && self.f0.is_finite()) {
            return param(format!("f0 must be positive, got {}", self.f0));
        }
        if !(self.delta_f >= 0.0 && self.delta_f.is_finite()) {
            return param(format!("delta_f must be non-negative, got {}", self.delta_f));
        }
        if !(self.theta_span > 0.0 && self.theta_span.is_finite()) {
            return param(format!("theta_span must be positive, got {}", self.theta_span));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return param(format!("c must be positive, got {}", self.c));
        }
        Ok(())
    }

    pub fn nm(&self) -> usize {
        self.n_angles * self.n_freqs
    }

    /// Uniform angle grid over `[0, theta_span]`.
    pub fn angles(&self) -> Vec<f64> {
        let n = self.n_angles;
        if n == 1 {
            return vec![0.0];
        }
        (0..n).map(|i| i as f64 * self.theta_span / (n - 1) as f64).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_freqs).map(|m| self.f0 + m as f64 * self.delta_f).collect()
    }

    /// Phase advance per angle step for a unit cross-range offset (rad/m).
    pub fn cross_range_rate(&self) -> f64 {
        if self.n_angles < 2 {
            return 0.0;
        }
        4.0 * PI * self.f0 * self.theta_span / ((self.n_angles - 1) as f64 * self.c)
    }

    /// Phase advance per frequency step for a unit range offset (rad/m).
    pub fn range_rate(&self) -> f64 {
        4.0 * PI * self.delta_f / self.c
    }
}

/// `(h_n, h_m)` in rad/m. The small-angle approximation `f_m ≈ f0` is used
/// inside `h_n` only.
pub fn angle_freq_params(params: &RadarParams) -> (Vec<f64>, Vec<f64>) {
    let k = 4.0 * PI / params.c;
    let h_n = params.angles().into_iter().map(|th| k * params.f0 * th).collect();
    let h_m = params.frequencies().into_iter().map(|f| k * f).collect();
    (h_n, h_m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scatterer {
    /// Cross-range (m).
    pub x: f64,
    /// Range (m).
    pub y: f64,
    /// Reflectivity, strictly positive.
    pub sigma: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scene {
    scatterers: Vec<Scatterer>,
}

impl Scene {
    pub fn new(scatterers: Vec<Scatterer>) -> Result<Self> {
        for (k, s) in scatterers.iter().enumerate() {
            if !(s.sigma > 0.0 && s.sigma.is_finite()) {
                return param(format!("scatterer {k}: reflectivity must be > 0, got {}", s.sigma));
            }
            if !(s.x.is_finite() && s.y.is_finite()) {
                return param(format!("scatterer {k}: non-finite position"));
            }
        }
        Ok(Self { scatterers })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn scatterers(&self) -> &[Scatterer] {
        &self.scatterers
    }

    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }

    pub fn union(&self, other: &Scene) -> Scene {
        let mut s = self.scatterers.clone();
        s.extend_from_slice(&other.scatterers);
        Scene { scatterers: s }
    }

    /// Synthetic quadcopter: a body cluster plus four diagonal arms ending in
    /// rotor hubs with two blade-tip returns each, inside a 1 m × 1 m box.
    /// The geometry is made up for demos; it is not a measured target.
    pub fn quadcopter() -> Self {
        let mut pts = vec![
            Scatterer { x: 0.0, y: 0.0, sigma: 1.5 },
            Scatterer { x: 0.08, y: 0.0, sigma: 1.2 },
            Scatterer { x: -0.08, y: 0.0, sigma: 1.2 },
            Scatterer { x: 0.0, y: 0.08, sigma: 1.1 },
            Scatterer { x: 0.0, y: -0.08, sigma: 1.1 },
        ];
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
            for (i, frac) in [0.25, 0.5, 0.75].into_iter().enumerate() {
                pts.push(Scatterer { x: sx * 0.4 * frac, y: sy * 0.4 * frac, sigma: 0.7 + 0.05 * i as f64 });
            }
            pts.push(Scatterer { x: sx * 0.4, y: sy * 0.4, sigma: 1.3 });
            // Blade tips sit perpendicular to the arm.
            for t in [-1.0, 1.0] {
                pts.push(Scatterer { x: sx * 0.4 - t * sy * 0.07, y: sy * 0.4 + t * sx * 0.07, sigma: 0.5 });
            }
        }
        Self { scatterers: pts }
    }
}

/// `N×M` matrix of dechirped echoes; row = angle, column = frequency step.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    matrix: CMatrix,
}

impl DataMatrix {
    pub fn zeros(n_angles: usize, n_freqs: usize) -> Self {
        Self { matrix: CMatrix::zeros(n_angles, n_freqs) }
    }

    pub fn from_matrix(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// Builds from the flat `n·M + m` vectorisation.
    pub fn from_vec(n_angles: usize, n_freqs: usize, entries: Vec<C64>) -> Result<Self> {
        Ok(Self { matrix: CMatrix::from_vec(n_angles, n_freqs, entries)? })
    }

    pub fn n_angles(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_freqs(&self) -> usize {
        self.matrix.cols()
    }

    pub fn nm(&self) -> usize {
        self.n_angles() * self.n_freqs()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// The vectorisation `vec(R)`, angle-major.
    pub fn as_vec(&self) -> &[C64] {
        self.matrix.as_slice()
    }

    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.matrix[(n, m)]
    }

    pub fn matches(&self, params: &RadarParams) -> bool {
        self.n_angles() == params.n_angles && self.n_freqs() == params.n_freqs
    }

    /// Copy with every entry outside `mask` set to zero.
    pub fn masked(&self, mask: &ApertureMask) -> Result<Self> {
        mask.check_len(self.nm())?;
        let mut out = vec![ZERO; self.nm()];
        for &i in mask.observed() {
            out[i] = self.as_vec()[i];
        }
        Self::from_vec(self.n_angles(), self.n_freqs(), out)
    }
}

/// Echo matrix of `scene` under `params`.
pub fn synthesize_echo(scene: &Scene, params: &RadarParams) -> DataMatrix {
    let (h_n, h_m) = angle_freq_params(params);
    let mut out = CMatrix::zeros(params.n_angles, params.n_freqs);
    for s in scene.scatterers() {
        // Separable phase: exp(-j h_n x) · exp(-j h_m y).
        let row: Vec<C64> = h_n.iter().map(|h| C64::from_polar(1.0, -h * s.x)).collect();
        let col: Vec<C64> = h_m.iter().map(|h| C64::from_polar(s.sigma, -h * s.y)).collect();
        for (n, a) in row.iter().enumerate() {
            for (m, b) in col.iter().enumerate() {
                out[(n, m)] += a * b;
            }
        }
    }
    DataMatrix::from_matrix(out)
}

/// Wraps a phase to `[-π, π)`.
pub fn wrap_phase(w: f64) -> f64 {
    (w + PI).rem_euclid(2.0 * PI) - PI
}

impl RadarParams {
    /// Digital frequencies `(ω1, ω2)` of a scatterer at `(x, y)`: its echo
    /// is `σ e^{-j h_m[0] y} · exp(-j(ω1 n + ω2 m))`.
    pub fn position_to_freq(&self, x: f64, y: f64) -> (f64, f64) {
        (self.cross_range_rate() * x, self.range_rate() * y)
    }

    /// Inverse of [`position_to_freq`](Self::position_to_freq) on the
    /// unambiguous window. A zero rate maps to coordinate 0.
    pub fn freq_to_position(&self, w1: f64, w2: f64) -> (f64, f64) {
        let inv = |w: f64, rate: f64| if rate > 0.0 { wrap_phase(w) / rate } else { 0.0 };
        (inv(w1, self.cross_range_rate()), inv(w2, self.range_rate()))
    }
}

/// A located scatterer. `coefficient` is the complex weight of the atom at
/// `(x, y)`; `amplitude` is its modulus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScattererEstimate {
    pub x: f64,
    pub y: f64,
    pub amplitude: f64,
    pub coefficient: C64,
}

/// `a[n·M + m] = exp(-j(ω1 n + ω2 m))`.
pub fn atom(n_angles: usize, n_freqs: usize, w1: f64, w2: f64) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_angles * n_freqs);
    for n in 0..n_angles {
        for m in 0..n_freqs {
            out.push(C64::from_polar(1.0, -(w1 * n as f64 + w2 * m as f64)));
        }
    }
    out
}

/// `Σ_k c_k a(ω_k)`.
pub fn synthesize_atoms(freqs: &[(f64, f64)], coeffs: &[C64], n_angles: usize, n_freqs: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n_angles * n_freqs];
    for (&(w1, w2), &c) in freqs.iter().zip(coeffs) {
        for (o, a) in out.iter_mut().zip(atom(n_angles, n_freqs, w1, w2)) {
            *o += c * a;
        }
    }
    out
}

/// Least-squares atom weights fitted to `data` on the observed entries.
pub fn fit_atom_coefficients(freqs: &[(f64, f64)], data: &DataMatrix, mask: &ApertureMask) -> Result<Vec<C64>> {
    mask.check_len(data.nm())?;
    if freqs.is_empty() {
        return Ok(Vec::new());
    }
    let atoms: Vec<Vec<C64>> =
        freqs.iter().map(|&(w1, w2)| atom(data.n_angles(), data.n_freqs(), w1, w2)).collect();
    let obs = mask.observed();
    let a = CMatrix::from_fn(obs.len(), freqs.len(), |i, k| atoms[k][obs[i]]);
    let b: Vec<C64> = obs.iter().map(|&i| data.as_vec()[i]).collect();
    crate::linalg::least_squares(&a, &b)
}

/// Observed sample positions, as ascending flat indices into `vec(R)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApertureMask {
    observed: Vec<usize>,
    nm_total: usize,
}

impl ApertureMask {
    pub fn new(mut observed: Vec<usize>, nm_total: usize) -> Result<Self> {
        observed.sort_unstable();
        if observed.is_empty() {
            return param("aperture mask must observe at least one sample");
        }
        if observed.windows(2).any(|w| w[0] == w[1]) {
            return param("aperture mask contains duplicate indices");
        }
        if *observed.last().unwrap() >= nm_total {
            return param(format!("mask index out of range for {nm_total} samples"));
        }
        Ok(Self { observed, nm_total })
    }

    pub fn full(nm_total: usize) -> Self {
        assert!(nm_total >= 1);
        Self { observed: (0..nm_total).collect(), nm_total }
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn nm_total(&self) -> usize {
        self.nm_total
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.observed.binary_search(&idx).is_ok()
    }

    pub fn indicator(&self) -> Vec<bool> {
        let mut v = vec![false; self.nm_total];
        for &i in &self.observed {
            v[i] = true;
        }
        v
    }

    pub fn is_full(&self) -> bool {
        self.observed.len() == self.nm_total
    }

    pub(crate) fn check_len(&self, nm: usize) -> Result<()> {
        if self.nm_total != nm {
            return dim(format!("mask over {} samples applied to {nm}", self.nm_total));
        }
        Ok(())
    }
}

/// Uniformly random subset of `n_observed` indices out of `nm_total`.
pub fn random_mask(nm_total: usize, n_observed: usize, seed: u64) -> Result<ApertureMask> {
    if n_observed < 1 || n_observed > nm_total {
        return param(format!("cannot observe {n_observed} of {nm_total} samples"));
    }
    let mut rng = seeded_rng(seed, MASK_STREAM);
    let picked = rand::seq::index::sample(&mut rng, nm_total, n_observed).into_vec();
    ApertureMask::new(picked, nm_total)
}

/// Mean power `|r|²` over the observed entries.
pub fn observed_power(data: &DataMatrix, mask: &ApertureMask) -> Result<f64> {
    mask.check_len(data.nm())?;
    if mask.is_empty() {
        return param("empty mask");
    }
    let v = data.as_vec();
    Ok(mask.observed().iter().map(|&i| v[i].norm_sqr()).sum::<f64>() / mask.len() as f64)
}

/// Complex noise variance that yields `snr_db` over the observed entries.
pub fn noise_variance(data: &DataMatrix, mask: &ApertureMask, snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() {
        return param("SNR is NaN");
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    let p = observed_power(data, mask)?;
    if p == 0.0 {
        return param("zero signal power on the observed entries; cannot scale noise to an SNR");
    }
    Ok(p / 10f64.powf(snr_db / 10.0))
}

/// Adds circular complex white Gaussian noise on `mask` at `snr_db`
/// (`f64::INFINITY` means noiseless) and zeroes the unobserved entries.
pub fn add_awgn(data: &DataMatrix, mask: &ApertureMask, snr_db: f64, seed: u64) -> Result<DataMatrix> {
    let var = noise_variance(data, mask, snr_db)?;
    let std = (var / 2.0).sqrt();
    let mut rng = seeded_rng(seed, NOISE_STREAM);
    let mut out = vec![ZERO; data.nm()];
    let v = data.as_vec();
    for &i in mask.observed() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        out[i] = v[i] + C64::new(re * std, im * std);
    }
    DataMatrix::from_vec(data.n_angles(), data.n_freqs(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn ten_ghz() -> RadarParams {
        let mut p = RadarParams::new(1e10, 1e7, 8, 6, 0.05).unwrap();
        p.c = 3e8;
        p
    }

    #[test]
    fn angle_and_frequency_parameters() {
        let p = ten_ghz();
        let (h_n, h_m) = angle_freq_params(&p);
        assert_eq!(h_n[0], 0.0);
        assert!((h_m[0] - 4.0 * PI * 1e10 / 3e8).abs() < 1e-9);
        assert!((h_m[0] - 418.879).abs() < 1e-3);
        // f_m ≈ f0 only inside h_n.
        assert!((h_m[3] - 4.0 * PI * (1e10 + 3e7) / 3e8).abs() < 1e-9);
        assert!((h_n[5] - 4.0 * PI * 1e10 * 0.05 / 3e8).abs() < 1e-9);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(RadarParams::new(0.0, 1.0, 4, 4, 0.1).is_err());
        assert!(RadarParams::new(1e9, -1.0, 4, 4, 0.1).is_err());
        assert!(RadarParams::new(1e9, 1.0, 0, 4, 0.1).is_err());
        assert!(RadarParams::new(1e9, 1.0, 4, 4, 0.0).is_err());
    }

    #[test]
    fn square_cell_presets() {
        let p = RadarParams::full_scale();
        assert_eq!(p.nm(), 1600);
        let range_cell = p.c / (2.0 * p.delta_f * p.n_freqs as f64);
        let cross_cell = 2.0 * PI / (p.cross_range_rate() * p.n_angles as f64);
        assert!((range_cell - cross_cell).abs() < 1e-12);
        assert!((range_cell - SPEED_OF_LIGHT / 1e9).abs() < 1e-12);
    }

    #[test]
    fn empty_scene_gives_zero_echo() {
        let d = synthesize_echo(&Scene::empty(), &ten_ghz());
        assert!(d.as_vec().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn scatterer_at_origin_is_constant() {
        let s = Scene::new(vec![Scatterer { x: 0.0, y: 0.0, sigma: 2.0 }]).unwrap();
        let d = synthesize_echo(&s, &ten_ghz());
        assert!(d.as_vec().iter().all(|z| (*z - C64::new(2.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn echo_is_linear_in_scene() {
        let p = ten_ghz();
        let a = Scene::new(vec![Scatterer { x: 0.3, y: -0.2, sigma: 1.0 }]).unwrap();
        let b = Scene::new(vec![
            Scatterer { x: -0.1, y: 0.4, sigma: 0.5 },
            Scatterer { x: 0.2, y: 0.1, sigma: 1.5 },
        ])
        .unwrap();
        let ab = synthesize_echo(&a.union(&b), &p);
        let sum = &synthesize_echo(&a, &p).into_matrix() + &synthesize_echo(&b, &p).into_matrix();
        let err = ab.as_vec().iter().zip(sum.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-15);
    }

    #[test]
    fn unit_scatterer_has_unit_modulus_entries() {
        let s = Scene::new(vec![Scatterer { x: 0.37, y: -0.61, sigma: 1.0 }]).unwrap();
        let d = synthesize_echo(&s, &RadarParams::desk_scale());
        assert!(d.as_vec().iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn non_positive_reflectivity_rejected() {
        assert!(Scene::new(vec![Scatterer { x: 0.0, y: 0.0, sigma: 0.0 }]).is_err());
        assert!(Scene::new(vec![Scatterer { x: 0.0, y: 0.0, sigma: -1.0 }]).is_err());
    }

    #[test]
    fn quadcopter_preset_fits_in_box() {
        let q = Scene::quadcopter();
        assert!((20..=40).contains(&q.len()));
        for s in q.scatterers() {
            assert!(s.x.abs() <= 0.5 && s.y.abs() <= 0.5);
            assert!((0.5..=1.5).contains(&s.sigma));
        }
    }

    #[test]
    fn full_mask_and_determinism() {
        let m = random_mask(12, 12, 5).unwrap();
        assert_eq!(m.observed(), (0..12).collect::<Vec<_>>().as_slice());
        assert_eq!(random_mask(1600, 500, 42).unwrap(), random_mask(1600, 500, 42).unwrap());
        assert_ne!(random_mask(1600, 500, 42).unwrap(), random_mask(1600, 500, 43).unwrap());
    }

    #[test]
    fn mask_of_500_from_1600() {
        let m = random_mask(1600, 500, 1).unwrap();
        assert_eq!(m.len(), 500);
        assert!(m.observed().windows(2).all(|w| w[0] < w[1]));
        assert!(*m.observed().last().unwrap() < 1600);
    }

    #[test]
    fn mask_size_out_of_range() {
        assert!(matches!(random_mask(10, 0, 1), Err(Error::Parameter(_))));
        assert!(matches!(random_mask(10, 11, 1), Err(Error::Parameter(_))));
        assert!(ApertureMask::new(vec![1, 1], 4).is_err());
        assert!(ApertureMask::new(vec![4], 4).is_err());
    }

    #[test]
    fn infinite_snr_is_noiseless_and_zeroes_gaps() {
        let p = ten_ghz();
        let s = Scene::new(vec![Scatterer { x: 0.1, y: 0.2, sigma: 1.0 }]).unwrap();
        let d = synthesize_echo(&s, &p);
        let mask = random_mask(d.nm(), 20, 3).unwrap();
        let z = add_awgn(&d, &mask, f64::INFINITY, 9).unwrap();
        for i in 0..d.nm() {
            if mask.contains(i) {
                assert_eq!(z.as_vec()[i], d.as_vec()[i]);
            } else {
                assert_eq!(z.as_vec()[i], ZERO);
            }
        }
    }

    #[test]
    fn zero_signal_power_is_error() {
        let d = DataMatrix::zeros(4, 4);
        let mask = ApertureMask::full(16);
        assert!(matches!(add_awgn(&d, &mask, 10.0, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let s = Scene::new(vec![Scatterer { x: 0.1, y: 0.2, sigma: 1.0 }]).unwrap();
        let d = synthesize_echo(&s, &ten_ghz());
        let mask = ApertureMask::full(d.nm());
        assert_eq!(add_awgn(&d, &mask, 0.0, 4).unwrap(), add_awgn(&d, &mask, 0.0, 4).unwrap());
        assert_ne!(add_awgn(&d, &mask, 0.0, 4).unwrap(), add_awgn(&d, &mask, 0.0, 5).unwrap());
    }

    #[test]
    fn empirical_snr_matches_request() {
        // 400 × 250 = 10⁵ observed samples; noise power estimated from z - r.
        let params = RadarParams::new(1e10, 2e6, 250, 400, 0.02).unwrap();
        let scene = Scene::new(vec![
            Scatterer { x: 0.2, y: -0.3, sigma: 1.0 },
            Scatterer { x: -0.4, y: 0.1, sigma: 0.6 },
        ])
        .unwrap();
        let d = synthesize_echo(&scene, &params);
        let mask = ApertureMask::full(d.nm());
        for snr in [-10.0, 0.0, 7.5] {
            let z = add_awgn(&d, &mask, snr, 17).unwrap();
            let noise: f64 =
                z.as_vec().iter().zip(d.as_vec()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / d.nm() as f64;
            let sig = observed_power(&d, &mask).unwrap();
            let measured = 10.0 * (sig / noise).log10();
            assert!((measured - snr).abs() < 0.1, "requested {snr} measured {measured}");
        }
    }

    #[test]
    fn position_frequency_round_trip() {
        let p = RadarParams::desk_scale();
        for (x, y) in [(0.3, -0.7), (-1.1, 1.9), (0.0, 0.0)] {
            let (w1, w2) = p.position_to_freq(x, y);
            let (bx, by) = p.freq_to_position(w1, w2);
            assert!((bx - x).abs() < 1e-12 && (by - y).abs() < 1e-12);
        }
        assert!((wrap_phase(3.0 * PI) + PI).abs() < 1e-12);
    }

    #[test]
    fn echo_is_a_scaled_atom() {
        let p = RadarParams::desk_scale();
        let s = Scatterer { x: 0.4, y: -0.9, sigma: 1.3 };
        let echo = synthesize_echo(&Scene::new(vec![s]).unwrap(), &p);
        let (w1, w2) = p.position_to_freq(s.x, s.y);
        let (_, h_m) = angle_freq_params(&p);
        let c = C64::from_polar(s.sigma, -h_m[0] * s.y);
        let synth = synthesize_atoms(&[(w1, w2)], &[c], p.n_angles, p.n_freqs);
        for (a, b) in synth.iter().zip(echo.as_vec()) {
            assert!((a - b).norm() < 1e-9);
        }
        let mask = random_mask(p.nm(), 40, 2).unwrap();
        let fit = fit_atom_coefficients(&[(w1, w2)], &echo, &mask).unwrap();
        assert!((fit[0] - c).norm() < 1e-9);
    }
}
