//! Two-level Hermitian Toeplitz structure.
//!
//! A [`ToeplitzParam`] holds lags `u[p, q]` for `p ∈ (-N, N)`, `q ∈ (-M, M)`.
//! The matrix `T(u)` is `NM × NM`, indexed in the same angle-major order as
//! `vec(R)`, with `T[(n, m), (n', m')] = u[n - n', m - m']`: an `N × N` block
//! Toeplitz matrix whose `M × M` blocks are themselves Toeplitz. Hermitian
//! symmetry of `T(u)` is the lag condition `u[-p, -q] = conj(u[p, q])`.
//!
//! The adjoint used by the solver averages each diagonal orbit
//! `{(i, j) : n_i - n_j = p, m_i - m_j = q}` rather than summing it, which
//! makes it the orthogonal projection onto the structured subspace and a left
//! inverse of `T`. With that choice `⟨T(u), G⟩ = ⟨u, T*(G)⟩_w`, where
//! `⟨u, v⟩_w = Σ w_pq conj(u_pq) v_pq` and `w_pq = (N - |p|)(M - |q|)` is the
//! orbit size.

use serde::{Deserialize, Serialize};

use crate::error::{dim, param, Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, EigenDecomposition, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzParam {
    n: usize,
    m: usize,
    lags: Vec<C64>,
}

impl ToeplitzParam {
    pub fn zeros(n: usize, m: usize) -> Self {
        assert!(n >= 1 && m >= 1, "Toeplitz dimensions must be positive");
        Self { n, m, lags: vec![ZERO; (2 * n - 1) * (2 * m - 1)] }
    }

    /// Lags from a function of `(p, q)`. The result is not checked for
    /// Hermitian symmetry; [`build_toeplitz`] does that.
    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(isize, isize) -> C64) -> Self {
        let mut u = Self::zeros(n, m);
        for p in u.p_range() {
            for q in u.q_range() {
                let i = u.idx(p, q);
                u.lags[i] = f(p, q);
            }
        }
        u
    }

    /// `Σ_k power_k · a_k a_k*` expressed as lags, for atoms
    /// `a_k[n, m] = exp(-j (ω1_k n + ω2_k m))`.
    pub fn from_atoms(n: usize, m: usize, atoms: &[(f64, f64, f64)]) -> Self {
        Self::from_fn(n, m, |p, q| {
            atoms
                .iter()
                .map(|&(power, w1, w2)| C64::from_polar(power, -(w1 * p as f64 + w2 * q as f64)))
                .sum()
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn nm(&self) -> usize {
        self.n * self.m
    }

    pub fn p_range(&self) -> std::ops::RangeInclusive<isize> {
        -(self.n as isize - 1)..=(self.n as isize - 1)
    }

    pub fn q_range(&self) -> std::ops::RangeInclusive<isize> {
        -(self.m as isize - 1)..=(self.m as isize - 1)
    }

    #[inline]
    fn idx(&self, p: isize, q: isize) -> usize {
        let row = (p + self.n as isize - 1) as usize;
        let col = (q + self.m as isize - 1) as usize;
        row * (2 * self.m - 1) + col
    }

    #[inline]
    pub fn get(&self, p: isize, q: isize) -> C64 {
        self.lags[self.idx(p, q)]
    }

    /// Sets `u[p, q] = v` and `u[-p, -q] = conj(v)`.
    pub fn set_hermitian(&mut self, p: isize, q: isize, v: C64) {
        let (i, j) = (self.idx(p, q), self.idx(-p, -q));
        if i == j {
            self.lags[i] = C64::new(v.re, 0.0);
        } else {
            self.lags[i] = v;
            self.lags[j] = v.conj();
        }
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.lags
    }

    pub fn orbit_size(&self, p: isize, q: isize) -> usize {
        (self.n - p.unsigned_abs()) * (self.m - q.unsigned_abs())
    }

    /// Largest `|u[-p, -q] - conj(u[p, q])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for p in self.p_range() {
            for q in self.q_range() {
                worst = worst.max((self.get(-p, -q) - self.get(p, q).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.lags.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, m: self.m, lags: self.lags.iter().map(|z| z * s).collect() }
    }

    /// `⟨self, other⟩_w` with orbit-size weights.
    pub fn weighted_inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dims(), other.dims());
        let mut acc = ZERO;
        for p in self.p_range() {
            for q in self.q_range() {
                acc += self.get(p, q).conj() * other.get(p, q) * self.orbit_size(p, q) as f64;
            }
        }
        acc
    }

    pub(crate) fn lags_mut(&mut self) -> &mut [C64] {
        &mut self.lags
    }
}

/// Dense `T(u)`.
pub fn build_toeplitz(u: &ToeplitzParam) -> Result<CMatrix> {
    let defect = u.hermitian_defect();
    if defect > 1e-12 * u.max_abs().max(1.0) {
        return Err(Error::Structure(format!("lag array is not Hermitian symmetric (defect {defect:e})")));
    }
    Ok(build_unchecked(u))
}

pub(crate) fn build_unchecked(u: &ToeplitzParam) -> CMatrix {
    let (n, m) = u.dims();
    let nm = n * m;
    let mut t = CMatrix::zeros(nm, nm);
    let out = t.as_mut_slice();
    for n1 in 0..n {
        for n2 in 0..n {
            let p = n1 as isize - n2 as isize;
            for m1 in 0..m {
                let row = (n1 * m + m1) * nm + n2 * m;
                for m2 in 0..m {
                    out[row + m2] = u.get(p, m1 as isize - m2 as isize);
                }
            }
        }
    }
    t
}

/// Orbit-averaging adjoint of [`build_toeplitz`], applied to the Hermitian
/// part of `g`.
pub fn toeplitz_adjoint(g: &CMatrix, n: usize, m: usize) -> Result<ToeplitzParam> {
    if n == 0 || m == 0 || g.rows() != n * m || g.cols() != n * m {
        return dim(format!("adjoint of a {}x{} matrix with N={n}, M={m}", g.rows(), g.cols()));
    }
    Ok(adjoint_unchecked(g, n, m))
}

pub(crate) fn adjoint_unchecked(g: &CMatrix, n: usize, m: usize) -> ToeplitzParam {
    let nm = n * m;
    let mut sums = ToeplitzParam::zeros(n, m);
    let src = g.as_slice();
    for n1 in 0..n {
        for n2 in 0..n {
            let p = n1 as isize - n2 as isize;
            for m1 in 0..m {
                let row = (n1 * m + m1) * nm + n2 * m;
                for m2 in 0..m {
                    let i = sums.idx(p, m1 as isize - m2 as isize);
                    sums.lags[i] += src[row + m2];
                }
            }
        }
    }
    // Average, then symmetrise: the pair (p, q), (-p, -q) of a Hermitian G
    // holds conjugate values, so this equals averaging the Hermitian part.
    let mut out = ToeplitzParam::zeros(n, m);
    for p in sums.p_range() {
        for q in sums.q_range() {
            if (p, q) < (-p, -q) {
                continue;
            }
            let w = sums.orbit_size(p, q) as f64;
            let a = sums.get(p, q) / w;
            let b = sums.get(-p, -q) / w;
            out.set_hermitian(p, q, (a + b.conj()) * 0.5);
        }
    }
    out
}

/// How the weighting floor `ε` is chosen from the previous lag estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EpsilonRule {
    /// `ε = factor · λ_max(T(u_prev)) + floor`.
    Relative { factor: f64, floor: f64 },
    Fixed { value: f64 },
}

impl Default for EpsilonRule {
    fn default() -> Self {
        EpsilonRule::Relative { factor: 0.1, floor: 1e-8 }
    }
}

impl EpsilonRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EpsilonRule::Relative { factor, floor } => {
                if !(factor >= 0.0 && floor > 0.0 && factor.is_finite() && floor.is_finite()) {
                    return param("relative epsilon rule needs factor >= 0 and floor > 0");
                }
            }
            EpsilonRule::Fixed { value } => {
                if !(value > 0.0 && value.is_finite()) {
                    return param("fixed epsilon must be positive");
                }
            }
        }
        Ok(())
    }

    pub fn epsilon(&self, lambda_max: f64) -> f64 {
        match *self {
            EpsilonRule::Relative { factor, floor } => factor * lambda_max.max(0.0) + floor,
            EpsilonRule::Fixed { value } => value,
        }
    }
}

/// `W = (T(u_prev)₊ + εI)⁻¹`, where `T₊` clamps negative eigenvalues to zero.
pub fn weight_matrix(u_prev: &ToeplitzParam, epsilon: f64) -> Result<CMatrix> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return param(format!("epsilon must be positive, got {epsilon}"));
    }
    let eig = hermitian_eig(&build_toeplitz(u_prev)?)?;
    Ok(weight_from_eig(&eig, epsilon))
}

/// [`weight_matrix`] with `ε` taken from `rule`; returns `(W, ε)`.
pub fn weight_matrix_with_rule(u_prev: &ToeplitzParam, rule: &EpsilonRule) -> Result<(CMatrix, f64)> {
    rule.validate()?;
    let eig = hermitian_eig(&build_toeplitz(u_prev)?)?;
    let eps = rule.epsilon(eig.max_eigenvalue());
    Ok((weight_from_eig(&eig, eps), eps))
}

fn weight_from_eig(eig: &EigenDecomposition, epsilon: f64) -> CMatrix {
    eig.spectral_map(|l| 1.0 / (l.max(0.0) + epsilon)).hermitian_part()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_param(n: usize, m: usize, rng: &mut ChaCha8Rng) -> ToeplitzParam {
        let mut u = ToeplitzParam::zeros(n, m);
        for p in u.p_range() {
            for q in u.q_range() {
                if (p, q) >= (0, 0) {
                    let v = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    u.set_hermitian(p, q, v);
                }
            }
        }
        u
    }

    fn random_hermitian(k: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(k, k, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .hermitian_part()
    }

    #[test]
    fn zero_lag_only_gives_identity() {
        let mut u = ToeplitzParam::zeros(3, 4);
        u.set_hermitian(0, 0, C64::new(1.0, 0.0));
        assert_eq!(build_toeplitz(&u).unwrap(), CMatrix::identity(12));
    }

    #[test]
    fn single_level_collapse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_param(1, 5, &mut rng);
        let t = build_toeplitz(&u).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(t[(i, j)], u.get(0, i as isize - j as isize));
            }
        }
    }

    #[test]
    fn single_atom_gives_rank_one_outer_product() {
        let (n, m) = (4, 3);
        let (w1, w2) = (0.7, -1.9);
        let u = ToeplitzParam::from_atoms(n, m, &[(1.0, w1, w2)]);
        let a: Vec<C64> = (0..n * m)
            .map(|i| C64::from_polar(1.0, -(w1 * (i / m) as f64 + w2 * (i % m) as f64)))
            .collect();
        let t = build_toeplitz(&u).unwrap();
        for i in 0..n * m {
            for j in 0..n * m {
                assert!((t[(i, j)] - a[i] * a[j].conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn asymmetric_lags_rejected() {
        let mut u = ToeplitzParam::zeros(2, 2);
        u.lags_mut()[0] = C64::new(1.0, 0.0);
        assert!(matches!(build_toeplitz(&u), Err(Error::Structure(_))));
    }

    #[test]
    fn block_structure_exhaustive_small_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=6 {
            for m in 1..=6 {
                let u = random_param(n, m, &mut rng);
                let t = build_toeplitz(&u).unwrap();
                assert_eq!(t.hermitian_defect(), 0.0);
                for i in 0..n * m {
                    for j in 0..n * m {
                        let (n1, m1, n2, m2) = (i / m, i % m, j / m, j % m);
                        // Blocks constant along block diagonals, Toeplitz inside.
                        if n1 + 1 < n && n2 + 1 < n {
                            assert_eq!(t[(i, j)], t[(i + m, j + m)]);
                        }
                        if m1 + 1 < m && m2 + 1 < m {
                            assert_eq!(t[(i, j)], t[(i + 1, j + 1)]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_of_identity() {
        let u = toeplitz_adjoint(&CMatrix::identity(6), 2, 3).unwrap();
        for p in u.p_range() {
            for q in u.q_range() {
                let expect = if (p, q) == (0, 0) { 1.0 } else { 0.0 };
                assert_eq!(u.get(p, q), C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn adjoint_is_left_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, m) in [(1, 1), (2, 3), (4, 4), (5, 2)] {
            let u = random_param(n, m, &mut rng);
            let back = toeplitz_adjoint(&build_toeplitz(&u).unwrap(), n, m).unwrap();
            for (a, b) in u.as_slice().iter().zip(back.as_slice()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_inner_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..100 {
            let (n, m) = (1 + trial % 4, 1 + (trial / 4) % 5);
            let u = random_param(n, m, &mut rng);
            let g = random_hermitian(n * m, &mut rng);
            let lhs = build_toeplitz(&u).unwrap().inner_complex(&g);
            let rhs = u.weighted_inner(&toeplitz_adjoint(&g, n, m).unwrap());
            assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
            // For a general G the identity holds for the real part.
            let g2 = CMatrix::from_fn(n * m, n * m, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let lhs2 = build_toeplitz(&u).unwrap().inner(&g2);
            let rhs2 = u.weighted_inner(&toeplitz_adjoint(&g2, n, m).unwrap()).re;
            assert!((lhs2 - rhs2).abs() < 1e-10);
        }
    }

    #[test]
    fn adjoint_dimension_mismatch() {
        assert!(matches!(toeplitz_adjoint(&CMatrix::identity(5), 2, 3), Err(Error::Dimension(_))));
    }

    #[test]
    fn rank_equals_atom_count() {
        let (n, m) = (6, 5);
        let atoms = [(1.0, 0.3, 2.0), (0.7, -1.2, 0.4), (1.4, 2.5, -2.2)];
        for k in 1..=3 {
            let u = ToeplitzParam::from_atoms(n, m, &atoms[..k]);
            let eig = hermitian_eig(&build_toeplitz(&u).unwrap()).unwrap();
            let vals = &eig.eigenvalues;
            let top = vals[n * m - k];
            let rest = vals[n * m - k - 1].abs().max(1e-300);
            assert!(top / rest > 1e6, "k={k}: gap {}", top / rest);
        }
    }

    #[test]
    fn weight_of_zero_lags_is_scaled_identity() {
        let w = weight_matrix(&ToeplitzParam::zeros(2, 3), 0.5).unwrap();
        assert!((&w - &CMatrix::identity(6).scale(2.0)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn weight_of_identity_with_unit_epsilon() {
        let mut u = ToeplitzParam::zeros(3, 2);
        u.set_hermitian(0, 0, C64::new(1.0, 0.0));
        let w = weight_matrix(&u, 1.0).unwrap();
        assert!((&w - &CMatrix::identity(6).scale(0.5)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn weight_spectrum_maps_clamped_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_param(3, 3, &mut rng);
        let eps = 0.3;
        let t_eig = hermitian_eig(&build_toeplitz(&u).unwrap()).unwrap();
        let w_eig = hermitian_eig(&weight_matrix(&u, eps).unwrap()).unwrap();
        let mut expect: Vec<f64> = t_eig.eigenvalues.iter().map(|l| 1.0 / (l.max(0.0) + eps)).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in w_eig.eigenvalues.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10 * b.max(1.0));
        }
        assert!(w_eig.min_eigenvalue() > 0.0);
    }

    #[test]
    fn epsilon_rule_default() {
        let rule = EpsilonRule::default();
        assert!((rule.epsilon(10.0) - (1.0 + 1e-8)).abs() < 1e-15);
        assert!(weight_matrix(&ToeplitzParam::zeros(1, 1), 0.0).is_err());
    }
}
