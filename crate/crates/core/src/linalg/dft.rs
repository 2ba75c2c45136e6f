//! Centered, unitary 2D discrete Fourier transform.
//!
//! Transforms are separable: every row, then every column. A length that is
//! a power of two goes through an iterative radix-2 FFT, anything else through
//! the direct O(n²) sum. Both produce the same numbers to rounding.

use std::f64::consts::PI;

use super::{CMatrix, C64, ZERO};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

/// Zero-pads `data` by `zero_pad` in both dimensions, transforms, scales by
/// `1/√(P·Q)` for the padded size `P×Q`, and shifts DC to `(P/2, Q/2)`.
///
/// Panics if `zero_pad == 0`.
pub fn dft2(data: &CMatrix, zero_pad: usize) -> CMatrix {
    assert!(zero_pad >= 1, "zero_pad must be at least 1");
    let p = data.rows() * zero_pad;
    let q = data.cols() * zero_pad;
    let mut padded = CMatrix::zeros(p, q);
    padded.set_block(0, 0, data);
    let spectrum = transform2(padded, Direction::Forward);
    shift(&spectrum, p / 2, q / 2)
}

/// Inverse of [`dft2`] with `zero_pad = 1`: takes a centered spectrum and
/// returns the spatial matrix of the same size.
pub fn idft2(spectrum: &CMatrix) -> CMatrix {
    let p = spectrum.rows();
    let q = spectrum.cols();
    let unshifted = shift(spectrum, p - p / 2, q - q / 2);
    transform2(unshifted, Direction::Inverse)
}

fn transform2(mut m: CMatrix, dir: Direction) -> CMatrix {
    let (p, q) = (m.rows(), m.cols());
    if p == 0 || q == 0 {
        return m;
    }
    let mut buf = vec![ZERO; q];
    for i in 0..p {
        buf.copy_from_slice(m.row(i));
        let out = dft1(&buf, dir);
        m.as_mut_slice()[i * q..(i + 1) * q].copy_from_slice(&out);
    }
    let mut col = vec![ZERO; p];
    for j in 0..q {
        for i in 0..p {
            col[i] = m[(i, j)];
        }
        let out = dft1(&col, dir);
        for i in 0..p {
            m[(i, j)] = out[i];
        }
    }
    let norm = 1.0 / ((p * q) as f64).sqrt();
    for z in m.as_mut_slice() {
        *z *= norm;
    }
    m
}

/// Circular shift moving index 0 to `(r0, c0)`.
fn shift(m: &CMatrix, r0: usize, c0: usize) -> CMatrix {
    let (p, q) = (m.rows(), m.cols());
    let mut out = CMatrix::zeros(p, q);
    for i in 0..p {
        for j in 0..q {
            out[((i + r0) % p, (j + c0) % q)] = m[(i, j)];
        }
    }
    out
}

fn dft1(x: &[C64], dir: Direction) -> Vec<C64> {
    if x.len().is_power_of_two() {
        fft_radix2(x, dir)
    } else {
        dft_direct(x, dir)
    }
}

fn dft_direct(x: &[C64], dir: Direction) -> Vec<C64> {
    let n = x.len();
    let twiddle: Vec<C64> =
        (0..n).map(|k| C64::from_polar(1.0, dir.sign() * 2.0 * PI * k as f64 / n as f64)).collect();
    (0..n)
        .map(|k| x.iter().enumerate().map(|(j, &v)| v * twiddle[(j * k) % n]).sum())
        .collect()
}

fn fft_radix2(x: &[C64], dir: Direction) -> Vec<C64> {
    let n = x.len();
    let bits = n.trailing_zeros();
    let mut a: Vec<C64> = if n == 1 {
        x.to_vec()
    } else {
        (0..n).map(|i| x[i.reverse_bits() >> (usize::BITS - bits)]).collect()
    };
    let mut len = 2;
    while len <= n {
        let w = C64::from_polar(1.0, dir.sign() * 2.0 * PI / len as f64);
        for start in (0..n).step_by(len) {
            let mut wk = C64::new(1.0, 0.0);
            for k in 0..len / 2 {
                // Recompute periodically to stop the twiddle drifting.
                if k % 16 == 0 {
                    wk = C64::from_polar(1.0, dir.sign() * 2.0 * PI * k as f64 / len as f64);
                }
                let u = a[start + k];
                let v = a[start + k + len / 2] * wk;
                a[start + k] = u + v;
                a[start + k + len / 2] = u - v;
                wk *= w;
            }
        }
        len <<= 1;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn test_matrix(p: usize, q: usize) -> CMatrix {
        CMatrix::from_fn(p, q, |i, j| {
            C64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 * 0.5)
        })
    }

    #[test]
    fn constant_input_has_single_dc_bin() {
        let (n, m) = (6, 5);
        let s = dft2(&CMatrix::from_fn(n, m, |_, _| ONE), 1);
        let dc = s[(n / 2, m / 2)];
        assert!((dc.re - ((n * m) as f64).sqrt()).abs() < 1e-12 && dc.im.abs() < 1e-12);
        let rest: f64 = s.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() - dc.norm_sqr();
        assert!(rest.abs() < 1e-20);
    }

    #[test]
    fn parseval_holds_without_padding() {
        for (p, q) in [(8, 8), (5, 7), (16, 12)] {
            let a = test_matrix(p, q);
            let s = dft2(&a, 1);
            assert!((a.frobenius_norm() - s.frobenius_norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_recovers_input() {
        for (p, q) in [(8, 4), (6, 10), (1, 3)] {
            let a = test_matrix(p, q);
            let back = idft2(&dft2(&a, 1));
            assert!((&back - &a).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn radix2_matches_direct() {
        for n in [1, 2, 4, 8, 64, 256] {
            let x: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
            for dir in [Direction::Forward, Direction::Inverse] {
                let a = fft_radix2(&x, dir);
                let b = dft_direct(&x, dir);
                let err: f64 = a.iter().zip(&b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
                assert!(err < 1e-10, "n={n} err={err}");
            }
        }
    }

    #[test]
    fn tone_lands_on_expected_bin() {
        // x[n, m] = exp(-j 2π (3n/8 + 1m/4)) peaks at bin (-3, -1) relative to DC.
        let a = CMatrix::from_fn(8, 4, |n, m| {
            C64::from_polar(1.0, -2.0 * PI * (3.0 * n as f64 / 8.0 + m as f64 / 4.0))
        });
        let s = dft2(&a, 1);
        let (mut bi, mut bj, mut best) = (0, 0, 0.0);
        for i in 0..8 {
            for j in 0..4 {
                if s[(i, j)].norm() > best {
                    best = s[(i, j)].norm();
                    (bi, bj) = (i, j);
                }
            }
        }
        assert_eq!((bi as isize - 4, bj as isize - 2), (-3, -1));
    }
}
