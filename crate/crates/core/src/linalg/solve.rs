use super::{CMatrix, C64, ZERO};
use crate::error::{dim, Error, Result};

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return dim(format!("system {}x{} with rhs of length {}", a.rows(), a.cols(), b.len()));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = a.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()))
            .expect("non-empty pivot range");
        if m[(pivot, col)].norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Numeric("singular linear system".into()));
        }
        if pivot != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot, j)];
                m[(pivot, j)] = tmp;
            }
            x.swap(col, pivot);
        }
        let d = m[(col, col)];
        for i in (col + 1)..n {
            let f = m[(i, col)] / d;
            if f == ZERO {
                continue;
            }
            for j in col..n {
                let v = m[(col, j)];
                m[(i, j)] -= f * v;
            }
            let xc = x[col];
            x[i] -= f * xc;
        }
    }
    for i in (0..n).rev() {
        let s: C64 = ((i + 1)..n).map(|j| m[(i, j)] * x[j]).sum();
        x[i] = (x[i] - s) / m[(i, i)];
    }
    Ok(x)
}

/// Least-squares solution of `A x ≈ b` through the normal equations.
/// Intended for tall, well-conditioned systems with a handful of columns.
pub fn least_squares(a: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if b.len() != a.rows() {
        return dim(format!("{} rows against rhs of length {}", a.rows(), b.len()));
    }
    let ah = a.adjoint();
    let gram = ah.matmul(a)?;
    let rhs = ah.matvec(b)?;
    solve_linear(&gram, &rhs)
}
