//! Dense Householder QR for the small least-squares systems of moment fitting.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is rank deficient (numerical rank {rank} of {expected})")]
    RankDeficient { rank: usize, expected: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Householder QR of a tall matrix (`rows >= cols`), stored column-major.
struct HouseholderQr<T> {
    rows: usize,
    cols: usize,
    /// R in the upper triangle (diagonal kept in `diag`).
    a: Vec<T>,
    diag: Vec<T>,
    vs: Vec<Vec<T>>,
    betas: Vec<T>,
}

impl<T: Real> HouseholderQr<T> {
    fn factor(mut a: Vec<T>, rows: usize, cols: usize) -> Self {
        debug_assert!(rows >= cols);
        let idx = |r: usize, c: usize| c * rows + r;
        let mut diag = Vec::with_capacity(cols);
        let mut vs = Vec::with_capacity(cols);
        let mut betas = Vec::with_capacity(cols);
        for k in 0..cols {
            let mut v: Vec<T> = (k..rows).map(|r| a[idx(r, k)]).collect();
            let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
            let alpha = if v[0] > T::zero() { -norm } else { norm };
            v[0] = v[0] - alpha;
            let vv = v.iter().map(|&x| x * x).sum::<T>();
            let beta = if vv > T::zero() { T::lit(2.0) / vv } else { T::zero() };
            for c in k..cols {
                let dot = (k..rows).map(|r| v[r - k] * a[idx(r, c)]).sum::<T>();
                let f = beta * dot;
                for r in k..rows {
                    a[idx(r, c)] = a[idx(r, c)] - f * v[r - k];
                }
            }
            diag.push(if beta == T::zero() { a[idx(k, k)] } else { alpha });
            vs.push(v);
            betas.push(beta);
        }
        HouseholderQr { rows, cols, a, diag, vs, betas }
    }

    fn reflect(&self, k: usize, x: &mut [T]) {
        let v = &self.vs[k];
        let dot = v.iter().zip(&x[k..]).map(|(&a, &b)| a * b).sum::<T>();
        let f = self.betas[k] * dot;
        for (xi, &vi) in x[k..].iter_mut().zip(v) {
            *xi = *xi - f * vi;
        }
    }

    fn apply_qt(&self, x: &mut [T]) {
        for k in 0..self.cols {
            self.reflect(k, x);
        }
    }

    fn apply_q(&self, x: &mut [T]) {
        for k in (0..self.cols).rev() {
            self.reflect(k, x);
        }
    }

    fn r(&self, r: usize, c: usize) -> T {
        if r == c {
            self.diag[r]
        } else {
            self.a[c * self.rows + r]
        }
    }

    fn check_rank(&self) -> Result<(), LinalgError> {
        let max = self.diag.iter().fold(T::zero(), |m, d| m.max(d.abs()));
        let tol = max * T::lit(1e-12).max(T::epsilon() * T::lit(1e3));
        let rank = self.diag.iter().filter(|d| d.abs() > tol).count();
        if rank < self.cols || max == T::zero() {
            return Err(LinalgError::RankDeficient { rank, expected: self.cols });
        }
        Ok(())
    }

    /// Solves `R x = y` (upper triangular).
    fn solve_r(&self, y: &[T]) -> Vec<T> {
        let n = self.cols;
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s = s - self.r(i, j) * x[j];
            }
            x[i] = s / self.r(i, i);
        }
        x
    }

    /// Solves `R^T z = b` (lower triangular).
    fn solve_rt(&self, b: &[T]) -> Vec<T> {
        let n = self.cols;
        let mut z = vec![T::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s = s - self.r(j, i) * z[j];
            }
            z[i] = s / self.r(i, i);
        }
        z
    }
}

/// Least-squares solution of `A x = b` for `A` given as rows.
///
/// Tall or square systems minimise `|A x - b|`; wide systems return the
/// minimum-norm exact solution.
pub fn least_squares<T: Real>(rows: &[Vec<T>], b: &[T]) -> Result<Vec<T>, LinalgError> {
    let m = rows.len();
    if m == 0 || b.len() != m {
        return Err(LinalgError::Shape(format!("{m} rows, rhs length {}", b.len())));
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) || n == 0 {
        return Err(LinalgError::Shape("ragged matrix".into()));
    }
    if m >= n {
        let mut a = vec![T::zero(); m * n];
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                a[c * m + r] = v;
            }
        }
        let qr = HouseholderQr::factor(a, m, n);
        qr.check_rank()?;
        let mut y = b.to_vec();
        qr.apply_qt(&mut y);
        Ok(qr.solve_r(&y[..n]))
    } else {
        // factor A^T (n x m), column-major: column r of A^T is row r of A
        let a: Vec<T> = rows.iter().flat_map(|row| row.iter().copied()).collect();
        let qr = HouseholderQr::factor(a, n, m);
        qr.check_rank()?;
        let z = qr.solve_rt(b);
        let mut x = vec![T::zero(); n];
        x[..m].copy_from_slice(&z);
        qr.apply_q(&mut x);
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(rows: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    #[test]
    fn square_system() {
        let a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        let x_true = [1.0, -2.0, 0.5];
        let b = matvec(&a, &x_true);
        let x = least_squares(&a, &b).unwrap();
        for (u, v) in x.iter().zip(x_true) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn overdetermined_line_fit() {
        // fit y = c0 + c1 t through exact data
        let ts = [0.0, 1.0, 2.0, 3.0, 4.0];
        let a: Vec<Vec<f64>> = ts.iter().map(|&t| vec![1.0, t]).collect();
        let b: Vec<f64> = ts.iter().map(|&t| 3.0 - 0.5 * t).collect();
        let x = least_squares(&a, &b).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-14 && (x[1] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn underdetermined_minimum_norm() {
        let a = vec![vec![1.0, 1.0, 1.0, 1.0]];
        let x: Vec<f64> = least_squares(&a, &[2.0]).unwrap();
        for v in x {
            assert!((v - 0.5).abs() < 1e-15);
        }
        let a = vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]];
        let b = [1.0, 2.0];
        let x = least_squares(&a, &b).unwrap();
        let r = matvec(&a, &x);
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficiency_detected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        assert!(matches!(least_squares(&a, &[1.0, 2.0, 3.0]), Err(LinalgError::RankDeficient { .. })));
        let wide = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]];
        assert!(least_squares(&wide, &[1.0, 2.0]).is_err());
    }
}
