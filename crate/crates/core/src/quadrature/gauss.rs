//! Gauss–Legendre rules by Newton iteration on the Legendre polynomials.

use crate::error::{Error, Result};
use crate::geometry::Aabb;
use crate::scalar::Real;

use super::QuadratureData;

pub const MAX_GAUSS_POINTS: usize = 64;
const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// One-dimensional Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let dp = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=MAX_GAUSS_POINTS).contains(&n) {
            return Err(Error::invalid(format!(
                "Gauss-Legendre point count must be in 1..={MAX_GAUSS_POINTS}, got {n}"
            )));
        }
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        if n == 1 {
            weights[0] = T::lit(2.0);
            return Ok(GaussLegendre { nodes, weights });
        }
        let tol = T::tol_floor(NEWTON_TOL);
        let nf = T::from_usize_lossy(n);
        for i in 0..n / 2 {
            // Tricomi-style initial guess for the i-th largest root.
            let mut x = (T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..NEWTON_MAX_ITER {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= tol {
                    dp = legendre(n, x).1;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            let (_, dp) = legendre(n, T::zero());
            weights[n / 2] = T::lit(2.0) / (dp * dp);
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Appends the tensor-product rule on `cell` to `out`.
    pub fn push_tensor(&self, cell: &Aabb<T>, cell_index: Option<usize>, out: &mut QuadratureData<T>) {
        let d = cell.dim();
        debug_assert_eq!(d, out.dim());
        let axes: Vec<Vec<(T, T)>> = (0..d)
            .map(|a| self.on_interval(cell.lo[a], cell.hi[a]).collect())
            .collect();
        let n = self.len();
        let total = n.pow(d as u32);
        let mut p = vec![T::zero(); d];
        for flat in 0..total {
            let mut rem = flat;
            let mut w = T::one();
            for a in 0..d {
                let (x, wa) = axes[a][rem % n];
                rem /= n;
                p[a] = x;
                w = w * wa;
            }
            out.push(&p, w, cell_index);
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<(Vec<T>, Vec<T>)> {
    let g = GaussLegendre::new(n)?;
    Ok((g.nodes, g.weights))
}

/// `n^D`-point tensor Gauss rule on `cell`.
pub fn tensor_rule<T: Real>(n: usize, cell: &Aabb<T>) -> Result<QuadratureData<T>> {
    cell.validate()?;
    let g = GaussLegendre::new(n)?;
    let mut q = QuadratureData::new(cell.dim(), "tensor");
    g.push_tensor(cell, None, &mut q);
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact integral of t^d over [-1, 1].
    fn monomial_integral(d: u32) -> f64 {
        if d % 2 == 1 {
            0.0
        } else {
            2.0 / (d as f64 + 1.0)
        }
    }

    #[test]
    fn one_point() {
        let (x, w) = gauss_legendre::<f64>(1).unwrap();
        assert_eq!(x, vec![0.0]);
        assert_eq!(w, vec![2.0]);
    }

    #[test]
    fn two_points() {
        let (x, w) = gauss_legendre::<f64>(2).unwrap();
        let r = 1.0 / 3.0_f64.sqrt();
        assert!((x[0] + r).abs() <= 2e-16 && (x[1] - r).abs() <= 2e-16);
        assert!((x[1] - 0.5773502691896257).abs() <= 2e-16);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn five_points_degree_eight() {
        let g = GaussLegendre::<f64>::new(5).unwrap();
        let v = g.integrate(-1.0, 1.0, |t| t.powi(8));
        assert!((v - 2.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn out_of_range() {
        assert!(gauss_legendre::<f64>(0).is_err());
        assert!(gauss_legendre::<f64>(65).is_err());
        assert!(gauss_legendre::<f64>(64).is_ok());
    }

    #[test]
    fn symmetric_and_normalised() {
        for n in 1..=64 {
            let (x, w) = gauss_legendre::<f64>(n).unwrap();
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
            for i in 0..n {
                assert_eq!(x[i], -x[n - 1 - i]);
                assert!(w[i] > 0.0);
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn exactness_up_to_sixteen() {
        for n in 1..=16 {
            let g = GaussLegendre::<f64>::new(n).unwrap();
            for d in 0..=(2 * n as u32 - 1) {
                let v = g.integrate(-1.0, 1.0, |t| t.powi(d as i32));
                assert!((v - monomial_integral(d)).abs() <= 1e-13, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn single_precision_rule() {
        let g = GaussLegendre::<f32>::new(6).unwrap();
        let v = g.integrate(-1.0, 1.0, |t| t.powi(10));
        assert!((v - 2.0 / 11.0).abs() < 1e-6);
    }

    #[test]
    fn tensor_rules() {
        let q = tensor_rule(2, &Aabb::<f64>::unit(2)).unwrap();
        assert_eq!(q.len(), 4);
        assert!((q.total() - 1.0).abs() < 1e-15);
        let xy = q.integrate(|p| p[0] * p[1]);
        assert!((xy - 0.25).abs() < 1e-14);

        let cube = Aabb::new(vec![0.0; 3], vec![0.5; 3]).unwrap();
        let q: QuadratureData<f64> = tensor_rule(3, &cube).unwrap();
        assert_eq!(q.len(), 27);
        assert!((q.total() - 0.125).abs() < 1e-15);
    }
}
