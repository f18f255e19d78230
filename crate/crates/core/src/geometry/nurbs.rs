//! Rational B-spline curves and closed loops of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Planar NURBS curve, `x(t) = sum N_i(t) w_i P_i / sum N_i(t) w_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NurbsCurve<T> {
    pub degree: usize,
    pub knots: Vec<T>,
    pub control_points: Vec<[T; 2]>,
    pub weights: Vec<T>,
}

impl<T: Real> NurbsCurve<T> {
    pub fn new(
        degree: usize,
        knots: Vec<T>,
        control_points: Vec<[T; 2]>,
        weights: Vec<T>,
    ) -> Result<Self> {
        let c = NurbsCurve {
            degree,
            knots,
            control_points,
            weights,
        };
        c.validate()?;
        Ok(c)
    }

    /// Straight segment from `a` to `b` as a degree-1 curve on `[0, 1]`.
    pub fn line(a: [T; 2], b: [T; 2]) -> Self {
        let (z, o) = (T::zero(), T::one());
        NurbsCurve {
            degree: 1,
            knots: vec![z, z, o, o],
            control_points: vec![a, b],
            weights: vec![o, o],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.control_points.len();
        let p = self.degree;
        if n < p + 1 {
            return Err(Error::invalid(format!(
                "degree {p} curve needs at least {} control points, got {n}",
                p + 1
            )));
        }
        if self.knots.len() != n + p + 1 {
            return Err(Error::invalid(format!(
                "knot count {} != control points {n} + degree {p} + 1",
                self.knots.len()
            )));
        }
        if self.weights.len() != n {
            return Err(Error::invalid(format!(
                "weight count {} != control point count {n}",
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|&w| !(w > T::zero() && w.is_finite())) {
            return Err(Error::invalid("NURBS weights must be positive"));
        }
        if self.knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("knot sequence must be non-decreasing"));
        }
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if self.knots[..=p].iter().any(|&k| k != first)
            || self.knots[self.knots.len() - p - 1..]
                .iter()
                .any(|&k| k != last)
        {
            return Err(Error::invalid(
                "end knots must have multiplicity degree + 1 (clamped curve)",
            ));
        }
        if !(last > first) {
            return Err(Error::invalid("knot vector spans a zero-length parameter range"));
        }
        Ok(())
    }

    /// Parameter range `[first knot, last knot]`.
    pub fn domain(&self) -> (T, T) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Non-degenerate knot spans `[a, b]` with `a < b`.
    pub fn spans(&self) -> Vec<(T, T)> {
        self.knots
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect()
    }

    fn check_param(&self, t: T) -> Result<()> {
        let (a, b) = self.domain();
        if !(b > a) {
            return Err(Error::invalid("query on a zero-length knot span"));
        }
        if !(t >= a && t <= b) {
            return Err(Error::invalid(format!(
                "parameter {t} outside knot range [{a}, {b}]"
            )));
        }
        Ok(())
    }

    /// Index `s` with `knots[s] <= t < knots[s+1]`; the last non-empty span for `t = end`.
    fn find_span(&self, t: T) -> usize {
        let n = self.control_points.len();
        let p = self.degree;
        if t >= self.knots[n] {
            return n - 1;
        }
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Non-zero basis values and first derivatives at `t` on span `s`.
    fn basis_with_derivs(&self, s: usize, t: T) -> (Vec<T>, Vec<T>) {
        let p = self.degree;
        let k = &self.knots;
        // ndu[j][r]: basis values (upper triangle) and knot differences (lower triangle)
        let mut ndu = vec![vec![T::zero(); p + 1]; p + 1];
        let mut left = vec![T::zero(); p + 1];
        let mut right = vec![T::zero(); p + 1];
        ndu[0][0] = T::one();
        for j in 1..=p {
            left[j] = t - k[s + 1 - j];
            right[j] = k[s + j] - t;
            let mut saved = T::zero();
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let tmp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            ndu[j][j] = saved;
        }
        let values: Vec<T> = (0..=p).map(|j| ndu[j][p]).collect();
        let mut derivs = vec![T::zero(); p + 1];
        if p > 0 {
            let pf = T::from_usize_lossy(p);
            for (r, d) in derivs.iter_mut().enumerate() {
                let mut acc = T::zero();
                if r >= 1 {
                    acc = acc + ndu[r - 1][p - 1] / ndu[p][r - 1];
                }
                if r < p {
                    acc = acc - ndu[r][p - 1] / ndu[p][r];
                }
                *d = acc * pf;
            }
        }
        (values, derivs)
    }

    /// Homogeneous sums `(A, W, A', W')` at `t`.
    fn homogeneous(&self, t: T) -> ([T; 2], T, [T; 2], T) {
        let s = self.find_span(t);
        let (n, dn) = self.basis_with_derivs(s, t);
        let first = s - self.degree;
        let mut a = [T::zero(); 2];
        let mut da = [T::zero(); 2];
        let mut w = T::zero();
        let mut dw = T::zero();
        for j in 0..=self.degree {
            let i = first + j;
            let wi = self.weights[i];
            let p = self.control_points[i];
            w = w + n[j] * wi;
            dw = dw + dn[j] * wi;
            for ax in 0..2 {
                a[ax] = a[ax] + n[j] * wi * p[ax];
                da[ax] = da[ax] + dn[j] * wi * p[ax];
            }
        }
        (a, w, da, dw)
    }

    /// Point on the curve.
    pub fn eval(&self, t: T) -> Result<[T; 2]> {
        self.check_param(t)?;
        Ok(self.point(t))
    }

    /// Velocity `dx/dt` (quotient rule on the homogeneous form).
    pub fn derivative(&self, t: T) -> Result<[T; 2]> {
        self.check_param(t)?;
        Ok(self.velocity(t))
    }

    /// Unchecked evaluation; `t` must lie in [`NurbsCurve::domain`].
    pub fn point(&self, t: T) -> [T; 2] {
        let (a, w, _, _) = self.homogeneous(t);
        [a[0] / w, a[1] / w]
    }

    /// Unchecked derivative; `t` must lie in [`NurbsCurve::domain`].
    pub fn velocity(&self, t: T) -> [T; 2] {
        let (a, w, da, dw) = self.homogeneous(t);
        let x = [a[0] / w, a[1] / w];
        [(da[0] - dw * x[0]) / w, (da[1] - dw * x[1]) / w]
    }

    pub fn start(&self) -> [T; 2] {
        self.point(self.domain().0)
    }

    pub fn end(&self) -> [T; 2] {
        self.point(self.domain().1)
    }

    /// Same geometry traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let (a, b) = self.domain();
        NurbsCurve {
            degree: self.degree,
            knots: self.knots.iter().rev().map(|&k| a + b - k).collect(),
            control_points: self.control_points.iter().rev().copied().collect(),
            weights: self.weights.iter().rev().copied().collect(),
        }
    }

    pub fn translated(&self, offset: [T; 2]) -> Self {
        let mut c = self.clone();
        for p in &mut c.control_points {
            p[0] = p[0] + offset[0];
            p[1] = p[1] + offset[1];
        }
        c
    }
}

/// Closed, counter-clockwise loop of NURBS curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NurbsLoop<T> {
    pub curves: Vec<NurbsCurve<T>>,
}

const CLOSURE_TOL: f64 = 1e-12;
const ORIENTATION_SAMPLES: usize = 1024;

impl<T: Real> NurbsLoop<T> {
    pub fn new(curves: Vec<NurbsCurve<T>>) -> Result<Self> {
        let l = NurbsLoop { curves };
        l.validate()?;
        Ok(l)
    }

    /// Checks curve validity, cyclic closure and counter-clockwise orientation.
    pub fn validate(&self) -> Result<()> {
        self.validate_closed()?;
        let area = self.polyline_signed_area(ORIENTATION_SAMPLES);
        if !(area > T::zero()) {
            return Err(Error::invalid(format!(
                "loop must be counter-clockwise (sampled signed area {area})"
            )));
        }
        Ok(())
    }

    /// Checks curve validity and closure only (accepts either orientation).
    pub fn validate_closed(&self) -> Result<()> {
        if self.curves.is_empty() {
            return Err(Error::invalid("loop has no curves"));
        }
        for c in &self.curves {
            c.validate()?;
        }
        let m = self.curves.len();
        let tol = T::tol_floor(CLOSURE_TOL);
        for i in 0..m {
            let e = self.curves[i].end();
            let s = self.curves[(i + 1) % m].start();
            let gap = ((e[0] - s[0]).powi(2) + (e[1] - s[1]).powi(2)).sqrt();
            if gap > tol {
                return Err(Error::invalid(format!(
                    "loop not closed: gap {gap} between curve {i} and curve {}",
                    (i + 1) % m
                )));
            }
        }
        Ok(())
    }

    /// `n` points spread uniformly in parameter over the curves (equal share per curve).
    pub fn sample(&self, n: usize) -> Vec<[T; 2]> {
        let m = self.curves.len();
        (0..n)
            .map(|k| {
                let s = T::from_usize_lossy(k * m) / T::from_usize_lossy(n);
                let ci = (s.floor().to_usize().unwrap_or(0)).min(m - 1);
                let frac = s - T::from_usize_lossy(ci);
                let c = &self.curves[ci];
                let (a, b) = c.domain();
                c.point(a + (b - a) * frac)
            })
            .collect()
    }

    /// Shoelace area of the closed polyline through `n` samples.
    pub fn polyline_signed_area(&self, n: usize) -> T {
        let pts = self.sample(n);
        let half = T::lit(0.5);
        (0..pts.len())
            .map(|i| {
                let a = pts[i];
                let b = pts[(i + 1) % pts.len()];
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<T>()
            * half
    }

    pub fn reversed(&self) -> Self {
        NurbsLoop {
            curves: self.curves.iter().rev().map(NurbsCurve::reversed).collect(),
        }
    }

    pub fn translated(&self, offset: [T; 2]) -> Self {
        NurbsLoop {
            curves: self.curves.iter().map(|c| c.translated(offset)).collect(),
        }
    }

    /// Axis-aligned scaling about `origin` (maps circles to ellipses exactly).
    pub fn scaled(&self, origin: [T; 2], factors: [T; 2]) -> Self {
        let mut l = self.clone();
        for c in &mut l.curves {
            for p in &mut c.control_points {
                p[0] = origin[0] + (p[0] - origin[0]) * factors[0];
                p[1] = origin[1] + (p[1] - origin[1]) * factors[1];
            }
        }
        l
    }

    /// Rational quadratic circle: one curve, four arcs, nine control points.
    pub fn circle(center: [T; 2], radius: T) -> Self {
        let (cx, cy, r) = (center[0], center[1], radius);
        let o = T::one();
        let w = T::FRAC_1_SQRT_2();
        let z = T::zero();
        let q = T::lit(0.25);
        let h = T::lit(0.5);
        let tq = T::lit(0.75);
        let control_points = vec![
            [cx + r, cy],
            [cx + r, cy + r],
            [cx, cy + r],
            [cx - r, cy + r],
            [cx - r, cy],
            [cx - r, cy - r],
            [cx, cy - r],
            [cx + r, cy - r],
            [cx + r, cy],
        ];
        NurbsLoop {
            curves: vec![NurbsCurve {
                degree: 2,
                knots: vec![z, z, z, q, q, h, h, tq, tq, o, o, o],
                control_points,
                weights: vec![o, w, o, w, o, w, o, w, o],
            }],
        }
    }

    /// Counter-clockwise loop of straight segments through `vertices`.
    pub fn polygon(vertices: &[[T; 2]]) -> Self {
        let n = vertices.len();
        NurbsLoop {
            curves: (0..n)
                .map(|i| NurbsCurve::line(vertices[i], vertices[(i + 1) % n]))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_segment() -> NurbsCurve<f64> {
        NurbsCurve::new(
            1,
            vec![0.0, 0.0, 1.0, 1.0],
            vec![[0.0, 0.0], [1.0, 0.0]],
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn linear_interpolation() {
        let c = unit_segment();
        assert_eq!(c.eval(0.5).unwrap(), [0.5, 0.0]);
        assert_eq!(c.eval(1.0).unwrap(), [1.0, 0.0]);
        assert_eq!(c.derivative(0.3).unwrap(), [1.0, 0.0]);
    }

    #[test]
    fn out_of_range_parameter() {
        let c = unit_segment();
        assert!(c.eval(1.5).is_err());
        assert!(c.derivative(-0.1).is_err());
    }

    #[test]
    fn zero_length_range_is_rejected() {
        let c = NurbsCurve {
            degree: 1,
            knots: vec![0.0, 0.0, 0.0, 0.0],
            control_points: vec![[0.0, 0.0], [1.0, 0.0]],
            weights: vec![1.0, 1.0],
        };
        assert!(c.validate().is_err());
        assert!(c.derivative(0.0).is_err());
        assert!(c.eval(0.0).is_err());
    }

    #[test]
    fn invariant_violations() {
        // knot count
        assert!(NurbsCurve::new(1, vec![0.0, 1.0, 1.0], vec![[0.0, 0.0], [1.0, 0.0]], vec![1.0, 1.0]).is_err());
        // weights
        assert!(NurbsCurve::new(1, vec![0.0, 0.0, 1.0, 1.0], vec![[0.0, 0.0], [1.0, 0.0]], vec![1.0, 0.0]).is_err());
        // unclamped
        assert!(NurbsCurve::new(1, vec![0.0, 0.5, 1.0, 1.0], vec![[0.0, 0.0], [1.0, 0.0]], vec![1.0, 1.0]).is_err());
        // decreasing
        assert!(NurbsCurve::new(2, vec![0.0, 0.0, 0.0, 0.7, 0.5, 1.0, 1.0, 1.0], vec![[0.0, 0.0]; 5], vec![1.0; 5]).is_err());
    }

    #[test]
    fn circle_points_lie_on_the_circle() {
        let l = NurbsLoop::circle([0.5, 0.5], 0.2);
        l.validate().unwrap();
        let c = &l.curves[0];
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            let p = c.eval(t).unwrap();
            let r = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)).sqrt();
            assert!((r - 0.2).abs() < 1e-13, "t={t} r={r}");
        }
        assert_eq!(c.eval(1.0).unwrap(), [0.7, 0.5]);
    }

    #[test]
    fn circle_tangent_is_orthogonal_to_radius() {
        let c = &NurbsLoop::<f64>::circle([0.5, 0.5], 0.2).curves[0];
        for mid in [0.125, 0.375, 0.625, 0.875] {
            let p = c.eval(mid).unwrap();
            let v = c.derivative(mid).unwrap();
            let dot = v[0] * (p[0] - 0.5) + v[1] * (p[1] - 0.5);
            assert!(dot.abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let c = &NurbsLoop::<f64>::circle([0.5, 0.5], 0.2).curves[0];
        let h = 1e-6;
        // off-knot parameters; the second derivative jumps at the arc joints
        for k in 0..40 {
            let t = (k as f64 + 0.5) / 40.0;
            let v = c.derivative(t).unwrap();
            let a = c.eval(t - h).unwrap();
            let b = c.eval(t + h).unwrap();
            for ax in 0..2 {
                let fd = (b[ax] - a[ax]) / (2.0 * h);
                let scale = v[0].hypot(v[1]);
                assert!((fd - v[ax]).abs() <= 1e-6 * scale, "t={t} ax={ax} fd={fd} v={v:?}");
            }
        }
    }

    #[test]
    fn reversed_loop_is_clockwise() {
        let l = NurbsLoop::circle([0.5, 0.5], 0.2).reversed();
        l.validate_closed().unwrap();
        assert!(l.validate().is_err());
        assert!(l.polyline_signed_area(256) < 0.0);
    }

    #[test]
    fn open_loop_rejected() {
        let l = NurbsLoop::new(vec![
            NurbsCurve::line([0.0, 0.0], [1.0, 0.0]),
            NurbsCurve::line([1.0, 0.0], [1.0, 1.0]),
        ]);
        assert!(l.is_err());
    }
}
