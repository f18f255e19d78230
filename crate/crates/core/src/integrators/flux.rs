//! Mesh-free integration on the parametric (NURBS) boundary via Green's theorem.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::geometry::{CartesianMesh, NurbsLoop, TestCase};
use crate::quadrature::{GaussLegendre, QuadratureData, MAX_GAUSS_POINTS};
use crate::scalar::Real;

use super::quadtree::{param_usize, reject_unknown};
use super::{missing_loop, Estimate, Integrator, IntegratorDescriptor, InterfaceType, MethodResult, Operation};

/// Gauss nodes on every non-degenerate knot span: `(w, point, velocity)`.
fn boundary_nodes<T: Real>(lp: &NurbsLoop<T>, order: usize) -> Result<Vec<(T, [T; 2], [T; 2])>> {
    let rule = GaussLegendre::<T>::new(order)?;
    let mut out = Vec::new();
    for c in &lp.curves {
        for (a, b) in c.spans() {
            for (t, w) in rule.on_interval(a, b) {
                out.push((w, c.point(t), c.velocity(t)));
            }
        }
    }
    Ok(out)
}

/// Signed 2D rule for the enclosed region.
///
/// Each boundary node `(x(t), y(t))` with weight `y'(t) w` spawns an inner
/// Gauss line from `x0` (leftmost control point) to `x(t)`, so that
/// `sum w_i f(p_i) ~ oint F dy` with `dF/dx = f`. Weights can be negative
/// where the boundary runs downwards.
pub fn flux_area_parametric<T: Real>(lp: &NurbsLoop<T>, order: usize) -> Result<(T, QuadratureData<T>)> {
    let inner = GaussLegendre::<T>::new(order)?;
    let x0 = lp
        .curves
        .iter()
        .flat_map(|c| c.control_points.iter().map(|p| p[0]))
        .fold(T::infinity(), T::min);
    if !x0.is_finite() {
        return Err(Error::invalid("empty parametric loop"));
    }
    let mut q = QuadratureData::new(2, ParametricFlux::NAME);
    for (w, p, v) in boundary_nodes(lp, order)? {
        let wy = w * v[1];
        if wy == T::zero() {
            continue;
        }
        for (s, ws) in inner.on_interval(x0, p[0]) {
            q.push(&[s, p[1]], wy * ws, None);
        }
    }
    Ok((q.total(), q))
}

/// `1/2 oint (x y' - y x') dt`.
pub fn green_area_parametric<T: Real>(lp: &NurbsLoop<T>, order: usize) -> Result<T> {
    let half = T::lit(0.5);
    Ok(boundary_nodes(lp, order)?
        .into_iter()
        .map(|(w, p, v)| half * w * (p[0] * v[1] - p[1] * v[0]))
        .sum())
}

/// Arc length with its rule (weights `|c'(t)| w` at curve points).
pub fn arc_length_parametric<T: Real>(lp: &NurbsLoop<T>, order: usize) -> Result<(T, QuadratureData<T>)> {
    let mut q = QuadratureData::new(2, ParametricFlux::NAME);
    for (w, p, v) in boundary_nodes(lp, order)? {
        q.push(&p, w * (v[0] * v[0] + v[1] * v[1]).sqrt(), None);
    }
    Ok((q.total(), q))
}

/// `oint x dy`, with the rule carrying weights `y'(t) w` at curve points.
fn x_dy<T: Real>(lp: &NurbsLoop<T>, order: usize) -> Result<(T, QuadratureData<T>)> {
    let mut q = QuadratureData::new(2, ParametricFlux::NAME);
    let mut value = T::zero();
    for (w, p, v) in boundary_nodes(lp, order)? {
        let wy = w * v[1];
        value = value + wy * p[0];
        q.push(&p, wy, None);
    }
    Ok((value, q))
}

/// Parametric flux integrator. Runs at `max(order, min_order)` Gauss points per span.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricFlux {
    pub min_order: usize,
}

impl Default for ParametricFlux {
    fn default() -> Self {
        ParametricFlux { min_order: 20 }
    }
}

impl ParametricFlux {
    pub const NAME: &'static str = "flux";

    pub fn from_params(params: &IndexMap<String, String>) -> Result<Self> {
        reject_unknown(params, &["min_order"], Self::NAME)?;
        let min_order = param_usize(params, "min_order", ParametricFlux::default().min_order)?;
        if !(1..=MAX_GAUSS_POINTS).contains(&min_order) {
            return Err(Error::invalid(format!("flux.min_order must be in 1..={MAX_GAUSS_POINTS}")));
        }
        Ok(ParametricFlux { min_order })
    }

    pub fn effective_order(&self, order: usize) -> usize {
        order.max(self.min_order)
    }

    fn with_loop<T: Real>(
        &self,
        tc: &TestCase<T>,
        order: usize,
        f: fn(&NurbsLoop<T>, usize) -> Result<(T, QuadratureData<T>)>,
    ) -> MethodResult<T> {
        let lp = tc.loop_.as_ref().ok_or_else(|| missing_loop(tc))?;
        let (value, quadrature) = f(lp, self.effective_order(order))?;
        Ok(Estimate {
            value,
            quadrature,
            fallback_cells: 0,
        })
    }
}

impl<T: Real> Integrator<T> for ParametricFlux {
    fn descriptor(&self) -> IntegratorDescriptor {
        IntegratorDescriptor {
            name: Self::NAME.into(),
            interface_type: InterfaceType::Parametric,
            supported_dims: vec![2],
            capabilities: vec![Operation::Area2d, Operation::CurveLength, Operation::AreaFlux2d],
            parameters: IndexMap::from([("min_order".to_string(), self.min_order.to_string())]),
        }
    }

    fn compute_area_2d(&self, tc: &TestCase<T>, _mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        self.with_loop(tc, order, flux_area_parametric)
    }

    fn compute_interface_curve_length(&self, tc: &TestCase<T>, _mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        self.with_loop(tc, order, arc_length_parametric)
    }

    fn compute_area_via_flux_2d(&self, tc: &TestCase<T>, _mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        self.with_loop(tc, order, x_dy)
    }

    /// Quadrature error on the exact geometry is negligible; the bound is a
    /// round-off allowance.
    fn error_bound(&self, op: Operation, tc: &TestCase<T>, _mesh: &CartesianMesh<T>, _order: usize) -> Option<f64> {
        if op.dim() != 2 {
            return None;
        }
        tc.reference(op.reference_kind()).map(|r| 1e-10 * r.to_f64_lossy().abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_area_and_length() {
        let lp = NurbsLoop::circle([0.5, 0.5], 0.2);
        let exact = PI * 0.04;
        let (a, q) = flux_area_parametric(&lp, 20).unwrap();
        assert!((a - exact).abs() / exact < 1e-13, "{a}");
        // the rule integrates x exactly over the disc: centroid x = 0.5
        assert!((q.integrate(|p| p[0]) - 0.5 * exact).abs() < 1e-13);
        assert!((green_area_parametric(&lp, 20).unwrap() - exact).abs() < 1e-14);
        let (l, _) = arc_length_parametric(&lp, 20).unwrap();
        assert!((l - 0.4 * PI).abs() / (0.4 * PI) < 1e-13);
        let (f, _) = x_dy(&lp, 20).unwrap();
        assert!((f - exact).abs() < 1e-14);
    }

    #[test]
    fn polygon_is_exact_at_low_order() {
        let lp = NurbsLoop::<f64>::polygon(&[[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]);
        let (a, q) = flux_area_parametric(&lp, 2).unwrap();
        assert!((a - 2.0).abs() < 1e-15);
        assert!((q.integrate(|p| p[0] * p[1]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_order_applies() {
        assert_eq!(ParametricFlux::default().effective_order(5), 20);
        assert_eq!(ParametricFlux::default().effective_order(30), 30);
    }
}
