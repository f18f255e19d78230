//! Moment fitting: cut-cell weights at fixed tensor Gauss nodes solved from
//! reconstructed polygon moments.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::geometry::{mesh_cells, Aabb, CartesianMesh, Implicit, TestCase};
use crate::quadrature::linalg::{least_squares, LinalgError};
use crate::quadrature::{classify_cell, marching_squares_polygon, monomial_exponents, polygon_moments, CellClass, GaussLegendre, QuadratureData};
use crate::scalar::Real;

use super::quadtree::{param_usize, reject_unknown, DEFAULT_SAMPLES};
use super::reconstruction::{subcells, MAX_SUBDIVISIONS};
use super::{chord_bound, Estimate, Integrator, IntegratorDescriptor, InterfaceType, MethodError, MethodResult, Operation};

/// Fitted weights must reproduce the moments to this tolerance, relative to the cell measure.
pub const MOMENT_RESIDUAL_TOL: f64 = 1e-10;

/// Fits weights on the `order x order` Gauss nodes of `cell` so that all
/// monomials up to total degree `fit.effective_degree(order)` integrate to the
/// moments of the reconstructed inside region. The reconstruction splits the
/// cell into `2^fit.subdivisions` sub-cells per axis and runs marching squares
/// on the cut ones. Uncut cells short-circuit to the tensor rule or an empty rule.
///
/// Returns the rule and the max moment residual.
pub fn moment_fit_cell<T: Real, L: Implicit<T> + ?Sized>(
    ls: &L,
    cell: &Aabb<T>,
    fit: &MomentFitting,
    order: usize,
    cell_index: Option<usize>,
) -> Result<(QuadratureData<T>, T), MethodError> {
    let degree = fit.effective_degree(order);
    let rule = GaussLegendre::<T>::new(order)?;
    match classify_cell(ls, cell, fit.samples) {
        CellClass::Inside => {
            let mut q = QuadratureData::new(2, MomentFitting::NAME);
            rule.push_tensor(cell, cell_index, &mut q);
            return Ok((q, T::zero()));
        }
        CellClass::Outside => return Ok((QuadratureData::new(2, MomentFitting::NAME), T::zero())),
        CellClass::Cut => {}
    }
    let mut polygons = Vec::new();
    for sub in subcells(cell, 1 << fit.subdivisions) {
        match classify_cell(ls, &sub, fit.samples) {
            CellClass::Inside => polygons.push(vec![
                [sub.lo[0], sub.lo[1]],
                [sub.hi[0], sub.lo[1]],
                [sub.hi[0], sub.hi[1]],
                [sub.lo[0], sub.hi[1]],
            ]),
            CellClass::Outside => {}
            CellClass::Cut => polygons.extend(marching_squares_polygon(ls, &sub, fit.samples).polygons),
        }
    }
    let half = T::lit(0.5);
    let origin = [(cell.lo[0] + cell.hi[0]) * half, (cell.lo[1] + cell.hi[1]) * half];
    let scale = [cell.width(0) * half, cell.width(1) * half];
    let targets = polygon_moments(&polygons, degree, origin, scale);

    let nodes: Vec<[T; 2]> = rule
        .nodes
        .iter()
        .flat_map(|&y| rule.nodes.iter().map(move |&x| [x, y]))
        .collect();
    let exps = monomial_exponents(degree);
    let rows: Vec<Vec<T>> = exps
        .iter()
        .map(|&(i, j)| nodes.iter().map(|p| p[0].powi(i as i32) * p[1].powi(j as i32)).collect())
        .collect();
    let w = least_squares(&rows, &targets).map_err(|e| match e {
        LinalgError::RankDeficient { rank, expected } => {
            MethodError::Failed(format!("moment system rank {rank} < {expected}"))
        }
        LinalgError::Shape(s) => MethodError::Failed(s),
    })?;

    let mut residual = T::zero();
    for (row, &t) in rows.iter().zip(&targets) {
        let r: T = row.iter().zip(&w).map(|(&a, &b)| a * b).sum();
        residual = residual.max((r - t).abs());
    }
    if residual > T::lit(MOMENT_RESIDUAL_TOL) * cell.measure() {
        return Err(MethodError::Failed(format!("moment residual {residual} exceeds tolerance")));
    }

    let mut q = QuadratureData::new(2, MomentFitting::NAME);
    for (p, &wt) in nodes.iter().zip(&w) {
        q.push(&[origin[0] + scale[0] * p[0], origin[1] + scale[1] * p[1]], wt, cell_index);
    }
    Ok((q, residual))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentFitting {
    pub degree: usize,
    pub samples: usize,
    pub subdivisions: usize,
}

impl Default for MomentFitting {
    fn default() -> Self {
        MomentFitting {
            degree: 3,
            samples: DEFAULT_SAMPLES,
            subdivisions: 2,
        }
    }
}

impl MomentFitting {
    pub const NAME: &'static str = "moment-fit";

    pub fn from_params(params: &IndexMap<String, String>) -> Result<Self> {
        reject_unknown(params, &["degree", "samples", "subdivisions"], Self::NAME)?;
        let d = MomentFitting::default();
        let m = MomentFitting {
            degree: param_usize(params, "degree", d.degree)?,
            samples: param_usize(params, "samples", d.samples)?,
            subdivisions: param_usize(params, "subdivisions", d.subdivisions)?,
        };
        if m.samples < 2 {
            return Err(Error::invalid("moment-fit.samples must be >= 2"));
        }
        if m.subdivisions > MAX_SUBDIVISIONS {
            return Err(Error::invalid(format!("moment-fit.subdivisions must be <= {MAX_SUBDIVISIONS}")));
        }
        Ok(m)
    }

    /// Degree actually used at a given quadrature order.
    pub fn effective_degree(&self, order: usize) -> usize {
        self.degree.min(order.saturating_sub(1))
    }
}

impl<T: Real> Integrator<T> for MomentFitting {
    fn descriptor(&self) -> IntegratorDescriptor {
        IntegratorDescriptor {
            name: Self::NAME.into(),
            interface_type: InterfaceType::Implicit,
            supported_dims: vec![2],
            capabilities: vec![Operation::Area2d],
            parameters: IndexMap::from([
                ("degree".to_string(), self.degree.to_string()),
                ("samples".to_string(), self.samples.to_string()),
                ("subdivisions".to_string(), self.subdivisions.to_string()),
            ]),
        }
    }

    fn compute_area_2d(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        let rule = GaussLegendre::new(order)?;
        let mut out = QuadratureData::new(2, Self::NAME);
        for cell in mesh_cells(mesh) {
            let idx = Some(cell.flat);
            match classify_cell(&tc.level_set, &cell.bounds, self.samples) {
                CellClass::Inside => rule.push_tensor(&cell.bounds, idx, &mut out),
                CellClass::Outside => {}
                CellClass::Cut => {
                    let (q, _) = moment_fit_cell(&tc.level_set, &cell.bounds, self, order, idx)?;
                    out.append(&q, idx);
                }
            }
        }
        Ok(Estimate::from_rule(out))
    }

    fn error_bound(&self, op: Operation, tc: &TestCase<T>, mesh: &CartesianMesh<T>, _order: usize) -> Option<f64> {
        (op == Operation::Area2d).then(|| chord_bound(tc, mesh.h().to_f64_lossy() / (1u64 << self.subdivisions) as f64))
    }
}
