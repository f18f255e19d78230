//! Piecewise-linear interface reconstruction on uniformly subdivided cut cells.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::geometry::{mesh_cells, Aabb, CartesianMesh, TestCase};
use crate::quadrature::{classify_cell, marching_squares_polygon, push_polygon, CellClass, GaussLegendre, MarchingCell, QuadratureData};
use crate::scalar::Real;

use super::quadtree::{param_usize, reject_unknown, DEFAULT_SAMPLES};
use super::{chord_bound, Estimate, Integrator, IntegratorDescriptor, InterfaceType, MethodResult, Operation};

/// Interface pieces collected while building a volume rule.
#[derive(Debug, Clone, Default)]
pub(crate) struct Reconstruction<T> {
    pub segments: Vec<([[T; 2]; 2], Option<usize>)>,
    pub fallback_cells: usize,
}

pub(crate) fn push_reconstruction<T: Real>(
    mc: &MarchingCell<T>,
    rule: &GaussLegendre<T>,
    cell_index: Option<usize>,
    out: &mut QuadratureData<T>,
    recon: &mut Reconstruction<T>,
) {
    if mc.fallback {
        recon.fallback_cells += 1;
    }
    for poly in &mc.polygons {
        push_polygon(poly, rule, cell_index, out);
    }
    recon.segments.extend(mc.segments.iter().map(|s| (*s, cell_index)));
}

/// Gauss rule on the reconstructed interface.
///
/// With `flux == false` the weights are arc-length weights and the value is the
/// curve length. With `flux == true` the weights are `w dy` along the oriented
/// segments and the value is `oint x dy`, i.e. the enclosed area.
pub(crate) fn interface_rule<T: Real>(
    recon: &Reconstruction<T>,
    order: usize,
    flux: bool,
    generator: &str,
) -> Result<Estimate<T>> {
    let rule = GaussLegendre::<T>::new(order)?;
    let mut q = QuadratureData::new(2, generator);
    let mut value = T::zero();
    for ([a, b], cell) in &recon.segments {
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        for (s, w) in rule.on_interval(T::zero(), T::one()) {
            let p = [a[0] + s * d[0], a[1] + s * d[1]];
            if flux {
                let wt = w * d[1];
                value = value + wt * p[0];
                q.push(&p, wt, *cell);
            } else {
                let wt = w * len;
                value = value + wt;
                q.push(&p, wt, *cell);
            }
        }
    }
    Ok(Estimate {
        value,
        quadrature: q,
        fallback_cells: recon.fallback_cells,
    })
}

/// Linear reconstruction: every cut background cell is split into a
/// `2^subdivisions` per axis lattice and each sub-cell is reconstructed by
/// marching squares.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearReconstruction {
    pub subdivisions: usize,
    pub samples: usize,
}

impl Default for LinearReconstruction {
    fn default() -> Self {
        LinearReconstruction {
            subdivisions: 1,
            samples: DEFAULT_SAMPLES,
        }
    }
}

pub const MAX_SUBDIVISIONS: usize = 8;

impl LinearReconstruction {
    pub const NAME: &'static str = "linear";

    pub fn from_params(params: &IndexMap<String, String>) -> Result<Self> {
        reject_unknown(params, &["subdivisions", "samples"], Self::NAME)?;
        let d = LinearReconstruction::default();
        let r = LinearReconstruction {
            subdivisions: param_usize(params, "subdivisions", d.subdivisions)?,
            samples: param_usize(params, "samples", d.samples)?,
        };
        if r.subdivisions > MAX_SUBDIVISIONS {
            return Err(Error::invalid(format!("linear.subdivisions must be <= {MAX_SUBDIVISIONS}")));
        }
        if r.samples < 2 {
            return Err(Error::invalid("linear.samples must be >= 2"));
        }
        Ok(r)
    }

    fn sub_width<T: Real>(&self, mesh: &CartesianMesh<T>) -> f64 {
        mesh.h().to_f64_lossy() / (1u64 << self.subdivisions) as f64
    }

    fn run<T: Real>(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> Result<(QuadratureData<T>, Reconstruction<T>)> {
        let rule = GaussLegendre::new(order)?;
        let mut out = QuadratureData::new(2, Self::NAME);
        let mut recon = Reconstruction::default();
        let k = 1usize << self.subdivisions;
        for cell in mesh_cells(mesh) {
            let idx = Some(cell.flat);
            match classify_cell(&tc.level_set, &cell.bounds, self.samples) {
                CellClass::Inside => rule.push_tensor(&cell.bounds, idx, &mut out),
                CellClass::Outside => {}
                CellClass::Cut => {
                    for sub in subcells(&cell.bounds, k) {
                        match classify_cell(&tc.level_set, &sub, self.samples) {
                            CellClass::Inside => rule.push_tensor(&sub, idx, &mut out),
                            CellClass::Outside => {}
                            CellClass::Cut => {
                                let mc = marching_squares_polygon(&tc.level_set, &sub, self.samples);
                                push_reconstruction(&mc, &rule, idx, &mut out, &mut recon);
                            }
                        }
                    }
                }
            }
        }
        Ok((out, recon))
    }
}

pub(crate) fn subcells<T: Real>(cell: &Aabb<T>, k: usize) -> Vec<Aabb<T>> {
    let kt = T::from_usize_lossy(k);
    let at = |axis: usize, i: usize| {
        if i == k {
            cell.hi[axis]
        } else {
            cell.lo[axis] + cell.width(axis) * T::from_usize_lossy(i) / kt
        }
    };
    let mut out = Vec::with_capacity(k * k);
    for j in 0..k {
        for i in 0..k {
            out.push(Aabb {
                lo: vec![at(0, i), at(1, j)],
                hi: vec![at(0, i + 1), at(1, j + 1)],
            });
        }
    }
    out
}

impl<T: Real> Integrator<T> for LinearReconstruction {
    fn descriptor(&self) -> IntegratorDescriptor {
        IntegratorDescriptor {
            name: Self::NAME.into(),
            interface_type: InterfaceType::Implicit,
            supported_dims: vec![2],
            capabilities: vec![Operation::Area2d, Operation::CurveLength, Operation::AreaFlux2d],
            parameters: IndexMap::from([
                ("subdivisions".to_string(), self.subdivisions.to_string()),
                ("samples".to_string(), self.samples.to_string()),
            ]),
        }
    }

    fn compute_area_2d(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        let (q, recon) = self.run(tc, mesh, order)?;
        let mut est = Estimate::from_rule(q);
        est.fallback_cells = recon.fallback_cells;
        Ok(est)
    }

    fn compute_interface_curve_length(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        let (_, recon) = self.run(tc, mesh, order)?;
        Ok(interface_rule(&recon, order, false, Self::NAME)?)
    }

    fn compute_area_via_flux_2d(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        let (_, recon) = self.run(tc, mesh, order)?;
        Ok(interface_rule(&recon, order, true, Self::NAME)?)
    }

    fn error_bound(&self, op: Operation, tc: &TestCase<T>, mesh: &CartesianMesh<T>, _order: usize) -> Option<f64> {
        match op {
            Operation::Area2d | Operation::AreaFlux2d => Some(chord_bound(tc, self.sub_width(mesh))),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog, CartesianMesh};

    fn circle() -> TestCase<f64> {
        catalog::<f64>().into_iter().find(|t| t.id == "circle").unwrap()
    }

    #[test]
    fn flux_and_area_agree() {
        let tc = circle();
        let mesh = CartesianMesh::uniform(tc.domain.clone(), 16).unwrap();
        let lr = LinearReconstruction::default();
        let a = lr.compute_area_2d(&tc, &mesh, 3).unwrap().value;
        let f = lr.compute_area_via_flux_2d(&tc, &mesh, 3).unwrap().value;
        assert!((a - f).abs() < 1e-12, "{a} vs {f}");
    }

    #[test]
    fn curve_length_at_32() {
        let tc = circle();
        let mesh = CartesianMesh::uniform(tc.domain.clone(), 32).unwrap();
        let est = LinearReconstruction::default().compute_interface_curve_length(&tc, &mesh, 2).unwrap();
        let exact = std::f64::consts::TAU * 0.2;
        assert!((est.value - exact).abs() / exact < 1e-3);
        assert_eq!(est.fallback_cells, 0);
    }

    #[test]
    fn subcells_tile_the_cell() {
        let cell = Aabb::new(vec![0.1, 0.2], vec![0.4, 0.3]).unwrap();
        let subs = subcells(&cell, 4);
        assert_eq!(subs.len(), 16);
        let total: f64 = subs.iter().map(|s| s.measure()).sum();
        assert!((total - cell.measure()).abs() < 1e-16);
        assert_eq!(subs[15].hi, cell.hi);
    }
}
