//! Recursive bisection of cut cells (quadtree in 2D, octree in 3D).

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::geometry::{mesh_cells, Aabb, CartesianMesh, Implicit, TestCase};
use crate::quadrature::{classify_cell, marching_squares_polygon, CellClass, GaussLegendre, QuadratureData};
use crate::scalar::Real;

use super::reconstruction::{interface_rule, push_reconstruction, Reconstruction};
use super::{chord_bound, interface_measure, Estimate, Integrator, IntegratorDescriptor, InterfaceType, MethodResult, Operation};

pub const MAX_DEPTH: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LeafPolicy {
    /// Keep the whole leaf iff its center is inside.
    CenterSample,
    /// Reconstruct the leaf by marching squares and triangulate (2D only).
    Tessellate,
}

struct Recursion<'a, T, L: ?Sized> {
    ls: &'a L,
    rule: &'a GaussLegendre<T>,
    max_depth: usize,
    samples: usize,
    policy: LeafPolicy,
    cell_index: Option<usize>,
}

impl<T: Real, L: Implicit<T> + ?Sized> Recursion<'_, T, L> {
    fn run(&self, cell: &Aabb<T>, level: usize, out: &mut QuadratureData<T>, recon: &mut Reconstruction<T>) {
        match classify_cell(self.ls, cell, self.samples) {
            CellClass::Inside => self.rule.push_tensor(cell, self.cell_index, out),
            CellClass::Outside => {}
            CellClass::Cut if level >= self.max_depth => match self.policy {
                LeafPolicy::CenterSample => {
                    if self.ls.value(&cell.center()) <= T::zero() {
                        self.rule.push_tensor(cell, self.cell_index, out);
                    }
                }
                LeafPolicy::Tessellate => {
                    let mc = marching_squares_polygon(self.ls, cell, self.samples);
                    push_reconstruction(&mc, self.rule, self.cell_index, out, recon);
                }
            },
            CellClass::Cut => {
                for child in cell.bisect() {
                    self.run(&child, level + 1, out, recon);
                }
            }
        }
    }
}

/// Quadtree/octree rule on one cell: cut cells are bisected `depth` times;
/// inside cells get an `order^D` tensor Gauss rule; cut leaves are kept whole
/// iff their center is inside.
pub fn quadtree_quadrature<T: Real, L: Implicit<T> + ?Sized>(
    ls: &L,
    cell: &Aabb<T>,
    depth: usize,
    order: usize,
) -> Result<QuadratureData<T>> {
    if depth > MAX_DEPTH {
        return Err(Error::invalid(format!("quadtree depth must be in 0..={MAX_DEPTH}, got {depth}")));
    }
    let rule = GaussLegendre::new(order)?;
    let mut out = QuadratureData::new(cell.dim(), "quadtree");
    let rec = Recursion {
        ls,
        rule: &rule,
        max_depth: depth,
        samples: DEFAULT_SAMPLES,
        policy: LeafPolicy::CenterSample,
        cell_index: None,
    };
    rec.run(cell, 0, &mut out, &mut Reconstruction::default());
    Ok(out)
}

pub(crate) const DEFAULT_SAMPLES: usize = 3;

fn run_mesh<T: Real>(
    tc: &TestCase<T>,
    mesh: &CartesianMesh<T>,
    order: usize,
    depth: usize,
    samples: usize,
    policy: LeafPolicy,
    generator: &str,
) -> Result<(QuadratureData<T>, Reconstruction<T>)> {
    let rule = GaussLegendre::new(order)?;
    let mut out = QuadratureData::new(tc.dim, generator);
    let mut recon = Reconstruction::default();
    for cell in mesh_cells(mesh) {
        let rec = Recursion {
            ls: &tc.level_set,
            rule: &rule,
            max_depth: depth,
            samples,
            policy,
            cell_index: Some(cell.flat),
        };
        rec.run(&cell.bounds, 0, &mut out, &mut recon);
    }
    Ok((out, recon))
}

fn parse_usize(params: &IndexMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::invalid(format!("parameter '{key}' expects a non-negative integer, got '{v}'"))),
    }
}

pub(crate) fn reject_unknown(params: &IndexMap<String, String>, known: &[&str], integrator: &str) -> Result<()> {
    for k in params.keys() {
        if !known.contains(&k.as_str()) {
            return Err(Error::invalid(format!(
                "unknown parameter '{integrator}.{k}' (known: {})",
                known.join(", ")
            )));
        }
    }
    Ok(())
}

pub(crate) fn param_usize(params: &IndexMap<String, String>, key: &str, default: usize) -> Result<usize> {
    parse_usize(params, key, default)
}

/// Finite-cell style quadtree/octree with center-sample leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadtree {
    pub depth: usize,
    pub depth_3d: usize,
    pub samples: usize,
}

impl Default for Quadtree {
    fn default() -> Self {
        Quadtree {
            depth: 6,
            depth_3d: 2,
            samples: DEFAULT_SAMPLES,
        }
    }
}

impl Quadtree {
    pub const NAME: &'static str = "quadtree";

    pub fn from_params(params: &IndexMap<String, String>) -> Result<Self> {
        reject_unknown(params, &["depth", "depth_3d", "samples"], Self::NAME)?;
        let d = Quadtree::default();
        let q = Quadtree {
            depth: parse_usize(params, "depth", d.depth)?,
            depth_3d: parse_usize(params, "depth_3d", d.depth_3d)?,
            samples: parse_usize(params, "samples", d.samples)?,
        };
        if q.depth > MAX_DEPTH || q.depth_3d > MAX_DEPTH {
            return Err(Error::invalid(format!("quadtree depth must be <= {MAX_DEPTH}")));
        }
        if q.samples < 2 {
            return Err(Error::invalid("quadtree.samples must be >= 2"));
        }
        Ok(q)
    }

    fn depth_for(&self, dim: usize) -> usize {
        if dim == 3 {
            self.depth_3d
        } else {
            self.depth
        }
    }

    fn volume<T: Real>(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        let (q, _) = run_mesh(tc, mesh, order, self.depth_for(tc.dim), self.samples, LeafPolicy::CenterSample, Self::NAME)?;
        Ok(Estimate::from_rule(q))
    }
}

impl<T: Real> Integrator<T> for Quadtree {
    fn descriptor(&self) -> IntegratorDescriptor {
        IntegratorDescriptor {
            name: Self::NAME.into(),
            interface_type: InterfaceType::Implicit,
            supported_dims: vec![2, 3],
            capabilities: vec![Operation::Area2d, Operation::Volume3d],
            parameters: IndexMap::from([
                ("depth".to_string(), self.depth.to_string()),
                ("depth_3d".to_string(), self.depth_3d.to_string()),
                ("samples".to_string(), self.samples.to_string()),
            ]),
        }
    }

    fn compute_area_2d(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        self.volume(tc, mesh, order)
    }

    fn compute_volume_3d(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> MethodResult<T> {
        self.volume(tc, mesh, order)
    }

    fn error_bound(&self, op: Operation, tc: &TestCase<T>, mesh: &CartesianMesh<T>, _order: usize) -> Option<f64> {
        if !op.is_volume_measure() {
            return None;
        }
        let leaf = mesh.h().to_f64_lossy() / (1u64 << self.depth_for(tc.dim)) as f64;
        Some(2.0 * interface_measure(tc) * leaf)
    }
}

/// Quadtree whose cut leaves are reconstructed linearly and triangulated.
#[derive(Debug, Clone, PartialEq)]
pub struct TessellatedQuadtree {
    pub depth: usize,
    pub samples: usize,
}

impl Default for TessellatedQuadtree {
    fn default() -> Self {
        TessellatedQuadtree {
            depth: 3,
            samples: DEFAULT_SAMPLES,
        }
    }
}

impl TessellatedQuadtree {
    pub const NAME: &'static str = "quadtree-tess";

    pub fn from_params(params: &IndexMap<String, String>) -> Result<Self> {
        reject_unknown(params, &["depth", "samples"], Self::NAME)?;
        let d = TessellatedQuadtree::default();
        let q = TessellatedQuadtree {
            depth: parse_usize(params, "depth", d.depth)?,
            samples: parse_usize(params, "samples", d.samples)?,
        };
        if q.depth > MAX_DEPTH {
            return Err(Error::invalid(format!("quadtree-tess.depth must be <= {MAX_DEPTH}")));
        }
        if q.samples < 2 {
            return Err(Error::invalid("quadtree-tess.samples must be >= 2"));
        }
        Ok(q)
    }

    fn run<T: Real>(&self, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> Result<(QuadratureData<T>, Reconstruction<T>)> {
        run_mesh(tc, mesh, order, self.depth, self.samples, LeafPolicy::Tessellate, Self::NAME)
    }
}

impl<T: Real> Integrator<T> for TessellatedQuadtree {
    fn descriptor(&self) -> IntegratorDescriptor {
        IntegratorDescriptor {
            name: Self::NAME.into(),
            interface_type: InterfaceType::Implicit,
            supported_dims: vec![2],
            capabilities: vec![Operation::Area2d, Operation::CurveLength, Operation::AreaFlux2d],
            parameters: IndexMap::from([
                ("depth".to_string(), self.depth.to_string()),
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
        let leaf = mesh.h().to_f64_lossy() / (1u64 << self.depth) as f64;
        match op {
            Operation::Area2d | Operation::AreaFlux2d => Some(chord_bound(tc, leaf)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LevelSet;

    fn paper_circle() -> LevelSet<f64> {
        LevelSet::circle([0.5, 0.5], 0.2).unwrap()
    }

    #[test]
    fn inside_cell_is_plain_tensor_rule() {
        let ls = paper_circle();
        let cell = Aabb::new(vec![0.45, 0.45], vec![0.55, 0.55]).unwrap();
        for depth in [0, 3, 8] {
            let q = quadtree_quadrature(&ls, &cell, depth, 3).unwrap();
            assert_eq!(q.len(), 9);
            assert!((q.total() - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn outside_cell_is_empty() {
        let ls = paper_circle();
        let cell = Aabb::new(vec![0.0, 0.0], vec![0.2, 0.2]).unwrap();
        assert!(quadtree_quadrature(&ls, &cell, 6, 3).unwrap().is_empty());
    }

    #[test]
    fn single_cell_depth_eight() {
        let ls = paper_circle();
        let q = quadtree_quadrature(&ls, &Aabb::unit(2), 8, 5).unwrap();
        let exact = std::f64::consts::PI * 0.04;
        assert!((q.total() - exact).abs() / exact <= 2e-3);
    }

    #[test]
    fn depth_limit() {
        let ls = paper_circle();
        assert!(quadtree_quadrature(&ls, &Aabb::unit(2), 13, 2).is_err());
        let mut p = IndexMap::new();
        p.insert("depth".to_string(), "13".to_string());
        assert!(Quadtree::from_params(&p).is_err());
        p.insert("depth".to_string(), "x".to_string());
        assert!(Quadtree::from_params(&p).is_err());
        let mut p = IndexMap::new();
        p.insert("bogus".to_string(), "1".to_string());
        assert!(Quadtree::from_params(&p).is_err());
    }
}
