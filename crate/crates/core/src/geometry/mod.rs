//! Computational domains, background meshes and the two interface representations.

mod levelset;
mod nurbs;
mod testcase;

pub use levelset::{HalfSpace, Implicit, LevelSet, LevelSetKind};
pub use nurbs::{NurbsCurve, NurbsLoop};
pub use testcase::{
    catalog, ellipse_perimeter, load_catalog_dir, load_testcase, make_circle_testcase, make_ellipse_testcase,
    make_sphere_testcase, save_testcase, translate_testcase, MeasureKind, TestCase, Tier,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned box `[lo, hi]` in 2 or 3 dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Aabb<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        let b = Aabb { lo, hi };
        b.validate()?;
        Ok(b)
    }

    /// The unit box `[0,1]^dim`.
    pub fn unit(dim: usize) -> Self {
        Aabb {
            lo: vec![T::zero(); dim],
            hi: vec![T::one(); dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.len() != self.hi.len() {
            return Err(Error::DimensionMismatch {
                expected: self.lo.len(),
                found: self.hi.len(),
            });
        }
        if !(2..=3).contains(&self.lo.len()) {
            return Err(Error::invalid(format!(
                "box dimension must be 2 or 3, got {}",
                self.lo.len()
            )));
        }
        for (axis, (l, h)) in self.lo.iter().zip(&self.hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::invalid(format!(
                    "box axis {axis}: lo ({l}) must be < hi ({h})"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn width(&self, axis: usize) -> T {
        self.hi[axis] - self.lo[axis]
    }

    pub fn measure(&self) -> T {
        (0..self.dim()).map(|a| self.width(a)).fold(T::one(), |acc, w| acc * w)
    }

    pub fn center(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| (l + h) * half)
            .collect()
    }

    pub fn diameter(&self) -> T {
        (0..self.dim())
            .map(|a| self.width(a) * self.width(a))
            .sum::<T>()
            .sqrt()
    }

    /// Smallest side length.
    pub fn min_width(&self) -> T {
        (0..self.dim())
            .map(|a| self.width(a))
            .fold(T::infinity(), T::min)
    }

    pub fn contains_closed(&self, x: &[T]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| v >= l && v <= h)
    }

    pub fn translated(&self, offset: &[T]) -> Self {
        Aabb {
            lo: self.lo.iter().zip(offset).map(|(&l, &o)| l + o).collect(),
            hi: self.hi.iter().zip(offset).map(|(&h, &o)| h + o).collect(),
        }
    }

    /// All `2^dim` children obtained by bisecting every axis, x-fastest order.
    pub fn bisect(&self) -> Vec<Aabb<T>> {
        let mid = self.center();
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                let mut lo = Vec::with_capacity(d);
                let mut hi = Vec::with_capacity(d);
                for a in 0..d {
                    if mask >> a & 1 == 0 {
                        lo.push(self.lo[a]);
                        hi.push(mid[a]);
                    } else {
                        lo.push(mid[a]);
                        hi.push(self.hi[a]);
                    }
                }
                Aabb { lo, hi }
            })
            .collect()
    }

    /// The `2^dim` corners, x-fastest order.
    pub fn corners(&self) -> Vec<Vec<T>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|a| if mask >> a & 1 == 0 { self.lo[a] } else { self.hi[a] })
                    .collect()
            })
            .collect()
    }
}

/// One cell of a background mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell<T> {
    /// Integer multi-index, axis order x, y[, z].
    pub index: Vec<usize>,
    /// Flat row-major index (x fastest).
    pub flat: usize,
    pub bounds: Aabb<T>,
}

/// Uniform Cartesian background mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CartesianMesh<T> {
    pub bounds: Aabb<T>,
    pub divisions: Vec<usize>,
}

impl<T: Real> CartesianMesh<T> {
    pub fn new(bounds: Aabb<T>, divisions: Vec<usize>) -> Result<Self> {
        let mesh = CartesianMesh { bounds, divisions };
        mesh.validate()?;
        Ok(mesh)
    }

    /// `n` divisions along every axis of `bounds`.
    pub fn uniform(bounds: Aabb<T>, n: usize) -> Result<Self> {
        let d = bounds.dim();
        Self::new(bounds, vec![n; d])
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if self.divisions.len() != self.bounds.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.bounds.dim(),
                found: self.divisions.len(),
            });
        }
        if self.divisions.contains(&0) {
            return Err(Error::invalid("mesh divisions must be >= 1"));
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn cell_count(&self) -> usize {
        self.divisions.iter().product()
    }

    /// Cell width along `axis`.
    pub fn cell_width(&self, axis: usize) -> T {
        self.bounds.width(axis) / T::from_usize_lossy(self.divisions[axis])
    }

    /// Characteristic mesh size `h` (largest cell width).
    pub fn h(&self) -> T {
        (0..self.dim())
            .map(|a| self.cell_width(a))
            .fold(T::zero(), T::max)
    }

    fn coord(&self, axis: usize, i: usize) -> T {
        let n = self.divisions[axis];
        if i == n {
            return self.bounds.hi[axis];
        }
        self.bounds.lo[axis]
            + self.bounds.width(axis) * (T::from_usize_lossy(i) / T::from_usize_lossy(n))
    }

    pub fn translated(&self, offset: &[T]) -> Self {
        CartesianMesh {
            bounds: self.bounds.translated(offset),
            divisions: self.divisions.clone(),
        }
    }
}

/// Enumerates the cells of `mesh` in row-major order (x fastest).
///
/// Cells are half-open `[lo, hi)`; the union is exactly `mesh.bounds`.
pub fn mesh_cells<T: Real>(mesh: &CartesianMesh<T>) -> Vec<Cell<T>> {
    let d = mesh.dim();
    let total = mesh.cell_count();
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut index = Vec::with_capacity(d);
        for a in 0..d {
            index.push(rem % mesh.divisions[a]);
            rem /= mesh.divisions[a];
        }
        let lo = (0..d).map(|a| mesh.coord(a, index[a])).collect();
        let hi = (0..d).map(|a| mesh.coord(a, index[a] + 1)).collect();
        out.push(Cell {
            index,
            flat,
            bounds: Aabb { lo, hi },
        });
    }
    out
}
