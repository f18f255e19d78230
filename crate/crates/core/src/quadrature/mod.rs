//! Reference rules, cell classification and the common quadrature container.

mod gauss;
pub mod linalg;
mod marching;
mod polygon;

pub use gauss::{gauss_legendre, tensor_rule, GaussLegendre, MAX_GAUSS_POINTS};
pub use marching::{marching_squares_polygon, MarchingCell, ROOT_TOL};
pub(crate) use polygon::push_polygon;
pub use polygon::{
    monomial_exponents, polygon_moments, polygon_quadrature, shoelace_area, triangle_quadrature,
    DEGENERATE_AREA,
};

use std::io::Write;

use crate::error::Result;
use crate::geometry::{Aabb, Implicit};
use crate::scalar::Real;

/// Generated points and weights with per-point cell provenance.
///
/// Points are stored flat with stride [`QuadratureData::dim`]. Volume rules
/// have non-negative weights, except moment-fitted rules, which may be signed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuadratureData<T> {
    dim: usize,
    coords: Vec<T>,
    pub weights: Vec<T>,
    pub cell_index: Vec<Option<usize>>,
    pub generator: String,
}

impl<T: Real> QuadratureData<T> {
    pub fn new(dim: usize, generator: impl Into<String>) -> Self {
        QuadratureData {
            dim,
            coords: Vec::new(),
            weights: Vec::new(),
            cell_index: Vec::new(),
            generator: generator.into(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn push(&mut self, point: &[T], weight: T, cell: Option<usize>) {
        debug_assert_eq!(point.len(), self.dim);
        self.coords.extend_from_slice(point);
        self.weights.push(weight);
        self.cell_index.push(cell);
    }

    /// Appends all points of `other`, replacing their cell index by `cell` when given.
    pub fn append(&mut self, other: &QuadratureData<T>, cell: Option<usize>) {
        debug_assert_eq!(other.dim, self.dim);
        self.coords.extend_from_slice(&other.coords);
        self.weights.extend_from_slice(&other.weights);
        match cell {
            Some(c) => self.cell_index.extend(std::iter::repeat_n(Some(c), other.len())),
            None => self.cell_index.extend_from_slice(&other.cell_index),
        }
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// `sum w_i f(x_i)` in index order.
    pub fn integrate<F: FnMut(&[T]) -> T>(&self, mut f: F) -> T {
        let mut acc = T::zero();
        for (p, &w) in self.points().zip(&self.weights) {
            acc = acc + w * f(p);
        }
        acc
    }

    /// Sequential, index-ascending weight sum.
    pub fn total(&self) -> T {
        rule_total(self)
    }

    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if self.coords.len() != self.weights.len() * self.dim || self.cell_index.len() != self.weights.len() {
            return Err(Error::invalid("quadrature data arrays have inconsistent lengths"));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("quadrature weights must be finite"));
        }
        Ok(())
    }

    /// Writes `x,y[,z],weight,cell` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let axes = ["x", "y", "z"];
        let header: Vec<&str> = axes[..self.dim].iter().copied().chain(["weight", "cell"]).collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            let mut fields: Vec<String> = self.point(i).iter().map(|v| fmt_f64(v.to_f64_lossy())).collect();
            fields.push(fmt_f64(self.weights[i].to_f64_lossy()));
            fields.push(self.cell_index[i].map(|c| c.to_string()).unwrap_or_default());
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Round-trip-safe decimal rendering with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Sum of weights (estimate of the measure), sequential in index order.
pub fn rule_total<T: Real>(q: &QuadratureData<T>) -> T {
    let mut acc = T::zero();
    for &w in &q.weights {
        acc = acc + w;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    Inside,
    Outside,
    Cut,
}

/// Below this magnitude a sample counts as lying on the interface.
pub const ON_INTERFACE_TOL: f64 = 1e-14;

/// Classifies `cell` by sampling `phi` on a `samples_per_axis^D` lattice including the corners.
pub fn classify_cell<T: Real, L: Implicit<T> + ?Sized>(ls: &L, cell: &Aabb<T>, samples_per_axis: usize) -> CellClass {
    let s = samples_per_axis.max(2);
    let d = cell.dim();
    let zero_tol = T::lit(ON_INTERFACE_TOL);
    let step: Vec<T> = (0..d).map(|a| cell.width(a) / T::from_usize_lossy(s - 1)).collect();
    let mut p = vec![T::zero(); d];
    let (mut neg, mut pos) = (false, false);
    for flat in 0..s.pow(d as u32) {
        let mut rem = flat;
        for a in 0..d {
            let k = rem % s;
            rem /= s;
            p[a] = if k == s - 1 {
                cell.hi[a]
            } else {
                cell.lo[a] + step[a] * T::from_usize_lossy(k)
            };
        }
        let phi = ls.value(&p);
        if phi.abs() < zero_tol {
            return CellClass::Cut;
        }
        if phi < T::zero() {
            neg = true;
        } else {
            pos = true;
        }
        if neg && pos {
            return CellClass::Cut;
        }
    }
    if neg {
        CellClass::Inside
    } else {
        CellClass::Outside
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LevelSet;

    fn paper_circle() -> LevelSet<f64> {
        LevelSet::circle([0.5, 0.5], 0.2).unwrap()
    }

    fn cell(lo: [f64; 2], hi: [f64; 2]) -> Aabb<f64> {
        Aabb::new(lo.to_vec(), hi.to_vec()).unwrap()
    }

    #[test]
    fn classification_examples() {
        let ls = paper_circle();
        assert_eq!(classify_cell(&ls, &cell([0.0, 0.0], [0.25, 0.25]), 3), CellClass::Outside);
        assert_eq!(classify_cell(&ls, &cell([0.4, 0.4], [0.6, 0.6]), 3), CellClass::Inside);
        let cut = cell([0.25, 0.375], [0.5, 0.625]);
        // corner (0.5, 0.5) is inside, corner (0.25, 0.375) outside
        assert!(ls.eval(&[0.5, 0.5]).unwrap() < 0.0);
        assert!(ls.eval(&[0.25, 0.375]).unwrap() > 0.0);
        assert_eq!(classify_cell(&ls, &cut, 3), CellClass::Cut);
    }

    #[test]
    fn touching_sample_forces_cut() {
        let ls = paper_circle();
        // corner (0.7, 0.5) lies exactly on the circle
        assert_eq!(classify_cell(&ls, &cell([0.7, 0.4], [0.8, 0.5]), 2), CellClass::Cut);
    }

    #[test]
    fn rule_total_cases() {
        let empty = QuadratureData::<f64>::new(2, "none");
        assert_eq!(rule_total(&empty), 0.0);
        let q = tensor_rule(2, &Aabb::<f64>::unit(2)).unwrap();
        assert!((rule_total(&q) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let mut q = QuadratureData::<f64>::new(2, "t");
        q.push(&[0.25, 0.5], 0.125, Some(3));
        q.push(&[1.0, 2.0], -1.0, None);
        let mut buf = Vec::new();
        q.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,y,weight,cell");
        assert_eq!(lines[1], "2.5000000000000000e-1,5.0000000000000000e-1,1.2500000000000000e-1,3");
        assert!(lines[2].ends_with(','));
        let back: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, 0.25);
    }

    #[test]
    fn fmt_round_trips() {
        for v in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-7, -2.5e300, 5e-324] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
