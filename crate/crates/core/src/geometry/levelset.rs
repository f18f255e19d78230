use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::Aabb;

/// A scalar field whose zero set is the interface; the enclosed domain is `{phi <= 0}`.
pub trait Implicit<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// Unchecked evaluation; `x.len()` must equal [`Implicit::dim`].
    fn value(&self, x: &[T]) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelSetKind {
    Circle,
    Sphere,
    Ellipse,
}

/// Implicit interface representation.
///
/// Circle and sphere evaluate the exact signed distance `|x - c - s| - r`.
/// The ellipse evaluates `sqrt(sum(((x_i - c_i - s_i) / r_i)^2)) - 1`, which is
/// sign-correct but not a distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LevelSet<T> {
    pub kind: LevelSetKind,
    pub center: Vec<T>,
    pub radii: Vec<T>,
    #[serde(default)]
    pub shift: Vec<T>,
}

impl<T: Real> LevelSet<T> {
    pub fn circle(center: [T; 2], radius: T) -> Result<Self> {
        Self::new(LevelSetKind::Circle, center.to_vec(), vec![radius; 2])
    }

    pub fn sphere(center: [T; 3], radius: T) -> Result<Self> {
        Self::new(LevelSetKind::Sphere, center.to_vec(), vec![radius; 3])
    }

    pub fn ellipse(center: Vec<T>, radii: Vec<T>) -> Result<Self> {
        Self::new(LevelSetKind::Ellipse, center, radii)
    }

    pub fn new(kind: LevelSetKind, center: Vec<T>, radii: Vec<T>) -> Result<Self> {
        let d = center.len();
        let ls = LevelSet {
            kind,
            center,
            radii,
            shift: vec![T::zero(); d],
        };
        ls.validate()?;
        Ok(ls)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.center.len();
        let expected_dim = match self.kind {
            LevelSetKind::Circle => Some(2),
            LevelSetKind::Sphere => Some(3),
            LevelSetKind::Ellipse => None,
        };
        if let Some(e) = expected_dim {
            if d != e {
                return Err(Error::DimensionMismatch { expected: e, found: d });
            }
        } else if !(2..=3).contains(&d) {
            return Err(Error::invalid(format!("ellipse dimension must be 2 or 3, got {d}")));
        }
        if self.radii.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.radii.len(),
            });
        }
        if self.shift.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.shift.len(),
            });
        }
        if self.radii.iter().any(|&r| !(r > T::zero() && r.is_finite())) {
            return Err(Error::invalid("all level-set radii must be positive"));
        }
        if matches!(self.kind, LevelSetKind::Circle | LevelSetKind::Sphere)
            && self.radii.iter().any(|&r| r != self.radii[0])
        {
            return Err(Error::invalid("circle/sphere radii must be identical"));
        }
        Ok(())
    }

    /// Checked evaluation.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                found: x.len(),
            });
        }
        Ok(self.value(x))
    }

    /// Center including the shift.
    pub fn effective_center(&self) -> Vec<T> {
        self.center
            .iter()
            .zip(&self.shift)
            .map(|(&c, &s)| c + s)
            .collect()
    }

    /// Tight bounding box of the enclosed domain.
    pub fn bounding_box(&self) -> Aabb<T> {
        let c = self.effective_center();
        Aabb {
            lo: c.iter().zip(&self.radii).map(|(&c, &r)| c - r).collect(),
            hi: c.iter().zip(&self.radii).map(|(&c, &r)| c + r).collect(),
        }
    }

    /// Smallest radius of curvature of the interface.
    pub fn min_curvature_radius(&self) -> T {
        let max = self.radii.iter().copied().fold(T::zero(), T::max);
        let min = self.radii.iter().copied().fold(T::infinity(), T::min);
        min * min / max
    }

    /// Closed polyline of `n` points on the interface's section through its center
    /// in the x-y plane (used for plotting).
    pub fn outline_xy(&self, n: usize) -> Vec<[T; 2]> {
        let c = self.effective_center();
        let two_pi = T::TAU();
        (0..n)
            .map(|k| {
                let t = two_pi * T::from_usize_lossy(k) / T::from_usize_lossy(n.max(1));
                [c[0] + self.radii[0] * t.cos(), c[1] + self.radii[1] * t.sin()]
            })
            .collect()
    }
}

impl<T: Real> Implicit<T> for LevelSet<T> {
    fn dim(&self) -> usize {
        self.center.len()
    }

    #[inline]
    fn value(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.center.len());
        match self.kind {
            LevelSetKind::Circle | LevelSetKind::Sphere => {
                let r2 = x
                    .iter()
                    .zip(self.center.iter().zip(&self.shift))
                    .map(|(&xi, (&c, &s))| {
                        let d = xi - c - s;
                        d * d
                    })
                    .sum::<T>();
                r2.sqrt() - self.radii[0]
            }
            LevelSetKind::Ellipse => {
                let q = x
                    .iter()
                    .zip(self.center.iter().zip(&self.shift))
                    .zip(&self.radii)
                    .map(|((&xi, (&c, &s)), &r)| {
                        let d = (xi - c - s) / r;
                        d * d
                    })
                    .sum::<T>();
                q.sqrt() - T::one()
            }
        }
    }
}

/// Half-space `normal . x - offset <= 0`; the simplest level set with a flat interface.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

impl<T: Real> Implicit<T> for HalfSpace<T> {
    fn dim(&self) -> usize {
        self.normal.len()
    }

    fn value(&self, x: &[T]) -> T {
        x.iter().zip(&self.normal).map(|(&a, &b)| a * b).sum::<T>() - self.offset
    }
}

impl<T: Real, F> Implicit<T> for (usize, F)
where
    F: Fn(&[T]) -> T + Sync,
{
    fn dim(&self) -> usize {
        self.0
    }

    fn value(&self, x: &[T]) -> T {
        (self.1)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_values() {
        let ls = LevelSet::<f64>::circle([0.5, 0.5], 0.2).unwrap();
        assert!(ls.eval(&[0.5, 0.7]).unwrap().abs() < 1e-15);
        assert!((ls.eval(&[0.5, 0.5]).unwrap() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn sphere_value() {
        let ls = LevelSet::sphere([0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(ls.eval(&[2.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn ellipse_signs() {
        let ls = LevelSet::<f64>::ellipse(vec![0.5, 0.5], vec![0.3, 0.15]).unwrap();
        assert!(ls.eval(&[0.8, 0.5]).unwrap().abs() < 1e-15);
        assert!(ls.eval(&[0.5, 0.64]).unwrap() < 0.0);
        assert!(ls.eval(&[0.5, 0.66]).unwrap() > 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let ls = LevelSet::<f64>::circle([0.5, 0.5], 0.2).unwrap();
        assert!(matches!(
            ls.eval(&[0.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_non_positive_radius() {
        assert!(LevelSet::circle([0.5, 0.5], 0.0).is_err());
        assert!(LevelSet::ellipse(vec![0.5, 0.5], vec![0.3, -0.1]).is_err());
    }

    #[test]
    fn shift_moves_the_zero_set() {
        let mut ls = LevelSet::<f64>::circle([0.25, 0.5], 0.2).unwrap();
        ls.shift = vec![0.5, 0.0];
        assert!(ls.eval(&[0.95, 0.5]).unwrap().abs() < 1e-15);
        assert_eq!(ls.effective_center(), vec![0.75, 0.5]);
    }
}
