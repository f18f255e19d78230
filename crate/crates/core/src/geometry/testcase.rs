use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{Aabb, Implicit, LevelSet, LevelSetKind, NurbsLoop};

/// Samples used for the loop-vs-level-set consistency check.
pub const CONSISTENCY_SAMPLES: usize = 256;
const CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Area,
    Perimeter,
    Volume,
    SurfaceArea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Quick,
    Extensive,
}

/// One benchmark problem carrying both interface representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TestCase<T> {
    pub id: String,
    pub dim: usize,
    pub domain: Aabb<T>,
    pub level_set: LevelSet<T>,
    /// Parametric representation; present in 2D only.
    #[serde(rename = "loop", default, skip_serializing_if = "Option::is_none")]
    pub loop_: Option<NurbsLoop<T>>,
    /// Analytic reference measures.
    pub references: BTreeMap<MeasureKind, T>,
    pub tier: Tier,
    /// Suggested background-mesh divisions per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisions_hint: Option<usize>,
}

impl<T: Real> TestCase<T> {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_tier(mut self, tier: Tier) -> Self {
        self.tier = tier;
        self
    }

    pub fn reference(&self, kind: MeasureKind) -> Option<T> {
        self.references.get(&kind).copied()
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(Error::invalid(format!("test case dimension must be 2 or 3, got {}", self.dim)));
        }
        self.domain.validate()?;
        if self.domain.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.domain.dim() });
        }
        self.level_set.validate()?;
        if self.level_set.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.level_set.dim() });
        }
        for (kind, v) in &self.references {
            if !(*v > T::zero() && v.is_finite()) {
                return Err(Error::invalid(format!("reference {kind:?} must be positive, got {v}")));
            }
        }
        check_strictly_inside(&self.level_set, &self.domain)?;
        match (&self.loop_, self.dim) {
            (None, 2) => return Err(Error::invalid("2D test case requires a parametric loop")),
            (Some(_), 3) => return Err(Error::invalid("3D test case cannot carry a planar loop")),
            (Some(l), _) => {
                l.validate()?;
                let tol = T::tol_floor(CONSISTENCY_TOL) * self.domain.diameter();
                for p in l.sample(CONSISTENCY_SAMPLES) {
                    let phi = self.level_set.value(&p);
                    if phi.abs() > tol {
                        return Err(Error::invalid(format!(
                            "loop point ({}, {}) is off the level set: phi = {phi}",
                            p[0], p[1]
                        )));
                    }
                }
            }
            (None, _) => {}
        }
        Ok(())
    }
}

fn check_strictly_inside<T: Real>(ls: &LevelSet<T>, domain: &Aabb<T>) -> Result<()> {
    let bb = ls.bounding_box();
    for a in 0..domain.dim() {
        if !(bb.lo[a] > domain.lo[a] && bb.hi[a] < domain.hi[a]) {
            return Err(Error::invalid(format!(
                "interface must lie strictly inside the domain (axis {a}: [{}, {}] vs [{}, {}])",
                bb.lo[a], bb.hi[a], domain.lo[a], domain.hi[a]
            )));
        }
    }
    Ok(())
}

/// Circle test case with a rational quadratic loop and analytic area/perimeter.
pub fn make_circle_testcase<T: Real>(
    center: [T; 2],
    radius: T,
    domain: Aabb<T>,
    divisions_hint: Option<usize>,
) -> Result<TestCase<T>> {
    let level_set = LevelSet::circle(center, radius)?;
    check_strictly_inside(&level_set, &domain)?;
    let pi = T::PI();
    let tc = TestCase {
        id: "circle".into(),
        dim: 2,
        domain,
        level_set,
        loop_: Some(NurbsLoop::circle(center, radius)),
        references: BTreeMap::from([
            (MeasureKind::Area, pi * radius * radius),
            (MeasureKind::Perimeter, T::lit(2.0) * pi * radius),
        ]),
        tier: Tier::Quick,
        divisions_hint,
    };
    tc.validate()?;
    Ok(tc)
}

/// Axis-aligned ellipse; the loop is the circle construction scaled per axis.
pub fn make_ellipse_testcase<T: Real>(
    center: [T; 2],
    semi_axes: [T; 2],
    domain: Aabb<T>,
    divisions_hint: Option<usize>,
) -> Result<TestCase<T>> {
    let level_set = LevelSet::ellipse(center.to_vec(), semi_axes.to_vec())?;
    check_strictly_inside(&level_set, &domain)?;
    let [a, b] = semi_axes;
    let loop_ = NurbsLoop::circle(center, T::one()).scaled(center, [a, b]);
    let tc = TestCase {
        id: "ellipse".into(),
        dim: 2,
        domain,
        level_set,
        loop_: Some(loop_),
        references: BTreeMap::from([
            (MeasureKind::Area, T::PI() * a * b),
            (MeasureKind::Perimeter, ellipse_perimeter(a, b)),
        ]),
        tier: Tier::Extensive,
        divisions_hint,
    };
    tc.validate()?;
    Ok(tc)
}

/// Sphere test case (implicit only) with analytic volume and surface area.
pub fn make_sphere_testcase<T: Real>(center: [T; 3], radius: T, domain: Aabb<T>) -> Result<TestCase<T>> {
    let level_set = LevelSet::sphere(center, radius)?;
    check_strictly_inside(&level_set, &domain)?;
    let pi = T::PI();
    let r2 = radius * radius;
    let tc = TestCase {
        id: "sphere".into(),
        dim: 3,
        domain,
        level_set,
        loop_: None,
        references: BTreeMap::from([
            (MeasureKind::Volume, T::lit(4.0) * pi * r2 * radius / T::lit(3.0)),
            (MeasureKind::SurfaceArea, T::lit(4.0) * pi * r2),
        ]),
        tier: Tier::Extensive,
        divisions_hint: None,
    };
    tc.validate()?;
    Ok(tc)
}

/// Ellipse circumference via the arithmetic-geometric mean:
/// `P = 2 pi / M(a, b) * (a^2 - sum_n 2^(n-1) c_n^2)`.
pub fn ellipse_perimeter<T: Real>(a: T, b: T) -> T {
    let (mut an, mut bn) = (a.max(b), a.min(b));
    let half = T::lit(0.5);
    let mut cn2 = an * an - bn * bn;
    let mut pow = half;
    let mut sum = pow * cn2;
    for _ in 0..64 {
        let cn = (an - bn) * half;
        let (a1, b1) = ((an + bn) * half, (an * bn).sqrt());
        an = a1;
        bn = b1;
        pow = pow * T::lit(2.0);
        cn2 = cn * cn;
        sum = sum + pow * cn2;
        if cn2 <= T::epsilon() * T::epsilon() * an * an {
            break;
        }
    }
    let a0 = a.max(b);
    T::TAU() / an * (a0 * a0 - sum)
}

/// Translates both representations by `offset`; references are unchanged.
pub fn translate_testcase<T: Real>(tc: &TestCase<T>, offset: &[T]) -> Result<TestCase<T>> {
    if offset.len() != tc.dim {
        return Err(Error::DimensionMismatch { expected: tc.dim, found: offset.len() });
    }
    let mut out = tc.clone();
    for (s, &o) in out.level_set.shift.iter_mut().zip(offset) {
        *s = *s + o;
    }
    check_strictly_inside(&out.level_set, &out.domain)?;
    if let Some(l) = &tc.loop_ {
        out.loop_ = Some(l.translated([offset[0], offset[1]]));
    }
    Ok(out)
}

/// Built-in catalog: circle (quick), ellipse and sphere (extensive).
pub fn catalog<T: Real>() -> Vec<TestCase<T>> {
    let l = T::lit;
    vec![
        make_circle_testcase([l(0.5), l(0.5)], l(0.2), Aabb::unit(2), Some(2))
            .expect("catalog circle"),
        make_ellipse_testcase([l(0.5), l(0.5)], [l(0.3), l(0.15)], Aabb::unit(2), Some(2))
            .expect("catalog ellipse"),
        make_sphere_testcase([l(0.5), l(0.5), l(0.5)], l(0.3), Aabb::unit(3))
            .expect("catalog sphere"),
    ]
}

/// Reads one JSON test-case definition and validates it.
pub fn load_testcase<T: Real>(path: &Path) -> Result<TestCase<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let tc: TestCase<T> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    tc.validate()?;
    Ok(tc)
}

pub fn save_testcase<T: Real>(tc: &TestCase<T>, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(tc)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Loads every `*.json` file in `dir`, sorted by file name.
pub fn load_catalog_dir<T: Real>(dir: &Path) -> Result<Vec<TestCase<T>>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_testcase(p)).collect()
}

impl<T: Real> TestCase<T> {
    /// True when the level set is a circle/sphere (exact signed distance).
    pub fn is_round(&self) -> bool {
        matches!(self.level_set.kind, LevelSetKind::Circle | LevelSetKind::Sphere)
    }
}
