//! Cut-cell quadrature methods for level-set and NURBS-bounded domains, with a
//! benchmarking harness for CI.

pub mod ci;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod integrators;
pub mod quadrature;
pub mod reporting;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Code revision embedded at build time (`git rev-parse`), or `"unknown"`.
pub const REVISION: &str = env!("CUTQUAD_REVISION");

pub type AabbF64 = geometry::Aabb<f64>;
pub type CartesianMeshF64 = geometry::CartesianMesh<f64>;
pub type LevelSetF64 = geometry::LevelSet<f64>;
pub type NurbsCurveF64 = geometry::NurbsCurve<f64>;
pub type NurbsLoopF64 = geometry::NurbsLoop<f64>;
pub type TestCaseF64 = geometry::TestCase<f64>;
pub type QuadratureDataF64 = quadrature::QuadratureData<f64>;
pub type IntegrationResultF64 = integrators::IntegrationResult<f64>;
pub type GaussLegendreF64 = quadrature::GaussLegendre<f64>;
