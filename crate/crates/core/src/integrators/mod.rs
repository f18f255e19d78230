//! The unified integrator contract and its implementations.
//!
//! Every integrator answers all six operations. An operation outside the
//! integrator's declared capabilities reports [`Status::Unsupported`]; that is
//! a regular outcome, not a fault.

mod flux;
mod moment_fit;
mod monte_carlo;
mod quadtree;
mod reconstruction;
mod registry;

pub use flux::{arc_length_parametric, flux_area_parametric, green_area_parametric, ParametricFlux};
pub use moment_fit::{moment_fit_cell, MomentFitting, MOMENT_RESIDUAL_TOL};
pub use monte_carlo::{monte_carlo_measure, monte_carlo_sigma, MonteCarlo, MonteCarloEstimate};
pub use quadtree::{quadtree_quadrature, Quadtree, TessellatedQuadtree};
pub use reconstruction::LinearReconstruction;
pub use registry::{build_integrator, parse_param_assignments, standard_integrators, IntegratorSpec, INTEGRATOR_NAMES};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{CartesianMesh, MeasureKind, TestCase};
use crate::quadrature::QuadratureData;
use crate::scalar::Real;

/// The six contract operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Area2d,
    Volume3d,
    CurveLength,
    SurfaceArea,
    AreaFlux2d,
    VolumeFlux3d,
}

impl Operation {
    pub const ALL: [Operation; 6] = [
        Operation::Area2d,
        Operation::Volume3d,
        Operation::CurveLength,
        Operation::SurfaceArea,
        Operation::AreaFlux2d,
        Operation::VolumeFlux3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Area2d => "area2d",
            Operation::Volume3d => "volume3d",
            Operation::CurveLength => "curve_length",
            Operation::SurfaceArea => "surface_area",
            Operation::AreaFlux2d => "area_flux2d",
            Operation::VolumeFlux3d => "volume_flux3d",
        }
    }

    /// Spatial dimension the operation applies to.
    pub fn dim(self) -> usize {
        match self {
            Operation::Area2d | Operation::CurveLength | Operation::AreaFlux2d => 2,
            Operation::Volume3d | Operation::SurfaceArea | Operation::VolumeFlux3d => 3,
        }
    }

    /// Reference measure the result is compared against.
    pub fn reference_kind(self) -> MeasureKind {
        match self {
            Operation::Area2d | Operation::AreaFlux2d => MeasureKind::Area,
            Operation::Volume3d | Operation::VolumeFlux3d => MeasureKind::Volume,
            Operation::CurveLength => MeasureKind::Perimeter,
            Operation::SurfaceArea => MeasureKind::SurfaceArea,
        }
    }

    /// Volume-type measure (area in 2D, volume in 3D).
    pub fn is_volume_measure(self) -> bool {
        matches!(self, Operation::Area2d | Operation::Volume3d)
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Operation::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown operation '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterfaceType {
    Implicit,
    Parametric,
}

/// Static description of an integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorDescriptor {
    pub name: String,
    pub interface_type: InterfaceType,
    pub supported_dims: Vec<usize>,
    pub capabilities: Vec<Operation>,
    pub parameters: IndexMap<String, String>,
}

impl IntegratorDescriptor {
    /// `key=value` pairs joined by `;`, in declaration order.
    pub fn property_string(&self) -> String {
        self.parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn supports(&self, op: Operation) -> bool {
        self.capabilities.contains(&op) && self.supported_dims.contains(&op.dim())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "message")]
pub enum Status {
    Ok,
    Unsupported,
    Failed(String),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Unsupported => "unsupported",
            Status::Failed(_) => "failed",
        }
    }
}

/// Why a method produced no estimate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MethodError {
    Unsupported,
    Failed(String),
}

impl From<Error> for MethodError {
    fn from(e: Error) -> Self {
        MethodError::Failed(e.to_string())
    }
}

/// A method's raw output.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub quadrature: QuadratureData<T>,
    /// Cut cells whose reconstruction fell back to whole/empty by center sign.
    pub fallback_cells: usize,
}

impl<T: Real> Estimate<T> {
    pub fn from_rule(quadrature: QuadratureData<T>) -> Self {
        Estimate {
            value: quadrature.total(),
            quadrature,
            fallback_cells: 0,
        }
    }
}

pub type MethodResult<T> = Result<Estimate<T>, MethodError>;

/// Result of one contract call.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult<T> {
    pub value: T,
    pub quadrature: QuadratureData<T>,
    pub n_points: usize,
    /// Wall-clock seconds spent inside the compute call.
    pub runtime: f64,
    pub status: Status,
    pub fallback_cells: usize,
}

impl<T: Real> IntegrationResult<T> {
    fn without_value(dim: usize, status: Status, generator: &str) -> Self {
        IntegrationResult {
            value: T::nan(),
            quadrature: QuadratureData::new(dim, generator),
            n_points: 0,
            runtime: 0.0,
            status,
            fallback_cells: 0,
        }
    }
}

/// The integrator contract.
pub trait Integrator<T: Real>: Send + Sync {
    fn descriptor(&self) -> IntegratorDescriptor;

    fn compute_area_2d(&self, _tc: &TestCase<T>, _mesh: &CartesianMesh<T>, _order: usize) -> MethodResult<T> {
        Err(MethodError::Unsupported)
    }

    fn compute_volume_3d(&self, _tc: &TestCase<T>, _mesh: &CartesianMesh<T>, _order: usize) -> MethodResult<T> {
        Err(MethodError::Unsupported)
    }

    fn compute_interface_curve_length(
        &self,
        _tc: &TestCase<T>,
        _mesh: &CartesianMesh<T>,
        _order: usize,
    ) -> MethodResult<T> {
        Err(MethodError::Unsupported)
    }

    fn compute_interface_surface_area(
        &self,
        _tc: &TestCase<T>,
        _mesh: &CartesianMesh<T>,
        _order: usize,
    ) -> MethodResult<T> {
        Err(MethodError::Unsupported)
    }

    fn compute_area_via_flux_2d(&self, _tc: &TestCase<T>, _mesh: &CartesianMesh<T>, _order: usize) -> MethodResult<T> {
        Err(MethodError::Unsupported)
    }

    fn compute_volume_via_flux_3d(
        &self,
        _tc: &TestCase<T>,
        _mesh: &CartesianMesh<T>,
        _order: usize,
    ) -> MethodResult<T> {
        Err(MethodError::Unsupported)
    }

    /// A priori absolute error bound for a supported operation, if the method has one.
    fn error_bound(&self, _op: Operation, _tc: &TestCase<T>, _mesh: &CartesianMesh<T>, _order: usize) -> Option<f64> {
        None
    }

    /// Dispatches `op`, timing only the compute call.
    ///
    /// Dimension mismatches between operation, test case and mesh report
    /// `Unsupported`; a zero or oversized `order` reports `Failed`.
    fn evaluate(&self, op: Operation, tc: &TestCase<T>, mesh: &CartesianMesh<T>, order: usize) -> IntegrationResult<T> {
        let name = self.descriptor().name;
        if op.dim() != tc.dim {
            return IntegrationResult::without_value(tc.dim, Status::Unsupported, &name);
        }
        if mesh.dim() != tc.dim {
            return IntegrationResult::without_value(
                tc.dim,
                Status::Failed(format!("mesh dimension {} != test case dimension {}", mesh.dim(), tc.dim)),
                &name,
            );
        }
        if !(1..=crate::quadrature::MAX_GAUSS_POINTS).contains(&order) {
            return IntegrationResult::without_value(
                tc.dim,
                Status::Failed(format!("quadrature order {order} outside 1..=64")),
                &name,
            );
        }
        let start = Instant::now();
        let out = match op {
            Operation::Area2d => self.compute_area_2d(tc, mesh, order),
            Operation::Volume3d => self.compute_volume_3d(tc, mesh, order),
            Operation::CurveLength => self.compute_interface_curve_length(tc, mesh, order),
            Operation::SurfaceArea => self.compute_interface_surface_area(tc, mesh, order),
            Operation::AreaFlux2d => self.compute_area_via_flux_2d(tc, mesh, order),
            Operation::VolumeFlux3d => self.compute_volume_via_flux_3d(tc, mesh, order),
        };
        let runtime = start.elapsed().as_secs_f64();
        match out {
            Ok(est) if est.value.is_finite() => IntegrationResult {
                value: est.value,
                n_points: est.quadrature.len(),
                quadrature: est.quadrature,
                runtime,
                status: Status::Ok,
                fallback_cells: est.fallback_cells,
            },
            Ok(est) => IntegrationResult {
                runtime,
                ..IntegrationResult::without_value(
                    tc.dim,
                    Status::Failed(format!("non-finite result {}", est.value)),
                    &name,
                )
            },
            Err(MethodError::Unsupported) => IntegrationResult {
                runtime,
                ..IntegrationResult::without_value(tc.dim, Status::Unsupported, &name)
            },
            Err(MethodError::Failed(msg)) => IntegrationResult {
                runtime,
                ..IntegrationResult::without_value(tc.dim, Status::Failed(msg), &name)
            },
        }
    }
}

/// Interface measure used by a priori bounds: the reference if present, else the
/// bounding-box boundary measure of the level set.
pub(crate) fn interface_measure<T: Real>(tc: &TestCase<T>) -> f64 {
    let kind = if tc.dim == 2 { MeasureKind::Perimeter } else { MeasureKind::SurfaceArea };
    if let Some(v) = tc.reference(kind) {
        return v.to_f64_lossy();
    }
    let bb = tc.level_set.bounding_box();
    let w: Vec<f64> = (0..tc.dim).map(|a| bb.width(a).to_f64_lossy()).collect();
    if tc.dim == 2 {
        2.0 * (w[0] + w[1])
    } else {
        2.0 * (w[0] * w[1] + w[1] * w[2] + w[0] * w[2])
    }
}

/// Bound for piecewise-linear reconstruction at resolution `width`: chord
/// sagitta `L^2 / (8 rho)` with `L <= sqrt(2) width`, doubled.
pub(crate) fn chord_bound<T: Real>(tc: &TestCase<T>, width: f64) -> f64 {
    let rho = tc.level_set.min_curvature_radius().to_f64_lossy();
    interface_measure(tc) * width * width / (2.0 * rho)
}

pub(crate) fn missing_loop<T: Real>(tc: &TestCase<T>) -> MethodError {
    MethodError::Failed(format!("test case '{}' has no parametric loop", tc.id))
}
