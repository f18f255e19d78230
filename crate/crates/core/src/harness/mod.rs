//! Benchmark matrix execution, convergence and shift studies, baselines.

mod baseline;
mod convergence;
mod shift;

pub use baseline::{
    compare_to_baseline, load_baseline, record_baseline, save_baseline, BaselineEntry, BaselineFile, ComparisonReport,
    EntryVerdict, TolerancePolicy, BASELINE_SCHEMA_VERSION,
};
pub use convergence::{convergence_study, convergence_tables, estimate_order, ConvergenceRow, ConvergenceTable, OrderEstimate, SATURATION_FLOOR};
pub use shift::{run_shift_studies, shift_study, ShiftPlan, ShiftSeries, ShiftSpec, ShiftSummary};

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CartesianMesh, TestCase, Tier};
use crate::integrators::{Integrator, IntegratorSpec, Operation, Status};
use crate::quadrature::MAX_GAUSS_POINTS;

/// Which test-case tier a suite covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TierSelection {
    Quick,
    Extensive,
    #[default]
    All,
}

impl TierSelection {
    pub fn name(self) -> &'static str {
        match self {
            TierSelection::Quick => "quick",
            TierSelection::Extensive => "extensive",
            TierSelection::All => "all",
        }
    }

    pub fn admits(self, tier: Tier) -> bool {
        match self {
            TierSelection::Quick => tier == Tier::Quick,
            TierSelection::Extensive | TierSelection::All => true,
        }
    }
}

impl std::str::FromStr for TierSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(TierSelection::Quick),
            "extensive" => Ok(TierSelection::Extensive),
            "all" => Ok(TierSelection::All),
            _ => Err(Error::invalid(format!("unknown tier '{s}' (expected quick, extensive or all)"))),
        }
    }
}

/// The benchmark matrix `testcases x integrators x operations x mesh_plan`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSuite {
    pub testcases: Vec<TestCase<f64>>,
    pub integrators: Vec<IntegratorSpec>,
    pub operations: Vec<Operation>,
    /// Divisions per axis, strictly increasing.
    pub mesh_plan: Vec<usize>,
    pub tier: TierSelection,
    /// Gauss points per direction handed to every integrator.
    pub order: usize,
    /// Optional geometry-shift study run alongside the matrix.
    pub shift: Option<ShiftSpec>,
}

pub const DEFAULT_ORDER: usize = 5;

impl BenchmarkSuite {
    /// All operations, `order` 5, tier `all`.
    pub fn new(testcases: Vec<TestCase<f64>>, integrators: Vec<IntegratorSpec>, mesh_plan: Vec<usize>) -> Self {
        BenchmarkSuite {
            testcases,
            integrators,
            operations: Operation::ALL.to_vec(),
            mesh_plan,
            tier: TierSelection::All,
            order: DEFAULT_ORDER,
            shift: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.testcases.is_empty() {
            return Err(Error::invalid("suite has no test cases"));
        }
        if self.integrators.is_empty() {
            return Err(Error::invalid("suite has no integrators"));
        }
        if self.operations.is_empty() {
            return Err(Error::invalid("suite has no operations"));
        }
        validate_mesh_plan(&self.mesh_plan)?;
        if !(1..=MAX_GAUSS_POINTS).contains(&self.order) {
            return Err(Error::invalid(format!("order must be in 1..={MAX_GAUSS_POINTS}, got {}", self.order)));
        }
        for tc in &self.testcases {
            tc.validate()?;
        }
        for spec in &self.integrators {
            spec.build::<f64>()?;
        }
        if let Some(sh) = &self.shift {
            let tc = self
                .testcases
                .iter()
                .find(|t| t.id == sh.testcase)
                .ok_or_else(|| Error::invalid(format!("shift study names unknown test case '{}'", sh.testcase)))?;
            sh.plan.shifted_cases(tc)?;
        }
        Ok(())
    }

    /// Number of measurements [`run_suite`] produces.
    pub fn size(&self) -> usize {
        self.testcases.len() * self.integrators.len() * self.operations.len() * self.mesh_plan.len()
    }
}

pub(crate) fn validate_mesh_plan(plan: &[usize]) -> Result<()> {
    if plan.is_empty() {
        return Err(Error::invalid("mesh plan is empty"));
    }
    if plan[0] == 0 {
        return Err(Error::invalid("mesh divisions must be positive"));
    }
    if plan.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("mesh plan must be strictly increasing, got {plan:?}")));
    }
    Ok(())
}

/// Identity of one matrix element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MeasurementKey {
    pub testcase: String,
    pub integrator: String,
    pub operation: Operation,
    pub divisions: usize,
}

impl fmt::Display for MeasurementKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}/{}", self.testcase, self.integrator, self.operation, self.divisions)
    }
}

/// One recorded metric `m(testcase, integrator)` for an operation and mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub testcase: String,
    pub integrator: String,
    pub operation: Operation,
    pub divisions: usize,
    /// `None` unless the status is ok.
    pub value: Option<f64>,
    pub reference: Option<f64>,
    /// `|value - reference| / |reference|` when ok and a reference exists.
    pub rel_error: Option<f64>,
    pub n_points: usize,
    /// Median wall-clock seconds of the compute call; 0 with timing disabled.
    pub runtime_s: f64,
    pub status: Status,
}

impl Measurement {
    pub fn key(&self) -> MeasurementKey {
        MeasurementKey {
            testcase: self.testcase.clone(),
            integrator: self.integrator.clone(),
            operation: self.operation,
            divisions: self.divisions,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

pub fn relative_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

/// Execution switches shared by all studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Serialize calls and record the median runtime of `repeats` calls.
    pub timing: bool,
    pub repeats: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            timing: false,
            repeats: 3,
        }
    }
}

/// Evaluates one matrix element. Panics inside the integrator become a
/// failed measurement.
pub fn measure(
    integ: &dyn Integrator<f64>,
    tc: &TestCase<f64>,
    op: Operation,
    divisions: usize,
    order: usize,
    opts: &RunOptions,
) -> Measurement {
    let name = integ.descriptor().name;
    let reference = tc.reference(op.reference_kind());
    let mut m = Measurement {
        testcase: tc.id.clone(),
        integrator: name,
        operation: op,
        divisions,
        value: None,
        reference,
        rel_error: None,
        n_points: 0,
        runtime_s: 0.0,
        status: Status::Unsupported,
    };
    let mesh = match CartesianMesh::uniform(tc.domain.clone(), divisions) {
        Ok(mesh) => mesh,
        Err(e) => {
            m.status = Status::Failed(e.to_string());
            return m;
        }
    };
    let call = || catch_unwind(AssertUnwindSafe(|| integ.evaluate(op, tc, &mesh, order)));
    let first = match call() {
        Ok(r) => r,
        Err(payload) => {
            m.status = Status::Failed(format!("integrator panicked: {}", panic_message(&payload)));
            return m;
        }
    };
    if opts.timing && first.status == Status::Ok {
        let mut times = vec![first.runtime];
        for _ in 1..opts.repeats.max(1) {
            match call() {
                Ok(r) => times.push(r.runtime),
                Err(payload) => {
                    m.status = Status::Failed(format!("integrator panicked: {}", panic_message(&payload)));
                    return m;
                }
            }
        }
        times.sort_by(f64::total_cmp);
        m.runtime_s = times[times.len() / 2];
    }
    m.status = first.status;
    if m.status == Status::Ok {
        m.value = Some(first.value);
        m.n_points = first.n_points;
        m.rel_error = reference.map(|r| relative_error(first.value, r));
    }
    m
}

fn panic_message(payload: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

/// Runs the full matrix over already constructed integrators.
///
/// Output order is test case, integrator, operation, mesh. With timing off the
/// (test case, integrator) pairs run in parallel; the order is unaffected.
pub fn run_matrix(
    testcases: &[TestCase<f64>],
    integrators: &[Box<dyn Integrator<f64>>],
    operations: &[Operation],
    mesh_plan: &[usize],
    order: usize,
    opts: &RunOptions,
) -> Vec<Measurement> {
    let pairs: Vec<(&TestCase<f64>, &dyn Integrator<f64>)> = testcases
        .iter()
        .flat_map(|tc| integrators.iter().map(move |i| (tc, i.as_ref())))
        .collect();
    let row = |&(tc, integ): &(&TestCase<f64>, &dyn Integrator<f64>)| -> Vec<Measurement> {
        operations
            .iter()
            .flat_map(|&op| mesh_plan.iter().map(move |&n| (op, n)))
            .map(|(op, n)| measure(integ, tc, op, n, order, opts))
            .collect()
    };
    if opts.timing {
        pairs.iter().flat_map(row).collect()
    } else {
        pairs.par_iter().flat_map_iter(row).collect()
    }
}

/// Validates and runs `suite`; one measurement per matrix element.
pub fn run_suite(suite: &BenchmarkSuite, opts: &RunOptions) -> Result<Vec<Measurement>> {
    suite.validate()?;
    let integrators = suite
        .integrators
        .iter()
        .map(|s| s.build::<f64>())
        .collect::<Result<Vec<_>>>()?;
    Ok(run_matrix(
        &suite.testcases,
        &integrators,
        &suite.operations,
        &suite.mesh_plan,
        suite.order,
        opts,
    ))
}
