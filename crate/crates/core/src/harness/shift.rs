//! Geometry-shift robustness sweep on a fixed mesh.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{translate_testcase, TestCase};
use crate::integrators::{Integrator, Operation, Status};

use super::{measure, BenchmarkSuite, Measurement, RunOptions};

/// Offsets `start + k / (steps - 1) * (end - start)` for `k = 0..steps`, on a
/// fixed mesh of `divisions` per axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftPlan {
    pub divisions: usize,
    pub steps: usize,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl ShiftPlan {
    pub fn offsets(&self) -> Vec<Vec<f64>> {
        (0..self.steps)
            .map(|k| {
                let t = if self.steps == 1 { 0.0 } else { k as f64 / (self.steps - 1) as f64 };
                self.start.iter().zip(&self.end).map(|(&a, &b)| a + t * (b - a)).collect()
            })
            .collect()
    }

    /// Translates `tc` to every offset; fails before any evaluation if one is invalid.
    pub fn shifted_cases(&self, tc: &TestCase<f64>) -> Result<Vec<TestCase<f64>>> {
        if self.steps == 0 {
            return Err(Error::invalid("shift study needs at least one step"));
        }
        if self.divisions == 0 {
            return Err(Error::invalid("mesh divisions must be positive"));
        }
        if self.start.len() != tc.dim || self.end.len() != tc.dim {
            return Err(Error::DimensionMismatch {
                expected: tc.dim,
                found: self.start.len().max(self.end.len()),
            });
        }
        self.offsets()
            .iter()
            .enumerate()
            .map(|(k, off)| {
                translate_testcase(tc, off).map_err(|e| Error::invalid(format!("shift step {k} (offset {off:?}): {e}")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftSummary {
    pub max_rel_error: Option<f64>,
    pub median_rel_error: Option<f64>,
    /// `max - min` of the relative errors.
    pub spread: Option<f64>,
    pub failed: usize,
    pub unsupported: usize,
}

impl ShiftSummary {
    pub fn from_measurements(ms: &[Measurement]) -> Self {
        let mut errs: Vec<f64> = ms.iter().filter_map(|m| m.rel_error).collect();
        errs.sort_by(f64::total_cmp);
        let median = if errs.is_empty() {
            None
        } else if errs.len() % 2 == 1 {
            Some(errs[errs.len() / 2])
        } else {
            Some(0.5 * (errs[errs.len() / 2 - 1] + errs[errs.len() / 2]))
        };
        ShiftSummary {
            max_rel_error: errs.last().copied(),
            median_rel_error: median,
            spread: errs.last().map(|&hi| hi - errs[0]),
            failed: ms.iter().filter(|m| matches!(m.status, Status::Failed(_))).count(),
            unsupported: ms.iter().filter(|m| m.status == Status::Unsupported).count(),
        }
    }
}

/// A shift study attached to a suite: which test case and operation to sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftSpec {
    pub testcase: String,
    pub operation: Operation,
    pub plan: ShiftPlan,
}

impl ShiftSpec {
    /// Catalog circle moved from center (0.25, 0.5) to (0.75, 0.5) in 1000 steps on an 8x8 mesh.
    pub fn circle_sweep() -> Self {
        ShiftSpec {
            testcase: "circle".into(),
            operation: Operation::Area2d,
            plan: ShiftPlan {
                divisions: 8,
                steps: 1000,
                start: vec![-0.25, 0.0],
                end: vec![0.25, 0.0],
            },
        }
    }
}

/// Runs the suite's shift study (if any) for every suite integrator.
pub fn run_shift_studies(suite: &BenchmarkSuite, opts: &RunOptions) -> Result<Vec<ShiftSeries>> {
    let Some(spec) = &suite.shift else {
        return Ok(Vec::new());
    };
    let tc = suite
        .testcases
        .iter()
        .find(|t| t.id == spec.testcase)
        .ok_or_else(|| Error::invalid(format!("shift study names unknown test case '{}'", spec.testcase)))?;
    let cases = spec.plan.shifted_cases(tc)?;
    suite
        .integrators
        .iter()
        .map(|s| {
            let integ = s.build::<f64>()?;
            Ok(run_shifted(tc, &cases, integ.as_ref(), spec.operation, &spec.plan, suite.order, opts))
        })
        .collect()
}

/// One integrator's error series over the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSeries {
    pub testcase: String,
    pub integrator: String,
    pub operation: Operation,
    pub offsets: Vec<Vec<f64>>,
    pub measurements: Vec<Measurement>,
    pub summary: ShiftSummary,
}

/// Runs `op` for every shifted position of `tc` on the plan's fixed mesh.
pub fn shift_study(
    tc: &TestCase<f64>,
    integrator: &dyn Integrator<f64>,
    op: Operation,
    plan: &ShiftPlan,
    order: usize,
    opts: &RunOptions,
) -> Result<ShiftSeries> {
    let cases = plan.shifted_cases(tc)?;
    Ok(run_shifted(tc, &cases, integrator, op, plan, order, opts))
}

pub(crate) fn run_shifted(
    tc: &TestCase<f64>,
    cases: &[TestCase<f64>],
    integrator: &dyn Integrator<f64>,
    op: Operation,
    plan: &ShiftPlan,
    order: usize,
    opts: &RunOptions,
) -> ShiftSeries {
    let one = |c: &TestCase<f64>| measure(integrator, c, op, plan.divisions, order, opts);
    let measurements: Vec<Measurement> = if opts.timing {
        cases.iter().map(one).collect()
    } else {
        cases.par_iter().map(one).collect()
    };
    ShiftSeries {
        testcase: tc.id.clone(),
        integrator: integrator.descriptor().name,
        operation: op,
        offsets: plan.offsets(),
        summary: ShiftSummary::from_measurements(&measurements),
        measurements,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;
    use crate::integrators::build_integrator;

    fn circle() -> TestCase<f64> {
        catalog::<f64>().into_iter().next().unwrap()
    }

    #[test]
    fn offsets_hit_both_ends() {
        let plan = ShiftPlan {
            divisions: 8,
            steps: 5,
            start: vec![-0.25, 0.0],
            end: vec![0.25, 0.0],
        };
        let o = plan.offsets();
        assert_eq!(o.len(), 5);
        assert_eq!(o[0], vec![-0.25, 0.0]);
        assert_eq!(o[4], vec![0.25, 0.0]);
        assert_eq!(o[2], vec![0.0, 0.0]);
    }

    #[test]
    fn single_step_is_start() {
        let plan = ShiftPlan {
            divisions: 8,
            steps: 1,
            start: vec![-0.1, 0.0],
            end: vec![0.1, 0.0],
        };
        let integ = build_integrator::<f64>("quadtree", &Default::default()).unwrap();
        let s = shift_study(&circle(), integ.as_ref(), Operation::Area2d, &plan, 3, &RunOptions::default()).unwrap();
        assert_eq!(s.measurements.len(), 1);
        assert_eq!(s.offsets, vec![vec![-0.1, 0.0]]);
    }

    #[test]
    fn sweep_leaving_domain_is_rejected_up_front() {
        let plan = ShiftPlan {
            divisions: 8,
            steps: 11,
            start: vec![0.0, 0.0],
            end: vec![0.4, 0.0],
        };
        let integ = build_integrator::<f64>("quadtree", &Default::default()).unwrap();
        let err = shift_study(&circle(), integ.as_ref(), Operation::Area2d, &plan, 3, &RunOptions::default()).unwrap_err();
        assert!(err.to_string().contains("shift step"));
    }

    #[test]
    fn summary_statistics() {
        let plan = ShiftPlan {
            divisions: 8,
            steps: 4,
            start: vec![-0.1, 0.0],
            end: vec![0.1, 0.0],
        };
        let integ = build_integrator::<f64>("linear", &Default::default()).unwrap();
        let s = shift_study(&circle(), integ.as_ref(), Operation::Area2d, &plan, 3, &RunOptions::default()).unwrap();
        let mut e: Vec<f64> = s.measurements.iter().map(|m| m.rel_error.unwrap()).collect();
        e.sort_by(f64::total_cmp);
        assert_eq!(s.summary.max_rel_error, Some(e[3]));
        assert_eq!(s.summary.median_rel_error, Some(0.5 * (e[1] + e[2])));
        assert_eq!(s.summary.failed, 0);
    }
}
