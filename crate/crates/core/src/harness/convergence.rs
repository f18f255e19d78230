//! Mesh-refinement convergence tables and order estimation.

use std::fmt;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::TestCase;
use crate::integrators::{Integrator, Operation, Status};

use rayon::prelude::*;

use super::{measure, validate_mesh_plan, Measurement, RunOptions};

/// Errors at or below this are excluded from the order fit.
pub const SATURATION_FLOOR: f64 = 1e-14;

/// Fitted convergence order, or `Saturated` when fewer than two errors lie above the floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderEstimate {
    Order(f64),
    Saturated,
}

impl OrderEstimate {
    pub fn value(self) -> Option<f64> {
        match self {
            OrderEstimate::Order(p) => Some(p),
            OrderEstimate::Saturated => None,
        }
    }
}

impl fmt::Display for OrderEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderEstimate::Order(p) => write!(f, "{p:.3}"),
            OrderEstimate::Saturated => f.write_str("saturated"),
        }
    }
}

impl Serialize for OrderEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OrderEstimate::Order(p) => s.serialize_f64(*p),
            OrderEstimate::Saturated => s.serialize_str("saturated"),
        }
    }
}

/// Least-squares slope of `log(err)` against `log(h)` (so `err ~ C h^p` gives `p`) over the
/// entries with `err > SATURATION_FLOOR`.
pub fn estimate_order(h: &[f64], err: &[f64]) -> OrderEstimate {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(err)
        .filter(|(&h, &e)| h > 0.0 && e.is_finite() && e > SATURATION_FLOOR)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return OrderEstimate::Saturated;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return OrderEstimate::Saturated;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    OrderEstimate::Order(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub divisions: usize,
    pub h: f64,
    pub rel_error: Option<f64>,
    pub n_points: usize,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub testcase: String,
    pub integrator: String,
    pub operation: Operation,
    pub rows: Vec<ConvergenceRow>,
    pub order: OrderEstimate,
}

/// Groups measurements by (test case, integrator, operation) into tables,
/// keeping groups with at least one ok row. `width_of(testcase)` gives the
/// domain width used for `h = width / divisions`.
pub fn convergence_tables(measurements: &[Measurement], width_of: impl Fn(&str) -> f64) -> Vec<ConvergenceTable> {
    let mut groups: IndexMap<(String, String, Operation), Vec<&Measurement>> = IndexMap::new();
    for m in measurements {
        groups
            .entry((m.testcase.clone(), m.integrator.clone(), m.operation))
            .or_default()
            .push(m);
    }
    groups
        .into_iter()
        .filter(|(_, ms)| ms.iter().any(|m| m.status == Status::Ok))
        .map(|((testcase, integrator, operation), mut ms)| {
            ms.sort_by_key(|m| m.divisions);
            let width = width_of(&testcase);
            let rows: Vec<ConvergenceRow> = ms
                .iter()
                .map(|m| ConvergenceRow {
                    divisions: m.divisions,
                    h: width / m.divisions as f64,
                    rel_error: m.rel_error,
                    n_points: m.n_points,
                    status: m.status.label().to_string(),
                })
                .collect();
            let (h, e): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter_map(|r| r.rel_error.map(|e| (r.h, e)))
                .unzip();
            ConvergenceTable {
                testcase,
                integrator,
                operation,
                order: estimate_order(&h, &e),
                rows,
            }
        })
        .collect()
}

/// Runs `op` on `tc` over `mesh_plan` (at least two meshes) and fits the order.
/// Rows are the exact measurements `run_suite` produces for the same inputs.
pub fn convergence_study(
    tc: &TestCase<f64>,
    integrator: &dyn Integrator<f64>,
    op: Operation,
    mesh_plan: &[usize],
    order: usize,
    opts: &RunOptions,
) -> Result<(ConvergenceTable, Vec<Measurement>)> {
    if mesh_plan.len() < 2 {
        return Err(Error::invalid("convergence study needs at least two meshes"));
    }
    validate_mesh_plan(mesh_plan)?;
    let ms = run_measurements(tc, integrator, op, mesh_plan, order, opts);
    let width = tc.domain.width(0);
    let mut tables = convergence_tables(&ms, |_| width);
    let table = tables.pop().unwrap_or_else(|| ConvergenceTable {
        testcase: tc.id.clone(),
        integrator: integrator.descriptor().name,
        operation: op,
        rows: ms
            .iter()
            .map(|m| ConvergenceRow {
                divisions: m.divisions,
                h: width / m.divisions as f64,
                rel_error: None,
                n_points: 0,
                status: m.status.label().to_string(),
            })
            .collect(),
        order: OrderEstimate::Saturated,
    });
    Ok((table, ms))
}

fn run_measurements(
    tc: &TestCase<f64>,
    integrator: &dyn Integrator<f64>,
    op: Operation,
    mesh_plan: &[usize],
    order: usize,
    opts: &RunOptions,
) -> Vec<Measurement> {
    let one = |&n: &usize| measure(integrator, tc, op, n, order, opts);
    if opts.timing {
        mesh_plan.iter().map(one).collect()
    } else {
        mesh_plan.par_iter().map(one).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;
    use crate::harness::{run_suite, BenchmarkSuite};
    use crate::integrators::{build_integrator, IntegratorSpec};

    #[test]
    fn recovers_synthetic_orders() {
        let h: Vec<f64> = [2, 4, 8, 16, 32].iter().map(|&n| 1.0 / n as f64).collect();
        for p in [1.0, 2.0, 3.0] {
            let e: Vec<f64> = h.iter().map(|h| 0.7 * h.powf(p)).collect();
            let est = estimate_order(&h, &e).value().unwrap();
            assert!((est - p).abs() < 1e-6, "{p}: {est}");
        }
    }

    #[test]
    fn floor_guard() {
        let h = [0.5, 0.25, 0.125];
        assert_eq!(estimate_order(&h, &[1e-15, 1e-16, 0.0]), OrderEstimate::Saturated);
        assert_eq!(estimate_order(&h, &[1e-3, 1e-16, 0.0]), OrderEstimate::Saturated);
        assert!(estimate_order(&h, &[1e-3, 2.5e-4, 0.0]).value().is_some());
    }

    #[test]
    fn rows_match_run_suite() {
        let tc = catalog::<f64>().into_iter().next().unwrap();
        let integ = build_integrator::<f64>("linear", &Default::default()).unwrap();
        let plan = [2, 4, 8];
        let (table, ms) = convergence_study(&tc, integ.as_ref(), Operation::Area2d, &plan, 5, &RunOptions::default()).unwrap();
        let mut suite = BenchmarkSuite::new(vec![tc], vec![IntegratorSpec::new("linear")], plan.to_vec());
        suite.operations = vec![Operation::Area2d];
        let direct = run_suite(&suite, &RunOptions::default()).unwrap();
        assert_eq!(ms, direct);
        for (row, m) in table.rows.iter().zip(&direct) {
            assert_eq!(row.rel_error, m.rel_error);
            assert_eq!(row.n_points, m.n_points);
        }
    }

    #[test]
    fn single_mesh_rejected() {
        let tc = catalog::<f64>().into_iter().next().unwrap();
        let integ = build_integrator::<f64>("flux", &Default::default()).unwrap();
        assert!(convergence_study(&tc, integ.as_ref(), Operation::Area2d, &[4], 5, &RunOptions::default()).is_err());
    }
}
