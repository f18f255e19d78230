//! Turns flags plus config into a validated suite. Nothing here touches the
//! output directory.

use std::path::{Path, PathBuf};

use cutquad::geometry::{catalog, load_catalog_dir, TestCase};
use cutquad::harness::{BenchmarkSuite, RunOptions, TierSelection, DEFAULT_ORDER};
use cutquad::integrators::{parse_param_assignments, IntegratorSpec, Operation, INTEGRATOR_NAMES};

use crate::args::{OutArgs, SuiteArgs};
use crate::config::Config;

pub const DEFAULT_MESH_PLAN: [usize; 5] = [2, 4, 8, 16, 32];
pub const DEFAULT_OUTPUT_DIR: &str = "artifacts";

pub fn load_testcases(catalog_dir: Option<&Path>) -> Result<Vec<TestCase<f64>>, String> {
    match catalog_dir {
        Some(dir) => {
            let tcs = load_catalog_dir::<f64>(dir).map_err(|e| e.to_string())?;
            if tcs.is_empty() {
                return Err(format!("no test cases found in {}", dir.display()));
            }
            Ok(tcs)
        }
        None => Ok(catalog()),
    }
}

pub fn select_testcases(all: Vec<TestCase<f64>>, ids: &[String]) -> Result<Vec<TestCase<f64>>, String> {
    if ids.is_empty() {
        return Ok(all);
    }
    ids.iter()
        .map(|id| {
            all.iter().find(|t| &t.id == id).cloned().ok_or_else(|| {
                let known: Vec<&str> = all.iter().map(|t| t.id.as_str()).collect();
                format!("unknown test case '{id}' (known: {})", known.join(", "))
            })
        })
        .collect()
}

pub fn parse_operations(names: &[String]) -> Result<Vec<Operation>, String> {
    if names.is_empty() {
        return Ok(Operation::ALL.to_vec());
    }
    names.iter().map(|n| n.parse::<Operation>().map_err(|e| e.to_string())).collect()
}

/// Integrator specs with `--param` and `--seed` applied. Parameters for an
/// integrator that is not selected are an error.
pub fn integrator_specs(names: &[String], params: &[String], seed: Option<u64>) -> Result<Vec<IntegratorSpec>, String> {
    let names: Vec<String> = if names.is_empty() {
        INTEGRATOR_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        names.to_vec()
    };
    let mut specs = Vec::new();
    for n in &names {
        if !INTEGRATOR_NAMES.contains(&n.as_str()) {
            return Err(format!("unknown integrator '{n}' (known: {})", INTEGRATOR_NAMES.join(", ")));
        }
        if specs.iter().any(|s: &IntegratorSpec| &s.name == n) {
            return Err(format!("integrator '{n}' listed twice"));
        }
        specs.push(IntegratorSpec::new(n.clone()));
    }
    let mut assignments = parse_param_assignments(params).map_err(|e| e.to_string())?;
    if let Some(seed) = seed {
        if names.iter().any(|n| n == "monte-carlo") {
            assignments
                .entry("monte-carlo".into())
                .or_default()
                .insert("seed".into(), seed.to_string());
        }
    }
    for (integ, kv) in assignments {
        let spec = specs
            .iter_mut()
            .find(|s| s.name == integ)
            .ok_or_else(|| format!("parameters given for integrator '{integ}', which is not selected"))?;
        spec.params.extend(kv);
    }
    Ok(specs)
}

/// Everything a matrix command needs, fully validated.
pub struct Resolved {
    pub suite: BenchmarkSuite,
    pub opts: RunOptions,
    pub warning: Option<String>,
}

pub fn resolve_suite(
    args: &SuiteArgs,
    config: &Config,
    catalog_dir: Option<&Path>,
    default_plan: &[usize],
) -> Result<Resolved, String> {
    let pick = |flag: &Vec<String>, cfg: &Vec<String>| if flag.is_empty() { cfg.clone() } else { flag.clone() };
    let testcases = select_testcases(load_testcases(catalog_dir)?, &pick(&args.testcase, &config.testcases))?;
    let operations = parse_operations(&pick(&args.operation, &config.operations))?;
    let mut params = config.param_assignments()?;
    params.extend(args.params.iter().cloned());
    let integrators = integrator_specs(
        &pick(&args.integrator, &config.integrators),
        &params,
        args.seed.or(config.seed),
    )?;
    let mesh_plan = if !args.mesh.is_empty() {
        args.mesh.clone()
    } else if !config.mesh.is_empty() {
        config.mesh.clone()
    } else {
        default_plan.to_vec()
    };
    let tier: TierSelection = args
        .tier
        .as_deref()
        .or(config.tier.as_deref())
        .unwrap_or("all")
        .parse()
        .map_err(|e: cutquad::Error| e.to_string())?;
    let mut suite = BenchmarkSuite::new(testcases, integrators, mesh_plan);
    suite.operations = operations;
    suite.order = args.order.or(config.order).unwrap_or(DEFAULT_ORDER);
    suite.validate().map_err(|e| e.to_string())?;
    let (suite, warning) = cutquad::ci::tier_filter(&suite, tier);
    if warning.is_none() {
        suite.validate().map_err(|e| e.to_string())?;
    }
    let opts = RunOptions {
        timing: args.timing || config.timing.unwrap_or(false),
        ..RunOptions::default()
    };
    Ok(Resolved { suite, opts, warning })
}

/// Flag, then environment (both via clap), then config, then the default.
pub fn output_dir(out: &OutArgs, config: &Config) -> PathBuf {
    out.out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lands_on_monte_carlo() {
        let specs = integrator_specs(&["monte-carlo".into()], &[], Some(9)).unwrap();
        assert_eq!(specs[0].params["seed"], "9");
    }

    #[test]
    fn params_for_unselected_integrator_rejected() {
        let err = integrator_specs(&["linear".into()], &["quadtree.depth=3".into()], None).unwrap_err();
        assert!(err.contains("not selected"));
    }

    #[test]
    fn flag_beats_config() {
        let args = SuiteArgs {
            mesh: vec![3],
            ..SuiteArgs::default()
        };
        let config = Config {
            mesh: vec![5, 6],
            order: Some(2),
            ..Config::default()
        };
        let r = resolve_suite(&args, &config, None, &DEFAULT_MESH_PLAN).unwrap();
        assert_eq!(r.suite.mesh_plan, vec![3]);
        assert_eq!(r.suite.order, 2);
    }

    #[test]
    fn unknown_names_rejected() {
        assert!(select_testcases(catalog(), &["square".into()]).is_err());
        assert!(parse_operations(&["area".into()]).is_err());
        assert!(integrator_specs(&["nope".into()], &[], None).is_err());
    }
}
