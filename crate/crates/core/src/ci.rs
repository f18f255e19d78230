//! Tiered GitLab-compatible pipeline generation and the CI exit-code gate.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{BenchmarkSuite, ComparisonReport, ShiftSpec, TierSelection};
use crate::integrators::INTEGRATOR_NAMES;

pub const STAGES: [&str; 4] = ["build", "quick", "extensive", "report"];
pub const DEFAULT_RETENTION: &str = "2 days";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// 0 when everything passes, 1 for tolerance failures only, 2 when any
/// measurement failed to execute (regardless of tolerances).
pub fn gate_exit_code(report: &ComparisonReport) -> i32 {
    if !report.execution_errors.is_empty() {
        EXIT_ERROR
    } else if report.failures() > 0 {
        EXIT_TOLERANCE
    } else {
        EXIT_PASS
    }
}

/// Restricts a suite to a tier. Quick keeps quick-tagged cases on the
/// coarsest mesh only; extensive keeps everything and adds the circle shift
/// sweep when the circle is present; all is the identity. The second value is
/// a warning when the result has no test cases.
pub fn tier_filter(suite: &BenchmarkSuite, tier: TierSelection) -> (BenchmarkSuite, Option<String>) {
    let mut out = suite.clone();
    out.tier = tier;
    match tier {
        TierSelection::All => {}
        TierSelection::Quick => {
            out.testcases.retain(|t| tier.admits(t.tier));
            out.mesh_plan.truncate(1);
            out.shift = None;
        }
        TierSelection::Extensive => {
            if out.shift.is_none() {
                let sweep = ShiftSpec::circle_sweep();
                if out.testcases.iter().any(|t| t.id == sweep.testcase) {
                    out.shift = Some(sweep);
                }
            }
        }
    }
    let warning = out
        .testcases
        .is_empty()
        .then(|| format!("tier '{}' selects no test cases", tier.name()));
    (out, warning)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub paths: Vec<String>,
    pub expire_in: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiJob {
    pub stage: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub needs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    pub script: Vec<String>,
    pub artifacts: Artifacts,
}

/// A pipeline: ordered stages and named jobs (serialized as a GitLab file).
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub stages: Vec<String>,
    pub jobs: IndexMap<String, CiJob>,
    pub retention: String,
}

#[derive(Serialize, Deserialize)]
struct PipelineFile {
    stages: Vec<String>,
    #[serde(flatten)]
    jobs: IndexMap<String, CiJob>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    /// Runner tag per integrator; every key must be a registered integrator.
    pub runner_tags: IndexMap<String, String>,
    /// Tag for the build and report jobs.
    pub default_tag: Option<String>,
    pub retention: String,
    /// Path of the CLI binary inside the CI workspace.
    pub binary: String,
    pub baseline: String,
    pub output_dir: String,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            runner_tags: IndexMap::new(),
            default_tag: None,
            retention: DEFAULT_RETENTION.into(),
            binary: "target/release/cutquad".into(),
            baseline: "ci/baseline.json".into(),
            output_dir: "artifacts".into(),
        }
    }
}

fn shell_quote(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_./,=:".contains(c)) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

fn params_args(suite: &BenchmarkSuite, integrator: &str) -> String {
    let spec = suite.integrators.iter().find(|s| s.name == integrator);
    spec.map(|s| {
        s.params
            .iter()
            .map(|(k, v)| format!(" --param {}", shell_quote(&format!("{integrator}.{k}={v}"))))
            .collect::<String>()
    })
    .unwrap_or_default()
}

/// Builds the pipeline for `suite`: one build job, a quick and an extensive
/// job per integrator, one report job.
pub fn generate_pipeline(suite: &BenchmarkSuite, opts: &PipelineOptions) -> Result<(PipelineSpec, String)> {
    if suite.integrators.is_empty() || suite.testcases.is_empty() {
        return Err(Error::invalid("cannot generate a pipeline for an empty suite"));
    }
    for name in opts.runner_tags.keys() {
        if !INTEGRATOR_NAMES.contains(&name.as_str()) {
            return Err(Error::invalid(format!("runner tag given for unknown integrator '{name}'")));
        }
    }
    if opts.retention.trim().is_empty() {
        return Err(Error::invalid("artifact retention must be non-empty"));
    }
    let art = |paths: Vec<String>, when: Option<&str>| Artifacts {
        paths,
        expire_in: opts.retention.clone(),
        when: when.map(str::to_string),
    };
    let default_tags: Vec<String> = opts.default_tag.iter().cloned().collect();
    let bin = shell_quote(&opts.binary);
    let out = &opts.output_dir;
    let plan = suite.mesh_plan.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
    let cases = suite.testcases.iter().map(|t| t.id.clone()).collect::<Vec<_>>().join(",");
    let ops = suite.operations.iter().map(|o| o.name()).collect::<Vec<_>>().join(",");

    let mut jobs = IndexMap::new();
    jobs.insert(
        "build".to_string(),
        CiJob {
            stage: "build".into(),
            needs: vec![],
            tags: default_tags.clone(),
            script: vec!["cargo build --release --locked".into()],
            artifacts: art(vec![opts.binary.clone()], None),
        },
    );
    let mut extensive_names = Vec::new();
    for spec in &suite.integrators {
        let name = &spec.name;
        let tags: Vec<String> = opts.runner_tags.get(name).cloned().into_iter().collect();
        let params = params_args(suite, name);
        let common = format!(
            "--integrator {name} --testcase {cases} --operation {ops} --mesh {plan} --order {}{params}",
            suite.order
        );
        let quick_dir = format!("{out}/quick-{name}");
        jobs.insert(
            format!("quick-{name}"),
            CiJob {
                stage: "quick".into(),
                needs: vec!["build".into()],
                tags: tags.clone(),
                script: vec![format!(
                    "{bin} run --tier quick {common} --baseline {} --out {quick_dir}",
                    shell_quote(&opts.baseline)
                )],
                artifacts: art(vec![quick_dir.clone()], Some("always")),
            },
        );
        let ext_dir = format!("{out}/extensive-{name}");
        let ext = format!("extensive-{name}");
        jobs.insert(
            ext.clone(),
            CiJob {
                stage: "extensive".into(),
                needs: vec![format!("quick-{name}")],
                tags,
                script: vec![format!(
                    "{bin} run --tier extensive {common} --baseline {} --out {ext_dir}",
                    shell_quote(&opts.baseline)
                )],
                artifacts: art(vec![ext_dir], Some("always")),
            },
        );
        extensive_names.push(ext);
    }
    let report_dir = format!("{out}/report");
    jobs.insert(
        "report".to_string(),
        CiJob {
            stage: "report".into(),
            needs: extensive_names,
            tags: default_tags,
            script: vec![
                format!("{bin} report --out {report_dir} {out}/extensive-*/csv/measurements.csv"),
                format!(
                    "{bin} compare --baseline {} --out {report_dir} {out}/extensive-*/csv/measurements.csv",
                    shell_quote(&opts.baseline)
                ),
            ],
            artifacts: art(vec![report_dir], Some("always")),
        },
    );
    let spec = PipelineSpec {
        stages: STAGES.iter().map(|s| s.to_string()).collect(),
        jobs,
        retention: opts.retention.clone(),
    };
    spec.validate()?;
    let yaml = spec.to_yaml()?;
    Ok((spec, yaml))
}

impl PipelineSpec {
    pub fn to_yaml(&self) -> Result<String> {
        let file = PipelineFile {
            stages: self.stages.clone(),
            jobs: self.jobs.clone(),
        };
        Ok(serde_yaml::to_string(&file)?)
    }

    /// Parses pipeline YAML produced by [`PipelineSpec::to_yaml`] and validates it.
    pub fn from_yaml(text: &str) -> Result<Self> {
        let file: PipelineFile = serde_yaml::from_str(text)?;
        let retention = file
            .jobs
            .values()
            .next()
            .map(|j| j.artifacts.expire_in.clone())
            .unwrap_or_else(|| DEFAULT_RETENTION.into());
        let spec = PipelineSpec {
            stages: file.stages,
            jobs: file.jobs,
            retention,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Every job uses a declared stage and depends only on jobs of earlier stages.
    pub fn validate(&self) -> Result<()> {
        let rank = |stage: &str| self.stages.iter().position(|s| s == stage);
        for (name, job) in &self.jobs {
            let r = rank(&job.stage).ok_or_else(|| Error::invalid(format!("job '{name}' uses unknown stage '{}'", job.stage)))?;
            if job.script.is_empty() {
                return Err(Error::invalid(format!("job '{name}' has an empty script")));
            }
            if job.artifacts.expire_in.trim().is_empty() {
                return Err(Error::invalid(format!("job '{name}' has no artifact retention")));
            }
            for need in &job.needs {
                let dep = self
                    .jobs
                    .get(need)
                    .ok_or_else(|| Error::invalid(format!("job '{name}' needs unknown job '{need}'")))?;
                if rank(&dep.stage).is_none_or(|d| d >= r) {
                    return Err(Error::invalid(format!("job '{name}' needs '{need}' from a later or equal stage")));
                }
            }
        }
        Ok(())
    }
}
