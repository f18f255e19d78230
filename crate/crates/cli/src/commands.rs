use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use cutquad::ci::{gate_exit_code, generate_pipeline, PipelineOptions, EXIT_ERROR, EXIT_PASS};
use cutquad::geometry::{CartesianMesh, TestCase};
use cutquad::harness::{
    compare_to_baseline, convergence_tables, load_baseline, record_baseline, run_shift_studies, run_suite, save_baseline,
    BaselineFile, ComparisonReport, ConvergenceTable, Measurement, MeasurementKey, ShiftSeries, TolerancePolicy,
};
use cutquad::integrators::{build_integrator, Operation, Status, INTEGRATOR_NAMES};
use cutquad::reporting::{
    html_summary, plot_convergence_svg, plot_points_svg, plot_shift_svg, read_measurements_csv, shift_csv_string, slug,
    write_measurements_csv, ArtifactLayout, ArtifactManifest, HtmlInputs,
};
use indexmap::IndexMap;
use serde_json::json;

use crate::args::{BaselineArgs, CiInitArgs, CompareArgs, ListArgs, ReportArgs, RunArgs, ShiftArgs};
use crate::config::Config;
use crate::resolve::{self, Resolved, DEFAULT_MESH_PLAN};

/// Points plots are skipped above this many quadrature points.
const MAX_PLOT_POINTS: usize = 20_000;

pub type CmdResult = Result<i32, String>;

/// Global options shared by every subcommand.
pub struct Context {
    pub config: Config,
    pub catalog_dir: Option<PathBuf>,
    /// The invocation, recorded in the manifest.
    pub command_line: String,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Output directory plus the manifest being built for it.
struct Outputs {
    layout: ArtifactLayout,
    manifest: ArtifactManifest,
    command: String,
}

impl Outputs {
    fn create(root: &Path, command: &str) -> Result<Self, String> {
        let layout = ArtifactLayout::new(root);
        layout.create().map_err(err)?;
        Ok(Outputs {
            manifest: ArtifactManifest::new(root),
            layout,
            command: command.to_string(),
        })
    }

    fn record(&mut self, path: &Path) -> Result<(), String> {
        self.manifest.record(path, &self.command).map_err(err)
    }

    fn write(&mut self, path: PathBuf, text: &str) -> Result<(), String> {
        fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.record(&path)
    }

    fn finish(mut self) -> Result<PathBuf, String> {
        self.manifest.merge_existing();
        self.manifest.write().map_err(err)
    }
}

fn read_csvs(inputs: &[PathBuf]) -> Result<Vec<Measurement>, String> {
    let mut all = Vec::new();
    let mut seen = BTreeSet::new();
    for p in inputs {
        for m in read_measurements_csv(p).map_err(err)? {
            if !seen.insert(m.key()) {
                return Err(format!("duplicate measurement {} in {}", m.key(), p.display()));
            }
            all.push(m);
        }
    }
    Ok(all)
}

fn width_lookup(testcases: &[TestCase<f64>]) -> impl Fn(&str) -> f64 + '_ {
    move |id| testcases.iter().find(|t| t.id == id).map_or(1.0, |t| t.domain.width(0))
}

fn print_counts(ms: &[Measurement]) {
    let ok = ms.iter().filter(|m| m.is_ok()).count();
    let unsupported = ms.iter().filter(|m| m.status == Status::Unsupported).count();
    println!("{} measurements: {ok} ok, {unsupported} unsupported, {} failed", ms.len(), ms.len() - ok - unsupported);
}

fn print_report(report: &ComparisonReport) {
    for (key, msg) in &report.execution_errors {
        if msg.is_empty() {
            eprintln!("FAILED {key}");
        } else {
            eprintln!("FAILED {key}: {msg}");
        }
    }
    for v in report.entries.iter().filter(|v| !v.passed) {
        eprintln!("TOLERANCE {}: {}", v.key, v.reason.as_deref().unwrap_or(""));
    }
    if !report.entries.is_empty() {
        println!(
            "baseline: {} entries checked, {} failed, {} unjudged measurements",
            report.entries.len(),
            report.failures(),
            report.extras.len()
        );
    }
}

fn comparison_json(report: &ComparisonReport) -> Result<String, String> {
    let v = json!({
        "passed": report.passed(),
        "exit_code": gate_exit_code(report),
        "failures": report.failures(),
        "report": report,
    });
    serde_json::to_string_pretty(&v).map(|s| s + "\n").map_err(err)
}

fn print_convergence(tables: &[ConvergenceTable]) {
    for t in tables {
        println!("{} {} {}: order {}", t.testcase, t.integrator, t.operation, t.order);
        for r in &t.rows {
            let e = r.rel_error.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "-".into());
            println!("  n={:<4} h={:<10.4e} rel_error={e:<10} points={} {}", r.divisions, r.h, r.n_points, r.status);
        }
    }
}

/// Convergence plots, one per (test case, operation) with at least two meshes.
fn write_convergence_plots(out: &mut Outputs, tables: &[ConvergenceTable], plots: &mut Vec<String>) -> Result<(), String> {
    let mut groups: IndexMap<(String, Operation), Vec<ConvergenceTable>> = IndexMap::new();
    for t in tables.iter().filter(|t| t.rows.len() >= 2) {
        groups.entry((t.testcase.clone(), t.operation)).or_default().push(t.clone());
    }
    for ((tc, op), group) in groups {
        let name = format!("convergence_{}_{}.svg", slug(&tc), op.name());
        let path = out.layout.plots_dir().join(&name);
        plot_convergence_svg(&group, &format!("{tc} {op}"), &path).map_err(err)?;
        out.record(&path)?;
        plots.push(format!("../plots/{name}"));
    }
    Ok(())
}

fn write_shift_outputs(out: &mut Outputs, series: &[ShiftSeries], plots: &mut Vec<String>) -> Result<(), String> {
    let Some(first) = series.first() else {
        return Ok(());
    };
    let stem = format!("shift_{}_{}", slug(&first.testcase), first.operation.name());
    out.write(out.layout.csv_dir().join(format!("{stem}.csv")), &shift_csv_string(series).map_err(err)?)?;
    let path = out.layout.plots_dir().join(format!("{stem}.svg"));
    plot_shift_svg(series, &format!("{} {} shift", first.testcase, first.operation), &path).map_err(err)?;
    out.record(&path)?;
    plots.push(format!("../plots/{stem}.svg"));
    let summaries: Vec<_> = series
        .iter()
        .map(|s| {
            json!({
                "testcase": s.testcase,
                "integrator": s.integrator,
                "operation": s.operation,
                "steps": s.offsets.len(),
                "summary": s.summary,
            })
        })
        .collect();
    let text = serde_json::to_string_pretty(&summaries).map_err(err)? + "\n";
    out.write(out.layout.summary_dir().join(format!("{stem}.json")), &text)?;
    for s in series {
        println!(
            "shift {} {} {}: max rel_error {}, spread {}, {} failed",
            s.testcase,
            s.integrator,
            s.operation,
            s.summary.max_rel_error.map_or("-".into(), |e| format!("{e:.3e}")),
            s.summary.spread.map_or("-".into(), |e| format!("{e:.3e}")),
            s.summary.failed
        );
    }
    Ok(())
}

/// Adds failed shift steps to the gate's execution errors.
fn add_shift_failures(report: &mut ComparisonReport, series: &[ShiftSeries]) {
    for s in series {
        for (k, m) in s.measurements.iter().enumerate() {
            if let Status::Failed(msg) = &m.status {
                report.execution_errors.push((m.key(), format!("shift step {k}: {msg}")));
            }
        }
    }
}

/// Quadrature-point plots for every 2D case and integrator on the coarsest mesh.
fn write_point_plots(out: &mut Outputs, resolved: &Resolved, plots: &mut Vec<String>) -> Result<(), String> {
    let suite = &resolved.suite;
    let Some(&n) = suite.mesh_plan.first() else {
        return Ok(());
    };
    for tc in suite.testcases.iter().filter(|t| t.dim == 2) {
        let mesh = CartesianMesh::uniform(tc.domain.clone(), n).map_err(err)?;
        for spec in &suite.integrators {
            let integ = spec.build::<f64>().map_err(err)?;
            let desc = integ.descriptor();
            let candidates: Vec<Operation> = suite.operations.iter().copied().filter(|&op| op.dim() == 2 && desc.supports(op)).collect();
            let Some(op) = candidates.iter().copied().find(|o| o.is_volume_measure()).or(candidates.first().copied()) else {
                continue;
            };
            let r = integ.evaluate(op, tc, &mesh, suite.order);
            if r.status != Status::Ok || r.quadrature.is_empty() || r.quadrature.len() > MAX_PLOT_POINTS {
                continue;
            }
            let name = format!("points_{}_{}_{}.svg", slug(&tc.id), slug(&spec.name), op.name());
            let path = out.layout.plots_dir().join(&name);
            plot_points_svg(tc, &mesh, &r.quadrature, &path).map_err(err)?;
            out.record(&path)?;
            plots.push(format!("../plots/{name}"));
        }
    }
    Ok(())
}

fn write_html(
    out: &mut Outputs,
    title: &str,
    ms: &[Measurement],
    comparison: Option<&ComparisonReport>,
    plots: &[String],
) -> Result<(), String> {
    let path = out.layout.summary_dir().join("index.html");
    let inputs = HtmlInputs {
        title,
        measurements: ms,
        comparison,
        plots,
        command: &out.command,
        generated_at: &now(),
        revision: cutquad::REVISION,
    };
    html_summary(&inputs, &path).map_err(err)?;
    out.record(&path)
}

pub fn list(args: &ListArgs, ctx: &Context) -> CmdResult {
    let testcases = resolve::load_testcases(ctx.catalog_dir.as_deref())?;
    let descriptors: Vec<_> = INTEGRATOR_NAMES
        .iter()
        .map(|n| build_integrator::<f64>(n, &IndexMap::new()).map(|i| i.descriptor()))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    if args.json {
        let cases: Vec<_> = testcases
            .iter()
            .map(|t| json!({"id": t.id, "dim": t.dim, "tier": t.tier, "references": t.references}))
            .collect();
        let v = json!({"integrators": descriptors, "testcases": cases});
        println!("{}", serde_json::to_string_pretty(&v).map_err(err)?);
        return Ok(EXIT_PASS);
    }
    println!("integrators:");
    for d in &descriptors {
        let ops: Vec<&str> = d.capabilities.iter().map(|o| o.name()).collect();
        let dims: Vec<String> = d.supported_dims.iter().map(|d| d.to_string()).collect();
        println!(
            "  {:<14} {:<10} dims {:<4} ops {}  [{}]",
            d.name,
            format!("{:?}", d.interface_type).to_lowercase(),
            dims.join(","),
            ops.join(","),
            d.property_string()
        );
    }
    println!("test cases:");
    for t in &testcases {
        let refs: Vec<String> = t.references.iter().map(|(k, v)| format!("{k:?}={v:.12}").to_lowercase()).collect();
        println!("  {:<10} {}D {:<9} {}", t.id, t.dim, format!("{:?}", t.tier).to_lowercase(), refs.join(" "));
    }
    Ok(EXIT_PASS)
}

/// `run` and `convergence`: evaluate the matrix and write every artifact.
pub fn run(args: &RunArgs, ctx: &Context, convergence: bool) -> CmdResult {
    let resolved = resolve::resolve_suite(&args.suite, &ctx.config, ctx.catalog_dir.as_deref(), &DEFAULT_MESH_PLAN)?;
    if convergence && resolved.suite.mesh_plan.len() < 2 {
        return Err("convergence needs at least two meshes".into());
    }
    let baseline = args.baseline.as_deref().map(load_baseline).transpose().map_err(err)?;
    let root = resolve::output_dir(&args.out, &ctx.config);
    if let Some(w) = &resolved.warning {
        eprintln!("warning: {w}");
    }

    let suite = &resolved.suite;
    let (ms, series) = if suite.testcases.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        (
            run_suite(suite, &resolved.opts).map_err(err)?,
            run_shift_studies(suite, &resolved.opts).map_err(err)?,
        )
    };

    let mut out = Outputs::create(&root, &ctx.command_line)?;
    let csv = out.layout.csv_dir().join("measurements.csv");
    write_measurements_csv(&ms, &csv, &root, &out.command).map_err(err)?;
    out.record(&csv)?;
    let mut plots = Vec::new();
    write_shift_outputs(&mut out, &series, &mut plots)?;
    write_point_plots(&mut out, &resolved, &mut plots)?;
    let tables = convergence_tables(&ms, width_lookup(&suite.testcases));
    write_convergence_plots(&mut out, &tables, &mut plots)?;
    if convergence {
        print_convergence(&tables);
        let text = serde_json::to_string_pretty(&tables).map_err(err)? + "\n";
        out.write(out.layout.summary_dir().join("convergence.json"), &text)?;
    }

    let mut report = match &baseline {
        Some(b) => {
            let keys: BTreeSet<MeasurementKey> = ms.iter().map(|m| m.key()).collect();
            compare_to_baseline(&ms, &b.restricted_to(&keys))
        }
        None => ComparisonReport::unchecked(&ms),
    };
    add_shift_failures(&mut report, &series);
    let title = if convergence { "Convergence study" } else { "Benchmark run" };
    write_html(&mut out, title, &ms, baseline.as_ref().map(|_| &report), &plots)?;
    if baseline.is_some() {
        out.write(out.layout.summary_dir().join("comparison.json"), &comparison_json(&report)?)?;
    }
    let manifest = out.finish()?;

    print_counts(&ms);
    print_report(&report);
    println!("artifacts: {}", manifest.display());
    Ok(gate_exit_code(&report))
}

fn parse_point(v: &[f64], what: &str, dim: usize) -> Result<Vec<f64>, String> {
    if v.len() != dim || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("--{what} needs {dim} finite comma-separated coordinates, got {v:?}"));
    }
    Ok(v.to_vec())
}

pub fn shift(args: &ShiftArgs, ctx: &Context) -> CmdResult {
    let config = &ctx.config;
    let tcs = resolve::select_testcases(resolve::load_testcases(ctx.catalog_dir.as_deref())?, std::slice::from_ref(&args.testcase))?;
    let tc = tcs.into_iter().next().expect("one test case selected");
    let op: Operation = args.operation.parse().map_err(err)?;
    let names = if args.integrator.is_empty() { config.integrators.clone() } else { args.integrator.clone() };
    let mut params = config.param_assignments()?;
    params.extend(args.params.iter().cloned());
    let integrators = resolve::integrator_specs(&names, &params, args.seed.or(config.seed))?;
    let (from, to) = match (args.from.is_empty(), args.to.is_empty(), tc.dim) {
        (true, true, 2) => (vec![0.25, 0.5], vec![0.75, 0.5]),
        (false, false, _) => (parse_point(&args.from, "from", tc.dim)?, parse_point(&args.to, "to", tc.dim)?),
        _ => return Err("give both --from and --to (defaults exist for 2D cases only)".into()),
    };
    let center = tc.level_set.effective_center();
    let plan = cutquad::harness::ShiftPlan {
        divisions: args.mesh,
        steps: args.steps,
        start: from.iter().zip(&center).map(|(a, c)| a - c).collect(),
        end: to.iter().zip(&center).map(|(a, c)| a - c).collect(),
    };
    let mut suite = cutquad::harness::BenchmarkSuite::new(vec![tc.clone()], integrators, vec![args.mesh]);
    suite.operations = vec![op];
    suite.order = args.order.or(config.order).unwrap_or(cutquad::harness::DEFAULT_ORDER);
    suite.shift = Some(cutquad::harness::ShiftSpec {
        testcase: tc.id.clone(),
        operation: op,
        plan,
    });
    suite.validate().map_err(err)?;
    let opts = cutquad::harness::RunOptions {
        timing: args.timing || config.timing.unwrap_or(false),
        ..Default::default()
    };
    let root = resolve::output_dir(&args.out, config);

    let series = run_shift_studies(&suite, &opts).map_err(err)?;
    let mut out = Outputs::create(&root, &ctx.command_line)?;
    let mut plots = Vec::new();
    write_shift_outputs(&mut out, &series, &mut plots)?;
    let manifest = out.finish()?;
    let mut report = ComparisonReport::default();
    add_shift_failures(&mut report, &series);
    print_report(&report);
    println!("artifacts: {}", manifest.display());
    Ok(gate_exit_code(&report))
}

pub fn compare(args: &CompareArgs, ctx: &Context) -> CmdResult {
    let baseline = load_baseline(&args.baseline).map_err(err)?;
    let ms = read_csvs(&args.inputs)?;
    let report = compare_to_baseline(&ms, &baseline);
    if let Some(root) = &args.out.out {
        let mut out = Outputs::create(root, &ctx.command_line)?;
        out.write(out.layout.summary_dir().join("comparison.json"), &comparison_json(&report)?)?;
        out.finish()?;
    }
    print_report(&report);
    let code = gate_exit_code(&report);
    println!("{}", if code == EXIT_PASS { "PASS" } else { "FAIL" });
    Ok(code)
}

pub fn baseline(args: &BaselineArgs, ctx: &Context) -> CmdResult {
    let policy = TolerancePolicy {
        absolute: args.absolute,
        multiplicative: args.multiplicative,
    };
    policy.validate().map_err(err)?;
    let ms = if args.inputs.is_empty() {
        let resolved = resolve::resolve_suite(&args.suite, &ctx.config, ctx.catalog_dir.as_deref(), &DEFAULT_MESH_PLAN)?;
        if let Some(w) = &resolved.warning {
            return Err(w.clone());
        }
        run_suite(&resolved.suite, &resolved.opts).map_err(err)?
    } else {
        read_csvs(&args.inputs)?
    };
    let b = record_baseline(&ms, policy);
    write_baseline(&b, &args.output)?;
    let failed = ms.iter().filter(|m| matches!(m.status, Status::Failed(_))).count();
    if failed > 0 {
        eprintln!("warning: {failed} entries recorded with status failed");
    }
    println!("recorded {} entries to {}", b.entries.len(), args.output.display());
    Ok(EXIT_PASS)
}

fn write_baseline(b: &BaselineFile, path: &Path) -> Result<(), String> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
    }
    save_baseline(b, path).map_err(err)
}

pub fn report(args: &ReportArgs, ctx: &Context) -> CmdResult {
    let ms = read_csvs(&args.inputs)?;
    let baseline = args.baseline.as_deref().map(load_baseline).transpose().map_err(err)?;
    let testcases = resolve::load_testcases(ctx.catalog_dir.as_deref())?;
    let root = resolve::output_dir(&args.out, &ctx.config);

    let mut out = Outputs::create(&root, &ctx.command_line)?;
    let mut plots = Vec::new();
    let tables = convergence_tables(&ms, width_lookup(&testcases));
    write_convergence_plots(&mut out, &tables, &mut plots)?;
    let report = baseline.as_ref().map(|b| compare_to_baseline(&ms, b));
    write_html(&mut out, "Benchmark report", &ms, report.as_ref(), &plots)?;
    let manifest = out.finish()?;
    print_counts(&ms);
    println!("artifacts: {}", manifest.display());
    Ok(EXIT_PASS)
}

pub fn ci_init(args: &CiInitArgs, ctx: &Context) -> CmdResult {
    if args.suite.tier.as_deref().is_some_and(|t| t != "all") {
        return Err("ci-init covers every tier; drop --tier".into());
    }
    let resolved = resolve::resolve_suite(&args.suite, &ctx.config, ctx.catalog_dir.as_deref(), &DEFAULT_MESH_PLAN)?;
    let mut runner_tags = IndexMap::new();
    for t in &args.tags {
        let (integ, tag) = t
            .split_once('=')
            .filter(|(a, b)| !a.is_empty() && !b.is_empty())
            .ok_or_else(|| format!("--tag expects integrator=tag, got '{t}'"))?;
        if !resolved.suite.integrators.iter().any(|s| s.name == integ) {
            return Err(format!("--tag names integrator '{integ}', which is not selected"));
        }
        runner_tags.insert(integ.to_string(), tag.to_string());
    }
    let opts = PipelineOptions {
        runner_tags,
        default_tag: args.default_tag.clone(),
        retention: args.retention.clone(),
        ..PipelineOptions::default()
    };
    let (_, yaml) = generate_pipeline(&resolved.suite, &opts).map_err(err)?;
    let yaml_path = args.dir.join(".gitlab-ci.yml");
    let baseline_path = args.dir.join(&opts.baseline);
    for p in [&yaml_path, &baseline_path] {
        if p.exists() && !args.force {
            return Err(format!("{} exists; pass --force to overwrite", p.display()));
        }
    }
    let ms = run_suite(&resolved.suite, &resolved.opts).map_err(err)?;
    let failed = ms.iter().filter(|m| matches!(m.status, Status::Failed(_))).count();
    if failed > 0 {
        print_report(&ComparisonReport::unchecked(&ms));
        return Err(format!("{failed} measurements failed; not recording a baseline"));
    }
    fs::create_dir_all(&args.dir).map_err(|e| format!("cannot create {}: {e}", args.dir.display()))?;
    fs::write(&yaml_path, yaml).map_err(|e| format!("cannot write {}: {e}", yaml_path.display()))?;
    write_baseline(&record_baseline(&ms, TolerancePolicy::default()), &baseline_path)?;
    println!("wrote {} and {}", yaml_path.display(), baseline_path.display());
    Ok(EXIT_PASS)
}

/// Maps a command outcome to the process exit code.
pub fn finish(result: CmdResult) -> i32 {
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}
