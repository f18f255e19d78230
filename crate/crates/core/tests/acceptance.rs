//! End-to-end acceptance checks. Every criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use cutquad::ci::{gate_exit_code, generate_pipeline, PipelineOptions, PipelineSpec, EXIT_ERROR, EXIT_PASS, EXIT_TOLERANCE};
use cutquad::geometry::{catalog, make_circle_testcase, make_sphere_testcase, mesh_cells, Aabb, CartesianMesh, HalfSpace, TestCase};
use cutquad::harness::{
    compare_to_baseline, estimate_order, record_baseline, run_matrix, run_shift_studies, run_suite, BenchmarkSuite,
    OrderEstimate, RunOptions, ShiftSpec, TolerancePolicy,
};
use cutquad::integrators::{
    flux_area_parametric, green_area_parametric, moment_fit_cell, monte_carlo_measure, monte_carlo_sigma,
    standard_integrators, Integrator, IntegratorDescriptor, IntegratorSpec, InterfaceType, MethodResult, MomentFitting,
    Operation, Quadtree, Status, INTEGRATOR_NAMES, MOMENT_RESIDUAL_TOL,
};
use cutquad::quadrature::{classify_cell, gauss_legendre, CellClass};
use cutquad::reporting::{measurements_csv_string, plot_shift_svg, write_measurements_csv};
use cutquad::IntegrationResultF64;
use indexmap::IndexMap;

const PLAN: [usize; 5] = [2, 4, 8, 16, 32];
const ORDER: usize = 5;
const ORACLE_SAMPLES: usize = 1_000_000;
const ORACLE_SEED: u64 = 7;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn paper_circle() -> TestCase<f64> {
    make_circle_testcase([0.5, 0.5], 0.2, Aabb::unit(2), None).unwrap()
}

fn paper_sphere() -> TestCase<f64> {
    make_sphere_testcase([0.5, 0.5, 0.5], 0.3, Aabb::unit(3)).unwrap()
}

fn specs(names: &[&str]) -> Vec<IntegratorSpec> {
    names.iter().map(|n| IntegratorSpec::new(*n)).collect()
}

fn rel_errors(ms: &[cutquad::harness::Measurement], integ: &str, op: Operation) -> Vec<f64> {
    ms.iter()
        .filter(|m| m.integrator == integ && m.operation == op)
        .map(|m| m.rel_error.unwrap_or(f64::INFINITY))
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut suite = BenchmarkSuite::new(vec![paper_circle()], specs(&["flux", "linear", "quadtree"]), PLAN.to_vec());
    suite.operations = vec![Operation::Area2d];
    let ms = run_suite(&suite, &RunOptions::default()).unwrap();
    let elapsed = start.elapsed();

    let flux_max = rel_errors(&ms, "flux", Operation::Area2d).into_iter().fold(0.0, f64::max);
    let lin = rel_errors(&ms, "linear", Operation::Area2d);
    let h: Vec<f64> = PLAN.iter().map(|&n| 1.0 / n as f64).collect();
    let order = estimate_order(&h, &lin);
    let qt_32 = *rel_errors(&ms, "quadtree", Operation::Area2d).last().unwrap();
    let r = 0.2;
    let bound = 2.0 * (2.0 * PI * r) * (h[4] / 64.0) / (PI * r * r);

    let order_ok = matches!(order, OrderEstimate::Order(p) if (1.8..=2.2).contains(&p));
    check(
        flux_max <= 1e-12 && order_ok && qt_32 <= bound && elapsed <= Duration::from_secs(60),
        format!(
            "flux max rel_error {flux_max:.2e} (<= 1e-12); linear order {order} (in [1.8, 2.2]); \
             quadtree rel_error at 32^2 {qt_32:.3e} (<= {bound:.3e}); {:.2}s (<= 60s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let circle = paper_circle();
    let applicable: Vec<&str> = INTEGRATOR_NAMES
        .iter()
        .copied()
        .filter(|n| {
            let i = cutquad::integrators::build_integrator::<f64>(n, &IndexMap::new()).unwrap();
            i.descriptor().supports(Operation::Area2d)
        })
        .collect();
    let mut suite = BenchmarkSuite::new(vec![circle], specs(&applicable), vec![8]);
    suite.operations = vec![Operation::Area2d];
    suite.shift = Some(ShiftSpec::circle_sweep());
    let series = run_shift_studies(&suite, &RunOptions::default()).unwrap();
    let elapsed = start.elapsed();

    let failed: usize = series.iter().map(|s| s.summary.failed + s.summary.unsupported).sum();
    let steps_ok = series.iter().all(|s| s.measurements.len() == 1000);
    let flux = series.iter().find(|s| s.integrator == "flux").unwrap();
    let spread = flux.summary.spread.unwrap_or(f64::INFINITY);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shift.svg");
    plot_shift_svg(&series, "circle shift", &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let vertex_counts: Vec<usize> = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline") && n.attribute("data-integrator").is_some())
        .map(|n| n.attribute("points").unwrap().split_whitespace().count())
        .collect();
    let plot_ok = vertex_counts.len() == series.len() && vertex_counts.iter().all(|&c| c == 1000);

    check(
        failed == 0 && steps_ok && spread <= 1e-12 && plot_ok && elapsed <= Duration::from_secs(600),
        format!(
            "{} integrators x 1000 steps, {failed} failed/unsupported; flux spread {spread:.2e} (<= 1e-12); \
             plot series vertices {vertex_counts:?}; {:.2}s (<= 600s)",
            series.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3() -> Outcome {
    let sphere = paper_sphere();
    let mesh = CartesianMesh::uniform(sphere.domain.clone(), 8).unwrap();
    let mut params = IndexMap::new();
    params.insert("depth_3d".to_string(), "4".to_string());
    let octree = Quadtree::from_params(&params).unwrap();
    let res: IntegrationResultF64 = octree.evaluate(Operation::Volume3d, &sphere, &mesh, ORDER);
    let r = 0.3;
    let exact = 4.0 / 3.0 * PI * r * r * r;
    let rel = (res.value - exact).abs() / exact;
    let bound = 2.0 * (4.0 * PI * r * r) * ((1.0 / 8.0) / 16.0) / exact;

    let mc = monte_carlo_measure(&sphere.level_set, &sphere.domain, ORACLE_SAMPLES, ORACLE_SEED).unwrap();
    let sigma = monte_carlo_sigma(exact / sphere.domain.measure(), sphere.domain.measure(), ORACLE_SAMPLES);
    let dev = (mc.value - exact).abs();
    check(
        res.status == Status::Ok && rel <= bound && dev <= 4.0 * sigma,
        format!(
            "octree depth 4 on 8^3 rel_error {rel:.3e} (<= {bound:.3e}); MC 1e6 |dev| {dev:.2e} = {:.2} sigma (<= 4)",
            dev / sigma
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=16 {
        let (x, w) = gauss_legendre::<f64>(n).unwrap();
        for k in 0..2 * n {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let q: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(k as i32)).sum();
            worst = worst.max((q - exact).abs());
        }
    }
    check(worst <= 1e-13, format!("max monomial error over n = 1..16, degree <= 2n-1: {worst:.2e} (<= 1e-13)"))
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    let mut sign_ok = true;
    let mut worst_ulps = 0.0f64;
    let mut n = 0;
    for tc in catalog::<f64>() {
        let Some(lp) = &tc.loop_ else { continue };
        n += 1;
        let (xdy, _) = flux_area_parametric(lp, 20).unwrap();
        let green = green_area_parametric(lp, 20).unwrap();
        worst = worst.max((xdy - green).abs());
        // The reversed loop is re-parameterized and summed in the opposite
        // order, so the magnitudes agree to round-off rather than bitwise.
        let (rev, _) = flux_area_parametric(&lp.reversed(), 20).unwrap();
        let ulps = (rev + xdy).abs() / (xdy.abs() * f64::EPSILON);
        worst_ulps = worst_ulps.max(ulps);
        sign_ok &= xdy > 0.0 && rev < 0.0 && ulps <= 4.0;
    }
    check(
        n > 0 && worst <= 1e-12 && sign_ok,
        format!(
            "{n} loops: max |oint x dy - green| {worst:.2e} (<= 1e-12); reversed loop flips sign, \
             magnitude within {worst_ulps:.1} ulp (<= 4)"
        ),
    )
}

/// `int_0^1 x^a ((c - x) / 2)^(b+1) / (b+1) dx` expanded binomially: the
/// moment of `x^a y^b` over `{0 <= x <= 1, 0 <= y <= (c - x) / 2}`.
fn half_plane_moment(a: usize, b: usize, c: f64) -> f64 {
    let m = b + 1;
    let mut binom = 1.0;
    let mut s = 0.0;
    for k in 0..=m {
        s += binom * c.powi((m - k) as i32) * (-1.0f64).powi(k as i32) / (a + k + 1) as f64;
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    s / 2f64.powi(m as i32) / m as f64
}

fn criterion_6() -> Outcome {
    // x + 2y <= 1.3 crosses the left and right edges of the unit square.
    let c = 1.3;
    let ls = HalfSpace::<f64> {
        normal: vec![1.0, 2.0],
        offset: c,
    };
    let fit = MomentFitting {
        degree: 2,
        samples: 3,
        subdivisions: 0,
    };
    let cell = Aabb::unit(2);
    let (q, _) = moment_fit_cell(&ls, &cell, &fit, 3, None).unwrap();
    let mut half_worst = 0.0f64;
    for a in 0..=2 {
        for b in 0..=2 - a {
            let got = q.integrate(|p: &[f64]| p[0].powi(a as i32) * p[1].powi(b as i32));
            half_worst = half_worst.max((got - half_plane_moment(a, b, c)).abs());
        }
    }

    let circle = paper_circle();
    let fit = MomentFitting::default();
    let mut cut = 0;
    let mut worst_ratio = 0.0f64;
    for n in PLAN {
        let mesh = CartesianMesh::uniform(circle.domain.clone(), n).unwrap();
        for cell in mesh_cells(&mesh) {
            if classify_cell(&circle.level_set, &cell.bounds, fit.samples) != CellClass::Cut {
                continue;
            }
            cut += 1;
            let (_, residual) = moment_fit_cell(&circle.level_set, &cell.bounds, &fit, ORDER, Some(cell.flat)).unwrap();
            worst_ratio = worst_ratio.max(residual / cell.bounds.measure());
        }
    }
    check(
        half_worst <= 1e-10 && cut > 0 && worst_ratio <= MOMENT_RESIDUAL_TOL,
        format!(
            "half-plane degree 2 max moment error {half_worst:.2e} (<= 1e-10); \
             {cut} circle cut cells, max residual / cell measure {worst_ratio:.2e} (<= 1e-10)"
        ),
    )
}

fn criterion_7() -> Outcome {
    let cases = catalog::<f64>();
    let suite = BenchmarkSuite::new(cases.clone(), specs(&INTEGRATOR_NAMES), PLAN.to_vec());
    let ms = run_suite(&suite, &RunOptions::default()).unwrap();
    let integrators: Vec<Box<dyn Integrator<f64>>> = standard_integrators();
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for tc in &cases {
        let mc = monte_carlo_measure(&tc.level_set, &tc.domain, ORACLE_SAMPLES, ORACLE_SEED).unwrap();
        let p = mc.hits as f64 / ORACLE_SAMPLES as f64;
        let sigma = monte_carlo_sigma(p, tc.domain.measure(), ORACLE_SAMPLES);
        for m in ms.iter().filter(|m| m.testcase == tc.id && m.is_ok()) {
            if !matches!(m.operation, Operation::Area2d | Operation::Volume3d | Operation::AreaFlux2d) {
                continue;
            }
            let integ = integrators.iter().find(|i| i.descriptor().name == m.integrator).unwrap();
            let mesh = CartesianMesh::uniform(tc.domain.clone(), m.divisions).unwrap();
            let Some(method) = integ.error_bound(m.operation, tc, &mesh, ORDER) else {
                violations.push(format!("{} has no error bound", m.key()));
                continue;
            };
            let combined = method + 4.0 * sigma;
            let diff = (m.value.unwrap() - mc.value).abs();
            worst = worst.max(diff / combined);
            checked += 1;
            if diff > 5.0 * combined {
                violations.push(format!("{}: |diff| {diff:.2e} > 5 x {combined:.2e}", m.key()));
            }
        }
    }
    check(
        checked > 0 && violations.is_empty(),
        format!(
            "{checked} ok area/volume measurements; worst |diff| / combined bound {worst:.2} (<= 5){}",
            if violations.is_empty() { String::new() } else { format!("; violations: {violations:?}") }
        ),
    )
}

/// Declares area2d and panics on every call.
struct Crashing;

impl Integrator<f64> for Crashing {
    fn descriptor(&self) -> IntegratorDescriptor {
        IntegratorDescriptor {
            name: "linear".into(),
            interface_type: InterfaceType::Implicit,
            supported_dims: vec![2],
            capabilities: vec![Operation::Area2d],
            parameters: IndexMap::new(),
        }
    }

    fn compute_area_2d(&self, _tc: &TestCase<f64>, _mesh: &CartesianMesh<f64>, _order: usize) -> MethodResult<f64> {
        panic!("injected crash")
    }
}

fn criterion_8() -> Outcome {
    let cases = vec![paper_circle()];
    let mut suite = BenchmarkSuite::new(cases.clone(), specs(&["linear", "flux", "monte-carlo"]), vec![4, 8]);
    suite.operations = vec![Operation::Area2d, Operation::CurveLength];
    let ms = run_suite(&suite, &RunOptions::default()).unwrap();
    let baseline = record_baseline(&ms, TolerancePolicy::default());
    let clean = gate_exit_code(&compare_to_baseline(&ms, &baseline));

    let mut perturbed = baseline.clone();
    let e = perturbed
        .entries
        .iter_mut()
        .find(|e| e.integrator == "linear" && e.status == "ok")
        .unwrap();
    e.expected_rel_error = Some(e.expected_rel_error.unwrap() * 1e-6);
    let tolerance = gate_exit_code(&compare_to_baseline(&ms, &perturbed));

    let crashing: Vec<Box<dyn Integrator<f64>>> = vec![Box::new(Crashing)];
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let crashed = run_matrix(&cases, &crashing, &[Operation::Area2d], &[4, 8], ORDER, &RunOptions::default());
    std::panic::set_hook(hook);
    let crash_failed = crashed.iter().all(|m| matches!(&m.status, Status::Failed(msg) if msg.contains("panicked")));
    let crash = gate_exit_code(&compare_to_baseline(&crashed, &baseline));

    let dir = tempfile::tempdir().unwrap();
    let again = run_suite(&suite, &RunOptions::default()).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_measurements_csv(&ms, &a, dir.path(), "first").unwrap();
    write_measurements_csv(&again, &b, dir.path(), "second").unwrap();
    let identical = fs::read(&a).unwrap() == fs::read(&b).unwrap()
        && measurements_csv_string(&ms).unwrap() == measurements_csv_string(&again).unwrap();

    check(
        clean == EXIT_PASS && tolerance == EXIT_TOLERANCE && crash == EXIT_ERROR && crash_failed && identical,
        format!(
            "recorded baseline -> exit {clean} (0); perturbed entry -> exit {tolerance} (1); \
             injected crash -> exit {crash} (2); CSVs byte-identical: {identical}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let suite = BenchmarkSuite::new(catalog(), specs(&INTEGRATOR_NAMES), PLAN.to_vec());
    let mut tags = IndexMap::new();
    tags.insert("flux".to_string(), "gpu-runner".to_string());
    tags.insert("monte-carlo".to_string(), "big memory".to_string());
    let opts = PipelineOptions {
        runner_tags: tags.clone(),
        ..PipelineOptions::default()
    };
    let (_, yaml) = generate_pipeline(&suite, &opts).unwrap();
    let v: serde_yaml::Value = serde_yaml::from_str(&yaml).unwrap();
    let stages: Vec<&str> = v["stages"].as_sequence().unwrap().iter().filter_map(|s| s.as_str()).collect();
    let stages_ok = stages == ["build", "quick", "extensive", "report"];
    let jobs_ok = INTEGRATOR_NAMES.iter().all(|n| {
        v[format!("quick-{n}").as_str()]["stage"].as_str() == Some("quick")
            && v[format!("extensive-{n}").as_str()]["stage"].as_str() == Some("extensive")
    });
    let job_count = v.as_mapping().unwrap().len() - 1;
    let expiry_ok = v
        .as_mapping()
        .unwrap()
        .iter()
        .filter(|(k, _)| k.as_str() != Some("stages"))
        .all(|(_, job)| job["artifacts"]["expire_in"].as_str() == Some("2 days"));
    let tags_ok = tags.iter().all(|(integ, tag)| {
        ["quick", "extensive"].iter().all(|stage| {
            v[format!("{stage}-{integ}").as_str()]["tags"]
                .as_sequence()
                .is_some_and(|t| t.iter().any(|x| x.as_str() == Some(tag.as_str())))
        })
    });
    let literal_tags = yaml.contains("- gpu-runner") && yaml.contains("- big memory");
    let valid = PipelineSpec::from_yaml(&yaml).and_then(|p| p.validate()).is_ok();
    check(
        stages_ok && jobs_ok && job_count == 2 + 2 * INTEGRATOR_NAMES.len() && expiry_ok && tags_ok && literal_tags && valid,
        format!(
            "stages {stages:?}; {job_count} jobs; per-integrator quick/extensive: {jobs_ok}; expire_in 2 days: {expiry_ok}; \
             runner tags verbatim: {}; structurally valid: {valid}",
            tags_ok && literal_tags
        ),
    )
}

fn criterion_10() -> Outcome {
    let cases = catalog::<f64>();
    let integrators: Vec<Box<dyn Integrator<f64>>> = standard_integrators();
    let ms = run_matrix(&cases, &integrators, &Operation::ALL, &[2, 4], ORDER, &RunOptions::default());
    let mut mismatches = Vec::new();
    for m in &ms {
        let tc = cases.iter().find(|t| t.id == m.testcase).unwrap();
        let desc = integrators.iter().find(|i| i.descriptor().name == m.integrator).unwrap().descriptor();
        let declared = desc.supports(m.operation) && m.operation.dim() == tc.dim;
        let expected = if declared { Status::Ok } else { Status::Unsupported };
        if m.status != expected {
            mismatches.push(format!("{}: {:?} (declared {declared})", m.key(), m.status));
        }
    }
    let expected_len = cases.len() * integrators.len() * Operation::ALL.len() * 2;
    check(
        ms.len() == expected_len && mismatches.is_empty(),
        format!(
            "{} of {expected_len} measurements terminated; {} ok; status vs declared capabilities mismatches: {mismatches:?}",
            ms.len(),
            ms.iter().filter(|m| m.is_ok()).count()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

// Runs without the libtest harness so the verdict lines are never captured.
fn main() {
    let criteria: [Criterion; 10] = [
        ("circle setup", criterion_1),
        ("shift sweep", criterion_2),
        ("sphere octree", criterion_3),
        ("gauss exactness", criterion_4),
        ("flux identity", criterion_5),
        ("moment fitting", criterion_6),
        ("oracle equivalence", criterion_7),
        ("regression gate", criterion_8),
        ("ci emission", criterion_9),
        ("contract totality", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!("criterion {:>2} {}: {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
