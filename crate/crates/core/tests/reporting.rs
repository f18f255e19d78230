use std::fs;
use std::path::Path;

use cutquad::geometry::{catalog, load_testcase, save_testcase, CartesianMesh, TestCase};
use cutquad::harness::{
    compare_to_baseline, convergence_tables, record_baseline, run_suite, BenchmarkSuite, RunOptions, TolerancePolicy,
};
use cutquad::integrators::{Integrator, IntegratorSpec, LinearReconstruction, Operation};
use cutquad::reporting::{
    html_summary, plot_convergence_svg, plot_points_svg, ArtifactKind, ArtifactLayout, ArtifactManifest, HtmlInputs,
    INTERFACE_SAMPLES, MANIFEST_FILE,
};
use cutquad::Error;

fn circle() -> TestCase<f64> {
    catalog::<f64>().into_iter().find(|t| t.id == "circle").unwrap()
}

fn parse_xml(text: &str) -> roxmltree::Document<'_> {
    roxmltree::Document::parse_with_options(
        text,
        roxmltree::ParsingOptions {
            allow_dtd: true,
            ..Default::default()
        },
    )
    .unwrap()
}

fn with_class<'a, 'i>(doc: &'a roxmltree::Document<'i>, tag: &str, class: &str) -> Vec<roxmltree::Node<'a, 'i>> {
    doc.descendants()
        .filter(|n| n.has_tag_name(tag) && n.attribute("class").is_some_and(|c| c.split(' ').any(|c| c == class)))
        .collect()
}

#[test]
fn points_plot_has_one_cross_per_point_and_the_grid() {
    let tc = circle();
    let mesh = CartesianMesh::uniform(tc.domain.clone(), 4).unwrap();
    let r = LinearReconstruction::default().evaluate(Operation::Area2d, &tc, &mesh, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.svg");
    plot_points_svg(&tc, &mesh, &r.quadrature, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let doc = parse_xml(&text);

    let crosses = with_class(&doc, "use", "cross");
    assert_eq!(crosses.len(), r.quadrature.len());
    // y is flipped inside the unit viewBox: svg y = 1 - y
    let p = r.quadrature.point(0);
    let y: f64 = crosses[0].attribute("y").unwrap().parse().unwrap();
    assert!((y - (1.0 - p[1])).abs() < 1e-15);

    let grid = with_class(&doc, "g", "grid");
    assert_eq!(grid[0].children().filter(|n| n.has_tag_name("line")).count(), 2 * (4 + 1));
    let outline = with_class(&doc, "polygon", "interface");
    let vertices: Vec<(f64, f64)> = outline[0]
        .attribute("points")
        .unwrap()
        .split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(vertices.len(), INTERFACE_SAMPLES);
    assert!(vertices.iter().all(|(x, y)| ((x - 0.5).hypot(y - 0.5) - 0.2).abs() < 1e-12));
}

#[test]
fn convergence_plot_marks_every_mesh() {
    let mut suite = BenchmarkSuite::new(
        vec![circle()],
        vec![IntegratorSpec::new("linear"), IntegratorSpec::new("quadtree")],
        vec![2, 4, 8],
    );
    suite.operations = vec![Operation::Area2d];
    let ms = run_suite(&suite, &RunOptions::default()).unwrap();
    let tables = convergence_tables(&ms, |_| 1.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.svg");
    plot_convergence_svg(&tables, "circle <area>", &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let doc = parse_xml(&text);
    let series = with_class(&doc, "g", "series");
    let names: Vec<&str> = series.iter().map(|g| g.attribute("data-integrator").unwrap()).collect();
    assert_eq!(names, ["linear", "quadtree"]);
    for g in &series {
        let markers = g.descendants().filter(|n| n.attribute("class") == Some("marker")).count();
        assert_eq!(markers, 3);
        let labels: Vec<&str> = g
            .descendants()
            .filter(|n| n.attribute("class") == Some("npts"))
            .map(|n| n.text().unwrap())
            .collect();
        let name = g.attribute("data-integrator").unwrap();
        let expected: Vec<String> = ms
            .iter()
            .filter(|m| m.integrator == name)
            .map(|m| m.n_points.to_string())
            .collect();
        assert_eq!(labels, expected);
    }
    assert!(text.contains("circle &lt;area&gt;"));
}

#[test]
fn html_summary_counts_and_badges() {
    let mut suite = BenchmarkSuite::new(vec![circle()], vec![IntegratorSpec::new("linear")], vec![2, 4]);
    suite.operations = vec![Operation::Area2d, Operation::Volume3d];
    let ms = run_suite(&suite, &RunOptions::default()).unwrap();
    let mut baseline = record_baseline(&ms, TolerancePolicy::default());
    let first_ok = baseline.entries.iter_mut().find(|e| e.status == "ok").unwrap();
    first_ok.expected_rel_error = Some(1e-15);
    let report = compare_to_baseline(&ms, &baseline);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary/index.html");
    let inputs = HtmlInputs {
        title: "t",
        measurements: &ms,
        comparison: Some(&report),
        plots: &["../plots/a.svg".to_string()],
        command: "cutquad run --x 'a&b'",
        generated_at: "2026-01-01T00:00:00Z",
        revision: "abc",
    };
    html_summary(&inputs, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let doc = parse_xml(&text);
    let span = |id: &str| doc.descendants().find(|n| n.attribute("id") == Some(id)).unwrap().text().unwrap().to_string();
    assert_eq!(span("n-ok"), "2");
    assert_eq!(span("n-unsupported"), "2");
    assert_eq!(span("n-failed"), "0");
    assert_eq!(with_class(&doc, "tr", "ok").len(), 2);
    assert_eq!(with_class(&doc, "tr", "unsupported").len(), 2);
    assert_eq!(with_class(&doc, "span", "fail").len(), 1);
    assert_eq!(with_class(&doc, "span", "pass").len(), 3);
    assert_eq!(text.lines().filter(|l| l.contains("2026-01-01T00:00:00Z")).count(), 1);
    assert!(text.contains("a&amp;b"));
}

#[test]
fn manifest_records_relative_paths_and_merges() {
    let dir = tempfile::tempdir().unwrap();
    let layout = ArtifactLayout::new(dir.path());
    layout.create().unwrap();
    let csv = layout.csv_dir().join("m.csv");
    fs::write(&csv, "a\n").unwrap();
    let mut m = ArtifactManifest::new(dir.path());
    m.record(&csv, "first").unwrap();
    m.write().unwrap();

    let svg = layout.plots_dir().join("p.svg");
    fs::write(&svg, "<svg/>").unwrap();
    let mut m2 = ArtifactManifest::new(dir.path());
    m2.record(&svg, "second").unwrap();
    m2.merge_existing();
    m2.write().unwrap();

    let loaded = ArtifactManifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
    let entries: Vec<(&str, ArtifactKind, &str)> =
        loaded.entries.iter().map(|e| (e.path.as_str(), e.kind, e.command.as_str())).collect();
    assert_eq!(
        entries,
        [("csv/m.csv", ArtifactKind::Csv, "first"), ("plots/p.svg", ArtifactKind::Svg, "second")]
    );
    assert_eq!(loaded.entries[1].bytes, 6);

    let empty = layout.summary_dir().join("e.html");
    fs::write(&empty, "").unwrap();
    assert!(m2.record(&empty, "x").is_err());
    let outside = tempfile::NamedTempFile::new().unwrap();
    assert!(m2.record(outside.path(), "x").is_err());
}

#[test]
fn testcase_json_round_trips_and_reports_positions() {
    let dir = tempfile::tempdir().unwrap();
    for tc in catalog::<f64>() {
        let p = dir.path().join(format!("{}.json", tc.id));
        save_testcase(&tc, &p).unwrap();
        assert_eq!(load_testcase::<f64>(&p).unwrap(), tc);
    }
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"id\": \"x\",\n  \"dim\": 2,\n  nope\n}\n").unwrap();
    match load_testcase::<f64>(&bad).unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 4),
        e => panic!("unexpected {e}"),
    }
    assert!(load_testcase::<f64>(Path::new("/nonexistent/case.json")).is_err());
}

#[test]
fn quadrature_csv_lists_points_weights_and_cells() {
    let tc = circle();
    let mesh = CartesianMesh::uniform(tc.domain.clone(), 2).unwrap();
    let r = LinearReconstruction::default().evaluate(Operation::Area2d, &tc, &mesh, 2);
    let mut buf = Vec::new();
    r.quadrature.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,weight,cell"));
    let mut total = 0.0;
    let mut n = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 4);
        total += f[2].parse::<f64>().unwrap();
        let cell: usize = f[3].parse().unwrap();
        assert!(cell < 4);
        n += 1;
    }
    assert_eq!(n, r.quadrature.len());
    assert!((total - r.value).abs() < 1e-15);
}
