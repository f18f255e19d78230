use cutquad::geometry::{catalog, ellipse_perimeter, CartesianMesh, TestCase};
use cutquad::integrators::{monte_carlo_measure, standard_integrators, Operation, Status};

fn case(id: &str) -> TestCase<f64> {
    catalog::<f64>().into_iter().find(|t| t.id == id).unwrap()
}

#[test]
fn every_ok_result_respects_its_own_bound() {
    for id in ["circle", "ellipse", "sphere"] {
        let tc = case(id);
        for n in [4, 8] {
            let mesh = CartesianMesh::uniform(tc.domain.clone(), n).unwrap();
            for integ in standard_integrators::<f64>() {
                for op in Operation::ALL {
                    let r = integ.evaluate(op, &tc, &mesh, 5);
                    if r.status != Status::Ok {
                        continue;
                    }
                    let Some(bound) = integ.error_bound(op, &tc, &mesh, 5) else { continue };
                    let reference = tc.reference(op.reference_kind()).unwrap();
                    let err = (r.value - reference).abs();
                    assert!(err <= bound, "{id} n={n} {} {op}: |err| {err:e} > bound {bound:e}", integ.descriptor().name);
                }
            }
        }
    }
}

#[test]
fn ellipse_perimeter_reference_matches_independent_quadrature() {
    // Oracle: composite Simpson on the parametric speed, far finer than needed.
    let (a, b) = (0.3f64, 0.15f64);
    let n = 200_000;
    let h = std::f64::consts::TAU / n as f64;
    let speed = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
    let mut s = speed(0.0) + speed(std::f64::consts::TAU);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * speed(k as f64 * h);
    }
    let oracle = s * h / 3.0;
    assert!((ellipse_perimeter(a, b) - oracle).abs() < 1e-12);
    assert_eq!(case("ellipse").reference(cutquad::geometry::MeasureKind::Perimeter), Some(ellipse_perimeter(a, b)));
}

#[test]
fn monte_carlo_seed_1_example() {
    let tc = case("circle");
    let est = monte_carlo_measure(&tc.level_set, &tc.domain, 100_000, 1).unwrap();
    let again = monte_carlo_measure(&tc.level_set, &tc.domain, 100_000, 1).unwrap();
    assert_eq!(est.value, again.value);
    let exact = std::f64::consts::PI * 0.04;
    assert!((est.value - exact).abs() <= 4.0 * est.sigma, "{} vs {exact} (sigma {})", est.value, est.sigma);
    assert_eq!(est.value, est.hits as f64 / 100_000.0);
    assert_eq!(est.quadrature.len(), est.hits);
}

#[test]
fn parametric_methods_need_a_loop() {
    let mut tc = case("circle");
    tc.loop_ = None;
    let mesh = CartesianMesh::uniform(tc.domain.clone(), 4).unwrap();
    let flux = standard_integrators::<f64>().into_iter().find(|i| i.descriptor().name == "flux").unwrap();
    let r = flux.evaluate(Operation::Area2d, &tc, &mesh, 5);
    assert!(matches!(r.status, Status::Failed(_) | Status::Unsupported), "{:?}", r.status);
    assert!(r.value.is_nan());
}
