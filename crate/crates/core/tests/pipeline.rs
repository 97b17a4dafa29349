use std::f64::consts::TAU;

use sobolev_quad::analysis::{alpha_transfer_check, cap_discrepancy, qnorm_energy, wce, WceMethod};
use sobolev_quad::pointsets::{generate, read_csv, read_json, write_csv, write_json, Family};
use sobolev_quad::quadrature::{build_exact_rule, exactness_residual};
use sobolev_quad::{ManifoldSpec, PointSet64};

fn manifolds() -> [ManifoldSpec; 4] {
    [
        ManifoldSpec::torus(1).unwrap(),
        ManifoldSpec::torus(2).unwrap(),
        ManifoldSpec::torus(3).unwrap(),
        ManifoldSpec::sphere(),
    ]
}

#[test]
fn files_round_trip_bit_for_bit() {
    for m in manifolds() {
        let ps: PointSet64 = generate(&m, &Family::Jittered { n: 64 }, 11).unwrap();
        let mut json = Vec::new();
        write_json(&ps, &mut json).unwrap();
        let back: PointSet64 = read_json(json.as_slice()).unwrap();
        assert_eq!(back.nodes, ps.nodes);
        assert_eq!(back.weights, ps.weights);
        let mut csv = Vec::new();
        write_csv(&ps, &["made by a test".to_string()], &mut csv).unwrap();
        let back: PointSet64 = read_csv(&m, csv.as_slice()).unwrap();
        assert_eq!(back.nodes, ps.nodes);
        assert_eq!(back.weights, ps.weights);
    }
}

#[test]
fn rules_beat_random_sets_of_the_same_size() {
    let t1 = ManifoldSpec::torus(1).unwrap();
    let rule: PointSet64 = build_exact_rule(&t1, TAU * 10.5, 256, 1e-12, 1).unwrap();
    assert!(exactness_residual(&rule, TAU * 10.5).unwrap() <= 1e-12);
    let random: PointSet64 = generate(&t1, &Family::Random { n: rule.len() }, 1).unwrap();
    let a = wce(&rule, 1.5, WceMethod::Kernel, 1e-12).unwrap().value;
    let b = wce(&random, 1.5, WceMethod::Kernel, 1e-12).unwrap().value;
    assert!(a < b / 5.0, "{a} {b}");
}

#[test]
fn analyses_agree_on_one_sphere_rule() {
    let s2 = ManifoldSpec::sphere();
    let rule: PointSet64 = build_exact_rule(&s2, 6.0, 256, 1e-10, 0).unwrap();
    let k = wce(&rule, 2.0, WceMethod::Kernel, 1e-12).unwrap();
    let h = wce(&rule, 2.0, WceMethod::Heat, 1e-12).unwrap();
    assert!((k.value_squared - h.value_squared).abs() <= k.tail_bound + h.tail_bound + 1e-9);
    let q = qnorm_energy(&rule, 2.0, 2.0, 16384, 1e-12).unwrap();
    assert!((q.value - k.value).abs() < 0.05 * k.value, "{q:?} {k:?}");
    let t = alpha_transfer_check(&rule, 2.0, 1.5, 1e-12).unwrap();
    assert!(t.monotone && t.wce_beta >= t.wce_alpha);
    let d = cap_discrepancy(&rule, 64, &[0.5, 1.0, 2.0]).unwrap();
    assert!(d.sup.iter().all(|&s| (0.0..1.0).contains(&s)));
}
