use super::*;
use crate::kernels::BesselKernel;
use crate::manifold::{distance_unchecked, ManifoldKind};
use proptest::prelude::*;

fn t(d: usize) -> ManifoldSpec {
    ManifoldSpec::torus(d).unwrap()
}

/// Generic unit vector `(0.3, 0.5, √0.66)`.
const BASE: [f64; 3] = [0.3, 0.5, 0.812_403_840_463_596];

#[test]
fn lattice_on_the_circle() {
    let ps: PointSet<f64> = generate(&t(1), &Family::Lattice { n: 4 }, 0).unwrap();
    let xs: Vec<f64> = ps.nodes.iter().map(|p| p.c[0]).collect();
    assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75]);
    assert!(ps.weights.iter().all(|w| *w == 0.25));
    let ps: PointSet<f64> = generate(&t(3), &Family::Lattice { n: 3 }, 0).unwrap();
    assert_eq!(ps.len(), 27);
    assert_eq!(ps.nodes[5].c, [0.0, 1.0 / 3.0, 2.0 / 3.0]);
}

#[test]
fn lps_orbit_of_length_one_has_seven_distinct_points() {
    let s = ManifoldSpec::sphere();
    let ps: PointSet<f64> = generate(&s, &Family::LpsOrbit { base: BASE, word_length: 1 }, 0).unwrap();
    assert_eq!(ps.len(), 7);
    assert_eq!(ps.nodes[0].c, BASE);
    for n in 1..=3 {
        let ps: PointSet<f64> = generate(&s, &Family::LpsOrbit { base: BASE, word_length: n }, 0).unwrap();
        assert_eq!(ps.len(), lps_orbit_size(n));
        for i in 0..ps.len() {
            for j in 0..i {
                assert!(distance_unchecked(&s, &ps.nodes[i], &ps.nodes[j]) > 1e-6, "n={n}: {i} {j}");
            }
        }
    }
}

#[test]
fn lps_orbit_is_reproducible_bit_for_bit() {
    let s = ManifoldSpec::sphere();
    let f = Family::LpsOrbit { base: BASE, word_length: 5 };
    let a: PointSet<f64> = generate(&s, &f, 0).unwrap();
    let b: PointSet<f64> = generate(&s, &f, 99).unwrap();
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.len(), 4687);
}

#[test]
fn family_preconditions() {
    let s = ManifoldSpec::sphere();
    assert!(generate::<f64>(&s, &Family::Lattice { n: 3 }, 0).is_err());
    assert!(generate::<f64>(&t(2), &Family::Fibonacci { n: 3 }, 0).is_err());
    assert!(generate::<f64>(&t(2), &Family::LpsOrbit { base: BASE, word_length: 1 }, 0).is_err());
    let fixed = Family::LpsOrbit { base: [0.0, 1.0, 0.0], word_length: 2 };
    assert!(generate::<f64>(&s, &fixed, 0).is_err());
    let err = generate::<f64>(&t(2), &Family::Jittered { n: 6 }, 0).unwrap_err();
    assert!(err.to_string().contains("perfect d-th power"));
    assert!(generate::<f64>(&t(1), &Family::Random { n: 0 }, 0).is_err());
}

#[test]
fn jittered_nodes_sit_in_their_cells() {
    for (m, n) in [(t(2), 4), (t(2), 64), (ManifoldSpec::sphere(), 37)] {
        let part = equal_measure_partition::<f64>(&m, n).unwrap();
        for seed in 0..5 {
            let ps: PointSet<f64> = generate(&m, &Family::Jittered { n }, seed).unwrap();
            for (j, p) in ps.nodes.iter().enumerate() {
                assert_eq!(part.locate(p), Some(j));
                assert!((ps.weights[j] - part.cells[j].measure).abs() < 1e-15);
            }
        }
    }
    let ps: PointSet<f64> = generate(&t(2), &Family::Jittered { n: 4 }, 1).unwrap();
    assert!(ps.weights.iter().all(|w| *w == 0.25));
}

#[test]
fn fibonacci_nodes_are_unit_and_balanced() {
    let ps: PointSet<f64> = generate(&ManifoldSpec::sphere(), &Family::Fibonacci { n: 500 }, 0).unwrap();
    let mut mean = [0.0; 3];
    for p in &ps.nodes {
        assert!((p.dot(p) - 1.0).abs() < 1e-12);
        for i in 0..3 {
            mean[i] += p.c[i] / 500.0;
        }
    }
    assert!(mean.iter().all(|v| v.abs() < 1e-2), "{mean:?}");
}

#[test]
fn json_round_trip_is_lossless() {
    let s = ManifoldSpec::sphere();
    let ps: PointSet<f64> = generate(&s, &Family::Random { n: 50 }, 3).unwrap();
    let mut buf = Vec::new();
    write_json(&ps, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.contains("\"kind\": \"sphere\""));
    assert!(text.contains("\"family\": \"random\""));
    let back: PointSet<f64> = read_json(&buf[..]).unwrap();
    assert_eq!(back, ps);
    // written twice, identical bytes
    let mut again = Vec::new();
    write_json(&back, &mut again).unwrap();
    assert_eq!(again, buf);
}

#[test]
fn csv_round_trip_is_lossless() {
    let m = t(2);
    let ps: PointSet<f64> = generate(&m, &Family::Jittered { n: 16 }, 8).unwrap();
    let mut buf = Vec::new();
    write_csv(&ps, &["config_hash=abc".to_string()], &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("# config_hash=abc\nx0,x1,weight\n"));
    let back: PointSet<f64> = read_csv(&m, &buf[..]).unwrap();
    assert_eq!(back.nodes, ps.nodes);
    assert_eq!(back.weights, ps.weights);
    assert!(read_csv::<f64, _>(&ManifoldSpec::sphere(), &buf[..]).is_err());
}

#[test]
fn invalid_point_sets_are_rejected() {
    let m = t(1);
    let p = m.point(&[0.5f64]).unwrap();
    assert!(PointSet::new(m, vec![p, p], vec![0.5, 0.4], Provenance::new("x")).is_err());
    assert!(PointSet::new(m, vec![p, p], vec![1.5, -0.5], Provenance::new("x")).is_err());
    assert!(PointSet::new(m, vec![p], vec![0.5, 0.5], Provenance::new("x")).is_err());
    assert!(PointSet::<f64>::new(m, vec![], vec![], Provenance::new("x")).is_err());
    let bad = br#"{"manifold": {"kind": "sphere", "dim": 2}, "nodes": [[0.0, 0.0, 2.0]], "weights": [1.0], "provenance": {"family": "x"}}"#;
    assert!(read_json::<f64, _>(&bad[..]).is_err());
}

#[test]
fn energy_descent_never_increases() {
    for (m, n, alpha) in [(t(1), 12, 1.0), (t(2), 16, 1.3), (ManifoldSpec::sphere(), 12, 1.5)] {
        let ps: PointSet<f64> = generate(&m, &Family::Random { n }, 5).unwrap();
        let tr = minimize_energy(&ps, alpha, 15, StepPolicy::default()).unwrap();
        assert!(tr.accepted > 0, "{m}");
        assert!(tr.energies.windows(2).all(|w| w[1] < w[0]), "{m}: {:?}", tr.energies);
        let k = BesselKernel::new(&m, 2.0 * alpha, 1e-12, 1 << 20).unwrap();
        let e = k.energy(&tr.points.nodes, &tr.points.weights).unwrap().0;
        assert!((e - tr.energies.last().unwrap()).abs() < 1e-9);
        assert!(tr.points.check().is_ok());
    }
    let ps: PointSet<f64> = generate(&t(2), &Family::Random { n: 4 }, 5).unwrap();
    assert!(minimize_energy(&ps, 1.0, 3, StepPolicy::default()).is_err());
}

#[test]
fn equispaced_circle_points_are_stationary() {
    let ps: PointSet<f64> = generate(&t(1), &Family::Lattice { n: 8 }, 0).unwrap();
    let tr = minimize_energy(&ps, 1.0, 5, StepPolicy::default()).unwrap();
    assert_eq!(tr.accepted, 0);
    assert_eq!(tr.points.nodes, ps.nodes);
}

/// `Σ_{k≥1} (1+4π²k²)^{-s/2}` summed to `kmax` plus an integral tail.
fn coefficient_sum(s: f64, kmax: usize) -> f64 {
    let fp = 4.0 * std::f64::consts::PI.powi(2);
    let c = |k: f64| (1.0 + fp * k * k).powf(-s / 2.0);
    let head: f64 = (1..=kmax).map(|k| c(k as f64)).sum();
    // Euler–Maclaurin: ∫_{K}^∞ c + c(K)/2 correction, with c ≈ (fp k²)^{-s/2}
    let kf = kmax as f64;
    let tail = fp.powf(-s / 2.0) * kf.powf(1.0 - s) / (s - 1.0) - c(kf) / 2.0;
    head + tail
}

#[test]
fn jitter_average_matches_cell_integrals() {
    // T^1, N = 4, kernel order 2α = 1.6
    let (n, order, h) = (4usize, 1.6, 0.25);
    let fp = 4.0 * std::f64::consts::PI.powi(2);
    let cos_part: f64 = (1..200_000)
        .map(|k| {
            let kf = k as f64;
            (1.0 + fp * kf * kf).powf(-order / 2.0) * (1.0 - (std::f64::consts::TAU * kf * h).cos()) / (fp * kf * kf)
        })
        .sum();
    // Σ_j ∫∫_{U_j²} (B(x,x) - B(x,y)) = N Σ_{k≠0} c_k [h² - 2(1 - cos 2πkh)/(2πk)²]
    let target = n as f64 * 2.0 * (h * h * coefficient_sum(order, 1_000_000) - 2.0 * cos_part);

    let m = t(1);
    let k = BesselKernel::for_batch(&m, order, n, 1e-12, 1 << 20).unwrap();
    let draws = 2000;
    let vals: Vec<f64> = (0..draws)
        .map(|seed| {
            let ps: PointSet<f64> = generate(&m, &Family::Jittered { n }, seed).unwrap();
            k.energy(&ps.nodes, &ps.weights).unwrap().0
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / draws as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    let se = (var / draws as f64).sqrt();
    assert!((mean - target).abs() < 3.0 * se, "mean {mean} target {target} se {se}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_sets_satisfy_invariants(seed in 0u64..1000, n in 1usize..40, which in 0usize..5) {
        let (m, fam) = match which {
            0 => (t(2), Family::Random { n }),
            1 => (ManifoldSpec::sphere(), Family::Random { n }),
            2 => (ManifoldSpec::sphere(), Family::Jittered { n }),
            3 => (ManifoldSpec::sphere(), Family::Fibonacci { n }),
            _ => (t(1), Family::Jittered { n }),
        };
        let ps: PointSet<f64> = generate(&m, &fam, seed).unwrap();
        prop_assert!(ps.check().is_ok());
        prop_assert_eq!(ps.len(), n);
        prop_assert_eq!(ps.manifold.kind == ManifoldKind::Sphere, m.is_sphere());
        let again: PointSet<f64> = generate(&m, &fam, seed).unwrap();
        prop_assert_eq!(again, ps);
    }

    #[test]
    fn json_numbers_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let s = io::format_f64(v);
        let back: f64 = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }
}
