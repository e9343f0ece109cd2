#![allow(clippy::neg_cmp_op_on_partial_ord)]

use cellfree_core::channel::*;
use cellfree_core::rng::{stream, Component};

const DRAWS: usize = 1_000_000;

#[test]
fn complex_gaussian_moments() {
    let mut r = stream(11, Component::SmallScale, 0);
    let (mut s2, mut s4, mut re, mut im) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..DRAWS {
        let h = sample_cn(&mut r, 1.0);
        let p = h.norm_sqr();
        s2 += p;
        s4 += p * p;
        re += h.re;
        im += h.im;
    }
    let n = DRAWS as f64;
    assert!((s2 / n - 1.0).abs() < 0.01, "E|h|^2 = {}", s2 / n);
    assert!((s4 / n - 2.0).abs() < 0.04, "E|h|^4 = {}", s4 / n);
    assert!((re / n).abs() < 0.005 && (im / n).abs() < 0.005);
}

#[test]
fn scaled_variance() {
    let mut r = stream(12, Component::SmallScale, 0);
    let v = 3.5e-13;
    let s: f64 = (0..DRAWS).map(|_| sample_cn(&mut r, v).norm_sqr()).sum();
    assert!((s / DRAWS as f64 / v - 1.0).abs() < 0.01);
}

#[test]
fn shadowing_correlation_structure() {
    let sh = ShadowingModel::new(8.0, 0.5).unwrap();
    let (m, k) = (400, 400);
    let z = shadowing_factors(m, k, &sh, 3);
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 0.1, "{mean}");
    assert!((var - 1.0).abs() < 0.1, "{var}");
    // same-AP pairs share a_m, so their covariance is theta
    let mut cov = 0.0;
    for ap in 0..m {
        for ue in (0..k).step_by(2) {
            cov += z[ap * k + ue] * z[ap * k + ue + 1];
        }
    }
    let cov = cov / (m * k / 2) as f64;
    assert!((cov - 0.5).abs() < 0.1, "{cov}");
}

#[test]
fn topology_is_uniform_in_square() {
    let t = generate_topology(20_000, 1, 1000.0, 5).unwrap();
    let xs: Vec<f64> = t.ap_positions.iter().map(|p| p[0]).collect();
    assert!(t.ap_positions.iter().all(|p| (0.0..1000.0).contains(&p[0]) && (0.0..1000.0).contains(&p[1])));
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((mean - 500.0).abs() < 10.0);
    let left = xs.iter().filter(|x| **x < 250.0).count() as f64 / xs.len() as f64;
    assert!((left - 0.25).abs() < 0.02);
}

#[test]
fn path_loss_examples() {
    let m = PathLossModel::new(1900.0, 15.0, 1.65, 10.0, 50.0, DistanceUnit::Meters).unwrap();
    let l = m.l_db();
    assert!((l - 140.715_083_7).abs() < 1e-6, "{l}");
    assert!((path_loss_db(100.0, &m).unwrap() - (-l - 70.0)).abs() < 1e-9);
    let flat = path_loss_db(5.0, &m).unwrap();
    assert_eq!(flat, path_loss_db(1.0, &m).unwrap());
    assert_eq!(flat, path_loss_db(10.0, &m).unwrap());
    for (a, b) in [(20.0, 30.0), (60.0, 600.0)] {
        assert!(path_loss_db(a, &m).unwrap() > path_loss_db(b, &m).unwrap());
    }
    let km = PathLossModel {
        distance_unit: DistanceUnit::Kilometers,
        ..m
    };
    assert!((path_loss_db(100.0, &km).unwrap() - (-l + 35.0)).abs() < 1e-9);
}

#[test]
fn path_loss_is_continuous_at_breakpoints() {
    for unit in [DistanceUnit::Meters, DistanceUnit::Kilometers] {
        let m = PathLossModel::new(1900.0, 15.0, 1.65, 10.0, 50.0, unit).unwrap();
        for d in [10.0, 50.0] {
            let lo = path_loss_db(d * (1.0 - 1e-9), &m).unwrap();
            let hi = path_loss_db(d * (1.0 + 1e-9), &m).unwrap();
            assert!((lo - hi).abs() < 1e-6, "{unit:?} at {d}: {lo} vs {hi}");
        }
    }
}

#[test]
fn fading_without_shadowing_is_path_loss() {
    let topo = generate_topology(5, 3, 1000.0, 9).unwrap();
    let pl = PathLossModel::new(1900.0, 15.0, 1.65, 10.0, 50.0, DistanceUnit::Kilometers).unwrap();
    let sh = ShadowingModel::new(0.0, 0.5).unwrap();
    let beta = large_scale_fading(&topo, &pl, &sh, 9).unwrap();
    for ap in 0..5 {
        for ue in 0..3 {
            let expect = 10f64.powf(path_loss_db(topo.distance(ap, ue), &pl).unwrap() / 10.0);
            assert!((beta.get(ap, ue) / expect - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn drops_are_reproducible() {
    let pl = PathLossModel::new(1900.0, 15.0, 1.65, 10.0, 50.0, DistanceUnit::Kilometers).unwrap();
    let sh = ShadowingModel::new(8.0, 0.5).unwrap();
    let make = |s| {
        let t = generate_topology(10, 4, 1000.0, s).unwrap();
        large_scale_fading(&t, &pl, &sh, s).unwrap()
    };
    assert_eq!(make(1).as_slice(), make(1).as_slice());
    assert_ne!(make(1).as_slice(), make(2).as_slice());
    assert_eq!(make(1).to_csv().as_str(), make(1).to_csv().as_str());
}
