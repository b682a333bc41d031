use becker_qc::drivers::{normalize_driver, HerglotzDriver};
use becker_qc::loewner::{a2_a3_flow, chain_at, coefficient_flow, map_limit, solve_trajectory};
use becker_qc::Complex64;
use std::f64::consts::TAU;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn koebe_driver_gives_koebe_function() {
    let d = HerglotzDriver::custom(1.0 - 1e-12, true, vec![], "koebe", |z, _| Ok((1.0 - z) / (1.0 + z))).unwrap();
    for j in 0..20 {
        let z = Complex64::from_polar(0.05 + 0.04 * j as f64, 0.7 * j as f64);
        let f = map_limit(&d, z, 1e-11).unwrap();
        let want = z / ((1.0 - z) * (1.0 - z));
        assert!((f - want).norm() < 1e-6, "{z}: {f} vs {want}");
    }
}

#[test]
fn constant_power_closed_forms() {
    for (n, k) in [(1u32, 0.5), (2, 0.5), (1, 0.8), (3, 0.3)] {
        let theta = 0.4;
        let d = HerglotzDriver::constant_power(k, theta, n).unwrap();
        let e = Complex64::from_polar(1.0, -theta);
        for j in 0..8 {
            let z = Complex64::from_polar(0.1 * (j + 1) as f64, 1.3 * j as f64);
            let inner = 1.0 - k * e * z.powu(n);
            let want = z * inner.powf(-2.0 / n as f64);
            let got = map_limit(&d, z, 1e-12).unwrap();
            assert!((got - want).norm() < 1e-8 * want.norm().max(1.0), "n={n} k={k} z={z}");
        }
    }
}

#[test]
fn constant_power_series_coefficients() {
    let (k, theta) = (0.6, 0.9);
    let d = HerglotzDriver::constant_power(k, theta, 1).unwrap();
    let a = coefficient_flow(&d, 8, 1e-10).unwrap();
    for m in 2..=8 {
        let want = Complex64::from_polar(m as f64 * k.powi(m as i32 - 1), -((m - 1) as f64) * theta);
        assert!((a[m - 2] - want).norm() < 1e-8, "a_{m}: {} vs {want}", a[m - 2]);
    }
}

#[test]
fn extremal_driver_attains_sharp_bound() {
    let k: f64 = 0.5;
    let d = HerglotzDriver::extremal_a3(k).unwrap();
    let (a2, a3) = a2_a3_flow(&d, 1e-11).unwrap();
    let t0 = (1.0 - k) / (2.0 * k);
    let sharp = k * (1.0 + (1.0 - 1.0 / k).exp() * (1.0 + k));
    assert!((a3.norm() - sharp).abs() < 1e-9, "{a3}");
    assert!((a2 - c(2.0 * k * (-t0).exp() * (1.0 + t0), 0.0)).norm() < 1e-9, "{a2}");
    let a = coefficient_flow(&d, 4, 1e-11).unwrap();
    assert!((a[0] - a2).norm() < 1e-9 && (a[1] - a3).norm() < 1e-9);
}

#[test]
fn trajectory_matches_implicit_equation() {
    // w / (1 - k w)^2 = e^{-t} z / (1 - k z)^2 for p = (1 + k z)/(1 - k z)
    let k = 0.5;
    let d = HerglotzDriver::constant_power(k, 0.0, 1).unwrap();
    let z0: f64 = 0.3;
    let tr = solve_trajectory(&d, c(z0, 0.0), 5.0, 1e-12).unwrap();
    let g = |w: f64| w / (1.0 - k * w).powi(2);
    let target = (-5.0f64).exp() * g(z0);
    let (mut lo, mut hi) = (0.0, z0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((tr.end() - c(lo, 0.0)).norm() < 1e-10);
    assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    assert!((tr.times.last().unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn series_flow_agrees_with_map_limit_taylor() {
    let d = HerglotzDriver::extremal_a3(0.4).unwrap();
    let a = coefficient_flow(&d, 6, 1e-10).unwrap();
    let (r, m) = (0.25, 64);
    let samples: Vec<Complex64> =
        (0..m).map(|j| map_limit(&d, Complex64::from_polar(r, TAU * j as f64 / m as f64), 1e-12).unwrap()).collect();
    for n in 2..=6 {
        let mut acc = c(0.0, 0.0);
        for (j, v) in samples.iter().enumerate() {
            acc += v * Complex64::from_polar(1.0, -TAU * (j * n) as f64 / m as f64);
        }
        let coef = acc / (m as f64 * r.powi(n as i32));
        assert!((coef - a[n - 2]).norm() < 1e-6, "a_{n}: {coef} vs {}", a[n - 2]);
    }
}

#[test]
fn chain_semigroup_composition() {
    // f_s = f_t ∘ w(s, t) for s < t
    let d = HerglotzDriver::extremal_a3(0.3).unwrap();
    let (s, t) = (0.2, 1.4);
    for z in [c(0.3, 0.2), c(-0.5, 0.1), c(0.0, 0.7)] {
        let lhs = chain_at(&d, s, z, 1e-12).unwrap();
        // transport z from s to t along dw/dt = -w p
        let shifted = HerglotzDriver::custom(0.3, true, vec![], "shift", {
            let d = d.clone();
            move |w, tau| d.eval(w, tau + s)
        })
        .unwrap();
        let w = solve_trajectory(&shifted, z, t - s, 1e-12).unwrap().end();
        let rhs = chain_at(&d, t, w, 1e-12).unwrap();
        assert!((lhs - rhs).norm() < 1e-8, "{lhs} vs {rhs}");
    }
}

#[test]
fn non_normalized_blaschke_map_matches_renormalized() {
    let d = HerglotzDriver::blaschke(0.5, 0.3, vec![c(0.4, 0.2)]).unwrap();
    let n = normalize_driver(&d, 120.0, 1e-12).unwrap();
    for z in [c(0.2, 0.1), c(-0.4, 0.3)] {
        let a = map_limit(&d, z, 1e-11).unwrap();
        let b = map_limit(&n, z, 1e-9).unwrap();
        assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        // f'(0) = 1 normalization
    }
    let small = c(1e-5, 0.0);
    let f = map_limit(&d, small, 1e-12).unwrap();
    assert!((f / small - 1.0).norm() < 1e-4);
}
