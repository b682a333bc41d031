use becker_qc::criteria::{
    aw_becker_extend, aw_becker_lhs, check_aw_becker, check_pde_conditions, check_pre_schwarzian,
    initial_condition_gap, pde_extend, threshold_k_star, threshold_q, AnalyticSample, DiskGrid, PdeExtensionSpec,
    PdeGrids,
};
use becker_qc::extension::{numeric_dilatation, AnnulusGrid, FD_STEP};
use becker_qc::extremal::sharp_a3_bound;
use becker_qc::{Complex64, Error, Result};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn coarse() -> PdeGrids {
    PdeGrids { disk: DiskGrid { n_r: 24, n_theta: 24, ..DiskGrid::default() }, ..PdeGrids::default() }
}

#[test]
fn example2_condition_is_sup_of_derivative_gap() {
    let f = AnalyticSample::parse("z+0.1*z^2").unwrap();
    let spec = PdeExtensionSpec::example2(f.clone(), 0.2, 0.5, 2.0).unwrap();
    let r = check_pde_conditions(&spec, &coarse()).unwrap();
    assert!(r.cond_i && r.growth_ok && r.skipped.is_empty());
    // |f' − 1| = 0.2|w| peaks at the outer grid radius
    assert!((r.cond_ii_max - 0.2 * (1.0 - 1e-3)).abs() < 1e-12, "{}", r.cond_ii_max);
    assert!(initial_condition_gap(&spec, &f, &DiskGrid::default()).unwrap() <= 1e-10);
}

#[test]
fn example1_condition_matches_reduced_form() {
    let cc = c(0.08, 0.05);
    let f = AnalyticSample::new("z/(1-cz)", move |z| {
        let u = 1.0 - cc * z;
        Ok([z / u, 1.0 / (u * u), 2.0 * cc / (u * u * u), 6.0 * cc * cc / (u * u * u * u)])
    })
    .unwrap();
    let grids = coarse();
    let spec = PdeExtensionSpec::example1(f.clone(), 0.5, 0.5, 4.0).unwrap();
    let r = check_pde_conditions(&spec, &grids).unwrap();
    let reduced = grids
        .disk
        .points()
        .into_iter()
        .map(|w| (1.0 - w.norm_sqr()) * (w * 2.0 * cc / (1.0 - cc * w)).norm())
        .fold(0.0f64, f64::max);
    assert!((r.cond_ii_max - reduced).abs() <= 1e-9, "{} vs {reduced}", r.cond_ii_max);
    assert!(r.cond_i && r.growth_ok);
    assert!(initial_condition_gap(&spec, &f, &DiskGrid::default()).unwrap() <= 1e-10);
}

#[test]
fn identity_gives_zero_condition() {
    let f = AnalyticSample::parse("z").unwrap();
    for spec in [
        PdeExtensionSpec::example1(f.clone(), 0.1, 0.5, 2.0).unwrap(),
        PdeExtensionSpec::example2(f.clone(), 0.1, 0.5, 2.0).unwrap(),
    ] {
        let r = check_pde_conditions(&spec, &coarse()).unwrap();
        assert_eq!(r.cond_ii_max, 0.0);
        assert!(r.passes(0.1));
        assert!((pde_extend(&spec, c(1.5, -2.0)).unwrap() - c(1.5, -2.0)).norm() < 1e-15);
    }
}

#[test]
fn example2_extension_is_explicit_and_quasiconformal() {
    let f = AnalyticSample::parse("z+0.05*z^2").unwrap();
    let spec = PdeExtensionSpec::example2(f, 0.1, 0.5, 2.0).unwrap();
    assert!(check_pde_conditions(&spec, &coarse()).unwrap().passes(0.1));
    for z in [c(1.2, 0.3), c(-3.0, 2.0), c(0.0, -1.01)] {
        let zb = z.conj();
        let expect = z + 0.05 / (zb * zb);
        assert!((pde_extend(&spec, z).unwrap() - expect).norm() < 1e-13);
    }
    let grid = AnnulusGrid::new(1.05, 4.0, 20, 20).unwrap();
    let analytic = |z: Complex64| -> Result<Complex64> { Ok(-0.1 / z.conj().powi(3)) };
    let r = numeric_dilatation(|z| pde_extend(&spec, z), &grid, FD_STEP, Some(analytic)).unwrap();
    assert!(r.failures.is_empty());
    assert!(r.sup_dilatation <= 0.1 + 1e-3);
    assert!(r.max_deviation.unwrap() <= 1e-6);
}

#[test]
fn pde_extend_rejects_disk_points() {
    let spec = PdeExtensionSpec::example2(AnalyticSample::parse("z").unwrap(), 0.1, 0.5, 2.0).unwrap();
    assert!(matches!(pde_extend(&spec, c(0.5, 0.5)), Err(Error::Domain { .. })));
}

#[test]
fn meromorphic_pairs_skip_poles() {
    let spec = PdeExtensionSpec::new(
        "pole",
        0.5,
        0.5,
        2.0,
        |z, _| Ok(z),
        |z, w| {
            if (z - 0.5).norm() < 1e-9 {
                Err(Error::Evaluation { z, reason: "pole".into() })
            } else {
                Ok(0.1 * w)
            }
        },
    )
    .unwrap();
    let grids = PdeGrids { disk: DiskGrid { r_max: 0.5, n_r: 2, n_theta: 4 }, n_r: 2, ..PdeGrids::default() };
    let r = check_pde_conditions(&spec, &grids).unwrap();
    assert!(!r.skipped.is_empty());
    assert!(r.cond_ii_max <= 0.05 + 1e-15);
}

#[test]
fn aw_becker_quadratic_passes_and_extends() {
    let f = AnalyticSample::parse("z+0.05*z^2").unwrap();
    let rep = check_aw_becker(&f, 0.5, &DiskGrid::default()).unwrap();
    assert!(rep.ok && rep.margin > 0.0);
    // left side at the origin: (4√3/9)|c| + |c² + S_f(0)/2| with S_f(0) = −6c²
    let at0 = 4.0 * 3f64.sqrt() / 9.0 * 0.05 + 2.0 * 0.05f64.powi(2);
    assert!((aw_becker_lhs(&f, Complex64::default()).unwrap() - at0).abs() < 1e-14);

    let mut seam: f64 = 0.0;
    for j in 0..64 {
        let u = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 64.0);
        let outer = aw_becker_extend(&f, u * (1.0 + 1e-7)).unwrap();
        seam = seam.max((outer - f.f(u * (1.0 - 1e-7)).unwrap()).norm());
    }
    assert!(seam <= 1e-3, "seam {seam}");

    let k = 0.5 - rep.margin;
    let grid = AnnulusGrid::new(1.05, 4.0, 16, 16).unwrap();
    let r = numeric_dilatation(|z| aw_becker_extend(&f, z), &grid, FD_STEP, None::<fn(Complex64) -> Result<Complex64>>)
        .unwrap();
    assert!(r.failures.is_empty());
    assert!(r.sup_dilatation <= k + 1e-3, "{} vs {k}", r.sup_dilatation);
}

#[test]
fn aw_extension_without_a2_is_classical_form() {
    let f = AnalyticSample::parse("z+0.1*z^3").unwrap();
    assert_eq!(f.a2(), Complex64::default());
    for z in [c(1.3, 0.2), c(-0.4, 2.2)] {
        let w = 1.0 / z.conj();
        let (fw, d1, d2) = (w + 0.1 * w.powi(3), 1.0 + 0.3 * w * w, 0.6 * w);
        let classical = fw + (z - w) * d1 / (1.0 - 0.5 * (z - w) * d2 / d1);
        assert!((aw_becker_extend(&f, z).unwrap() - classical).norm() < 1e-13);
    }
}

#[test]
fn aw_extension_reports_vanishing_denominator() {
    // with f = z + z³/2 the denominator 1 + (z − w)(a₂ − f''/2f') vanishes at z = √6
    let f = AnalyticSample::parse("z+0.5*z^3").unwrap();
    match aw_becker_extend(&f, c(6f64.sqrt(), 0.0)) {
        Err(Error::Singularity { z, t }) => {
            assert_eq!(z, c(6f64.sqrt(), 0.0));
            assert!((t - 0.5 * 6f64.ln()).abs() < 1e-15);
        }
        other => panic!("expected a singularity, got {other:?}"),
    }
}

#[test]
fn koebe_fails_both_criteria() {
    let f = AnalyticSample::parse("z/(1-z)^2").unwrap();
    for k in [0.1, 0.5, 0.95] {
        assert!(check_aw_becker(&f, k, &DiskGrid::default()).unwrap().margin < 0.0);
        assert!(check_pre_schwarzian(&f, k, &DiskGrid::default()).unwrap().margin < 0.0);
    }
}

#[test]
fn pre_schwarzian_of_quadratic() {
    for cc in [0.02, 0.1, 0.2] {
        let f = AnalyticSample::parse(&format!("z+{cc}*z^2")).unwrap();
        let rep = check_pre_schwarzian(&f, 0.3, &DiskGrid::default()).unwrap();
        let brute = DiskGrid::default()
            .points()
            .into_iter()
            .map(|z| (1.0 - z.norm_sqr()) * (2.0 * cc / (1.0 + 2.0 * cc * z)).norm())
            .fold(0.0f64, f64::max);
        assert!((0.3 - rep.margin - brute).abs() < 1e-13);
        assert!(brute >= 2.0 * cc);
        assert_eq!(rep.ok, 2.0 * cc <= 0.3);
    }
}

#[test]
fn threshold_against_bisection() {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 4.0 * mid * mid + (3.0 + 8.0 * 3f64.sqrt() / 9.0) * mid < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = threshold_k_star();
    assert!((k - lo).abs() < 1e-15);
    assert!((k - 0.188856).abs() < 1e-6);
    assert!((threshold_q(k) - 1.0).abs() < 1e-12);
    for j in 1..50 {
        let kk = k * j as f64 / 50.0;
        let q = threshold_q(kk);
        assert!(q < 1.0);
        assert!(sharp_a3_bound(q).unwrap().is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schwarzian_two_ways(
        a in -0.2f64..0.2, b in -0.2f64..0.2, cc in -0.1f64..0.1,
        r in 0.0f64..0.8, th in 0.0f64..std::f64::consts::TAU,
    ) {
        let f = AnalyticSample::parse(&format!("z+({a}+{b}i)*z^2+{cc}*z^3")).unwrap();
        let z = Complex64::from_polar(r, th);
        let direct = f.schwarzian(z).unwrap();
        let fd = f.schwarzian_fd(z).unwrap();
        prop_assert!((direct - fd).norm() <= 1e-8, "{} vs {}", direct, fd);
    }

    #[test]
    fn example2_passes_iff_twice_coefficient_fits(cc in 0.0f64..0.1) {
        let f = AnalyticSample::parse(&format!("z+{cc}*z^2")).unwrap();
        let spec = PdeExtensionSpec::example2(f, 0.1, 0.5, 2.0).unwrap();
        let grids = PdeGrids { disk: DiskGrid { n_r: 8, n_theta: 8, ..DiskGrid::default() }, n_r: 8, n_z: 4, n_w: 2, n_angle: 4, ..PdeGrids::default() };
        let r = check_pde_conditions(&spec, &grids).unwrap();
        prop_assert!((r.cond_ii_max - 2.0 * cc * (1.0 - 1e-3)).abs() < 1e-12);
        prop_assert_eq!(r.passes(0.1), r.cond_ii_max <= 0.1);
        prop_assert!(r.cond_i && r.growth_ok);
    }
}
