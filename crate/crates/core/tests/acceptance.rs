//! Acceptance run: one line per criterion, `PASS` or `FAIL`, with the
//! measured value, its tolerance and the wall time against the budget.

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use becker_qc::criteria::{check_pde_conditions, pde_extend, threshold_k_star, AnalyticSample, PdeExtensionSpec, PdeGrids};
use becker_qc::drivers::{kappa, normalize_driver, HerglotzDriver};
use becker_qc::extension::{becker_extend, extremal_beltrami, numeric_dilatation, spiral, AnnulusGrid, BeltramiField, FD_STEP};
use becker_qc::extremal::{
    fekete_szego_bound, fekete_szego_objective, hk_lambda, hk_lambda_quadrature, l1_norm, sharp_a3_bound,
    sharp_a3_excess, synthesize_control, verify_max_principle, ControlGrid,
};
use becker_qc::laurent::Laurent;
use becker_qc::loewner::{coefficient_flow, map_limit};
use becker_qc::{Complex64, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const TOL: f64 = 1e-12;

type NoField = Option<fn(Complex64) -> Result<Complex64>>;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

/// The 200-point k grid shared by criteria 2 and 3.
fn k_grid() -> Vec<f64> {
    (1..=200).map(|i| i as f64 / 201.0).collect()
}

fn c1_sharp_a3() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for k in [0.1, 0.2, 0.3, 0.5, 0.7, 0.9] {
        let a = coefficient_flow(&HerglotzDriver::extremal_a3(k)?, 3, 1e-10)?;
        let want = k * (1.0 + (1.0 - 1.0 / k).exp() * (1.0 + k));
        worst = worst.max((a[1] - want).norm());
    }
    Ok(outcome(worst <= 1e-6, format!("max |a3 - formula| = {worst:.2e} (tol 1e-6)")))
}

fn c2_exceeds_k() -> Result<Outcome> {
    let ks = k_grid();
    let mut min_rel = f64::INFINITY;
    let mut rounded_equal = 0;
    for &k in &ks {
        min_rel = min_rel.min(sharp_a3_excess(k)? / k);
        if sharp_a3_bound(k)? <= k {
            rounded_equal += 1;
        }
    }
    Ok(outcome(
        min_rel > 0.0,
        format!(
            "min (sharp - k)/k = {min_rel:.3e} over {} k; {rounded_equal} of them round to k in f64",
            ks.len()
        ),
    ))
}

fn c3_fekete_szego() -> Result<Outcome> {
    let rows: Vec<(f64, f64, f64)> = k_grid()
        .par_iter()
        .map(|&k| {
            let fs = fekete_szego_bound(k, 1e-10)?.value;
            let brute = (1..1_000_000)
                .map(|i| fekete_szego_objective(k, i as f64 / 1e6))
                .fold(f64::INFINITY, f64::min);
            Ok((sharp_a3_bound(k)?, fs, brute))
        })
        .collect::<Result<_>>()?;
    let ordered = rows.iter().all(|(s, fs, _)| s < fs);
    let dev = rows.iter().map(|(_, fs, b)| (fs - b).abs()).fold(0.0, f64::max);
    Ok(outcome(
        ordered && dev <= 1e-8,
        format!("sharp < FS at all {} k: {ordered}; max |FS - brute| = {dev:.2e} (tol 1e-8)", rows.len()),
    ))
}

fn c4_closed_form_map() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for k in [0.3, 0.7] {
        for theta in [0.0, 1.0] {
            let a = coefficient_flow(&HerglotzDriver::constant_power(k, theta, 1)?, 6, 1e-10)?;
            for (j, got) in a.iter().enumerate() {
                let m = j as i32 + 2;
                let want = Complex64::from_polar(m as f64 * k.powi(m - 1), -(m - 1) as f64 * theta);
                worst = worst.max((got - want).norm());
            }
        }
    }
    Ok(outcome(worst <= 1e-6, format!("max |a_m - m k^(m-1) e^(-i(m-1)θ)| = {worst:.2e} (tol 1e-6)")))
}

fn c5_beltrami() -> Result<Outcome> {
    let grid = AnnulusGrid::new(1.05, 4.0, 40, 40)?;
    let ext = HerglotzDriver::extremal_a3(0.5)?;
    let r_ext = numeric_dilatation(|z| becker_extend(&ext, z, TOL), &grid, FD_STEP, Some(|z| extremal_beltrami(0.5, z)))?;

    let zeros = vec![Complex64::new(0.3, 0.0), Complex64::new(0.0, -0.2)];
    let bla = HerglotzDriver::blaschke(0.5, 0.7, zeros.clone())?;
    let field = BeltramiField::blaschke(0.5, 0.7, zeros)?;
    let r_bla = numeric_dilatation(|z| becker_extend(&bla, z, TOL), &grid, FD_STEP, Some(|z| field.eval(z)))?;
    let teich = grid
        .points()
        .par_iter()
        .map(|&z| Ok((field.eval(z)?.norm() - 0.5).abs()))
        .try_reduce(|| 0.0, |a: f64, b| Ok(a.max(b)))?;

    let dev_e = r_ext.max_deviation.unwrap_or(f64::INFINITY);
    let dev_b = r_bla.max_deviation.unwrap_or(f64::INFINITY);
    let complete = r_ext.failures.is_empty() && r_bla.failures.is_empty();
    Ok(outcome(
        complete && dev_e <= 1e-3 && dev_b <= 1e-3 && teich <= 1e-10,
        format!(
            "extremal dev {dev_e:.2e}, Blaschke dev {dev_b:.2e} (tol 1e-3); max ||mu| - k| = {teich:.2e} (tol 1e-10); skipped {}",
            r_ext.failures.len() + r_bla.failures.len()
        ),
    ))
}

fn c6_kappa() -> Result<Outcome> {
    let d = HerglotzDriver::blaschke(0.5, 0.0, vec![Complex64::new(0.4, 0.0)])?;
    let n = normalize_driver(&d, 120.0, 1e-12)?;
    let bound = kappa(0.5);
    let times: Vec<f64> = (0..41).map(|i| 0.5 * i as f64).collect();
    let sup = times.iter().map(|&t| n.becker_sup(t, 256)).try_fold(0.0f64, |a, s| s.map(|s| a.max(s)))?;
    let gap = spiral::disk_samples(20)
        .par_iter()
        .map(|&z| Ok((map_limit(&d, z, 1e-11)? - map_limit(&n, z, 1e-10)?).norm()))
        .try_reduce(|| 0.0, |a: f64, b| Ok(a.max(b)))?;
    Ok(outcome(
        sup <= bound + 1e-6 && gap <= 1e-6,
        format!("sup |H(p)| = {sup:.8} vs kappa = {bound} (+1e-6); max map gap = {gap:.2e} (tol 1e-6)"),
    ))
}

fn c7_max_principle() -> Result<Outcome> {
    let s = synthesize_control(0.5)?;
    let grid = ControlGrid { n_radius: 64, n_angle: 64, n_c2: 32 };
    let ts: Vec<f64> = (0..8).map(|i| s.t0 * i as f64 / 7.0).collect();
    let rep = verify_max_principle(&s, &ts, &grid)?;
    Ok(outcome(rep.max_gap <= 1e-3, format!("max gap = {:.2e} over {} samples (tol 1e-3)", rep.max_gap, rep.samples.len())))
}

fn c8_lambda() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ks = [0.2, 0.5, 0.8];
    let cases: Vec<(f64, Laurent)> = (0..10)
        .map(|i| {
            let top = rng.gen_range(3..=8);
            let phi = Laurent::from_terms(
                (3..=top).map(|m| (Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), -m)),
            );
            (ks[i % 3], phi)
        })
        .collect();
    let dev = cases
        .par_iter()
        .map(|(k, phi)| Ok((hk_lambda(*k, phi)? - hk_lambda_quadrature(*k, phi, 1e7, 1e-5)?).norm()))
        .try_reduce(|| 0.0, |a: f64, b| Ok(a.max(b)))?;
    let mut worst: f64 = 0.0;
    for k in ks {
        for m in 3..=12 {
            let phi = Laurent::monomial(Complex64::new(1.0, 0.0), -m);
            worst = worst.max(hk_lambda(k, &phi)?.norm() / l1_norm(&phi, 1e-8)?);
        }
    }
    Ok(outcome(
        dev <= 1e-4 && worst < 0.999,
        format!("max |closed - quadrature| = {dev:.2e} (tol 1e-4); max |Lambda| on unit monomials = {worst:.6} (< 0.999)"),
    ))
}

fn c9_threshold() -> Result<Outcome> {
    let k = threshold_k_star();
    Ok(outcome((k - 0.188856).abs() <= 1e-6, format!("k* = {k:.9} (0.188856 ± 1e-6)")))
}

fn c10_spiral() -> Result<Outcome> {
    let gap = spiral::p_identity_gap(200)?;
    let grid = AnnulusGrid::new(1.05, 4.0, 40, 40)?.excluding_real_strip(1e-2);
    let r = numeric_dilatation(spiral::betker, &grid, FD_STEP, Some(spiral::betker_beltrami))?;
    let bound = FRAC_1_SQRT_2 + 1e-3;
    Ok(outcome(
        gap <= 1e-10 && r.sup_dilatation <= bound && r.failures.is_empty(),
        format!(
            "identity gap = {gap:.2e} (tol 1e-10); sup |mu| = {:.6} over {} points (<= 1/sqrt2 + 1e-3)",
            r.sup_dilatation, r.evaluated
        ),
    ))
}

fn c11_pde_round_trip() -> Result<Outcome> {
    let f = AnalyticSample::parse("z+0.05*z^2")?;
    let spec = PdeExtensionSpec::example2(f, 0.1, 0.5, 2.0)?;
    let rep = check_pde_conditions(&spec, &PdeGrids::default())?;
    let grid = AnnulusGrid::new(1.05, 4.0, 40, 40)?;
    let r = numeric_dilatation(|z| pde_extend(&spec, z), &grid, FD_STEP, None as NoField)?;
    Ok(outcome(
        rep.passes(0.1) && r.sup_dilatation <= 0.1 + 1e-3 && r.failures.is_empty(),
        format!(
            "cond_i {}, cond_ii_max = {:.6}, growth_ok {}; sup |mu| = {:.6} (<= 0.101)",
            rep.cond_i, rep.cond_ii_max, rep.growth_ok, r.sup_dilatation
        ),
    ))
}

fn main() -> ExitCode {
    type Check = fn() -> Result<Outcome>;
    let criteria: [(&str, u64, Check); 11] = [
        ("1  sharp a3 reproduction", 10, c1_sharp_a3),
        ("2  sharp bound exceeds k", 1, c2_exceeds_k),
        ("3  Fekete-Szego ordering", 30, c3_fekete_szego),
        ("4  closed-form map", 10, c4_closed_form_map),
        ("5  Beltrami consistency", 60, c5_beltrami),
        ("6  kappa renormalization", 30, c6_kappa),
        ("7  maximum principle", 60, c7_max_principle),
        ("8  extremality functional", 60, c8_lambda),
        ("9  threshold", 1, c9_threshold),
        ("10 spiral example", 30, c10_spiral),
        ("11 PDE round trip", 30, c11_pde_round_trip),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let res = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (ok, detail) = match res {
            Ok(o) => (o.ok && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail}; {:.2}s (budget {budget}s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
