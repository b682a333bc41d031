//! One-dimensional numerics: adaptive Simpson quadrature, golden-section
//! minimization and a safeguarded monotone root finder.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of a complex integrand over `[a, b]`.
pub fn simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if a == b {
        return Ok(Complex64::default());
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol || depth == 0 || (b - a).abs() < 1e-13 * a.abs().max(1.0) {
        if depth == 0 && delta.norm() > 15.0 * tol {
            return Err(Error::Convergence(format!(
                "adaptive Simpson exhausted its depth on [{a}, {b}] (residual {:.3e})",
                delta.norm()
            )));
        }
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Adaptive Simpson with mandatory split points (discontinuities of the
/// integrand or of its derivatives).
pub fn simpson_split<F>(f: F, a: f64, b: f64, splits: &[f64], tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let mut knots: Vec<f64> = splits.iter().copied().filter(|&s| s > a && s < b).collect();
    knots.sort_by(f64::total_cmp);
    knots.insert(0, a);
    knots.push(b);
    let share = tol / (knots.len() - 1) as f64;
    let mut acc = Complex64::default();
    for w in knots.windows(2) {
        acc += simpson(&f, w[0], w[1], share)?;
    }
    Ok(acc)
}

/// Result of a bracketed scalar minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search on `[a, b]` until the bracket is narrower than `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Minimum {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // the midpoint can lose to an interior probe at the last step
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .map(|(x, value)| Minimum { x, value })
        .unwrap()
}

/// Coarse uniform scan over the open interval `(a, b)` followed by golden
/// section refinement around the best sample.
pub fn scan_then_golden<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize, tol: f64) -> Minimum {
    let step = (b - a) / (samples + 1) as f64;
    let (best_i, _) = (1..=samples)
        .map(|i| (i, f(a + step * i as f64)))
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    let lo = a + step * (best_i - 1) as f64;
    let hi = a + step * (best_i + 1) as f64;
    golden_section(&f, lo, hi, tol)
}

/// Solve `g(x) = target` for increasing `g` on `[lo, hi]` using Newton steps
/// safeguarded by bisection. `g` returns `(value, derivative)`.
pub fn monotone_root<G>(g: G, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<(f64, f64)>,
{
    let (glo, _) = g(lo)?;
    let (ghi, _) = g(hi)?;
    if target < glo - tol || target > ghi + tol {
        return Err(Error::Range(format!("target {target} outside [{glo}, {ghi}]")));
    }
    let mut x = lo + (hi - lo) * ((target - glo) / (ghi - glo)).clamp(0.0, 1.0);
    for _ in 0..200 {
        let (gx, dg) = g(x)?;
        let r = gx - target;
        if r.abs() <= tol {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - r / dg;
        x = if dg > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::Convergence(format!("monotone root for target {target} did not converge")))
}
