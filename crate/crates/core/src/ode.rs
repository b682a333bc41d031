//! Embedded Dormand–Prince 5(4) integrator for complex-valued systems with
//! PI step-size control and forced step boundaries.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `None` picks one from the first derivative.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, ..Self::default() }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: None, h_min: 1e-14, max_steps: 1_000_000 }
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Integrate `y' = rhs(t, y)` from `t0` to `t1`.
///
/// Every breakpoint strictly inside `(t0, t1)` is hit exactly by a step
/// boundary and the method restarts there. `on_step` sees every accepted
/// step `(t, y)` and may abort the integration by returning an error.
pub fn integrate<F, S>(
    mut rhs: F,
    t0: f64,
    y0: &[Complex64],
    t1: f64,
    breakpoints: &[f64],
    opts: &OdeOptions,
    mut on_step: S,
) -> Result<Vec<Complex64>>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
    S: FnMut(f64, &[Complex64]) -> Result<()>,
{
    assert!(t1 >= t0, "integration runs forward in time");
    let mut stops: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > t0 && b < t1).collect();
    stops.sort_by(f64::total_cmp);
    stops.push(t1);

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut h_hint = opts.h_init;
    for stop in stops {
        if stop <= t {
            continue;
        }
        h_hint = Some(segment(&mut rhs, &mut t, &mut y, stop, h_hint, opts, &mut on_step)?);
    }
    Ok(y)
}

fn err_norm(y: &[Complex64], y_new: &[Complex64], err: &[Complex64], opts: &OdeOptions) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let sum: f64 = y
        .iter()
        .zip(y_new)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum();
    (sum / y.len() as f64).sqrt()
}

fn initial_step<F>(rhs: &mut F, t: f64, y: &[Complex64], f0: &[Complex64], span: f64, opts: &OdeOptions) -> Result<f64>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
{
    let n = y.len().max(1) as f64;
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.norm()).collect();
    let wnorm = |v: &[Complex64]| (v.iter().zip(&sc).map(|(a, s)| (a.norm() / s).powi(2)).sum::<f64>() / n).sqrt();
    let d0 = wnorm(y);
    let d1 = wnorm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<Complex64> = y.iter().zip(f0).map(|(v, f)| v + f * h0).collect();
    let mut f1 = vec![Complex64::default(); y.len()];
    rhs(t + h0, &y1, &mut f1)?;
    let diff: Vec<Complex64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = wnorm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    Ok((100.0 * h0).min(h1).min(span))
}

#[allow(clippy::too_many_arguments)]
fn segment<F, S>(
    rhs: &mut F,
    t: &mut f64,
    y: &mut Vec<Complex64>,
    t_end: f64,
    h_hint: Option<f64>,
    opts: &OdeOptions,
    on_step: &mut S,
) -> Result<f64>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
    S: FnMut(f64, &[Complex64]) -> Result<()>,
{
    let n = y.len();
    let zero = Complex64::default();
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err = vec![zero; n];

    rhs(*t, y, &mut k1)?;
    let span = t_end - *t;
    let mut h = match h_hint {
        Some(h) => h.min(span),
        None => initial_step(rhs, *t, y, &k1, span, opts)?,
    };
    let mut err_prev: f64 = 1e-4;
    let mut last_h = h;
    let mut steps = 0usize;

    while *t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepFailure { t: *t });
        }
        let mut hit_end = false;
        if *t + h >= t_end || (t_end - (*t + h)) < 1e-12 * t_end.abs().max(1.0) {
            h = t_end - *t;
            hit_end = true;
        }
        if h < opts.h_min && !hit_end {
            return Err(Error::StepFailure { t: *t });
        }

        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (h * A21);
        }
        rhs(*t + C2 * h, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        rhs(*t + C3 * h, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        rhs(*t + C4 * h, &tmp, &mut k4)?;
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        rhs(*t + C5 * h, &tmp, &mut k5)?;
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        let t_new = if hit_end { t_end } else { *t + h };
        rhs(t_new, &tmp, &mut k6)?;
        for i in 0..n {
            y_new[i] = y[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * h;
        }
        rhs(t_new, &y_new, &mut k7)?;
        for i in 0..n {
            err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        }
        let en = err_norm(y, &y_new, &err, opts);
        if !en.is_finite() {
            h *= FAC_MIN;
            if h < opts.h_min {
                return Err(Error::StepFailure { t: *t });
            }
            continue;
        }
        if en <= 1.0 {
            let fac = if en == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * en.powf(-ALPHA) * err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
            };
            err_prev = en.max(1e-4);
            *t = t_new;
            std::mem::swap(y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            on_step(*t, y)?;
            last_h = h;
            h *= fac;
        } else {
            let fac = (SAFETY * en.powf(-ALPHA)).clamp(FAC_MIN, 1.0);
            h *= fac;
        }
    }
    Ok(last_h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = integrate(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            0.0,
            &[Complex64::new(0.5, 0.0)],
            1.0,
            &[],
            &OdeOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() },
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((y[0] - Complex64::new(0.5 * (-1.0f64).exp(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn complex_rotation() {
        // y' = i y  =>  y(t) = e^{it}
        let y = integrate(
            |_, y, dy| {
                dy[0] = Complex64::i() * y[0];
                Ok(())
            },
            0.0,
            &[Complex64::new(1.0, 0.0)],
            10.0,
            &[],
            &OdeOptions { rtol: 1e-12, atol: 1e-12, ..Default::default() },
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((y[0] - Complex64::from_polar(1.0, 10.0)).norm() < 1e-9);
    }

    #[test]
    fn breakpoints_are_hit_exactly() {
        let mut seen = Vec::new();
        integrate(
            |t, _, dy| {
                dy[0] = Complex64::new(if t < 0.7 { 1.0 } else { -1.0 }, 0.0);
                Ok(())
            },
            0.0,
            &[Complex64::default()],
            2.0,
            &[0.7],
            &OdeOptions::default(),
            |t, _| {
                seen.push(t);
                Ok(())
            },
        )
        .unwrap();
        assert!(seen.contains(&0.7));
        assert_eq!(*seen.last().unwrap(), 2.0);
    }

    #[test]
    fn kinked_rhs_is_exact_with_breakpoint() {
        let y = integrate(
            |t, _, dy| {
                dy[0] = Complex64::new((t - 0.7).abs(), 0.0);
                Ok(())
            },
            0.0,
            &[Complex64::default()],
            2.0,
            &[0.7],
            &OdeOptions::default(),
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((y[0].re - 1.09).abs() < 1e-12);
    }

    #[test]
    fn callback_error_aborts() {
        let r = integrate(
            |_, y, dy| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            &[Complex64::new(1.0, 0.0)],
            5.0,
            &[],
            &OdeOptions::default(),
            |t, _| if t > 1.0 { Err(Error::StepFailure { t }) } else { Ok(()) },
        );
        assert!(matches!(r, Err(Error::StepFailure { .. })));
    }
}
