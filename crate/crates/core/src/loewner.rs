//! Radial Loewner–Kufarev evolution `dw/dt = -w p(w, t)`.
//!
//! Limits are taken on the rescaled variable `u = e^{Q(t)} w` with
//! `Q(t) = ∫_0^t p(0, s) ds`, which converges instead of decaying. For
//! normalized drivers `Q(t) = t`. The infinite horizon is truncated at
//! `T = 10, 20, 40, 80` past the start time, stopping once two successive
//! values agree to the requested tolerance.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::drivers::HerglotzDriver;
use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::quad;
use crate::series::TruncatedSeries;

/// Horizons (past the start time) at which the limit is sampled.
pub const HORIZONS: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

/// Size of the implicit Euler step used to leave the unit circle.
pub const BOUNDARY_STEP: f64 = 1e-6;

/// Above this modulus a starting point is treated as a boundary point.
const BOUNDARY_EPS: f64 = 1e-14;

/// Largest tolerated `|p_0(t) - 1|` for a driver fed to the series flow.
const NORMALIZATION_TOL: f64 = 1e-8;

/// Sampled solution `w(z0, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl Trajectory {
    pub fn end(&self) -> Complex64 {
        *self.values.last().unwrap()
    }
}

fn ode_opts(tol: f64) -> OdeOptions {
    OdeOptions { rtol: tol, atol: tol, ..OdeOptions::default() }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Range(format!("tolerance must be positive, got {tol}")))
    }
}

/// One implicit Euler step `w1 = w0 - h w1 p(w1, t + h)` solved by fixed
/// point iteration; it moves a boundary point into the open disk.
fn implicit_euler_step(d: &HerglotzDriver, w0: Complex64, t: f64, h: f64) -> Result<Complex64> {
    let mut w = w0;
    for _ in 0..100 {
        let next = w0 / (1.0 + h * d.eval_raw(w, t + h)?);
        if (next - w).norm() <= 1e-16 * w0.norm() {
            return Ok(next);
        }
        w = next;
    }
    Err(Error::Convergence(format!("implicit boundary step from {w0} did not converge")))
}

/// Integrate the trajectory through `z0` on `[0, t_end]`, recording every
/// accepted step. `|w|` is checked to decrease strictly along the way.
pub fn solve_trajectory(d: &HerglotzDriver, z0: Complex64, t_end: f64, tol: f64) -> Result<Trajectory> {
    check_tol(tol)?;
    if !(t_end > 0.0) {
        return Err(Error::Range(format!("horizon T = {t_end} must be positive")));
    }
    if z0.norm() > 1.0 + 1e-12 {
        return Err(Error::Domain { z: z0, reason: "trajectories start in the closed unit disk" });
    }
    let mut times = vec![0.0];
    let mut values = vec![z0];
    let (mut t, mut w) = (0.0, z0);
    if z0.norm() >= 1.0 - BOUNDARY_EPS {
        w = implicit_euler_step(d, z0, 0.0, BOUNDARY_STEP)?;
        t = BOUNDARY_STEP;
        times.push(t);
        values.push(w);
    }
    let opts = OdeOptions { rtol: tol, atol: tol * 1e-3, ..OdeOptions::default() };
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| -> Result<()> {
        dy[0] = -y[0] * d.eval_raw(y[0], t)?;
        Ok(())
    };
    ode::integrate(rhs, t, &[w], t_end, &d.breakpoints(), &opts, |t, y| {
        let prev = values.last().unwrap().norm();
        let now = y[0].norm();
        if prev > 0.0 && !(now < prev) {
            return Err(Error::Convergence(format!("|w| failed to decrease at t = {t}: {prev} -> {now}")));
        }
        times.push(t);
        values.push(y[0]);
        Ok(())
    })?;
    Ok(Trajectory { times, values })
}

/// Evaluate `Q(t) = ∫_0^t p(0, s) ds`.
pub fn q_integral(d: &HerglotzDriver, t: f64, tol: f64) -> Result<Complex64> {
    if d.is_normalized() {
        return Ok(Complex64::new(t, 0.0));
    }
    quad::simpson_split(|s| d.eval_raw(Complex64::default(), s), 0.0, t, &d.breakpoints(), tol)
}

/// `f_t(z) = lim_{s→∞} e^{Q(s)} w(s)` with `w(t) = z`.
pub fn chain_at(d: &HerglotzDriver, t: f64, z: Complex64, tol: f64) -> Result<Complex64> {
    check_tol(tol)?;
    if !(t >= 0.0) {
        return Err(Error::Range(format!("chain time t = {t} must be nonnegative")));
    }
    if z.norm() > 1.0 + 1e-12 {
        return Err(Error::Domain { z, reason: "chain elements are evaluated on the closed unit disk" });
    }
    if z.norm() == 0.0 {
        return Ok(Complex64::default());
    }
    let normalized = d.is_normalized();
    let mut q = q_integral(d, t, tol * 1e-2)?;
    let (mut s, mut w) = (t, z);
    if z.norm() >= 1.0 - BOUNDARY_EPS {
        w = implicit_euler_step(d, z, t, BOUNDARY_STEP)?;
        q = if normalized {
            Complex64::new(t + BOUNDARY_STEP, 0.0)
        } else {
            let origin = Complex64::default();
            q + 0.5 * BOUNDARY_STEP * (d.eval_raw(origin, t)? + d.eval_raw(origin, t + BOUNDARY_STEP)?)
        };
        s = t + BOUNDARY_STEP;
    }
    let u0 = q.exp() * w;
    let origin = Complex64::default();
    let breakpoints = d.breakpoints();
    let opts = ode_opts(tol);

    let mut state = if normalized { vec![u0] } else { vec![u0, q] };
    let mut start = s;
    let mut prev: Option<Complex64> = None;
    for horizon in HORIZONS {
        let stop = t + horizon;
        state = if normalized {
            ode::integrate(
                |s, y, dy| {
                    let w = y[0] * (-s).exp();
                    dy[0] = y[0] * (1.0 - d.eval_raw(w, s)?);
                    Ok(())
                },
                start,
                &state,
                stop,
                &breakpoints,
                &opts,
                |_, _| Ok(()),
            )?
        } else {
            ode::integrate(
                |s, y, dy| {
                    let p0 = d.eval_raw(origin, s)?;
                    let w = y[0] * (-y[1]).exp();
                    dy[0] = y[0] * (p0 - d.eval_raw(w, s)?);
                    dy[1] = p0;
                    Ok(())
                },
                start,
                &state,
                stop,
                &breakpoints,
                &opts,
                |_, _| Ok(()),
            )?
        };
        start = stop;
        let value = state[0];
        if let Some(p) = prev {
            if (value - p).norm() < tol * value.norm().max(1.0) {
                return Ok(value);
            }
        }
        prev = Some(value);
    }
    Err(Error::Convergence(format!("chain value at t = {t}, z = {z} not stable by horizon 80")))
}

/// The univalent map `f = f_0` generated by the driver, `|z| < 1`.
pub fn map_limit(d: &HerglotzDriver, z: Complex64, tol: f64) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(Error::Domain { z, reason: "the generated map is evaluated in the open unit disk" });
    }
    chain_at(d, 0.0, z, tol)
}

/// A driver together with integration settings and a per-start-point cache
/// of solved trajectories.
pub struct LoewnerSolution {
    driver: HerglotzDriver,
    horizon: f64,
    tol: f64,
    cache: Mutex<HashMap<(u64, u64), Arc<Trajectory>>>,
}

impl LoewnerSolution {
    pub fn new(driver: HerglotzDriver, horizon: f64, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        if !(horizon > 0.0) {
            return Err(Error::Range(format!("horizon T = {horizon} must be positive")));
        }
        Ok(Self { driver, horizon, tol, cache: Mutex::new(HashMap::new()) })
    }

    pub fn driver(&self) -> &HerglotzDriver {
        &self.driver
    }

    pub fn trajectory(&self, z0: Complex64) -> Result<Arc<Trajectory>> {
        let key = (z0.re.to_bits(), z0.im.to_bits());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let tr = Arc::new(solve_trajectory(&self.driver, z0, self.horizon, self.tol)?);
        self.cache.lock().unwrap().insert(key, tr.clone());
        Ok(tr)
    }

    pub fn map_limit(&self, z: Complex64) -> Result<Complex64> {
        map_limit(&self.driver, z, self.tol)
    }
}

// ---------------------------------------------------------------------------
// Coefficient evolution.

/// Smallest DFT size used for the driver's Taylor coefficients up to `order`.
fn min_dft_size(order: usize) -> usize {
    (4 * order).max(8).next_power_of_two()
}

/// Taylor coefficients `p_0(t), ..., p_order(t)` by DFT on `|z| = 1/2`.
///
/// The aliasing error is bounded through the Cauchy estimate with the
/// maximum of `|p|` on `|z| = 3/4`; the number of nodes is doubled until
/// that bound drops below `1e-14` relative to the maximum.
pub fn taylor_dft(d: &HerglotzDriver, t: f64, order: usize) -> Result<Vec<Complex64>> {
    let mut sup: f64 = 0.0;
    for j in 0..64 {
        sup = sup.max(d.eval_raw(Complex64::from_polar(0.75, TAU * j as f64 / 64.0), t)?.norm());
    }
    let mut m = min_dft_size(order);
    loop {
        let q = (2.0f64 / 3.0).powi(m as i32);
        let bound = sup * (4.0f64 / 3.0).powi(order as i32) * q / (1.0 - q);
        if bound <= 1e-14 * sup.max(1.0) || m >= 4096 {
            break;
        }
        m *= 2;
    }
    let r = 0.5;
    let samples: Vec<Complex64> = (0..m)
        .map(|j| d.eval_raw(Complex64::from_polar(r, TAU * j as f64 / m as f64), t))
        .collect::<Result<_>>()?;
    Ok((0..=order)
        .map(|n| {
            let mut acc = Complex64::default();
            for (j, v) in samples.iter().enumerate() {
                acc += v * Complex64::from_polar(1.0, -TAU * (j * n) as f64 / m as f64);
            }
            acc / (m as f64 * r.powi(n as i32))
        })
        .collect())
}

/// The evolving coefficients `a_2(t), ..., a_N(t)` of `e^t w(z, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFlow {
    pub order: usize,
    /// Checkpoint times.
    pub times: Vec<f64>,
    /// `states[i][n - 2] = a_n(times[i])`.
    pub states: Vec<Vec<Complex64>>,
}

impl CoefficientFlow {
    pub fn limit(&self) -> &[Complex64] {
        self.states.last().unwrap()
    }
}

fn series_rhs(p: &[Complex64], t: f64, a: &[Complex64], order: usize) -> Vec<Complex64> {
    // u = z + a_2 z^2 + ... ;  du/dt = -u Σ_{m>=1} p_m e^{-mt} u^m
    let mut coeffs = vec![Complex64::default(), Complex64::new(1.0, 0.0)];
    coeffs.extend_from_slice(a);
    let u = TruncatedSeries::from_coeffs(order, &coeffs);
    let v = u.scale(Complex64::new((-t).exp(), 0.0));
    // Horner in v: V = v (p_1 + v (p_2 + ... + v p_{N-1}))
    let mut acc = TruncatedSeries::constant(order, p[order - 1]);
    for m in (1..order - 1).rev() {
        acc = &(&v * &acc) + &TruncatedSeries::constant(order, p[m]);
    }
    let big_v = &v * &acc;
    let rhs = -&(&u * &big_v);
    rhs.coeffs()[2..].to_vec()
}

fn checked_taylor(d: &HerglotzDriver, t: f64, order: usize) -> Result<Vec<Complex64>> {
    let p = taylor_dft(d, t, order)?;
    if (p[0] - 1.0).norm() > NORMALIZATION_TOL {
        return Err(Error::Series(format!(
            "driver is not normalized: p(0, {t}) = {} (renormalize it first)",
            p[0]
        )));
    }
    Ok(p)
}

/// Evolve `a_2..a_N` and record them at every horizon checkpoint until
/// successive checkpoints agree to `tol`.
pub fn coefficient_flow_path(d: &HerglotzDriver, order: usize, tol: f64) -> Result<CoefficientFlow> {
    check_tol(tol)?;
    if order < 2 {
        return Err(Error::Range(format!("series order N = {order} must be at least 2")));
    }
    checked_taylor(d, 0.0, order)?;
    let opts = ode_opts((tol * 1e-3).max(1e-14));
    let breakpoints = d.breakpoints();
    let mut flow = CoefficientFlow {
        order,
        times: vec![0.0],
        states: vec![vec![Complex64::default(); order - 1]],
    };
    let mut start = 0.0;
    for horizon in HORIZONS {
        let state = ode::integrate(
            |t, y, dy| {
                let p = checked_taylor(d, t, order)?;
                dy.copy_from_slice(&series_rhs(&p, t, y, order));
                Ok(())
            },
            start,
            flow.limit(),
            horizon,
            &breakpoints,
            &opts,
            |_, _| Ok(()),
        )?;
        start = horizon;
        let change = state.iter().zip(flow.limit()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        flow.times.push(horizon);
        flow.states.push(state);
        if flow.times.len() > 2 && change < tol {
            return Ok(flow);
        }
    }
    Err(Error::Convergence(format!("coefficients a_2..a_{order} not stable by horizon 80")))
}

/// Limits `(a_2, ..., a_N)` of the coefficient evolution.
pub fn coefficient_flow(d: &HerglotzDriver, order: usize, tol: f64) -> Result<Vec<Complex64>> {
    Ok(coefficient_flow_path(d, order, tol)?.limit().to_vec())
}

/// Dedicated two-coefficient integrator:
/// `a_2' = -e^{-t} p_1`, `a_3' = -e^{-2t} p_2 - 2 e^{-t} p_1 a_2`.
///
/// Built-in drivers supply `p_1, p_2` exactly from their rational form;
/// custom drivers fall back to the DFT.
pub fn a2_a3_flow(d: &HerglotzDriver, tol: f64) -> Result<(Complex64, Complex64)> {
    check_tol(tol)?;
    let coeffs = |t: f64| -> Result<Vec<Complex64>> {
        match d.taylor_exact(t, 2) {
            Some(p) => p,
            None => taylor_dft(d, t, 2),
        }
    };
    let p = coeffs(0.0)?;
    if (p[0] - 1.0).norm() > NORMALIZATION_TOL {
        return Err(Error::Series(format!("driver is not normalized: p(0, 0) = {}", p[0])));
    }
    let opts = ode_opts((tol * 1e-3).max(1e-14));
    let breakpoints = d.breakpoints();
    let mut state = vec![Complex64::default(); 2];
    let mut start = 0.0;
    let mut prev: Option<Vec<Complex64>> = None;
    for horizon in HORIZONS {
        state = ode::integrate(
            |t, y, dy| {
                let p = coeffs(t)?;
                let e1 = (-t).exp();
                dy[0] = -e1 * p[1];
                dy[1] = -e1 * e1 * p[2] - 2.0 * e1 * p[1] * y[0];
                Ok(())
            },
            start,
            &state,
            horizon,
            &breakpoints,
            &opts,
            |_, _| Ok(()),
        )?;
        start = horizon;
        if let Some(pr) = &prev {
            if (state[0] - pr[0]).norm().max((state[1] - pr[1]).norm()) < tol {
                return Ok((state[0], state[1]));
            }
        }
        prev = Some(state.clone());
    }
    Err(Error::Convergence("a_2, a_3 not stable by horizon 80".into()))
}
