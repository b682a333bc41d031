//! The extremal problem for `|a_3|` over Becker-extendible maps: sharp and
//! comparison bounds, the optimal control synthesized from the maximum
//! principle, and the Hamilton–Krushkal functional of the extremal field.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::drivers::{extremal_t0, HerglotzDriver};
use crate::error::{check_k, Error, Result};
use crate::laurent::Laurent;
use crate::quad::{self, Minimum};

/// `k(1 + e^{1-1/k}(1+k))`.
pub fn sharp_a3_bound(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(k * (1.0 + (1.0 - 1.0 / k).exp() * (1.0 + k)))
}

/// `sharp_a3_bound(k) − k = k(1+k)e^{1−1/k}`, evaluated without cancellation.
pub fn sharp_a3_excess(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(k * (1.0 + k) * (1.0 - 1.0 / k).exp())
}

/// `(1 + 2e^{-2α/(1-α)})k + 4αk²` for `α ∈ (0, 1)`.
pub fn fekete_szego_objective(k: f64, alpha: f64) -> f64 {
    (1.0 + 2.0 * (-2.0 * alpha / (1.0 - alpha)).exp()) * k + 4.0 * alpha * k * k
}

/// Minimum of [`fekete_szego_objective`] over `α`, located by a 200-point
/// scan refined by golden section to `tol` in `α`.
pub fn fekete_szego_bound(k: f64, tol: f64) -> Result<Minimum> {
    check_k(k)?;
    if !(tol > 0.0) {
        return Err(Error::Range(format!("tolerance must be positive, got {tol}")));
    }
    Ok(quad::scan_then_golden(|a| fekete_szego_objective(k, a), 0.0, 1.0, 200, tol))
}

/// `2k/(n-1)`.
pub fn krushkal_bound(k: f64, n: u32) -> Result<f64> {
    check_k(k)?;
    if n < 2 {
        return Err(Error::Range(format!("coefficient index n = {n} must be at least 2")));
    }
    Ok(2.0 * k / (n - 1) as f64)
}

/// Closed-form optimal control of the `|a_3|` problem.
///
/// For `a ≠ 0` the control is `c₁*(t) = −e^t a/(1+k)` until it reaches the
/// boundary value `−2 sgn a` at `t₀`; the degenerate synthesis `a = 0` has
/// `c₁* ≡ 0` and belongs to `z/(1 − kz²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSynthesis {
    pub k: f64,
    pub t0: f64,
    pub a: f64,
}

impl ControlSynthesis {
    pub fn c1(&self, t: f64) -> Complex64 {
        if self.a == 0.0 {
            return Complex64::default();
        }
        let free = -(t.exp()) * self.a / (1.0 + self.k);
        Complex64::new(if t < self.t0 { free } else { -2.0 * self.a.signum() }, 0.0)
    }

    /// `c₂* = (Re c₁)² + i Re c₁ Im c₁ − 2`.
    pub fn c2(&self, t: f64) -> Complex64 {
        let c1 = self.c1(t);
        Complex64::new(c1.re * c1.re - 2.0, c1.re * c1.im)
    }

    /// Second Taylor coefficient of the driver, `k(c₂ − (1−k)c₁²/2)`.
    pub fn p2(&self, t: f64) -> Complex64 {
        let c1 = self.c1(t);
        self.k * (self.c2(t) - 0.5 * (1.0 - self.k) * c1 * c1)
    }

    /// `a₂(t)` along the synthesized trajectory (`a₂' = −k e^{−t} c₁`).
    pub fn a2(&self, t: f64) -> f64 {
        if self.a == 0.0 {
            return 0.0;
        }
        let k = self.k;
        let s = self.a.signum();
        let rate = 2.0 * k * (-self.t0).exp() * s;
        if t <= self.t0 {
            rate * t
        } else {
            rate * self.t0 + 2.0 * k * s * ((-self.t0).exp() - (-t).exp())
        }
    }

    /// `a − 2k(1+t₀)a/(1+k)`, zero when `t₀` is the switching time.
    pub fn fixed_point_residual(&self) -> f64 {
        self.a - 2.0 * self.k * (1.0 + self.t0) * self.a / (1.0 + self.k)
    }

    /// Driver realizing the control.
    pub fn driver(&self) -> Result<HerglotzDriver> {
        if self.a == 0.0 {
            HerglotzDriver::constant_power(self.k, 0.0, 2)
        } else if self.a > 0.0 {
            HerglotzDriver::extremal_a3(self.k)
        } else {
            let plus = HerglotzDriver::extremal_a3(self.k)?;
            HerglotzDriver::custom(self.k, true, plus.breakpoints(), "extremal-a3-minus", move |z, t| {
                plus.eval(-z, t)
            })
        }
    }

    /// The mirror synthesis for `f₋(z) = −f₊(−z)`.
    pub fn minus(&self) -> Self {
        Self { a: -self.a, ..*self }
    }

    /// Real part of the Hamiltonian at `(c₁, c₂)` with `ψ₂ = a − 2a₂(t)`,
    /// `ψ₃ = 1`.
    pub fn hamiltonian(&self, t: f64, c1: Complex64, c2: Complex64) -> f64 {
        let k = self.k;
        let a2 = self.a2(t);
        let psi2 = self.a - 2.0 * a2;
        let e1 = (-t).exp();
        let h = -k * e1 * c1 * psi2 - k * (e1 * e1 * (c2 - 0.5 * (1.0 - k) * c1 * c1) + 2.0 * e1 * c1 * a2);
        h.re
    }
}

/// Synthesis with the `+` sign: `t₀ = (1−k)/(2k)`, `a = 2(1+k)e^{−t₀}`.
pub fn synthesize_control(k: f64) -> Result<ControlSynthesis> {
    check_k(k)?;
    let t0 = extremal_t0(k);
    Ok(ControlSynthesis { k, t0, a: 2.0 * (1.0 + k) * (-t0).exp() })
}

/// The degenerate synthesis `a = 0`.
pub fn degenerate_control(k: f64) -> Result<ControlSynthesis> {
    check_k(k)?;
    Ok(ControlSynthesis { k, t0: extremal_t0(k), a: 0.0 })
}

/// Discretization of the admissible set `|c₁| ≤ 2`,
/// `|2c₂ − c₁²| ≤ 4 − |c₁|²`: `n_radius × n_angle` polar points for `c₁`
/// (radii `0..=2`, angles `2πj/n_angle`) and `n_c2` points on the boundary
/// circle of the `c₂` disk, where the affine-in-`c₂` Hamiltonian peaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlGrid {
    pub n_radius: usize,
    pub n_angle: usize,
    pub n_c2: usize,
}

impl Default for ControlGrid {
    fn default() -> Self {
        Self { n_radius: 64, n_angle: 64, n_c2: 32 }
    }
}

impl ControlGrid {
    pub fn spacing(&self) -> f64 {
        2.0 / (self.n_radius - 1) as f64
    }

    fn points(&self) -> Vec<(Complex64, Complex64)> {
        let mut out = Vec::with_capacity(self.n_radius * self.n_angle * self.n_c2);
        for i in 0..self.n_radius {
            let r = 2.0 * i as f64 / (self.n_radius - 1) as f64;
            let angles = if i == 0 { 1 } else { self.n_angle };
            for j in 0..angles {
                let c1 = Complex64::from_polar(r, TAU * j as f64 / self.n_angle as f64);
                let radius = 0.5 * (4.0 - r * r).max(0.0);
                let c2_count = if radius == 0.0 { 1 } else { self.n_c2 };
                for l in 0..c2_count {
                    out.push((c1, 0.5 * c1 * c1 + Complex64::from_polar(radius, TAU * l as f64 / self.n_c2 as f64)));
                }
            }
        }
        out
    }
}

/// Per-time outcome of the maximum-principle check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPrincipleSample {
    pub t: f64,
    pub grid_argmax: (Complex64, Complex64),
    /// `Re H(grid max) − Re H(c₁*, c₂*)`.
    pub gap: f64,
    /// Distance from the grid maximizer to `(c₁*, c₂*)` in `c₁`.
    pub c1_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleReport {
    pub samples: Vec<MaxPrincipleSample>,
    /// Largest `|gap|` over the sampled times.
    pub max_gap: f64,
}

/// Compare the synthesized control with a brute-force maximization of the
/// Hamiltonian over `grid` at each time in `t_samples`.
pub fn verify_max_principle(s: &ControlSynthesis, t_samples: &[f64], grid: &ControlGrid) -> Result<MaxPrincipleReport> {
    if grid.n_radius < 2 || grid.n_angle < 2 || grid.n_c2 < 2 {
        return Err(Error::Range("control grid resolution must be at least 2".into()));
    }
    let pts = grid.points();
    let samples: Vec<MaxPrincipleSample> = t_samples
        .par_iter()
        .map(|&t| {
            let (best, value) = pts
                .iter()
                .map(|&(c1, c2)| ((c1, c2), s.hamiltonian(t, c1, c2)))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            let star = s.hamiltonian(t, s.c1(t), s.c2(t));
            MaxPrincipleSample { t, grid_argmax: best, gap: value - star, c1_distance: (best.0 - s.c1(t)).norm() }
        })
        .collect();
    let max_gap = samples.iter().map(|x| x.gap.abs()).fold(0.0, f64::max);
    Ok(MaxPrincipleReport { samples, max_gap })
}

fn check_integrable(phi: &Laurent) -> Result<()> {
    match phi.max_power() {
        Some(e) if e > -3 => Err(Error::Range(format!(
            "quadratic differential must only contain powers z^-3 and below, found z^{e}"
        ))),
        _ => Ok(()),
    }
}

/// `Λ(φ) = (1/k) ∬_{|z|>1} φ μ dx dy` for the extremal field, in closed form:
/// `Λ/2π = −[((1+log ρ)/ρ) c₃ + ((ρ² − 2log ρ − 1)/2) Σ_{m≥4} (−1)^m c_m ρ^{2−m}]`,
/// `ρ = e^{t₀}`.
pub fn hk_lambda(k: f64, phi: &Laurent) -> Result<Complex64> {
    check_k(k)?;
    check_integrable(phi)?;
    let t0 = extremal_t0(k);
    let rho = t0.exp();
    let mut acc = Complex64::default();
    for (e, c) in phi.terms() {
        let m = -e;
        acc += if m == 3 {
            (1.0 + t0) / rho * c
        } else {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * (rho * rho - 2.0 * t0 - 1.0) * sign * c * rho.powi(2 - m)
        };
    }
    Ok(-TAU * acc)
}

/// Bound on `|∬_{|z|>R} φ μ|/k`: `Σ |c_m| 2π R^{2−m}/(m−2)`.
pub fn tail_bound(phi: &Laurent, r_max: f64) -> f64 {
    phi.terms().map(|(e, c)| c.norm() * TAU * r_max.powi(2 + e) / (-e - 2) as f64).sum()
}

/// Number of angular nodes used by the polar quadratures.
pub const ANGULAR_NODES: usize = 2048;

/// Polar quadrature of `∬_{1<|z|<R}` with `g_inner` on `1 < |z| < split` and
/// `g_outer` beyond: trapezoid rule in `θ` (a node sits on the negative real
/// axis) and adaptive Simpson in `r`, with `u = 1/r` in the outer zone.
fn polar_quadrature<G, H>(g_inner: G, g_outer: H, split: f64, r_max: f64, tol: f64) -> Result<Complex64>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
    H: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let n = ANGULAR_NODES;
    let dtheta = TAU / n as f64;
    let radial_tol = tol / TAU;
    let parts: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let u = if 2 * j == n { Complex64::new(-1.0, 0.0) } else { Complex64::from_polar(1.0, j as f64 * dtheta) };
            let inner = if split > 1.0 {
                quad::simpson(|r| Ok(g_inner(u * r)? * r), 1.0, split, radial_tol)?
            } else {
                Complex64::default()
            };
            let outer =
                quad::simpson(|s| Ok(g_outer(u / s)? / (s * s * s)), 1.0 / r_max, 1.0 / split.max(1.0), radial_tol)?;
            Ok((inner + outer) * dtheta)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().sum())
}

/// `Λ(φ)` by direct quadrature over `1 < |z| < r_max`.
pub fn hk_lambda_quadrature(k: f64, phi: &Laurent, r_max: f64, tol: f64) -> Result<Complex64> {
    check_k(k)?;
    check_integrable(phi)?;
    let bound = tail_bound(phi, r_max);
    if bound > tol {
        return Err(Error::Truncation { bound, tol });
    }
    let rho = extremal_t0(k).exp();
    let inner = |z: Complex64| {
        let zeta = z / z.norm();
        let w = rho + z;
        // on the negative axis the unimodular factor conj(w)/w is 1 up to r = ρ
        let ratio = if w.im == 0.0 { Complex64::new(1.0, 0.0) } else { w.conj() / w };
        Ok(-phi.eval(z)? * zeta.powi(4) * ratio)
    };
    let outer = |z: Complex64| Ok(-phi.eval(z)? * (z / z.norm()).powi(3));
    polar_quadrature(inner, outer, rho, r_max, 0.1 * tol)
}

/// `‖φ‖ = ∬_{|z|>1} |φ| dx dy`; exact `2π|c|/(m−2)` for a monomial.
pub fn l1_norm(phi: &Laurent, tol: f64) -> Result<f64> {
    check_integrable(phi)?;
    if let Some((c, e)) = phi.as_monomial() {
        return Ok(TAU * c.norm() / (-e - 2) as f64);
    }
    if phi.is_zero() {
        return Ok(0.0);
    }
    // in u = 1/r the integrand |φ(e^{iθ}/u)|/u³ tends to |c₃| as u → 0
    let n = ANGULAR_NODES;
    let dtheta = TAU / n as f64;
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|j| {
            let u = Complex64::from_polar(1.0, j as f64 * dtheta);
            let v = quad::simpson(
                |s| {
                    if s == 0.0 {
                        return Ok(Complex64::new(phi.coeff(-3).norm(), 0.0));
                    }
                    Ok(Complex64::new(phi.eval(u / s)?.norm() / (s * s * s), 0.0))
                },
                0.0,
                1.0,
                tol / TAU,
            )?;
            Ok(v.re * dtheta)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    Ok(total)
}

/// One row of the comparison of upper bounds for `|a_3|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub k: f64,
    pub becker_sharp: f64,
    pub fekete_szego: f64,
    pub krushkal: f64,
}

pub fn bound_row(k: f64) -> Result<BoundRow> {
    Ok(BoundRow {
        k,
        becker_sharp: sharp_a3_bound(k)?,
        fekete_szego: fekete_szego_bound(k, 1e-10)?.value,
        krushkal: krushkal_bound(k, 3)?,
    })
}

pub fn bounds_table(k_grid: &[f64]) -> Result<Vec<BoundRow>> {
    k_grid.par_iter().map(|&k| bound_row(k)).collect()
}

pub const BOUNDS_HEADER: &str = "k,becker_sharp,fekete_szego,krushkal";

/// CSV with [`BOUNDS_HEADER`]; values use shortest round-trip formatting.
pub fn bounds_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from(BOUNDS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.k, r.becker_sharp, r.fekete_szego, r.krushkal);
    }
    out
}
