//! Herglotz drivers `p(z, t)` for the radial Loewner–Kufarev equation.
//!
//! A driver carries a declared dilatation bound `k`; for the built-in
//! families the Becker condition `|(p - 1)/(p + 1)| <= k` holds by
//! construction, for custom drivers it is verified by sampling.

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{check_k, Error, Result};
use crate::quad;
use crate::series::TruncatedSeries;

/// Radius used to probe the boundary behaviour of a driver.
pub const BOUNDARY_RADIUS: f64 = 1.0 - 1e-9;

/// Slack on `|z| <= 1` absorbing the rounding of `e^{iθ}`.
const DOMAIN_SLACK: f64 = 1e-12;

type DriverFn = dyn Fn(Complex64, f64) -> Result<Complex64> + Send + Sync;

/// Family tag of a driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    ConstantPower,
    ExtremalA3,
    Blaschke,
    Custom,
}

#[derive(Clone)]
enum Family {
    /// `p = (1 - c z^n)/(1 + c z^n)` with `c = k e^{-iθ}`.
    ConstantPower { theta: f64, n: u32 },
    /// Extremal driver for `Re a_3` with the `+` sign choice.
    ExtremalA3 { t0: f64 },
    /// `p = (1 + k ψ_t)/(1 - k ψ_t)`, `ψ_t` a Blaschke product with zeros `e^{-t} a_j`.
    Blaschke { alpha: f64, zeros: Vec<Complex64> },
    Custom { eval: Arc<DriverFn>, breakpoints: Vec<f64>, label: String },
}

/// A time-dependent Herglotz function with a declared Becker bound.
#[derive(Clone)]
pub struct HerglotzDriver {
    k: f64,
    family: Family,
    normalized: bool,
}

impl fmt::Debug for HerglotzDriver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("HerglotzDriver");
        s.field("k", &self.k).field("normalized", &self.normalized);
        match &self.family {
            Family::ConstantPower { theta, n } => s.field("family", &"ConstantPower").field("theta", theta).field("n", n),
            Family::ExtremalA3 { t0 } => s.field("family", &"ExtremalA3").field("t0", t0),
            Family::Blaschke { alpha, zeros } => s.field("family", &"Blaschke").field("alpha", alpha).field("zeros", zeros),
            Family::Custom { label, breakpoints, .. } => {
                s.field("family", &"Custom").field("label", label).field("breakpoints", breakpoints)
            }
        };
        s.finish()
    }
}

/// The Cayley-type maps attached to a bound `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyData {
    pub k: f64,
    /// `K = (1 + k)/(1 - k)`.
    pub big_k: f64,
}

impl CayleyData {
    pub fn new(k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k, big_k: (1.0 + k) / (1.0 - k) })
    }

    /// `H(ζ) = (ζ - 1)/(ζ + 1)`, right half-plane onto the unit disk.
    pub fn h(zeta: Complex64) -> Complex64 {
        (zeta - 1.0) / (zeta + 1.0)
    }

    /// `H^{-1}(w) = (1 + w)/(1 - w)`.
    pub fn h_inv(w: Complex64) -> Complex64 {
        (1.0 + w) / (1.0 - w)
    }

    /// `L(z) = (1 + K z)/(K + z)`, right half-plane onto `U(k)`, `L(1) = 1`.
    pub fn l(&self, z: Complex64) -> Complex64 {
        (1.0 + self.big_k * z) / (self.big_k + z)
    }
}

/// `κ(k) = 2k/(1 + k²)`, the bound after renormalizing a driver.
pub fn kappa(k: f64) -> f64 {
    2.0 * k / (1.0 + k * k)
}

/// Start time of the free arc of the extremal driver, `(1 - k)/(2k)`.
pub fn extremal_t0(k: f64) -> f64 {
    (1.0 - k) / (2.0 * k)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl HerglotzDriver {
    pub fn constant_power(k: f64, theta: f64, n: u32) -> Result<Self> {
        check_k(k)?;
        if n == 0 {
            return Err(Error::Range("power n must be a positive integer".into()));
        }
        Ok(Self { k, family: Family::ConstantPower { theta, n }, normalized: true })
    }

    pub fn extremal_a3(k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k, family: Family::ExtremalA3 { t0: extremal_t0(k) }, normalized: true })
    }

    /// Blaschke driver; it is normalized iff one of the zeros is the origin.
    pub fn blaschke(k: f64, alpha: f64, zeros: Vec<Complex64>) -> Result<Self> {
        check_k(k)?;
        if zeros.is_empty() {
            return Err(Error::Range("a Blaschke driver needs at least one zero".into()));
        }
        if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
            return Err(Error::Range(format!("Blaschke zero {a} must lie in the open unit disk")));
        }
        let normalized = zeros.iter().any(|a| a.norm() == 0.0);
        Ok(Self { k, family: Family::Blaschke { alpha, zeros }, normalized })
    }

    /// A user-supplied driver. The bound `k` is declared, not assumed: use
    /// [`Self::verify_becker_bound`] to check it.
    pub fn custom<F>(k: f64, normalized: bool, breakpoints: Vec<f64>, label: impl Into<String>, eval: F) -> Result<Self>
    where
        F: Fn(Complex64, f64) -> Result<Complex64> + Send + Sync + 'static,
    {
        check_k(k)?;
        Ok(Self {
            k,
            family: Family::Custom { eval: Arc::new(eval), breakpoints, label: label.into() },
            normalized,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::ConstantPower { .. } => FamilyKind::ConstantPower,
            Family::ExtremalA3 { .. } => FamilyKind::ExtremalA3,
            Family::Blaschke { .. } => FamilyKind::Blaschke,
            Family::Custom { .. } => FamilyKind::Custom,
        }
    }

    /// Times at which the driver is not smooth in `t`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::ExtremalA3 { t0 } if *t0 > 0.0 => vec![*t0],
            Family::Custom { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    pub fn cayley(&self) -> CayleyData {
        CayleyData { k: self.k, big_k: (1.0 + self.k) / (1.0 - self.k) }
    }

    /// `p(z, t)` for `|z| <= 1`, `t >= 0`.
    pub fn eval(&self, z: Complex64, t: f64) -> Result<Complex64> {
        if !(z.norm() <= 1.0 + DOMAIN_SLACK) {
            return Err(Error::Domain { z, reason: "driver is defined on the closed unit disk" });
        }
        if !(t >= 0.0) {
            return Err(Error::Range(format!("time t = {t} must be nonnegative")));
        }
        self.eval_raw(z, t)
    }

    /// Evaluation without the domain check; trial stages of the integrator
    /// may step marginally outside the disk.
    pub(crate) fn eval_raw(&self, z: Complex64, t: f64) -> Result<Complex64> {
        let value = match &self.family {
            Family::Custom { eval, .. } => eval(z, t)?,
            _ => {
                let (num, den) = self.rational_at(z, t);
                if den.norm() == 0.0 {
                    return Err(Error::Singularity { z, t });
                }
                num / den
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Singularity { z, t })
        }
    }

    fn rational_at(&self, z: Complex64, t: f64) -> (Complex64, Complex64) {
        match &self.family {
            Family::ConstantPower { theta, n } => {
                let cz = Complex64::from_polar(self.k, -theta) * z.powu(*n);
                (1.0 - cz, 1.0 + cz)
            }
            Family::ExtremalA3 { t0 } => {
                let k = self.k;
                if t >= *t0 {
                    (1.0 - k * z, 1.0 + k * z)
                } else {
                    let s = (t - t0).exp();
                    (1.0 - k * z * z + (1.0 - k) * s * z, 1.0 + k * z * z + (1.0 + k) * s * z)
                }
            }
            Family::Blaschke { alpha, zeros } => {
                let shrink = (-t).exp();
                let (mut num, mut den) = (c(1.0, 0.0), c(1.0, 0.0));
                for a in zeros {
                    let b = a * shrink;
                    num *= z - b;
                    den *= 1.0 - b.conj() * z;
                }
                let kpsi = Complex64::from_polar(self.k, *alpha) * num;
                (den + kpsi, den - kpsi)
            }
            Family::Custom { .. } => unreachable!("custom drivers have no rational form"),
        }
    }

    /// Numerator and denominator polynomials (ascending coefficients) of a
    /// built-in driver at time `t`; `None` for custom drivers.
    pub fn rational_form(&self, t: f64) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
        match &self.family {
            Family::ConstantPower { theta, n } => {
                let cc = Complex64::from_polar(self.k, -theta);
                let mut num = vec![Complex64::default(); *n as usize + 1];
                let mut den = num.clone();
                num[0] = c(1.0, 0.0);
                den[0] = c(1.0, 0.0);
                num[*n as usize] = -cc;
                den[*n as usize] = cc;
                Some((num, den))
            }
            Family::ExtremalA3 { t0 } => {
                let k = self.k;
                if t >= *t0 {
                    Some((vec![c(1.0, 0.0), c(-k, 0.0)], vec![c(1.0, 0.0), c(k, 0.0)]))
                } else {
                    let s = (t - t0).exp();
                    Some((
                        vec![c(1.0, 0.0), c((1.0 - k) * s, 0.0), c(-k, 0.0)],
                        vec![c(1.0, 0.0), c((1.0 + k) * s, 0.0), c(k, 0.0)],
                    ))
                }
            }
            Family::Blaschke { alpha, zeros } => {
                let shrink = (-t).exp();
                let mut num = vec![c(1.0, 0.0)];
                let mut den = vec![c(1.0, 0.0)];
                for a in zeros {
                    let b = a * shrink;
                    num = poly_mul(&num, &[-b, c(1.0, 0.0)]);
                    den = poly_mul(&den, &[c(1.0, 0.0), -b.conj()]);
                }
                let kk = Complex64::from_polar(self.k, *alpha);
                let plus: Vec<Complex64> = den.iter().zip(&num).map(|(d, n)| d + kk * n).collect();
                let minus: Vec<Complex64> = den.iter().zip(&num).map(|(d, n)| d - kk * n).collect();
                Some((plus, minus))
            }
            Family::Custom { .. } => None,
        }
    }

    /// Exact Taylor coefficients `p_0(t), ..., p_order(t)` of a built-in
    /// driver by series division of its rational form.
    pub fn taylor_exact(&self, t: f64, order: usize) -> Option<Result<Vec<Complex64>>> {
        let (num, den) = self.rational_form(t)?;
        let n = TruncatedSeries::from_coeffs(order, &num);
        let d = TruncatedSeries::from_coeffs(order, &den);
        Some(n.div(&d).map(|s| s.coeffs().to_vec()))
    }

    /// Largest value of `|H(p)|` over `m` equispaced points of the circle of
    /// radius [`BOUNDARY_RADIUS`].
    pub fn becker_sup(&self, t: f64, m: usize) -> Result<f64> {
        if m < 16 {
            return Err(Error::Range(format!("becker_sup needs at least 16 samples, got {m}")));
        }
        let mut sup: f64 = 0.0;
        for j in 0..m {
            let z = Complex64::from_polar(BOUNDARY_RADIUS, TAU * j as f64 / m as f64);
            sup = sup.max(CayleyData::h(self.eval(z, t)?).norm());
        }
        Ok(sup)
    }

    /// [`Self::becker_sup`] with the sample count doubled from 64 until the
    /// estimate moves by less than `1e-8`.
    pub fn becker_sup_refined(&self, t: f64) -> Result<f64> {
        let mut m = 64;
        let mut prev = self.becker_sup(t, m)?;
        while m < 1 << 16 {
            m *= 2;
            let next = self.becker_sup(t, m)?;
            if (next - prev).abs() < 1e-8 {
                return Ok(next);
            }
            prev = next;
        }
        Ok(prev)
    }

    /// Sample the Becker condition over `times`; violations are reported,
    /// not rejected.
    pub fn verify_becker_bound(&self, times: &[f64], m: usize) -> Result<BeckerReport> {
        let mut report = BeckerReport { k: self.k, max_sup: 0.0, violations: Vec::new() };
        for &t in times {
            let s = self.becker_sup(t, m)?;
            report.max_sup = report.max_sup.max(s);
            if s > self.k + 1e-9 {
                report.violations.push((t, s));
            }
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeckerReport {
    pub k: f64,
    pub max_sup: f64,
    /// `(t, sup |H(p(·, t))|)` for every sampled time exceeding `k`.
    pub violations: Vec<(f64, f64)>,
}

impl BeckerReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Renormalization p -> p0 with p0(0, τ) = 1.

static NEXT_STATE_ID: AtomicU64 = AtomicU64::new(1);

struct Renormalized {
    id: u64,
    orig: HerglotzDriver,
    knots: Vec<f64>,
    q_at_knots: Vec<Complex64>,
    tol: f64,
}

#[derive(Clone, Copy)]
struct Inversion {
    t: f64,
    q: Complex64,
    p0: Complex64,
}

thread_local! {
    static LAST_INVERSION: RefCell<Option<(u64, u64, Inversion)>> = const { RefCell::new(None) };
}

impl Renormalized {
    fn p_at_origin(&self, s: f64) -> Result<Complex64> {
        self.orig.eval_raw(Complex64::default(), s)
    }

    fn q(&self, i: usize, t: f64) -> Result<Complex64> {
        let t_i = self.knots[i];
        Ok(self.q_at_knots[i] + quad::simpson(|s| self.p_at_origin(s), t_i, t, self.tol)?)
    }

    fn invert(&self, tau: f64) -> Result<Inversion> {
        let key = tau.to_bits();
        if let Some(hit) = LAST_INVERSION.with(|c| match *c.borrow() {
            Some((id, bits, inv)) if id == self.id && bits == key => Some(inv),
            _ => None,
        }) {
            return Ok(hit);
        }
        let last = *self.q_at_knots.last().unwrap();
        if tau > last.re {
            return Err(Error::Range(format!("τ = {tau} exceeds Re Q(t_max) = {}", last.re)));
        }
        // knot interval containing τ
        let i = match self.q_at_knots.partition_point(|q| q.re <= tau) {
            0 => 0,
            n => (n - 1).min(self.knots.len() - 2),
        };
        let (lo, hi) = (self.knots[i], self.knots[i + 1]);
        let t = quad::monotone_root(
            |t| Ok((self.q(i, t)?.re, self.p_at_origin(t)?.re)),
            tau,
            lo,
            hi,
            self.tol,
        )
        .map_err(|e| match e {
            Error::Range(m) => Error::Convergence(format!("Q-inversion failed: {m}")),
            other => other,
        })?;
        let inv = Inversion { t, q: self.q(i, t)?, p0: self.p_at_origin(t)? };
        LAST_INVERSION.with(|c| *c.borrow_mut() = Some((self.id, key, inv)));
        Ok(inv)
    }

    fn eval(&self, zeta: Complex64, tau: f64) -> Result<Complex64> {
        let inv = self.invert(tau)?;
        let z = zeta * Complex64::from_polar(1.0, -inv.q.im);
        let p = self.orig.eval_raw(z, inv.t)?;
        Ok((p - Complex64::new(0.0, inv.p0.im)) / inv.p0.re)
    }
}

/// Knot spacing of the precomputed `Q(t)` table.
const Q_KNOT_SPACING: f64 = 0.05;

/// Renormalize `d` to a driver with `p0(0, τ) = 1` generating the same map.
///
/// The result is a custom driver with bound `κ(k)`, defined for
/// `τ <= Re Q(t_max)`.
pub fn normalize_driver(d: &HerglotzDriver, t_max: f64, quad_tol: f64) -> Result<HerglotzDriver> {
    if !(t_max > 0.0) || !(quad_tol > 0.0) {
        return Err(Error::Range("t_max and quad_tol must be positive".into()));
    }
    let mut knots: Vec<f64> = (0..)
        .map(|i| i as f64 * Q_KNOT_SPACING)
        .take_while(|&t| t < t_max)
        .chain(d.breakpoints().into_iter().filter(|&b| b > 0.0 && b < t_max))
        .collect();
    knots.push(t_max);
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let p0 = |s: f64| d.eval_raw(Complex64::default(), s);
    let mut q_at_knots = Vec::with_capacity(knots.len());
    let mut acc = Complex64::default();
    q_at_knots.push(acc);
    for w in knots.windows(2) {
        acc += quad::simpson(p0, w[0], w[1], quad_tol)?;
        q_at_knots.push(acc);
    }

    let state = Renormalized {
        id: NEXT_STATE_ID.fetch_add(1, Ordering::Relaxed),
        orig: d.clone(),
        knots,
        q_at_knots,
        tol: quad_tol,
    };
    let mut breakpoints = Vec::new();
    for b in d.breakpoints() {
        if b > 0.0 && b < t_max {
            let i = state.knots.iter().position(|&t| t == b).unwrap();
            breakpoints.push(state.q_at_knots[i].re);
        }
    }
    let k = kappa(d.k());
    HerglotzDriver::custom(k, true, breakpoints, "normalized", move |zeta, tau| state.eval(zeta, tau))
}
