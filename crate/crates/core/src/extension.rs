//! Quasiconformal extensions `F(ρ e^{iθ}) = f_{log ρ}(e^{iθ})` to `|z| ≥ 1`,
//! their Beltrami coefficients, and finite-difference dilatation estimates.

pub mod spiral;

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::drivers::{extremal_t0, CayleyData, HerglotzDriver};
use crate::error::{check_k, Error, Result};
use crate::laurent::Laurent;
use crate::loewner::{chain_at, map_limit};

/// Default finite-difference step for Wirtinger derivatives.
pub const FD_STEP: f64 = 1e-5;

/// Points with `|F_z|` below this are excluded from dilatation estimates.
pub const DEGENERATE_FZ: f64 = 1e-4;

/// Becker extension of the map generated by `d`, evaluated at `|z| ≥ 1`.
pub fn becker_extend(d: &HerglotzDriver, z: Complex64, tol: f64) -> Result<Complex64> {
    let r = z.norm();
    if !(r >= 1.0 - 1e-12) {
        return Err(Error::Domain { z, reason: "the extension lives on |z| >= 1" });
    }
    chain_at(d, r.max(1.0).ln(), z / r, tol)
}

/// `μ(z) = (z²/|z|²) H(p(z/|z|, log|z|))` for `|z| > 1`.
pub fn beltrami_of_driver(d: &HerglotzDriver, z: Complex64) -> Result<Complex64> {
    let r = z.norm();
    if !(r > 1.0) {
        return Err(Error::Domain { z, reason: "Beltrami coefficients are defined on |z| > 1" });
    }
    let zeta = z / r;
    Ok(zeta * zeta * CayleyData::h(d.eval_raw(zeta, r.ln())?))
}

/// Two-zone closed form of the Beltrami coefficient of the extremal
/// extension, with `ρ = e^{t₀}`.
pub fn extremal_beltrami(k: f64, z: Complex64) -> Result<Complex64> {
    check_k(k)?;
    let r = z.norm();
    if !(r > 1.0) {
        return Err(Error::Domain { z, reason: "Beltrami coefficients are defined on |z| > 1" });
    }
    Ok(extremal_closed_form(k, z))
}

/// [`extremal_beltrami`] without argument checks; continuous up to `|z| = 1`.
fn extremal_closed_form(k: f64, z: Complex64) -> Complex64 {
    let r = z.norm();
    let zeta = z / r;
    let rho = extremal_t0(k).exp();
    if r < rho {
        -k * zeta.powi(4) * (rho + z.conj()) / (rho + z)
    } else {
        -k * zeta.powi(3)
    }
}

/// `k conj(φ)/|φ|` for the quadratic differential `φ`.
pub fn teichmuller_coefficient(k: f64, phi: Complex64, z: Complex64) -> Result<Complex64> {
    let m = phi.norm();
    if m == 0.0 || !m.is_finite() {
        return Err(Error::ZeroDivisor { z });
    }
    Ok(k * phi.conj() / m)
}

/// A holomorphic quadratic differential on `|z| > 1`.
pub trait QuadraticDifferential: Sync {
    fn eval(&self, z: Complex64) -> Result<Complex64>;
}

impl QuadraticDifferential for Laurent {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Laurent::eval(self, z)
    }
}

/// `φ(z) = e^{-iα} z^{n-2} ∏ (z - a_j)^{-2}` attached to a Blaschke driver.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeDifferential {
    pub alpha: f64,
    pub zeros: Vec<Complex64>,
}

impl QuadraticDifferential for BlaschkeDifferential {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut v = Complex64::from_polar(1.0, -self.alpha) * z.powi(self.zeros.len() as i32 - 2);
        for a in &self.zeros {
            let d = z - a;
            if d.norm() == 0.0 {
                return Err(Error::ZeroDivisor { z });
            }
            v /= d * d;
        }
        Ok(v)
    }
}

/// Where a [`BeltramiField`] comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeltramiSource {
    FromDriver,
    ExtremalClosedForm,
    BlaschkeClosedForm,
    NumericFD,
}

#[derive(Clone)]
enum FieldKind {
    Driver(HerglotzDriver),
    Extremal,
    Blaschke(BlaschkeDifferential),
    Numeric { f: Arc<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>, h: f64 },
}

/// Complex dilatation `μ` on `|z| > 1`.
#[derive(Clone)]
pub struct BeltramiField {
    k: f64,
    kind: FieldKind,
}

impl std::fmt::Debug for BeltramiField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BeltramiField").field("k", &self.k).field("source", &self.source()).finish()
    }
}

impl BeltramiField {
    pub fn from_driver(d: HerglotzDriver) -> Self {
        Self { k: d.k(), kind: FieldKind::Driver(d) }
    }

    pub fn extremal(k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k, kind: FieldKind::Extremal })
    }

    pub fn blaschke(k: f64, alpha: f64, zeros: Vec<Complex64>) -> Result<Self> {
        check_k(k)?;
        Ok(Self { k, kind: FieldKind::Blaschke(BlaschkeDifferential { alpha, zeros }) })
    }

    /// Dilatation of `f` estimated by finite differences with step `h`.
    pub fn numeric<F>(k: f64, h: f64, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self { k, kind: FieldKind::Numeric { f: Arc::new(f), h } }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn source(&self) -> BeltramiSource {
        match self.kind {
            FieldKind::Driver(_) => BeltramiSource::FromDriver,
            FieldKind::Extremal => BeltramiSource::ExtremalClosedForm,
            FieldKind::Blaschke(_) => BeltramiSource::BlaschkeClosedForm,
            FieldKind::Numeric { .. } => BeltramiSource::NumericFD,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() > 1.0) {
            return Err(Error::Domain { z, reason: "Beltrami coefficients are defined on |z| > 1" });
        }
        match &self.kind {
            FieldKind::Driver(d) => beltrami_of_driver(d, z),
            FieldKind::Extremal => extremal_beltrami(self.k, z),
            FieldKind::Blaschke(phi) => teichmuller_coefficient(self.k, phi.eval(z)?, z),
            FieldKind::Numeric { f, h } => {
                let (fz, fzb) = wirtinger(f.as_ref(), z, *h)?;
                if fz.norm() < DEGENERATE_FZ {
                    return Err(Error::Evaluation { z, reason: format!("|F_z| = {:.3e} is degenerate", fz.norm()) });
                }
                Ok(fzb / fz)
            }
        }
    }
}

/// `(F_z, F_z̄)` by 5-point central differences in `x` and `y`.
pub fn wirtinger<F>(f: &F, z: Complex64, h: f64) -> Result<(Complex64, Complex64)>
where
    F: Fn(Complex64) -> Result<Complex64> + ?Sized,
{
    let diff = |dir: Complex64| -> Result<Complex64> {
        let p1 = f(z + dir * h)?;
        let m1 = f(z - dir * h)?;
        let p2 = f(z + dir * (2.0 * h))?;
        let m2 = f(z - dir * (2.0 * h))?;
        Ok((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h))
    };
    let fx = diff(Complex64::new(1.0, 0.0))?;
    let fy = diff(Complex64::new(0.0, 1.0))?;
    let i = Complex64::i();
    Ok((0.5 * (fx - i * fy), 0.5 * (fx + i * fy)))
}

/// Polar grid on the annulus `r_min ≤ |z| ≤ r_max`: `n_r` radii including
/// both ends and `n_theta` angles offset by half a step from the real axis.
/// Points with `|Im z| < real_strip` are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub real_strip: f64,
}

impl AnnulusGrid {
    pub fn new(r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::Range(format!("annulus radii must satisfy 0 < {r_min} < {r_max}")));
        }
        if n_r < 2 || n_theta < 2 {
            return Err(Error::Range("annulus resolution must be at least 2".into()));
        }
        Ok(Self { r_min, r_max, n_r, n_theta, real_strip: 0.0 })
    }

    pub fn excluding_real_strip(mut self, width: f64) -> Self {
        self.real_strip = width;
        self
    }

    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n_r * self.n_theta);
        for i in 0..self.n_r {
            let r = self.r_min + (self.r_max - self.r_min) * i as f64 / (self.n_r - 1) as f64;
            for j in 0..self.n_theta {
                let z = Complex64::from_polar(r, TAU * (j as f64 + 0.5) / self.n_theta as f64);
                if z.im.abs() >= self.real_strip {
                    out.push(z);
                }
            }
        }
        out
    }
}

/// Outcome of a finite-difference dilatation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct QCReport {
    pub grid: AnnulusGrid,
    pub evaluated: usize,
    pub sup_dilatation: f64,
    pub sup_point: Complex64,
    /// Largest `|μ_numeric − μ_analytic|` when an analytic field was given.
    pub max_deviation: Option<f64>,
    /// Points skipped because of degenerate derivatives or evaluation errors.
    pub failures: Vec<(Complex64, String)>,
}

/// Estimate the dilatation of `f` over `grid`, comparing with `analytic`
/// if supplied.
pub fn numeric_dilatation<F, A>(f: F, grid: &AnnulusGrid, h: f64, analytic: Option<A>) -> Result<QCReport>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
    A: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if !(h > 0.0) {
        return Err(Error::Range(format!("finite-difference step h = {h} must be positive")));
    }
    type Outcome = (Complex64, Result<(Complex64, Option<f64>)>);
    let outcomes: Vec<Outcome> = grid
        .points()
        .into_par_iter()
        .map(|z| {
            let res = (|| {
                let (fz, fzb) = wirtinger(&f, z, h)?;
                if fz.norm() < DEGENERATE_FZ {
                    return Err(Error::Evaluation { z, reason: format!("|F_z| = {:.3e} is degenerate", fz.norm()) });
                }
                let mu = fzb / fz;
                let dev = match &analytic {
                    Some(a) => Some((mu - a(z)?).norm()),
                    None => None,
                };
                Ok((mu, dev))
            })();
            (z, res)
        })
        .collect();

    let mut report = QCReport {
        grid: *grid,
        evaluated: 0,
        sup_dilatation: 0.0,
        sup_point: Complex64::default(),
        max_deviation: analytic.as_ref().map(|_| 0.0),
        failures: Vec::new(),
    };
    for (z, res) in outcomes {
        match res {
            Ok((mu, dev)) => {
                report.evaluated += 1;
                if mu.norm() > report.sup_dilatation {
                    report.sup_dilatation = mu.norm();
                    report.sup_point = z;
                }
                if let (Some(m), Some(d)) = (report.max_deviation.as_mut(), dev) {
                    *m = m.max(d);
                }
            }
            Err(e) => report.failures.push((z, e.to_string())),
        }
    }
    Ok(report)
}

/// Largest `|μ(z) − k conj(φ(z))/|φ(z)||` over `points`.
pub fn teichmuller_check(mu: &BeltramiField, phi: &dyn QuadraticDifferential, points: &[Complex64]) -> Result<f64> {
    points
        .par_iter()
        .map(|&z| Ok((mu.eval(z)? - teichmuller_coefficient(mu.k(), phi.eval(z)?, z)?).norm()))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Largest gap `|F((1+δ)e^{iθ}) − f((1−δ)e^{iθ})|` over `n` equally spaced angles.
pub fn seam_gap(d: &HerglotzDriver, n: usize, delta: f64, tol: f64) -> Result<f64> {
    (0..n)
        .into_par_iter()
        .map(|j| {
            let u = Complex64::from_polar(1.0, TAU * j as f64 / n as f64);
            Ok((becker_extend(d, u * (1.0 + delta), tol)? - map_limit(d, u * (1.0 - delta), tol)?).norm())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Driver recovered from the chain, `p ≈ ∂_t f_t / (z f_t')`, by central
/// differences with step `step` in both `t` and `z`.
pub fn driver_from_chain(d: &HerglotzDriver, z: Complex64, t: f64, step: f64, tol: f64) -> Result<Complex64> {
    if !(t >= step) {
        return Err(Error::Range(format!("time t = {t} must be at least the step {step}")));
    }
    let ft = (chain_at(d, t + step, z, tol)? - chain_at(d, t - step, z, tol)?) / (2.0 * step);
    let fz = (chain_at(d, t, z + step, tol)? - chain_at(d, t, z - step, tol)?) / (2.0 * step);
    Ok(ft / (z * fz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn extremal_closed_form_modulus_is_k() {
        for z in [c(1.2, 0.3), c(-1.4, 0.1), c(3.0, -2.0), c(0.0, 1.01)] {
            assert!((extremal_beltrami(0.5, z).unwrap().norm() - 0.5).abs() < 1e-12);
        }
        assert!((extremal_beltrami(0.5, c(2.0, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-15);
        assert!(matches!(extremal_beltrami(0.5, c(0.5, 0.0)), Err(Error::Domain { .. })));
    }

    #[test]
    fn closed_form_matches_driver_formula() {
        let d = HerglotzDriver::extremal_a3(0.5).unwrap();
        for j in 0..50 {
            let z = Complex64::from_polar(1.01 + 0.06 * j as f64, 0.37 * j as f64);
            let a = extremal_beltrami(0.5, z).unwrap();
            let b = beltrami_of_driver(&d, z).unwrap();
            assert!((a - b).norm() < 1e-12, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn constant_power_two_at_two() {
        let d = HerglotzDriver::constant_power(0.4, 0.0, 2).unwrap();
        assert!((beltrami_of_driver(&d, c(2.0, 0.0)).unwrap() - c(-0.4, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn blaschke_driver_is_teichmuller() {
        let zeros = vec![c(0.3, 0.0), c(0.0, -0.2)];
        let d = HerglotzDriver::blaschke(0.5, 0.7, zeros.clone()).unwrap();
        let field = BeltramiField::from_driver(d);
        let phi = BlaschkeDifferential { alpha: 0.7, zeros };
        let pts = AnnulusGrid::new(1.01, 4.0, 10, 10).unwrap().points();
        assert!(teichmuller_check(&field, &phi, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn wirtinger_of_reflection_term() {
        let k = 0.3;
        let f = |z: Complex64| Ok(z + k / z.conj());
        let z = c(1.3, -0.4);
        let (fz, fzb) = wirtinger(&f, z, 1e-4).unwrap();
        assert!((fz - 1.0).norm() < 1e-9);
        assert!((fzb + k / (z.conj() * z.conj())).norm() < 1e-9);
    }

    #[test]
    fn identity_has_zero_dilatation() {
        let grid = AnnulusGrid::new(1.1, 2.0, 5, 8).unwrap();
        let r = numeric_dilatation(Ok, &grid, FD_STEP, None::<fn(Complex64) -> Result<Complex64>>).unwrap();
        assert!(r.sup_dilatation <= 1e-8);
        assert_eq!(r.evaluated, 40);
    }

    #[test]
    fn grid_strip_exclusion() {
        let g = AnnulusGrid::new(1.0, 2.0, 2, 4).unwrap().excluding_real_strip(0.9);
        assert!(g.points().iter().all(|z| z.im.abs() >= 0.9));
        assert!(AnnulusGrid::new(2.0, 1.0, 4, 4).is_err());
    }
}
