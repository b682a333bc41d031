//! Sufficient conditions for a map to admit a Becker extension, and the
//! extensions they produce.
//!
//! A candidate is given by a pair `(Φ, φ)` with `Φ'_w = φ Φ'_z`,
//! `Φ(z, z) = f(z)`. When `φ(0,0) = 0`, `r|φ(w/r, w)| ≤ k` on
//! `|w|² < r < 1` and `|Φ(z,w)| ≤ M|z|` near `(∞, 0)`, the map
//! `F(z) = Φ(z, 1/z̄)` is a `k`-quasiconformal Becker extension.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_k, Error, Result};
use crate::expr::Expr;

type Jet = [Complex64; 4];
type JetFn = dyn Fn(Complex64) -> Result<Jet> + Send + Sync;
type TwoVarFn = dyn Fn(Complex64, Complex64) -> Result<Complex64> + Send + Sync;
/// Pairs `(z, w)` that could not be evaluated, with the reason.
type Skipped = Vec<(Complex64, Complex64, String)>;

/// Step of the finite differences used for the second Schwarzian.
const SCHWARZIAN_STEP: f64 = 1e-4;

/// A holomorphic `f` on the disk with `f(0) = 0`, `f'(0) = 1`, given by its
/// third-order jet `[f, f', f'', f''']`.
#[derive(Clone)]
pub struct AnalyticSample {
    jet: Arc<JetFn>,
    a2: Complex64,
    label: String,
}

impl std::fmt::Debug for AnalyticSample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticSample").field("label", &self.label).field("a2", &self.a2).finish()
    }
}

impl AnalyticSample {
    pub fn new<J>(label: impl Into<String>, jet: J) -> Result<Self>
    where
        J: Fn(Complex64) -> Result<Jet> + Send + Sync + 'static,
    {
        let at0 = jet(Complex64::default())?;
        if at0[0].norm() > 1e-12 || (at0[1] - 1.0).norm() > 1e-12 {
            return Err(Error::Range(format!(
                "samples must satisfy f(0) = 0 and f'(0) = 1, got f(0) = {}, f'(0) = {}",
                at0[0], at0[1]
            )));
        }
        Ok(Self { jet: Arc::new(jet), a2: 0.5 * at0[2], label: label.into() })
    }

    pub fn from_expr(e: Expr) -> Result<Self> {
        let label = e.to_string();
        Self::new(label, move |z| e.jet(z))
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::from_expr(Expr::parse(src)?)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn jet(&self, z: Complex64) -> Result<Jet> {
        (self.jet)(z)
    }

    pub fn f(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet(z)?[0])
    }

    pub fn a2(&self) -> Complex64 {
        self.a2
    }

    /// `f''/f'`.
    pub fn pre_schwarzian(&self, z: Complex64) -> Result<Complex64> {
        let j = self.jet(z)?;
        if j[1].norm() == 0.0 {
            return Err(Error::Evaluation { z, reason: "f' vanishes".into() });
        }
        Ok(j[2] / j[1])
    }

    /// `S_f = f'''/f' − (3/2)(f''/f')²`.
    pub fn schwarzian(&self, z: Complex64) -> Result<Complex64> {
        let j = self.jet(z)?;
        if j[1].norm() == 0.0 {
            return Err(Error::Evaluation { z, reason: "f' vanishes".into() });
        }
        let q = j[2] / j[1];
        Ok(j[3] / j[1] - 1.5 * q * q)
    }

    /// `S_f = q' − q²/2` with `q = f''/f'` differentiated by 5-point
    /// differences and one Richardson step.
    pub fn schwarzian_fd(&self, z: Complex64) -> Result<Complex64> {
        let d = |h: f64| -> Result<Complex64> {
            let q = |dz: f64| self.pre_schwarzian(z + dz);
            Ok((8.0 * (q(h)? - q(-h)?) - (q(2.0 * h)? - q(-2.0 * h)?)) / (12.0 * h))
        };
        let (coarse, fine) = (d(SCHWARZIAN_STEP)?, d(0.5 * SCHWARZIAN_STEP)?);
        let dq = fine + (fine - coarse) / 15.0;
        let q = self.pre_schwarzian(z)?;
        Ok(dq - 0.5 * q * q)
    }
}

/// Polar grid on the disk `|z| ≤ r_max`: the origin plus `n_r − 1` radii
/// times `n_theta` angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskGrid {
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for DiskGrid {
    fn default() -> Self {
        Self { r_max: 1.0 - 1e-3, n_r: 64, n_theta: 64 }
    }
}

impl DiskGrid {
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::default()];
        for i in 1..self.n_r {
            let r = self.r_max * i as f64 / (self.n_r - 1) as f64;
            for j in 0..self.n_theta {
                out.push(Complex64::from_polar(r, TAU * j as f64 / self.n_theta as f64));
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max < 1.0) || self.n_r < 2 || self.n_theta < 2 {
            return Err(Error::Range("disk grid needs 0 < r_max < 1 and resolutions of at least 2".into()));
        }
        Ok(())
    }
}

/// Outcome of one criterion, serialized as
/// `{condition, ok, margin, worst_point: [re, im]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub condition: String,
    pub ok: bool,
    pub margin: f64,
    pub worst_point: [f64; 2],
}

impl CheckReport {
    fn from_max(condition: &str, k: f64, worst: (Complex64, f64)) -> Self {
        Self {
            condition: condition.into(),
            ok: worst.1 <= k,
            margin: k - worst.1,
            worst_point: [worst.0.re, worst.0.im],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

fn grid_max<G>(points: &[Complex64], g: G) -> Result<(Complex64, f64)>
where
    G: Fn(Complex64) -> Result<f64> + Sync,
{
    points
        .par_iter()
        .map(|&z| Ok((z, g(z)?)))
        .try_reduce(|| (Complex64::default(), f64::NEG_INFINITY), |a, b| Ok(if b.1 > a.1 { b } else { a }))
}

/// Left side of the Ahlfors–Weill type condition:
/// `(4√3/9)(1−|z|²)|a₂| + (1−|z|²)²|a₂² + S_f(z)/2|`.
pub fn aw_becker_lhs(f: &AnalyticSample, z: Complex64) -> Result<f64> {
    let s = 1.0 - z.norm_sqr();
    let a2 = f.a2();
    Ok(4.0 * 3f64.sqrt() / 9.0 * s * a2.norm() + s * s * (a2 * a2 + 0.5 * f.schwarzian(z)?).norm())
}

pub fn check_aw_becker(f: &AnalyticSample, k: f64, grid: &DiskGrid) -> Result<CheckReport> {
    check_k(k)?;
    grid.validate()?;
    let worst = grid_max(&grid.points(), |z| aw_becker_lhs(f, z))?;
    Ok(CheckReport::from_max("aw-becker", k, worst))
}

/// `(1−|z|²)|f''/f'| ≤ k` on the grid.
pub fn check_pre_schwarzian(f: &AnalyticSample, k: f64, grid: &DiskGrid) -> Result<CheckReport> {
    check_k(k)?;
    grid.validate()?;
    let worst = grid_max(&grid.points(), |z| Ok((1.0 - z.norm_sqr()) * f.pre_schwarzian(z)?.norm()))?;
    Ok(CheckReport::from_max("pre-schwarzian", k, worst))
}

/// `q(k) = (3 + 8√3/9)k + 4k²`.
pub fn threshold_q(k: f64) -> f64 {
    (3.0 + 8.0 * 3f64.sqrt() / 9.0) * k + 4.0 * k * k
}

/// Positive root of `4k² + (3 + 8√3/9)k − 1 = 0`.
pub fn threshold_k_star() -> f64 {
    let b = 3.0 + 8.0 * 3f64.sqrt() / 9.0;
    // 2/(b + √(b² + 16)) avoids the cancellation in (−b + √(b²+16))/8
    2.0 / (b + (b * b + 16.0).sqrt())
}

/// The pair `(Φ, φ)` of a candidate extension with its constants.
#[derive(Clone)]
pub struct PdeExtensionSpec {
    pub name: String,
    phi_big: Arc<TwoVarFn>,
    phi: Arc<TwoVarFn>,
    pub eps: f64,
    pub m: f64,
    pub k: f64,
}

impl std::fmt::Debug for PdeExtensionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PdeExtensionSpec")
            .field("name", &self.name)
            .field("eps", &self.eps)
            .field("m", &self.m)
            .field("k", &self.k)
            .finish()
    }
}

impl PdeExtensionSpec {
    /// A user-supplied pair.
    pub fn new<P, Q>(name: impl Into<String>, k: f64, eps: f64, m: f64, phi_big: P, phi: Q) -> Result<Self>
    where
        P: Fn(Complex64, Complex64) -> Result<Complex64> + Send + Sync + 'static,
        Q: Fn(Complex64, Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        check_k(k)?;
        if !(eps > 0.0 && eps < 1.0 && m > 0.0) {
            return Err(Error::Range(format!("need 0 < ε = {eps} < 1 and M = {m} > 0")));
        }
        Ok(Self { name: name.into(), phi_big: Arc::new(phi_big), phi: Arc::new(phi), eps, m, k })
    }

    /// `Φ = f(w) + (z−w)f'(w)`, `φ = (z−w)f''(w)/f'(w)`.
    pub fn example1(f: AnalyticSample, k: f64, eps: f64, m: f64) -> Result<Self> {
        let g = f.clone();
        Self::new(
            "pde-example1",
            k,
            eps,
            m,
            move |z, w| {
                let j = f.jet(w)?;
                Ok(j[0] + (z - w) * j[1])
            },
            move |z, w| Ok((z - w) * g.pre_schwarzian(w)?),
        )
    }

    /// `Φ = f(w) + z − w`, `φ = f'(w) − 1`.
    pub fn example2(f: AnalyticSample, k: f64, eps: f64, m: f64) -> Result<Self> {
        let g = f.clone();
        Self::new("pde-example2", k, eps, m, move |z, w| Ok(f.f(w)? + z - w), move |_, w| Ok(g.jet(w)?[1] - 1.0))
    }

    /// `Φ = f(w) + f'(w)/(1/(z−w) + a₂ − f''(w)/(2f'(w)))`,
    /// `φ = 2a₂(z−w) + (z−w)²(a₂² + S_f(w)/2)`.
    pub fn aw_becker(f: AnalyticSample, k: f64, eps: f64, m: f64) -> Result<Self> {
        let g = f.clone();
        Self::new(
            "pde-aw-becker",
            k,
            eps,
            m,
            move |z, w| aw_phi(&f, z, w),
            move |z, w| {
                let a2 = g.a2();
                let d = z - w;
                Ok(2.0 * a2 * d + d * d * (a2 * a2 + 0.5 * g.schwarzian(w)?))
            },
        )
    }

    pub fn big_phi(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        finite((self.phi_big)(z, w)?, z)
    }

    pub fn phi(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        finite((self.phi)(z, w)?, z)
    }
}

fn finite(v: Complex64, z: Complex64) -> Result<Complex64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { z, reason: "pole".into() })
    }
}

fn aw_phi(f: &AnalyticSample, z: Complex64, w: Complex64) -> Result<Complex64> {
    let j = f.jet(w)?;
    // f'(w)/(1/(z−w) + g) rewritten as f'(w)(z−w)/(1 + (z−w)g)
    let dz = z - w;
    let tail = dz * (f.a2() - 0.5 * j[2] / j[1]);
    let den = 1.0 + tail;
    if !den.is_finite() || den.norm() <= 1e-12 * tail.norm().max(1.0) {
        return Err(Error::Singularity { z, t: z.norm().ln().max(0.0) });
    }
    Ok(j[0] + j[1] * dz / den)
}

/// Sampling of the two regions in the hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeGrids {
    /// Points `w` for condition (ii).
    pub disk: DiskGrid,
    /// Values of `r` per `w`, spread over `[|w|², 1]` with both ends.
    pub n_r: usize,
    /// Moduli of `z`, log-spaced on `[1, z_max]`.
    pub n_z: usize,
    pub z_max: f64,
    /// Moduli of `w` up to `min(|z|, ε²/|z|)`, and angles for both.
    pub n_w: usize,
    pub n_angle: usize,
}

impl Default for PdeGrids {
    fn default() -> Self {
        Self { disk: DiskGrid::default(), n_r: 48, n_z: 24, z_max: 1e3, n_w: 6, n_angle: 12 }
    }
}

/// Result of [`check_pde_conditions`].
#[derive(Debug, Clone, PartialEq)]
pub struct PdeReport {
    /// `|φ(0, 0)|`; condition (i) asks for zero.
    pub phi_at_origin: f64,
    pub cond_i: bool,
    pub cond_ii_max: f64,
    /// `(w, r)` realizing `cond_ii_max`.
    pub cond_ii_worst: (Complex64, f64),
    pub growth_max: f64,
    pub growth_ok: bool,
    /// Points skipped because `Φ` or `φ` could not be evaluated.
    pub skipped: Skipped,
}

impl PdeReport {
    pub fn passes(&self, k: f64) -> bool {
        self.cond_i && self.growth_ok && self.cond_ii_max <= k
    }
}

pub fn check_pde_conditions(spec: &PdeExtensionSpec, grids: &PdeGrids) -> Result<PdeReport> {
    grids.disk.validate()?;
    if grids.n_r < 2 || grids.n_z < 2 || grids.n_w < 1 || grids.n_angle < 1 || !(grids.z_max > 1.0) {
        return Err(Error::Range("PDE grids need n_r, n_z >= 2 and z_max > 1".into()));
    }
    let origin = Complex64::default();
    let phi_at_origin = spec.phi(origin, origin)?.norm();

    type Sweep = (f64, (Complex64, f64), Skipped);
    let cond_ii: Vec<Sweep> = grids
        .disk
        .points()
        .into_par_iter()
        .map(|w| {
            let lo = w.norm_sqr();
            let mut best = (f64::NEG_INFINITY, (w, 1.0));
            let mut skipped = Vec::new();
            for j in 0..grids.n_r {
                let r = lo + (1.0 - lo) * j as f64 / (grids.n_r - 1) as f64;
                if r == 0.0 {
                    continue;
                }
                match spec.phi(w / r, w) {
                    Ok(v) if r * v.norm() > best.0 => best = (r * v.norm(), (w, r)),
                    Ok(_) => {}
                    Err(e) => skipped.push((w / r, w, e.to_string())),
                }
            }
            (best.0, best.1, skipped)
        })
        .collect();

    let mut report = PdeReport {
        phi_at_origin,
        cond_i: phi_at_origin <= 1e-12,
        cond_ii_max: f64::NEG_INFINITY,
        cond_ii_worst: (origin, 1.0),
        growth_max: 0.0,
        growth_ok: true,
        skipped: Vec::new(),
    };
    for (v, at, skipped) in cond_ii {
        if v > report.cond_ii_max {
            report.cond_ii_max = v;
            report.cond_ii_worst = at;
        }
        report.skipped.extend(skipped);
    }

    let eps2 = spec.eps * spec.eps;
    let growth: Vec<(f64, Skipped)> = (0..grids.n_z)
        .into_par_iter()
        .map(|i| {
            let rz = grids.z_max.powf(i as f64 / (grids.n_z - 1) as f64);
            let rw_max = rz.min(eps2 / rz).min(1.0 - 1e-12);
            let mut worst: f64 = 0.0;
            let mut skipped = Vec::new();
            for a in 0..grids.n_angle {
                let z = Complex64::from_polar(rz, TAU * a as f64 / grids.n_angle as f64);
                for l in 0..=grids.n_w {
                    let rw = rw_max * l as f64 / grids.n_w as f64;
                    for b in 0..grids.n_angle {
                        let w = Complex64::from_polar(rw, TAU * (b as f64 + 0.5) / grids.n_angle as f64);
                        match spec.big_phi(z, w) {
                            Ok(v) => worst = worst.max(v.norm() / rz),
                            Err(e) => skipped.push((z, w, e.to_string())),
                        }
                    }
                }
            }
            (worst, skipped)
        })
        .collect();
    for (g, skipped) in growth {
        report.growth_max = report.growth_max.max(g);
        report.skipped.extend(skipped);
    }
    report.growth_ok = report.growth_max <= spec.m;
    Ok(report)
}

/// Largest `|Φ(z, z) − f(z)|` over the grid.
pub fn initial_condition_gap(spec: &PdeExtensionSpec, f: &AnalyticSample, grid: &DiskGrid) -> Result<f64> {
    Ok(grid_max(&grid.points(), |z| Ok((spec.big_phi(z, z)? - f.f(z)?).norm()))?.1)
}

/// `F(z) = Φ(z, 1/z̄)` for `|z| > 1`.
pub fn pde_extend(spec: &PdeExtensionSpec, z: Complex64) -> Result<Complex64> {
    if !(z.norm() > 1.0) {
        return Err(Error::Domain { z, reason: "the extension lives on |z| > 1" });
    }
    spec.big_phi(z, 1.0 / z.conj())
}

/// Extension under the Ahlfors–Weill type condition, `F(z) = Φ(z, 1/z̄)`.
pub fn aw_becker_extend(f: &AnalyticSample, z: Complex64) -> Result<Complex64> {
    if !(z.norm() > 1.0) {
        return Err(Error::Domain { z, reason: "the extension lives on |z| > 1" });
    }
    aw_phi(f, z, 1.0 / z.conj())
}
