//! The spiral map `f(z) = 2z e^{-arcsin z}/(1 + √(1−z²))` and its Betker
//! extension.
//!
//! Principal branches of `arcsin` and `√` are used; on the unit disk they
//! are holomorphic and give `f(z)/z → 1` as `z → 0`. The image of the disk is
//! bounded by the two spiral arcs `2 exp(-π/2 + |θ| + iθ)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_disk(z: Complex64) -> Result<()> {
    if (z - 1.0).norm() == 0.0 || (z + 1.0).norm() == 0.0 {
        return Err(Error::Branch { z });
    }
    if !(z.norm() < 1.0) {
        return Err(Error::Domain { z, reason: "the spiral map is defined on the open unit disk" });
    }
    Ok(())
}

pub fn f(z: Complex64) -> Result<Complex64> {
    check_disk(z)?;
    let s = (1.0 - z * z).sqrt();
    Ok(2.0 * z * (-z.asin()).exp() / (1.0 + s))
}

/// `f'/f = 1/z − 1/s + z/(s(1+s))` with `s = √(1−z²)`; `f'(0) = 1`.
pub fn f_prime(z: Complex64) -> Result<Complex64> {
    check_disk(z)?;
    if z == Complex64::default() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let s = (1.0 - z * z).sqrt();
    let log_deriv = 1.0 / z - 1.0 / s + z / (s * (1.0 + s));
    Ok(f(z)? * log_deriv)
}

/// `f/(z f')` from the closed forms.
pub fn p_from_f(z: Complex64) -> Result<Complex64> {
    if z == Complex64::default() {
        check_disk(z)?;
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(f(z)? / (z * f_prime(z)?))
}

/// `√((1+z)/(1−z))`, principal branch.
pub fn p_closed(z: Complex64) -> Result<Complex64> {
    check_disk(z)?;
    Ok(((1.0 + z) / (1.0 - z)).sqrt())
}

/// Deterministic disk samples: `n` points on a spiral reaching radius 0.9.
pub fn disk_samples(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let s = (j as f64 + 0.5) / n as f64;
            Complex64::from_polar(0.9 * s.sqrt(), TAU * 0.618_033_988_749_895 * j as f64)
        })
        .collect()
}

/// Largest `|f/(zf') − √((1+z)/(1−z))|` over `n` disk samples.
pub fn p_identity_gap(n: usize) -> Result<f64> {
    disk_samples(n).into_iter().try_fold(0.0f64, |acc, z| Ok(acc.max((p_from_f(z)? - p_closed(z)?).norm())))
}

fn reflect(z: Complex64) -> Result<(Complex64, Complex64)> {
    if z.im == 0.0 {
        return Err(Error::Domain { z, reason: "the Betker extension is evaluated off the real axis" });
    }
    if !(z.norm() > 1.0) {
        return Err(Error::Domain { z, reason: "the Betker extension lives on |z| > 1" });
    }
    let w = 1.0 / z.conj();
    Ok((w, f(w)?))
}

/// `Φ(z) = r(1/z̄)² / conj(f(1/z̄))` with `r(w) = 2 exp(|Arg f(w)| − π/2)`.
pub fn betker(z: Complex64) -> Result<Complex64> {
    let (_, fw) = reflect(z)?;
    let r = 2.0 * (fw.arg().abs() - FRAC_PI_2).exp();
    Ok(r * r / fw.conj())
}

/// The same map written with `η = sgn Im z`:
/// `Φ(z) = 4e^{-π}/f(1/z) · (f(1/z)/f(1/z̄))^{iη}`, `f(1/z)` taken as the
/// reflection `conj f(1/z̄)`.
pub fn betker_eta(z: Complex64) -> Result<Complex64> {
    let (_, fw) = reflect(z)?;
    let eta = z.im.signum();
    let g = fw.conj();
    // (g/fw)^{iη} = exp(iη · i(arg g − arg fw)) with the unit-modulus ratio
    let ratio_arg = -2.0 * fw.arg();
    Ok(4.0 * (-PI).exp() / g * Complex64::new(-eta * ratio_arg, 0.0).exp())
}

/// Analytic Beltrami coefficient of `Φ`:
/// `Φ_z/Φ = (1 − iη) f'(1/z)/(z² f(1/z))`, `Φ_z̄/Φ = iη f'(1/z̄)/(z̄² f(1/z̄))`.
pub fn betker_beltrami(z: Complex64) -> Result<Complex64> {
    let (w, fw) = reflect(z)?;
    let eta = z.im.signum();
    let i = Complex64::i();
    let g_bar = f_prime(w)? / fw;
    let g = g_bar.conj();
    let phi_z = (1.0 - i * eta) / (z * z) * g;
    let phi_zb = i * eta / (z.conj() * z.conj()) * g_bar;
    Ok(phi_zb / phi_z)
}

/// `Φ(x + iε) − Φ(x − iε)` at a real point `|x| > 1`.
pub fn betker_jump(x: f64, eps: f64) -> Result<Complex64> {
    Ok(betker(Complex64::new(x, eps))? - betker(Complex64::new(x, -eps))?)
}
