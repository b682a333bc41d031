//! C interface to `becker-qc`.
//!
//! Every function returns a [`BqcStatus`] and writes results through out
//! pointers. On failure the message of the last error on the calling thread
//! is available from [`bqc_last_error_message`]. Drivers are opaque handles
//! created by the `bqc_driver_*` constructors and released with
//! [`bqc_driver_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use becker_qc::criteria::{self, AnalyticSample, CheckReport, DiskGrid};
use becker_qc::drivers::{normalize_driver, HerglotzDriver};
use becker_qc::{extension, extremal, loewner, Complex64, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BqcStatus {
    Ok = 0,
    Domain = 1,
    Singularity = 2,
    Convergence = 3,
    Range = 4,
    StepFailure = 5,
    Series = 6,
    ZeroDivisor = 7,
    Branch = 8,
    Truncation = 9,
    Evaluation = 10,
    Parse = 11,
    NullPointer = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BqcComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for BqcComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<BqcComplex> for Complex64 {
    fn from(z: BqcComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Upper bounds for `|a_3|` at one `k`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BqcBoundRow {
    pub k: f64,
    pub becker_sharp: f64,
    pub fekete_szego: f64,
    pub krushkal: f64,
}

/// Outcome of a grid check: `ok` is 1 when the condition holds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BqcCheckReport {
    pub ok: i32,
    pub margin: f64,
    pub worst_point: BqcComplex,
}

/// Opaque Herglotz driver.
pub struct BqcDriver(HerglotzDriver);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> BqcStatus {
    match e {
        Error::Domain { .. } => BqcStatus::Domain,
        Error::Singularity { .. } => BqcStatus::Singularity,
        Error::Convergence(_) => BqcStatus::Convergence,
        Error::Range(_) => BqcStatus::Range,
        Error::StepFailure { .. } => BqcStatus::StepFailure,
        Error::Series(_) => BqcStatus::Series,
        Error::ZeroDivisor { .. } => BqcStatus::ZeroDivisor,
        Error::Branch { .. } => BqcStatus::Branch,
        Error::Truncation { .. } => BqcStatus::Truncation,
        Error::Evaluation { .. } => BqcStatus::Evaluation,
        Error::Parse(_) => BqcStatus::Parse,
    }
}

enum Fail {
    Core(Error),
    Status(BqcStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(BqcStatus::NullPointer, format!("{what} is null"))
}

/// Run `body`, translating errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Fail>>(body: F) -> BqcStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => return BqcStatus::Ok,
        Ok(Err(Fail::Core(e))) => (status_of(&e), e.to_string()),
        Ok(Err(Fail::Status(s, m))) => (s, m),
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            (BqcStatus::Panic, m)
        }
    };
    set_last_error(msg);
    status
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

unsafe fn driver<'a>(d: *const BqcDriver) -> Result<&'a HerglotzDriver, Fail> {
    d.as_ref().map(|d| &d.0).ok_or_else(|| null("driver"))
}

unsafe fn string<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null("string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail::Status(BqcStatus::Parse, "string is not UTF-8".into()))
}

unsafe fn emit_driver(out: *mut *mut BqcDriver, d: HerglotzDriver) -> Result<(), Fail> {
    write(out, Box::into_raw(Box::new(BqcDriver(d))))
}

/// Copies the last error message of this thread, NUL-terminated and
/// truncated to `len` bytes. Returns the full message length without the
/// terminator; passing a null buffer only queries the length.
///
/// # Safety
/// `buf` is null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bqc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `p = (1 − c z^n)/(1 + c z^n)` with `c = k e^{−iθ}`.
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_driver_constant_power(k: f64, theta: f64, n: u32, out: *mut *mut BqcDriver) -> BqcStatus {
    guard(|| emit_driver(out, HerglotzDriver::constant_power(k, theta, n)?))
}

/// The extremal driver for `Re a_3`.
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_driver_extremal_a3(k: f64, out: *mut *mut BqcDriver) -> BqcStatus {
    guard(|| emit_driver(out, HerglotzDriver::extremal_a3(k)?))
}

/// Blaschke driver with rotation `alpha` and `n_zeros` zeros.
///
/// # Safety
/// `zeros` is valid for `n_zeros` reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_driver_blaschke(
    k: f64,
    alpha: f64,
    zeros: *const BqcComplex,
    n_zeros: usize,
    out: *mut *mut BqcDriver,
) -> BqcStatus {
    guard(|| {
        if zeros.is_null() && n_zeros > 0 {
            return Err(null("zeros"));
        }
        let list = if n_zeros == 0 { Vec::new() } else { std::slice::from_raw_parts(zeros, n_zeros).to_vec() };
        emit_driver(out, HerglotzDriver::blaschke(k, alpha, list.into_iter().map(Into::into).collect())?)
    })
}

/// A renormalized copy of `d` with `p(0, t) = 1`, defined up to the image
/// of `t_max`.
///
/// # Safety
/// `d` is a live driver and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_driver_normalize(d: *const BqcDriver, t_max: f64, out: *mut *mut BqcDriver) -> BqcStatus {
    guard(|| emit_driver(out, normalize_driver(driver(d)?, t_max, 1e-12)?))
}

/// Releases a driver; null is ignored.
///
/// # Safety
/// `d` is null or came from a `bqc_driver_*` constructor and is not used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn bqc_driver_free(d: *mut BqcDriver) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` is a live driver and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_driver_k(d: *const BqcDriver, out: *mut f64) -> BqcStatus {
    guard(|| write(out, driver(d)?.k()))
}

/// `p(z, t)`.
///
/// # Safety
/// `d` is a live driver and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_driver_eval(d: *const BqcDriver, z: BqcComplex, t: f64, out: *mut BqcComplex) -> BqcStatus {
    guard(|| write(out, driver(d)?.eval(z.into(), t)?.into()))
}

/// The generated univalent map at `|z| < 1`.
///
/// # Safety
/// `d` is a live driver and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_map_limit(d: *const BqcDriver, z: BqcComplex, tol: f64, out: *mut BqcComplex) -> BqcStatus {
    guard(|| write(out, loewner::map_limit(driver(d)?, z.into(), tol)?.into()))
}

/// The Becker extension at `|z| >= 1`.
///
/// # Safety
/// `d` is a live driver and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_becker_extend(d: *const BqcDriver, z: BqcComplex, tol: f64, out: *mut BqcComplex) -> BqcStatus {
    guard(|| write(out, extension::becker_extend(driver(d)?, z.into(), tol)?.into()))
}

/// Writes `a_2, ..., a_order` to `out`, which must hold `order − 1` values.
///
/// # Safety
/// `d` is a live driver and `out` is valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_coefficient_flow(
    d: *const BqcDriver,
    order: usize,
    tol: f64,
    out: *mut BqcComplex,
    out_len: usize,
) -> BqcStatus {
    guard(|| {
        let d = driver(d)?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        if order < 2 || out_len < order - 1 {
            return Err(Fail::Status(
                BqcStatus::BufferTooSmall,
                format!("order {order} needs {} output slots, got {out_len}", order.saturating_sub(1).max(1)),
            ));
        }
        let a = loewner::coefficient_flow(d, order, tol)?;
        for (i, c) in a.into_iter().enumerate() {
            out.add(i).write(c.into());
        }
        Ok(())
    })
}

/// Beltrami coefficient of the Becker extension of `d` at `|z| > 1`.
///
/// # Safety
/// `d` is a live driver and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_beltrami(d: *const BqcDriver, z: BqcComplex, out: *mut BqcComplex) -> BqcStatus {
    guard(|| write(out, extension::beltrami_of_driver(driver(d)?, z.into())?.into()))
}

/// Closed-form Beltrami coefficient of the extremal extension.
///
/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_extremal_beltrami(k: f64, z: BqcComplex, out: *mut BqcComplex) -> BqcStatus {
    guard(|| write(out, extension::extremal_beltrami(k, z.into())?.into()))
}

/// # Safety
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_bounds(k: f64, out: *mut BqcBoundRow) -> BqcStatus {
    guard(|| {
        let r = extremal::bound_row(k)?;
        write(out, BqcBoundRow { k: r.k, becker_sharp: r.becker_sharp, fekete_szego: r.fekete_szego, krushkal: r.krushkal })
    })
}

/// Positive root of `4k² + (3 + 8√3/9)k − 1`.
#[no_mangle]
pub extern "C" fn bqc_threshold_k_star() -> f64 {
    criteria::threshold_k_star()
}

fn check<F>(f: *const c_char, k: f64, out: *mut BqcCheckReport, run: F) -> BqcStatus
where
    F: FnOnce(&AnalyticSample, f64, &DiskGrid) -> becker_qc::Result<CheckReport>,
{
    guard(|| unsafe {
        let sample = AnalyticSample::parse(string(f)?)?;
        let r = run(&sample, k, &DiskGrid::default())?;
        let worst = BqcComplex { re: r.worst_point[0], im: r.worst_point[1] };
        write(out, BqcCheckReport { ok: r.ok as i32, margin: r.margin, worst_point: worst })
    })
}

/// Ahlfors–Weill type criterion for the map given as an expression in `z`.
///
/// # Safety
/// `f` is a NUL-terminated string and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_check_aw_becker(f: *const c_char, k: f64, out: *mut BqcCheckReport) -> BqcStatus {
    check(f, k, out, criteria::check_aw_becker)
}

/// `(1 − |z|²)|f''/f'| <= k` for the map given as an expression in `z`.
///
/// # Safety
/// `f` is a NUL-terminated string and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bqc_check_pre_schwarzian(f: *const c_char, k: f64, out: *mut BqcCheckReport) -> BqcStatus {
    check(f, k, out, criteria::check_pre_schwarzian)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_are_stable() {
        assert_eq!(BqcStatus::Ok as i32, 0);
        assert_eq!(status_of(&Error::Parse(String::new())), BqcStatus::Parse);
        assert_eq!(BqcStatus::Panic as i32, 14);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, BqcStatus::Panic);
        let mut buf = [0 as c_char; 16];
        let n = unsafe { bqc_last_error_message(buf.as_mut_ptr(), buf.len()) };
        assert_eq!(n, 4);
        assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), "boom");
    }
}
