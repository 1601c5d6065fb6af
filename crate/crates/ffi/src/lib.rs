//! C interface to the `dunkl` crate.
//!
//! Objects are opaque heap handles created by `*_new` functions and released
//! by the matching `*_free`. Every fallible call returns a [`DunklStatus`];
//! on failure [`dunkl_last_error_message`] describes the error for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dunkl::basis::{eval_basis, Kind, Params};
use dunkl::oscillation::{statistic_at, ScanOptions, Statistic};
use dunkl::perturbed::{solve_c1c2, PerturbedOperator};
use dunkl::quadrature::{build_rule, QuadratureRule};
use dunkl::spectral::synthesize_at;
use dunkl::Error;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DunklStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    SingularPoint = 3,
    Parity = 4,
    Convergence = 5,
    GridAsymmetric = 6,
    NearZeroDivision = 7,
    DegreeTooHigh = 8,
    Regime = 9,
    BadFamily = 10,
    BufferTooSmall = 11,
    InvalidArgument = 12,
    Panic = 13,
}

/// Which function to evaluate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DunklKind {
    /// Orthonormal polynomial `p_k`.
    Poly = 0,
    /// `φ_k = p_k e^{-sx²/2}`.
    Phi = 1,
    /// `ξ_k = |x|^σ φ_k`.
    Xi = 2,
}

impl From<DunklKind> for Kind {
    fn from(k: DunklKind) -> Kind {
        match k {
            DunklKind::Poly => Kind::Poly,
            DunklKind::Phi => Kind::Phi,
            DunklKind::Xi => Kind::Xi,
        }
    }
}

/// Parameters `(σ, s)` of the weight `|x|^{2σ} e^{-sx²}`.
pub struct DunklParams(Params);

/// A Gaussian quadrature rule.
pub struct DunklRule(QuadratureRule);

/// A perturbed half-line operator.
pub struct DunklOperator(PerturbedOperator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DunklStatus {
    match e {
        Error::Domain(_) => DunklStatus::Domain,
        Error::SingularPoint { .. } => DunklStatus::SingularPoint,
        Error::Parity(_) => DunklStatus::Parity,
        Error::Convergence { .. } => DunklStatus::Convergence,
        Error::GridAsymmetric => DunklStatus::GridAsymmetric,
        Error::NearZeroDivision { .. } => DunklStatus::NearZeroDivision,
        Error::DegreeTooHigh { .. } => DunklStatus::DegreeTooHigh,
        Error::Regime(_) => DunklStatus::Regime,
        Error::BadFamily(_) => DunklStatus::BadFamily,
    }
}

fn fail(status: DunklStatus, msg: impl Into<String>) -> DunklStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, converting library errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), DunklStatus>>(f: F) -> DunklStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DunklStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(DunklStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> DunklStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, DunklStatus> {
    p.as_ref()
        .ok_or_else(|| fail(DunklStatus::NullPointer, format!("{name} is null")))
}

fn check_out<T>(p: *mut T, name: &str) -> Result<(), DunklStatus> {
    if p.is_null() {
        Err(fail(DunklStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dunkl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates parameters; fails with `Domain` unless `sigma > -1/2` and `s > 0`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn dunkl_params_new(sigma: f64, s: f64, out: *mut *mut DunklParams) -> DunklStatus {
    guard(|| {
        check_out(out, "out")?;
        let p = Params::new(sigma, s).map_err(lib)?;
        *out = Box::into_raw(Box::new(DunklParams(p)));
        Ok(())
    })
}

/// # Safety
/// `params` must come from [`dunkl_params_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dunkl_params_free(params: *mut DunklParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Eigenvalue `(2k+1+2σ)s` of `φ_k`; NaN for a null handle.
///
/// # Safety
/// `params` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dunkl_eigenvalue(params: *const DunklParams, k: usize) -> f64 {
    params.as_ref().map_or(f64::NAN, |p| p.0.eigenvalue(k))
}

/// Evaluates `p_k`, `φ_k` or `ξ_k` at `x`.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dunkl_eval(
    params: *const DunklParams,
    k: usize,
    x: f64,
    kind: DunklKind,
    out: *mut f64,
) -> DunklStatus {
    guard(|| {
        let p = deref(params, "params")?;
        check_out(out, "out")?;
        *out = eval_basis(&p.0, k, x, kind.into()).map_err(lib)?.value();
        Ok(())
    })
}

/// Evaluates `Σ_{j<n} coeffs[j] φ_j(x)`.
///
/// # Safety
/// `coeffs` must point to `n` readable values (or be null with `n == 0`).
#[no_mangle]
pub unsafe extern "C" fn dunkl_synthesize(
    params: *const DunklParams,
    coeffs: *const f64,
    n: usize,
    x: f64,
    out: *mut f64,
) -> DunklStatus {
    guard(|| {
        let p = deref(params, "params")?;
        check_out(out, "out")?;
        let c: &[f64] = if n == 0 {
            &[]
        } else {
            if coeffs.is_null() {
                return Err(fail(DunklStatus::NullPointer, "coeffs is null"));
            }
            std::slice::from_raw_parts(coeffs, n)
        };
        *out = synthesize_at(&p.0, c, x);
        Ok(())
    })
}

/// Builds the `k`-point Gaussian rule.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dunkl_rule_new(
    params: *const DunklParams,
    k: usize,
    out: *mut *mut DunklRule,
) -> DunklStatus {
    guard(|| {
        let p = deref(params, "params")?;
        check_out(out, "out")?;
        let rule = build_rule(&p.0, k).map_err(lib)?;
        *out = Box::into_raw(Box::new(DunklRule(rule)));
        Ok(())
    })
}

/// # Safety
/// `rule` must come from [`dunkl_rule_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dunkl_rule_free(rule: *mut DunklRule) {
    if !rule.is_null() {
        drop(Box::from_raw(rule));
    }
}

/// Number of nodes; 0 for a null handle.
///
/// # Safety
/// `rule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dunkl_rule_len(rule: *const DunklRule) -> usize {
    rule.as_ref().map_or(0, |r| r.0.len())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize) -> Result<(), DunklStatus> {
    check_out(buf, "buf")?;
    if cap < src.len() {
        return Err(fail(
            DunklStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Copies the nodes (decreasing) into `buf`.
///
/// # Safety
/// `buf` must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn dunkl_rule_nodes(rule: *const DunklRule, buf: *mut f64, cap: usize) -> DunklStatus {
    guard(|| copy_out(&deref(rule, "rule")?.0.nodes, buf, cap))
}

/// Copies the weights into `buf`.
///
/// # Safety
/// `buf` must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn dunkl_rule_weights(rule: *const DunklRule, buf: *mut f64, cap: usize) -> DunklStatus {
    guard(|| copy_out(&deref(rule, "rule")?.0.weights, buf, cap))
}

/// Normalized value of an eigenfunction estimate at one degree; `name` is
/// one of `thm11_i`, `thm11_ii`, `thm11_iii`, `thm12`, `thm13_i`,
/// `thm13_ii`, `root_spacing`, `lemmaF`, `lemmaG`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dunkl_estimate(
    params: *const DunklParams,
    name: *const c_char,
    k: usize,
    out: *mut f64,
) -> DunklStatus {
    guard(|| {
        let p = deref(params, "params")?;
        check_out(out, "out")?;
        if name.is_null() {
            return Err(fail(DunklStatus::NullPointer, "name is null"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| fail(DunklStatus::InvalidArgument, "name is not UTF-8"))?;
        let stat = Statistic::parse(name)
            .ok_or_else(|| fail(DunklStatus::InvalidArgument, format!("unknown statistic {name}")))?;
        let (v, _) = statistic_at(&p.0, stat, k, &ScanOptions::default()).map_err(lib)?;
        *out = v;
        Ok(())
    })
}

/// Solves for the operators `H - 2c₁x⁻¹ d/dx + c₂x⁻²`. Up to `cap` handles
/// are written to `out`; `count` receives the number of operators found
/// (0, 1 or 2). Fails with `BufferTooSmall` if `cap < count`.
///
/// # Safety
/// `out` must be valid for `cap` writes and `count` for one.
#[no_mangle]
pub unsafe extern "C" fn dunkl_solve_c1c2(
    c1: f64,
    c2: f64,
    s: f64,
    out: *mut *mut DunklOperator,
    cap: usize,
    count: *mut usize,
) -> DunklStatus {
    guard(|| {
        check_out(count, "count")?;
        if !(s > 0.0) {
            return Err(fail(DunklStatus::Domain, format!("s must be > 0, got {s}")));
        }
        let ops = solve_c1c2(c1, c2, s);
        *count = ops.len();
        if ops.is_empty() {
            return Ok(());
        }
        check_out(out, "out")?;
        if cap < ops.len() {
            return Err(fail(
                DunklStatus::BufferTooSmall,
                format!("{} operators found, room for {cap}", ops.len()),
            ));
        }
        for (i, op) in ops.into_iter().enumerate() {
            *out.add(i) = Box::into_raw(Box::new(DunklOperator(op)));
        }
        Ok(())
    })
}

/// # Safety
/// `op` must come from [`dunkl_solve_c1c2`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dunkl_operator_free(op: *mut DunklOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// `σ` of the conjugated oscillator; NaN for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dunkl_operator_sigma(op: *const DunklOperator) -> f64 {
    op.as_ref().map_or(f64::NAN, |o| o.0.sigma())
}

/// Eigenvalue `(4k+1+2σ)s`; NaN for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dunkl_operator_eigenvalue(op: *const DunklOperator, k: usize) -> f64 {
    op.as_ref().map_or(f64::NAN, |o| o.0.eigenvalue(k))
}

/// Value of the `k`-th normalized eigenfunction at `x > 0`.
///
/// # Safety
/// `op` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dunkl_operator_eigenfunction(
    op: *const DunklOperator,
    k: usize,
    x: f64,
    out: *mut f64,
) -> DunklStatus {
    guard(|| {
        let o = deref(op, "op")?;
        check_out(out, "out")?;
        *out = o.0.eigen_value_at(k, x).map_err(lib)?;
        Ok(())
    })
}
