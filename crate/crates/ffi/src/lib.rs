//! C interface to `radial_sobolev`.
//!
//! Every entry point returns an [`RsStatus`]; results are written through out-pointers.
//! Objects are opaque handles released by the matching `*_free` function. After a
//! failure, `rs_last_error` returns a message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use radial_sobolev::extremal::{default_initial, minimize_rayleigh, shoot_el, ExtremalResult, MinimizeOptions};
use radial_sobolev::mesh::{build_grid, Edge, GridFunction, RadialGrid, SpacingLaw};
use radial_sobolev::norms::{
    classify_regime, critical_exponent, hardy_constants, rayleigh_quotient, weighted_norm, HardySide, Regime,
};
use radial_sobolev::operators::ProblemParams;
use radial_sobolev::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Regime = 3,
    NonConvergence = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub enum RsSpacingKind {
    Uniform = 0,
    Graded = 1,
    Log = 2,
    Algebraic = 3,
}

/// Node law; `a` is the exponent, decades or scale, `b` the algebraic power.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RsSpacing {
    pub kind: RsSpacingKind,
    pub a: f64,
    pub b: f64,
}

/// `(m, p, α, θ, R)`; `R = INFINITY` for the half-line.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RsParams {
    pub m: u32,
    pub p: f64,
    pub alpha: f64,
    pub theta: f64,
    pub r_max: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RsHardy {
    pub a_m0: f64,
    pub a_m1: f64,
    /// NaN when no closed-form bound applies
    pub bound_m0: f64,
    pub bound_m1: f64,
    pub finite: bool,
    pub growth_exponent: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RsExtremalSummary {
    pub s_estimate: f64,
    pub lambda: f64,
    pub el_residual: f64,
    pub relative_residual: f64,
    pub half_mass_radius: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub struct RsGrid(Arc<RadialGrid>);
pub struct RsFunction(GridFunction);
pub struct RsExtremal(ExtremalResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RsStatus {
    match e {
        Error::Regime(_) => RsStatus::Regime,
        Error::InvalidArgument(_)
        | Error::TooFewNodes(_)
        | Error::InvalidGrid(_)
        | Error::WeightExponent(_)
        | Error::ExponentOrdering { .. }
        | Error::Config(_) => RsStatus::InvalidArgument,
        _ => RsStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (RsStatus, String)>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            RsStatus::Panic
        }
    }
}

fn lib<T>(r: radial_sobolev::Result<T>) -> Result<T, (RsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (RsStatus, String) {
    (RsStatus::NullPointer, "null pointer argument".into())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, (RsStatus, String)> {
    p.as_ref().ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), (RsStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

fn params(p: &RsParams) -> Result<ProblemParams, (RsStatus, String)> {
    lib(ProblemParams::new(p.m, p.p, p.alpha, p.theta, p.r_max))
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn rs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rs_grid_new(r_max: f64, n: usize, spacing: RsSpacing, out: *mut *mut RsGrid) -> RsStatus {
    guard(|| {
        let law = match spacing.kind {
            RsSpacingKind::Uniform => SpacingLaw::Uniform,
            RsSpacingKind::Graded => SpacingLaw::Graded { exponent: spacing.a },
            RsSpacingKind::Log => SpacingLaw::Log { decades: spacing.a },
            RsSpacingKind::Algebraic => SpacingLaw::Algebraic { scale: spacing.a, power: spacing.b },
        };
        let grid = lib(build_grid(r_max, n, law))?;
        write(out, Box::into_raw(Box::new(RsGrid(Arc::new(grid)))))
    })
}

/// # Safety
/// `grid` must come from `rs_grid_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_grid_free(grid: *mut RsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of nodes.
///
/// # Safety
/// `grid` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rs_grid_len(grid: *const RsGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.n())
}

/// Copies the nodes into `out[0..len]`; `len` must equal the node count.
///
/// # Safety
/// `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rs_grid_nodes(grid: *const RsGrid, out: *mut f64, len: usize) -> RsStatus {
    guard(|| {
        let g = deref(grid)?;
        copy_out(g.0.nodes(), out, len)
    })
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), (RsStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    if len != src.len() {
        return Err((RsStatus::InvalidArgument, format!("buffer holds {len} values, need {}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, len);
    Ok(())
}

/// Samples on `grid` from `values[0..len]`; `dirichlet` pins the far end to zero.
///
/// # Safety
/// `values` must be valid for `len` reads and `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn rs_function_new(
    grid: *const RsGrid,
    values: *const f64,
    len: usize,
    dirichlet: bool,
    out: *mut *mut RsFunction,
) -> RsStatus {
    guard(|| {
        let g = deref(grid)?;
        if values.is_null() {
            return Err(null());
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let mut u = lib(GridFunction::new(g.0.clone(), v))?;
        if dirichlet {
            u = u.with_edge(Edge::Dirichlet);
        }
        write(out, Box::into_raw(Box::new(RsFunction(u))))
    })
}

/// # Safety
/// `f` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_function_free(f: *mut RsFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// `‖u‖_{L^q_γ}`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rs_weighted_norm(f: *const RsFunction, q: f64, gamma: f64, out: *mut f64) -> RsStatus {
    guard(|| {
        let u = deref(f)?;
        write(out, lib(weighted_norm(&u.0, q, gamma))?)
    })
}

/// `‖∇^m_α u‖^p / ‖u‖^p_{L^{p*}_θ}`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rs_rayleigh_quotient(p: *const RsParams, f: *const RsFunction, out: *mut f64) -> RsStatus {
    guard(|| {
        let params = params(deref(p)?)?;
        write(out, lib(rayleigh_quotient(&deref(f)?.0, &params))?)
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rs_critical_exponent(p: *const RsParams, out: *mut f64) -> RsStatus {
    guard(|| {
        let params = params(deref(p)?)?;
        write(out, lib(critical_exponent(&params))?)
    })
}

/// 0 Sobolev, 1 Trudinger–Moser, 2 Morrey, from the sign of `α_1 − p + 1`.
#[no_mangle]
pub extern "C" fn rs_classify_regime(p: f64, alpha1: f64) -> i32 {
    match classify_regime(p, alpha1) {
        Regime::Sobolev => 0,
        Regime::TrudingerMoser => 1,
        Regime::Morrey => 2,
    }
}

/// Hardy constants with the critical target exponent; `left` selects functions vanishing
/// at the origin.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rs_hardy_constants(
    m: u32,
    p: f64,
    gamma: f64,
    theta: f64,
    left: bool,
    r_max: f64,
    out: *mut RsHardy,
) -> RsStatus {
    guard(|| {
        let side = if left { HardySide::Left } else { HardySide::Right };
        let r = lib(hardy_constants(m, p, gamma, theta, side, r_max))?;
        write(
            out,
            RsHardy {
                a_m0: r.a_m0,
                a_m1: r.a_m1,
                bound_m0: r.closed_form_bound_m0.unwrap_or(f64::NAN),
                bound_m1: r.closed_form_bound_m1.unwrap_or(f64::NAN),
                finite: r.finite,
                growth_exponent: r.growth_exponent,
            },
        )
    })
}

/// Minimizes the Rayleigh quotient from the default initial profile on `grid`. A run that
/// stops without meeting `tol_r` still yields a handle and returns `NonConvergence`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rs_minimize(
    p: *const RsParams,
    grid: *const RsGrid,
    tol_r: f64,
    max_iter: usize,
    out: *mut *mut RsExtremal,
) -> RsStatus {
    let mut converged = true;
    let status = guard(|| {
        let params = params(deref(p)?)?;
        let g = deref(grid)?;
        let opts = MinimizeOptions { tol_r, max_iter, ..MinimizeOptions::default() };
        let res = lib(minimize_rayleigh(&params, &default_initial(&g.0, &params), &opts))?;
        converged = res.converged;
        write(out, Box::into_raw(Box::new(RsExtremal(res))))
    });
    if status == RsStatus::Ok && !converged {
        set_error("minimization stopped before reaching tol_r".into());
        return RsStatus::NonConvergence;
    }
    status
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rs_extremal_summary(e: *const RsExtremal, out: *mut RsExtremalSummary) -> RsStatus {
    guard(|| {
        let r = &deref(e)?.0;
        write(
            out,
            RsExtremalSummary {
                s_estimate: r.s_estimate,
                lambda: r.lagrange_multiplier,
                el_residual: r.el_residual,
                relative_residual: r.relative_residual,
                half_mass_radius: r.half_mass_radius,
                iterations: r.iterations,
                converged: r.converged,
            },
        )
    })
}

/// Copies the gauged, normalized profile at the grid nodes.
///
/// # Safety
/// `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rs_extremal_profile(e: *const RsExtremal, out: *mut f64, len: usize) -> RsStatus {
    guard(|| copy_out(deref(e)?.0.profile.values(), out, len))
}

/// # Safety
/// `e` must come from `rs_minimize` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_extremal_free(e: *mut RsExtremal) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// `S` implied by the shooting solution with `u(0) = u0`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rs_shoot(p: *const RsParams, u0: f64, out: *mut f64) -> RsStatus {
    guard(|| {
        let params = params(deref(p)?)?;
        write(out, lib(shoot_el(&params, u0))?.s_implied)
    })
}
