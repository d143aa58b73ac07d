//! C ABI over the corner-nystrom solver.
//!
//! Every function returns a [`CnStatus`]; on failure the message is available
//! from [`cn_last_error_message`] on the same thread. Solutions are opaque
//! handles released with [`cn_solution_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use corner_nystrom::cli::family_condition;
use corner_nystrom::geometry::Vec2;
use corner_nystrom::problems::{example_problem, reference_solution};
use corner_nystrom::{
    assemble, evaluate_potential, Error, LinearSystem, NystromSolution, QuadratureRule,
    SolverConfig,
};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Numerical = 3,
    Singular = 4,
    Unsupported = 5,
    Panic = 6,
}

/// Inputs of a solve. Fill with `cn_params_default` and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnParams {
    /// Example id, 1 to 5.
    pub example: u32,
    /// Interior quadrature nodes per arc.
    pub m: u32,
    pub c: f64,
    pub epsilon: f64,
    /// Tangent-deviation bound used to split off the corner arms.
    pub delta: f64,
    /// Interior angle for examples 4 and 5; ignored otherwise.
    pub phi: f64,
    /// Eliminate the second corner unknown.
    pub constrained: bool,
    /// Apply the near-corner modification.
    pub modified: bool,
}

/// A solved example.
pub struct CnSolution {
    example: u8,
    sys: LinearSystem,
    sol: NystromSolution,
    cond: Option<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CnStatus {
    match e {
        Error::InvalidArgument(_)
        | Error::InvalidGeometry(_)
        | Error::SmoothPoint { .. }
        | Error::Domain(_)
        | Error::OnBoundary { .. } => CnStatus::InvalidArgument,
        Error::Singular { .. } => CnStatus::Singular,
        Error::Unsupported(_) => CnStatus::Unsupported,
        _ => CnStatus::Numerical,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F>(f: F) -> CnStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CnStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CnStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CnStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn handle<'a>(p: *const CnSolution) -> Result<&'a CnSolution, Failure> {
    p.as_ref().ok_or(Failure::Null("solution"))
}

fn example_id(example: u32) -> Result<u8, Error> {
    u8::try_from(example)
        .map_err(|_| Error::InvalidArgument(format!("unknown example {example}")))
}

fn angle(example: u8, phi: f64) -> Option<f64> {
    matches!(example, 4 | 5).then_some(phi)
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Writes the example's default parameters for `m` nodes to `params`. For
/// examples 4 and 5 `phi` is the interior angle; it is ignored otherwise.
#[no_mangle]
pub unsafe extern "C" fn cn_params_default(
    example: u32,
    m: u32,
    phi: f64,
    params: *mut CnParams,
) -> CnStatus {
    guard(|| {
        let params = out(params, "params")?;
        let id = example_id(example)?;
        let spec = example_problem(id, angle(id, phi))?;
        let p = spec.default_params;
        *params = CnParams {
            example,
            m,
            c: p.c,
            epsilon: p.epsilon,
            delta: p.delta,
            phi: spec.angle.unwrap_or(f64::NAN),
            constrained: false,
            modified: true,
        };
        Ok(())
    })
}

/// Solves an example with a reference solution (1 to 3) and stores a new
/// handle in `solution`.
#[no_mangle]
pub unsafe extern "C" fn cn_solve(
    params: *const CnParams,
    solution: *mut *mut CnSolution,
) -> CnStatus {
    guard(|| {
        let slot = out(solution, "solution")?;
        *slot = ptr::null_mut();
        let p = *params.as_ref().ok_or(Failure::Null("params"))?;
        let id = example_id(p.example)?;
        let spec = example_problem(id, angle(id, p.phi))?;
        let g = spec.boundary_data()?;
        let m = p.m as usize;
        let config = SolverConfig::new(m, p.c, p.epsilon)?
            .with_constrained(p.constrained)
            .with_modified(p.modified);
        let kset = spec.kernels(p.delta)?;
        let rule = QuadratureRule::lobatto(m)?;
        let sys = assemble(&kset, &rule, &config, &g)?;
        let sol = sys.solve()?;
        *slot = Box::into_raw(Box::new(CnSolution {
            example: id,
            sys,
            sol,
            cond: None,
        }));
        Ok(())
    })
}

/// Releases a handle. NULL is accepted.
#[no_mangle]
pub unsafe extern "C" fn cn_solution_free(solution: *mut CnSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Supremum of the density interpolant over the boundary.
#[no_mangle]
pub unsafe extern "C" fn cn_solution_psi_norm(
    solution: *const CnSolution,
    value: *mut f64,
) -> CnStatus {
    guard(|| {
        let s = handle(solution)?;
        *out(value, "value")? = s.sol.psi_norm_inf();
        Ok(())
    })
}

/// Infinity-norm condition number of the system matrix; computed on the
/// first call and cached.
#[no_mangle]
pub unsafe extern "C" fn cn_solution_cond_inf(
    solution: *mut CnSolution,
    value: *mut f64,
) -> CnStatus {
    guard(|| {
        let s = solution.as_mut().ok_or(Failure::Null("solution"))?;
        let value = out(value, "value")?;
        let c = match s.cond {
            Some(c) => c,
            None => {
                let c = s.sys.condition_inf()?;
                s.cond = Some(c);
                c
            }
        };
        *value = c;
        Ok(())
    })
}

/// `max |A a − b|` and `|a_{1,0} − a_{2,0}|` of the solve.
#[no_mangle]
pub unsafe extern "C" fn cn_solution_diagnostics(
    solution: *const CnSolution,
    residual_inf: *mut f64,
    corner_mismatch: *mut f64,
) -> CnStatus {
    guard(|| {
        let s = handle(solution)?;
        *out(residual_inf, "residual_inf")? = s.sol.residual_inf;
        *out(corner_mismatch, "corner_mismatch")? = s.sol.corner_mismatch;
        Ok(())
    })
}

/// Potential at an interior point.
#[no_mangle]
pub unsafe extern "C" fn cn_solution_evaluate(
    solution: *const CnSolution,
    x: f64,
    y: f64,
    value: *mut f64,
) -> CnStatus {
    guard(|| {
        let s = handle(solution)?;
        let v = out(value, "value")?;
        *v = evaluate_potential(&s.sol, Vec2::new(x, y))?.value;
        Ok(())
    })
}

/// Reference solution of the solved example at `(x, y)`.
#[no_mangle]
pub unsafe extern "C" fn cn_solution_reference(
    solution: *const CnSolution,
    x: f64,
    y: f64,
    value: *mut f64,
) -> CnStatus {
    guard(|| {
        let s = handle(solution)?;
        let v = out(value, "value")?;
        let spec = example_problem(s.example, None)?;
        *v = reference_solution(&spec, Vec2::new(x, y))?;
        Ok(())
    })
}

/// Density interpolant on arc `arc` (1 to 3) at `s` in [0, 1].
#[no_mangle]
pub unsafe extern "C" fn cn_solution_density(
    solution: *const CnSolution,
    arc: u32,
    s: f64,
    value: *mut f64,
) -> CnStatus {
    guard(|| {
        let h = handle(solution)?;
        let v = out(value, "value")?;
        *v = h.sol.interpolate_density(arc as usize, s)?;
        Ok(())
    })
}

/// Copies the `3(m+2)` nodal densities, arc by arc, into `buffer`. The count
/// is always written to `needed`; a NULL or short buffer only reports it.
#[no_mangle]
pub unsafe extern "C" fn cn_solution_nodal_values(
    solution: *const CnSolution,
    buffer: *mut f64,
    len: usize,
    needed: *mut usize,
) -> CnStatus {
    guard(|| {
        let s = handle(solution)?;
        let values = s.sol.nodal_values();
        *out(needed, "needed")? = values.len();
        if !buffer.is_null() && len >= values.len() {
            ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
        }
        Ok(())
    })
}

/// Writes the `m+2` nodes and weights of the Lobatto rule. Both buffers must
/// hold at least `m+2` values.
#[no_mangle]
pub unsafe extern "C" fn cn_lobatto_rule(
    m: u32,
    nodes: *mut f64,
    weights: *mut f64,
    len: usize,
) -> CnStatus {
    guard(|| {
        if nodes.is_null() || weights.is_null() {
            return Err(Failure::Null("nodes/weights"));
        }
        let rule = QuadratureRule::lobatto(m as usize)?;
        if len < rule.len() {
            return Err(Error::InvalidArgument(format!(
                "buffers hold {len} values, the rule needs {}",
                rule.len()
            ))
            .into());
        }
        ptr::copy_nonoverlapping(rule.nodes().as_ptr(), nodes, rule.len());
        ptr::copy_nonoverlapping(rule.weights().as_ptr(), weights, rule.len());
        Ok(())
    })
}

/// Condition number of example 4 or 5 at interior angle `phi`.
#[no_mangle]
pub unsafe extern "C" fn cn_family_condition(
    params: *const CnParams,
    value: *mut f64,
) -> CnStatus {
    guard(|| {
        let p = *params.as_ref().ok_or(Failure::Null("params"))?;
        let v = out(value, "value")?;
        let id = example_id(p.example)?;
        if !matches!(id, 4 | 5) {
            return Err(Error::InvalidArgument("family condition needs example 4 or 5".into()).into());
        }
        *v = family_condition(
            id,
            p.phi,
            p.m as usize,
            Some(p.c),
            Some(p.epsilon),
            Some(p.delta),
            p.constrained,
        )?;
        Ok(())
    })
}
