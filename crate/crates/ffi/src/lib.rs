//! C ABI over the bubblestab library.
//!
//! Every function returns a [`BsStatus`]; on failure the message is available from
//! [`bs_last_error_message`] on the same thread. Handles are opaque and owned by the caller,
//! who releases them with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bubblestab::fem::{solve_domain, TorsionField};
use bubblestab::geometry::{boundary_trace, geometry_summary, GeometrySummary, StarDomain};
use bubblestab::identities::{identity_suite, IdentityName};
use bubblestab::oracles::{f_sup, FMode};
use bubblestab::pipeline::{run_domain, RunOptions, DENSE_SAMPLES};
use bubblestab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDomain = 3,
    PointOutside = 4,
    NumericalFailure = 5,
    NotAvailable = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsIdentity {
    Fundamental = 0,
    Sbt = 1,
    HeintzeKarcher = 2,
    Wps = 3,
    WpsCenterOfMass = 4,
    Volume = 5,
    Minkowski = 6,
    DeficitEquivalence = 7,
}

fn identity_name(code: i32) -> Option<IdentityName> {
    const NAMES: [IdentityName; 8] = [
        IdentityName::Fundamental,
        IdentityName::Sbt,
        IdentityName::HeintzeKarcher,
        IdentityName::Wps,
        IdentityName::WpsCenterOfMass,
        IdentityName::Volume,
        IdentityName::Minkowski,
        IdentityName::DeficitEquivalence,
    ];
    usize::try_from(code).ok().and_then(|i| NAMES.get(i).copied())
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BsGeometry {
    pub area: f64,
    pub perimeter: f64,
    pub h0: f64,
    pub diameter: f64,
    pub r_interior: f64,
    pub r_exterior: f64,
    pub center_of_mass_x: f64,
    pub center_of_mass_y: f64,
}

impl From<&GeometrySummary> for BsGeometry {
    fn from(s: &GeometrySummary) -> Self {
        BsGeometry {
            area: s.area,
            perimeter: s.perimeter,
            h0: s.h0,
            diameter: s.diameter,
            r_interior: s.r_interior,
            r_exterior: s.r_exterior,
            center_of_mass_x: s.center_of_mass[0],
            center_of_mass_y: s.center_of_mass[1],
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BsIdentityResult {
    pub lhs: f64,
    pub rhs: f64,
    pub residual_abs: f64,
    pub residual_rel: f64,
    /// Zero when the identity's hypotheses fail on this domain.
    pub applicable: i32,
}

/// Opaque star-shaped domain.
pub struct BsDomain {
    domain: StarDomain,
    summary: GeometrySummary,
}

/// Opaque torsion solution on a domain.
pub struct BsField {
    field: TorsionField,
    summary: GeometrySummary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BsStatus {
    match e {
        Error::InvalidDomain(_) => BsStatus::InvalidDomain,
        Error::InvalidArgument(_) | Error::Config(_) => BsStatus::InvalidArgument,
        Error::PointOutside { .. } => BsStatus::PointOutside,
        _ => BsStatus::NumericalFailure,
    }
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard<F: FnOnce() -> Result<(), (BsStatus, String)>>(f: F) -> BsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            BsStatus::Panic
        }
    }
}

fn lib<T>(r: bubblestab::Result<T>) -> Result<T, (BsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (BsStatus, String) {
    (BsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or valid for reads of `T`.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (BsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or valid for writes of `T`.
unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), (BsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `out` must be null or valid for writing one pointer.
unsafe fn emit_domain(
    out: *mut *mut BsDomain,
    build: impl FnOnce() -> Result<StarDomain, (BsStatus, String)>,
) -> Result<(), (BsStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let domain = build()?;
    let trace = lib(boundary_trace(&domain, DENSE_SAMPLES))?;
    let summary = geometry_summary(&domain, &trace);
    out.write(Box::into_raw(Box::new(BsDomain { domain, summary })));
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn bs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Disk of the given radius about the origin.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_domain_disk(radius: f64, out: *mut *mut BsDomain) -> BsStatus {
    guard(|| emit_domain(out, || lib(StarDomain::disk(radius))))
}

/// Axis-aligned ellipse about the origin.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_domain_ellipse(semi_x: f64, semi_y: f64, out: *mut *mut BsDomain) -> BsStatus {
    guard(|| emit_domain(out, || lib(StarDomain::ellipse(semi_x, semi_y))))
}

/// `ρ(θ) = 1 + t cos kθ`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_domain_perturbed_disk(t: f64, k: usize, out: *mut *mut BsDomain) -> BsStatus {
    guard(|| emit_domain(out, || lib(StarDomain::perturbed_disk(t, k))))
}

/// `ρ(θ) = base + Σ cos_coeffs[k-1] cos kθ + Σ sin_coeffs[k-1] sin kθ` about `(cx, cy)`.
///
/// # Safety
/// Coefficient arrays must be valid for their lengths (or null with length 0);
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_domain_fourier(
    base_radius: f64,
    cos_coeffs: *const f64,
    n_cos: usize,
    sin_coeffs: *const f64,
    n_sin: usize,
    cx: f64,
    cy: f64,
    out: *mut *mut BsDomain,
) -> BsStatus {
    guard(|| {
        let slice = |p: *const f64, n: usize, what: &str| {
            if n == 0 {
                Ok(vec![])
            } else if p.is_null() {
                Err(null(what))
            } else {
                Ok(std::slice::from_raw_parts(p, n).to_vec())
            }
        };
        emit_domain(out, || {
            let a = slice(cos_coeffs, n_cos, "cos_coeffs")?;
            let b = slice(sin_coeffs, n_sin, "sin_coeffs")?;
            lib(StarDomain::fourier(base_radius, a, b, [cx, cy]))
        })
    })
}

/// # Safety
/// `domain` must be null or a handle from a `bs_domain_*` constructor not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_domain_free(domain: *mut BsDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// # Safety
/// `domain` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bs_domain_geometry(domain: *const BsDomain, out: *mut BsGeometry) -> BsStatus {
    guard(|| {
        let d = deref(domain, "domain")?;
        write_out(out, BsGeometry::from(&d.summary), "out")
    })
}

/// Solves `Δu = 2`, `u = 0` on the boundary with `n_radial × n_angular` quadratic elements.
///
/// # Safety
/// `domain` must be a live handle and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_solve(
    domain: *const BsDomain,
    n_radial: usize,
    n_angular: usize,
    out: *mut *mut BsField,
) -> BsStatus {
    guard(|| {
        let d = deref(domain, "domain")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let field = lib(solve_domain(&d.domain, n_radial, n_angular))?;
        let h = Box::new(BsField {
            field,
            summary: d.summary,
        });
        write_out(out, Box::into_raw(h), "out")
    })
}

/// # Safety
/// `field` must be null or a handle from [`bs_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_field_free(field: *mut BsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Value and gradient at `(x, y)`; `grad` receives two doubles and may be null.
///
/// # Safety
/// `field` must be a live handle; `value` valid for one double, `grad` null or valid for two.
#[no_mangle]
pub unsafe extern "C" fn bs_field_evaluate(field: *const BsField, x: f64, y: f64, value: *mut f64, grad: *mut f64) -> BsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let (u, g) = lib(f.field.evaluate([x, y]))?;
        write_out(value, u, "value")?;
        if !grad.is_null() {
            grad.write(g[0]);
            grad.add(1).write(g[1]);
        }
        Ok(())
    })
}

/// `max |∇u|` over the mesh quadrature and boundary samples.
///
/// # Safety
/// `field` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bs_field_max_gradient(field: *const BsField, out: *mut f64) -> BsStatus {
    guard(|| write_out(out, deref(field, "field")?.field.max_gradient, "out"))
}

/// Number of local minimum points of `u`.
///
/// # Safety
/// `field` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bs_field_min_point_count(field: *const BsField, out: *mut usize) -> BsStatus {
    guard(|| write_out(out, deref(field, "field")?.field.min_points.len(), "out"))
}

/// Minimum point `index` (deepest first) into `xy[0..2]`.
///
/// # Safety
/// `field` must be a live handle and `xy` valid for two doubles.
#[no_mangle]
pub unsafe extern "C" fn bs_field_min_point(field: *const BsField, index: usize, xy: *mut f64) -> BsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let p = f
            .field
            .min_points
            .get(index)
            .ok_or((BsStatus::InvalidArgument, format!("minimum index {index} out of range")))?;
        if xy.is_null() {
            return Err(null("xy"));
        }
        xy.write(p[0]);
        xy.add(1).write(p[1]);
        Ok(())
    })
}

/// Nodal L∞ error against the closed-form solution; `BS_STATUS_NOT_AVAILABLE` without one.
///
/// # Safety
/// `field` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bs_field_nodal_error(field: *const BsField, out: *mut f64) -> BsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let exact = f
            .field
            .domain
            .exact_torsion()
            .ok_or((BsStatus::NotAvailable, "no closed-form solution for this shape".to_string()))?;
        write_out(out, f.field.nodal_error(&exact), "out")
    })
}

/// Evaluates one integral identity, given as a `BsIdentity` value, on the solution.
///
/// # Safety
/// `field` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bs_field_identity(field: *const BsField, identity: i32, out: *mut BsIdentityResult) -> BsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let name =
            identity_name(identity).ok_or((BsStatus::InvalidArgument, format!("unknown identity code {identity}")))?;
        let reports = lib(identity_suite(&f.field, &f.field.trace, &f.summary))?;
        let r = reports
            .iter()
            .find(|r| r.name == name)
            .ok_or((BsStatus::NotAvailable, format!("identity {} not evaluated", name.as_str())))?;
        write_out(
            out,
            BsIdentityResult {
                lhs: r.lhs,
                rhs: r.rhs,
                residual_abs: r.residual_abs,
                residual_rel: r.residual_rel,
                applicable: r.applicable as i32,
            },
            "out",
        )
    })
}

/// Supremum of the boundary-gradient factor f(κ) in dimension `n`; `derived` selects
/// the mode differentiated from the annulus solution, otherwise the printed formula.
///
/// # Safety
/// `value` must be valid for writing; `discrepancy` may be null.
#[no_mangle]
pub unsafe extern "C" fn bs_f_sup(n: usize, derived: i32, value: *mut f64, discrepancy: *mut i32) -> BsStatus {
    guard(|| {
        let mode = if derived != 0 { FMode::Derived } else { FMode::Printed };
        let s = lib(f_sup(n, mode))?;
        write_out(value, s.value, "value")?;
        if !discrepancy.is_null() {
            discrepancy.write(s.discrepancy as i32);
        }
        Ok(())
    })
}

/// Full analysis of a domain (identities, spectral, stability) as a JSON string.
/// Release the string with [`bs_string_free`].
///
/// # Safety
/// `domain` must be a live handle; `domain_id` null or NUL-terminated; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bs_analyze_json(
    domain: *const BsDomain,
    domain_id: *const c_char,
    n_radial: usize,
    n_angular: usize,
    out: *mut *mut c_char,
) -> BsStatus {
    guard(|| {
        let d = deref(domain, "domain")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let id = if domain_id.is_null() {
            "domain".to_string()
        } else {
            CStr::from_ptr(domain_id)
                .to_str()
                .map_err(|_| (BsStatus::InvalidArgument, "domain_id is not UTF-8".to_string()))?
                .to_string()
        };
        let opts = RunOptions {
            n_radial,
            n_angular,
            ..RunOptions::default()
        };
        let res = lib(run_domain(&id, &d.domain, &opts))?;
        let json = serde_json::to_string(&res).map_err(|e| (BsStatus::NumericalFailure, e.to_string()))?;
        let c = CString::new(json).map_err(|e| (BsStatus::NumericalFailure, e.to_string()))?;
        write_out(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
