//! Closed-form reference solutions and explicit constants.
//!
//! Radially symmetric torsion functions (ball and annulus, any dimension), the
//! boundary-gradient factor `f(κ)` in its printed and re-derived forms, the gradient
//! bounds built from them, and an RK4 shooting solver for the radial equation used as an
//! independent check on the annulus formulas.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeometrySummary, Point};

/// Lebesgue measure of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallTorsion {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Row-major `n × n`.
    pub hessian: Vec<f64>,
}

/// `u(x) = (|x|² − R²)/2`, the torsion function of the ball of radius `R` centered at 0.
pub fn ball_torsion(radius: f64, x: &[f64]) -> Result<BallTorsion> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
    }
    let n = x.len();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let mut hessian = vec![0.0; n * n];
    for i in 0..n {
        hessian[i * n + i] = 1.0;
    }
    Ok(BallTorsion {
        value: 0.5 * (r2 - radius * radius),
        gradient: x.to_vec(),
        hessian,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub dimension: usize,
}

impl AnnulusSpec {
    pub fn new(inner_radius: f64, outer_radius: f64, dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {dimension}")));
        }
        if !(inner_radius > 0.0 && inner_radius < outer_radius && outer_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "annulus needs 0 < r < R, got r={inner_radius}, R={outer_radius}"
            )));
        }
        Ok(AnnulusSpec {
            inner_radius,
            outer_radius,
            dimension,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.inner_radius / self.outer_radius
    }
}

/// Torsion function `w` of the annulus at radius `rho` with its radial derivative.
pub fn annulus_torsion(spec: &AnnulusSpec, rho: f64) -> Result<(f64, f64)> {
    let (r, big_r, n) = (spec.inner_radius, spec.outer_radius, spec.dimension);
    if n < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {n}")));
    }
    if !(rho >= r && rho <= big_r) {
        return Err(Error::InvalidArgument(format!("radius {rho} outside [{r}, {big_r}]")));
    }
    let k = spec.kappa();
    if n == 2 {
        let coef = 0.5 * big_r * big_r * (1.0 - k * k) / k.ln();
        let value = 0.5 * rho * rho + coef * (rho / r).ln() - 0.5 * r * r;
        let deriv = rho + coef / rho;
        Ok((value, deriv))
    } else {
        let nf = n as f64;
        let coef = 0.5 * big_r * big_r / (1.0 - k.powi(n as i32 - 2));
        let ratio = rho / r;
        let value = 0.5 * rho * rho + coef * ((1.0 - k * k) * ratio.powf(2.0 - nf) + k.powi(n as i32) - 1.0);
        let deriv = rho + coef * (1.0 - k * k) * (2.0 - nf) * ratio.powf(1.0 - nf) / r;
        Ok((value, deriv))
    }
}

/// Self-consistency of the closed-form annulus torsion on `κ < |x| < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusCheck {
    pub dimension: usize,
    pub kappa: f64,
    /// `max(|w(κ)|, |w(1)|)`.
    pub boundary_max: f64,
    /// Largest difference from the radial shooting solution on its grid.
    pub ode_max_diff: f64,
    /// Largest `|Δw − N|` from central differences at interior radii.
    pub fd_laplacian_max: f64,
}

const ANNULUS_ODE_GRID: usize = 4096;
const ANNULUS_FD_STEP: f64 = 1e-3;

pub fn annulus_check(n: usize, kappa: f64) -> Result<AnnulusCheck> {
    let spec = AnnulusSpec::new(kappa, 1.0, n)?;
    let w = |x: f64| annulus_torsion(&spec, x).map(|v| v.0);
    let boundary_max = w(kappa)?.abs().max(w(1.0)?.abs());
    let prof = radial_ode_oracle(n, kappa, 1.0, ANNULUS_ODE_GRID)?;
    let mut ode_max_diff = 0.0f64;
    for (rho, v) in prof.radii.iter().zip(&prof.values) {
        ode_max_diff = ode_max_diff.max((v - w(rho.clamp(kappa, 1.0))?).abs());
    }
    let mut fd_laplacian_max = 0.0f64;
    for i in 1..10 {
        let rho = kappa + (1.0 - kappa) * i as f64 / 10.0;
        // fourth-order stencils; the step scales with ρ since w varies like ρ^{2−N}
        let h = ANNULUS_FD_STEP * rho;
        let (wm2, wm, w0, wp, wp2) = (w(rho - 2.0 * h)?, w(rho - h)?, w(rho)?, w(rho + h)?, w(rho + 2.0 * h)?);
        let d2 = (-wp2 + 16.0 * wp - 30.0 * w0 + 16.0 * wm - wm2) / (12.0 * h * h);
        let d1 = (-wp2 + 8.0 * wp - 8.0 * wm + wm2) / (12.0 * h);
        let lap = d2 + (n as f64 - 1.0) * d1 / rho;
        fd_laplacian_max = fd_laplacian_max.max((lap - n as f64).abs());
    }
    Ok(AnnulusCheck {
        dimension: n,
        kappa,
        boundary_max,
        ode_max_diff,
        fd_laplacian_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FMode {
    /// The boundary-gradient factor exactly as printed.
    Printed,
    /// `−κ ∂w/∂ρ(κ) / (1−κ)` for the annulus `κ < |x| < 1`.
    Derived,
}

/// The factor `f(κ)` in `w_ν(p) = R(R−r_e)/r_e · f(κ)`.
pub fn f_kappa(kappa: f64, n: usize, mode: FMode) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidArgument(format!("kappa must lie in (0,1), got {kappa}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {n}")));
    }
    match mode {
        FMode::Printed => {
            if n == 2 {
                let log_inv = (1.0 / kappa).ln();
                Ok((2.0 * kappa * kappa * log_inv + kappa * kappa - 1.0) / (2.0 * (1.0 - kappa) * log_inv))
            } else {
                let nf = n as f64;
                Ok(
                    (2.0 * kappa.powi(n as i32) - nf * kappa * kappa + nf - 2.0)
                        / (2.0 * (1.0 - kappa) * (1.0 - kappa.powi(n as i32 - 2))),
                )
            }
        }
        FMode::Derived => {
            let spec = AnnulusSpec::new(kappa, 1.0, n)?;
            let (_, dw) = annulus_torsion(&spec, kappa)?;
            // outward normal of Ω at the contact point points toward the annulus center
            Ok(-kappa * dw / (1.0 - kappa))
        }
    }
}

/// `lim f(κ)` as `κ → 0⁺` and as `κ → 1⁻`.
fn f_endpoint_limits(n: usize, mode: FMode) -> (f64, f64) {
    match (n, mode) {
        // printed N=2: numerator → −1 while log(1/κ) → ∞; near 1 the ratio tends to −1
        (2, FMode::Printed) => (0.0, -1.0),
        (2, FMode::Derived) => (0.0, 1.0),
        _ => ((n as f64 - 2.0) / 2.0, n as f64 / 2.0),
    }
}

/// Claimed bound `c_N` on `sup f`: 3/2 in the plane, `N/2` above.
pub fn c_n(n: usize) -> f64 {
    if n == 2 {
        1.5
    } else {
        n as f64 / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", content = "kappa", rename_all = "snake_case")]
pub enum SupLocation {
    Interior(f64),
    LimitAtZero,
    LimitAtOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FSup {
    pub dimension: usize,
    pub mode: FMode,
    pub value: f64,
    pub location: SupLocation,
    pub claimed_value: f64,
    pub discrepancy: bool,
}

const FSUP_GRID: usize = 10_000;
const FSUP_TOL: f64 = 1e-8;
const FSUP_MATCH_TOL: f64 = 1e-6;

/// Supremum of `f` over `(0,1)`: grid scan, golden-section refinement of the best cell,
/// then comparison with the endpoint limits.
pub fn f_sup(n: usize, mode: FMode) -> Result<FSup> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {n}")));
    }
    let h = 1.0 / FSUP_GRID as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..FSUP_GRID {
        let k = (i as f64 + 0.5) * h;
        let v = f_kappa(k, n, mode)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let centre = (best.0 as f64 + 0.5) * h;
    let lo = (centre - h).max(0.25 * h);
    let hi = (centre + h).min(1.0 - 0.25 * h);
    let (k_star, v_star) = golden_max(|k| f_kappa(k, n, mode).unwrap_or(f64::NEG_INFINITY), lo, hi);
    let (lim0, lim1) = f_endpoint_limits(n, mode);
    let (value, location) = if lim1 >= v_star && lim1 >= lim0 {
        (lim1, SupLocation::LimitAtOne)
    } else if lim0 >= v_star {
        (lim0, SupLocation::LimitAtZero)
    } else {
        (v_star, SupLocation::Interior(k_star))
    };
    let claimed_value = c_n(n);
    Ok(FSup {
        dimension: n,
        mode,
        value,
        location,
        claimed_value,
        discrepancy: (value - claimed_value).abs() > FSUP_MATCH_TOL,
    })
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > FSUP_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientBounds {
    /// `r_i`
    pub lower: f64,
    /// `c_N d(d + r_e)/r_e`
    pub upper: f64,
    /// `c₀ |Ω|^{1/N}`
    pub upper_cm: f64,
    pub c_n: f64,
    pub c0: f64,
    /// Supremum of the re-derived `f`, reported next to the claimed `c_N`.
    pub f_sup_derived: f64,
}

pub fn gradient_bounds(summary: &GeometrySummary, n: usize, c0: f64) -> Result<GradientBounds> {
    let d = summary.diameter;
    let re = summary.r_exterior;
    if !(d > 0.0 && re > 0.0 && summary.r_interior > 0.0 && summary.area > 0.0) {
        return Err(Error::InvalidArgument("geometry summary has non-positive fields".into()));
    }
    let cn = c_n(n);
    Ok(GradientBounds {
        lower: summary.r_interior,
        upper: cn * d * (d + re) / re,
        upper_cm: c0 * summary.area.powf(1.0 / n as f64),
        c_n: cn,
        c0,
        f_sup_derived: f_sup(n, FMode::Derived)?.value,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticValue {
    pub value: f64,
    pub gradient: Point,
}

/// `q(x) = ½(|x − z|² − a)`; its Hessian is the identity.
pub fn quadratic_q(z: Point, a: f64, x: Point) -> QuadraticValue {
    let d = [x[0] - z[0], x[1] - z[1]];
    QuadraticValue {
        value: 0.5 * (d[0] * d[0] + d[1] * d[1] - a),
        gradient: d,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub dimension: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    /// `w′` at the inner radius (0 for the ball).
    pub inner_derivative: f64,
    pub outer_derivative: f64,
}

/// Solves `(ρ^{N−1} w′)′ = N ρ^{N−1}` on `[r, R]` with `w(r) = w(R) = 0`, or with regularity
/// at the origin when `r = 0`, by linear shooting with classical RK4 on `grid` steps.
pub fn radial_ode_oracle(n: usize, r: f64, big_r: f64, grid: usize) -> Result<RadialProfile> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {n}")));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument(format!("radial grid needs >= 2 steps, got {grid}")));
    }
    if !(r >= 0.0 && r < big_r && big_r.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 <= r < R, got r={r}, R={big_r}")));
    }
    let nf = n as f64;
    // w″ = forcing·N − (N−1) w′/ρ; at ρ = 0 the regular solution has w′/ρ → w″(0) = forcing
    let rhs = |rho: f64, dw: f64, forcing: f64| -> f64 {
        if rho == 0.0 {
            forcing
        } else {
            forcing * nf - (nf - 1.0) * dw / rho
        }
    };
    let integrate = |w0: f64, dw0: f64, forcing: f64| -> (Vec<f64>, Vec<f64>) {
        let h = (big_r - r) / grid as f64;
        let mut w = Vec::with_capacity(grid + 1);
        let mut dw = Vec::with_capacity(grid + 1);
        let (mut y, mut v) = (w0, dw0);
        w.push(y);
        dw.push(v);
        for i in 0..grid {
            let rho = r + i as f64 * h;
            let k1y = v;
            let k1v = rhs(rho, v, forcing);
            let k2y = v + 0.5 * h * k1v;
            let k2v = rhs(rho + 0.5 * h, v + 0.5 * h * k1v, forcing);
            let k3y = v + 0.5 * h * k2v;
            let k3v = rhs(rho + 0.5 * h, v + 0.5 * h * k2v, forcing);
            let k4y = v + h * k3v;
            let k4v = rhs(rho + h, v + h * k3v, forcing);
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            w.push(y);
            dw.push(v);
        }
        (w, dw)
    };
    let radii: Vec<f64> = (0..=grid)
        .map(|i| r + (big_r - r) * i as f64 / grid as f64)
        .collect();
    let (values, derivatives) = if r == 0.0 {
        // constants are the only regular homogeneous solutions
        let (wp, dwp) = integrate(0.0, 0.0, 1.0);
        let shift = wp[grid];
        (wp.iter().map(|v| v - shift).collect::<Vec<_>>(), dwp)
    } else {
        let (wp, dwp) = integrate(0.0, 0.0, 1.0);
        let (wh, dwh) = integrate(0.0, 1.0, 0.0);
        if wh[grid] == 0.0 {
            return Err(Error::InvalidArgument("degenerate shooting solve".into()));
        }
        let s = -wp[grid] / wh[grid];
        (
            wp.iter().zip(&wh).map(|(p, q)| p + s * q).collect::<Vec<_>>(),
            dwp.iter().zip(&dwh).map(|(p, q)| p + s * q).collect::<Vec<_>>(),
        )
    };
    Ok(RadialProfile {
        dimension: n,
        inner_derivative: derivatives[0],
        outer_derivative: derivatives[grid],
        radii,
        values,
        derivatives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_examples() {
        let b = ball_torsion(1.0, &[0.0, 0.0]).unwrap();
        assert_eq!(b.value, -0.5);
        assert_eq!(b.gradient, vec![0.0, 0.0]);
        let b = ball_torsion(1.0, &[0.6, 0.8]).unwrap();
        assert!(b.value.abs() < 1e-15);
        let g: f64 = b.gradient.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((g - 1.0).abs() < 1e-15);
        let b = ball_torsion(2.0, &[1.0, 1.0]).unwrap();
        assert_eq!(b.value, -1.0);
        let b = ball_torsion(1.0, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(b.hessian, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(ball_torsion(0.0, &[0.0]).is_err());
    }

    #[test]
    fn annulus_three_dim_closed_form() {
        let spec = AnnulusSpec::new(0.5, 1.0, 3).unwrap();
        for rho in [0.5, 0.6, 0.75, 0.9, 1.0] {
            let (w, dw) = annulus_torsion(&spec, rho).unwrap();
            let expect = rho * rho / 2.0 + 0.375 / rho - 0.875;
            assert!((w - expect).abs() < 1e-14);
            assert!((dw - (rho - 0.375 / (rho * rho))).abs() < 1e-13);
        }
        assert!(annulus_torsion(&spec, 0.5).unwrap().0.abs() < 1e-15);
        assert!(annulus_torsion(&spec, 1.0).unwrap().0.abs() < 1e-15);
        assert!((annulus_torsion(&spec, 0.5).unwrap().1 + 1.0).abs() < 1e-14);
    }

    #[test]
    fn annulus_rejects_bad_input() {
        let spec = AnnulusSpec::new(0.5, 1.0, 2).unwrap();
        assert!(annulus_torsion(&spec, 0.4).is_err());
        assert!(annulus_torsion(&spec, 1.1).is_err());
        assert!(AnnulusSpec::new(0.5, 1.0, 1).is_err());
        assert!(AnnulusSpec::new(1.0, 0.5, 2).is_err());
    }

    #[test]
    fn annulus_two_dim_matches_shooting() {
        let spec = AnnulusSpec::new(0.5, 1.0, 2).unwrap();
        let prof = radial_ode_oracle(2, 0.5, 1.0, 4096).unwrap();
        // ρ = 0.75 is grid node 2048
        assert!((prof.radii[2048] - 0.75).abs() < 1e-15);
        let (w, _) = annulus_torsion(&spec, 0.75).unwrap();
        assert!((prof.values[2048] - w).abs() < 1e-8);
    }

    #[test]
    fn shooting_reproduces_ball() {
        let prof = radial_ode_oracle(2, 0.0, 1.0, 4096).unwrap();
        for (rho, w) in prof.radii.iter().zip(&prof.values) {
            assert!((w - 0.5 * (rho * rho - 1.0)).abs() < 1e-8);
        }
        assert!((prof.outer_derivative - 1.0).abs() < 1e-8);
    }

    #[test]
    fn shooting_matches_three_dim_annulus() {
        let spec = AnnulusSpec::new(0.5, 1.0, 3).unwrap();
        let prof = radial_ode_oracle(3, 0.5, 1.0, 4096).unwrap();
        let err = prof
            .radii
            .iter()
            .zip(&prof.values)
            .map(|(rho, w)| (w - annulus_torsion(&spec, *rho).unwrap().0).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn shooting_inner_derivative_five_dim() {
        let spec = AnnulusSpec::new(0.3, 1.0, 5).unwrap();
        let prof = radial_ode_oracle(5, 0.3, 1.0, 4096).unwrap();
        let (_, dw) = annulus_torsion(&spec, 0.3).unwrap();
        assert!((prof.inner_derivative - dw).abs() <= 1e-7);
    }

    #[test]
    fn shooting_rejects_bad_grid() {
        assert!(radial_ode_oracle(2, 0.0, 1.0, 1).is_err());
        assert!(radial_ode_oracle(2, 1.0, 1.0, 10).is_err());
        assert!(radial_ode_oracle(1, 0.0, 1.0, 10).is_err());
    }

    #[test]
    fn annulus_check_grid() {
        for n in 2..=6 {
            for i in 1..=9 {
                let c = annulus_check(n, i as f64 / 10.0).unwrap();
                assert!(c.boundary_max <= 1e-12 && c.ode_max_diff <= 1e-8 && c.fd_laplacian_max <= 1e-6, "{c:?}");
            }
        }
        assert!(annulus_check(2, 1.0).is_err());
    }

    #[test]
    fn annulus_fd_laplacian() {
        for n in 2..=6 {
            let spec = AnnulusSpec::new(0.4, 1.0, n).unwrap();
            let h = 1e-4;
            for rho in [0.5, 0.7, 0.9] {
                let w = |x: f64| annulus_torsion(&spec, x).unwrap().0;
                let d1 = (w(rho + h) - w(rho - h)) / (2.0 * h);
                let d2 = (w(rho + h) - 2.0 * w(rho) + w(rho - h)) / (h * h);
                let lap = d2 + (n as f64 - 1.0) * d1 / rho;
                assert!((lap - n as f64).abs() < 1e-6, "N={n} rho={rho} lap={lap}");
            }
        }
    }

    #[test]
    fn f_examples() {
        for mode in [FMode::Printed, FMode::Derived] {
            assert!((f_kappa(0.5, 3, mode).unwrap() - 1.0).abs() < 1e-14);
            assert!((f_kappa(0.5, 4, mode).unwrap() - 1.5).abs() < 1e-14);
        }
        let magnitude = {
            let k: f64 = 0.5;
            let l = (1.0 / k).ln();
            (1.0 - k * k - 2.0 * k * k * l).abs() / (2.0 * (1.0 - k) * l)
        };
        let derived = f_kappa(0.5, 2, FMode::Derived).unwrap();
        let printed = f_kappa(0.5, 2, FMode::Printed).unwrap();
        assert!((derived - magnitude).abs() < 1e-14);
        assert!((printed + magnitude).abs() < 1e-14);
        assert!((derived - 0.582).abs() < 1e-3);
        assert!(f_kappa(1.0, 3, FMode::Printed).is_err());
        assert!(f_kappa(0.0, 3, FMode::Derived).is_err());
    }

    #[test]
    fn f_modes_agree() {
        for n in 2..=8 {
            for i in 1..100 {
                let k = i as f64 / 100.0;
                let p = f_kappa(k, n, FMode::Printed).unwrap();
                let d = f_kappa(k, n, FMode::Derived).unwrap();
                if n == 2 {
                    assert!((p.abs() - d.abs()).abs() < 1e-10);
                } else {
                    assert!((p - d).abs() < 1e-10, "N={n} κ={k}: {p} vs {d}");
                }
            }
        }
    }

    #[test]
    fn f_sup_values() {
        let s3 = f_sup(3, FMode::Derived).unwrap();
        assert!((s3.value - 1.5).abs() < 1e-6);
        assert_eq!(s3.location, SupLocation::LimitAtOne);
        assert!(!s3.discrepancy);
        let s4 = f_sup(4, FMode::Derived).unwrap();
        assert!((s4.value - 2.0).abs() < 1e-6);
        let s2 = f_sup(2, FMode::Derived).unwrap();
        assert_eq!(s2.claimed_value, 1.5);
        assert!(s2.discrepancy);
        assert!((s2.value - 1.0).abs() < 1e-6);
        for n in 2..=7 {
            assert!(f_sup(n, FMode::Derived).unwrap().value <= c_n(n) + 1e-6);
        }
    }

    #[test]
    fn f_sup_exceeds_half_dimension_from_eight() {
        // interior maximum overtakes the κ → 1 limit
        let s8 = f_sup(8, FMode::Derived).unwrap();
        assert!(matches!(s8.location, SupLocation::Interior(k) if (k - 0.6749).abs() < 1e-3));
        assert!((s8.value - 4.148_018_626).abs() < 1e-8);
        assert!(s8.discrepancy);
        let p8 = f_sup(8, FMode::Printed).unwrap();
        assert!((p8.value - s8.value).abs() < 1e-10);
    }

    #[test]
    fn golden_section_finds_interior_max() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_examples() {
        assert!(quadratic_q([0.0, 0.0], 1.0, [0.6, 0.8]).value.abs() < 1e-15);
        assert_eq!(quadratic_q([0.0, 0.0], 0.0, [3.0, 4.0]).value, 12.5);
        assert_eq!(quadratic_q([0.3, -0.2], 7.0, [0.3, -0.2]).gradient, [0.0, 0.0]);
    }

    #[test]
    fn gradient_bounds_disk() {
        let s = GeometrySummary {
            area: PI,
            perimeter: 2.0 * PI,
            h0: 1.0,
            r_ref: 1.0,
            diameter: 2.0,
            r_interior: 1.0,
            r_exterior: 2.0,
            center_of_mass: [0.0, 0.0],
        };
        let g = gradient_bounds(&s, 2, 1.0).unwrap();
        assert_eq!(g.lower, 1.0);
        assert!((g.upper - 6.0).abs() < 1e-14);
        assert!((g.upper_cm - PI.sqrt()).abs() < 1e-14);
        let doubled = GeometrySummary {
            area: 4.0 * PI,
            diameter: 4.0,
            r_interior: 2.0,
            r_exterior: 4.0,
            ..s
        };
        let g2 = gradient_bounds(&doubled, 2, 1.0).unwrap();
        assert!((g2.lower - 2.0 * g.lower).abs() < 1e-14);
        assert!((g2.upper - 2.0 * g.upper).abs() < 1e-13);
    }
}
