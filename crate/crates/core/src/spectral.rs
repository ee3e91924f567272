//! Harmonic Poincaré constants: Galerkin upper estimates over harmonic polynomials and the
//! explicit lower bound through the second Neumann eigenvalue.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{P2Space, TriMesh};
use crate::geometry::{rho_bounds, BoundaryTrace, GeometrySummary, Point, StarDomain, PLANE_DIM};
use crate::oracles::unit_ball_volume;

pub const DEFAULT_DEGREE: usize = 12;

/// Reciprocal condition number of the projected mass matrix below which the degree is reduced.
const MASS_RCOND: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Constraint {
    /// `v(x0) = 0`.
    Point { x0: Point },
    /// `∫_Ω v dx = 0`.
    MeanZero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayleighMin {
    pub value: f64,
    /// Degree actually used after any reduction.
    pub degree: usize,
}

/// Quadrature over `Ω` for the Gram matrices, taken from the curved-cell mesh rules.
pub fn domain_quadrature(domain: &StarDomain, mesh: &TriMesh) -> Result<Vec<(Point, f64)>> {
    let space = P2Space::new(domain, mesh)?;
    Ok(space.quadrature.into_iter().flatten().collect())
}

struct HarmonicBasis {
    center: Point,
    scale: f64,
    degree: usize,
}

impl HarmonicBasis {
    fn len(&self) -> usize {
        2 * self.degree + 1
    }

    /// Values and gradients of `1, Re ζ^k, Im ζ^k` (k = 1..degree), `ζ = (x + iy − c)/scale`.
    fn eval(&self, x: Point, values: &mut [f64], grads: &mut [[f64; 2]]) {
        let zeta = Complex64::new((x[0] - self.center[0]) / self.scale, (x[1] - self.center[1]) / self.scale);
        values[0] = 1.0;
        grads[0] = [0.0, 0.0];
        let mut prev = Complex64::new(1.0, 0.0);
        for k in 1..=self.degree {
            let deriv = prev * (k as f64 / self.scale);
            let pow = prev * zeta;
            values[2 * k - 1] = pow.re;
            values[2 * k] = pow.im;
            grads[2 * k - 1] = [deriv.re, -deriv.im];
            grads[2 * k] = [deriv.im, deriv.re];
            prev = pow;
        }
    }
}

/// Smallest Rayleigh quotient `∫|∇v|² / ∫v²` over harmonic polynomials of degree ≤ `degree`
/// satisfying `constraint`.
pub fn harmonic_rayleigh_min(
    domain: &StarDomain,
    mesh: &TriMesh,
    constraint: Constraint,
    degree: usize,
) -> Result<RayleighMin> {
    let quad = domain_quadrature(domain, mesh)?;
    rayleigh_min_on(domain, &quad, constraint, degree)
}

pub fn rayleigh_min_on(
    domain: &StarDomain,
    quad: &[(Point, f64)],
    constraint: Constraint,
    degree: usize,
) -> Result<RayleighMin> {
    if degree < 1 {
        return Err(Error::InvalidArgument("basis degree must be at least 1".into()));
    }
    if let Constraint::Point { x0 } = constraint {
        if !domain.contains(x0) {
            return Err(Error::PointOutside { x: x0[0], y: x0[1] });
        }
    }
    let scale = quad
        .iter()
        .map(|(x, _)| (x[0] - domain.center[0]).hypot(x[1] - domain.center[1]))
        .fold(0.0, f64::max);
    let full = HarmonicBasis {
        center: domain.center,
        scale,
        degree,
    };
    let n = full.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, n);
    let mut c = DVector::<f64>::zeros(n);
    let mut vals = vec![0.0; n];
    let mut grads = vec![[0.0; 2]; n];
    for &(x, w) in quad {
        full.eval(x, &mut vals, &mut grads);
        for i in 0..n {
            for j in 0..=i {
                a[(i, j)] += w * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                b[(i, j)] += w * vals[i] * vals[j];
            }
            if constraint == Constraint::MeanZero {
                c[i] += w * vals[i];
            }
        }
    }
    if let Constraint::Point { x0 } = constraint {
        full.eval(x0, &mut vals, &mut grads);
        c.copy_from_slice(&vals);
    }
    a.fill_upper_triangle_with_lower_triangle();
    b.fill_upper_triangle_with_lower_triangle();

    // the hierarchical basis lets a lower degree reuse the leading blocks
    let mut deg = degree;
    loop {
        let m = 2 * deg + 1;
        let q = constraint_null_space(&c.rows(0, m).into_owned());
        let ap = q.transpose() * a.view((0, 0), (m, m)) * &q;
        let bp = q.transpose() * b.view((0, 0), (m, m)) * &q;
        if let Some(value) = pencil_min(ap, bp) {
            if deg < degree {
                warn!("harmonic basis reduced from degree {degree} to {deg}");
            }
            return Ok(RayleighMin { value, degree: deg });
        }
        if deg == 1 {
            return Err(Error::LinearAlgebra("mass matrix singular at degree 1".into()));
        }
        deg -= 1;
    }
}

/// Orthonormal basis of `{y : cᵀy = 0}` from a Householder reflection mapping `c` onto `e₀`.
fn constraint_null_space(c: &DVector<f64>) -> DMatrix<f64> {
    let m = c.len();
    let norm = c.norm();
    let mut w = c.clone();
    let sign = if c[0] >= 0.0 { 1.0 } else { -1.0 };
    w[0] += sign * norm;
    let ww = w.dot(&w);
    let h = DMatrix::<f64>::identity(m, m) - (&w * w.transpose()) * (2.0 / ww);
    h.columns(1, m - 1).into_owned()
}

/// Smallest eigenvalue of `A x = λ B x`, or `None` if `B` is numerically singular.
fn pencil_min(a: DMatrix<f64>, b: DMatrix<f64>) -> Option<f64> {
    let chol = b.clone().cholesky()?;
    let l = chol.l();
    let diag = l.diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if (lo / hi).powi(2) < MASS_RCOND {
        return None;
    }
    let linv = l.solve_lower_triangular(&DMatrix::identity(a.nrows(), a.nrows()))?;
    let mut s = &linv * a * linv.transpose();
    s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    Some(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `1/√C` with `C = (1 + r^{−N/2}√(|Ω|/|B|))²(1 + μ₂^{−2}) − 1`, for a ball `B_r(x0) ⊂ Ω`.
pub fn mu0_lower_bound(r: f64, area: f64, n: usize, mu2_lower: f64) -> Result<f64> {
    if !(r > 0.0 && area > 0.0 && mu2_lower > 0.0 && n >= 1) {
        return Err(Error::InvalidArgument(format!(
            "mu0 lower bound needs positive inputs (r={r}, area={area}, mu2={mu2_lower}, N={n})"
        )));
    }
    let ball = unit_ball_volume(n);
    let t = 1.0 + r.powf(-(n as f64) / 2.0) * (area / ball).sqrt();
    let c = t * t * (1.0 + mu2_lower.powi(-2)) - 1.0;
    Ok(1.0 / c.sqrt())
}

/// `π²/d²`, a lower bound for the second Neumann eigenvalue of a convex domain of diameter `d`.
pub fn mu2_lower_convex(d: f64, trace: &BoundaryTrace) -> Result<f64> {
    if d <= 0.0 {
        return Err(Error::InvalidArgument(format!("diameter {d} must be positive")));
    }
    if !is_convex(trace) {
        return Err(Error::InvalidDomain(format!(
            "convex-domain bound requested but min curvature is {}",
            trace.min_curvature()
        )));
    }
    Ok(PI * PI / (d * d))
}

/// Nonnegative curvature up to round-off relative to the largest curvature.
pub fn is_convex(trace: &BoundaryTrace) -> bool {
    trace.min_curvature() >= -1e-9 * trace.max_curvature().abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    /// Upper estimate of `μ₀(Ω)` at `x0`.
    pub mu0_upper: f64,
    pub mubar_upper: f64,
    pub mu0_lower: Option<f64>,
    pub basis_degree: usize,
    pub mu2_lower_used: Option<f64>,
    pub x0: Point,
    /// Radius of the ball `B_r(x0) ⊂ Ω` used in the lower bound.
    pub r_used: Option<f64>,
    /// False when `mu0_lower > mu0_upper`.
    pub consistent: bool,
    /// `mu0_upper ≤ mubar_upper`, which holds for the exact constants.
    pub ordered: bool,
}

/// Upper and lower estimates at `x0`. `mu2` overrides the second Neumann eigenvalue; without
/// it the convex-domain bound is used when `Ω` is convex, and `mu0_lower` is omitted otherwise.
pub fn spectral_estimate(
    domain: &StarDomain,
    mesh: &TriMesh,
    trace: &BoundaryTrace,
    summary: &GeometrySummary,
    x0: Point,
    degree: usize,
    mu2: Option<f64>,
) -> Result<SpectralEstimate> {
    let quad = domain_quadrature(domain, mesh)?;
    let mu0 = rayleigh_min_on(domain, &quad, Constraint::Point { x0 }, degree)?;
    let mubar = rayleigh_min_on(domain, &quad, Constraint::MeanZero, degree)?;
    let mu2_used = match mu2 {
        Some(v) => Some(v),
        None if is_convex(trace) => Some(mu2_lower_convex(summary.diameter, trace)?),
        None => None,
    };
    let (r, _) = rho_bounds(trace, x0)?;
    let mu0_lower = mu2_used
        .map(|m| mu0_lower_bound(r, summary.area, PLANE_DIM, m))
        .transpose()?;
    Ok(SpectralEstimate {
        mu0_upper: mu0.value,
        mubar_upper: mubar.value,
        mu0_lower,
        basis_degree: mu0.degree.min(mubar.degree),
        mu2_lower_used: mu2_used,
        x0,
        r_used: mu0_lower.map(|_| r),
        consistent: mu0_lower.is_none_or(|l| l <= mu0.value),
        ordered: mu0.value <= mubar.value * (1.0 + 1e-9),
    })
}
