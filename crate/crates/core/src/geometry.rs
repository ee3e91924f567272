//! Smooth star-shaped planar domains and their boundary data.
//!
//! A domain is described in polar form about its center, `x = c + ρ(θ)(cos θ, sin θ)`,
//! with `ρ` either a finite Fourier sum or the polar form of an axis-aligned ellipse.
//! Both give closed-form `ρ′` and `ρ″`, so curvature and normals carry no
//! finite-difference noise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Number of points used to check `ρ > 0` when the coefficient test is inconclusive.
const POSITIVITY_GRID: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusProfile {
    /// `ρ(θ) = base_radius + Σ a_k cos kθ + Σ b_k sin kθ`, with `k` starting at 1.
    Fourier {
        base_radius: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    },
    /// `ρ(θ) = ab / sqrt(b² cos²θ + a² sin²θ)`.
    Ellipse { semi_x: f64, semi_y: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarDomain {
    pub profile: RadiusProfile,
    pub center: Point,
}

impl StarDomain {
    pub fn fourier(
        base_radius: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
        center: Point,
    ) -> Result<Self> {
        let domain = StarDomain {
            profile: RadiusProfile::Fourier {
                base_radius,
                cos_coeffs,
                sin_coeffs,
            },
            center,
        };
        domain.validate()?;
        Ok(domain)
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::fourier(radius, vec![], vec![], [0.0, 0.0])
    }

    pub fn ellipse(semi_x: f64, semi_y: f64) -> Result<Self> {
        let domain = StarDomain {
            profile: RadiusProfile::Ellipse { semi_x, semi_y },
            center: [0.0, 0.0],
        };
        domain.validate()?;
        Ok(domain)
    }

    /// `ρ(θ) = 1 + t cos kθ` about the origin.
    pub fn perturbed_disk(t: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("perturbation mode must be >= 1".into()));
        }
        let mut cos_coeffs = vec![0.0; k];
        cos_coeffs[k - 1] = t;
        Self::fourier(1.0, cos_coeffs, vec![], [0.0, 0.0])
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidDomain("center must be finite".into()));
        }
        match &self.profile {
            RadiusProfile::Fourier {
                base_radius,
                cos_coeffs,
                sin_coeffs,
            } => {
                if !(base_radius.is_finite() && *base_radius > 0.0) {
                    return Err(Error::InvalidDomain(format!(
                        "base_radius must be positive, got {base_radius}"
                    )));
                }
                if cos_coeffs.iter().chain(sin_coeffs).any(|c| !c.is_finite()) {
                    return Err(Error::InvalidDomain("non-finite Fourier coefficient".into()));
                }
                let total: f64 = cos_coeffs.iter().chain(sin_coeffs).map(|c| c.abs()).sum();
                if total < *base_radius {
                    return Ok(());
                }
            }
            RadiusProfile::Ellipse { semi_x, semi_y } => {
                if !(semi_x.is_finite() && semi_y.is_finite() && *semi_x > 0.0 && *semi_y > 0.0) {
                    return Err(Error::InvalidDomain(format!(
                        "ellipse semi-axes must be positive, got ({semi_x}, {semi_y})"
                    )));
                }
                return Ok(());
            }
        }
        let min_rho = (0..POSITIVITY_GRID)
            .map(|i| self.radius(2.0 * PI * i as f64 / POSITIVITY_GRID as f64).0)
            .fold(f64::INFINITY, f64::min);
        if min_rho > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!(
                "radius function is not positive (min {min_rho:.3e} on the check grid)"
            )))
        }
    }

    /// Returns `(ρ, ρ′, ρ″)` at angle `theta`.
    pub fn radius(&self, theta: f64) -> (f64, f64, f64) {
        match &self.profile {
            RadiusProfile::Fourier {
                base_radius,
                cos_coeffs,
                sin_coeffs,
            } => {
                let mut r = *base_radius;
                let mut dr = 0.0;
                let mut ddr = 0.0;
                for (i, a) in cos_coeffs.iter().enumerate() {
                    let k = (i + 1) as f64;
                    let (s, c) = (k * theta).sin_cos();
                    r += a * c;
                    dr -= a * k * s;
                    ddr -= a * k * k * c;
                }
                for (i, b) in sin_coeffs.iter().enumerate() {
                    let k = (i + 1) as f64;
                    let (s, c) = (k * theta).sin_cos();
                    r += b * s;
                    dr += b * k * c;
                    ddr -= b * k * k * s;
                }
                (r, dr, ddr)
            }
            RadiusProfile::Ellipse { semi_x, semi_y } => {
                let (a, b) = (*semi_x, *semi_y);
                let (s, c) = theta.sin_cos();
                let (s2, c2) = (2.0 * theta).sin_cos();
                let g = b * b * c * c + a * a * s * s;
                let dg = (a * a - b * b) * s2;
                let ddg = 2.0 * (a * a - b * b) * c2;
                let ab = a * b;
                let r = ab / g.sqrt();
                let dr = -0.5 * ab * g.powf(-1.5) * dg;
                let ddr = ab * (0.75 * g.powf(-2.5) * dg * dg - 0.5 * g.powf(-1.5) * ddg);
                (r, dr, ddr)
            }
        }
    }

    pub fn point(&self, theta: f64) -> Point {
        let (r, _, _) = self.radius(theta);
        let (s, c) = theta.sin_cos();
        [self.center[0] + r * c, self.center[1] + r * s]
    }

    /// Whether `x` lies in the open domain.
    pub fn contains(&self, x: Point) -> bool {
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        let (r, _, _) = self.radius(dy.atan2(dx));
        dx.hypot(dy) < r
    }

    /// `dγ/dθ` for the boundary parametrization `γ(θ) = c + ρ(θ)(cos θ, sin θ)`.
    pub fn tangent(&self, theta: f64) -> Point {
        let (r, dr, _) = self.radius(theta);
        let (s, c) = theta.sin_cos();
        [dr * c - r * s, dr * s + r * c]
    }

    /// Dilation about the origin by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {factor}")));
        }
        let profile = match &self.profile {
            RadiusProfile::Fourier {
                base_radius,
                cos_coeffs,
                sin_coeffs,
            } => RadiusProfile::Fourier {
                base_radius: base_radius * factor,
                cos_coeffs: cos_coeffs.iter().map(|c| c * factor).collect(),
                sin_coeffs: sin_coeffs.iter().map(|c| c * factor).collect(),
            },
            RadiusProfile::Ellipse { semi_x, semi_y } => RadiusProfile::Ellipse {
                semi_x: semi_x * factor,
                semi_y: semi_y * factor,
            },
        };
        Ok(StarDomain {
            profile,
            center: [self.center[0] * factor, self.center[1] * factor],
        })
    }

    pub fn translated(&self, shift: Point) -> Self {
        StarDomain {
            profile: self.profile.clone(),
            center: [self.center[0] + shift[0], self.center[1] + shift[1]],
        }
    }

    /// Closed-form torsion function if one is known for this shape.
    ///
    /// For the ellipse `x²/a² + y²/b² < 1` the quadratic
    /// `(x²/a² + y²/b² − 1)·a²b²/(a²+b²)` has Laplacian 2 and vanishes on the boundary;
    /// the disk is the case `a = b`.
    pub fn exact_torsion(&self) -> Option<ExactTorsion> {
        let (a, b) = match &self.profile {
            RadiusProfile::Fourier {
                base_radius,
                cos_coeffs,
                sin_coeffs,
            } if cos_coeffs.iter().chain(sin_coeffs).all(|c| *c == 0.0) => (*base_radius, *base_radius),
            RadiusProfile::Ellipse { semi_x, semi_y } => (*semi_x, *semi_y),
            _ => return None,
        };
        Some(ExactTorsion {
            semi_x: a,
            semi_y: b,
            center: self.center,
        })
    }
}

/// Quadratic torsion function of an axis-aligned ellipse (or disk).
#[derive(Clone, Copy, Debug)]
pub struct ExactTorsion {
    pub semi_x: f64,
    pub semi_y: f64,
    pub center: Point,
}

impl ExactTorsion {
    fn scale(&self) -> f64 {
        let (a2, b2) = (self.semi_x * self.semi_x, self.semi_y * self.semi_y);
        a2 * b2 / (a2 + b2)
    }

    pub fn value(&self, x: Point) -> f64 {
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        let (a2, b2) = (self.semi_x * self.semi_x, self.semi_y * self.semi_y);
        (dx * dx / a2 + dy * dy / b2 - 1.0) * self.scale()
    }

    pub fn gradient(&self, x: Point) -> Point {
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        let (a2, b2) = (self.semi_x * self.semi_x, self.semi_y * self.semi_y);
        let s = self.scale();
        [2.0 * dx / a2 * s, 2.0 * dy / b2 * s]
    }

    /// Constant Hessian `diag(2b², 2a²)/(a²+b²)`.
    pub fn hessian(&self) -> [f64; 3] {
        let (a2, b2) = (self.semi_x * self.semi_x, self.semi_y * self.semi_y);
        [2.0 * b2 / (a2 + b2), 0.0, 2.0 * a2 / (a2 + b2)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub theta: f64,
    pub point: Point,
    pub outward_normal: Point,
    /// Signed curvature; positive where the boundary bends toward the interior.
    pub curvature: f64,
    /// Arclength quadrature weight.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub samples: Vec<BoundarySample>,
}

impl BoundaryTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    pub fn min_curvature(&self) -> f64 {
        self.samples.iter().map(|s| s.curvature).fold(f64::INFINITY, f64::min)
    }

    pub fn max_curvature(&self) -> f64 {
        self.samples.iter().map(|s| s.curvature).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoidal boundary integral of `f(sample)`.
    pub fn integrate<F: FnMut(&BoundarySample) -> f64>(&self, mut f: F) -> f64 {
        self.samples.iter().map(|s| f(s) * s.weight).sum()
    }

    /// Winding number of the sampled boundary polygon around `z`.
    pub fn winding_number(&self, z: Point) -> i64 {
        let n = self.samples.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = self.samples[i].point;
            let b = self.samples[(i + 1) % n].point;
            let (ax, ay) = (a[0] - z[0], a[1] - z[1]);
            let (bx, by) = (b[0] - z[0], b[1] - z[1]);
            total += (ax * by - ay * bx).atan2(ax * bx + ay * by);
        }
        (total / (2.0 * PI)).round() as i64
    }

    pub fn contains(&self, z: Point) -> bool {
        self.winding_number(z) != 0
    }
}

/// Boundary data at `θ`, with arclength weight `|γ′(θ)|·dtheta`.
pub fn boundary_sample(domain: &StarDomain, theta: f64, dtheta: f64) -> BoundarySample {
    let (r, dr, ddr) = domain.radius(theta);
    let (s, c) = theta.sin_cos();
    // γ′ = ρ′ e_r + ρ e_θ
    let tx = dr * c - r * s;
    let ty = dr * s + r * c;
    let speed = (r * r + dr * dr).sqrt();
    let curvature = (r * r + 2.0 * dr * dr - r * ddr) / speed.powi(3);
    BoundarySample {
        theta,
        point: [domain.center[0] + r * c, domain.center[1] + r * s],
        outward_normal: [ty / speed, -tx / speed],
        curvature,
        weight: speed * dtheta,
    }
}

/// Samples the boundary on the uniform grid `θ_k = 2πk/n`.
pub fn boundary_trace(domain: &StarDomain, n_samples: usize) -> Result<BoundaryTrace> {
    boundary_trace_with_phase(domain, n_samples, 0.0)
}

/// Samples the boundary at `θ_k = 2π(k + phase)/n`. A phase of one half puts the samples
/// at the midpoints of the unshifted grid cells.
pub fn boundary_trace_with_phase(
    domain: &StarDomain,
    n_samples: usize,
    phase: f64,
) -> Result<BoundaryTrace> {
    if n_samples < 16 {
        return Err(Error::InvalidArgument(format!(
            "boundary trace needs at least 16 samples, got {n_samples}"
        )));
    }
    domain.validate()?;
    let dtheta = 2.0 * PI / n_samples as f64;
    let samples = (0..n_samples)
        .map(|k| boundary_sample(domain, (k as f64 + phase) * dtheta, dtheta))
        .collect();
    Ok(BoundaryTrace { samples })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub area: f64,
    pub perimeter: f64,
    pub h0: f64,
    pub r_ref: f64,
    pub diameter: f64,
    /// Uniform interior touching radius, capped at the diameter.
    pub r_interior: f64,
    /// Uniform exterior touching radius, capped at the diameter.
    pub r_exterior: f64,
    pub center_of_mass: Point,
}

/// Spatial dimension of the planar pipeline.
pub const PLANE_DIM: usize = 2;

pub fn geometry_summary(domain: &StarDomain, trace: &BoundaryTrace) -> GeometrySummary {
    let n = trace.len();
    let dtheta = 2.0 * PI / n as f64;
    let mut area = 0.0;
    let mut moment = [0.0, 0.0];
    for s in &trace.samples {
        let (r, _, _) = domain.radius(s.theta);
        let (sn, cs) = s.theta.sin_cos();
        area += 0.5 * r * r * dtheta;
        moment[0] += r * r * r * cs * dtheta / 3.0;
        moment[1] += r * r * r * sn * dtheta / 3.0;
    }
    let perimeter = trace.perimeter();
    let h0 = perimeter / (PLANE_DIM as f64 * area);
    let diameter = sample_diameter(trace);
    let (r_interior, r_exterior) = touching_radii(trace);
    GeometrySummary {
        area,
        perimeter,
        h0,
        r_ref: 1.0 / h0,
        diameter,
        r_interior: r_interior.min(diameter),
        r_exterior: r_exterior.min(diameter),
        center_of_mass: [
            domain.center[0] + moment[0] / area,
            domain.center[1] + moment[1] / area,
        ],
    }
}

fn sample_diameter(trace: &BoundaryTrace) -> f64 {
    let pts: Vec<Point> = trace.samples.iter().map(|s| s.point).collect();
    let mut best = 0.0f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.max(dist2(*a, *b));
        }
    }
    best.sqrt()
}

/// Largest tangent-ball radii `(interior, exterior)` such that no other boundary sample
/// falls strictly inside the ball, minimized over samples.
///
/// For a sample `p` with outward normal `n`, the interior ball `B_s(p − s n)` excludes `x`
/// iff `|x−p|² + 2s⟨x−p, n⟩ ≥ 0`, so each `x` on the inner side caps `s` at
/// `|x−p|² / (2⟨p−x, n⟩)`; the exterior case flips the sign of `n`.
pub fn touching_radii(trace: &BoundaryTrace) -> (f64, f64) {
    let mut r_int = f64::INFINITY;
    let mut r_ext = f64::INFINITY;
    for (i, p) in trace.samples.iter().enumerate() {
        let mut si = f64::INFINITY;
        let mut se = f64::INFINITY;
        for (j, x) in trace.samples.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = [x.point[0] - p.point[0], x.point[1] - p.point[1]];
            let d2 = d[0] * d[0] + d[1] * d[1];
            let along = d[0] * p.outward_normal[0] + d[1] * p.outward_normal[1];
            if along < 0.0 {
                si = si.min(d2 / (-2.0 * along));
            } else if along > 0.0 {
                se = se.min(d2 / (2.0 * along));
            }
        }
        r_int = r_int.min(si);
        r_ext = r_ext.min(se);
    }
    (r_int, r_ext)
}

/// Gauss–Legendre samples, `order` per cell of the uniform `n_cells` grid in `θ`. Exact
/// for integrands that are polynomials of degree `< 2·order` in `θ` on each cell.
pub fn boundary_trace_gauss(domain: &StarDomain, n_cells: usize, order: usize) -> Result<BoundaryTrace> {
    if n_cells < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 boundary cells, got {n_cells}")));
    }
    domain.validate()?;
    let nodes = gauss_legendre_01(order)?;
    let dtheta = 2.0 * PI / n_cells as f64;
    let samples = (0..n_cells)
        .flat_map(|k| {
            nodes
                .iter()
                .map(move |&(s, w)| boundary_sample(domain, (k as f64 + s) * dtheta, w * dtheta))
        })
        .collect();
    Ok(BoundaryTrace { samples })
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_01(order: usize) -> Result<Vec<(f64, f64)>> {
    let (x, w): (&[f64], &[f64]) = match order {
        1 => (&[0.0], &[2.0]),
        2 => (&[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], &[1.0, 1.0]),
        3 => (
            &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
            &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
        ),
        4 => (
            &[
                -0.861_136_311_594_052_6,
                -0.339_981_043_584_856_3,
                0.339_981_043_584_856_3,
                0.861_136_311_594_052_6,
            ],
            &[
                0.347_854_845_137_453_9,
                0.652_145_154_862_546_1,
                0.652_145_154_862_546_1,
                0.347_854_845_137_453_9,
            ],
        ),
        5 => (
            &[
                -0.906_179_845_938_664,
                -0.538_469_310_105_683,
                0.0,
                0.538_469_310_105_683,
                0.906_179_845_938_664,
            ],
            &[
                0.236_926_885_056_189_1,
                0.478_628_670_499_366_5,
                0.568_888_888_888_888_9,
                0.478_628_670_499_366_5,
                0.236_926_885_056_189_1,
            ],
        ),
        _ => return Err(Error::InvalidArgument(format!("Gauss order must be 1..=5, got {order}"))),
    };
    Ok(x.iter().zip(w).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect())
}

/// `(ρ_i, ρ_e)`: distance from `z` to the nearest and farthest boundary sample.
pub fn rho_bounds(trace: &BoundaryTrace, z: Point) -> Result<(f64, f64)> {
    if !trace.contains(z) {
        return Err(Error::PointOutside { x: z[0], y: z[1] });
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for s in &trace.samples {
        let d = dist2(s.point, z).sqrt();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok((lo, hi))
}

/// Relative defect `|∫ H⟨x−p, ν⟩ dS − |Γ|| / |Γ|` of Minkowski's identity.
pub fn minkowski_residual(trace: &BoundaryTrace, p: Point) -> f64 {
    let perimeter = trace.perimeter();
    let lhs = trace.integrate(|s| {
        s.curvature * ((s.point[0] - p[0]) * s.outward_normal[0] + (s.point[1] - p[1]) * s.outward_normal[1])
    });
    (lhs - perimeter).abs() / perimeter
}

pub(crate) fn dist2(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn unit_disk_trace() {
        let d = StarDomain::disk(1.0).unwrap();
        let t = boundary_trace(&d, 256).unwrap();
        for s in &t.samples {
            assert!(close(s.curvature, 1.0, 1e-10));
            let nn = (s.outward_normal[0].powi(2) + s.outward_normal[1].powi(2)).sqrt();
            assert!(close(nn, 1.0, 1e-12));
            // outward: normal parallel to position
            assert!(s.outward_normal[0] * s.point[0] + s.outward_normal[1] * s.point[1] > 0.0);
        }
        assert!(close(t.perimeter(), 2.0 * PI, 1e-10));
    }

    #[test]
    fn ellipse_curvature_at_vertex() {
        let d = StarDomain::ellipse(1.5, 1.0).unwrap();
        let t = boundary_trace(&d, 256).unwrap();
        assert!(close(t.samples[0].curvature, 1.5, 1e-8));
        // parametric oracle at (0, b): κ = b/a²
        assert!(close(t.samples[64].curvature, 1.0 / 2.25, 1e-8));
    }

    #[test]
    fn ellipse_curvature_matches_parametric_form() {
        let (a, b) = (1.5, 1.0);
        let d = StarDomain::ellipse(a, b).unwrap();
        let t = boundary_trace(&d, 64).unwrap();
        for s in &t.samples {
            // parametric angle of the same point
            let tp = (s.point[1] / b).atan2(s.point[0] / a);
            let kappa = a * b / (a * a * tp.sin().powi(2) + b * b * tp.cos().powi(2)).powf(1.5);
            assert!(close(s.curvature, kappa, 1e-10), "{} vs {}", s.curvature, kappa);
        }
    }

    #[test]
    fn perturbed_disk_curvature_linearization() {
        let t = 0.01;
        let d = StarDomain::perturbed_disk(t, 3).unwrap();
        let tr = boundary_trace(&d, 512).unwrap();
        let max_dev = tr
            .samples
            .iter()
            .map(|s| (s.curvature - (1.0 + 0.08 * (3.0 * s.theta).cos())).abs())
            .fold(0.0, f64::max);
        assert!(max_dev <= 5.0 * t * t * 81.0, "{max_dev}");
    }

    #[test]
    fn perimeter_matches_independent_quadrature() {
        let d = StarDomain::fourier(1.0, vec![0.0, 0.1, 0.05], vec![0.02], [0.3, -0.2]).unwrap();
        let tr = boundary_trace(&d, 1024).unwrap();
        // composite Simpson on |γ′| with ρ′ from 4th-order central differences of ρ
        let rho = |th: f64| d.radius(th).0;
        let h = 1e-3;
        let speed = |th: f64| {
            let dr = (-rho(th + 2.0 * h) + 8.0 * rho(th + h) - 8.0 * rho(th - h) + rho(th - 2.0 * h)) / (12.0 * h);
            (rho(th).powi(2) + dr * dr).sqrt()
        };
        let m = 20000;
        let dx = 2.0 * PI / m as f64;
        let mut simpson = speed(0.0) + speed(2.0 * PI);
        for i in 1..m {
            simpson += if i % 2 == 1 { 4.0 } else { 2.0 } * speed(i as f64 * dx);
        }
        simpson *= dx / 3.0;
        assert!((tr.perimeter() - simpson).abs() / simpson < 1e-10);
    }

    #[test]
    fn disk_summary() {
        let d = StarDomain::disk(1.0).unwrap();
        let tr = boundary_trace(&d, 512).unwrap();
        let g = geometry_summary(&d, &tr);
        assert!(close(g.area, PI, 1e-12));
        assert!(close(g.perimeter, 2.0 * PI, 1e-10));
        assert!(close(g.h0, 1.0, 1e-10));
        assert_eq!(g.h0 * g.r_ref, 1.0);
        assert!(close(g.diameter, 2.0, 1e-12));
        assert!(close(g.r_interior, 1.0, 1e-9));
        // exterior radius is unbounded for the disk and reported at the cap
        assert!(close(g.r_exterior, g.diameter, 0.0));
        assert!(g.perimeter.powi(2) >= 4.0 * PI * g.area * (1.0 - 1e-12));
    }

    #[test]
    fn perturbed_area_exact() {
        let t = 0.05;
        let d = StarDomain::perturbed_disk(t, 3).unwrap();
        let tr = boundary_trace(&d, 256).unwrap();
        let g = geometry_summary(&d, &tr);
        assert!(close(g.area, PI * (1.0 + t * t / 2.0), 1e-6));
        assert!(close(g.center_of_mass[0], 0.0, 1e-12));
    }

    #[test]
    fn ellipse_interior_radius() {
        let d = StarDomain::ellipse(1.5, 1.0).unwrap();
        let tr = boundary_trace(&d, 4096).unwrap();
        let g = geometry_summary(&d, &tr);
        assert!(close(g.r_interior, 1.0 / 1.5, 1e-3), "{}", g.r_interior);
        assert!(g.r_interior > 0.0 && g.r_exterior > 0.0);
        let (rho_i, _) = rho_bounds(&tr, [0.0, 0.0]).unwrap();
        assert!(g.r_interior <= rho_i);
    }

    #[test]
    fn concave_domain_has_finite_exterior_radius() {
        let d = StarDomain::perturbed_disk(0.35, 2).unwrap();
        let tr = boundary_trace(&d, 1024).unwrap();
        assert!(tr.min_curvature() < 0.0);
        let g = geometry_summary(&d, &tr);
        assert!(g.r_exterior < g.diameter);
        // the waist curvature caps the exterior radius
        assert!(g.r_exterior <= (1.0 / -tr.min_curvature()) * (1.0 + 1e-3));
    }

    #[test]
    fn rho_bounds_examples() {
        let d = StarDomain::disk(1.0).unwrap();
        let tr = boundary_trace(&d, 360).unwrap();
        let (a, b) = rho_bounds(&tr, [0.0, 0.0]).unwrap();
        assert!(close(a, 1.0, 1e-12) && close(b, 1.0, 1e-12));
        let (a, b) = rho_bounds(&tr, [0.3, 0.0]).unwrap();
        assert!(close(a, 0.7, 1e-12) && close(b, 1.3, 1e-12));
        let d = StarDomain::perturbed_disk(0.1, 3).unwrap();
        let tr = boundary_trace(&d, 360).unwrap();
        let (a, b) = rho_bounds(&tr, [0.0, 0.0]).unwrap();
        assert!(close(a, 0.9, 1e-9) && close(b, 1.1, 1e-9));
    }

    #[test]
    fn rho_bounds_rejects_outside_point() {
        let d = StarDomain::disk(1.0).unwrap();
        let tr = boundary_trace(&d, 64).unwrap();
        assert!(matches!(rho_bounds(&tr, [1.5, 0.0]), Err(Error::PointOutside { .. })));
    }

    #[test]
    fn minkowski_examples() {
        let d = StarDomain::disk(1.0).unwrap();
        let tr = boundary_trace(&d, 256).unwrap();
        assert!(minkowski_residual(&tr, [0.0, 0.0]) < 1e-12);

        let d = StarDomain::ellipse(1.5, 1.0).unwrap();
        let tr = boundary_trace(&d, 4096).unwrap();
        assert!(minkowski_residual(&tr, [0.2, 0.1]) <= 1e-8);

        let d = StarDomain::perturbed_disk(0.1, 3).unwrap();
        let tr = boundary_trace(&d, 512).unwrap();
        let r1 = minkowski_residual(&tr, [0.0, 0.0]);
        let r2 = minkowski_residual(&tr, [0.4, -0.3]);
        assert!((r1 - r2).abs() <= 1e-10);
    }

    #[test]
    fn minkowski_converges_under_refinement() {
        // a non-trigonometric-polynomial integrand, so the residual does not hit round-off at once
        let d = StarDomain::ellipse(2.5, 1.0).unwrap();
        let coarse = minkowski_residual(&boundary_trace(&d, 32).unwrap(), [0.1, 0.0]);
        let fine = minkowski_residual(&boundary_trace(&d, 64).unwrap(), [0.1, 0.0]);
        assert!(coarse > 1e-14);
        assert!(fine <= coarse / 16.0 || fine < 1e-13, "{coarse} {fine}");
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(StarDomain::fourier(1.0, vec![1.2], vec![], [0.0, 0.0]).is_err());
        assert!(StarDomain::disk(0.0).is_err());
        assert!(StarDomain::ellipse(1.0, -1.0).is_err());
        // coefficient sum exceeds the base radius but ρ stays positive
        assert!(StarDomain::fourier(1.0, vec![0.7, 0.4], vec![], [0.0, 0.0]).is_ok());
        let d = StarDomain::disk(1.0).unwrap();
        assert!(boundary_trace(&d, 8).is_err());
    }

    #[test]
    fn rho_bounds_monotone_in_sample_set() {
        let d = StarDomain::fourier(1.0, vec![0.05, 0.1], vec![0.03], [0.0, 0.0]).unwrap();
        let coarse = boundary_trace(&d, 64).unwrap();
        let fine = boundary_trace(&d, 256).unwrap(); // superset of the coarse grid
        let (ci, ce) = rho_bounds(&coarse, [0.05, 0.02]).unwrap();
        let (fi, fe) = rho_bounds(&fine, [0.05, 0.02]).unwrap();
        assert!(fi <= ci && fe >= ce);
    }

    proptest! {
        #[test]
        fn translation_invariance(
            a1 in -0.1f64..0.1, a3 in -0.1f64..0.1, b2 in -0.1f64..0.1,
            sx in -5.0f64..5.0, sy in -5.0f64..5.0,
        ) {
            let d = StarDomain::fourier(1.0, vec![a1, 0.0, a3], vec![0.0, b2], [0.0, 0.0]).unwrap();
            let moved = d.translated([sx, sy]);
            let t0 = boundary_trace(&d, 128).unwrap();
            let t1 = boundary_trace(&moved, 128).unwrap();
            for (p, q) in t0.samples.iter().zip(&t1.samples) {
                prop_assert!((q.point[0] - p.point[0] - sx).abs() < 1e-12);
                prop_assert!((q.point[1] - p.point[1] - sy).abs() < 1e-12);
                prop_assert_eq!(p.curvature, q.curvature);
            }
            let g0 = geometry_summary(&d, &t0);
            let g1 = geometry_summary(&moved, &t1);
            prop_assert_eq!(g0.area, g1.area);
            prop_assert_eq!(g0.perimeter, g1.perimeter);
            prop_assert_eq!(g0.h0, g1.h0);
        }

        #[test]
        fn scaling_covariance(
            a2 in -0.15f64..0.15, b1 in -0.1f64..0.1, lambda in 0.2f64..5.0,
        ) {
            let d = StarDomain::fourier(1.0, vec![0.0, a2], vec![b1], [0.1, 0.0]).unwrap();
            let s = d.scaled(lambda).unwrap();
            let t0 = boundary_trace(&d, 128).unwrap();
            let t1 = boundary_trace(&s, 128).unwrap();
            let g0 = geometry_summary(&d, &t0);
            let g1 = geometry_summary(&s, &t1);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
            prop_assert!(rel(g1.area, g0.area * lambda * lambda) < 1e-12);
            prop_assert!(rel(g1.perimeter, g0.perimeter * lambda) < 1e-12);
            prop_assert!(rel(g1.h0, g0.h0 / lambda) < 1e-12);
            for (p, q) in t0.samples.iter().zip(&t1.samples) {
                prop_assert!(rel(q.curvature * lambda, p.curvature) < 1e-11);
            }
        }
    }
}
