//! Quadratic triangle elements and volume quadrature.
//!
//! Local numbering: vertices 0, 1, 2, then node `3 + e` on local edge `e`, which joins
//! vertices `e` and `(e+1) % 3`.

use nalgebra::Matrix6;

use crate::geometry::{gauss_legendre_01, Point, StarDomain};

/// Symmetric 2×2 stored as `[xx, xy, yy]`.
pub type Sym2 = [f64; 3];

/// Seven-point rule exact for polynomials of degree 5; weights sum to the reference area ½.
pub fn quadrature7() -> [(Point, f64); 7] {
    let a1 = 0.059_715_871_789_770;
    let b1 = 0.470_142_064_105_115;
    let a2 = 0.797_426_985_353_087;
    let b2 = 0.101_286_507_323_456;
    let w0 = 0.225 / 2.0;
    let w1 = 0.132_394_152_788_506 / 2.0;
    let w2 = 0.125_939_180_544_827 / 2.0;
    [
        ([1.0 / 3.0, 1.0 / 3.0], w0),
        ([b1, b1], w1),
        ([a1, b1], w1),
        ([b1, a1], w1),
        ([b2, b2], w2),
        ([a2, b2], w2),
        ([b2, a2], w2),
    ]
}

/// Quadratic polynomials in physical coordinates, Lagrange-interpolating at six nodes.
///
/// On straight triangles this is the usual P2 element. On triangles with one curved
/// boundary edge it keeps every global quadratic in the local space, which the
/// isoparametric construction does not.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticBasis {
    center: Point,
    scale: f64,
    /// `coeffs[k][m]`: coefficient of monomial `m` in shape function `k`; monomials are
    /// `1, X, Y, X², XY, Y²` in the scaled coordinates `(x − center)/scale`.
    coeffs: [[f64; 6]; 6],
}

fn monomials(p: Point) -> [f64; 6] {
    [1.0, p[0], p[1], p[0] * p[0], p[0] * p[1], p[1] * p[1]]
}

impl QuadraticBasis {
    pub fn new(nodes: &[Point; 6]) -> Option<Self> {
        let center = [
            (nodes[0][0] + nodes[1][0] + nodes[2][0]) / 3.0,
            (nodes[0][1] + nodes[1][1] + nodes[2][1]) / 3.0,
        ];
        let scale = nodes
            .iter()
            .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
            .fold(0.0, f64::max);
        if !(scale > 0.0) {
            return None;
        }
        let v = Matrix6::from_fn(|r, c| {
            monomials([(nodes[r][0] - center[0]) / scale, (nodes[r][1] - center[1]) / scale])[c]
        });
        let inv = v.try_inverse()?;
        // shape function k has coefficient vector = column k of V⁻¹
        let coeffs = std::array::from_fn(|k| std::array::from_fn(|m| inv[(m, k)]));
        Some(QuadraticBasis { center, scale, coeffs })
    }

    fn local(&self, x: Point) -> Point {
        [(x[0] - self.center[0]) / self.scale, (x[1] - self.center[1]) / self.scale]
    }

    pub fn values(&self, x: Point) -> [f64; 6] {
        let m = monomials(self.local(x));
        self.coeffs.map(|c| (0..6).map(|i| c[i] * m[i]).sum())
    }

    pub fn gradients(&self, x: Point) -> [[f64; 2]; 6] {
        let [px, py] = self.local(x);
        let s = self.scale;
        self.coeffs.map(|c| {
            [
                (c[1] + 2.0 * c[3] * px + c[4] * py) / s,
                (c[2] + c[4] * px + 2.0 * c[5] * py) / s,
            ]
        })
    }

    pub fn hessians(&self) -> [Sym2; 6] {
        let s2 = self.scale * self.scale;
        self.coeffs.map(|c| [2.0 * c[3] / s2, c[4] / s2, 2.0 * c[5] / s2])
    }

    pub fn value(&self, u: &[f64; 6], x: Point) -> f64 {
        let n = self.values(x);
        (0..6).map(|k| u[k] * n[k]).sum()
    }

    pub fn gradient(&self, u: &[f64; 6], x: Point) -> Point {
        let g = self.gradients(x);
        let mut out = [0.0; 2];
        for k in 0..6 {
            out[0] += u[k] * g[k][0];
            out[1] += u[k] * g[k][1];
        }
        out
    }

    pub fn hessian(&self, u: &[f64; 6]) -> Sym2 {
        let h = self.hessians();
        let mut out = [0.0; 3];
        for k in 0..6 {
            for c in 0..3 {
                out[c] += u[k] * h[k][c];
            }
        }
        out
    }
}

/// Physical quadrature points and weights for the triangle `v`.
pub fn triangle_quadrature(v: &[Point; 3]) -> Vec<(Point, f64)> {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]);
    quadrature7()
        .iter()
        .map(|&(xi, w)| {
            let l = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
            let x = [
                l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
                l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
            ];
            (x, w * det)
        })
        .collect()
}

/// Quadrature over the region between the chord `a → b` and the boundary arc
/// `γ(θ), θ ∈ [theta0, theta0 + dtheta]` joining the same points. Weights are signed: they
/// are negative where the arc bends inside the chord.
pub fn segment_quadrature(domain: &StarDomain, a: Point, b: Point, theta0: f64, dtheta: f64) -> Vec<(Point, f64)> {
    let chord = [b[0] - a[0], b[1] - a[1]];
    let gauss5 = gauss_legendre_01(5).expect("supported order");
    let gauss3 = gauss_legendre_01(3).expect("supported order");
    let mut out = Vec::with_capacity(15);
    for &(s, ws) in &gauss5 {
        let theta = theta0 + s * dtheta;
        let g = domain.point(theta);
        let dg = domain.tangent(theta);
        let phi = [g[0] - a[0] - s * chord[0], g[1] - a[1] - s * chord[1]];
        let dphi = [dg[0] * dtheta - chord[0], dg[1] * dtheta - chord[1]];
        for &(t, wt) in &gauss3 {
            // P(s,t) = a + s·chord + t·φ(s)
            let x = [a[0] + s * chord[0] + t * phi[0], a[1] + s * chord[1] + t * phi[1]];
            let ds = [chord[0] + t * dphi[0], chord[1] + t * dphi[1]];
            let jac = phi[0] * ds[1] - phi[1] * ds[0];
            out.push((x, ws * wt * jac));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine_nodes() -> [Point; 6] {
        [[0.0, 0.0], [2.0, 0.5], [0.3, 1.5], [1.0, 0.25], [1.15, 1.0], [0.15, 0.75]]
    }

    #[test]
    fn lagrange_property() {
        let nodes = affine_nodes();
        let b = QuadraticBasis::new(&nodes).unwrap();
        for (i, p) in nodes.iter().enumerate() {
            let v = b.values(*p);
            for k in 0..6 {
                let expect = if k == i { 1.0 } else { 0.0 };
                assert!((v[k] - expect).abs() < 1e-12);
            }
        }
        let g = b.gradients([0.7, 0.4]);
        assert!(g.iter().map(|d| d[0]).sum::<f64>().abs() < 1e-12);
        assert!(g.iter().map(|d| d[1]).sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn quadrature_degree_five() {
        let q = quadrature7();
        // ∫ ξ^a η^b over the reference triangle = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).map(|v| v as f64).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let approx: f64 = q.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                assert!((approx - exact).abs() < 1e-14, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn quadratics_reproduced_with_curved_nodes() {
        // mid-edge node pushed off the chord: global quadratics stay exact
        let mut nodes = affine_nodes();
        nodes[4] = [1.3, 1.1];
        let f = |p: Point| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[0] + 0.3 * p[0] * p[1] - 0.7 * p[1] * p[1];
        let u: [f64; 6] = std::array::from_fn(|k| f(nodes[k]));
        let b = QuadraticBasis::new(&nodes).unwrap();
        let h = b.hessian(&u);
        assert!((h[0] - 1.0).abs() < 1e-12 && (h[1] - 0.3).abs() < 1e-12 && (h[2] + 1.4).abs() < 1e-12);
        let x = [0.6, 0.5];
        let g = b.gradient(&u, x);
        assert!((g[0] - (2.0 + x[0] + 0.3 * x[1])).abs() < 1e-12);
        assert!((g[1] - (-1.0 + 0.3 * x[0] - 1.4 * x[1])).abs() < 1e-12);
        assert!((b.value(&u, x) - f(x)).abs() < 1e-12);
    }

    #[test]
    fn segment_area_of_disk_cap() {
        let d = StarDomain::disk(1.0).unwrap();
        let (t0, dt) = (0.3, 0.4);
        let q = segment_quadrature(&d, d.point(t0), d.point(t0 + dt), t0, dt);
        let area: f64 = q.iter().map(|(_, w)| w).sum();
        let exact = 0.5 * (dt - dt.sin());
        assert!((area - exact).abs() < 1e-10, "{area} {exact}");
        // first moment about the origin: (2/3) sin³(dt/2) / (segment area) from the center
        let mx: f64 = q.iter().map(|(x, w)| w * x[0]).sum();
        let my: f64 = q.iter().map(|(x, w)| w * x[1]).sum();
        let dist = (2.0 / 3.0) * (dt / 2.0).sin().powi(3);
        let mid = t0 + dt / 2.0;
        assert!((mx - dist * mid.cos()).abs() < 1e-10 && (my - dist * mid.sin()).abs() < 1e-10);
    }

    #[test]
    fn triangle_quadrature_area() {
        let v = [[0.0, 0.0], [2.0, 0.5], [0.3, 1.5]];
        let area: f64 = triangle_quadrature(&v).iter().map(|(_, w)| w).sum();
        assert!((area - 0.5 * (2.0 * 1.5 - 0.5 * 0.3)).abs() < 1e-14);
    }
}
