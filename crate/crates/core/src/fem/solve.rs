use std::f64::consts::PI;

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::element::Sym2;
use super::mesh::{generate_mesh, TriMesh};
use super::space::P2Space;
use super::sparse::{pcg, CsrMatrix};
use crate::error::{Error, Result};
use crate::geometry::{boundary_trace_gauss, dist2, BoundaryTrace, ExactTorsion, Point, StarDomain, PLANE_DIM};
use crate::oracles::quadratic_q;

/// Right-hand side of `Δu = N` in the plane.
pub const SOURCE: f64 = PLANE_DIM as f64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub rel_tol: f64,
    /// Iteration cap is `max_iter_factor · √dof`.
    pub max_iter_factor: f64,
    /// Gauss points per boundary edge in the stored boundary trace.
    pub boundary_order: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_tol: 1e-10,
            max_iter_factor: 50.0,
            boundary_order: 5,
        }
    }
}

/// Field data at one volume quadrature point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadSample {
    pub element: usize,
    pub x: Point,
    pub weight: f64,
    pub u: f64,
    pub grad: Point,
    pub hess: Sym2,
}

#[derive(Clone, Debug)]
pub struct TorsionField {
    pub domain: StarDomain,
    pub mesh: TriMesh,
    pub space: P2Space,
    /// Values at all quadratic nodes (vertices first).
    pub u: Vec<f64>,
    pub grad: Vec<Point>,
    pub hess: Vec<Sym2>,
    /// Quadrature-weighted mean Hessian of each element.
    pub element_hess: Vec<Sym2>,
    pub quad: Vec<QuadSample>,
    /// Gauss samples on each boundary edge, at which `u_nu` is stored.
    pub trace: BoundaryTrace,
    pub u_nu: Vec<f64>,
    /// Largest `|∇u|` over quadrature points and boundary samples.
    pub max_gradient: f64,
    /// Local minimum points, deepest first.
    pub min_points: Vec<Point>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Plain mesh/solution dump for external plotting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldDump {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub u: Vec<f64>,
}

pub fn solve_domain(domain: &StarDomain, n_radial: usize, n_angular: usize) -> Result<TorsionField> {
    let mesh = generate_mesh(domain, n_radial, n_angular)?;
    solve_torsion(domain, mesh, &SolverOptions::default())
}

/// Solves `Δu = 2` in the domain with `u = 0` on its boundary.
pub fn solve_torsion(domain: &StarDomain, mesh: TriMesh, opts: &SolverOptions) -> Result<TorsionField> {
    let space = P2Space::new(domain, &mesh)?;
    let n = space.n_nodes();

    // free-node numbering; boundary values are fixed at zero
    let mut free = vec![usize::MAX; n];
    let mut n_free = 0;
    for i in 0..n {
        if !space.on_boundary[i] {
            free[i] = n_free;
            n_free += 1;
        }
    }

    let mut triplets = Vec::with_capacity(space.elements.len() * 36);
    let mut rhs = vec![0.0; n_free];
    for (e, el) in space.elements.iter().enumerate() {
        let basis = &space.bases[e];
        for &(x, w) in &space.quadrature[e] {
            let phi = basis.values(x);
            let grad = basis.gradients(x);
            for a in 0..6 {
                let fa = free[el[a]];
                if fa == usize::MAX {
                    continue;
                }
                // weak form of Δu = N: ∫∇u·∇φ = −N∫φ
                rhs[fa] -= SOURCE * phi[a] * w;
                for b in 0..6 {
                    let fb = free[el[b]];
                    if fb == usize::MAX {
                        continue;
                    }
                    let k = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1];
                    triplets.push((fa, fb, k * w));
                }
            }
        }
    }
    let k = CsrMatrix::from_triplets(n_free, triplets);
    let max_iter = (opts.max_iter_factor * (n_free as f64).sqrt()).ceil() as usize;
    let (x, stats) = pcg(&k, &rhs, opts.rel_tol, max_iter.max(1))?;
    debug!(
        "torsion solve: {} dof, {} iterations, residual {:.3e}",
        n_free, stats.iterations, stats.relative_residual
    );
    let mut u = vec![0.0; n];
    for i in 0..n {
        if free[i] != usize::MAX {
            u[i] = x[free[i]];
        }
    }

    let mut samples = Vec::with_capacity(space.elements.len() * 7);
    let mut element_hess = Vec::with_capacity(space.elements.len());
    let mut element_area = Vec::with_capacity(space.elements.len());
    for e in 0..space.elements.len() {
        let basis = &space.bases[e];
        let ue = space.element_values(e, &u);
        let hess = basis.hessian(&ue);
        let mut area = 0.0;
        for &(x, weight) in &space.quadrature[e] {
            area += weight;
            samples.push(QuadSample {
                element: e,
                x,
                weight,
                u: basis.value(&ue, x),
                grad: basis.gradient(&ue, x),
                hess,
            });
        }
        element_hess.push(hess);
        element_area.push(area);
    }

    // area-weighted nodal averages of the element gradients and Hessians
    let mut grad = vec![[0.0; 2]; n];
    let mut hess = vec![[0.0; 3]; n];
    let mut wsum = vec![0.0; n];
    for (e, el) in space.elements.iter().enumerate() {
        let ue = space.element_values(e, &u);
        let area = element_area[e];
        for &node in el {
            let g = space.bases[e].gradient(&ue, space.nodes[node]);
            grad[node][0] += area * g[0];
            grad[node][1] += area * g[1];
            for c in 0..3 {
                hess[node][c] += area * element_hess[e][c];
            }
            wsum[node] += area;
        }
    }
    for i in 0..n {
        grad[i] = grad[i].map(|g| g / wsum[i]);
        hess[i] = hess[i].map(|h| h / wsum[i]);
    }

    let trace = boundary_trace_gauss(domain, mesh.n_angular, opts.boundary_order)?;
    let mut field = TorsionField {
        domain: domain.clone(),
        mesh,
        space,
        u,
        grad,
        hess,
        element_hess,
        quad: samples,
        trace: trace.clone(),
        u_nu: Vec::new(),
        max_gradient: 0.0,
        min_points: Vec::new(),
        residual_norm: stats.relative_residual,
        iterations: stats.iterations,
    };
    let boundary_grads: Vec<Point> = trace.samples.iter().map(|s| field.boundary_gradient(s.theta)).collect();
    field.u_nu = boundary_grads
        .iter()
        .zip(&trace.samples)
        .map(|(g, s)| g[0] * s.outward_normal[0] + g[1] * s.outward_normal[1])
        .collect();
    field.max_gradient = field
        .quad
        .iter()
        .map(|q| q.grad)
        .chain(boundary_grads)
        .map(|g| g[0].hypot(g[1]))
        .fold(0.0, f64::max);
    field.min_points = find_minima(&field);
    Ok(field)
}

impl TorsionField {
    pub fn n_radial(&self) -> usize {
        self.mesh.n_radial
    }

    pub fn n_angular(&self) -> usize {
        self.mesh.n_angular
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Gradient at the boundary point `γ(theta)`, taken from the element on that boundary edge.
    pub fn boundary_gradient(&self, theta: f64) -> Point {
        let n = self.mesh.n_angular;
        let dtheta = 2.0 * PI / n as f64;
        let i = ((theta.rem_euclid(2.0 * PI) / dtheta).floor() as usize).min(n - 1);
        let (e, _) = self.space.boundary_elements[i];
        let ue = self.space.element_values(e, &self.u);
        self.space.bases[e].gradient(&ue, self.domain.point(theta))
    }

    /// `u_ν` at the samples of `trace`, which must parametrize the same domain.
    pub fn boundary_normal_derivative(&self, trace: &BoundaryTrace) -> Vec<f64> {
        trace
            .samples
            .iter()
            .map(|s| {
                let g = self.boundary_gradient(s.theta);
                g[0] * s.outward_normal[0] + g[1] * s.outward_normal[1]
            })
            .collect()
    }

    pub fn evaluate(&self, x: Point) -> Result<(f64, Point)> {
        let e = self.space.locate(x).ok_or(Error::PointOutside { x: x[0], y: x[1] })?;
        let ue = self.space.element_values(e, &self.u);
        let b = &self.space.bases[e];
        Ok((b.value(&ue, x), b.gradient(&ue, x)))
    }

    /// Largest nodal deviation from a closed-form solution.
    pub fn nodal_error(&self, exact: &ExactTorsion) -> f64 {
        self.space
            .nodes
            .iter()
            .zip(&self.u)
            .map(|(&x, &u)| (u - exact.value(x)).abs())
            .fold(0.0, f64::max)
    }

    /// `∫_Ω |∇²u|² dx`.
    pub fn hessian_sq_integral(&self) -> f64 {
        self.quad.iter().map(|q| q.weight * frob_sq(q.hess)).sum()
    }

    pub fn dump(&self) -> FieldDump {
        FieldDump {
            vertices: self.mesh.vertices.clone(),
            triangles: self.mesh.triangles.clone(),
            u: self.u[..self.mesh.vertices.len()].to_vec(),
        }
    }
}

pub fn frob_sq(h: Sym2) -> f64 {
    h[0] * h[0] + 2.0 * h[1] * h[1] + h[2] * h[2]
}

/// `h = q(·; z, a) − u` for the quadratic `q = (|x−z|² − a)/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicField {
    pub z: Point,
    pub a: f64,
    pub values: Vec<f64>,
    /// Element-mean Hessians of `h`.
    pub element_hess: Vec<Sym2>,
    /// `∫_Ω |∇²h|² dx`.
    pub hessian_sq: f64,
    pub grad_at_z: Point,
}

pub fn harmonic_h(field: &TorsionField, z: Point, a: f64) -> Result<HarmonicField> {
    let values = field
        .space
        .nodes
        .iter()
        .zip(&field.u)
        .map(|(&x, &u)| quadratic_q(z, a, x).value - u)
        .collect();
    let ident = |h: Sym2| [1.0 - h[0], -h[1], 1.0 - h[2]];
    let element_hess = field.element_hess.iter().map(|&h| ident(h)).collect();
    let hessian_sq = field.quad.iter().map(|q| q.weight * frob_sq(ident(q.hess))).sum();
    let (_, gu) = field.evaluate(z)?;
    let gq = quadratic_q(z, a, z).gradient;
    Ok(HarmonicField {
        z,
        a,
        values,
        element_hess,
        hessian_sq,
        grad_at_z: [gq[0] - gu[0], gq[1] - gu[1]],
    })
}

fn node_adjacency(space: &P2Space) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); space.n_nodes()];
    for el in &space.elements {
        for &a in el {
            for &b in el {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Local minima of the nodal field, clustered over plateaus and refined by a quadratic fit.
fn find_minima(field: &TorsionField) -> Vec<Point> {
    let space = &field.space;
    let u = &field.u;
    let adj = node_adjacency(space);
    let tol = 1e-9 * field.max_abs_u();
    let is_candidate: Vec<bool> = (0..u.len())
        .map(|i| !space.on_boundary[i] && adj[i].iter().all(|&j| u[i] <= u[j] + tol))
        .collect();
    let mut cluster = vec![usize::MAX; u.len()];
    let mut reps: Vec<usize> = Vec::new();
    for start in 0..u.len() {
        if !is_candidate[start] || cluster[start] != usize::MAX {
            continue;
        }
        let id = reps.len();
        let mut stack = vec![start];
        cluster[start] = id;
        let mut best = start;
        while let Some(i) = stack.pop() {
            if u[i] < u[best] || (u[i] == u[best] && i < best) {
                best = i;
            }
            for &j in &adj[i] {
                if is_candidate[j] && cluster[j] == usize::MAX && (u[j] - u[i]).abs() <= tol {
                    cluster[j] = id;
                    stack.push(j);
                }
            }
        }
        reps.push(best);
    }
    reps.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)));
    reps.into_iter().map(|i| refine_minimum(space, u, &adj, i)).collect()
}

/// Stationary point of the least-squares quadratic through the 2-ring patch of `node`.
fn refine_minimum(space: &P2Space, u: &[f64], adj: &[Vec<usize>], node: usize) -> Point {
    let mut patch: Vec<usize> = adj[node]
        .iter()
        .flat_map(|&j| adj[j].iter().copied().chain(std::iter::once(j)))
        .collect();
    patch.push(node);
    patch.sort_unstable();
    patch.dedup();
    let x0 = space.nodes[node];
    let scale = patch
        .iter()
        .map(|&j| dist2(space.nodes[j], x0))
        .fold(0.0, f64::max)
        .sqrt();
    if patch.len() < 6 || scale == 0.0 {
        return x0;
    }
    let a = DMatrix::from_fn(patch.len(), 6, |r, c| {
        let p = space.nodes[patch[r]];
        let (dx, dy) = ((p[0] - x0[0]) / scale, (p[1] - x0[1]) / scale);
        [1.0, dx, dy, dx * dx, dx * dy, dy * dy][c]
    });
    let b = DVector::from_iterator(patch.len(), patch.iter().map(|&j| u[j]));
    let Ok(c) = a.svd(true, true).solve(&b, 1e-12) else {
        return x0;
    };
    let (h11, h12, h22) = (2.0 * c[3], c[4], 2.0 * c[5]);
    let det = h11 * h22 - h12 * h12;
    if !(h11 > 0.0 && det > 0.0) {
        return x0;
    }
    let dx = -(h22 * c[1] - h12 * c[2]) / det;
    let dy = -(-h12 * c[1] + h11 * c[2]) / det;
    if dx.hypot(dy) > 1.0 {
        return x0;
    }
    [x0[0] + dx * scale, x0[1] + dy * scale]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_matches_closed_form() {
        let d = StarDomain::disk(1.0).unwrap();
        let f = solve_domain(&d, 16, 64).unwrap();
        let err = f.nodal_error(&d.exact_torsion().unwrap());
        assert!(err < 1e-4, "{err}");
        assert!(f.u_nu.iter().all(|v| (v - 1.0).abs() < 1e-3));
        assert!((f.max_gradient - 1.0).abs() < 1e-3);
        assert_eq!(f.min_points.len(), 1);
        assert!(f.min_points[0][0].hypot(f.min_points[0][1]) < 1e-3);
    }

    #[test]
    fn maximum_principle_and_dirichlet() {
        let d = StarDomain::perturbed_disk(0.1, 3).unwrap();
        let f = solve_domain(&d, 8, 32).unwrap();
        let tol = 1e-10 * f.max_abs_u();
        for (u, &b) in f.u.iter().zip(&f.space.on_boundary) {
            if b {
                assert_eq!(*u, 0.0);
            } else {
                assert!(*u <= tol);
            }
        }
    }

    #[test]
    fn element_laplacian_is_two() {
        let d = StarDomain::ellipse(1.5, 1.0).unwrap();
        let f = solve_domain(&d, 16, 64).unwrap();
        let area: f64 = f.quad.iter().map(|q| q.weight).sum();
        let mean = f.quad.iter().map(|q| q.weight * (q.hess[0] + q.hess[2])).sum::<f64>() / area;
        assert!((mean - 2.0).abs() < 1e-2, "{mean}");
        // the closed form is quadratic, so element Hessians converge to the constant one
        let exact = d.exact_torsion().unwrap().hessian();
        let err: f64 = f
            .quad
            .iter()
            .map(|q| q.weight * frob_sq([q.hess[0] - exact[0], q.hess[1] - exact[1], q.hess[2] - exact[2]]))
            .sum();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn harmonic_h_vanishes_on_disk() {
        let d = StarDomain::disk(1.0).unwrap();
        let f = solve_domain(&d, 16, 64).unwrap();
        let h = harmonic_h(&f, [0.0, 0.0], 1.0).unwrap();
        // nodal Dirichlet data on curved edges leaves an O(h³) residue
        assert!(h.hessian_sq < 1e-4, "{}", h.hessian_sq);
        assert!(h.values.iter().all(|v| v.abs() < 1e-4));
        assert!(h.grad_at_z[0].hypot(h.grad_at_z[1]) < 1e-6);
    }

    #[test]
    fn deterministic() {
        let d = StarDomain::perturbed_disk(0.05, 3).unwrap();
        let a = solve_domain(&d, 8, 32).unwrap();
        let b = solve_domain(&d, 8, 32).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.u_nu, b.u_nu);
        assert_eq!(a.min_points, b.min_points);
    }
}
