use std::collections::HashMap;
use std::f64::consts::PI;

use super::element::{segment_quadrature, triangle_quadrature, QuadraticBasis};
use super::mesh::TriMesh;
use crate::error::{Error, Result};
use crate::geometry::{Point, StarDomain};

/// Quadratic Lagrange space on a [`TriMesh`]: mesh vertices followed by one node per edge.
/// Nodes of boundary edges sit on the exact curve and boundary elements are integrated
/// over their exact curved shape.
#[derive(Clone, Debug)]
pub struct P2Space {
    pub domain: StarDomain,
    pub nodes: Vec<Point>,
    /// Per triangle: three vertices, then the nodes of edges (0,1), (1,2), (2,0).
    pub elements: Vec<[usize; 6]>,
    pub on_boundary: Vec<bool>,
    /// For each mesh boundary edge: owning element and local edge index.
    pub boundary_elements: Vec<(usize, usize)>,
    /// Boundary edge of each element as `(local edge, θ₀, Δθ)`, if it has one.
    pub curved_edge: Vec<Option<(usize, f64, f64)>>,
    pub bases: Vec<QuadraticBasis>,
    /// Physical quadrature points and weights of each element.
    pub quadrature: Vec<Vec<(Point, f64)>>,
}

impl P2Space {
    pub fn new(domain: &StarDomain, mesh: &TriMesh) -> Result<Self> {
        let mut nodes = mesh.vertices.clone();
        let mut on_boundary = vec![false; nodes.len()];
        let mut boundary_theta: HashMap<(usize, usize), [f64; 2]> = HashMap::new();
        for e in &mesh.boundary_edges {
            let [a, b] = e.vertices;
            on_boundary[a] = true;
            on_boundary[b] = true;
            boundary_theta.insert((a.min(b), a.max(b)), e.theta);
        }
        let mut edge_node: HashMap<(usize, usize), usize> = HashMap::new();
        let mut elements = Vec::with_capacity(mesh.triangles.len());
        let mut curved_edge = Vec::with_capacity(mesh.triangles.len());
        for t in &mesh.triangles {
            let mut el = [t[0], t[1], t[2], 0, 0, 0];
            let mut curved = None;
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let theta = boundary_theta.get(&key).copied();
                if let Some(th) = theta {
                    curved = Some((k, th[0], th[1] - th[0]));
                }
                el[3 + k] = *edge_node.entry(key).or_insert_with(|| {
                    let p = match theta {
                        Some(th) => domain.point(0.5 * (th[0] + th[1])),
                        None => {
                            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
                        }
                    };
                    nodes.push(p);
                    on_boundary.push(theta.is_some());
                    nodes.len() - 1
                });
            }
            elements.push(el);
            curved_edge.push(curved);
        }
        let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (ei, t) in mesh.triangles.iter().enumerate() {
            for k in 0..3 {
                owner.insert((t[k], t[(k + 1) % 3]), (ei, k));
            }
        }
        let boundary_elements = mesh
            .boundary_edges
            .iter()
            .map(|e| owner[&(e.vertices[0], e.vertices[1])])
            .collect();

        let mut bases = Vec::with_capacity(elements.len());
        let mut quadrature = Vec::with_capacity(elements.len());
        for (index, (el, curved)) in elements.iter().zip(&curved_edge).enumerate() {
            let v = [nodes[el[0]], nodes[el[1]], nodes[el[2]]];
            let mut pts = triangle_quadrature(&v);
            if let Some((k, theta0, dtheta)) = *curved {
                pts.extend(segment_quadrature(domain, v[k], v[(k + 1) % 3], theta0, dtheta));
            }
            let local: [Point; 6] = std::array::from_fn(|k| nodes[el[k]]);
            let basis = QuadraticBasis::new(&local).ok_or(Error::DegenerateElement { index, area: 0.0 })?;
            bases.push(basis);
            quadrature.push(pts);
        }
        Ok(P2Space {
            domain: domain.clone(),
            nodes,
            elements,
            on_boundary,
            boundary_elements,
            curved_edge,
            bases,
            quadrature,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_values(&self, e: usize, u: &[f64]) -> [f64; 6] {
        let el = &self.elements[e];
        std::array::from_fn(|k| u[el[k]])
    }

    /// Element containing `x`, including the sliver between a boundary chord and the curve.
    pub fn locate(&self, x: Point) -> Option<usize> {
        let tol = 1e-12;
        for (e, el) in self.elements.iter().enumerate() {
            let v = [self.nodes[el[0]], self.nodes[el[1]], self.nodes[el[2]]];
            let l = barycentric(&v, x);
            if l.iter().all(|&li| li >= -tol) {
                return Some(e);
            }
            let Some((edge, theta0, dtheta)) = self.curved_edge[e] else { continue };
            let opposite = (edge + 2) % 3;
            if l[opposite] > tol {
                continue;
            }
            let c = self.domain.center;
            let alpha = (x[1] - c[1]).atan2(x[0] - c[0]);
            let s = (alpha - theta0).rem_euclid(2.0 * PI);
            if s > dtheta * (1.0 + tol) && s < 2.0 * PI - tol {
                continue;
            }
            let (r, _, _) = self.domain.radius(alpha);
            if (x[0] - c[0]).hypot(x[1] - c[1]) <= r * (1.0 + tol) {
                return Some(e);
            }
        }
        None
    }
}

fn barycentric(v: &[Point; 3], x: Point) -> [f64; 3] {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]);
    let l1 = ((x[0] - v[0][0]) * (v[2][1] - v[0][1]) - (x[1] - v[0][1]) * (v[2][0] - v[0][0])) / det;
    let l2 = ((v[1][0] - v[0][0]) * (x[1] - v[0][1]) - (v[1][1] - v[0][1]) * (x[0] - v[0][0])) / det;
    [1.0 - l1 - l2, l1, l2]
}
