use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist2, Point, StarDomain};

/// Ratio between the radial spacing at the center and at the boundary.
pub const RADIAL_GRADING: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    /// Vertices in order of increasing boundary angle.
    pub vertices: [usize; 2],
    pub theta: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Longest edge.
    pub h: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

/// Smooth graded radial map `s(ξ) = (1+g)ξ − gξ²` on `[0,1]` with `s′(0)/s′(1)` equal to
/// [`RADIAL_GRADING`], so rings cluster toward the boundary while refinement halves every
/// spacing.
fn radial_map(xi: f64) -> f64 {
    let g = (RADIAL_GRADING - 1.0) / (RADIAL_GRADING + 1.0);
    (1.0 + g) * xi - g * xi * xi
}

/// Structured polar-mapped triangulation: a center vertex, `n_radial` rings of
/// `n_angular` vertices at `c + s_j ρ(θ_i) e(θ_i)`, fan triangles around the center and two
/// triangles per ring cell elsewhere.
pub fn generate_mesh(domain: &StarDomain, n_radial: usize, n_angular: usize) -> Result<TriMesh> {
    if n_radial < 4 {
        return Err(Error::InvalidArgument(format!("n_radial must be >= 4, got {n_radial}")));
    }
    if n_angular < 16 || !n_angular.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "n_angular must be even and >= 16, got {n_angular}"
        )));
    }
    domain.validate()?;
    let c = domain.center;
    let dtheta = 2.0 * PI / n_angular as f64;
    let mut vertices = Vec::with_capacity(1 + n_radial * n_angular);
    vertices.push(c);
    for j in 1..=n_radial {
        let s = if j == n_radial {
            1.0
        } else {
            radial_map(j as f64 / n_radial as f64)
        };
        for i in 0..n_angular {
            let theta = i as f64 * dtheta;
            let (r, _, _) = domain.radius(theta);
            let (sn, cs) = theta.sin_cos();
            vertices.push([c[0] + s * r * cs, c[1] + s * r * sn]);
        }
    }
    let v = |j: usize, i: usize| 1 + (j - 1) * n_angular + (i % n_angular);
    let mut triangles = Vec::with_capacity(n_angular * (2 * n_radial - 1));
    for i in 0..n_angular {
        triangles.push([0, v(1, i), v(1, i + 1)]);
    }
    for j in 1..n_radial {
        for i in 0..n_angular {
            let (a, b, cc, d) = (v(j, i), v(j + 1, i), v(j + 1, i + 1), v(j, i + 1));
            triangles.push([a, b, cc]);
            triangles.push([a, cc, d]);
        }
    }
    let boundary_edges = (0..n_angular)
        .map(|i| BoundaryEdge {
            vertices: [v(n_radial, i), v(n_radial, i + 1)],
            theta: [i as f64 * dtheta, (i + 1) as f64 * dtheta],
        })
        .collect();
    let mut mesh = TriMesh {
        vertices,
        triangles,
        boundary_edges,
        h: 0.0,
        n_radial,
        n_angular,
    };
    mesh.h = mesh.longest_edge();
    for (index, t) in mesh.triangles.iter().enumerate() {
        let area = signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        if !(area > 0.0) {
            return Err(Error::DegenerateElement { index, area });
        }
    }
    Ok(mesh)
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

impl TriMesh {
    fn longest_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                (0..3).map(move |k| (t[k], t[(k + 1) % 3]))
            })
            .map(|(a, b)| dist2(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| signed_area(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]))
            .sum()
    }

    /// Shoelace area of the boundary polygon.
    pub fn boundary_polygon_area(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| {
                let a = self.vertices[e.vertices[0]];
                let b = self.vertices[e.vertices[1]];
                0.5 * (a[0] * b[1] - b[0] * a[1])
            })
            .sum()
    }

    /// Number of triangles sharing each undirected edge.
    pub fn edge_incidence(&self) -> HashMap<(usize, usize), usize> {
        let mut count = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        count
    }
}
