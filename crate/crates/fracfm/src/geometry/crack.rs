//! Open crack surfaces: triangulations with local frames, edge weights and
//! per-element quadrature aware of the square-root behaviour at the crack front.
//!
//! Opening displacements are represented as `w(y) Σ_j c_j λ_j(y)` where
//! `w = sqrt(Σ_j s_j λ_j)` and `s_j ∈ [0, 1]` vanishes exactly on front nodes.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::geometry::{tangent_frame, SurfaceKind, SurfaceMesh};
use crate::linalg::{c, CMat3, Point, C64};
use crate::quadrature::{collapsed, tri7, TriRule};
use crate::Result;

/// Gauss order of the collapsed rules on front elements.
pub const FRONT_ORDER: usize = 5;

#[derive(Clone, Copy, Debug)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub pos: Point,
    /// Includes the element area factor.
    pub weight: f64,
    pub w: f64,
    pub grad_w: Point,
}

#[derive(Clone, Debug)]
pub struct CrackElement {
    pub nodes: [usize; 3],
    pub area: f64,
    pub normal: Point,
    pub centroid: Point,
    pub diameter: f64,
    pub grad_lambda: [Point; 3],
    /// Element touches the crack front: its rule carries the square-root grading.
    pub sqrt_edge: bool,
    pub rule: Vec<QuadPoint>,
}

impl CrackElement {
    pub fn point(&self, nodes: &[Point], bary: [f64; 3]) -> Point {
        nodes[self.nodes[0]] * bary[0] + nodes[self.nodes[1]] * bary[1] + nodes[self.nodes[2]] * bary[2]
    }
}

#[derive(Clone, Debug)]
pub struct CrackGeometry {
    pub nodes: Vec<Point>,
    pub normals: Vec<Point>,
    /// `(τ1, τ2)` with `τ1 × τ2 = ν`.
    pub tangents: Vec<[Point; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub edge_node: Vec<bool>,
    /// Nodal values `s_j` of the squared edge weight.
    pub edge_weight: Vec<f64>,
    /// Stiffness per node in the local `(ν, τ1, τ2)` frame.
    pub stiffness: Vec<CMat3>,
    pub elements: Vec<CrackElement>,
    pub planar: bool,
}

/// Region selector for crack patches cut from a host surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "lowercase", deny_unknown_fields)]
pub enum PatchRegion {
    /// Elements whose centroid direction (from the host center) is within
    /// `half_angle_deg` of `axis`.
    Cap { axis: [f64; 3], half_angle_deg: f64 },
    All,
}

impl PatchRegion {
    /// Whether the direction of `p` from `center` falls in the region.
    pub fn contains(&self, center: &Point, p: &Point) -> bool {
        match self {
            PatchRegion::All => true,
            PatchRegion::Cap { axis, half_angle_deg } => {
                let a = Point::from(*axis).normalize();
                let d = (p - center).normalize();
                a.dot(&d) >= (half_angle_deg * PI / 180.0).cos()
            }
        }
    }
}

/// Boundary edges (used by exactly one triangle) and their nodes.
fn boundary_nodes(n: usize, tris: &[[usize; 3]]) -> Vec<bool> {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut edge = vec![false; n];
    for ((a, b), k) in count {
        if k == 1 {
            edge[a] = true;
            edge[b] = true;
        }
    }
    edge
}

impl CrackGeometry {
    /// Build a crack from nodes, node normals, triangles and squared edge weights.
    ///
    /// Triangles with all three nodes on the front carry an identically zero
    /// weighted basis; they are dropped together with nodes left unreferenced.
    pub fn build(nodes: Vec<Point>, normals: Vec<Point>, triangles: Vec<[usize; 3]>, edge_weight: Vec<f64>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(invalid("crack", "empty triangulation"));
        }
        let front = boundary_nodes(nodes.len(), &triangles);
        if !front.iter().any(|&e| e) {
            return Err(invalid("crack", "surface is closed; a crack must have a relative boundary"));
        }
        let triangles: Vec<[usize; 3]> = triangles.into_iter().filter(|t| !t.iter().all(|&k| front[k])).collect();
        if triangles.is_empty() {
            return Err(invalid("crack", "no interior nodes: every triangle lies on the crack front"));
        }
        let mut index = vec![usize::MAX; nodes.len()];
        let mut keep = Vec::new();
        for t in &triangles {
            for &k in t {
                if index[k] == usize::MAX {
                    index[k] = keep.len();
                    keep.push(k);
                }
            }
        }
        keep.sort_unstable();
        for (i, &k) in keep.iter().enumerate() {
            index[k] = i;
        }
        let triangles: Vec<[usize; 3]> = triangles.iter().map(|t| t.map(|k| index[k])).collect();
        let nodes: Vec<Point> = keep.iter().map(|&k| nodes[k]).collect();
        let normals: Vec<Point> = keep.iter().map(|&k| normals[k]).collect();
        let edge_weight: Vec<f64> = keep.iter().map(|&k| edge_weight[k]).collect();
        let n = nodes.len();
        let edge_node = boundary_nodes(n, &triangles);
        let normals: Vec<Point> = normals.iter().map(|v| v.normalize()).collect();
        let tangents = normals
            .iter()
            .map(|nu| {
                let (t1, t2) = tangent_frame(nu);
                [t1, t2]
            })
            .collect();
        let mut g = Self {
            nodes,
            normals,
            tangents,
            triangles,
            edge_node,
            edge_weight,
            stiffness: vec![CMat3::identity(); n],
            elements: Vec::new(),
            planar: false,
        };
        for (j, s) in g.edge_weight.iter_mut().enumerate() {
            if g.edge_node[j] {
                *s = 0.0;
            }
        }
        g.elements = (0..g.triangles.len()).map(|e| g.make_element(e)).collect();
        let n0 = g.elements[0].normal;
        g.planar = g.elements.iter().all(|e| {
            e.normal.cross(&n0).norm() < 1e-10 && (e.centroid - g.elements[0].centroid).dot(&n0).abs() < 1e-10
        });
        Ok(g)
    }

    fn make_element(&self, e: usize) -> CrackElement {
        let t = self.triangles[e];
        let (a, b, cc) = (self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
        let cross = (b - a).cross(&(cc - a));
        let area = 0.5 * cross.norm();
        let mut normal = cross.normalize();
        let mean_node_normal = self.normals[t[0]] + self.normals[t[1]] + self.normals[t[2]];
        if normal.dot(&mean_node_normal) < 0.0 {
            normal = -normal;
        }
        // gradients of barycentric coordinates in the element plane
        let grad = |p: Point, q: Point, r: Point| {
            let edge = r - q;
            let g = normal.cross(&edge) / (2.0 * area);
            if g.dot(&(p - q)) < 0.0 {
                -g
            } else {
                g
            }
        };
        let grad_lambda = [grad(a, b, cc), grad(b, cc, a), grad(cc, a, b)];
        let (rule, sqrt_edge) = self.rule_for(&t, 0);
        let diameter = [(a - b).norm(), (b - cc).norm(), (cc - a).norm()].into_iter().fold(0.0, f64::max);
        let mut el = CrackElement {
            nodes: t,
            area,
            normal,
            centroid: (a + b + cc) / 3.0,
            diameter,
            grad_lambda,
            sqrt_edge,
            rule: Vec::new(),
        };
        el.rule = self.quad_points(&el, &rule);
        el
    }

    /// Reference rule for a triangle; `level > 0` raises the order for convergence studies.
    fn rule_for(&self, t: &[usize; 3], level: usize) -> (TriRule, bool) {
        let s = [self.edge_weight[t[0]], self.edge_weight[t[1]], self.edge_weight[t[2]]];
        let zero: Vec<usize> = (0..3).filter(|&k| s[k] <= 0.0).collect();
        let order = FRONT_ORDER + 2 * level;
        let rule = match zero.len() {
            0 if level == 0 => tri7(),
            0 => collapsed(order, 0, false, false),
            1 => collapsed(order, zero[0], true, false),
            2 => {
                let apex = (0..3).find(|k| !zero.contains(k)).unwrap();
                collapsed(order, apex, false, true)
            }
            _ => TriRule { points: vec![], weights: vec![] },
        };
        (rule, !zero.is_empty())
    }

    fn quad_points(&self, el: &CrackElement, rule: &TriRule) -> Vec<QuadPoint> {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, wq)| {
                let bary = [1.0 - p[0] - p[1], p[0], p[1]];
                let (w, grad_w) = self.weight_at(el, bary);
                QuadPoint { bary, pos: el.point(&self.nodes, bary), weight: 2.0 * el.area * wq, w, grad_w }
            })
            .collect()
    }

    /// Quadrature points of element `e` at refinement `level` (0 is the assembly rule).
    pub fn element_rule(&self, e: usize, level: usize) -> Vec<QuadPoint> {
        let el = &self.elements[e];
        if level == 0 {
            return el.rule.clone();
        }
        let (rule, _) = self.rule_for(&el.nodes, level);
        self.quad_points(el, &rule)
    }

    /// `w` and its surface gradient at a barycentric point of an element.
    pub fn weight_at(&self, el: &CrackElement, bary: [f64; 3]) -> (f64, Point) {
        let mut s2 = 0.0;
        let mut gs = Point::zeros();
        for k in 0..3 {
            let s = self.edge_weight[el.nodes[k]];
            s2 += s * bary[k];
            gs += el.grad_lambda[k] * s;
        }
        let w = s2.max(0.0).sqrt();
        let gw = if w > 0.0 { gs / (2.0 * w) } else { Point::zeros() };
        (w, gw)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    pub fn mesh_size(&self) -> f64 {
        self.elements.iter().map(|e| e.diameter).fold(0.0, f64::max)
    }

    /// Local frame as columns `(ν, τ1, τ2)`.
    pub fn frame(&self, j: usize) -> nalgebra::Matrix3<f64> {
        let [t1, t2] = self.tangents[j];
        nalgebra::Matrix3::from_columns(&[self.normals[j], t1, t2])
    }

    pub fn set_uniform_stiffness(&mut self, kappa: C64) {
        self.stiffness = vec![CMat3::identity() * kappa; self.nodes.len()];
    }

    /// `K` of node `j` rotated to global coordinates.
    pub fn stiffness_global(&self, j: usize) -> CMat3 {
        let r = self.frame(j).map(c);
        r * self.stiffness[j] * r.transpose()
    }

    /// Concatenate disjoint cracks into one geometry.
    pub fn merge(parts: Vec<CrackGeometry>) -> Result<CrackGeometry> {
        let mut it = parts.into_iter();
        let mut out = it.next().ok_or_else(|| invalid("crack", "no crack patches"))?;
        for p in it {
            let off = out.nodes.len();
            out.nodes.extend(p.nodes);
            out.normals.extend(p.normals);
            out.tangents.extend(p.tangents);
            out.edge_node.extend(p.edge_node);
            out.edge_weight.extend(p.edge_weight);
            out.stiffness.extend(p.stiffness);
            for mut e in p.elements {
                for k in e.nodes.iter_mut() {
                    *k += off;
                }
                out.triangles.push(e.nodes);
                out.elements.push(e);
            }
            out.planar = false;
        }
        Ok(out)
    }

    /// Frames orthonormal, `K` symmetric, `Im η*Kη ≤ 0` on the supplied test vectors.
    pub fn check_invariants(&self, tests: &[nalgebra::Vector3<C64>]) -> Result<()> {
        for j in 0..self.len() {
            let f = self.frame(j);
            if (f.transpose() * f - nalgebra::Matrix3::identity()).norm() > 1e-10 {
                return Err(invalid("crack frame", format!("node {j} frame not orthonormal")));
            }
            let k = &self.stiffness[j];
            if (k - k.transpose()).norm() > 1e-12 * k.norm().max(1.0) {
                return Err(invalid("stiffness", format!("node {j}: K not symmetric")));
            }
            for eta in tests {
                let q = eta.dotc(&(k * eta));
                if q.im > 1e-12 * k.norm() * eta.norm_squared() {
                    return Err(invalid("stiffness", format!("node {j}: Im<K eta, eta> = {} > 0", q.im)));
                }
            }
        }
        Ok(())
    }
}

/// Ring radii graded toward the crack front.
fn penny_radii(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            0.5 * t + 0.5 * (0.5 * PI * t).sin()
        })
        .collect()
}

/// Flat circular crack with `2(refinement + 1)` rings of `6k` nodes.
pub fn penny_crack(center: Point, radius: f64, normal: Point, refinement: usize) -> Result<CrackGeometry> {
    if !(radius > 0.0) {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    if !(normal.norm() > 1e-12) {
        return Err(invalid("normal", "degenerate normal"));
    }
    let nu = normal.normalize();
    let (t1, t2) = tangent_frame(&nu);
    let n_rings = 2 * (refinement + 1);
    let radii = penny_radii(n_rings);
    let mut nodes = vec![center];
    let mut ring_start = vec![0usize];
    let mut s = vec![1.0];
    for (k, &rk) in radii.iter().enumerate().skip(1) {
        ring_start.push(nodes.len());
        let m = 6 * k;
        for i in 0..m {
            let th = 2.0 * PI * i as f64 / m as f64;
            nodes.push(center + (t1 * th.cos() + t2 * th.sin()) * (rk * radius));
            s.push(1.0 - rk * rk);
        }
    }
    let mut tris = Vec::new();
    for k in 1..=n_rings {
        let inner: Vec<usize> = if k == 1 { vec![0] } else { (0..6 * (k - 1)).map(|i| ring_start[k - 1] + i).collect() };
        let outer: Vec<usize> = (0..6 * k).map(|i| ring_start[k] + i).collect();
        if k == 1 {
            for i in 0..6 {
                tris.push([0, outer[i], outer[(i + 1) % 6]]);
            }
            continue;
        }
        // merge-walk both rings by angle
        let (ni, no) = (inner.len(), outer.len());
        let ang = |i: usize, n: usize| i as f64 / n as f64;
        let (mut i, mut j) = (0usize, 0usize);
        while i < ni || j < no {
            let next_inner = ang(i + 1, ni);
            let next_outer = ang(j + 1, no);
            if j < no && (i >= ni || next_outer <= next_inner) {
                tris.push([inner[i % ni], outer[j], outer[(j + 1) % no]]);
                j += 1;
            } else {
                tris.push([inner[i % ni], outer[j % no], inner[(i + 1) % ni]]);
                i += 1;
            }
        }
    }
    let normals = vec![nu; nodes.len()];
    let mut g = CrackGeometry::build(nodes, normals, tris, s)?;
    // keep one global frame on a flat crack
    for t in g.tangents.iter_mut() {
        *t = [t1, t2];
    }
    Ok(g)
}

/// Crack patch conforming to a closed host surface.
pub fn surface_patch(host: &SurfaceKind, region: &PatchRegion, resolution: usize) -> Result<CrackGeometry> {
    let mesh = SurfaceMesh::from_kind(host, resolution)?;
    let center = host.center();
    let chosen: Vec<usize> = (0..mesh.triangles.len()).filter(|&e| region.contains(&center, &mesh.centroid(e))).collect();
    if chosen.is_empty() {
        return Err(invalid("patch region", "selects no elements"));
    }
    if chosen.len() == mesh.triangles.len() {
        return Err(invalid("patch region", "selects the whole closed surface; a crack must be open"));
    }
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut normals = Vec::new();
    let mut tris = Vec::new();
    for &e in &chosen {
        let mut t = [0usize; 3];
        for (k, &v) in mesh.triangles[e].iter().enumerate() {
            t[k] = *map.entry(v).or_insert_with(|| {
                nodes.push(mesh.nodes[v]);
                normals.push(mesh.normals[v]);
                nodes.len() - 1
            });
        }
        tris.push(t);
    }
    let edge = boundary_nodes(nodes.len(), &tris);
    let front: Vec<Point> = nodes.iter().zip(&edge).filter(|(_, &e)| e).map(|(p, _)| *p).collect();
    let dist: Vec<f64> = nodes
        .iter()
        .map(|p| front.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
        .collect();
    let ell = dist.iter().cloned().fold(0.0, f64::max).max(1e-12);
    let s = dist.iter().map(|d| d * (2.0 * ell - d) / (ell * ell)).collect();
    CrackGeometry::build(nodes, normals, tris, s)
}
