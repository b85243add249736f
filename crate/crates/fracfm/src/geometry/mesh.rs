//! Closed triangulated surfaces. Ellipsoids (and spheres) keep their exact
//! geometry: each flat reference triangle on the unit sphere is projected
//! radially and then stretched by the semi-axes.

use std::collections::HashMap;

use crate::error::invalid;
use crate::geometry::SurfaceKind;
use crate::linalg::Point;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum MeshMap {
    Ellipsoid { center: Point, axes: Point },
    Flat,
}

#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub nodes: Vec<Point>,
    /// Outward unit normals at the nodes (face normal average on cube edges).
    pub normals: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    ref_nodes: Vec<Point>,
    pub map: MeshMap,
}

#[derive(Clone, Copy, Debug)]
pub struct SurfacePoint {
    pub pos: Point,
    pub normal: Point,
    /// Surface measure per unit reference area (`dS = jac du dv`).
    pub jac: f64,
}

fn icosahedron() -> (Vec<Point>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let v = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v.iter().map(|a| Point::from(*a).normalize()).collect(), faces)
}

/// Node deduplication keyed on quantized coordinates.
struct NodeTable {
    index: HashMap<[i64; 3], usize>,
    nodes: Vec<Point>,
}

impl NodeTable {
    fn new() -> Self {
        Self { index: HashMap::new(), nodes: Vec::new() }
    }

    fn insert(&mut self, p: Point) -> usize {
        let key = [(p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64, (p.z * 1e9).round() as i64];
        let n = self.nodes.len();
        *self.index.entry(key).or_insert_with(|| {
            self.nodes.push(p);
            n
        })
    }
}

fn orient_outward(tris: &mut [[usize; 3]], nodes: &[Point], center: &Point) {
    for t in tris.iter_mut() {
        let (a, b, c) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
        let n = (b - a).cross(&(c - a));
        if n.dot(&((a + b + c) / 3.0 - center)) < 0.0 {
            t.swap(1, 2);
        }
    }
}

impl SurfaceMesh {
    /// Geodesic (icosahedral, frequency `freq`) mesh with `10 freq² + 2` nodes.
    pub fn ellipsoid(center: Point, axes: Point, freq: usize) -> Result<Self> {
        if freq == 0 {
            return Err(invalid("mesh frequency", "must be at least 1"));
        }
        if axes.iter().any(|a| !(*a > 0.0)) {
            return Err(invalid("semi_axes", "must be positive"));
        }
        let (v, faces) = icosahedron();
        let mut table = NodeTable::new();
        let mut tris = Vec::with_capacity(20 * freq * freq);
        let n = freq;
        for f in &faces {
            let (a, b, c) = (v[f[0]], v[f[1]], v[f[2]]);
            let mut id = vec![vec![0usize; n + 1]; n + 1];
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let p = a + (b - a) * (i as f64 / n as f64) + (c - a) * (j as f64 / n as f64);
                    id[i][j] = table.insert(p.normalize());
                }
            }
            for i in 0..n {
                for j in 0..(n - i) {
                    tris.push([id[i][j], id[i + 1][j], id[i][j + 1]]);
                    if i + j + 2 <= n {
                        tris.push([id[i + 1][j], id[i + 1][j + 1], id[i][j + 1]]);
                    }
                }
            }
        }
        let ref_nodes = table.nodes;
        orient_outward(&mut tris, &ref_nodes, &Point::zeros());
        let nodes = ref_nodes.iter().map(|q| center + q.component_mul(&axes)).collect();
        let normals = ref_nodes.iter().map(|q| q.component_div(&axes).normalize()).collect();
        Ok(Self { nodes, normals, triangles: tris, ref_nodes, map: MeshMap::Ellipsoid { center, axes } })
    }

    /// Cube with each face split into `n × n` squares (two triangles each).
    pub fn cube(center: Point, side: f64, n: usize) -> Result<Self> {
        if n == 0 || !(side > 0.0) {
            return Err(invalid("cube mesh", "need positive side and at least one subdivision"));
        }
        let mut table = NodeTable::new();
        let mut tris = Vec::new();
        let mut face_normals: HashMap<usize, Vec<Point>> = HashMap::new();
        let h = 0.5 * side;
        for f in 0..6 {
            let axis = f / 2;
            let sign = if f % 2 == 0 { 1.0 } else { -1.0 };
            let mut nrm = Point::zeros();
            nrm[axis] = sign;
            let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut id = vec![vec![0usize; n + 1]; n + 1];
            for (i, row) in id.iter_mut().enumerate() {
                for (j, slot) in row.iter_mut().enumerate() {
                    let mut p = center + nrm * h;
                    p[a1] += side * (i as f64 / n as f64 - 0.5);
                    p[a2] += side * (j as f64 / n as f64 - 0.5);
                    *slot = table.insert(p);
                    face_normals.entry(*slot).or_default().push(nrm);
                }
            }
            for i in 0..n {
                for j in 0..n {
                    tris.push([id[i][j], id[i + 1][j], id[i + 1][j + 1]]);
                    tris.push([id[i][j], id[i + 1][j + 1], id[i][j + 1]]);
                }
            }
        }
        let nodes = table.nodes;
        orient_outward(&mut tris, &nodes, &center);
        let normals = (0..nodes.len())
            .map(|i| {
                let mut distinct: Vec<Point> = Vec::new();
                for v in &face_normals[&i] {
                    if !distinct.iter().any(|d| (d - v).norm() < 1e-12) {
                        distinct.push(*v);
                    }
                }
                distinct.iter().sum::<Point>().normalize()
            })
            .collect();
        Ok(Self { ref_nodes: nodes.clone(), nodes, normals, triangles: tris, map: MeshMap::Flat })
    }

    /// Mesh for a closed analytic surface; `resolution` is the geodesic
    /// frequency (ellipsoid/sphere) or the per-face subdivision (cube).
    pub fn from_kind(kind: &SurfaceKind, resolution: usize) -> Result<Self> {
        kind.validate()?;
        match kind {
            SurfaceKind::Sphere { center, radius } => Self::ellipsoid(Point::from(*center), Point::repeat(*radius), resolution),
            SurfaceKind::Ellipsoid { center, semi_axes } => Self::ellipsoid(Point::from(*center), Point::from(*semi_axes), resolution),
            SurfaceKind::Cube { center, side } => Self::cube(Point::from(*center), *side, resolution),
            SurfaceKind::Plane { .. } => Err(invalid("surface", "a planar patch is not a closed surface")),
        }
    }

    /// Position, outward normal and area density at reference point `(u, v)` of element `e`.
    pub fn eval(&self, e: usize, u: f64, v: f64) -> SurfacePoint {
        let t = self.triangles[e];
        let (q0, q1, q2) = (self.ref_nodes[t[0]], self.ref_nodes[t[1]], self.ref_nodes[t[2]]);
        let e1 = q1 - q0;
        let e2 = q2 - q0;
        let cross = e1.cross(&e2);
        let p = q0 + e1 * u + e2 * v;
        match &self.map {
            MeshMap::Flat => SurfacePoint { pos: p, normal: cross.normalize(), jac: cross.norm() },
            MeshMap::Ellipsoid { center, axes } => {
                let pn = p.norm();
                let q = p / pn;
                let ds_unit = q.dot(&cross).abs() / (pn * pn);
                let m = q.component_div(axes);
                let det = axes.x * axes.y * axes.z;
                SurfacePoint { pos: center + q.component_mul(axes), normal: m.normalize(), jac: det * m.norm() * ds_unit }
            }
        }
    }

    pub fn area(&self) -> f64 {
        let rule = crate::quadrature::tri7();
        (0..self.triangles.len())
            .map(|e| rule.points.iter().zip(&rule.weights).map(|(p, w)| w * self.eval(e, p[0], p[1]).jac).sum::<f64>())
            .sum()
    }

    /// Longest element edge.
    pub fn mesh_size(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| (self.nodes[a] - self.nodes[b]).norm())
            .fold(0.0, f64::max)
    }

    pub fn centroid(&self, e: usize) -> Point {
        self.eval(e, 1.0 / 3.0, 1.0 / 3.0).pos
    }

    /// Element and reference coordinates `(u, v)` of the surface point hit by
    /// projecting `p` (radially for ellipsoids, along face normals otherwise).
    pub fn locate(&self, p: &Point) -> Option<(usize, f64, f64)> {
        const TOL: f64 = 1e-9;
        let target = match &self.map {
            MeshMap::Ellipsoid { center, axes } => (p - center).component_div(axes).normalize(),
            MeshMap::Flat => *p,
        };
        let mut best: Option<(usize, f64, f64, f64)> = None;
        for (e, t) in self.triangles.iter().enumerate() {
            let (q0, q1, q2) = (self.ref_nodes[t[0]], self.ref_nodes[t[1]], self.ref_nodes[t[2]]);
            let (e1, e2) = (q1 - q0, q2 - q0);
            let dir = match self.map {
                MeshMap::Ellipsoid { .. } => target,
                MeshMap::Flat => e1.cross(&e2).normalize(),
            };
            let m = nalgebra::Matrix3::from_columns(&[e1, e2, -dir]);
            let Some(inv) = m.try_inverse() else { continue };
            let sol = inv * (match self.map {
                MeshMap::Ellipsoid { .. } => -q0,
                MeshMap::Flat => target - q0,
            });
            let (u, v, s) = (sol[0], sol[1], sol[2]);
            if u < -TOL || v < -TOL || u + v > 1.0 + TOL {
                continue;
            }
            let miss = match self.map {
                MeshMap::Ellipsoid { .. } => -s,
                MeshMap::Flat => s.abs(),
            };
            if matches!(self.map, MeshMap::Ellipsoid { .. }) && s <= 0.0 {
                continue;
            }
            if best.is_none_or(|b| miss < b.3) {
                best = Some((e, u.max(0.0), v.max(0.0), miss));
            }
        }
        best.map(|b| (b.0, b.1, b.2))
    }
}
