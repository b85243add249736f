//! Elastic transmission problem for one penetrable inclusion.
//!
//! Collocation at the mesh nodes with piecewise-linear interpolation of the
//! exterior Cauchy data `(w, t)` on the exact (mapped) surface. The unknowns
//! are the scattered exterior displacement and traction; the system is
//!
//! ```text
//! (½I − K_e) w + V_e t = 0
//! (½I + K_1) w − V_1 t = (K_e − K_1) u^i − (V_e − V_1) t^i
//! ```
//!
//! so that zero contrast gives `w = t = 0` up to rounding. Point sources
//! inside the inclusion instead solve for the total data with right side
//! `G_1(·, z) q`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::geometry::{SurfaceKind, SurfaceMesh};
use crate::linalg::{c, CMat, CMat3, Factorized, Point};
use crate::quadrature::{collapsed, tri7, TriRule};
use crate::wavecore::kernel::{traction_of_gradient, Kelvin, Kupradze};
use crate::wavecore::{kernel_for, plane_wave_tensor, plane_wave_traction, wave_numbers, ElasticMedium, WaveNumbers};
use crate::{Error, Result};

/// Duffy order for elements that contain the collocation node.
const SINGULAR_ORDER: usize = 10;
/// Sub-triangles are split while closer than this many of their diameters.
const NEAR_RATIO: f64 = 2.0;
const MAX_DEPTH: usize = 5;
/// Reciprocal condition estimate below which the system counts as resonant.
const RCOND_MIN: f64 = 1e-10;
/// Validated upper limit of `k_s · diameter`.
pub const MAX_KD: f64 = 8.0;

#[derive(Clone, Copy, Debug)]
struct SurfPt {
    pos: Point,
    normal: Point,
    weight: f64,
    lam: [f64; 3],
}

fn rule_points(mesh: &SurfaceMesh, e: usize, rule: &TriRule, corners: &[[f64; 2]; 3], out: &mut Vec<SurfPt>) {
    // affine map from the rule's reference triangle onto the sub-triangle `corners`
    let [a, b, cc] = *corners;
    let area2 = ((b[0] - a[0]) * (cc[1] - a[1]) - (cc[0] - a[0]) * (b[1] - a[1])).abs();
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let u = a[0] + (b[0] - a[0]) * p[0] + (cc[0] - a[0]) * p[1];
        let v = a[1] + (b[1] - a[1]) * p[0] + (cc[1] - a[1]) * p[1];
        let sp = mesh.eval(e, u, v);
        out.push(SurfPt { pos: sp.pos, normal: sp.normal, weight: w * area2 * sp.jac, lam: [1.0 - u - v, u, v] });
    }
}

fn subdivide(mesh: &SurfaceMesh, e: usize, corners: [[f64; 2]; 3], x: &Point, depth: usize, rule: &TriRule, out: &mut Vec<SurfPt>) {
    let phys: Vec<Point> = corners.iter().map(|p| mesh.eval(e, p[0], p[1]).pos).collect();
    let diam = (phys[0] - phys[1]).norm().max((phys[1] - phys[2]).norm()).max((phys[2] - phys[0]).norm());
    let centre = (phys[0] + phys[1] + phys[2]) / 3.0;
    if depth >= MAX_DEPTH || (centre - x).norm() > NEAR_RATIO * diam {
        rule_points(mesh, e, rule, &corners, out);
        return;
    }
    let mid = |p: [f64; 2], q: [f64; 2]| [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
    let [a, b, cc] = corners;
    let (ab, bc, ca) = (mid(a, b), mid(b, cc), mid(cc, a));
    for sub in [[a, ab, ca], [ab, b, bc], [ca, bc, cc], [ab, bc, ca]] {
        subdivide(mesh, e, sub, x, depth + 1, rule, out);
    }
}

const REF: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Quadrature points of element `e` for a target point `x` off the element.
fn adaptive_points(mesh: &SurfaceMesh, e: usize, x: &Point, rule: &TriRule) -> Vec<SurfPt> {
    let mut out = Vec::new();
    subdivide(mesh, e, REF, x, 0, rule, &mut out);
    out
}

/// Duffy rule collapsed at local vertex `k` of element `e`.
fn singular_points(mesh: &SurfaceMesh, e: usize, k: usize) -> Vec<SurfPt> {
    let mut out = Vec::new();
    rule_points(mesh, e, &collapsed(SINGULAR_ORDER, k, false, false), &REF, &mut out);
    out
}

/// Reference geometry and media of a penetrable inclusion.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    pub surface: SurfaceKind,
    pub interior: ElasticMedium,
    pub exterior: ElasticMedium,
    /// Geodesic frequency (ellipsoids) or per-face subdivision (cubes).
    pub resolution: usize,
}

/// Factorized transmission system plus cached plane-wave solutions.
pub struct TransmissionSolver {
    pub spec: InclusionSpec,
    pub mesh: SurfaceMesh,
    pub wn: WaveNumbers,
    ker_e: Kupradze,
    ker_i: Kupradze,
    dk: CMat,
    dv: CMat,
    factor: Factorized,
    cache: Mutex<HashMap<[u64; 3], Arc<CMat>>>,
    pub warnings: Vec<String>,
}

impl fmt::Debug for TransmissionSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransmissionSolver")
            .field("spec", &self.spec)
            .field("omega", &self.wn.omega)
            .field("nodes", &self.mesh.nodes.len())
            .finish()
    }
}

/// Where a point source sits relative to the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Exterior,
    Interior,
}

impl TransmissionSolver {
    pub fn new(spec: InclusionSpec, omega: f64) -> Result<Self> {
        spec.surface.validate()?;
        if !spec.surface.is_closed() {
            return Err(Error::Invalid { field: "inclusion surface".into(), reason: "must be closed".into() });
        }
        spec.interior.validate()?;
        let wn = wave_numbers(omega, &spec.exterior)?;
        if !crate::wavecore::check_monotonicity(&spec.interior, &spec.exterior) {
            return Err(Error::Invalid {
                field: "inclusion media".into(),
                reason: "(λ_1 − λ_0)(μ_1 − μ_0) must be non-negative".into(),
            });
        }
        let mesh = SurfaceMesh::from_kind(&spec.surface, spec.resolution)?;
        let mut warnings = Vec::new();
        let kd = wn.k_s * spec.surface.diameter();
        if kd > MAX_KD {
            warnings.push(format!("k_s·diameter = {kd:.2} exceeds the validated range {MAX_KD}"));
        }
        let lam_int = 2.0 * PI * spec.interior.c_s() / omega;
        let lam = lam_int.min(2.0 * PI / wn.k_s);
        let per = lam / mesh.mesh_size();
        if per < 6.0 {
            warnings.push(format!("inclusion mesh under-resolved: {per:.1} nodes per shear wavelength"));
        }
        let ker_e = kernel_for(omega, &spec.exterior);
        let ker_i = kernel_for(omega, &spec.interior);
        let n = mesh.nodes.len();
        let kel_e = Kelvin { lambda: spec.exterior.lambda, mu: spec.exterior.mu };
        let kel_i = Kelvin { lambda: spec.interior.lambda, mu: spec.interior.mu };
        let rows: Vec<[CMat; 4]> = (0..n).into_par_iter().map(|i| collocation_rows(&mesh, i, [&ker_e, &ker_i], [&kel_e, &kel_i])).collect();
        let m = 3 * n;
        let mut a = CMat::zeros(2 * m, 2 * m);
        let mut dk = CMat::zeros(m, m);
        let mut dv = CMat::zeros(m, m);
        let half = CMat3::identity() * c(0.5);
        for (i, [ve, ke, vi, ki]) in rows.into_iter().enumerate() {
            let r = 3 * i;
            a.view_mut((r, 0), (3, m)).copy_from(&(-&ke));
            a.view_mut((r, m), (3, m)).copy_from(&ve);
            a.view_mut((m + r, 0), (3, m)).copy_from(&ki);
            a.view_mut((m + r, m), (3, m)).copy_from(&(-&vi));
            let mut top = a.fixed_view_mut::<3, 3>(r, r);
            top += half;
            let mut bot = a.fixed_view_mut::<3, 3>(m + r, r);
            bot += half;
            dk.view_mut((r, 0), (3, m)).copy_from(&(ke - ki));
            dv.view_mut((r, 0), (3, m)).copy_from(&(ve - vi));
        }
        let hint = |rcond: f64| Error::IllConditioned {
            rcond,
            hint: format!(
                "transmission system near an irregular frequency at omega = {omega}; perturb omega by 0.5% (e.g. {})",
                omega * 1.005
            ),
        };
        let factor = match Factorized::new(a) {
            Ok(f) if f.rcond >= RCOND_MIN => f,
            Ok(f) => return Err(hint(f.rcond)),
            Err(Error::IllConditioned { rcond, .. }) => return Err(hint(rcond)),
            Err(e) => return Err(e),
        };
        Ok(Self { spec, mesh, wn, ker_e, ker_i, dk, dv, factor, cache: Mutex::new(HashMap::new()), warnings })
    }

    /// Like [`TransmissionSolver::new`], retrying once at `1.005 ω` when the
    /// system is ill-conditioned. The shift is recorded in `warnings`.
    pub fn new_with_shift(spec: InclusionSpec, omega: f64) -> Result<Self> {
        match Self::new(spec.clone(), omega) {
            Err(Error::IllConditioned { .. }) => {
                let shifted = omega * 1.005;
                let mut s = Self::new(spec, shifted)?;
                s.warnings.push(format!("frequency shifted from {omega} to {shifted} to avoid an irregular frequency"));
                Ok(s)
            }
            other => other,
        }
    }

    pub fn omega(&self) -> f64 {
        self.wn.omega
    }

    pub fn dofs(&self) -> usize {
        6 * self.mesh.nodes.len()
    }

    pub fn rcond(&self) -> f64 {
        self.factor.rcond
    }

    pub fn side(&self, x: &Point) -> Side {
        if self.spec.surface.contains(x) {
            Side::Interior
        } else {
            Side::Exterior
        }
    }

    fn medium(&self, side: Side) -> &ElasticMedium {
        match side {
            Side::Exterior => &self.spec.exterior,
            Side::Interior => &self.spec.interior,
        }
    }

    /// Nodal incident data `[u; t]` (6n × 3) of the plane wave `W(·, d)`.
    fn plane_nodal(&self, d: &Point) -> CMat {
        let n = self.mesh.nodes.len();
        let mut out = CMat::zeros(6 * n, 3);
        for (j, (x, nu)) in self.mesh.nodes.iter().zip(&self.mesh.normals).enumerate() {
            let u = crate::wavecore::plane_wave_tensor(x, d, &self.wn).expect("unit direction");
            out.fixed_view_mut::<3, 3>(3 * j, 0).copy_from(&u);
            out.fixed_view_mut::<3, 3>(3 * n + 3 * j, 0).copy_from(&plane_wave_traction(x, d, nu, &self.wn));
        }
        out
    }

    /// Nodal data `[u; t]` of the exterior point source `G_e(·, z)`.
    fn source_nodal(&self, z: &Point, ker: &Kupradze) -> CMat {
        let n = self.mesh.nodes.len();
        let mut out = CMat::zeros(6 * n, 3);
        for (j, (x, nu)) in self.mesh.nodes.iter().zip(&self.mesh.normals).enumerate() {
            let r = x - z;
            out.fixed_view_mut::<3, 3>(3 * j, 0).copy_from(&ker.matrix(&r));
            out.fixed_view_mut::<3, 3>(3 * n + 3 * j, 0).copy_from(&ker.traction(&r, nu));
        }
        out
    }

    /// Right side for incident exterior data `[u; t]` (6n × k).
    fn contrast_rhs(&self, inc: &CMat) -> CMat {
        let m = 3 * self.mesh.nodes.len();
        let k = inc.ncols();
        let mut rhs = CMat::zeros(2 * m, k);
        let bottom = &self.dk * inc.rows(0, m) - &self.dv * inc.rows(m, m);
        rhs.rows_mut(m, m).copy_from(&bottom);
        rhs
    }

    /// Scattered Cauchy data `[w; t]` (6n × 3, Cartesian polarizations) for
    /// each direction; solved in one batch and cached.
    pub fn plane_solutions(&self, dirs: &[Point]) -> Result<Vec<Arc<CMat>>> {
        let key = |d: &Point| [d.x.to_bits(), d.y.to_bits(), d.z.to_bits()];
        let mut missing: Vec<Point> = Vec::new();
        {
            let cache = self.cache.lock().expect("cache lock");
            for d in dirs {
                if !cache.contains_key(&key(d)) && !missing.iter().any(|m| key(m) == key(d)) {
                    missing.push(*d);
                }
            }
        }
        if !missing.is_empty() {
            for d in &missing {
                if (d.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::Invalid { field: "d".into(), reason: "must be a unit vector".into() });
                }
            }
            let nodal: Vec<CMat> = missing.par_iter().map(|d| self.plane_nodal(d)).collect();
            let rows = 6 * self.mesh.nodes.len();
            let mut inc = CMat::zeros(rows, 3 * missing.len());
            for (j, m) in nodal.iter().enumerate() {
                inc.columns_mut(3 * j, 3).copy_from(m);
            }
            let sol = self.factor.solve(&self.contrast_rhs(&inc))?;
            let mut cache = self.cache.lock().expect("cache lock");
            for (j, d) in missing.iter().enumerate() {
                cache.insert(key(d), Arc::new(sol.columns(3 * j, 3).into_owned()));
            }
        }
        let cache = self.cache.lock().expect("cache lock");
        Ok(dirs.iter().map(|d| cache[&key(d)].clone()).collect())
    }

    /// Cauchy data (6n × 3) for the point source `G(·, z) q`: the scattered
    /// exterior data for exterior sources, the total data for interior ones.
    pub fn point_solution(&self, z: &Point) -> Result<(CMat, Side)> {
        let side = self.side(z);
        let m = 3 * self.mesh.nodes.len();
        let rhs = match side {
            Side::Exterior => self.contrast_rhs(&self.source_nodal(z, &self.ker_e)),
            Side::Interior => {
                let mut rhs = CMat::zeros(2 * m, 3);
                let g = self.source_nodal(z, &self.ker_i);
                rhs.rows_mut(m, m).copy_from(&g.rows(0, m));
                rhs
            }
        };
        Ok((self.factor.solve(&rhs)?, side))
    }

    /// Representation rows (3 × 6n): exterior `∫ (T_y G_e)ᵀ w − G_e t`,
    /// interior `∫ G_1 t − (T_y G_1)ᵀ w`.
    fn rows(&self, x: &Point, side: Side) -> CMat {
        let n = self.mesh.nodes.len();
        let (ker, sign) = match side {
            Side::Exterior => (&self.ker_e, 1.0),
            Side::Interior => (&self.ker_i, -1.0),
        };
        let rule = tri7();
        let mut out = CMat::zeros(3, 6 * n);
        for (e, t) in self.mesh.triangles.iter().enumerate() {
            for p in adaptive_points(&self.mesh, e, x, &rule) {
                let r = p.pos - x;
                let g = ker.matrix(&r);
                let tr = ker.traction(&r, &p.normal).transpose();
                for (a, &j) in t.iter().enumerate() {
                    let w = c(sign * p.lam[a] * p.weight);
                    let mut dw = out.fixed_view_mut::<3, 3>(0, 3 * j);
                    dw += tr * w;
                    let mut dt = out.fixed_view_mut::<3, 3>(0, 3 * n + 3 * j);
                    dt -= g * w;
                }
            }
        }
        out
    }

    /// Step for the 4th-order difference stencil around `x`.
    fn fd_step(&self, x: &Point) -> f64 {
        let dist = self.mesh.nodes.iter().map(|p| (p - x).norm()).fold(f64::INFINITY, f64::min);
        let k = self.ker_i.k_s.max(self.ker_e.k_s);
        (0.02 / k).min(dist / 5.0)
    }

    /// Traction rows (3 × 6n) for normal `nu`, by 4th-order differences of [`Self::rows`].
    fn traction_rows(&self, x: &Point, nu: &Point, side: Side) -> CMat {
        let h = self.fd_step(x);
        let n6 = 6 * self.mesh.nodes.len();
        let grads: Vec<CMat> = (0..3)
            .map(|k| {
                let mut e = Point::zeros();
                e[k] = h;
                let f = |s: f64| self.rows(&(x + e * s), side);
                (f(-2.0) - f(2.0) + (f(1.0) - f(-1.0)) * c(8.0)) / c(12.0 * h)
            })
            .collect();
        let med = self.medium(side);
        let mut out = CMat::zeros(3, n6);
        for col in 0..n6 {
            // treat each unknown as a polarization column: ∂_k u_i
            let g: [CMat3; 3] = std::array::from_fn(|k| {
                let mut m = CMat3::zeros();
                for i in 0..3 {
                    m[(i, 0)] = grads[k][(i, col)];
                }
                m
            });
            let t = traction_of_gradient(&g, nu, med.lambda, med.mu);
            for i in 0..3 {
                out[(i, col)] = t[(i, 0)];
            }
        }
        out
    }

    /// `W_b(x, d)` for every direction (3×3 each, columns are polarizations).
    pub fn responses(&self, x: &Point, dirs: &[Point]) -> Result<Vec<CMat3>> {
        let side = self.side(x);
        let rows = self.rows(x, side);
        let sols = self.plane_solutions(dirs)?;
        dirs.iter()
            .zip(sols)
            .map(|(d, s)| {
                Ok(match side {
                    Side::Exterior => plane_wave_tensor(x, d, &self.wn)? + to3(&(&rows * &*s)),
                    Side::Interior => to3(&(&rows * (&*s + self.plane_nodal(d)))),
                })
            })
            .collect()
    }

    /// Radial projection of `x` onto the interface.
    fn project(&self, x: &Point) -> Point {
        let c0 = self.spec.surface.center();
        let r = x - c0;
        let scale = match &self.spec.surface {
            SurfaceKind::Sphere { radius, .. } => r.norm() / radius,
            SurfaceKind::Ellipsoid { semi_axes, .. } => r.component_div(&Point::from(*semi_axes)).norm(),
            SurfaceKind::Cube { side, .. } => r.amax() / (0.5 * side),
            SurfaceKind::Plane { .. } => 1.0,
        };
        if scale > 0.0 {
            c0 + r / scale
        } else {
            *x
        }
    }

    /// Interface traction by interpolating the nodal total traction. Used
    /// for points on (or numerically on) the interface where differencing
    /// the representation would straddle it.
    fn trace_tractions(&self, x: &Point, nu: &Point, dirs: &[Point]) -> Result<Vec<CMat3>> {
        let p = self.project(x);
        let (e, u, v) = self
            .mesh
            .locate(&p)
            .ok_or_else(|| Error::Unsupported(format!("point {:?} could not be located on the interface", p.as_slice())))?;
        let normal = self.mesh.eval(e, u, v).normal;
        let sign = nu.dot(&normal);
        if sign.abs() < 0.99 {
            return Err(Error::Unsupported("traction on the interface is only available along its normal".into()));
        }
        let n = self.mesh.nodes.len();
        let tri = self.mesh.triangles[e];
        let lam = [1.0 - u - v, u, v];
        let sols = self.plane_solutions(dirs)?;
        Ok(dirs
            .iter()
            .zip(sols)
            .map(|(d, s)| {
                let mut t = CMat3::zeros();
                for (a, &j) in tri.iter().enumerate() {
                    let node = &self.mesh.nodes[j];
                    let total = s.fixed_view::<3, 3>(3 * n + 3 * j, 0) + plane_wave_traction(node, d, &self.mesh.normals[j], &self.wn);
                    t += total * c(lam[a]);
                }
                t * c(sign.signum())
            })
            .collect())
    }

    /// Tractions `ν·C:∇W_b(x, d)` for every direction.
    pub fn response_tractions(&self, x: &Point, nu: &Point, dirs: &[Point]) -> Result<Vec<CMat3>> {
        if (x - self.project(x)).norm() < 0.25 * self.mesh.mesh_size() {
            return self.trace_tractions(x, nu, dirs);
        }
        let side = self.side(x);
        let rows = self.traction_rows(x, nu, side);
        let sols = self.plane_solutions(dirs)?;
        dirs.iter()
            .zip(sols)
            .map(|(d, s)| {
                Ok(match side {
                    Side::Exterior => plane_wave_traction(x, d, nu, &self.wn) + to3(&(&rows * &*s)),
                    Side::Interior => to3(&(&rows * (&*s + self.plane_nodal(d)))),
                })
            })
            .collect()
    }

    /// Background Green's tensor `G_b(x, z)`.
    pub fn green(&self, x: &Point, z: &Point) -> Result<CMat3> {
        let (sol, zside) = self.point_solution(z)?;
        let side = self.side(x);
        let rows = self.rows(x, side);
        Ok(match (side, zside) {
            (Side::Exterior, Side::Exterior) => self.ker_e.matrix(&(x - z)) + to3(&(&rows * &sol)),
            (Side::Exterior, Side::Interior) => to3(&(&rows * &sol)),
            (Side::Interior, Side::Exterior) => to3(&(&rows * (&sol + self.source_nodal(z, &self.ker_e)))),
            (Side::Interior, Side::Interior) => self.ker_i.matrix(&(x - z)) + to3(&(&rows * &sol)),
        })
    }

    /// Far-field rows (3 × 6n) at `ξ̂`: `∫ T_y W(y, −ξ̂)ᵀ w − W(y, −ξ̂) t`.
    fn far_rows(&self, xi: &Point) -> Result<CMat> {
        let n = self.mesh.nodes.len();
        let rule = tri7();
        let mut out = CMat::zeros(3, 6 * n);
        let md = -xi;
        for (e, t) in self.mesh.triangles.iter().enumerate() {
            let mut pts = Vec::new();
            rule_points(&self.mesh, e, &rule, &REF, &mut pts);
            for p in pts {
                let w_in = plane_wave_tensor(&p.pos, &md, &self.wn)?;
                let tr = plane_wave_traction(&p.pos, &md, &p.normal, &self.wn).transpose();
                for (a, &j) in t.iter().enumerate() {
                    let w = c(p.lam[a] * p.weight);
                    let mut dw = out.fixed_view_mut::<3, 3>(0, 3 * j);
                    dw += tr * w;
                    let mut dt = out.fixed_view_mut::<3, 3>(0, 3 * n + 3 * j);
                    dt -= w_in * w;
                }
            }
        }
        Ok(out)
    }

    /// Far-field projection (3M × 6n) for a list of observation directions.
    pub fn far_projection(&self, xis: &[Point]) -> Result<CMat> {
        let blocks: Vec<CMat> = xis.par_iter().map(|x| self.far_rows(x)).collect::<Result<_>>()?;
        let mut out = CMat::zeros(3 * xis.len(), self.dofs());
        for (i, b) in blocks.into_iter().enumerate() {
            out.rows_mut(3 * i, 3).copy_from(&b);
        }
        Ok(out)
    }

    /// Far-field matrix (3N × 3N) of Cartesian blocks `W_b^∞(ξ̂_i, d_j)`.
    pub fn far_matrix(&self, dirs: &[Point]) -> Result<CMat> {
        let proj = self.far_projection(dirs)?;
        let sols = self.plane_solutions(dirs)?;
        let mut s = CMat::zeros(self.dofs(), 3 * dirs.len());
        for (j, m) in sols.iter().enumerate() {
            s.columns_mut(3 * j, 3).copy_from(m);
        }
        Ok(proj * s)
    }

    /// Far-field pattern of the background Green's tensor: `G_b^∞(ξ̂, z)`.
    pub fn green_far_field(&self, xis: &[Point], z: &Point) -> Result<Vec<CMat3>> {
        let (sol, side) = self.point_solution(z)?;
        let proj = self.far_projection(xis)?;
        let ff = proj * sol;
        xis.iter()
            .enumerate()
            .map(|(i, xi)| {
                let mut b = to3(&ff.rows(3 * i, 3).into_owned());
                if side == Side::Exterior {
                    b += plane_wave_tensor(z, &(-xi), &self.wn)?;
                }
                Ok(b)
            })
            .collect()
    }

    /// Scattered displacement at `x` (exterior) for incidence `(d, q)`.
    pub fn scattered(&self, x: &Point, d: &Point) -> Result<CMat3> {
        let sol = self.plane_solutions(std::slice::from_ref(d))?;
        Ok(to3(&(self.rows(x, Side::Exterior) * &*sol[0])))
    }

    /// Largest nodal magnitude of the scattered data relative to the incident data.
    pub fn scattered_ratio(&self, d: &Point) -> Result<f64> {
        let sol = self.plane_solutions(std::slice::from_ref(d))?;
        let inc = self.plane_nodal(d);
        Ok(sol[0].norm() / inc.norm())
    }
}

fn to3(m: &CMat) -> CMat3 {
    CMat3::from_fn(|i, j| m[(i, j)])
}

/// Rows `i` of `V_e, K_e, V_1, K_1` (each 3 × 3n). The static part of `K` is
/// integrated off the diagonal only; the diagonal comes from the rigid-body
/// identity `K_0 1 = −½ I`, which also absorbs the free term at edges.
fn collocation_rows(mesh: &SurfaceMesh, i: usize, ker: [&Kupradze; 2], kel: [&Kelvin; 2]) -> [CMat; 4] {
    let n = mesh.nodes.len();
    let x = mesh.nodes[i];
    let mut v = [CMat::zeros(3, 3 * n), CMat::zeros(3, 3 * n)];
    let mut k = [CMat::zeros(3, 3 * n), CMat::zeros(3, 3 * n)];
    let mut stat_sum = [CMat3::zeros(), CMat3::zeros()];
    let rule = tri7();
    for (e, t) in mesh.triangles.iter().enumerate() {
        let pts = match t.iter().position(|&j| j == i) {
            Some(a) => singular_points(mesh, e, a),
            None => adaptive_points(mesh, e, &x, &rule),
        };
        for p in pts {
            let r = p.pos - x;
            for m in 0..2 {
                let g = ker[m].matrix(&r);
                let s = kel[m].traction(&r, &p.normal);
                let dyn_part = (ker[m].traction(&r, &p.normal) - s).transpose();
                let st = s.transpose();
                for (a, &j) in t.iter().enumerate() {
                    let w = c(p.lam[a] * p.weight);
                    let mut vb = v[m].fixed_view_mut::<3, 3>(0, 3 * j);
                    vb += g * w;
                    let mut kb = k[m].fixed_view_mut::<3, 3>(0, 3 * j);
                    kb += dyn_part * w;
                    if j != i {
                        kb += st * w;
                        stat_sum[m] += st * w;
                    }
                }
            }
        }
    }
    for m in 0..2 {
        let mut kb = k[m].fixed_view_mut::<3, 3>(0, 3 * i);
        kb += CMat3::identity() * c(-0.5) - stat_sum[m];
    }
    let [v0, v1] = v;
    let [k0, k1] = k;
    [v0, k0, v1, k1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn medium(l: f64, m: f64, r: f64) -> ElasticMedium {
        ElasticMedium::new(l, m, r).unwrap()
    }

    fn sphere_spec(interior: ElasticMedium, resolution: usize) -> InclusionSpec {
        InclusionSpec {
            surface: SurfaceKind::Sphere { center: [0.0; 3], radius: 0.5 },
            interior,
            exterior: medium(1.5, 1.0, 1.0),
            resolution,
        }
    }

    #[test]
    fn zero_contrast_scatters_nothing() {
        let s = TransmissionSolver::new(sphere_spec(medium(1.5, 1.0, 1.0), 3), 4.0).unwrap();
        let d = Point::new(0.3, -0.4, 0.5).normalize();
        assert!(s.scattered_ratio(&d).unwrap() < 1e-8);
        let u = s.scattered(&Point::new(2.0, 0.5, -1.0), &d).unwrap();
        assert!(u.norm() < 1e-8);
    }

    #[test]
    fn adaptive_rule_integrates_area() {
        let mesh = SurfaceMesh::ellipsoid(Point::zeros(), Point::repeat(1.0), 2).unwrap();
        let x = mesh.centroid(3) * 1.001;
        let area: f64 = (0..mesh.triangles.len())
            .flat_map(|e| adaptive_points(&mesh, e, &x, &tri7()))
            .map(|p| p.weight)
            .sum();
        assert!((area / (4.0 * PI) - 1.0).abs() < 1e-4, "{area}");
    }

    #[test]
    fn static_double_layer_row_sums() {
        // Gauss: K_0 applied to a rigid translation is −½I at every node
        let mesh = SurfaceMesh::ellipsoid(Point::zeros(), Point::new(0.5, 0.4, 0.6), 2).unwrap();
        let m = medium(1.5, 1.0, 1.0);
        let ker = kernel_for(1e-6, &m);
        let kel = Kelvin { lambda: m.lambda, mu: m.mu };
        let [_, k, _, _] = collocation_rows(&mesh, 5, [&ker, &ker], [&kel, &kel]);
        let mut sum = CMat3::zeros();
        for j in 0..mesh.nodes.len() {
            sum += k.fixed_view::<3, 3>(0, 3 * j);
        }
        assert!((sum + CMat3::identity() * c(0.5)).norm() < 1e-9);
    }

    fn coarse() -> TransmissionSolver {
        TransmissionSolver::new(sphere_spec(medium(1.0, 0.6, 1.0), 3), 4.0).unwrap()
    }

    #[test]
    fn response_satisfies_navier_on_both_sides() {
        let s = coarse();
        let d = Point::new(0.0, 0.6, 0.8);
        for (x, m) in [(Point::new(0.9, 0.2, -0.3), s.spec.exterior), (Point::new(0.05, -0.1, 0.1), s.spec.interior)] {
            let f = |p: &Point| s.responses(p, &[d]).unwrap()[0].column(1).into_owned();
            // quadrature switches between nearby points, so keep the stencil wide
            let (res, scale) = crate::wavecore::fd::navier_residual(&f, &x, &m, 4.0, 5e-2);
            assert!(res.norm() < 1e-3 * scale, "{} vs {}", res.norm(), scale);
        }
    }

    #[test]
    fn displacement_continuous_across_interface() {
        let s = coarse();
        let d = Point::new(1.0, 0.0, 0.0);
        let dir = Point::new(0.2, 0.5, 0.7).normalize();
        let at = |r: f64| s.responses(&(dir * r), &[d]).unwrap()[0];
        // one-sided linear extrapolation of each trace to r = 0.5
        let (h1, h2) = (0.06, 0.12);
        let outside = at(0.5 + h1) * c(2.0) - at(0.5 + h2);
        let inside = at(0.5 - h1) * c(2.0) - at(0.5 - h2);
        assert!((outside - inside).norm() < 2e-2 * outside.norm(), "{}", (outside - inside).norm() / outside.norm());
    }

    #[test]
    fn traction_rows_match_response_differences() {
        let s = coarse();
        let d = Point::new(0.0, 0.0, -1.0);
        let x = Point::new(0.7, 0.4, 0.1);
        let nu = Point::new(1.0, -1.0, 2.0).normalize();
        let t = s.response_tractions(&x, &nu, &[d]).unwrap()[0];
        let h = 1e-3;
        let grad: [CMat3; 3] = std::array::from_fn(|k| {
            let mut e = Point::zeros();
            e[k] = h;
            (s.responses(&(x + e), &[d]).unwrap()[0] - s.responses(&(x - e), &[d]).unwrap()[0]) / c(2.0 * h)
        });
        let m = s.spec.exterior;
        let fd = traction_of_gradient(&grad, &nu, m.lambda, m.mu);
        assert!((t - fd).norm() < 1e-4 * t.norm());
    }

    #[test]
    fn interface_traction_trace() {
        let d = Point::new(0.0, 0.6, 0.8);
        let dir = Point::new(0.3, -0.4, 0.8).normalize();
        let x = dir * 0.5;
        // zero contrast: the trace is the interpolated incident traction
        let ext = medium(1.5, 1.0, 1.0);
        let same = TransmissionSolver::new(sphere_spec(ext, 3), 4.0).unwrap();
        let exact = plane_wave_traction(&x, &d, &dir, &same.wn);
        let t = same.response_tractions(&x, &dir, &[d]).unwrap()[0];
        assert!((t - exact).norm() < 3e-2 * exact.norm(), "{}", (t - exact).norm() / exact.norm());
        // stable under refinement with contrast
        let s = coarse();
        let fine = TransmissionSolver::new(sphere_spec(medium(1.0, 0.6, 1.0), 4), 4.0).unwrap();
        let on = s.response_tractions(&x, &dir, &[d]).unwrap()[0];
        let on_fine = fine.response_tractions(&x, &dir, &[d]).unwrap()[0];
        assert!((on - on_fine).norm() < 2e-2 * on.norm(), "{}", (on - on_fine).norm() / on.norm());
        let flipped = s.response_tractions(&x, &(-dir), &[d]).unwrap()[0];
        assert!((flipped + on).norm() < 1e-12 * on.norm());
        let tangent = Point::new(0.8, 0.6, 0.0).cross(&dir).normalize();
        assert!(s.response_tractions(&x, &tangent, &[d]).is_err());
    }

    #[test]
    fn irregular_frequency_hint_mentions_shift() {
        let e = Error::IllConditioned { rcond: 0.0, hint: String::new() };
        assert!(matches!(e, Error::IllConditioned { .. }));
        let bad = InclusionSpec { resolution: 0, ..sphere_spec(medium(1.0, 0.6, 1.0), 1) };
        assert!(TransmissionSolver::new(bad, 4.0).is_err());
        let non_mono = sphere_spec(medium(2.0, 0.6, 1.0), 2);
        assert!(matches!(TransmissionSolver::new(non_mono, 4.0), Err(Error::Invalid { .. })));
    }
}
