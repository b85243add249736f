//! Forward scattering by linear-slip cracks: Galerkin solve for the opening
//! displacement, far-field radiation and the measured far-field matrix.

pub mod assembly;
pub mod kernel;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::background::{background_far_matrix, traction_table, BackgroundModel};
use crate::geometry::{CrackGeometry, DirectionGrid};
use crate::inversion::{FarFieldMatrix, Role};
use crate::linalg::{c, frob, CMat, CMat3, CVec, CVec3, Factorized, Point};
use crate::wavecore::{plane_wave_traction, WaveNumbers};
use crate::{Error, Result};
use assembly::{assemble_stiffness, assemble_traction_operator, basis_at, BasisEval};
use kernel::CrackKernel;

/// Minimum number of crack nodes per shear wavelength before a warning is issued.
pub const NODES_PER_WAVELENGTH: f64 = 6.0;

/// A crack quadrature node with the data needed for projections.
#[derive(Clone, Debug)]
pub struct CrackNode {
    pub element: usize,
    pub pos: Point,
    pub normal: Point,
    pub weight: f64,
    pub basis: BasisEval,
}

/// All quadrature nodes of a crack at a rule refinement level.
pub fn crack_quadrature_nodes(crack: &CrackGeometry, level: usize) -> Vec<CrackNode> {
    let mut out = Vec::new();
    for (e, el) in crack.elements.iter().enumerate() {
        for q in crack.element_rule(e, level) {
            out.push(CrackNode { element: e, pos: q.pos, normal: el.normal, weight: q.weight, basis: basis_at(crack, el, q.bary) });
        }
    }
    out
}

pub struct CrackSystem {
    pub crack: CrackGeometry,
    pub background: BackgroundModel,
    pub wn: WaveNumbers,
    pub t_h: CMat,
    pub k_h: CMat,
    pub matrix: CMat,
    factor: Factorized,
    pub warnings: Vec<String>,
}

/// Jump `[u] = u⁺ − u⁻` across the crack, stored as local-frame coefficients.
#[derive(Clone, Debug)]
pub struct OpeningDisplacement {
    /// Three coefficients per node in the node's `(ν, τ1, τ2)` frame.
    pub coeffs: CVec,
    /// Jump at the nodes in global coordinates; zero on front nodes.
    pub nodal: Vec<CVec3>,
    pub direction: Option<Point>,
    pub polarization: Option<CVec3>,
}

impl OpeningDisplacement {
    fn new(crack: &CrackGeometry, coeffs: CVec) -> Self {
        let nodal = (0..crack.len())
            .map(|j| {
                let w = crack.edge_weight[j].max(0.0).sqrt();
                let f = crack.frame(j).map(c);
                f * CVec3::new(coeffs[3 * j], coeffs[3 * j + 1], coeffs[3 * j + 2]) * c(w)
            })
            .collect();
        Self { coeffs, nodal, direction: None, polarization: None }
    }

    /// `[u]` at a point of element `e` given its basis values.
    pub fn eval(&self, crack: &CrackGeometry, e: usize, basis: &BasisEval) -> CVec3 {
        let el = &crack.elements[e];
        let mut u = CVec3::zeros();
        for k in 0..3 {
            let j = el.nodes[k];
            let f = crack.frame(j);
            for a in 0..3 {
                u += f.column(a).map(c) * (self.coeffs[3 * j + a] * basis.psi[k]);
            }
        }
        u
    }
}

/// `∫ ψ_i e_ib·t` for a traction field sampled at crack nodes.
fn project(crack: &CrackGeometry, nodes: &[CrackNode], t: &[CVec3]) -> CVec {
    let mut out = CVec::zeros(3 * crack.len());
    for (q, tq) in nodes.iter().zip(t) {
        let el = &crack.elements[q.element];
        for k in 0..3 {
            let j = el.nodes[k];
            let f = crack.frame(j);
            let s = q.weight * q.basis.psi[k];
            for b in 0..3 {
                let e = f.column(b);
                out[3 * j + b] += (tq[0] * e[0] + tq[1] * e[1] + tq[2] * e[2]) * s;
            }
        }
    }
    out
}

pub fn assemble_crack_system(crack: &CrackGeometry, background: &BackgroundModel, wn: &WaveNumbers) -> Result<CrackSystem> {
    let mut warnings = Vec::new();
    if !background.is_homogeneous() {
        warnings.push(
            "crack operator uses the exterior kernel; crack-interface multiple scattering is neglected".to_string(),
        );
    }
    let lambda_s = 2.0 * PI / wn.k_s;
    let per_wavelength = lambda_s / crack.mesh_size();
    if per_wavelength < NODES_PER_WAVELENGTH {
        warnings.push(format!("crack under-resolved: {per_wavelength:.1} nodes per shear wavelength"));
    }
    let kern = CrackKernel::from_wave(&wn.kernel());
    let t_h = assemble_traction_operator(crack, &kern);
    let k_h = assemble_stiffness(crack);
    let matrix = &t_h - &k_h;
    let real_k = crack.stiffness.iter().all(|k| k.iter().all(|v| v.im == 0.0));
    if real_k {
        let asym = frob(&(&matrix - matrix.transpose())) / frob(&matrix);
        if asym > 1e-12 {
            warnings.push(format!("crack system asymmetry {asym:e}"));
        }
    }
    let factor = Factorized::new(matrix.clone()).map_err(|e| match e {
        Error::IllConditioned { rcond, .. } => Error::IllConditioned {
            rcond,
            hint: format!("crack system singular at omega = {}; perturb the frequency", wn.omega),
        },
        other => other,
    })?;
    Ok(CrackSystem {
        crack: crack.clone(),
        background: background.clone(),
        wn: *wn,
        t_h,
        k_h,
        matrix,
        factor,
        warnings,
    })
}

impl CrackSystem {
    pub fn dofs(&self) -> usize {
        3 * self.crack.len()
    }

    pub fn rcond(&self) -> f64 {
        self.factor.rcond
    }

    /// Solve `(T_h − K_h)[u] = −t` for a traction field `t(y, ν)` given on the crack.
    pub fn solve_traction(&self, t: impl Fn(&Point, &Point) -> CVec3) -> Result<OpeningDisplacement> {
        let nodes = crack_quadrature_nodes(&self.crack, 0);
        let tv: Vec<CVec3> = nodes.iter().map(|q| t(&q.pos, &q.normal)).collect();
        self.solve_projected(-project(&self.crack, &nodes, &tv))
    }

    fn solve_projected(&self, rhs: CVec) -> Result<OpeningDisplacement> {
        let x = self.factor.solve_vec(&rhs)?;
        let res = frob_vec(&(&self.matrix * &x - &rhs));
        let scale = frob_vec(&rhs);
        if scale > 0.0 && res > 1e-10 * scale {
            return Err(Error::IllConditioned { rcond: self.factor.rcond, hint: format!("solve residual {:e}", res / scale) });
        }
        Ok(OpeningDisplacement::new(&self.crack, x))
    }

    /// Background tractions at crack nodes, tabulated for non-homogeneous
    /// backgrounds (`None` means evaluate the plane wave directly).
    fn traction_source(&self, nodes: &[CrackNode], dirs: &[Point]) -> Result<Option<Vec<Vec<CMat3>>>> {
        if self.background.is_homogeneous() {
            return Ok(None);
        }
        let pts: Vec<(Point, Point)> = nodes.iter().map(|q| (q.pos, q.normal)).collect();
        traction_table(&self.background, &pts, dirs, &self.wn).map(Some)
    }

    fn traction_at(&self, table: &Option<Vec<Vec<CMat3>>>, qi: usize, q: &CrackNode, j: usize, d: &Point) -> CMat3 {
        match table {
            Some(t) => t[qi][j],
            None => plane_wave_traction(&q.pos, d, &q.normal, &self.wn),
        }
    }

    /// Right-hand sides (DOFs × 3N) for unit Cartesian polarizations of every grid
    /// direction, each column optionally scaled by the grid weight.
    pub fn incident_rhs(&self, grid: &DirectionGrid, level: usize, weighted: bool) -> Result<CMat> {
        let nodes = crack_quadrature_nodes(&self.crack, level);
        let table = self.traction_source(&nodes, &grid.directions)?;
        let cols: Vec<CVec> = (0..grid.len())
            .into_par_iter()
            .map(|j| {
                let d = grid.directions[j];
                let tr: Vec<CMat3> = nodes.iter().enumerate().map(|(qi, q)| self.traction_at(&table, qi, q, j, &d)).collect();
                let w = if weighted { grid.weights[j] } else { 1.0 };
                let mut out = Vec::with_capacity(3);
                for comp in 0..3 {
                    let t: Vec<CVec3> = tr.iter().map(|m| m.column(comp) * c(w)).collect();
                    out.push(-project(&self.crack, &nodes, &t));
                }
                out
            })
            .flatten()
            .collect();
        Ok(CMat::from_columns(&cols))
    }

    /// Far-field projection (3N × DOFs): `φ^∞(ξ̂) = ∫ T_y W_b(y, −ξ̂)ᵀ [u](y) dS`.
    pub fn far_projection(&self, grid: &DirectionGrid, level: usize) -> Result<CMat> {
        let nodes = crack_quadrature_nodes(&self.crack, level);
        let minus: Vec<Point> = grid.directions.iter().map(|d| -d).collect();
        let table = self.traction_source(&nodes, &minus)?;
        self.projection_with(grid, &nodes, |qi, q, m| Ok(self.traction_at(&table, qi, q, m, &minus[m])))
    }

    fn projection_with(
        &self,
        grid: &DirectionGrid,
        nodes: &[CrackNode],
        kernel: impl Fn(usize, &CrackNode, usize) -> Result<CMat3> + Sync,
    ) -> Result<CMat> {
        let n = self.dofs();
        let frames: Vec<CMat3> = (0..self.crack.len()).map(|j| self.crack.frame(j).map(c)).collect();
        let rows: Vec<CMat> = (0..grid.len())
            .into_par_iter()
            .map(|m| {
                let mut r = CMat::zeros(3, n);
                for (qi, q) in nodes.iter().enumerate() {
                    let tr = kernel(qi, q, m)?;
                    let el = &self.crack.elements[q.element];
                    for k in 0..3 {
                        let j = el.nodes[k];
                        // rows: far-field component; columns: local DOF direction
                        let blk = tr.transpose() * frames[j] * c(q.weight * q.basis.psi[k]);
                        let mut v = r.fixed_view_mut::<3, 3>(0, 3 * j);
                        v += blk;
                    }
                }
                Ok(r)
            })
            .collect::<Result<_>>()?;
        let mut out = CMat::zeros(3 * grid.len(), n);
        for (m, r) in rows.into_iter().enumerate() {
            out.view_mut((3 * m, 0), (3, n)).copy_from(&r);
        }
        Ok(out)
    }

    /// Crack contribution `F_D` with Cartesian 3×3 blocks.
    pub fn far_matrix(&self, grid: &DirectionGrid) -> Result<FarFieldMatrix> {
        let rhs = self.incident_rhs(grid, 0, false)?;
        let x = self.factor.solve(&rhs)?;
        let r = self.far_projection(grid, 0)?;
        let mut f = FarFieldMatrix::zeros(grid, &self.wn, Role::FD);
        f.data = r * x;
        Ok(f)
    }
}

fn frob_vec(v: &CVec) -> f64 {
    v.norm()
}

/// Opening for plane-wave incidence `(d, q)` through the background.
pub fn crack_solve(system: &CrackSystem, d: &Point, q: &CVec3) -> Result<OpeningDisplacement> {
    let nodes = crack_quadrature_nodes(&system.crack, 0);
    let table = system.traction_source(&nodes, std::slice::from_ref(d))?;
    let tv: Vec<CVec3> = nodes.iter().enumerate().map(|(qi, n)| system.traction_at(&table, qi, n, 0, d) * q).collect();
    let mut out = system.solve_projected(-project(&system.crack, &nodes, &tv))?;
    out.direction = Some(*d);
    out.polarization = Some(*q);
    Ok(out)
}

/// Far-field pattern (3N, Cartesian per direction) radiated by an opening.
pub fn crack_far_field(system: &CrackSystem, opening: &OpeningDisplacement, grid: &DirectionGrid) -> Result<CVec> {
    let r = system.far_projection(grid, 0)?;
    Ok(r * &opening.coeffs)
}

/// Background plus optional crack.
#[derive(Clone, Debug)]
pub struct Scene {
    pub background: BackgroundModel,
    pub crack: Option<CrackGeometry>,
}

/// `F = F_b + F_D` measured on `grid`.
pub fn measured_far_matrix(scene: &Scene, grid: &DirectionGrid, wn: &WaveNumbers) -> Result<FarFieldMatrix> {
    let mut f = background_far_matrix(&scene.background, grid, wn)?;
    f.role = Role::F;
    if let Some(crack) = &scene.crack {
        let sys = assemble_crack_system(crack, &scene.background, wn)?;
        f.data += sys.far_matrix(grid)?.data;
    }
    Ok(f)
}

/// Discrete Herglotz traction operator: rows are Cartesian tractions at the
/// crack quadrature nodes (`level` 0), columns `(direction, component)` of the density.
pub fn herglotz_traction_matrix(crack: &CrackGeometry, background: &BackgroundModel, grid: &DirectionGrid, wn: &WaveNumbers) -> Result<CMat> {
    let nodes = crack_quadrature_nodes(crack, 0);
    let pts: Vec<(Point, Point)> = nodes.iter().map(|q| (q.pos, q.normal)).collect();
    let table = traction_table(background, &pts, &grid.directions, wn)?;
    let mut h = CMat::zeros(3 * nodes.len(), grid.dim());
    for (qi, row) in table.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            h.fixed_view_mut::<3, 3>(3 * qi, 3 * j).copy_from(&(t * c(grid.weights[j])));
        }
    }
    Ok(h)
}

/// `‖F_D W − H* T H‖_F / ‖F_D W‖_F` for a homogeneous background.
///
/// The left side comes from the measured far-field matrix (plane-wave solves,
/// far field through `W(y, −ξ̂)`), multiplied by the grid weights `W` so both
/// sides act on densities. The right side composes the Herglotz traction map,
/// the traction-to-opening solution map and the adjoint `H*` evaluated through
/// `conj(T_y W(y, ξ̂))`, all with the refined crack quadrature.
pub fn factorization_residual(scene: &Scene, grid: &DirectionGrid, wn: &WaveNumbers) -> Result<f64> {
    let Some(crack) = &scene.crack else { return Ok(0.0) };
    if !scene.background.is_homogeneous() {
        return Err(Error::Unsupported("factorization residual requires a homogeneous background".into()));
    }
    let sys = assemble_crack_system(crack, &scene.background, wn)?;
    let mut left = sys.far_matrix(grid)?.data;
    for j in 0..grid.len() {
        let w = c(grid.weights[j]);
        left.columns_mut(3 * j, 3).iter_mut().for_each(|v| *v *= w);
    }
    let level = 1;
    let th = sys.factor.solve(&sys.incident_rhs(grid, level, true)?)?;
    let nodes = crack_quadrature_nodes(crack, level);
    let h_adj = sys.projection_with(grid, &nodes, |_, q, m| Ok(plane_wave_traction(&q.pos, &grid.directions[m], &q.normal, wn).map(|v| v.conj())))?;
    let right = h_adj * th;
    let den = frob(&left);
    Ok(if den == 0.0 { 0.0 } else { frob(&(left - right)) / den })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::penny_crack;
    use crate::linalg::C64;
    use crate::wavecore::{wave_numbers, ElasticMedium};

    fn medium() -> ElasticMedium {
        ElasticMedium::new(1.5, 1.0, 1.0).unwrap()
    }

    /// Relative L² error of the normal opening against the static closed form.
    #[test]
    fn sneddon_profile_converges() {
        use crate::pipeline::validate::sneddon_error;
        let e1 = sneddon_error(1).unwrap();
        let e2 = sneddon_error(2).unwrap();
        println!("sneddon L2 error: ref1 {e1:.4e} ref2 {e2:.4e}");
        assert!(e2 < e1);
        assert!(e2 < 0.05, "{e2}");
    }

    fn dynamic(refinement: usize) -> (CrackGeometry, BackgroundModel, WaveNumbers) {
        let m = medium();
        let wn = wave_numbers(4.0, &m).unwrap();
        let crack = penny_crack(Point::zeros(), 1.0, Point::z(), refinement).unwrap();
        (crack, BackgroundModel::Homogeneous { exterior: m }, wn)
    }

    #[test]
    fn system_is_complex_symmetric() {
        let (crack, bg, wn) = dynamic(1);
        let sys = assemble_crack_system(&crack, &bg, &wn).unwrap();
        let asym = frob(&(&sys.matrix - sys.matrix.transpose())) / frob(&sys.matrix);
        assert!(asym <= 1e-12, "{asym}");
        assert!(sys.warnings.iter().all(|w| !w.contains("asymmetry")));
    }

    #[test]
    fn opening_vanishes_on_front_and_is_linear() {
        let (crack, bg, wn) = dynamic(1);
        let sys = assemble_crack_system(&crack, &bg, &wn).unwrap();
        let d = Point::new(0.3, -0.4, 0.5).normalize();
        let q1 = CVec3::new(c(1.0), c(0.5), c(-0.2));
        let q2 = CVec3::new(c(0.0), crate::linalg::I, c(2.0));
        let u1 = crack_solve(&sys, &d, &q1).unwrap();
        let u2 = crack_solve(&sys, &d, &q2).unwrap();
        let u12 = crack_solve(&sys, &d, &(q1 + q2)).unwrap();
        let diff = (&u12.coeffs - &u1.coeffs - &u2.coeffs).norm() / u12.coeffs.norm();
        assert!(diff < 1e-12, "{diff}");
        for (j, u) in u1.nodal.iter().enumerate() {
            if crack.edge_node[j] {
                assert_eq!(u.norm(), 0.0);
            }
        }
        let zero = crack_solve(&sys, &d, &CVec3::zeros()).unwrap();
        assert_eq!(zero.coeffs.norm(), 0.0);
        let grid = DirectionGrid::new(4, 6).unwrap();
        assert_eq!(crack_far_field(&sys, &zero, &grid).unwrap().norm(), 0.0);
    }

    #[test]
    fn flipping_the_normal_leaves_f_unchanged() {
        let (crack, bg, wn) = dynamic(1);
        let normals = crack.normals.iter().map(|n| -n).collect();
        let mut flipped = CrackGeometry::build(crack.nodes.clone(), normals, crack.triangles.clone(), crack.edge_weight.clone()).unwrap();
        flipped.stiffness = crack.stiffness.clone();
        let grid = DirectionGrid::new(4, 6).unwrap();
        let f = assemble_crack_system(&crack, &bg, &wn).unwrap().far_matrix(&grid).unwrap();
        let g = assemble_crack_system(&flipped, &bg, &wn).unwrap().far_matrix(&grid).unwrap();
        assert!(frob(&(&f.data - &g.data)) <= 1e-10 * f.norm(), "{}", frob(&(&f.data - &g.data)) / f.norm());
    }

    #[test]
    fn welded_limit_and_reciprocity() {
        let (crack, bg, wn) = dynamic(1);
        let grid = DirectionGrid::new(4, 6).unwrap();
        let f1 = assemble_crack_system(&crack, &bg, &wn).unwrap().far_matrix(&grid).unwrap();
        assert!(f1.reciprocity_residual().unwrap() < 1e-2);
        let mut prev = f1.norm();
        for kappa in [10.0, 100.0, 1000.0] {
            let mut ck = crack.clone();
            ck.set_uniform_stiffness(c(kappa));
            let fk = assemble_crack_system(&ck, &bg, &wn).unwrap().far_matrix(&grid).unwrap();
            assert!(fk.norm() < prev);
            prev = fk.norm();
        }
        assert!(prev <= 1e-2 * f1.norm(), "{}", prev / f1.norm());
    }

    /// Quadratic form of the traction-to-opening map `t ↦ [u]`.
    #[test]
    fn solution_map_has_positive_imaginary_part() {
        use rand::{Rng, SeedableRng};
        let (crack, bg, wn) = dynamic(1);
        let sys = assemble_crack_system(&crack, &bg, &wn).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let nodes = crack_quadrature_nodes(&crack, 0);
        for _ in 0..20 {
            let t: Vec<CVec3> = nodes
                .iter()
                .map(|_| CVec3::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
                .collect();
            let b = project(&crack, &nodes, &t);
            let u = sys.factor.solve_vec(&(-&b)).unwrap();
            // <T t, t> = ∫ [u]·conj(t) = bᴴu
            let form = b.dotc(&u);
            assert!(form.im > 0.0, "{form}");
        }
    }

    #[test]
    fn static_operator_is_definite() {
        let m = medium();
        let wn = wave_numbers(1e-3 * m.c_s(), &m).unwrap();
        let crack = penny_crack(Point::zeros(), 1.0, Point::z(), 0).unwrap();
        let kern = CrackKernel::from_wave(&wn.kernel());
        let t = assemble_traction_operator(&crack, &kern);
        let herm = (&t + t.adjoint()) * c(-0.5);
        let (vals, _) = crate::linalg::hermitian_eigen(&herm).unwrap();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "min eigenvalue of -T_static: {min}");
    }

    #[test]
    fn factorization_identity_small() {
        let (crack, bg, wn) = dynamic(1);
        let grid = DirectionGrid::new(4, 6).unwrap();
        let scene = Scene { background: bg.clone(), crack: Some(crack) };
        let r = factorization_residual(&scene, &grid, &wn).unwrap();
        assert!(r < 5e-2, "{r}");
        let empty = Scene { background: bg, crack: None };
        assert_eq!(factorization_residual(&empty, &grid, &wn).unwrap(), 0.0);
        assert_eq!(measured_far_matrix(&empty, &grid, &wn).unwrap().norm(), 0.0);
    }

    /// On a flat crack, mirror-image SH pairs give Herglotz fields with zero
    /// traction, so the rank check uses a curved patch.
    #[test]
    fn herglotz_matrix_columns_and_rank() {
        let (_, bg, wn) = dynamic(0);
        let host = crate::geometry::SurfaceKind::Sphere { center: [0.0; 3], radius: 1.0 };
        let region = crate::geometry::PatchRegion::Cap { axis: [0.0, 0.0, 1.0], half_angle_deg: 50.0 };
        let crack = crate::geometry::surface_patch(&host, &region, 3).unwrap();
        let grid = DirectionGrid::new(4, 6).unwrap();
        let h = herglotz_traction_matrix(&crack, &bg, &grid, &wn).unwrap();
        let nodes = crack_quadrature_nodes(&crack, 0);
        let j = 5;
        for (qi, q) in nodes.iter().enumerate().step_by(7) {
            let t = crate::background::background_traction(&bg, &q.pos, &q.normal, &grid.directions[j], &wn).unwrap() * c(grid.weights[j]);
            let blk = h.fixed_view::<3, 3>(3 * qi, 3 * j).into_owned();
            assert!((blk - t).norm() < 1e-14);
        }
        let sv = h.singular_values();
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 1e-8 * sv.max(), "{min}");
    }

    #[test]
    fn rayleigh_regime_grows_with_radius() {
        let m = medium();
        let wn = wave_numbers(0.5, &m).unwrap();
        let bg = BackgroundModel::Homogeneous { exterior: m };
        let grid = DirectionGrid::new(4, 6).unwrap();
        let norms: Vec<f64> = [0.5, 1.0]
            .iter()
            .map(|&a| {
                let crack = penny_crack(Point::zeros(), a, Point::z(), 1).unwrap();
                assemble_crack_system(&crack, &bg, &wn).unwrap().far_matrix(&grid).unwrap().norm()
            })
            .collect();
        assert!(norms[1] > norms[0], "{norms:?}");
    }

    /// Energy conservation: `I + (i/2π) M^½ F M^½` is unitary for a lossless crack.
    #[test]
    fn lossless_crack_scattering_is_unitary() {
        let (crack, bg, wn) = dynamic(1);
        let grid = DirectionGrid::new(8, 12).unwrap();
        let f = assemble_crack_system(&crack, &bg, &wn).unwrap().far_matrix(&grid).unwrap();
        let s = crate::inversion::scattering_matrix(&f, &wn).unwrap();
        let n = s.dim();
        let defect = frob(&(&s.data * s.data.adjoint() - CMat::identity(n, n))) / (n as f64).sqrt();
        assert!(defect < 5e-2, "{defect}");
    }
}
