//! Background media: the response tensor `W_b`, its tractions and far fields.

pub mod transmission;

use std::sync::Arc;

use rayon::prelude::*;

use crate::geometry::{DirectionGrid, GridSpec};
use crate::inversion::{energy_sqrt, FarFieldMatrix, Role};
use crate::linalg::{c, frob, CMat, CMat3, Point, I};
use crate::wavecore::{kupradze_far_field, plane_wave_tensor, plane_wave_traction, ElasticMedium, WaveNumbers};
use crate::{Error, Result};
pub use transmission::{InclusionSpec, Side, TransmissionSolver};

/// Precomputed background data; lookups are exact-node only.
#[derive(Clone, Debug)]
pub struct TabulatedBackground {
    pub exterior: ElasticMedium,
    pub omega: f64,
    pub grid: GridSpec,
    /// Role `Fb`, computed on `grid` at `omega`.
    pub far: FarFieldMatrix,
    /// `(x, d, W_b(x, d))`.
    pub responses: Vec<(Point, Point, CMat3)>,
    /// `(y, ν, d, ν·C:∇W_b(y, d))`.
    pub tractions: Vec<(Point, Point, Point, CMat3)>,
}

impl TabulatedBackground {
    /// Tabulates a solved inclusion on a grid and at the requested samples.
    pub fn from_solver(
        solver: &TransmissionSolver,
        grid: &DirectionGrid,
        response_at: &[Point],
        traction_at: &[(Point, Point)],
    ) -> Result<Self> {
        let far = inclusion_far_matrix(solver, grid)?;
        let dirs = &grid.directions;
        let mut responses = Vec::new();
        for x in response_at {
            for (d, w) in dirs.iter().zip(solver.responses(x, dirs)?) {
                responses.push((*x, *d, w));
            }
        }
        let mut tractions = Vec::new();
        for (y, nu) in traction_at {
            for (d, t) in dirs.iter().zip(solver.response_tractions(y, nu, dirs)?) {
                tractions.push((*y, *nu, *d, t));
            }
        }
        Ok(Self { exterior: solver.spec.exterior, omega: solver.omega(), grid: grid.spec(), far, responses, tractions })
    }

    fn check(&self, wn: &WaveNumbers) -> Result<()> {
        if wn.omega != self.omega || wn.medium != self.exterior {
            return Err(Error::Mismatch(format!(
                "tabulated background computed at omega = {}, queried at {}",
                self.omega, wn.omega
            )));
        }
        Ok(())
    }
}

fn off_table(what: &str, x: &Point) -> Error {
    Error::Unsupported(format!(
        "tabulated background has no {what} sample at ({}, {}, {}); interpolation is disabled",
        x.x, x.y, x.z
    ))
}

#[derive(Clone, Debug)]
pub enum BackgroundModel {
    Homogeneous { exterior: ElasticMedium },
    /// One penetrable inclusion, solved at a fixed frequency.
    PenetrableInclusion(Arc<TransmissionSolver>),
    Tabulated(Arc<TabulatedBackground>),
}

impl BackgroundModel {
    pub fn inclusion(spec: InclusionSpec, omega: f64) -> Result<Self> {
        Ok(BackgroundModel::PenetrableInclusion(Arc::new(TransmissionSolver::new_with_shift(spec, omega)?)))
    }

    pub fn exterior(&self) -> &ElasticMedium {
        match self {
            BackgroundModel::Homogeneous { exterior } => exterior,
            BackgroundModel::PenetrableInclusion(s) => &s.spec.exterior,
            BackgroundModel::Tabulated(t) => &t.exterior,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, BackgroundModel::Homogeneous { .. })
    }

    /// Frequency the model was solved at, if it is tied to one.
    pub fn omega(&self) -> Option<f64> {
        match self {
            BackgroundModel::Homogeneous { .. } => None,
            BackgroundModel::PenetrableInclusion(s) => Some(s.omega()),
            BackgroundModel::Tabulated(t) => Some(t.omega),
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        match self {
            BackgroundModel::PenetrableInclusion(s) => s.warnings.clone(),
            _ => Vec::new(),
        }
    }

    fn check_omega(&self, wn: &WaveNumbers) -> Result<()> {
        match self.omega() {
            Some(w) if w != wn.omega => Err(Error::Mismatch(format!("background solved at omega = {w}, used at {}", wn.omega))),
            _ => Ok(()),
        }
    }
}

/// `W_b(x, d)`: maps a polarization `q` to the background displacement at `x`.
pub fn background_response(model: &BackgroundModel, x: &Point, d: &Point, wn: &WaveNumbers) -> Result<CMat3> {
    model.check_omega(wn)?;
    match model {
        BackgroundModel::Homogeneous { .. } => plane_wave_tensor(x, d, wn),
        BackgroundModel::PenetrableInclusion(s) => Ok(s.responses(x, std::slice::from_ref(d))?[0]),
        BackgroundModel::Tabulated(t) => {
            t.check(wn)?;
            t.responses.iter().find(|(px, pd, _)| px == x && pd == d).map(|r| r.2).ok_or_else(|| off_table("response", x))
        }
    }
}

/// Columnwise traction `ν·C:∇W_b(y, d)`.
pub fn background_traction(model: &BackgroundModel, y: &Point, nu: &Point, d: &Point, wn: &WaveNumbers) -> Result<CMat3> {
    Ok(traction_table(model, &[(*y, *nu)], std::slice::from_ref(d), wn)?.remove(0).remove(0))
}

/// Tractions for many points and directions, indexed `[point][direction]`.
///
/// For the inclusion the representation is differentiated once per point and
/// reused for every direction.
pub fn traction_table(model: &BackgroundModel, points: &[(Point, Point)], dirs: &[Point], wn: &WaveNumbers) -> Result<Vec<Vec<CMat3>>> {
    model.check_omega(wn)?;
    match model {
        BackgroundModel::Homogeneous { .. } => {
            for d in dirs {
                plane_wave_tensor(&Point::zeros(), d, wn)?;
            }
            Ok(points.iter().map(|(y, nu)| dirs.iter().map(|d| plane_wave_traction(y, d, nu, wn)).collect()).collect())
        }
        BackgroundModel::PenetrableInclusion(s) => {
            s.plane_solutions(dirs)?;
            points.par_iter().map(|(y, nu)| s.response_tractions(y, nu, dirs)).collect()
        }
        BackgroundModel::Tabulated(t) => {
            t.check(wn)?;
            points
                .iter()
                .map(|(y, nu)| {
                    dirs.iter()
                        .map(|d| {
                            t.tractions
                                .iter()
                                .find(|(py, pn, pd, _)| py == y && pn == nu && pd == d)
                                .map(|r| r.3)
                                .ok_or_else(|| off_table("traction", y))
                        })
                        .collect()
                })
                .collect()
        }
    }
}

fn inclusion_far_matrix(s: &TransmissionSolver, grid: &DirectionGrid) -> Result<FarFieldMatrix> {
    let mut f = FarFieldMatrix::zeros(grid, &s.wn, Role::Fb);
    f.media.push(s.spec.interior);
    f.data = s.far_matrix(&grid.directions)?;
    Ok(f)
}

/// Blocks `W_b^∞(ξ̂_i, d_j)`; zero for the homogeneous background.
pub fn background_far_matrix(model: &BackgroundModel, grid: &DirectionGrid, wn: &WaveNumbers) -> Result<FarFieldMatrix> {
    model.check_omega(wn)?;
    match model {
        BackgroundModel::Homogeneous { .. } => Ok(FarFieldMatrix::zeros(grid, wn, Role::Fb)),
        BackgroundModel::PenetrableInclusion(s) => inclusion_far_matrix(s, grid),
        BackgroundModel::Tabulated(t) => {
            t.check(wn)?;
            if t.grid != grid.spec() {
                return Err(Error::Mismatch(format!(
                    "tabulated far field is on a {}×{} grid, requested {}×{}",
                    t.grid.n_theta, t.grid.n_phi, grid.n_theta, grid.n_phi
                )));
            }
            Ok(t.far.clone())
        }
    }
}

/// `G_b^∞(ξ̂, x)` against `W_b(x, −ξ̂)ᵀ`: `‖difference‖ / ‖W_b(x, −ξ̂)‖`.
///
/// The Cartesian far-field blocks are indexed (far-field component,
/// polarization), so the identity pairs one block with the transpose of the
/// other.
pub fn mixed_reciprocity_residual(model: &BackgroundModel, x: &Point, xihat: &Point, wn: &WaveNumbers) -> Result<f64> {
    model.check_omega(wn)?;
    let (g_inf, w) = match model {
        BackgroundModel::Homogeneous { .. } => (kupradze_far_field(xihat, x, wn)?, plane_wave_tensor(x, &(-xihat), wn)?),
        BackgroundModel::PenetrableInclusion(s) => {
            (s.green_far_field(std::slice::from_ref(xihat), x)?[0], s.responses(x, &[-xihat])?[0])
        }
        BackgroundModel::Tabulated(_) => {
            return Err(Error::Unsupported("mixed reciprocity needs point-source solves; tabulated data has none".into()))
        }
    };
    Ok((g_inf - w.transpose()).norm() / w.norm())
}

/// Residual of the scattering-operator identity at `x`: the Cartesian
/// columns of `W_b(x, −ξ̂)ᵀ` against `S_b` applied to `conj(W_b(x, ·))ᵀ`,
/// relative to the norm of the former, over every grid direction.
pub fn scattering_identity_residual(model: &BackgroundModel, f_b: &FarFieldMatrix, x: &Point, wn: &WaveNumbers) -> Result<f64> {
    let grid = &f_b.grid;
    let n = grid.len();
    let minus: Vec<Point> = grid.directions.iter().map(|d| -d).collect();
    let (wm, wp) = match model {
        BackgroundModel::PenetrableInclusion(s) => (s.responses(x, &minus)?, s.responses(x, &grid.directions)?),
        _ => {
            let a = minus.iter().map(|d| background_response(model, x, d, wn)).collect::<Result<Vec<_>>>()?;
            let b = grid.directions.iter().map(|d| background_response(model, x, d, wn)).collect::<Result<Vec<_>>>()?;
            (a, b)
        }
    };
    let mut lhs = CMat::zeros(3 * n, 3);
    let mut rhs = CMat::zeros(3 * n, 3);
    for i in 0..n {
        lhs.fixed_view_mut::<3, 3>(3 * i, 0).copy_from(&wm[i].transpose());
        rhs.fixed_view_mut::<3, 3>(3 * i, 0).copy_from(&wp[i].transpose().map(|v| v.conj()));
    }
    // raw-density form of the normalized operator: S = I + (i/2π) F_b M
    let msq = energy_sqrt(grid, wn);
    let mut mb = rhs.clone();
    for (j, m) in msq.iter().enumerate() {
        let m2 = (m * m).map(c);
        let blk = mb.rows(3 * j, 3).into_owned();
        mb.rows_mut(3 * j, 3).copy_from(&(m2 * blk));
    }
    let applied = &rhs + &f_b.data * mb * (I / (2.0 * std::f64::consts::PI));
    Ok(frob(&(lhs.clone() - applied)) / frob(&lhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SurfaceKind;
    use crate::inversion::scattering_matrix;
    use crate::wavecore::wave_numbers;

    fn exterior() -> ElasticMedium {
        ElasticMedium::new(1.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn homogeneous_identities() {
        let m = BackgroundModel::Homogeneous { exterior: exterior() };
        let wn = wave_numbers(4.0, &exterior()).unwrap();
        let x = Point::new(0.3, -0.2, 0.7);
        let xi = Point::new(1.0, 2.0, -0.5).normalize();
        assert!(mixed_reciprocity_residual(&m, &x, &xi, &wn).unwrap() <= 1e-12);
        let d = Point::z();
        assert_eq!(background_response(&m, &x, &d, &wn).unwrap(), plane_wave_tensor(&x, &d, &wn).unwrap());
        let grid = DirectionGrid::new(4, 6).unwrap();
        let f = background_far_matrix(&m, &grid, &wn).unwrap();
        assert!(f.data.iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn homogeneous_traction_magnitude() {
        let m = BackgroundModel::Homogeneous { exterior: exterior() };
        let wn = wave_numbers(3.0, &exterior()).unwrap();
        let t = background_traction(&m, &Point::zeros(), &Point::z(), &Point::z(), &wn).unwrap();
        let expected = wn.k_p * (exterior().lambda + 2.0 * exterior().mu);
        assert!((t.column(2).norm() - expected).abs() < 1e-12);
    }

    #[test]
    fn tabulated_lookup_is_exact_only() {
        let spec = InclusionSpec {
            surface: SurfaceKind::Sphere { center: [0.0; 3], radius: 0.5 },
            interior: ElasticMedium::new(1.0, 0.6, 1.0).unwrap(),
            exterior: exterior(),
            resolution: 2,
        };
        let solver = TransmissionSolver::new(spec, 2.0).unwrap();
        let grid = DirectionGrid::new(3, 4).unwrap();
        let x = Point::new(1.5, 0.0, 0.0);
        let tab = TabulatedBackground::from_solver(&solver, &grid, &[x], &[]).unwrap();
        let model = BackgroundModel::Tabulated(Arc::new(tab));
        let wn = wave_numbers(2.0, &exterior()).unwrap();
        let d = grid.directions[2];
        assert_eq!(background_response(&model, &x, &d, &wn).unwrap(), solver.responses(&x, &[d]).unwrap()[0]);
        assert!(matches!(background_response(&model, &(x * 1.01), &d, &wn), Err(Error::Unsupported(_))));
        let other = DirectionGrid::new(4, 4).unwrap();
        assert!(matches!(background_far_matrix(&model, &other, &wn), Err(Error::Mismatch(_))));
        let wrong = wave_numbers(2.5, &exterior()).unwrap();
        assert!(matches!(background_response(&model, &x, &d, &wrong), Err(Error::Mismatch(_))));
        let s = scattering_matrix(&background_far_matrix(&model, &grid, &wn).unwrap(), &wn).unwrap();
        assert_eq!(s.dim(), grid.dim());
    }

    #[test]
    fn homogeneous_traction_matches_differences() {
        let m = BackgroundModel::Homogeneous { exterior: exterior() };
        let wn = wave_numbers(2.5, &exterior()).unwrap();
        let (y, nu, d) = (Point::new(0.2, -0.3, 0.4), Point::new(0.0, 0.6, 0.8), Point::new(0.6, 0.0, -0.8));
        let t = background_traction(&m, &y, &nu, &d, &wn).unwrap();
        let h = 1e-3;
        let grad: [CMat3; 3] = std::array::from_fn(|k| {
            let mut e = Point::zeros();
            e[k] = h;
            let f = |s: f64| background_response(&m, &(y + e * s), &d, &wn).unwrap();
            (f(-2.0) - f(2.0) + (f(1.0) - f(-1.0)) * c(8.0)) / c(12.0 * h)
        });
        let fd = crate::wavecore::kernel::traction_of_gradient(&grad, &nu, 1.5, 1.0);
        assert!((t - fd).norm() < 1e-6 * t.norm());
        // superposition over polarizations
        let q = crate::linalg::CVec3::new(c(0.3), crate::linalg::C64::new(0.0, 1.0), c(-2.0));
        let sum = t.column(0) * q[0] + t.column(1) * q[1] + t.column(2) * q[2];
        assert!((t * q - sum).norm() < 1e-13 * sum.norm());
    }
}
