//! Validation suites: numerical self-checks against independent oracles.
//!
//! Each suite returns named checks with the measured value and its tolerance.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::background::{background_far_matrix, mixed_reciprocity_residual, scattering_identity_residual, BackgroundModel, InclusionSpec};
use crate::forward::{assemble_crack_system, crack_quadrature_nodes, factorization_residual, Scene};
use crate::geometry::{penny_crack, DirectionGrid, SurfaceKind};
use crate::inversion::regularize::{picard_norm, tikhonov_morozov, Spectral};
use crate::inversion::{scattering_matrix, EigenSystem};
use crate::linalg::{c, frob, CMat, CVec, Point, C64};
use crate::wavecore::{fd, kupradze, kupradze_far_field, plane_wave_tensor, wave_numbers, ElasticMedium, WaveNumbers};
use crate::{Error, Result};

pub const SUITES: [&str; 7] = ["kernels", "reciprocity", "unitarity", "factorization", "sneddon", "morozov", "eigen"];

/// Inclusion used by the reciprocity and unitarity suites: a sphere with `k_s·radius = 2`.
pub const INCLUSION_RESOLUTION: usize = 5;
/// Penny refinement for the factorization suite.
pub const FACTORIZATION_REFINEMENT: usize = 3;
/// Penny refinement for the Sneddon comparison.
pub const SNEDDON_REFINEMENT: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
}

impl Check {
    fn at_most(suite: &str, name: &str, value: f64, tolerance: f64, t: Instant) -> Self {
        Self { suite: suite.into(), name: name.into(), value, tolerance, passed: value <= tolerance, seconds: t.elapsed().as_secs_f64() }
    }

    /// A yes/no condition reported as value 1 (holds) or 0.
    fn holds(suite: &str, name: &str, ok: bool, t: Instant) -> Self {
        Self { suite: suite.into(), name: name.into(), value: f64::from(u8::from(ok)), tolerance: 1.0, passed: ok, seconds: t.elapsed().as_secs_f64() }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}/{}: {:.3e} (tol {:.1e}, {:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.value,
            self.tolerance,
            self.seconds
        )
    }
}

/// Run a suite by name, or every suite for `"all"`.
pub fn run_suite(name: &str) -> Result<Vec<Check>> {
    match name {
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s)?);
            }
            Ok(out)
        }
        "kernels" => kernels(),
        "reciprocity" => reciprocity(),
        "unitarity" => unitarity(),
        "factorization" => factorization(FACTORIZATION_REFINEMENT),
        "sneddon" => sneddon(),
        "morozov" => morozov(),
        "eigen" => eigen(600),
        other => Err(Error::Config(format!("unknown suite `{other}`; available: {}, all", SUITES.join(", ")))),
    }
}

fn unit(theta: f64, phi: f64) -> Point {
    Point::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

fn random_unit(rng: &mut ChaCha8Rng) -> Point {
    unit(rng.random_range(-1.0f64..1.0).acos(), rng.random_range(0.0..2.0 * PI))
}

fn random_point(rng: &mut ChaCha8Rng, r: f64) -> Point {
    Point::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

fn random_medium(rng: &mut ChaCha8Rng) -> ElasticMedium {
    ElasticMedium::new(rng.random_range(0.5..3.0), rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)).expect("positive parameters")
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMat::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// `B B*` with `B` of size `n × rank`.
pub fn random_psd(n: usize, rank: usize, seed: u64) -> CMat {
    let b = random_matrix(n, rank, seed);
    &b * b.adjoint()
}

/// Kupradze tensor against a finite-difference Navier operator, and the
/// far-field/plane-wave reciprocity, on random media and points.
pub fn kernels() -> Result<Vec<Check>> {
    let suite = "kernels";
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b65726e);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let m = random_medium(&mut rng);
        let wn = wave_numbers(rng.random_range(1.0..6.0), &m)?;
        let xi = random_point(&mut rng, 1.0);
        let x = loop {
            let p = random_point(&mut rng, 2.0);
            if (p - xi).norm() > 0.5 {
                break p;
            }
        };
        // step small against both the shear wavelength and the source distance
        let h = (0.05 / wn.k_s).min(1e-2);
        for q in 0..3 {
            let f = |p: &Point| kupradze(p, &xi, &wn).expect("separated").column(q).into_owned();
            let (res, scale) = fd::navier_residual(&f, &x, &m, wn.omega, h);
            worst = worst.max(res.norm() / scale);
        }
    }
    let mut out = vec![Check::at_most(suite, "navier_fd_residual", worst, 1e-6, t)];

    let t = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let wn = wave_numbers(rng.random_range(0.5..8.0), &random_medium(&mut rng))?;
        let xh = random_unit(&mut rng);
        let x = random_point(&mut rng, 3.0);
        let w = plane_wave_tensor(&x, &(-xh), &wn)?;
        worst = worst.max((kupradze_far_field(&xh, &x, &wn)? - w).norm() / w.norm());
    }
    out.push(Check::at_most(suite, "far_field_reciprocity", worst, 1e-12, t));
    Ok(out)
}

fn inclusion_wn() -> Result<WaveNumbers> {
    wave_numbers(4.0, &ElasticMedium::new(1.5, 1.0, 1.0)?)
}

/// Sphere of radius 0.5 in the reference exterior at ω = 4 (`k_s·radius = 2`).
pub fn validation_inclusion(resolution: usize) -> Result<BackgroundModel> {
    let spec = InclusionSpec {
        surface: SurfaceKind::Sphere { center: [0.0; 3], radius: 0.5 },
        interior: ElasticMedium::new(1.0, 0.6, 1.0)?,
        exterior: ElasticMedium::new(1.5, 1.0, 1.0)?,
        resolution,
    };
    BackgroundModel::inclusion(spec, 4.0)
}

/// Probe points: `n_out` at radius 0.8–2 and `n_in` inside radius 0.3, each with an observation direction.
pub fn probe_points(n_out: usize, n_in: usize, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 0..n_out + n_in {
        let r = if k < n_out { rng.random_range(0.8..2.0) } else { rng.random_range(0.05..0.3) };
        let x = random_unit(&mut rng) * r;
        out.push((x, random_unit(&mut rng)));
    }
    out
}

/// Mixed reciprocity of the inclusion Green's tensor at 10 exterior and 5
/// interior points, and its decrease under one refinement.
pub fn reciprocity() -> Result<Vec<Check>> {
    let suite = "reciprocity";
    let t = Instant::now();
    let wn = inclusion_wn()?;
    let probes = probe_points(10, 5, 0x6d7270);
    let residuals = |res: usize| -> Result<Vec<f64>> {
        let m = validation_inclusion(res)?;
        probes.iter().map(|(x, xh)| mixed_reciprocity_residual(&m, x, xh, &wn)).collect()
    };
    let coarse = residuals(INCLUSION_RESOLUTION)?;
    let t_coarse = t.elapsed().as_secs_f64();
    let fine = residuals(INCLUSION_RESOLUTION + 1)?;
    let worst = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let mut first = Check::at_most(suite, "mixed_reciprocity_exterior", worst(&coarse[..10]), 2e-2, t);
    first.seconds = t_coarse;
    let mut second = Check::at_most(suite, "mixed_reciprocity_interior", worst(&coarse[10..]), 2e-2, t);
    second.seconds = t_coarse;
    let decreasing = coarse.iter().zip(&fine).all(|(a, b)| b < a);
    Ok(vec![first, second, Check::holds(suite, "decreases_under_refinement", decreasing, t)])
}

/// Unitarity of the background scattering matrix and the `S_b` propagation
/// identity, plus their exactness for a homogeneous background.
pub fn unitarity() -> Result<Vec<Check>> {
    let suite = "unitarity";
    let wn = inclusion_wn()?;
    let grid = DirectionGrid::new(12, 12)?;
    let defect = |f: &crate::inversion::FarFieldMatrix| -> Result<f64> {
        let s = scattering_matrix(f, &wn)?;
        let n = s.dim();
        Ok(frob(&(&s.data * s.data.adjoint() - CMat::identity(n, n))) / (n as f64).sqrt())
    };
    let probes = probe_points(0, 5, 0x756e69);
    let mut out = Vec::new();

    let t = Instant::now();
    let m = validation_inclusion(INCLUSION_RESOLUTION)?;
    let f = background_far_matrix(&m, &grid, &wn)?;
    out.push(Check::at_most(suite, "inclusion_s_unitarity", defect(&f)?, 5e-2, t));
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (x, _) in &probes {
        worst = worst.max(scattering_identity_residual(&m, &f, x, &wn)?);
    }
    out.push(Check::at_most(suite, "inclusion_propagation_identity", worst, 2e-2, t));

    let t = Instant::now();
    let h = BackgroundModel::Homogeneous { exterior: wn.medium };
    let fh = background_far_matrix(&h, &grid, &wn)?;
    let mut worst = defect(&fh)?;
    for (x, _) in &probes {
        worst = worst.max(scattering_identity_residual(&h, &fh, x, &wn)?);
    }
    out.push(Check::at_most(suite, "homogeneous_exact", worst, 1e-12, t));
    Ok(out)
}

/// `‖F_D − H* T H‖/‖F_D‖` for a penny crack with `K = I` at `k_s = 4` on an 8×12 grid.
pub fn factorization(refinement: usize) -> Result<Vec<Check>> {
    let t = Instant::now();
    let m = ElasticMedium::new(1.5, 1.0, 1.0)?;
    let wn = wave_numbers(4.0, &m)?;
    let mut crack = penny_crack(Point::zeros(), 1.0, Point::z(), refinement)?;
    crack.set_uniform_stiffness(c(1.0));
    let scene = Scene { background: BackgroundModel::Homogeneous { exterior: m }, crack: Some(crack) };
    let r = factorization_residual(&scene, &DirectionGrid::new(8, 12)?, &wn)?;
    Ok(vec![Check::at_most("factorization", "penny_factorization_residual", r, 5e-2, t)])
}

/// Relative L² error of the quasi-static opening of a pressurized penny
/// crack against the closed-form profile `4(1−ν)p/(πμ)·√(a² − r²)`.
pub fn sneddon_error(refinement: usize) -> Result<f64> {
    let m = ElasticMedium::new(1.5, 1.0, 1.0)?;
    let wn = wave_numbers(1e-3 * m.c_s(), &m)?;
    let mut crack = penny_crack(Point::zeros(), 1.0, Point::z(), refinement)?;
    crack.set_uniform_stiffness(c(0.0));
    let bg = BackgroundModel::Homogeneous { exterior: m };
    let sys = assemble_crack_system(&crack, &bg, &wn)?;
    let p = 1.0;
    let open = sys.solve_traction(|_, nu| nu.map(|v| c(p * v)))?;
    let amp = 4.0 * (1.0 - m.poisson()) * p / (PI * m.mu);
    let (mut num, mut den) = (0.0, 0.0);
    for q in crack_quadrature_nodes(&crack, 1) {
        let u = open.eval(&crack, q.element, &q.basis);
        let r2 = q.pos.x * q.pos.x + q.pos.y * q.pos.y;
        let exact = amp * (1.0 - r2).max(0.0).sqrt();
        num += q.weight * ((u[2].re - exact).powi(2) + u[2].im.powi(2) + u[0].norm_sqr() + u[1].norm_sqr());
        den += q.weight * exact * exact;
    }
    Ok((num / den).sqrt())
}

/// Static Sneddon profile, the welded limit `κ → ∞` and reciprocity of `F`.
pub fn sneddon() -> Result<Vec<Check>> {
    let suite = "sneddon";
    let t = Instant::now();
    let mut out = vec![Check::at_most(suite, "sneddon_opening_l2", sneddon_error(SNEDDON_REFINEMENT)?, 2e-2, t)];

    let t = Instant::now();
    let m = ElasticMedium::new(1.5, 1.0, 1.0)?;
    let wn = wave_numbers(4.0, &m)?;
    let bg = BackgroundModel::Homogeneous { exterior: m };
    let grid = DirectionGrid::new(4, 6)?;
    let mut crack = penny_crack(Point::zeros(), 1.0, Point::z(), 1)?;
    crack.set_uniform_stiffness(c(1.0));
    let f1 = assemble_crack_system(&crack, &bg, &wn)?.far_matrix(&grid)?;
    let mut welded = crack.clone();
    welded.set_uniform_stiffness(c(1e3));
    let fk = assemble_crack_system(&welded, &bg, &wn)?.far_matrix(&grid)?;
    out.push(Check::at_most(suite, "welded_limit_ratio", fk.norm() / f1.norm(), 1e-2, t));
    let t = Instant::now();
    out.push(Check::at_most(suite, "far_field_reciprocity", f1.reciprocity_residual()?, 1e-2, t));
    Ok(out)
}

/// Morozov discrepancy on random PSD systems, the `A = I` closed form, and
/// Picard norms against truncated least-squares solves.
pub fn morozov() -> Result<Vec<Check>> {
    let suite = "morozov";
    let t = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let a = random_psd(20, 20, 100 + seed);
        let b: CVec = random_matrix(20, 1, 500 + seed).column(0).into_owned();
        let sol = tikhonov_morozov(&Spectral::of_matrix(&a)?, &b, 0.05)?;
        let r = (&a * &sol.g - &b).norm();
        worst = worst.max((r - 0.05 * b.norm()).abs() / b.norm());
    }
    let mut out = vec![Check::at_most(suite, "discrepancy_random_psd", worst, 1e-8, t)];

    let t = Instant::now();
    let spec = Spectral::of_matrix(&CMat::identity(8, 8))?;
    let b: CVec = random_matrix(8, 1, 1).column(0).into_owned();
    let mut worst = 0.0f64;
    for delta in [0.01, 0.05, 0.3, 0.9] {
        let want = delta / (1.0 - delta);
        let alpha = tikhonov_morozov(&spec, &b, delta)?.alpha;
        worst = worst.max((alpha - want).abs() / want.max(1.0));
    }
    out.push(Check::at_most(suite, "identity_closed_form", worst, 1e-12, t));

    let t = Instant::now();
    let a = random_psd(16, 16, 11);
    let e = EigenSystem::of(&a)?;
    let b: CVec = random_matrix(16, 1, 12).column(0).into_owned();
    let mut worst = 0.0f64;
    for n_p in [1, 4, 9, 16] {
        let want = picard_norm(&e, &b, n_p)?;
        let mut trunc = CMat::zeros(16, 16);
        for l in 0..n_p {
            let p = e.vectors.column(l);
            trunc += p * p.adjoint() * c(e.values[l].sqrt());
        }
        let g = trunc.svd(true, true).solve(&b, 1e-10 * e.values[0].sqrt()).map_err(|m| Error::Eigen(m.into()))?;
        worst = worst.max((g.norm_squared() - want).abs() / want);
    }
    out.push(Check::at_most(suite, "picard_vs_truncated_solve", worst, 1e-10, t));
    Ok(out)
}

/// Hermitian eigensolver on a random `n × n` PSD matrix: reconstruction and orthonormality.
pub fn eigen(n: usize) -> Result<Vec<Check>> {
    let suite = "eigen";
    let t = Instant::now();
    let a = random_psd(n, n, 0x656967);
    let e = EigenSystem::of(&a)?;
    let d = CMat::from_diagonal(&CVec::from_iterator(n, e.values.iter().map(|v| c(*v))));
    let recon = frob(&(&e.vectors * d * e.vectors.adjoint() - &a)) / frob(&a);
    let orth = frob(&(e.vectors.adjoint() * &e.vectors - CMat::identity(n, n))) / (n as f64).sqrt();
    let mut out = vec![Check::at_most(suite, "reconstruction", recon, 1e-10, t)];
    out.push(Check::at_most(suite, "orthonormality", orth, 1e-10, t));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suites_pass() {
        for name in ["kernels", "morozov"] {
            for check in run_suite(name).unwrap() {
                assert!(check.passed, "{}", check.line());
            }
        }
        for check in eigen(80).unwrap() {
            assert!(check.passed, "{}", check.line());
        }
        assert!(run_suite("nope").unwrap_err().to_string().contains("kernels"));
    }
}
