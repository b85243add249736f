//! Penetrable-inclusion background: reciprocity identities, energy balance
//! and far-field extrapolation on a sphere with k_s·radius = 2.

use fracfm::background::*;
use fracfm::geometry::{DirectionGrid, SurfaceKind};
use fracfm::inversion::scattering_matrix;
use fracfm::linalg::{c, frob, CMat, CMat3, Point};
use fracfm::wavecore::{wave_numbers, ElasticMedium, WaveNumbers};

const OMEGA: f64 = 4.0;

fn model(resolution: usize) -> BackgroundModel {
    let spec = InclusionSpec {
        surface: SurfaceKind::Sphere { center: [0.0; 3], radius: 0.5 },
        interior: ElasticMedium::new(1.0, 0.6, 1.0).unwrap(),
        exterior: ElasticMedium::new(1.5, 1.0, 1.0).unwrap(),
        resolution,
    };
    BackgroundModel::inclusion(spec, OMEGA).unwrap()
}

fn wn() -> WaveNumbers {
    wave_numbers(OMEGA, &ElasticMedium::new(1.5, 1.0, 1.0).unwrap()).unwrap()
}

fn solver(m: &BackgroundModel) -> &TransmissionSolver {
    match m {
        BackgroundModel::PenetrableInclusion(s) => s,
        _ => unreachable!(),
    }
}

#[test]
fn mixed_reciprocity_converges_on_both_sides() {
    let xi = Point::new(0.3, -0.5, 0.8).normalize();
    let points = [Point::new(1.0, 0.3, -0.2), Point::new(0.2, -0.1, 0.15)];
    let coarse = model(3);
    let fine = model(4);
    for x in &points {
        let r0 = mixed_reciprocity_residual(&coarse, x, &xi, &wn()).unwrap();
        let r1 = mixed_reciprocity_residual(&fine, x, &xi, &wn()).unwrap();
        assert!(r1 < r0, "{r1} !< {r0}");
        assert!(r1 <= 2e-2, "{r1}");
    }
}

#[test]
fn far_field_energy_and_reciprocity() {
    let m = model(4);
    let grid = DirectionGrid::new(8, 8).unwrap();
    let f = background_far_matrix(&m, &grid, &wn()).unwrap();
    assert_eq!(f.media.len(), 2);
    assert!(f.reciprocity_residual().unwrap() < 2e-2);
    let s = scattering_matrix(&f, &wn()).unwrap();
    let n = s.dim();
    let defect = frob(&(&s.data * s.data.adjoint() - CMat::identity(n, n))) / (n as f64).sqrt();
    assert!(defect < 5e-2, "{defect}");
    // every eigenvalue modulus lies between the extreme singular values
    let sv = s.data.clone().singular_values();
    assert!(sv.iter().all(|v| (v - 1.0).abs() < 5e-2));
    for x in [Point::new(0.9, -0.4, 0.3), Point::new(-0.1, 0.2, 0.1)] {
        let r = scattering_identity_residual(&m, &f, &x, &wn()).unwrap();
        assert!(r < 5e-2, "{r}");
    }
}

#[test]
fn scattered_energy_is_cauchy_convergent() {
    let d = Point::z();
    let xis: Vec<Point> = (0..6).map(|k| Point::new((k as f64).cos(), (k as f64).sin(), 0.4).normalize()).collect();
    let norms: Vec<f64> = (2..=4)
        .map(|res| {
            let m = model(res);
            let s = solver(&m);
            (s.far_projection(&xis).unwrap() * &*s.plane_solutions(&[d]).unwrap()[0]).norm()
        })
        .collect();
    assert!((norms[2] - norms[1]).abs() < (norms[1] - norms[0]).abs(), "{norms:?}");
}

#[test]
fn far_field_matches_extrapolated_near_field() {
    let m = model(4);
    let s = solver(&m);
    let wn = wn();
    let d = Point::z();
    let xi = Point::new(0.3, -0.5, 0.8).normalize();
    let r = 50.0 * 1.0;
    let x = xi * r;
    // P/S split of the scattered field: u^p = (Δ + k_s²)u / (k_s² − k_p²)
    let h = 0.02;
    let u = s.scattered(&x, &d).unwrap();
    let mut lap = u * c(-6.0);
    for k in 0..3 {
        let mut e = Point::zeros();
        e[k] = h;
        lap += s.scattered(&(x + e), &d).unwrap() + s.scattered(&(x - e), &d).unwrap();
    }
    let lap = lap / c(h * h);
    let up = (lap + u * c(wn.k_s * wn.k_s)) / c(wn.k_s * wn.k_s - wn.k_p * wn.k_p);
    let us = u - up;
    let phase = |k: f64, a: f64| fracfm::linalg::C64::new(0.0, k * r).exp() * (a / r);
    let extrapolated = up / phase(wn.k_p, wn.alpha_p) + us / phase(wn.k_s, wn.alpha_s);
    let ff = s.far_projection(&[xi]).unwrap() * &*s.plane_solutions(&[d]).unwrap()[0];
    let ff = CMat3::from_fn(|i, j| ff[(i, j)]);
    let err = (extrapolated - ff).norm() / ff.norm();
    assert!(err < 1e-2, "{err}");
}

#[test]
fn shifted_solver_records_warning() {
    let spec = InclusionSpec {
        surface: SurfaceKind::Sphere { center: [0.0; 3], radius: 0.5 },
        interior: ElasticMedium::new(1.0, 0.6, 1.0).unwrap(),
        exterior: ElasticMedium::new(1.5, 1.0, 1.0).unwrap(),
        resolution: 2,
    };
    let s = TransmissionSolver::new_with_shift(spec, 2.0).unwrap();
    assert_eq!(s.omega(), 2.0);
    assert!(s.warnings.iter().all(|w| !w.contains("shifted")));
}
