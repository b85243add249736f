//! Analytic elastodynamic building blocks: media, wave numbers, plane waves,
//! the Kupradze tensor, Herglotz fields and tractions.

pub mod kernel;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::geometry::DirectionGrid;
use crate::linalg::{c, CMat3, CVec3, Point, I};
use crate::{Error, Result};
pub use kernel::{Kelvin, Kupradze};

/// Minimum source/field separation accepted by the point kernels.
pub const MIN_SEPARATION: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticMedium {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
}

impl ElasticMedium {
    pub fn new(lambda: f64, mu: f64, rho: f64) -> Result<Self> {
        let m = Self { lambda, mu, rho };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("mu", self.mu), ("rho", self.rho)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn c_s(&self) -> f64 {
        (self.mu / self.rho).sqrt()
    }

    pub fn c_p(&self) -> f64 {
        ((self.lambda + 2.0 * self.mu) / self.rho).sqrt()
    }

    pub fn poisson(&self) -> f64 {
        self.lambda / (2.0 * (self.lambda + self.mu))
    }
}

/// Wave numbers and far-field constants of the exterior medium at one frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveNumbers {
    pub omega: f64,
    pub k_p: f64,
    pub k_s: f64,
    pub alpha_p: f64,
    pub alpha_s: f64,
    pub medium: ElasticMedium,
}

impl WaveNumbers {
    pub fn kernel(&self) -> Kupradze {
        kernel_for(self.omega, &self.medium)
    }

    /// P and S energy weights `k_p α_p`, `k_s α_s` used by the scattering operator.
    pub fn energy_weights(&self) -> (f64, f64) {
        (self.k_p * self.alpha_p, self.k_s * self.alpha_s)
    }
}

pub fn kernel_for(omega: f64, m: &ElasticMedium) -> Kupradze {
    Kupradze {
        k_p: omega / m.c_p(),
        k_s: omega / m.c_s(),
        lambda: m.lambda,
        mu: m.mu,
        rho: m.rho,
        omega,
    }
}

/// `k = ω/c` for both wave types. With ρ = 1 this is `k_s = ω/√μ`, `k_p = ω/√(λ+2μ)`.
pub fn wave_numbers(omega: f64, exterior: &ElasticMedium) -> Result<WaveNumbers> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(invalid("omega", format!("must be positive, got {omega}")));
    }
    exterior.validate()?;
    let l2m = exterior.lambda + 2.0 * exterior.mu;
    Ok(WaveNumbers {
        omega,
        k_p: omega / exterior.c_p(),
        k_s: omega / exterior.c_s(),
        alpha_p: 1.0 / (4.0 * PI * l2m),
        alpha_s: 1.0 / (4.0 * PI * exterior.mu),
        medium: *exterior,
    })
}

pub fn check_monotonicity(a: &ElasticMedium, b: &ElasticMedium) -> bool {
    (a.lambda - b.lambda) * (a.mu - b.mu) >= 0.0
}

fn check_unit(v: &Point, field: &str) -> Result<()> {
    if (v.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid(field, format!("must be a unit vector, |v| = {}", v.norm())));
    }
    Ok(())
}

fn projector(d: &Point) -> nalgebra::Matrix3<f64> {
    d * d.transpose()
}

/// `W(ξ, d) = e^{ik_s ξ·d}(I − d⊗d) + e^{ik_p ξ·d} d⊗d`.
pub fn plane_wave_tensor(xi: &Point, d: &Point, wn: &WaveNumbers) -> Result<CMat3> {
    check_unit(d, "d")?;
    Ok(plane_wave_unchecked(xi, d, wn.k_p, wn.k_s))
}

pub(crate) fn plane_wave_unchecked(xi: &Point, d: &Point, k_p: f64, k_s: f64) -> CMat3 {
    let phase = xi.dot(d);
    let ep = (I * (k_p * phase)).exp();
    let es = (I * (k_s * phase)).exp();
    let p = projector(d);
    CMat3::from_fn(|i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        es * (id - p[(i, j)]) + ep * p[(i, j)]
    })
}

/// `[∂W/∂ξ_k]_k`.
pub fn plane_wave_gradient(xi: &Point, d: &Point, wn: &WaveNumbers) -> Result<[CMat3; 3]> {
    check_unit(d, "d")?;
    Ok(plane_wave_gradient_unchecked(xi, d, wn.k_p, wn.k_s))
}

pub(crate) fn plane_wave_gradient_unchecked(xi: &Point, d: &Point, k_p: f64, k_s: f64) -> [CMat3; 3] {
    let phase = xi.dot(d);
    let ep = I * k_p * (I * (k_p * phase)).exp();
    let es = I * k_s * (I * (k_s * phase)).exp();
    let p = projector(d);
    let base = CMat3::from_fn(|i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        es * (id - p[(i, j)]) + ep * p[(i, j)]
    });
    std::array::from_fn(|k| base * c(d[k]))
}

/// Tractions (normal `nu`) of each column of a plane-wave tensor, `(i, p)` layout.
pub fn plane_wave_traction(xi: &Point, d: &Point, nu: &Point, wn: &WaveNumbers) -> CMat3 {
    let g = plane_wave_gradient_unchecked(xi, d, wn.k_p, wn.k_s);
    kernel::traction_of_gradient(&g, nu, wn.medium.lambda, wn.medium.mu)
}

/// `ν·C:∇u = λ(∇·u)ν + 2μ ε(u)ν` with `grad_u[(i, k)] = ∂_k u_i`.
pub fn traction(grad_u: &CMat3, nu: &Point, medium: &ElasticMedium) -> Result<CVec3> {
    check_unit(nu, "nu")?;
    let div = grad_u.trace();
    let n = nu.map(c);
    let sym = grad_u + grad_u.transpose();
    Ok(n * (div * medium.lambda) + sym * n * c(medium.mu))
}

fn check_separation(xi: &Point, x: &Point) -> Result<Point> {
    let r = xi - x;
    if r.norm() < MIN_SEPARATION {
        return Err(Error::Singular(r.norm()));
    }
    Ok(r)
}

/// Kupradze fundamental tensor `G_0(ξ, x)` of the exterior medium carried by `wn`.
pub fn kupradze(xi: &Point, x: &Point, wn: &WaveNumbers) -> Result<CMat3> {
    let r = check_separation(xi, x)?;
    Ok(wn.kernel().matrix(&r))
}

/// `[∂_ξk G_0(ξ, x)]_k`.
pub fn kupradze_gradient(xi: &Point, x: &Point, wn: &WaveNumbers) -> Result<[CMat3; 3]> {
    let r = check_separation(xi, x)?;
    Ok(wn.kernel().gradient(&r))
}

/// P/S far-field pattern of the Kupradze tensor, α-normalization factored out.
pub fn kupradze_far_field(xihat: &Point, x: &Point, wn: &WaveNumbers) -> Result<CMat3> {
    check_unit(xihat, "xihat")?;
    let phase = xihat.dot(x);
    let ep = (-I * (wn.k_p * phase)).exp();
    let es = (-I * (wn.k_s * phase)).exp();
    let p = projector(xihat);
    Ok(CMat3::from_fn(|i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        ep * p[(i, j)] + es * (id - p[(i, j)])
    }))
}

/// Per-direction complex 3-vectors on a direction grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HerglotzDensity {
    pub values: Vec<CVec3>,
}

impl HerglotzDensity {
    pub fn zeros(grid: &DirectionGrid) -> Self {
        Self { values: vec![CVec3::zeros(); grid.len()] }
    }

    /// `(g_p, g_s)` with `g_p = (d⊗d)g` and `g_s = (I − d⊗d)g`.
    pub fn split(&self, grid: &DirectionGrid) -> (Vec<CVec3>, Vec<CVec3>) {
        self.values
            .iter()
            .zip(&grid.directions)
            .map(|(g, d)| {
                let dc = d.map(c);
                let gp = dc * dc.dot(g);
                (gp, g - gp)
            })
            .unzip()
    }
}

/// Quadrature of `∫ g_p e^{ik_p d·ξ} + g_s e^{ik_s d·ξ} dS_d` on the grid.
pub fn herglotz_field(g: &HerglotzDensity, grid: &DirectionGrid, xi: &Point, wn: &WaveNumbers) -> CVec3 {
    let mut u = CVec3::zeros();
    for ((gv, d), w) in g.values.iter().zip(&grid.directions).zip(&grid.weights) {
        u += plane_wave_unchecked(xi, d, wn.k_p, wn.k_s) * gv * c(*w);
    }
    u
}

pub mod fd {
    //! Fourth-order finite-difference Navier operator, used as an independent oracle.
    use super::*;

    /// `Δ*u + ρω²u` for a vector field sampled through `f`, 4th-order stencils.
    pub fn navier_residual(f: &dyn Fn(&Point) -> CVec3, x: &Point, m: &ElasticMedium, omega: f64, h: f64) -> (CVec3, f64) {
        let e = |k: usize| {
            let mut v = Point::zeros();
            v[k] = 1.0;
            v
        };
        let second = |a: usize, b: usize| -> CVec3 {
            if a == b {
                let ea = e(a);
                (f(&(x + ea * 2.0 * h)) * c(-1.0) + f(&(x + ea * h)) * c(16.0) - f(x) * c(30.0)
                    + f(&(x - ea * h)) * c(16.0)
                    - f(&(x - ea * 2.0 * h)))
                    / c(12.0 * h * h)
            } else {
                let cross = |s: f64| {
                    let (ea, eb) = (e(a) * s, e(b) * s);
                    (f(&(x + ea + eb)) - f(&(x + ea - eb)) - f(&(x - ea + eb)) + f(&(x - ea - eb))) / c(4.0 * s * s)
                };
                (cross(h) * c(4.0) - cross(2.0 * h)) / c(3.0)
            }
        };
        let mut d2 = [[CVec3::zeros(); 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                d2[a][b] = second(a, b);
                d2[b][a] = d2[a][b];
            }
        }
        let u = f(x);
        let mut res = u * c(m.rho * omega * omega);
        for i in 0..3 {
            for k in 0..3 {
                res[i] += d2[k][k][i] * m.mu + d2[i][k][k] * (m.lambda + m.mu);
            }
        }
        (res, m.rho * omega * omega * u.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn paper() -> WaveNumbers {
        wave_numbers(4.0, &ElasticMedium::new(1.5, 1.0, 1.0).unwrap()).unwrap()
    }

    fn unit(theta: f64, phi: f64) -> Point {
        Point::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
    }

    #[test]
    fn wave_number_examples() {
        let wn = paper();
        assert_eq!(wn.k_s, 4.0);
        assert!((wn.k_p - 4.0 / 3.5f64.sqrt()).abs() < 1e-15);
        assert!(wn.k_p < wn.k_s);
        let m = ElasticMedium::new(0.4, 0.2, 0.75).unwrap();
        assert!((m.c_s() - 0.52).abs() < 0.005);
        assert!((m.c_p() - 1.03).abs() < 0.005);
        assert!(wave_numbers(0.0, &m).is_err());
        let err = ElasticMedium::new(1.0, -1.0, 1.0).unwrap_err().to_string();
        assert!(err.contains("mu"));
    }

    #[test]
    fn monotonicity_examples() {
        let m = |l, u| ElasticMedium::new(l, u, 1.0).unwrap();
        assert!(check_monotonicity(&m(0.4, 0.2), &m(1.5, 1.0)));
        assert!(check_monotonicity(&m(1.0, 1.0), &m(1.0, 1.0)));
        assert!(!check_monotonicity(&m(2.0, 0.5), &m(1.0, 1.0)));
    }

    #[test]
    fn plane_wave_examples() {
        let wn = paper();
        let e3 = Point::z();
        assert_eq!(plane_wave_tensor(&Point::zeros(), &e3, &wn).unwrap(), CMat3::identity());
        let z = 0.37;
        let w = plane_wave_tensor(&Point::new(0.0, 0.0, z), &e3, &wn).unwrap();
        let es = (I * wn.k_s * z).exp();
        let ep = (I * wn.k_p * z).exp();
        let expect = CMat3::from_diagonal(&CVec3::new(es, es, ep));
        assert!((w - expect).norm() < 1e-15);
        assert!(plane_wave_tensor(&Point::zeros(), &Point::new(1.0, 1.0, 0.0), &wn).is_err());

        let g = plane_wave_gradient(&Point::new(0.0, 0.0, z), &e3, &wn).unwrap();
        assert!(g[0].norm() == 0.0 && g[1].norm() == 0.0);
        let expect = CMat3::from_diagonal(&CVec3::new(I * wn.k_s, I * wn.k_s, I * wn.k_p)) * w;
        assert!((g[2] - expect).norm() < 1e-14);
    }

    #[test]
    fn plane_wave_columns_solve_navier() {
        let wn = paper();
        let d = unit(0.7, 2.1);
        for q in 0..3 {
            let f = |x: &Point| plane_wave_unchecked(x, &d, wn.k_p, wn.k_s).column(q).into_owned();
            let (res, scale) = fd::navier_residual(&f, &Point::new(0.2, -0.4, 0.9), &wn.medium, wn.omega, 1e-2);
            assert!(res.norm() < 1e-6 * scale, "{}", res.norm() / scale);
        }
    }

    #[test]
    fn traction_examples() {
        let m = ElasticMedium::new(1.5, 1.0, 1.0).unwrap();
        let nu = unit(0.3, 1.0);
        assert_eq!(traction(&CMat3::zeros(), &nu, &m).unwrap(), CVec3::zeros());
        let t = traction(&CMat3::identity(), &nu, &m).unwrap();
        assert!((t - nu.map(c) * c(3.0 * m.lambda + 2.0 * m.mu)).norm() < 1e-14);
        let rot = CMat3::new(c(0.0), c(1.0), c(-2.0), c(-1.0), c(0.0), c(0.5), c(2.0), c(-0.5), c(0.0));
        assert!(traction(&rot, &nu, &m).unwrap().norm() < 1e-15);
    }

    #[test]
    fn kupradze_symmetric_and_solves_navier() {
        let wn = paper();
        let (xi, x) = (Point::new(0.3, 0.1, -0.2), Point::new(-0.5, 0.6, 0.4));
        let g = kupradze(&xi, &x, &wn).unwrap();
        let gt = kupradze(&x, &xi, &wn).unwrap().transpose();
        assert!((g - gt).norm() < 1e-15 * g.norm());
        for q in 0..3 {
            let f = |p: &Point| wn.kernel().matrix(&(p - x)).column(q).into_owned();
            let (res, scale) = fd::navier_residual(&f, &xi, &wn.medium, wn.omega, 1e-2);
            assert!(res.norm() < 1e-6 * scale);
        }
        assert!(matches!(kupradze(&x, &x, &wn), Err(Error::Singular(_))));
    }

    #[test]
    fn kupradze_far_field_limit() {
        let wn = paper();
        let x = Point::new(0.2, -0.1, 0.3);
        let xh = unit(1.1, 0.4);
        let ff = kupradze_far_field(&xh, &x, &wn).unwrap();
        let p = projector(&xh).map(c);
        let q = CMat3::identity() - p;
        let mut prev = f64::INFINITY;
        for r in [50.0, 100.0, 200.0, 400.0] {
            let g = kupradze(&(xh * r), &x, &wn).unwrap();
            let approx = p * g * p * ((-I * wn.k_p * r).exp() * r / wn.alpha_p)
                + q * g * q * ((-I * wn.k_s * r).exp() * r / wn.alpha_s);
            let err = (approx - ff).norm();
            assert!(err < prev);
            assert!(err * r < 20.0, "error not O(1/r): {err} at r = {r}");
            prev = err;
        }
    }

    #[test]
    fn herglotz_single_direction_is_plane_wave() {
        let grid = DirectionGrid::new(6, 8).unwrap();
        let wn = paper();
        let mut g = HerglotzDensity::zeros(&grid);
        assert_eq!(herglotz_field(&g, &grid, &Point::new(1.0, 2.0, 3.0), &wn), CVec3::zeros());
        let j = 13;
        let q = CVec3::new(c(0.3), I, c(-1.0));
        g.values[j] = q / c(grid.weights[j]);
        let x = Point::new(0.4, -0.3, 0.8);
        let u = herglotz_field(&g, &grid, &x, &wn);
        let w = plane_wave_tensor(&x, &grid.directions[j], &wn).unwrap() * q;
        assert!((u - w).norm() < 1e-13);
    }

    proptest! {
        #[test]
        fn recip0_identity(t in 0.0..PI, p in 0.0..(2.0 * PI), x in prop::array::uniform3(-3.0..3.0f64)) {
            let wn = paper();
            let xh = unit(t, p);
            let x = Point::from(x);
            let ff = kupradze_far_field(&xh, &x, &wn).unwrap();
            let w = plane_wave_tensor(&x, &(-xh), &wn).unwrap();
            prop_assert!((ff - w).norm() < 1e-12);
        }

        #[test]
        fn traction_sees_only_symmetric_part(a in prop::array::uniform9(-1.0..1.0f64), t in 0.0..PI, p in 0.0..(2.0 * PI)) {
            let m = ElasticMedium::new(1.5, 1.0, 1.0).unwrap();
            let g = CMat3::from_iterator(a.iter().map(|v| c(*v)));
            let nu = unit(t, p);
            let skew = (g - g.transpose()) * c(0.5);
            let t1 = traction(&g, &nu, &m).unwrap();
            let t2 = traction(&(g - skew), &nu, &m).unwrap();
            prop_assert!((t1 - t2).norm() < 1e-14);
            let t3 = traction(&(g * c(2.0)), &nu, &m).unwrap();
            prop_assert!((t3 - t1 * c(2.0)).norm() < 1e-13);
        }

        #[test]
        fn density_split_is_orthogonal(vals in prop::collection::vec(prop::array::uniform6(-1.0..1.0f64), 12)) {
            let grid = DirectionGrid::new(3, 4).unwrap();
            let g = HerglotzDensity { values: vals.iter().map(|v| CVec3::new(C64n(v[0], v[1]), C64n(v[2], v[3]), C64n(v[4], v[5]))).collect() };
            let (gp, gs) = g.split(&grid);
            for ((p, s), d) in gp.iter().zip(&gs).zip(&grid.directions) {
                let dc = d.map(c);
                prop_assert!((p - dc * dc.dot(p)).norm() < 1e-14);
                prop_assert!(dc.dot(s).norm() < 1e-14);
            }
            for ((p, s), v) in gp.iter().zip(&gs).zip(&g.values) {
                prop_assert!((p + s - v).norm() < 1e-15);
            }
        }
    }

    #[allow(non_snake_case)]
    fn C64n(re: f64, im: f64) -> crate::linalg::C64 {
        crate::linalg::C64::new(re, im)
    }
}
