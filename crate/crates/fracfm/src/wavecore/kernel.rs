//! Radial decomposition of the elastodynamic fundamental tensor.
//!
//! `G(ξ, x) = A(r) I + B(r) r̂ ⊗ r̂` with `r = ξ − x`,
//! `A = g_s/μ + h'/(ρω² r)`, `B = (h'' − h'/r)/(ρω²)`, `h = g_s − g_p`,
//! `g_k = e^{ikr}/(4πr)`. This satisfies `Δ*G + ρω² G = −δ I`.

use std::f64::consts::PI;

use crate::linalg::{c, CMat3, Point, C64, I};

/// Below `k_s r` of this size the difference kernels are summed as power series.
const SERIES_SWITCH: f64 = 0.5;
const SERIES_TERMS: usize = 26;

#[derive(Clone, Copy, Debug)]
pub struct Radial {
    pub a: C64,
    pub b: C64,
    pub da: C64,
    pub db: C64,
}

/// `e^{ikr}/(4πr)` and its first three radial derivatives.
pub fn helmholtz_derivs(k: f64, r: f64) -> [C64; 4] {
    let e = (I * k * r).exp() / (4.0 * PI);
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    let ik = I * k;
    let k2 = k * k;
    [
        e / r,
        e * (ik / r - 1.0 / r2),
        e * (-k2 / r - 2.0 * ik / r2 + 2.0 / r3),
        e * (-ik * k2 / r + 3.0 * k2 / r2 + 6.0 * ik / r3 - 6.0 / r4),
    ]
}

/// Coefficients `a_n r^n / n!` with `a_n = (i k_s)^n − (i k_p)^n`.
pub(crate) fn difference_terms(k_s: f64, k_p: f64, r: f64) -> [C64; SERIES_TERMS] {
    let mut out = [C64::new(0.0, 0.0); SERIES_TERMS];
    let (mut ts, mut tp) = (c(1.0), c(1.0));
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            ts *= I * k_s * r / n as f64;
            tp *= I * k_p * r / n as f64;
        }
        *slot = ts - tp;
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct Kupradze {
    pub k_p: f64,
    pub k_s: f64,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub omega: f64,
}

impl Kupradze {
    pub fn rho_omega2(&self) -> f64 {
        self.rho * self.omega * self.omega
    }

    pub fn radial(&self, r: f64) -> Radial {
        let fs = helmholtz_derivs(self.k_s, r);
        let row2 = self.rho_omega2();
        let (h1_r, h2m, h2m_r, b_prime);
        if self.k_s * r < SERIES_SWITCH {
            // h'/r, (h'' − h'/r), (h'' − h'/r)/r and B'·ρω² from the series
            let t = difference_terms(self.k_s, self.k_p, r);
            let q = 1.0 / (4.0 * PI);
            let (mut s1, mut s2, mut s3) = (c(0.0), c(0.0), c(0.0));
            for (n, tn) in t.iter().enumerate().skip(2) {
                let nf = n as f64;
                s1 += tn * (nf - 1.0);
                s2 += tn * ((nf - 1.0) * (nf - 3.0));
                s3 += tn * ((nf - 1.0) * (nf - 3.0) * (nf - 3.0));
            }
            h1_r = s1 * q / (r * r * r);
            h2m = s2 * q / (r * r * r);
            h2m_r = h2m / r;
            b_prime = s3 * q / (r * r * r * r);
        } else {
            let fp = helmholtz_derivs(self.k_p, r);
            let h1 = fs[1] - fp[1];
            let h2 = fs[2] - fp[2];
            let h3 = fs[3] - fp[3];
            h1_r = h1 / r;
            h2m = h2 - h1 / r;
            h2m_r = h2m / r;
            b_prime = h3 - h2 / r + h1 / (r * r);
        }
        Radial {
            a: fs[0] / self.mu + h1_r / row2,
            b: h2m / row2,
            da: fs[1] / self.mu + h2m_r / row2,
            db: b_prime / row2,
        }
    }

    /// Fundamental tensor at separation `r = ξ − x`.
    pub fn matrix(&self, rvec: &Point) -> CMat3 {
        let r = rvec.norm();
        let rad = self.radial(r);
        assemble_matrix(&rad, &(rvec / r))
    }

    /// `[∂G/∂ξ_k]_k` at separation `r = ξ − x`.
    pub fn gradient(&self, rvec: &Point) -> [CMat3; 3] {
        let r = rvec.norm();
        let rad = self.radial(r);
        assemble_gradient(&rad, &(rvec / r), r)
    }

    /// Tractions at ξ (normal `n`) of the columns of `G(·, x)`.
    pub fn traction(&self, rvec: &Point, n: &Point) -> CMat3 {
        let g = self.gradient(rvec);
        traction_of_gradient(&g, n, self.lambda, self.mu)
    }
}

/// Static Kelvin tensor of the same medium.
#[derive(Clone, Copy, Debug)]
pub struct Kelvin {
    pub lambda: f64,
    pub mu: f64,
}

impl Kelvin {
    pub fn radial(&self, r: f64) -> Radial {
        let nu = self.lambda / (2.0 * (self.lambda + self.mu));
        let s = 1.0 / (16.0 * PI * self.mu * (1.0 - nu) * r);
        let a = c((3.0 - 4.0 * nu) * s);
        let b = c(s);
        Radial { a, b, da: -a / r, db: -b / r }
    }

    pub fn matrix(&self, rvec: &Point) -> CMat3 {
        let r = rvec.norm();
        assemble_matrix(&self.radial(r), &(rvec / r))
    }

    pub fn traction(&self, rvec: &Point, n: &Point) -> CMat3 {
        let r = rvec.norm();
        let g = assemble_gradient(&self.radial(r), &(rvec / r), r);
        traction_of_gradient(&g, n, self.lambda, self.mu)
    }
}

pub fn assemble_matrix(rad: &Radial, rh: &Point) -> CMat3 {
    CMat3::from_fn(|i, j| {
        let d = if i == j { rad.a } else { c(0.0) };
        d + rad.b * (rh[i] * rh[j])
    })
}

pub fn assemble_gradient(rad: &Radial, rh: &Point, r: f64) -> [CMat3; 3] {
    let b_r = rad.b / r;
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    std::array::from_fn(|k| {
        CMat3::from_fn(|i, j| {
            rad.da * (rh[k] * delta(i, j))
                + rad.db * (rh[k] * rh[i] * rh[j])
                + b_r * (delta(k, i) * rh[j] + delta(k, j) * rh[i] - 2.0 * rh[i] * rh[j] * rh[k])
        })
    })
}

/// Column-wise traction: `grad[k][(i, p)] = ∂_k u^{(p)}_i`, result `(i, p)`.
pub fn traction_of_gradient(grad: &[CMat3; 3], n: &Point, lambda: f64, mu: f64) -> CMat3 {
    let mut out = CMat3::zeros();
    for p in 0..3 {
        let div = grad[0][(0, p)] + grad[1][(1, p)] + grad[2][(2, p)];
        for i in 0..3 {
            let mut t = div * (lambda * n[i]);
            for k in 0..3 {
                t += (grad[k][(i, p)] + grad[i][(k, p)]) * (mu * n[k]);
            }
            out[(i, p)] = t;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(omega: f64) -> Kupradze {
        let (lambda, mu, rho): (f64, f64, f64) = (1.5, 1.0, 1.0);
        Kupradze {
            k_p: omega * (rho / (lambda + 2.0 * mu)).sqrt(),
            k_s: omega * (rho / mu).sqrt(),
            lambda,
            mu,
            rho,
            omega,
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        let k = kernel(4.0);
        let r = SERIES_SWITCH / k.k_s;
        let below = k.radial(r * (1.0 - 1e-12));
        let fs = helmholtz_derivs(k.k_s, r);
        let fp = helmholtz_derivs(k.k_p, r);
        let row2 = k.rho_omega2();
        let a = fs[0] / k.mu + (fs[1] - fp[1]) / (r * row2);
        let b = ((fs[2] - fp[2]) - (fs[1] - fp[1]) / r) / row2;
        assert!((below.a - a).norm() < 1e-9 * a.norm());
        assert!((below.b - b).norm() < 1e-9 * b.norm());
    }

    #[test]
    fn static_limit_matches_kelvin() {
        let k = kernel(1e-4);
        let s = Kelvin { lambda: 1.5, mu: 1.0 };
        for r in [0.1, 0.5, 1.0, 2.0] {
            let d = k.radial(r);
            let st = s.radial(r);
            assert!((d.a.re - st.a.re).abs() < 1e-6 * st.a.re, "A at r={r}");
            assert!((d.b.re - st.b.re).abs() < 1e-6 * st.b.re, "B at r={r}");
            assert!((d.da.re - st.da.re).abs() < 1e-6 * st.da.re.abs());
            assert!((d.db.re - st.db.re).abs() < 1e-6 * st.db.re.abs());
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let k = kernel(3.0);
        for rv in [Point::new(0.3, -0.2, 0.5), Point::new(0.05, 0.02, -0.04), Point::new(1.2, 0.7, 0.1)] {
            let g = k.gradient(&rv);
            let h = 1e-5 * rv.norm();
            for kk in 0..3 {
                let mut e = Point::zeros();
                e[kk] = h;
                let fd = (k.matrix(&(rv + e)) - k.matrix(&(rv - e))) / c(2.0 * h);
                let err = (fd - g[kk]).norm() / g.iter().map(|m| m.norm()).fold(0.0, f64::max);
                assert!(err < 1e-7, "{err}");
            }
        }
    }
}
