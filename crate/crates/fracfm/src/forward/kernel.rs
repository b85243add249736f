//! Weakly singular kernels of the regularized crack traction operator.
//!
//! For a flat crack the traction of the double-layer potential, paired with a
//! test density, reduces after integration by parts to
//!
//! normal:  `ρω² ∫∫ψφ g_p + 4μ ∫∫ ∇ψ·∇φ H1`
//! shear:   `ρω² ∫∫ψ·φ g_s − μ ∫∫ ∂_γψ_α ∂_γφ_α g_s − ∫∫ div ψ div φ Q`
//!
//! with `h = g_s − g_p`, `Δ₂h = h'' + h'/r`, `H1 = h + Δ₂h/k_s²` and
//! `Q = 3μ g_s − 4μ²/(λ+2μ) g_p + (4μ/k_s²) Δ₂h`. All are O(1/r).

use std::f64::consts::PI;

use crate::linalg::{c, C64, I};
use crate::wavecore::kernel::{difference_terms, helmholtz_derivs};

const SERIES_SWITCH: f64 = 0.5;

#[derive(Clone, Copy, Debug)]
pub struct CrackKernel {
    pub k_p: f64,
    pub k_s: f64,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub omega: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct KernelValues {
    pub gp: C64,
    pub gs: C64,
    pub h1: C64,
    pub q: C64,
}

impl CrackKernel {
    pub fn from_wave(k: &crate::wavecore::Kupradze) -> Self {
        Self { k_p: k.k_p, k_s: k.k_s, lambda: k.lambda, mu: k.mu, rho: k.rho, omega: k.omega }
    }

    pub fn rho_omega2(&self) -> f64 {
        self.rho * self.omega * self.omega
    }

    pub fn eval(&self, r: f64) -> KernelValues {
        let eps = (I * self.k_s * r).exp() / (4.0 * PI * r);
        let epp = (I * self.k_p * r).exp() / (4.0 * PI * r);
        let (h, lap_h) = if self.k_s * r < SERIES_SWITCH {
            let t = difference_terms(self.k_s, self.k_p, r);
            let (mut s0, mut s2) = (c(0.0), c(0.0));
            for (n, tn) in t.iter().enumerate().skip(1) {
                s0 += tn;
                let m = (n - 1) as f64;
                s2 += tn * (m * m);
            }
            let q = 1.0 / (4.0 * PI);
            (s0 * q / r, s2 * q / (r * r * r))
        } else {
            let fs = helmholtz_derivs(self.k_s, r);
            let fp = helmholtz_derivs(self.k_p, r);
            (fs[0] - fp[0], (fs[2] - fp[2]) + (fs[1] - fp[1]) / r)
        };
        let ks2 = self.k_s * self.k_s;
        let mu = self.mu;
        KernelValues {
            gp: epp,
            gs: eps,
            h1: h + lap_h / ks2,
            q: eps * (3.0 * mu) - epp * (4.0 * mu * mu / (self.lambda + 2.0 * mu)) + lap_h * (4.0 * mu / ks2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(omega: f64) -> CrackKernel {
        let (lambda, mu, rho): (f64, f64, f64) = (1.5, 1.0, 1.0);
        CrackKernel { k_p: omega * (rho / (lambda + 2.0 * mu)).sqrt(), k_s: omega * (rho / mu).sqrt(), lambda, mu, rho, omega }
    }

    #[test]
    fn series_matches_closed_form() {
        let k = kernel(4.0);
        let r = SERIES_SWITCH / k.k_s;
        let a = k.eval(r * (1.0 - 1e-12));
        let fs = helmholtz_derivs(k.k_s, r);
        let fp = helmholtz_derivs(k.k_p, r);
        let lap = (fs[2] - fp[2]) + (fs[1] - fp[1]) / r;
        let h1 = fs[0] - fp[0] + lap / (k.k_s * k.k_s);
        assert!((a.h1 - h1).norm() < 1e-9 * h1.norm());
    }

    #[test]
    fn static_singular_coefficients() {
        // r·H1 → −(1 − μ/(λ+2μ))/(8π) and r·Q → μλ/((λ+2μ)4π) as r → 0
        let k = kernel(4.0);
        let r = 1e-7;
        let v = k.eval(r);
        let a = 1.0 / 3.5;
        assert!((v.h1.re * r + (1.0 - a) / (8.0 * PI)).abs() < 1e-6);
        assert!((v.q.re * r - 1.5 * a / (4.0 * PI)).abs() < 1e-6);
    }
}
