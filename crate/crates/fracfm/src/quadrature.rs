//! Gauss-Legendre and triangle rules, including edge-weighted collapsed rules.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// A rule on the reference triangle {(u, v): u, v ≥ 0, u + v ≤ 1}; weights sum to 1/2.
#[derive(Clone, Debug)]
pub struct TriRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// 7-point degree-5 rule (Radon).
pub fn tri7() -> TriRule {
    let a = (6.0 - 15f64.sqrt()) / 21.0;
    let b = (6.0 + 15f64.sqrt()) / 21.0;
    let wa = (155.0 - 15f64.sqrt()) / 2400.0;
    let wb = (155.0 + 15f64.sqrt()) / 2400.0;
    TriRule {
        points: vec![
            [1.0 / 3.0, 1.0 / 3.0],
            [a, a],
            [1.0 - 2.0 * a, a],
            [a, 1.0 - 2.0 * a],
            [b, b],
            [1.0 - 2.0 * b, b],
            [b, 1.0 - 2.0 * b],
        ],
        weights: vec![9.0 / 80.0, wa, wa, wa, wb, wb, wb],
    }
}

/// Collapsed (Duffy) tensor rule with the collapsed vertex at the origin of
/// barycentric coordinate `apex` (0, 1 or 2 meaning vertex 0, 1 or 2).
///
/// `sqrt_apex`: density behaves like sqrt(distance to apex), so the radial
/// variable is substituted `ρ = s²`.
/// `sqrt_far_edge`: density behaves like sqrt(distance to the opposite edge),
/// handled with `ρ = 1 − s²`.
pub fn collapsed(n: usize, apex: usize, sqrt_apex: bool, sqrt_far_edge: bool) -> TriRule {
    let (g, gw) = gauss_legendre01(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&s, &ws) in g.iter().zip(&gw) {
        let (rho, drho) = if sqrt_far_edge {
            (1.0 - s * s, 2.0 * s)
        } else if sqrt_apex {
            (s * s, 2.0 * s)
        } else {
            (s, 1.0)
        };
        for (&t, &wt) in g.iter().zip(&gw) {
            // apex at vertex `apex`; far edge parametrized by t
            let mut lam = [0.0; 3];
            lam[apex] = 1.0 - rho;
            lam[(apex + 1) % 3] = rho * (1.0 - t);
            lam[(apex + 2) % 3] = rho * t;
            points.push([lam[1], lam[2]]);
            weights.push(ws * wt * drho * rho);
        }
    }
    TriRule { points, weights }
}
