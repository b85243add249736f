use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::linalg::Point;
use crate::Result;

/// Uniform θ/φ grid on the unit sphere with θ offset by half a step (no poles).
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub directions: Vec<Point>,
    /// `(d̂, θ̂, φ̂)` per direction.
    pub triads: Vec<[Point; 3]>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl DirectionGrid {
    /// Directions are ordered θ-major: index `j·N_φ + k`.
    ///
    /// Weights are exact areas of the θ/φ cells, `Δφ (cos θ_{j−½} − cos θ_{j+½})`,
    /// which differ from `sin θ_j Δθ Δφ` by a factor `1 + O(Δθ²)` and sum to 4π.
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 {
            return Err(invalid("n_theta", format!("need at least 2, got {n_theta}")));
        }
        if n_phi < 2 {
            return Err(invalid("n_phi", format!("need at least 2, got {n_phi}")));
        }
        let dt = PI / n_theta as f64;
        let dp = 2.0 * PI / n_phi as f64;
        let n = n_theta * n_phi;
        let mut directions = Vec::with_capacity(n);
        let mut triads = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for j in 0..n_theta {
            let th = (j as f64 + 0.5) * dt;
            let (st, ct) = th.sin_cos();
            let band = dp * 2.0 * st * (0.5 * dt).sin();
            for k in 0..n_phi {
                let ph = k as f64 * dp;
                let (sp, cp) = ph.sin_cos();
                let d = Point::new(st * cp, st * sp, ct);
                let t = Point::new(ct * cp, ct * sp, -st);
                let f = Point::new(-sp, cp, 0.0);
                directions.push(d);
                triads.push([d, t, f]);
                weights.push(band);
            }
        }
        Ok(Self { n_theta, n_phi, directions, triads, weights })
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        Self::new(spec.n_theta, spec.n_phi)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { n_theta: self.n_theta, n_phi: self.n_phi }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Matrix dimension `3N` of far-field operators on this grid.
    pub fn dim(&self) -> usize {
        3 * self.len()
    }

    /// The plain midpoint weight `sin θ Δθ Δφ` for direction `i`.
    pub fn midpoint_weight(&self, i: usize) -> f64 {
        let dt = PI / self.n_theta as f64;
        let dp = 2.0 * PI / self.n_phi as f64;
        let th = ((i / self.n_phi) as f64 + 0.5) * dt;
        th.sin() * dt * dp
    }

    /// Index of `−d_i`, available when `N_φ` is even.
    pub fn antipode(&self, i: usize) -> Option<usize> {
        if self.n_phi % 2 != 0 {
            return None;
        }
        let (j, k) = (i / self.n_phi, i % self.n_phi);
        Some((self.n_theta - 1 - j) * self.n_phi + (k + self.n_phi / 2) % self.n_phi)
    }

    /// Incident polarization basis `(−d̂, −θ̂, −φ̂)` for direction `i`.
    pub fn polarizations(&self, i: usize) -> [Point; 3] {
        let [d, t, f] = self.triads[i];
        [-d, -t, -f]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_grid() {
        let g = DirectionGrid::new(20, 10).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g.dim(), 600);
        assert!(DirectionGrid::new(1, 10).is_err());
        assert!(DirectionGrid::new(4, 1).is_err());
    }

    #[test]
    fn unit_directions_and_orthonormal_triads() {
        let g = DirectionGrid::new(7, 9).unwrap();
        for t in &g.triads {
            for a in 0..3 {
                assert!((t[a].norm() - 1.0).abs() < 1e-12);
                for b in (a + 1)..3 {
                    assert!(t[a].dot(&t[b]).abs() < 1e-12);
                }
            }
            assert!((t[0].cross(&t[1]) - t[2]).norm() < 1e-12);
        }
    }

    #[test]
    fn weights_sum_to_sphere_area() {
        for (nt, np) in [(2, 2), (8, 12), (20, 10), (33, 7)] {
            let g = DirectionGrid::new(nt, np).unwrap();
            let s: f64 = g.weights.iter().sum();
            assert!((s - 4.0 * PI).abs() < 1e-10);
        }
    }

    #[test]
    fn midpoint_weights_converge_quadratically() {
        let mut prev = None;
        for nt in [10, 20, 40, 80] {
            let g = DirectionGrid::new(nt, 8).unwrap();
            let s: f64 = (0..g.len()).map(|i| g.midpoint_weight(i)).sum();
            let err = (s - 4.0 * PI).abs();
            if let Some(p) = prev {
                let ratio: f64 = p / err;
                assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
            }
            prev = Some(err);
            for i in 0..g.len() {
                assert!((g.weights[i] / g.midpoint_weight(i) - 1.0).abs() < 2.0 / (nt * nt) as f64);
            }
        }
    }

    #[test]
    fn antipodes_and_determinism() {
        let g = DirectionGrid::new(8, 12).unwrap();
        for i in 0..g.len() {
            let a = g.antipode(i).unwrap();
            assert!((g.directions[a] + g.directions[i]).norm() < 1e-12);
        }
        assert!(DirectionGrid::new(8, 7).unwrap().antipode(0).is_none());
        assert_eq!(g, DirectionGrid::new(8, 12).unwrap());
    }
}
