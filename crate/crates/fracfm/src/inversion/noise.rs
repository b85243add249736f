//! Multiplicative noise `F^δ = (I + N_ε) F` from a portable seeded generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::inversion::FarFieldMatrix;
use crate::linalg::{frob, CMat, C64};
use crate::{error::invalid, Result};

/// Name of the generator, recorded in run manifests.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64, per-matrix stream)";

/// Entries uniform on `[−1, 1]²`, row-major, real part first.
pub fn unit_noise(n: usize, seed: u64, stream: u64) -> CMat {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = rng.random_range(-1.0..=1.0);
            let im = rng.random_range(-1.0..=1.0);
            m[(i, j)] = C64::new(re, im);
        }
    }
    m
}

/// `(F^δ, δ)` with `δ = ‖N_ε F‖_F / ‖F‖_F` (0 for a zero matrix).
pub fn apply_noise(f: &FarFieldMatrix, epsilon: f64, seed: u64, stream: u64) -> Result<(FarFieldMatrix, f64)> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon", format!("must be finite and non-negative, got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok((f.clone(), 0.0));
    }
    let nf = unit_noise(f.dim(), seed, stream) * crate::linalg::c(epsilon) * &f.data;
    let norm = f.norm();
    let delta = if norm == 0.0 { 0.0 } else { frob(&nf) / norm };
    Ok((f.with_data(f.role, &f.data + nf), delta))
}

/// Amplitude `ε` at which the draw for `(seed, stream)` realizes exactly `target` δ.
///
/// δ is linear in ε for a fixed draw, so one unit draw calibrates it.
pub fn calibrate_epsilon(f: &FarFieldMatrix, target: f64, seed: u64, stream: u64) -> Result<f64> {
    if !(0.0..1.0).contains(&target) {
        return Err(invalid("noise", format!("target level must be in [0, 1), got {target}")));
    }
    let norm = f.norm();
    if target == 0.0 || norm == 0.0 {
        return Ok(0.0);
    }
    let unit = frob(&(unit_noise(f.dim(), seed, stream) * &f.data)) / norm;
    Ok(target / unit)
}

/// Mean realized δ over `seeds` draws at amplitude `epsilon`.
pub fn mean_noise_level(f: &FarFieldMatrix, epsilon: f64, seeds: std::ops::Range<u64>, stream: u64) -> Result<f64> {
    let count = seeds.end.saturating_sub(seeds.start).max(1) as f64;
    let mut sum = 0.0;
    for s in seeds {
        sum += apply_noise(f, epsilon, s, stream)?.1;
    }
    Ok(sum / count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DirectionGrid;
    use crate::inversion::Role;
    use crate::wavecore::{wave_numbers, ElasticMedium};

    fn sample() -> FarFieldMatrix {
        let grid = DirectionGrid::new(3, 4).unwrap();
        let wn = wave_numbers(2.0, &ElasticMedium::new(1.5, 1.0, 1.0).unwrap()).unwrap();
        let mut f = FarFieldMatrix::zeros(&grid, &wn, Role::F);
        f.data = crate::inversion::sharp::tests::random_matrix(f.dim(), 5);
        f
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let f = sample();
        let (g, d) = apply_noise(&f, 0.0, 1, 1).unwrap();
        assert_eq!(g.data, f.data);
        assert_eq!(d, 0.0);
        assert!(apply_noise(&f, -1.0, 1, 1).is_err());
    }

    #[test]
    fn deterministic_per_seed_and_stream() {
        let f = sample();
        let a = apply_noise(&f, 0.1, 42, 1).unwrap();
        let b = apply_noise(&f, 0.1, 42, 1).unwrap();
        assert_eq!(a.0.data, b.0.data);
        assert_eq!(a.1.to_bits(), b.1.to_bits());
        let other = apply_noise(&f, 0.1, 42, 2).unwrap();
        assert_ne!(a.0.data, other.0.data);
        let u = unit_noise(4, 3, 1);
        assert!(u.iter().all(|z| z.re.abs() <= 1.0 && z.im.abs() <= 1.0));
    }

    #[test]
    fn calibration_hits_target() {
        let f = sample();
        for seed in 0..5 {
            let eps = calibrate_epsilon(&f, 0.05, seed, 1).unwrap();
            let (_, d) = apply_noise(&f, eps, seed, 1).unwrap();
            assert!((d - 0.05).abs() < 1e-12, "{d}");
        }
        // mean δ over 100 seeds is linear in ε
        let m1 = mean_noise_level(&f, 0.01, 0..100, 1).unwrap();
        let m2 = mean_noise_level(&f, 0.02, 0..100, 1).unwrap();
        assert!((m2 - 2.0 * m1).abs() < 1e-12 * m2);
    }
}
