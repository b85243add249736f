//! Regularized solves of `A g = b` for Hermitian PSD `A` through its eigensystem.

use crate::error::invalid;
use crate::inversion::EigenSystem;
use crate::linalg::{c, CMat, CVec};
use crate::{Error, Result};

/// Spectral values below this fraction of the largest are treated as zero.
pub const NEGLIGIBLE: f64 = 1e-14;

/// Eigen-data of `A`; for `A = (F#)^{1/2}` the values are `√μ_ℓ`.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub sigma: Vec<f64>,
    pub vectors: CMat,
}

impl Spectral {
    pub fn of_matrix(a: &CMat) -> Result<Self> {
        let e = EigenSystem::of(a)?;
        Ok(Self { sigma: e.values.iter().map(|v| v.max(0.0)).collect(), vectors: e.vectors })
    }

    /// Square root of a PSD eigensystem.
    pub fn sqrt_of(e: &EigenSystem) -> Self {
        Self { sigma: e.values.iter().map(|v| v.max(0.0).sqrt()).collect(), vectors: e.vectors.clone() }
    }

    /// `Ψ* b`.
    pub fn coefficients(&self, b: &CVec) -> CVec {
        self.vectors.adjoint() * b
    }
}

#[derive(Clone, Debug)]
pub struct TikhonovSolution {
    pub g: CVec,
    pub alpha: f64,
    /// The discrepancy level was below the α → 0 residual.
    pub range_deficient: bool,
}

/// `‖A g_α − b‖²` from spectral data `s` and squared coefficients `beta2`.
fn residual2(alpha: f64, s: &[f64], beta2: &[f64]) -> f64 {
    s.iter()
        .zip(beta2)
        .map(|(&si, &b2)| {
            let f = alpha / (si * si + alpha);
            f * f * b2
        })
        .sum()
}

/// Morozov α from spectral data: solves `‖A g_α − b‖ = δ‖b‖` by bisection in log α.
///
/// Returns `(α, range_deficient)`; `α = 0` when even the unregularized residual exceeds the target.
pub fn morozov_alpha(sigma: &[f64], beta2: &[f64], delta: f64) -> Result<(f64, bool)> {
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid("delta", format!("must be in [0, 1), got {delta}")));
    }
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let cut = NEGLIGIBLE * smax;
    let s: Vec<f64> = sigma.iter().map(|&v| if v > cut { v } else { 0.0 }).collect();
    let b2: f64 = beta2.iter().sum();
    if b2 == 0.0 {
        return Ok((0.0, false));
    }
    let target = delta * delta * b2;
    let floor: f64 = s.iter().zip(beta2).filter(|(v, _)| **v == 0.0).map(|(_, b)| b).sum();
    if floor >= target || smax == 0.0 {
        return Ok((0.0, true));
    }
    // residual2 increases from `floor` (α → 0) to `b2` (α → ∞)
    let mut lo = (smax * smax * 1e-40).ln();
    let mut hi = (smax * smax * 1e40).ln();
    if residual2(lo.exp(), &s, beta2) >= target {
        return Ok((lo.exp(), false));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual2(mid.exp(), &s, beta2) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = (residual2(lo.exp(), &s, beta2), residual2(hi.exp(), &s, beta2));
    let alpha = if (rl.sqrt() - target.sqrt()).abs() <= (rh.sqrt() - target.sqrt()).abs() { lo.exp() } else { hi.exp() };
    Ok((alpha, false))
}

/// `g_α = Σ σ/(σ² + α) β_ℓ Ψ_ℓ`; σ = 0 modes are dropped.
pub fn tikhonov_apply(spec: &Spectral, beta: &CVec, alpha: f64) -> CVec {
    let smax = spec.sigma.iter().cloned().fold(0.0, f64::max);
    let coef = CVec::from_iterator(
        beta.len(),
        spec.sigma.iter().zip(beta.iter()).map(|(&s, &b)| if s > NEGLIGIBLE * smax { b * (s / (s * s + alpha)) } else { c(0.0) }),
    );
    &spec.vectors * coef
}

/// Tikhonov solution with the relative Morozov discrepancy `‖A g − b‖ = δ‖b‖`.
pub fn tikhonov_morozov(spec: &Spectral, b: &CVec, delta: f64) -> Result<TikhonovSolution> {
    let beta = spec.coefficients(b);
    let beta2: Vec<f64> = beta.iter().map(|z| z.norm_sqr()).collect();
    let (alpha, range_deficient) = morozov_alpha(&spec.sigma, &beta2, delta)?;
    Ok(TikhonovSolution { g: tikhonov_apply(spec, &beta, alpha), alpha, range_deficient })
}

/// Largest `N_P` with `μ_ℓ ≥ δ μ_1` among non-negligible eigenvalues (at least 1).
pub fn picard_truncation(eig: &EigenSystem, delta: f64) -> Result<usize> {
    let mu1 = eig.values.first().copied().unwrap_or(0.0);
    if mu1 <= 0.0 {
        return Err(Error::Eigen("empty spectrum: all eigenvalues negligible".into()));
    }
    let floor = (delta * mu1).max(NEGLIGIBLE * mu1);
    Ok(eig.values.iter().take_while(|&&v| v >= floor).count().max(1))
}

/// `‖g^P‖² = Σ_{ℓ ≤ N_P} |⟨b, Ψ_ℓ⟩|² / μ_ℓ`.
pub fn picard_norm(eig: &EigenSystem, b: &CVec, n_p: usize) -> Result<f64> {
    let beta = eig.vectors.adjoint() * b;
    picard_from_coefficients(eig, &beta, n_p)
}

pub fn picard_from_coefficients(eig: &EigenSystem, beta: &CVec, n_p: usize) -> Result<f64> {
    let n = eig.values.len();
    if n_p == 0 || n_p > n {
        return Err(invalid("N_P", format!("must be in 1..={n}, got {n_p}")));
    }
    let mu1 = eig.values[0];
    if mu1 <= 0.0 {
        return Err(Error::Eigen("empty spectrum: all eigenvalues negligible".into()));
    }
    Ok((0..n_p)
        .filter(|&l| eig.values[l] > NEGLIGIBLE * mu1)
        .map(|l| beta[l].norm_sqr() / eig.values[l])
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversion::sharp::tests::{random_matrix, random_psd};

    fn rhs(n: usize, seed: u64) -> CVec {
        random_matrix(n, seed).column(0).into_owned()
    }

    #[test]
    fn identity_closed_form() {
        let spec = Spectral::of_matrix(&CMat::identity(8, 8)).unwrap();
        let b = rhs(8, 1);
        for delta in [0.01, 0.05, 0.3, 0.9] {
            let sol = tikhonov_morozov(&spec, &b, delta).unwrap();
            let want = delta / (1.0 - delta);
            assert!((sol.alpha - want).abs() <= 1e-12 * want.max(1.0), "{} vs {want}", sol.alpha);
            let g = &b * c(1.0 / (1.0 + sol.alpha));
            assert!((&sol.g - g).norm() < 1e-12 * b.norm());
        }
        assert!(tikhonov_morozov(&spec, &b, 1.0).is_err());
    }

    #[test]
    fn unregularized_limit() {
        let a = random_psd(10, 10, 4) + CMat::identity(10, 10);
        let b = rhs(10, 5);
        let sol = tikhonov_morozov(&Spectral::of_matrix(&a).unwrap(), &b, 0.0).unwrap();
        let direct = a.lu().solve(&b).unwrap();
        assert!((&sol.g - direct).norm() < 1e-9 * sol.g.norm());
    }

    #[test]
    fn discrepancy_holds_on_random_systems() {
        for seed in 0..100 {
            let a = random_psd(20, 20, 100 + seed);
            let b = rhs(20, 500 + seed);
            let spec = Spectral::of_matrix(&a).unwrap();
            let sol = tikhonov_morozov(&spec, &b, 0.05).unwrap();
            assert!(!sol.range_deficient);
            let r = (&a * &sol.g - &b).norm();
            assert!((r - 0.05 * b.norm()).abs() <= 1e-8 * b.norm(), "seed {seed}: {r}");
        }
    }

    #[test]
    fn alpha_matches_brute_force_scan() {
        let a = random_psd(20, 20, 7);
        let b = rhs(20, 8);
        let delta = 0.1;
        let alpha = tikhonov_morozov(&Spectral::of_matrix(&a).unwrap(), &b, delta).unwrap().alpha;
        // discrepancy by direct regularized solves on a fine log grid
        let disc = |al: f64| {
            let m = a.adjoint() * &a + CMat::identity(20, 20) * c(al);
            let g = m.lu().solve(&(a.adjoint() * &b)).unwrap();
            (&a * g - &b).norm() - delta * b.norm()
        };
        let grid: Vec<f64> = (0..=20000).map(|k| 10f64.powf(-8.0 + 12.0 * k as f64 / 20000.0)).collect();
        let k = grid.windows(2).position(|w| disc(w[0]) < 0.0 && disc(w[1]) >= 0.0).unwrap();
        let (a0, a1) = (grid[k], grid[k + 1]);
        let (d0, d1) = (disc(a0), disc(a1));
        let scan = a0 + (a1 - a0) * (-d0) / (d1 - d0);
        assert!((alpha - scan).abs() <= 1e-3 * scan, "{alpha} vs {scan}");
    }

    #[test]
    fn range_deficiency_is_flagged() {
        let mut a = CMat::identity(4, 4);
        a[(3, 3)] = c(0.0);
        let b = CVec::from_vec(vec![c(1.0), c(0.0), c(0.0), c(1.0)]);
        let sol = tikhonov_morozov(&Spectral::of_matrix(&a).unwrap(), &b, 0.1).unwrap();
        assert!(sol.range_deficient);
        assert_eq!(sol.alpha, 0.0);
    }

    #[test]
    fn picard_examples_and_direct_oracle() {
        let a = random_psd(16, 16, 11);
        let e = EigenSystem::of(&a).unwrap();
        let psi1 = e.vectors.column(0).into_owned();
        let v = picard_norm(&e, &psi1, 5).unwrap();
        assert!((v - 1.0 / e.values[0]).abs() < 1e-12 * v);
        let orth = e.vectors.column(7).into_owned();
        assert!(picard_norm(&e, &orth, 5).unwrap() < 1e-25);
        let b = rhs(16, 12);
        for n_p in [1, 4, 9, 16] {
            let want = picard_norm(&e, &b, n_p).unwrap();
            // minimum-norm least-squares solution of the rank-N_P system (F#)^{1/2} g = b
            let mut trunc = CMat::zeros(16, 16);
            for l in 0..n_p {
                let p = e.vectors.column(l);
                trunc += p * p.adjoint() * c(e.values[l].sqrt());
            }
            let g = trunc.svd(true, true).solve(&b, 1e-10 * e.values[0].sqrt()).unwrap();
            let got = g.norm_squared();
            assert!((got - want).abs() <= 1e-10 * want, "{n_p}: {got} vs {want}");
        }
        assert!(picard_norm(&e, &b, 0).is_err());
        assert!(picard_norm(&e, &b, 17).is_err());
        let zero = EigenSystem { values: vec![0.0; 2], vectors: CMat::identity(2, 2), fingerprint: String::new() };
        assert!(picard_norm(&zero, &CVec::zeros(2), 1).is_err());
    }

    #[test]
    fn truncation_rule() {
        let e = EigenSystem { values: vec![1.0, 0.5, 0.06, 0.04, 0.0], vectors: CMat::identity(5, 5), fingerprint: String::new() };
        assert_eq!(picard_truncation(&e, 0.05).unwrap(), 3);
        assert_eq!(picard_truncation(&e, 0.0).unwrap(), 4);
    }
}
