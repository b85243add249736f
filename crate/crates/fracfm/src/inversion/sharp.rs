//! `F̃_D^# = |Re F̃_D| + Im F̃_D` and its eigensystem.

use sha2::{Digest, Sha256};

use crate::inversion::farfield::{energy_sqrt, normalize};
use crate::inversion::{FarFieldMatrix, Role};
use crate::linalg::{c, frob, hermitian_defect, hermitian_eigen, spectral_apply, CMat, I};
use crate::{Error, Result};

/// Eigenvalues above `−CLIP_TOL·max|μ|` count as round-off; all negatives are clipped to zero.
pub const CLIP_TOL: f64 = 1e-10;
/// More negative eigenvalues than this fraction of the norm trigger a warning.
pub const NEGATIVE_WARN: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Descending.
    pub values: Vec<f64>,
    /// Orthonormal columns.
    pub vectors: CMat,
    /// SHA-256 prefix of the source matrix bytes.
    pub fingerprint: String,
}

pub fn fingerprint(m: &CMat) -> String {
    let mut h = Sha256::new();
    for z in m.iter() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl EigenSystem {
    pub fn of(m: &CMat) -> Result<Self> {
        let (values, vectors) = hermitian_eigen(m)?;
        Ok(Self { values, vectors, fingerprint: fingerprint(m) })
    }

    pub fn reconstruct(&self) -> CMat {
        spectral_apply(&self.values, &self.vectors, |v| v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// `(A + A*)/2`.
pub fn real_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5)
}

/// `(A − A*)/(2i)`.
pub fn imag_part(a: &CMat) -> CMat {
    (a - a.adjoint()) * (-0.5 * I)
}

/// `|Re A| + Im A` for a square matrix.
pub fn sharp(a: &CMat) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(&real_part(a))?;
    let abs_re = spectral_apply(&vals, &vecs, f64::abs);
    let s = abs_re + imag_part(a);
    Ok(real_part(&s))
}

#[derive(Clone, Debug)]
pub struct SharpResult {
    pub f_sharp: FarFieldMatrix,
    /// Eigensystem with the negative tail clipped to zero.
    pub eigen: EigenSystem,
    /// Most negative eigenvalue before clipping, relative to the largest.
    pub min_relative_eigenvalue: f64,
    pub warnings: Vec<String>,
}

/// `F̃_D = Ŝ_b^* M^{1/2} F_D M^{1/2}`, then `F̃_D^#` and its eigensystem.
pub fn f_sharp(f_d: &FarFieldMatrix, s_b: &FarFieldMatrix) -> Result<SharpResult> {
    f_d.check_compatible(s_b)?;
    let wn = f_d.wave_numbers()?;
    let msq = energy_sqrt(&f_d.grid, &wn);
    let tilde = s_b.data.adjoint() * normalize(&f_d.data, &msq);
    let fs = sharp(&tilde)?;
    let defect = hermitian_defect(&fs);
    if defect > 1e-12 {
        return Err(Error::Eigen(format!("F# not Hermitian: defect {defect:e}")));
    }
    let mut eigen = EigenSystem::of(&fs)?;
    let scale = eigen.max_abs();
    let min = eigen.values.last().copied().unwrap_or(0.0);
    let mut warnings = Vec::new();
    if scale > 0.0 && min < -NEGATIVE_WARN * scale {
        warnings.push(format!("F# has eigenvalue {:.3e} relative to max: data noise-dominated", min / scale));
    }
    for v in eigen.values.iter_mut() {
        *v = v.max(0.0);
    }
    Ok(SharpResult {
        f_sharp: f_d.with_data(Role::FSharp, fs),
        eigen,
        min_relative_eigenvalue: if scale > 0.0 { min / scale } else { 0.0 },
        warnings,
    })
}

/// `V diag(√max(μ, 0)) V*`.
pub fn sqrt_psd(a: &CMat) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(a)?;
    Ok(spectral_apply(&vals, &vecs, |v| v.max(0.0).sqrt()))
}

/// Relative reconstruction error `‖V diag(μ) V* − A‖ / ‖A‖`.
pub fn reconstruction_error(eig: &EigenSystem, a: &CMat) -> f64 {
    let n = frob(a);
    if n == 0.0 {
        0.0
    } else {
        frob(&(eig.reconstruct() - a)) / n
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::C64;
    use rand::{Rng, SeedableRng};

    pub fn random_matrix(n: usize, seed: u64) -> CMat {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    pub fn random_psd(n: usize, rank: usize, seed: u64) -> CMat {
        let b = random_matrix(n, seed).columns(0, rank).into_owned();
        &b * b.adjoint()
    }

    /// Principal square root by the Denman–Beavers iteration (independent of the eigensolver).
    fn db_sqrt(a: &CMat) -> CMat {
        let n = a.nrows();
        let mut y = a.clone();
        let mut z = CMat::identity(n, n);
        for _ in 0..60 {
            let yi = y.clone().try_inverse().unwrap();
            let zi = z.clone().try_inverse().unwrap();
            y = (&y + zi) * c(0.5);
            z = (&z + yi) * c(0.5);
        }
        y
    }

    #[test]
    fn sharp_examples() {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(1.0), c(0.5)]));
        assert!(frob(&(sharp(&d).unwrap() - &d)) < 1e-14);
        let m = random_psd(6, 6, 1);
        let s = sharp(&(&m * I)).unwrap();
        assert!(frob(&(s - &m)) < 1e-12 * frob(&m));
    }

    #[test]
    fn abs_real_part_matches_denman_beavers() {
        let a = random_matrix(12, 3);
        let re = real_part(&a);
        let (vals, vecs) = hermitian_eigen(&re).unwrap();
        let abs = spectral_apply(&vals, &vecs, f64::abs);
        let oracle = db_sqrt(&(&re * &re));
        assert!(frob(&(abs - oracle)) < 1e-12 * frob(&re), "");
    }

    #[test]
    fn sqrt_psd_examples() {
        let id = CMat::identity(4, 4);
        assert!(frob(&(sqrt_psd(&id).unwrap() - &id)) < 1e-14);
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(4.0), c(1.0), c(0.0)]));
        let r = sqrt_psd(&d).unwrap();
        let want = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0), c(1.0), c(0.0)]));
        assert!(frob(&(r - want)) < 1e-14);
        for seed in 0..5 {
            let a = random_psd(15, 9, seed);
            let s = sqrt_psd(&a).unwrap();
            assert!(frob(&(&s * &s - &a)) <= 1e-10 * frob(&a));
        }
    }

    #[test]
    fn eigen_reconstruction() {
        let a = random_psd(20, 20, 9);
        let e = EigenSystem::of(&a).unwrap();
        assert!(reconstruction_error(&e, &a) < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        for j in 0..20 {
            assert!((e.vectors.column(j).norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(e.fingerprint, fingerprint(&a));
    }
}
