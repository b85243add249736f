//! Shared numeric aliases and dense linear-algebra helpers (nalgebra backed).

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};
pub use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub type Point = Vector3<f64>;
pub type CVec3 = Vector3<C64>;
pub type CMat3 = Matrix3<C64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn to_complex3(v: &Point) -> CVec3 {
    v.map(c)
}

pub fn outer_real(a: &Point, b: &Point) -> nalgebra::Matrix3<f64> {
    a * b.transpose()
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob3(m: &CMat3) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest relative deviation from Hermitian symmetry, `‖A − A*‖_F / ‖A‖_F`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = frob(a);
    if n == 0.0 {
        return 0.0;
    }
    frob(&(a - a.adjoint())) / n
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// The input is symmetrized first so round-off asymmetry does not leak in.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Eigen(format!("non-square {}x{}", n, a.ncols())));
    }
    let sym = (a + a.adjoint()) * c(0.5);
    let eig = SymmetricEigen::try_new(sym, 1e-15, 0)
        .ok_or_else(|| Error::Eigen("QR iteration did not converge".into()))?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// `V diag(f(μ)) V*` for a Hermitian eigensystem.
pub fn spectral_apply(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let s = c(f(v));
        scaled.column_mut(j).scale_mut_c(s);
    }
    &scaled * vecs.adjoint()
}

trait ScaleC {
    fn scale_mut_c(&mut self, s: C64);
}

impl<S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>> ScaleC
    for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
{
    fn scale_mut_c(&mut self, s: C64) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

/// LU factorization with a cheap reciprocal-condition estimate.
pub struct Factorized {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    pub rcond: f64,
}

impl Factorized {
    pub fn new(a: CMat) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Mismatch("LU of a non-square matrix".into()));
        }
        let lu = a.lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let rcond = if max > 0.0 { min / max } else { 0.0 };
        if !rcond.is_finite() || rcond < 1e-14 {
            return Err(Error::IllConditioned {
                rcond,
                hint: "matrix is numerically singular".into(),
            });
        }
        Ok(Self { lu, rcond })
    }

    pub fn solve(&self, b: &CMat) -> Result<CMat> {
        self.lu
            .solve(b)
            .ok_or_else(|| Error::IllConditioned {
                rcond: self.rcond,
                hint: "LU solve failed".into(),
            })
    }

    pub fn solve_vec(&self, b: &CVec) -> Result<CVec> {
        self.lu.solve(b).ok_or_else(|| Error::IllConditioned {
            rcond: self.rcond,
            hint: "LU solve failed".into(),
        })
    }
}
