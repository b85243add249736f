//! Far-field matrices in 3×3 block layout with role tags.

use serde::{Deserialize, Serialize};

use crate::geometry::DirectionGrid;
use crate::linalg::{frob, CMat, CMat3};
use crate::wavecore::{wave_numbers, ElasticMedium, WaveNumbers};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    F,
    Fb,
    FD,
    Sb,
    FTilde,
    FSharp,
}

impl Role {
    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(t: u8) -> Option<Role> {
        [Role::F, Role::Fb, Role::FD, Role::Sb, Role::FTilde, Role::FSharp].get(t as usize).copied()
    }
}

/// Block `(i, j)` is the response at observation `ξ̂_i` to incidence `d_j`,
/// both in Cartesian components.
#[derive(Clone, Debug, PartialEq)]
pub struct FarFieldMatrix {
    pub grid: DirectionGrid,
    pub omega: f64,
    /// Exterior medium first.
    pub media: Vec<ElasticMedium>,
    pub role: Role,
    pub data: CMat,
}

impl FarFieldMatrix {
    pub fn zeros(grid: &DirectionGrid, wn: &WaveNumbers, role: Role) -> Self {
        let n = grid.dim();
        Self { grid: grid.clone(), omega: wn.omega, media: vec![wn.medium], role, data: CMat::zeros(n, n) }
    }

    pub fn with_data(&self, role: Role, data: CMat) -> Self {
        Self { grid: self.grid.clone(), omega: self.omega, media: self.media.clone(), role, data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn wave_numbers(&self) -> Result<WaveNumbers> {
        wave_numbers(self.omega, &self.media[0])
    }

    pub fn block(&self, i: usize, j: usize) -> CMat3 {
        self.data.fixed_view::<3, 3>(3 * i, 3 * j).into_owned()
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &CMat3) {
        self.data.fixed_view_mut::<3, 3>(3 * i, 3 * j).copy_from(b);
    }

    pub fn norm(&self) -> f64 {
        frob(&self.data)
    }

    /// Grid, frequency and exterior medium must agree.
    pub fn check_compatible(&self, other: &FarFieldMatrix) -> Result<()> {
        if self.grid.spec() != other.grid.spec() {
            return Err(Error::Mismatch(format!(
                "grid {}x{} vs {}x{}",
                self.grid.n_theta, self.grid.n_phi, other.grid.n_theta, other.grid.n_phi
            )));
        }
        if self.omega != other.omega {
            return Err(Error::Mismatch(format!("frequency {} vs {}", self.omega, other.omega)));
        }
        if self.media.first() != other.media.first() {
            return Err(Error::Mismatch("exterior medium differs".into()));
        }
        Ok(())
    }

    /// `Σ‖B(ξ̂,d) − B(−d,−ξ̂)ᵀ‖² / ‖F‖²` over all block pairs, square-rooted.
    pub fn reciprocity_residual(&self) -> Result<f64> {
        let n = self.grid.len();
        let anti: Vec<usize> = (0..n)
            .map(|i| self.grid.antipode(i).ok_or_else(|| Error::Unsupported("reciprocity needs an even n_phi".into())))
            .collect::<Result<_>>()?;
        let mut num = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = self.block(i, j) - self.block(anti[j], anti[i]).transpose();
                num += d.norm_squared();
            }
        }
        let den = self.data.norm_squared();
        Ok(if den == 0.0 { 0.0 } else { (num / den).sqrt() })
    }
}

/// `M_i^{1/2} = (w_i D_i)^{1/2}` with `D = k_pα_p ξ̂⊗ξ̂ + k_sα_s (I − ξ̂⊗ξ̂)`.
///
/// In the space scaled by `M^{1/2}` on both sides the discrete scattering
/// matrix of a lossless medium is unitary and adjoints are plain conjugate
/// transposes.
pub fn energy_sqrt(grid: &DirectionGrid, wn: &WaveNumbers) -> Vec<nalgebra::Matrix3<f64>> {
    grid.directions
        .iter()
        .zip(&grid.weights)
        .map(|(d, w)| {
            let p = d * d.transpose();
            p * (w * wn.k_p * wn.alpha_p).sqrt() + (nalgebra::Matrix3::identity() - p) * (w * wn.k_s * wn.alpha_s).sqrt()
        })
        .collect()
}

/// `M^{1/2} A M^{1/2}` for block-diagonal `M^{1/2}`.
pub fn normalize(a: &CMat, msq: &[nalgebra::Matrix3<f64>]) -> CMat {
    let mut out = a.clone();
    scale_rows(&mut out, msq);
    scale_cols(&mut out, msq);
    out
}

pub(crate) fn scale_rows(a: &mut CMat, msq: &[nalgebra::Matrix3<f64>]) {
    for (i, m) in msq.iter().enumerate() {
        let mc = m.map(crate::linalg::c);
        let rows = a.rows(3 * i, 3).into_owned();
        a.rows_mut(3 * i, 3).copy_from(&(mc * rows));
    }
}

pub(crate) fn scale_cols(a: &mut CMat, msq: &[nalgebra::Matrix3<f64>]) {
    for (j, m) in msq.iter().enumerate() {
        let mc = m.map(crate::linalg::c);
        let cols = a.columns(3 * j, 3).into_owned();
        a.columns_mut(3 * j, 3).copy_from(&(cols * mc));
    }
}

/// `F − F_b`.
pub fn differential_matrix(f: &FarFieldMatrix, f_b: &FarFieldMatrix) -> Result<FarFieldMatrix> {
    f.check_compatible(f_b)?;
    Ok(f.with_data(Role::FD, &f.data - &f_b.data))
}

/// Scattering matrix `Ŝ_b = I + (i/2π) M^{1/2} F_b M^{1/2}` in the energy-normalized space.
pub fn scattering_matrix(f_b: &FarFieldMatrix, wn: &WaveNumbers) -> Result<FarFieldMatrix> {
    let n = f_b.dim();
    let msq = energy_sqrt(&f_b.grid, wn);
    let s = CMat::identity(n, n) + normalize(&f_b.data, &msq) * (crate::linalg::I / (2.0 * std::f64::consts::PI));
    Ok(f_b.with_data(Role::Sb, s))
}

/// Blockwise `δ_ij I − 2i D_i W_b^∞(ξ̂_i, d_j)` exactly as printed in the
/// discretized far-field relation; kept as a diagnostic because it is not
/// unitary in this code's far-field normalization.
pub fn scattering_matrix_literal(f_b: &FarFieldMatrix, wn: &WaveNumbers) -> FarFieldMatrix {
    let n = f_b.dim();
    let mut s = CMat::identity(n, n);
    for (i, d) in f_b.grid.directions.iter().enumerate() {
        let p = d * d.transpose();
        let dm = (p * (wn.k_p * wn.alpha_p) + (nalgebra::Matrix3::identity() - p) * (wn.k_s * wn.alpha_s)).map(crate::linalg::c);
        let rows = f_b.data.rows(3 * i, 3).into_owned();
        let mut target = s.rows_mut(3 * i, 3);
        target -= dm * rows * crate::linalg::c(2.0) * crate::linalg::I;
    }
    f_b.with_data(Role::Sb, s)
}
