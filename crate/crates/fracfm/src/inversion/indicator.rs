//! Trial signatures and the factorization-method indicator `I^F = 1/‖g‖`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::background::{traction_table, BackgroundModel};
use crate::error::invalid;
use crate::geometry::{DirectionGrid, SamplingSurface};
use crate::inversion::farfield::{energy_sqrt, scale_rows};
use crate::inversion::regularize::{morozov_alpha, picard_from_coefficients, picard_truncation, Spectral, NEGLIGIBLE};
use crate::inversion::{FarFieldMatrix, SharpResult};
use crate::linalg::{c, CMat, CVec, Point};
use crate::wavecore::WaveNumbers;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Method {
    Tikhonov,
    /// `n_p = None` uses the noise-floor rule `μ_ℓ ≥ δ μ_1`.
    Picard { n_p: Option<usize> },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Tikhonov => "tikhonov",
            Method::Picard { .. } => "picard",
        }
    }
}

/// Far-field signature `Φ^∞(ξ̂_i) = ν·C:∇W_b(x0, −ξ̂_i) ν` of an infinitesimal crack.
pub fn signature_far_field(x0: &Point, nu: &Point, background: &BackgroundModel, grid: &DirectionGrid, wn: &WaveNumbers) -> Result<CVec> {
    if (nu.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid("nu", "must be a unit vector"));
    }
    let nc = nu.map(c);
    let minus: Vec<Point> = grid.directions.iter().map(|d| -d).collect();
    let table = traction_table(background, &[(*x0, *nu)], &minus, wn)?;
    let mut phi = CVec::zeros(grid.dim());
    for (i, t) in table[0].iter().enumerate() {
        phi.rows_mut(3 * i, 3).copy_from(&(t.transpose() * nc));
    }
    Ok(phi)
}

/// `b = Ŝ_b^* M^{1/2} Φ^∞` in the energy-normalized space of [`crate::inversion::f_sharp`].
pub fn trial_rhs(x0: &Point, nu: &Point, background: &BackgroundModel, grid: &DirectionGrid, s_b: &FarFieldMatrix, wn: &WaveNumbers) -> Result<CVec> {
    let b = trial_block(&[*x0], &[*nu], background, grid, s_b, wn)?;
    Ok(b.column(0).into_owned())
}

fn trial_block(points: &[Point], normals: &[Point], background: &BackgroundModel, grid: &DirectionGrid, s_b: &FarFieldMatrix, wn: &WaveNumbers) -> Result<CMat> {
    if s_b.grid.spec() != grid.spec() {
        return Err(crate::Error::Mismatch("S_b grid differs from the sampling grid".into()));
    }
    let cols: Vec<CVec> = points
        .par_iter()
        .zip(normals.par_iter())
        .map(|(x, n)| signature_far_field(x, n, background, grid, wn))
        .collect::<Result<_>>()?;
    let mut phi = CMat::from_columns(&cols);
    scale_rows(&mut phi, &energy_sqrt(grid, wn));
    let identity = s_b.data == CMat::identity(s_b.dim(), s_b.dim());
    Ok(if identity { phi } else { s_b.data.adjoint() * phi })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorMap {
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    pub values: Vec<f64>,
    /// Tikhonov α or Picard `N_P` per point.
    pub params: Vec<f64>,
    pub range_deficient: Vec<bool>,
    pub method: Method,
    pub delta: f64,
    pub tau: f64,
    pub mask: Vec<bool>,
    pub truncated: Vec<f64>,
}

/// Indicator from coefficients `β = Ψ* b`, returning `(I^F, parameter, range_deficient)`.
fn indicator_from(sharp: &SharpResult, sqrt: &Spectral, beta: &CVec, method: Method, delta: f64, n_p: usize) -> Result<(f64, f64, bool)> {
    match method {
        Method::Tikhonov => {
            let beta2: Vec<f64> = beta.iter().map(|z| z.norm_sqr()).collect();
            let (alpha, deficient) = morozov_alpha(&sqrt.sigma, &beta2, delta)?;
            let smax = sqrt.sigma.iter().cloned().fold(0.0, f64::max);
            let g2: f64 = sqrt
                .sigma
                .iter()
                .zip(&beta2)
                .filter(|(s, _)| **s > NEGLIGIBLE * smax)
                .map(|(&s, &b2)| {
                    let f = s / (s * s + alpha);
                    f * f * b2
                })
                .sum();
            Ok((1.0 / g2.sqrt(), alpha, deficient))
        }
        Method::Picard { .. } => {
            let g2 = picard_from_coefficients(&sharp.eigen, beta, n_p)?;
            Ok((1.0 / g2.sqrt(), n_p as f64, false))
        }
    }
}

fn truncation(sharp: &SharpResult, method: Method, delta: f64) -> Result<usize> {
    match method {
        Method::Picard { n_p: Some(n) } => Ok(n),
        _ => picard_truncation(&sharp.eigen, delta),
    }
}

/// Indicator at one sampling point (reference path for the batched map).
pub fn indicator_at(
    sharp: &SharpResult,
    s_b: &FarFieldMatrix,
    x0: &Point,
    nu: &Point,
    background: &BackgroundModel,
    method: Method,
    delta: f64,
) -> Result<f64> {
    let wn = s_b.wave_numbers()?;
    let b = trial_rhs(x0, nu, background, &s_b.grid, s_b, &wn)?;
    let beta = sharp.eigen.vectors.adjoint() * b;
    let sqrt = Spectral::sqrt_of(&sharp.eigen);
    Ok(indicator_from(sharp, &sqrt, &beta, method, delta, truncation(sharp, method, delta)?)?.0)
}

/// Indicator over a sampling surface, all right-hand sides in one block.
pub fn indicator_map(
    sharp: &SharpResult,
    s_b: &FarFieldMatrix,
    sampling: &SamplingSurface,
    background: &BackgroundModel,
    method: Method,
    delta: f64,
) -> Result<IndicatorMap> {
    let wn = s_b.wave_numbers()?;
    let b = trial_block(&sampling.points, &sampling.normals, background, &s_b.grid, s_b, &wn)?;
    let beta = sharp.eigen.vectors.adjoint() * b;
    let sqrt = Spectral::sqrt_of(&sharp.eigen);
    let n_p = truncation(sharp, method, delta)?;
    let out: Vec<(f64, f64, bool)> = (0..sampling.len())
        .into_par_iter()
        .map(|k| indicator_from(sharp, &sqrt, &beta.column(k).into_owned(), method, delta, n_p))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = out.iter().map(|o| o.0).collect();
    Ok(IndicatorMap {
        points: sampling.points.clone(),
        normals: sampling.normals.clone(),
        truncated: values.clone(),
        mask: vec![true; values.len()],
        values,
        params: out.iter().map(|o| o.1).collect(),
        range_deficient: out.iter().map(|o| o.2).collect(),
        method,
        delta,
        tau: 0.0,
    })
}

/// Keep `I^F > τ·max I^F` (strict), zero elsewhere.
pub fn threshold(map: &IndicatorMap, tau: f64) -> Result<IndicatorMap> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid("tau", format!("must be in [0, 1], got {tau}")));
    }
    let max = map.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mask: Vec<bool> = if tau == 0.0 { vec![true; map.values.len()] } else { map.values.iter().map(|&v| v > tau * max).collect() };
    let truncated = map.values.iter().zip(&mask).map(|(&v, &m)| if m { v } else { 0.0 }).collect();
    Ok(IndicatorMap { tau, mask, truncated, ..map.clone() })
}

/// Mean indicator on true-support points over the mean elsewhere.
pub fn localization_ratio(map: &IndicatorMap, truth: &[bool]) -> Option<f64> {
    let mean = |want: bool| {
        let v: Vec<f64> = map.values.iter().zip(truth).filter(|(_, &t)| t == want).map(|(v, _)| *v).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    Some(mean(true)? / mean(false)?)
}

/// `|A ∩ B| / |A ∪ B|` (1 when both are empty).
pub fn jaccard(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}
