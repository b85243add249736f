//! Factorization-method inversion: `F_D`, the scattering matrix, noise,
//! `F#`, regularized range tests and indicator maps.

pub mod farfield;
pub mod indicator;
pub mod noise;
pub mod regularize;
pub mod sharp;

pub use farfield::{differential_matrix, energy_sqrt, normalize, scattering_matrix, scattering_matrix_literal, FarFieldMatrix, Role};
pub use indicator::{indicator_at, indicator_map, jaccard, localization_ratio, signature_far_field, threshold, trial_rhs, IndicatorMap, Method};
pub use noise::{apply_noise, calibrate_epsilon, mean_noise_level, unit_noise, RNG_NAME};
pub use regularize::{morozov_alpha, picard_norm, picard_truncation, tikhonov_apply, tikhonov_morozov, Spectral, TikhonovSolution};
pub use sharp::{f_sharp, fingerprint, imag_part, real_part, reconstruction_error, sharp, sqrt_psd, EigenSystem, SharpResult};
