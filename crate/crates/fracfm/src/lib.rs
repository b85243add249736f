//! Far-field imaging of fractures in elastic media with the factorization method.
//!
//! The crate is organised bottom-up:
//!
//! * [`wavecore`]: media, wave numbers, plane waves, the Kupradze tensor and tractions.
//! * [`geometry`]: direction grids, sampling surfaces and crack meshes.
//! * [`background`]: homogeneous and penetrable-inclusion background responses.
//! * [`forward`]: linear-slip crack scattering (Galerkin BEM) and far-field matrices.
//! * [`inversion`]: scattering matrix, noise, `F#`, regularized range tests, indicator maps.
//! * [`presets`]: named scenes.
//! * [`pipeline`]: configuration, archives, exports, orchestration and validation suites.

pub mod background;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod inversion;
pub mod linalg;
pub mod pipeline;
pub mod presets;
pub mod quadrature;
pub mod wavecore;

pub use error::{Error, Result};
