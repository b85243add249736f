//! Experiment pipeline: configuration, archives, staged runs and validation suites.

pub mod archive;
pub mod config;
pub mod run;
pub mod validate;

pub use archive::{decode, encode, read_archive, write_archive};
pub use config::{load_config, parse_config, ExperimentConfig, Stage, CONFIG_VERSION};
pub use run::{read_manifest, run, Manifest, RunOutcome};

pub const ARCHIVE_F: &str = "F.ffm";
pub const ARCHIVE_FB: &str = "F_b.ffm";
pub const ARCHIVE_F_NOISY: &str = "F_noisy.ffm";
pub const ARCHIVE_FB_NOISY: &str = "F_b_noisy.ffm";
pub const EIGEN_CSV: &str = "eigenvalues.csv";
pub const INDICATOR_CSV: &str = "indicator.csv";
pub const MANIFEST: &str = "manifest.json";
pub const CONFIG_COPY: &str = "config.toml";
pub const CSV_HEADER: [&str; 10] = ["index", "x", "y", "z", "nx", "ny", "nz", "indicator", "alpha_or_Np", "truncated"];
