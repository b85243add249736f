//! Stage orchestration: forward → noise → F# → indicator map → exports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::archive::{encode, read_archive};
use super::config::{ExperimentConfig, Stage};
use super::*;
use crate::background::{background_far_matrix, BackgroundModel};
use crate::forward::{assemble_crack_system, NODES_PER_WAVELENGTH};
use crate::geometry::{DirectionGrid, SamplingSurface};
use crate::inversion::{
    apply_noise, calibrate_epsilon, differential_matrix, f_sharp, indicator_map, jaccard, localization_ratio, scattering_matrix, threshold, FarFieldMatrix, IndicatorMap,
    Method, Role, RNG_NAME,
};
use crate::presets::NoiseMode;
use crate::wavecore::{wave_numbers, ElasticMedium, WaveNumbers};
use crate::{Error, Result};

/// Noise streams: one per matrix so `F` and `F_b` draws are independent.
pub const STREAM_F: u64 = 1;
pub const STREAM_FB: u64 = 2;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub mode: String,
    pub epsilon: f64,
    pub epsilon_b: f64,
    /// Realized `‖N F‖/‖F‖`.
    pub delta: f64,
    pub delta_b: f64,
    /// Level handed to the regularization rules.
    pub delta_used: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub count: usize,
    pub max: f64,
    pub min_relative_before_clip: f64,
    pub fingerprint: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub on_crack_points: usize,
    pub support_points: usize,
    pub localization_ratio: Option<f64>,
    pub jaccard_dilated: f64,
    pub dilation_radius: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// SHA-256 prefix of the tool version and the expanded configuration (output path excluded).
    pub fingerprint: String,
    pub rng: String,
    pub stage: String,
    pub status: String,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    pub scene: String,
    pub best_effort: bool,
    pub seed: u64,
    pub omega: Option<f64>,
    pub method: String,
    pub tau: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub noise: Option<NoiseRecord>,
    pub eigen: Option<EigenRecord>,
    pub metrics: Option<Metrics>,
    pub timings: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    /// File name → SHA-256 prefix.
    pub artifacts: BTreeMap<String, String>,
    pub config: String,
}

fn sha_prefix(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn tolerances() -> BTreeMap<String, f64> {
    use crate::background::transmission::MAX_KD;
    use crate::inversion::regularize::NEGLIGIBLE;
    use crate::inversion::sharp::{CLIP_TOL, NEGATIVE_WARN};
    [
        ("eigen_clip_relative", CLIP_TOL),
        ("eigen_negative_warning", NEGATIVE_WARN),
        ("negligible_singular_value", NEGLIGIBLE),
        ("inclusion_max_ks_diameter", MAX_KD),
        ("crack_nodes_per_wavelength", NODES_PER_WAVELENGTH),
        ("on_crack_relative_tolerance", 1e-9),
        ("dilation_cells", std::f64::consts::SQRT_2),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Everything a run produced, kept in memory for callers and tests.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub map: Option<IndicatorMap>,
    pub thresholded: Option<IndicatorMap>,
    pub truth: Option<Vec<bool>>,
    pub dilated: Option<Vec<bool>>,
}

struct Recorder {
    dir: PathBuf,
    manifest: Manifest,
}

impl Recorder {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f(self);
        self.manifest.timings.insert(name.to_string(), t.elapsed().as_secs_f64());
        match out {
            Ok(v) => Ok(v),
            Err(e) => {
                self.manifest.status = "failed".into();
                self.manifest.failed_stage = Some(name.to_string());
                self.manifest.error = Some(e.to_string());
                // best effort: the original error matters more than a failed manifest write
                let _ = self.write_manifest();
                Err(Error::Stage { stage: name.to_string(), source: Box::new(e) })
            }
        }
    }

    fn artifact(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.manifest.artifacts.insert(name.to_string(), sha_prefix(bytes));
        Ok(())
    }

    fn write_manifest(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(self.dir.join(MANIFEST), text + "\n")?;
        Ok(())
    }
}

/// Media table the archives of this scene carry (exterior first).
fn expected_media(bg: &BackgroundModel) -> Vec<ElasticMedium> {
    match bg {
        BackgroundModel::PenetrableInclusion(s) => vec![s.spec.exterior, s.spec.interior],
        BackgroundModel::Homogeneous { exterior } => vec![*exterior],
        BackgroundModel::Tabulated(t) => t.far.media.clone(),
    }
}

/// Refuse archives whose grid, frequency, media or role differ from the scene.
pub fn check_archive(f: &FarFieldMatrix, role: Role, grid: &DirectionGrid, wn: &WaveNumbers, media: &[ElasticMedium]) -> Result<()> {
    if f.role != role {
        return Err(Error::Mismatch(format!("archive role {:?}, expected {role:?}", f.role)));
    }
    if f.grid.spec() != grid.spec() {
        return Err(Error::Mismatch(format!(
            "archive grid {}×{}, config {}×{}",
            f.grid.n_theta, f.grid.n_phi, grid.n_theta, grid.n_phi
        )));
    }
    if f.omega != wn.omega {
        return Err(Error::Mismatch(format!("archive omega {}, config {}", f.omega, wn.omega)));
    }
    if f.media != media {
        return Err(Error::Mismatch("archive media table differs from the configured background".into()));
    }
    Ok(())
}

/// Indicator CSV: `index,x,y,z,nx,ny,nz,indicator,alpha_or_Np,truncated`.
pub fn indicator_csv(map: &IndicatorMap) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(io)?;
    for k in 0..map.points.len() {
        let (p, n) = (&map.points[k], &map.normals[k]);
        let row = [
            k.to_string(),
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
            n.x.to_string(),
            n.y.to_string(),
            n.z.to_string(),
            map.values[k].to_string(),
            map.params[k].to_string(),
            map.truncated[k].to_string(),
        ];
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn eigen_csv(values: &[f64]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["index", "eigenvalue"]).map_err(io)?;
    for (k, v) in values.iter().enumerate() {
        w.write_record([k.to_string(), v.to_string()]).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn draw(f: &FarFieldMatrix, mode: NoiseMode, level: f64, seed: u64, stream: u64) -> Result<(FarFieldMatrix, f64, f64)> {
    let eps = match mode {
        NoiseMode::Target => calibrate_epsilon(f, level, seed, stream)?,
        NoiseMode::Amplitude => level,
    };
    let (noisy, delta) = apply_noise(f, eps, seed, stream)?;
    Ok((noisy, eps, delta))
}

/// Execute the configured stage, writing artifacts and the manifest to `config.output`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let dir = config.output.clone();
    std::fs::create_dir_all(&dir)?;
    let scene = &config.scene;
    let config_text = config.to_toml()?;
    let version = env!("CARGO_PKG_VERSION");
    // the fingerprint ignores where the outputs go
    let mut relocatable = config.clone();
    relocatable.output = PathBuf::new();
    let fingerprint = sha_prefix(format!("{version}\n{}", relocatable.to_toml()?).as_bytes());
    let mut rec = Recorder {
        dir: dir.clone(),
        manifest: Manifest {
            tool: "fracfm".into(),
            version: version.into(),
            fingerprint,
            rng: RNG_NAME.into(),
            stage: config.stage.name().into(),
            status: "running".into(),
            scene: scene.name.clone(),
            best_effort: scene.best_effort,
            seed: config.seed,
            method: config.method.name().into(),
            tau: scene.tau,
            tolerances: tolerances(),
            config: config_text.clone(),
            ..Manifest::default()
        },
    };
    rec.artifact(CONFIG_COPY, config_text.as_bytes())?;

    let (grid, warnings) = rec.stage("scene", |_| Ok((scene.direction_grid()?, config.validate()?)))?;
    rec.manifest.warnings.extend(warnings);
    let bg = rec.stage("background", |_| scene.build_background())?;
    for w in bg.warnings() {
        if !rec.manifest.warnings.contains(&w) {
            rec.manifest.warnings.push(w);
        }
    }
    let wn = wave_numbers(bg.omega().unwrap_or(scene.omega), &scene.exterior)?;
    rec.manifest.omega = Some(wn.omega);

    let (f, fb) = match &config.stage {
        Stage::Run | Stage::Forward => rec.stage("forward", |r| {
            let crack = scene.build_crack()?;
            let fb = background_far_matrix(&bg, &grid, &wn)?;
            let sys = assemble_crack_system(&crack, &bg, &wn)?;
            r.manifest.warnings.extend(sys.warnings.iter().cloned());
            let mut f = fb.with_data(Role::F, fb.data.clone());
            f.data += sys.far_matrix(&grid)?.data;
            r.artifact(ARCHIVE_FB, &encode(&fb))?;
            r.artifact(ARCHIVE_F, &encode(&f))?;
            Ok((f, fb))
        })?,
        Stage::Invert { archive } => rec.stage("load", |r| {
            let media = expected_media(&bg);
            let f = read_archive(&archive.join(ARCHIVE_F))?;
            let fb = read_archive(&archive.join(ARCHIVE_FB))?;
            check_archive(&f, Role::F, &grid, &wn, &media)?;
            check_archive(&fb, Role::Fb, &grid, &wn, &media)?;
            r.artifact(ARCHIVE_F, &encode(&f))?;
            r.artifact(ARCHIVE_FB, &encode(&fb))?;
            Ok((f, fb))
        })?,
    };
    if config.stage == Stage::Forward {
        return finish(rec, None);
    }

    let (f_noisy, fb_noisy) = rec.stage("noise", |r| {
        let nz = &scene.noise;
        let (fn_, eps, delta) = draw(&f, nz.mode, nz.level, config.seed, STREAM_F)?;
        let (fbn, eps_b, delta_b) = draw(&fb, nz.mode, nz.level_b, config.seed, STREAM_FB)?;
        r.manifest.noise = Some(NoiseRecord {
            mode: format!("{:?}", nz.mode).to_lowercase(),
            epsilon: eps,
            epsilon_b: eps_b,
            delta,
            delta_b,
            delta_used: delta.max(delta_b),
        });
        r.artifact(ARCHIVE_F_NOISY, &encode(&fn_))?;
        r.artifact(ARCHIVE_FB_NOISY, &encode(&fbn))?;
        Ok((fn_, fbn))
    })?;
    let (sharp, s_b) = rec.stage("sharp", |r| {
        let fd = differential_matrix(&f_noisy, &fb_noisy)?;
        let s_b = scattering_matrix(&fb_noisy, &wn)?;
        let sharp = f_sharp(&fd, &s_b)?;
        r.manifest.warnings.extend(sharp.warnings.iter().cloned());
        r.manifest.eigen = Some(EigenRecord {
            count: sharp.eigen.values.len(),
            max: sharp.eigen.max_abs(),
            min_relative_before_clip: sharp.min_relative_eigenvalue,
            fingerprint: sharp.eigen.fingerprint.clone(),
        });
        r.artifact(EIGEN_CSV, &eigen_csv(&sharp.eigen.values)?)?;
        Ok((sharp, s_b))
    })?;
    let sampling: SamplingSurface = rec.stage("sampling", |_| scene.build_sampling())?;
    let delta = rec.manifest.noise.as_ref().map_or(0.0, |n| n.delta_used);
    let (map, th) = rec.stage("indicator", |r| {
        let map = indicator_map(&sharp, &s_b, &sampling, &bg, config.method, delta)?;
        let th = threshold(&map, scene.tau)?;
        if let Method::Tikhonov = config.method {
            let deficient = map.range_deficient.iter().filter(|d| **d).count();
            if deficient > 0 {
                r.manifest.warnings.push(format!("{deficient} sampling points are range-deficient (α = 0)"));
            }
        }
        r.artifact(INDICATOR_CSV, &indicator_csv(&th)?)?;
        Ok((map, th))
    })?;
    let truth = sampling.truth.clone();
    let dilated = match &truth {
        Some(t) if t.iter().any(|v| *v) => Some(rec.stage("metrics", |r| {
            let dil = scene.dilated_truth(&sampling.points)?;
            r.manifest.metrics = Some(Metrics {
                on_crack_points: t.iter().filter(|v| **v).count(),
                support_points: th.mask.iter().filter(|m| **m).count(),
                localization_ratio: localization_ratio(&map, t),
                jaccard_dilated: jaccard(&th.mask, &dil),
                dilation_radius: crate::presets::sampling_cell(&sampling.points) * std::f64::consts::SQRT_2,
            });
            Ok(dil)
        })?),
        _ => None,
    };
    let mut out = finish(rec, Some((map, th)))?;
    out.truth = truth;
    out.dilated = dilated;
    Ok(out)
}

fn finish(mut rec: Recorder, maps: Option<(IndicatorMap, IndicatorMap)>) -> Result<RunOutcome> {
    rec.manifest.status = "ok".into();
    rec.write_manifest()?;
    let (map, thresholded) = maps.map_or((None, None), |(a, b)| (Some(a), Some(b)));
    Ok(RunOutcome { dir: rec.dir, manifest: rec.manifest, map, thresholded, truth: None, dilated: None })
}

/// Read a manifest written by [`run`].
pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(dir.join(MANIFEST))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("manifest: {e}")))
}
