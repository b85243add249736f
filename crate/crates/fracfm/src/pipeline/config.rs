//! Strict, versioned experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::inversion::Method;
use crate::presets::{preset, NoiseMode, NoiseSpec, ScenePreset};
use crate::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Stage {
    /// Forward solves, noise, inversion and exports.
    Run,
    /// Forward solves and clean archives only.
    Forward,
    /// Inversion from the clean archives in `archive`.
    Invert { archive: PathBuf },
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Run => "run",
            Stage::Forward => "forward",
            Stage::Invert { .. } => "invert",
        }
    }
}

/// On-disk schema: a preset reference or an inline scene, plus overrides.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    version: u32,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    output: PathBuf,
    method: Method,
    stage: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scene: Option<ScenePreset>,
}

/// Fully expanded configuration; the scene already carries any overrides.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    pub scene: ScenePreset,
    pub method: Method,
    pub output: PathBuf,
    pub stage: Stage,
}

impl ExperimentConfig {
    /// Default run of a named preset.
    pub fn from_preset(name: &str, seed: u64, output: impl Into<PathBuf>) -> Result<Self> {
        Ok(Self { version: CONFIG_VERSION, seed, scene: preset(name)?, method: Method::Tikhonov, output: output.into(), stage: Stage::Run })
    }

    /// Semantic checks; every problem is reported, one per line.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut errors = Vec::new();
        if self.version != CONFIG_VERSION {
            errors.push(format!("version: expected {CONFIG_VERSION}, got {}", self.version));
        }
        if let Method::Picard { n_p: Some(0) } = self.method {
            errors.push("method.n_p: must be at least 1".into());
        }
        if let Stage::Invert { archive } = &self.stage {
            for name in [super::ARCHIVE_F, super::ARCHIVE_FB] {
                if !archive.join(name).is_file() {
                    errors.push(format!("stage.archive: missing {}", archive.join(name).display()));
                }
            }
        }
        let warnings = match self.scene.validate() {
            Ok(w) => w,
            Err(e) => {
                errors.push(format!("scene: {e}"));
                Vec::new()
            }
        };
        if errors.is_empty() {
            Ok(warnings)
        } else {
            Err(Error::Config(errors.join("\n")))
        }
    }

    /// Emit as TOML with the scene inline.
    pub fn to_toml(&self) -> Result<String> {
        let file = ConfigFile {
            version: self.version,
            seed: self.seed,
            preset: None,
            noise: None,
            tau: None,
            output: self.output.clone(),
            method: self.method,
            stage: self.stage.clone(),
            scene: Some(self.scene.clone()),
        };
        toml::to_string(&file).map_err(|e| Error::Config(e.to_string()))
    }

    /// Set both noise levels to a realized target fraction.
    pub fn set_noise_target(&mut self, level: f64) {
        self.scene.noise = NoiseSpec { mode: NoiseMode::Target, level, level_b: level };
    }
}

/// Parse and validate configuration text, expanding preset references.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    let mut scene = match (file.preset, file.scene) {
        (Some(name), None) => preset(&name).map_err(|e| Error::Config(format!("preset: {e}")))?,
        (None, Some(scene)) => scene,
        (Some(_), Some(_)) => return Err(Error::Config("give either `preset` or `[scene]`, not both".into())),
        (None, None) => return Err(Error::Config("missing scene: give `preset = \"name\"` or a `[scene]` table".into())),
    };
    if let Some(noise) = file.noise {
        scene.noise = noise;
    }
    if let Some(tau) = file.tau {
        scene.tau = tau;
    }
    let config = ExperimentConfig { version: file.version, seed: file.seed, scene, method: file.method, output: file.output, stage: file.stage };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1
seed = 7
preset = "composite1"
output = "out"
method = { kind = "tikhonov" }
stage = { kind = "run" }
"#;

    #[test]
    fn preset_reference_expands() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.scene, preset("composite1").unwrap());
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn emit_parse_round_trip() {
        let c = parse_config(MINIMAL).unwrap();
        let text = c.to_toml().unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
        let mut p = ExperimentConfig::from_preset("penny-homogeneous", 3, "x").unwrap();
        p.method = Method::Picard { n_p: Some(12) };
        assert_eq!(parse_config(&p.to_toml().unwrap()).unwrap(), p);
    }

    #[test]
    fn overrides_apply() {
        let text = MINIMAL.replace("preset =", "tau = 0.25\nnoise = { mode = \"amplitude\", level = 0.01, level_b = 0.0 }\npreset =");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.scene.tau, 0.25);
        assert_eq!(c.scene.noise.mode, NoiseMode::Amplitude);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let e = parse_config(&MINIMAL.replace("seed = 7\n", "")).unwrap_err().to_string();
        assert!(e.contains("seed"), "{e}");
        let e = parse_config(&MINIMAL.replace("seed = 7", "seed = 7\nsede = 8")).unwrap_err().to_string();
        assert!(e.contains("sede"), "{e}");
        let e = parse_config(&MINIMAL.replace("version = 1", "version = 2")).unwrap_err().to_string();
        assert!(e.contains("version"), "{e}");
        let e = parse_config(&MINIMAL.replace("composite1", "nope")).unwrap_err().to_string();
        assert!(e.contains("penny-homogeneous"), "{e}");
        let e = parse_config(&MINIMAL.replace("{ kind = \"run\" }", "{ kind = \"invert\", archive = \"/nonexistent\" }")).unwrap_err().to_string();
        assert!(e.contains("stage.archive"), "{e}");
        let e = parse_config(&MINIMAL.replace("preset = \"composite1\"\n", "")).unwrap_err().to_string();
        assert!(e.contains("missing scene"), "{e}");
    }
}
