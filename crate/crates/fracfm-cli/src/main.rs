//! `fracfm`: forward simulation, inversion and validation from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracfm::inversion::Method;
use fracfm::pipeline::validate::{run_suite, SUITES};
use fracfm::pipeline::{load_config, run, ExperimentConfig, Stage};
use fracfm::presets::PRESET_NAMES;
use fracfm::Error;

#[derive(Parser)]
#[command(name = "fracfm", version, about = "Far-field imaging of fractures with the factorization method")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward solves only: writes the clean F and F_b archives.
    Forward(Common),
    /// Inversion from archives written by `forward`.
    Invert {
        #[command(flatten)]
        common: Common,
        /// Directory holding F.ffm and F_b.ffm (defaults to the config's archive).
        #[arg(long, value_name = "DIR")]
        archive: Option<PathBuf>,
    },
    /// Forward solves, noise, inversion and exports.
    Run(Common),
    /// Run a validation suite; exits nonzero if any check fails.
    Validate {
        /// Suite name, or `all`.
        #[arg(default_value = "all")]
        suite: String,
        /// Write a JSON report to this directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "COUNT", env = "FRACFM_THREADS")]
        threads: Option<usize>,
    },
    /// Print the expanded configuration of a preset (lists presets without a name).
    PresetDump {
        name: Option<String>,
        #[arg(long, value_name = "U64", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Tikhonov,
    Picard,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH", required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a named preset with default settings instead of a config file.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Realized noise level for both F and F_b, in percent.
    #[arg(long, value_name = "PCT")]
    noise: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Threshold as a fraction of the maximum indicator.
    #[arg(long, value_name = "FLOAT")]
    tau: Option<f64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "COUNT", env = "FRACFM_THREADS")]
    threads: Option<usize>,
}

impl Common {
    fn config(&self, stage: Stage) -> fracfm::Result<ExperimentConfig> {
        let mut c = match (&self.config, &self.preset) {
            (Some(path), _) => load_config(path)?,
            (None, Some(name)) => ExperimentConfig::from_preset(name, 0, "out").map_err(|e| Error::Config(e.to_string()))?,
            (None, None) => return Err(Error::Config("give --config or --preset".into())),
        };
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(pct) = self.noise {
            c.set_noise_target(pct / 100.0);
        }
        match self.method {
            Some(MethodArg::Tikhonov) => c.method = Method::Tikhonov,
            Some(MethodArg::Picard) if !matches!(c.method, Method::Picard { .. }) => c.method = Method::Picard { n_p: None },
            _ => {}
        }
        if let Some(tau) = self.tau {
            c.scene.tau = tau;
        }
        if let Some(out) = &self.out {
            c.output = out.clone();
        }
        match stage {
            // keep a configured archive unless the caller names one
            Stage::Invert { archive } if archive.as_os_str().is_empty() => {
                if !matches!(c.stage, Stage::Invert { .. }) {
                    return Err(Error::Config("invert needs --archive DIR or an invert stage in the config".into()));
                }
            }
            s => c.stage = s,
        }
        c.validate()?;
        Ok(c)
    }
}

fn set_threads(threads: Option<usize>) -> Result<(), String> {
    match threads {
        Some(0) => Err("--threads must be at least 1".into()),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string()),
        None => Ok(()),
    }
}

fn execute(common: &Common, stage: Stage) -> Result<ExitCode, Error> {
    let config = common.config(stage)?;
    let out = run(&config)?;
    let m = &out.manifest;
    println!("{} ({}) → {}", m.scene, m.stage, out.dir.display());
    for w in &m.warnings {
        println!("warning: {w}");
    }
    if let Some(n) = &m.noise {
        println!("noise: delta = {:.4e}, delta_b = {:.4e}", n.delta, n.delta_b);
    }
    if let Some(x) = &m.metrics {
        let ratio = x.localization_ratio.map_or("n/a".to_string(), |r| format!("{r:.2}"));
        println!("localization ratio {ratio}, Jaccard (dilated) {:.3}, support {} points", x.jaccard_dilated, x.support_points);
    }
    let total: f64 = m.timings.values().sum();
    println!("done in {total:.1} s");
    Ok(ExitCode::SUCCESS)
}

fn validate(suite: &str, out: Option<&PathBuf>) -> Result<ExitCode, Error> {
    let checks = run_suite(suite)?;
    for c in &checks {
        println!("{}", c.line());
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(&checks).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(dir.join("validation.json"), text + "\n")?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn preset_dump(name: Option<&str>, seed: u64, out: &PathBuf) -> Result<ExitCode, Error> {
    let Some(name) = name else {
        PRESET_NAMES.iter().for_each(|n| println!("{n}"));
        return Ok(ExitCode::SUCCESS);
    };
    let config = ExperimentConfig::from_preset(name, seed, out).map_err(|e| Error::Config(e.to_string()))?;
    print!("{}", config.to_toml()?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match &cli.command {
        Command::Forward(c) | Command::Run(c) | Command::Invert { common: c, .. } => c.threads,
        Command::Validate { threads, .. } => *threads,
        Command::PresetDump { .. } => None,
    };
    if let Err(e) = set_threads(threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Forward(c) => execute(c, Stage::Forward),
        Command::Run(c) => execute(c, Stage::Run),
        Command::Invert { common, archive } => execute(common, Stage::Invert { archive: archive.clone().unwrap_or_default() }),
        Command::Validate { suite, out, .. } => {
            if suite != "all" && !SUITES.contains(&suite.as_str()) {
                eprintln!("error: unknown suite `{suite}`; available: {}, all", SUITES.join(", "));
                return ExitCode::from(2);
            }
            validate(suite, out.as_ref())
        }
        Command::PresetDump { name, seed, out } => preset_dump(name.as_deref(), *seed, out),
    };
    match result {
        Ok(code) => code,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
