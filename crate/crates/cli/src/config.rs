//! Command-line flags, the key=value config file, and their merge.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use levy_sympl::{LevyConfig, OscillatorParams, Scheme, SchemeConfig};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "levy-sympl",
    version,
    about = "Symplectic Euler experiments for the Levy-driven linear oscillator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// One trajectory on one path (trajectory.csv, optionally exact.csv).
    Simulate,
    /// Mean-square convergence study (convergence.csv).
    Converge,
    /// Evolution of a circle of initial conditions (domains.csv, areas.csv).
    PhaseDomain,
    /// Hamiltonian of SES, EEM and the exact solution on one path (hamiltonian.csv).
    Hamiltonian,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Converge => "converge",
            Command::PhaseDomain => "phase-domain",
            Command::Hamiltonian => "hamiltonian",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Drift scheme: ses or eem.
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// Largest drift step.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    /// End time (and path horizon).
    #[arg(long = "t-end", global = true, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    /// Noise amplitude.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Jump intensity.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Standard deviation of the jump sizes.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Initial momentum (circle center for phase-domain).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p0: Option<f64>,
    /// Initial position (circle center for phase-domain).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q0: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of Monte Carlo paths.
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Comma-separated, strictly decreasing step sizes.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub steps: Option<String>,
    /// Comma-separated snapshot times.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub snapshots: Option<String>,
    /// Also write the exact solution on the same path.
    #[arg(long = "with-exact", global = true)]
    pub with_exact: bool,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key=value config file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the driving path to path.csv.
    #[arg(long = "dump-path", global = true)]
    pub dump_path: bool,
    /// Keep every n-th drift node in trajectory output.
    #[arg(long = "record-every", global = true)]
    pub record_every: Option<usize>,
    /// Accepted slope interval for converge, as lo,hi.
    #[arg(long = "slope-band", global = true, allow_hyphen_values = true)]
    pub slope_band: Option<String>,
    /// Fixed-point tolerance of the implicit step.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Fixed-point iteration cap.
    #[arg(long = "max-iters", global = true)]
    pub max_iters: Option<usize>,
    /// Vertices of the phase-domain circle.
    #[arg(long, global = true)]
    pub vertices: Option<usize>,
}

const KEYS: &[&str] = &[
    "scheme",
    "dt",
    "t-end",
    "beta",
    "lambda",
    "sigma",
    "p0",
    "q0",
    "seed",
    "paths",
    "steps",
    "snapshots",
    "with-exact",
    "out",
    "dump-path",
    "record-every",
    "slope-band",
    "tol",
    "max-iters",
    "vertices",
];

/// Parses flat `key = value` lines; `#` starts a comment. Keys accept `_` or `-`.
pub fn parse_config_file(text: &str) -> Result<HashMap<String, String>, CliError> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("config line {}: expected key=value", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-").to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Validation(format!(
                "config line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Everything one command needs, after merging flags, file and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub levy: LevyConfig,
    pub scheme: SchemeConfig,
    pub params: OscillatorParams,
    pub paths: usize,
    pub steps: Vec<f64>,
    pub snapshots: Vec<f64>,
    pub slope_band: (f64, f64),
    pub vertices: usize,
    pub with_exact: bool,
    pub dump_path: bool,
    pub out: PathBuf,
}

struct Source<'a> {
    file: &'a HashMap<String, String>,
}

impl Source<'_> {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Validation(format!("invalid value '{v}' for {key}"))),
            None => Ok(None),
        }
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        match self.file.get(key).map(|v| v.to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) if matches!(v.as_str(), "true" | "1" | "yes") => Ok(true),
            Some(v) if matches!(v.as_str(), "false" | "0" | "no") => Ok(false),
            Some(v) => Err(CliError::Validation(format!(
                "invalid value '{v}' for {key}"
            ))),
        }
    }
}

fn parse_list(text: &str, key: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Validation(format!("invalid number '{s}' in {key}")))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn resolve(command: Command, flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => read_config(path)?,
            None => HashMap::new(),
        };
        let src = Source { file: &file };

        let (p0_default, q0_default) = match command {
            Command::PhaseDomain | Command::Hamiltonian => (0.2, 0.8),
            Command::Simulate | Command::Converge => (0.0, 1.0),
        };
        let params = OscillatorParams {
            beta: src.get(flags.beta, "beta")?.unwrap_or(1.0),
            p0: src.get(flags.p0, "p0")?.unwrap_or(p0_default),
            q0: src.get(flags.q0, "q0")?.unwrap_or(q0_default),
        };
        let t_end = src.get(flags.t_end, "t-end")?.unwrap_or(20.0);
        let levy = LevyConfig {
            intensity: src.get(flags.lambda, "lambda")?.unwrap_or(5.0),
            jump_size_sigma: src.get(flags.sigma, "sigma")?.unwrap_or(0.2),
            channels: 1,
            horizon: t_end,
            seed: src.get(flags.seed, "seed")?.unwrap_or(42),
            brownian_coefficient: 0.0,
        };
        let scheme_name: String = src
            .get(flags.scheme, "scheme")?
            .unwrap_or_else(|| "ses".into());
        let scheme: Scheme = scheme_name
            .parse()
            .map_err(|e: levy_sympl::Error| CliError::Validation(e.to_string()))?;
        let defaults = SchemeConfig::default();
        let scheme = SchemeConfig {
            scheme,
            dt: src.get(flags.dt, "dt")?.unwrap_or(defaults.dt),
            t_end,
            fixed_point_tol: src
                .get(flags.tol, "tol")?
                .unwrap_or(defaults.fixed_point_tol),
            fixed_point_max_iters: src
                .get(flags.max_iters, "max-iters")?
                .unwrap_or(defaults.fixed_point_max_iters),
            record_every: src.get(flags.record_every, "record-every")?.unwrap_or(1),
        };
        let steps = match src.get(flags.steps, "steps")? {
            Some(s) => parse_list(&s, "steps")?,
            None => vec![0.02, 0.01, 0.005, 0.0025],
        };
        let snapshots = match src.get(flags.snapshots, "snapshots")? {
            Some(s) => parse_list(&s, "snapshots")?,
            None => vec![0.0, 4.0, 8.0],
        };
        let slope_band = match src.get(flags.slope_band, "slope-band")? {
            Some(s) => match parse_list(&s, "slope-band")?[..] {
                [lo, hi] if lo <= hi => (lo, hi),
                _ => {
                    return Err(CliError::Validation(
                        "slope-band expects lo,hi with lo <= hi".into(),
                    ))
                }
            },
            None => (0.85, 1.15),
        };
        let cfg = Self {
            command,
            levy,
            scheme,
            params,
            paths: src.get(flags.paths, "paths")?.unwrap_or(100),
            steps,
            snapshots,
            slope_band,
            vertices: src.get(flags.vertices, "vertices")?.unwrap_or(256),
            with_exact: src.flag(flags.with_exact, "with-exact")?,
            dump_path: src.flag(flags.dump_path, "dump-path")?,
            out: src
                .get(flags.out, "out")?
                .unwrap_or_else(|| PathBuf::from(".")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.levy.validate()?;
        self.scheme.validate()?;
        self.params.validate()?;
        if self.paths == 0 {
            return Err(CliError::Validation("--paths must be at least 1".into()));
        }
        if self.vertices < 3 {
            return Err(CliError::Validation("--vertices must be at least 3".into()));
        }
        if self.command == Command::PhaseDomain {
            if self.snapshots.is_empty() {
                return Err(CliError::Validation(
                    "--snapshots needs at least one time".into(),
                ));
            }
            if let Some(t) = self
                .snapshots
                .iter()
                .find(|&&t| !(t >= 0.0 && t <= self.levy.horizon))
            {
                return Err(CliError::Validation(format!(
                    "snapshot {t} outside [0, {}]",
                    self.levy.horizon
                )));
            }
        }
        Ok(())
    }
}

fn read_config(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config_file(&text)
}
