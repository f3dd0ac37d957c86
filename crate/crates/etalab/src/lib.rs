//! Command line for the etalab verification suites: config files, the
//! worker pool, run manifests and the files written per run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use etalab_core::verify::suites::{self, Executor};
use etalab_core::verify::{Instance, SuiteConfig, SuiteReport};

pub mod output;

/// environment variable overriding the default output directory
pub const OUT_ENV: &str = "ETALAB_OUT";
pub const DEFAULT_OUT: &str = "etalab-out";

#[derive(Debug, Parser)]
#[command(name = "etalab", version, about = "Verification suites for eta invariants, spectral flow and Chern forms")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML config, or a manifest.toml of an earlier run
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// output directory [default: $ETALAB_OUT or ./etalab-out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// worker threads; 0 uses one per core
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, global = true)]
    pub tolerance_scale: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// run one suite, or all of them
    Verify {
        suite: SuiteName,
        /// restricts `theorem1` to one instance
        #[arg(long, value_enum)]
        instance: Option<InstanceArg>,
    },
    /// eta of the shifted circle operator against 1 − 2b
    EtaOracle {
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        b: Vec<f64>,
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// rerun a suite along a refinement ladder
    Sweep {
        ladder: Ladder,
        /// refinement levels, coarse to fine
        #[arg(long, required = true, value_delimiter = ',')]
        levels: Vec<usize>,
    },
    /// merge report.json files into one report
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    All,
    Forms,
    Theorem1,
    PropPath,
    EtaEquivalence,
    SfSquares,
}

impl SuiteName {
    fn core_name(self) -> Option<&'static str> {
        match self {
            Self::All => None,
            Self::Forms => Some("forms"),
            Self::Theorem1 => Some("theorem1"),
            Self::PropPath => Some("prop_path"),
            Self::EtaEquivalence => Some("eta_equivalence"),
            Self::SfSquares => Some("sf_squares"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InstanceArg {
    Circle,
    Torus,
    All,
}

/// the refinement parameter a sweep varies
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ladder {
    /// Fourier cutoff of the circle projection paths
    Circle,
    /// Fourier cutoff of the T² instance
    Torus,
    /// circle grid `N_θ` of the conjugation identity
    Conjugation,
    /// interval mode cutoff of the reduced invariant
    Modes,
}

/// everything needed to repeat a run
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: Vec<String>,
    pub config_path: Option<String>,
    pub seed: u64,
    /// seconds since the Unix epoch
    pub timestamp: u64,
    pub output_dir: String,
    pub config: SuiteConfig,
}

/// a bounded rayon pool
pub struct Pool(rayon::ThreadPool);

impl Pool {
    pub fn new(jobs: usize) -> anyhow::Result<Self> {
        Ok(Self(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?))
    }
}

impl Executor for Pool {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        self.0.install(|| items.into_par_iter().map(f).collect())
    }
}

/// reads a config file; a run manifest contributes its resolved config
pub fn load_config(path: &Path) -> anyhow::Result<SuiteConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let cfg = if value.contains_key("tool_version") {
        let m: RunManifest = toml::from_str(&text).with_context(|| format!("{} is not a valid manifest", path.display()))?;
        m.config
    } else {
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?
    };
    Ok(cfg)
}

impl GlobalArgs {
    pub fn resolve(&self) -> anyhow::Result<SuiteConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => SuiteConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.tolerance_scale {
            cfg.tolerance_scale = t;
        }
        cfg.validate().context("invalid configuration")?;
        Ok(cfg)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| DEFAULT_OUT.into())
    }
}

/// what a command produced
pub struct Outcome {
    pub report: SuiteReport,
    pub timings: Vec<(String, Duration)>,
}

fn timed(name: &str, cfg: &SuiteConfig, pool: &Pool, timings: &mut Vec<(String, Duration)>) -> anyhow::Result<SuiteReport> {
    let t0 = Instant::now();
    let r = suites::run_suite(name, cfg, pool)?;
    timings.push((name.into(), t0.elapsed()));
    Ok(r)
}

fn ladder_report(ladder: Ladder, levels: &[usize], cfg: &mut SuiteConfig, pool: &Pool, timings: &mut Vec<(String, Duration)>) -> anyhow::Result<SuiteReport> {
    let levels = levels.to_vec();
    let suite = match ladder {
        Ladder::Circle => {
            cfg.theorem1.instance = Instance::Circle;
            cfg.theorem1.circle.cutoffs = levels;
            "theorem1"
        }
        Ladder::Torus => {
            cfg.theorem1.instance = Instance::Torus;
            cfg.theorem1.torus.cutoffs = levels;
            "theorem1"
        }
        Ladder::Conjugation => {
            if levels.len() < 2 {
                bail!("the conjugation ladder needs at least two levels");
            }
            cfg.eta_equivalence.conjugation.n_theta = levels;
            "eta_equivalence"
        }
        Ladder::Modes => {
            cfg.eta_equivalence.mode_cutoffs = levels;
            "eta_equivalence"
        }
    };
    timed(suite, cfg, pool, timings)
}

/// runs a command; the caller writes the outputs
pub fn execute(cli: &Cli) -> anyhow::Result<(Outcome, SuiteConfig)> {
    let mut cfg = cli.global.resolve()?;
    let pool = Pool::new(cli.global.jobs)?;
    let mut timings = Vec::new();
    let report = match &cli.command {
        Command::Verify { suite, instance } => {
            if let Some(i) = instance {
                cfg.theorem1.instance = match i {
                    InstanceArg::Circle => Instance::Circle,
                    InstanceArg::Torus => Instance::Torus,
                    InstanceArg::All => Instance::All,
                };
            }
            match suite.core_name() {
                Some(name) => timed(name, &cfg, &pool, &mut timings)?,
                None => {
                    let parts = suites::SUITES.iter().map(|s| timed(s, &cfg, &pool, &mut timings)).collect::<anyhow::Result<Vec<_>>>()?;
                    SuiteReport::merge("all", cfg.seed, parts)
                }
            }
        }
        Command::EtaOracle { b, cutoff } => {
            if !b.is_empty() {
                cfg.eta_oracle.b = b.clone();
            }
            if let Some(k) = cutoff {
                cfg.eta_oracle.cutoff = *k;
            }
            cfg.validate()?;
            timed("eta_oracle", &cfg, &pool, &mut timings)?
        }
        Command::Sweep { ladder, levels } => {
            let r = ladder_report(*ladder, levels, &mut cfg, &pool, &mut timings)?;
            cfg.validate()?;
            r
        }
        Command::Report { inputs } => {
            let parts = inputs
                .iter()
                .map(|p| -> anyhow::Result<SuiteReport> {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    let r: SuiteReport = serde_json::from_str(&text).with_context(|| format!("{} is not a report", p.display()))?;
                    if r.schema_version != etalab_core::verify::report::SCHEMA_VERSION {
                        bail!("{} has schema version {}, expected {}", p.display(), r.schema_version, etalab_core::verify::report::SCHEMA_VERSION);
                    }
                    Ok(r)
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            SuiteReport::merge("merged", cfg.seed, parts)
        }
    };
    Ok((Outcome { report, timings }, cfg))
}

/// the η estimates of an `eta-oracle` run, one line per `b`
pub fn oracle_lines(report: &SuiteReport) -> Vec<String> {
    report
        .values
        .iter()
        .filter_map(|v| {
            let b: f64 = v.name.strip_prefix("eta/b=")?.parse().ok()?;
            let ok = report.checks.iter().find(|c| c.name == v.name).is_some_and(|c| c.passed);
            Some(format!("b = {b}: eta = {:.6} (1 - 2b = {:.6}) {}", v.value, 1.0 - 2.0 * b, if ok { "ok" } else { "FAILED" }))
        })
        .collect()
}

pub fn manifest(cfg: &SuiteConfig, cli: &GlobalArgs, out: &Path) -> RunManifest {
    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: std::env::args().collect(),
        config_path: cli.config.as_ref().map(|p| p.display().to_string()),
        seed: cfg.seed,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        output_dir: out.display().to_string(),
        config: cfg.clone(),
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        fs::write(&p, "seed = 5\n[theorem1.torus]\ncutoffs = [2]\n").unwrap();
        let c = load_config(&p).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.theorem1.torus.cutoffs, vec![2]);
        assert_eq!(c.forms, SuiteConfig::default().forms);
    }

    #[test]
    fn manifest_round_trips_its_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = SuiteConfig { seed: 9, ..Default::default() };
        cfg.eta_oracle.b = vec![0.3];
        let args = GlobalArgs { config: None, seed: None, out: None, jobs: 1, tolerance_scale: None };
        let m = manifest(&cfg, &args, dir.path());
        let p = dir.path().join("manifest.toml");
        fs::write(&p, toml::to_string(&m).unwrap()).unwrap();
        assert_eq!(load_config(&p).unwrap(), cfg);
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::parse_from(["etalab", "verify", "theorem1", "--instance", "torus", "--seed", "7", "--tolerance-scale", "2"]);
        let cfg = cli.global.resolve().unwrap();
        assert_eq!((cfg.seed, cfg.tolerance_scale), (7, 2.0));
        assert!(matches!(cli.command, Command::Verify { suite: SuiteName::Theorem1, instance: Some(InstanceArg::Torus) }));
    }
}
