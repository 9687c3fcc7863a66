//! Experiment configuration files.
//!
//! ```json
//! {
//!   "instance": { "ground": {...}, "objective": {...}, "constraint": {...} },
//!   "offline": { "problem": "SC", "kappa": 2, "omega": 0.5 },
//!   "horizons": [4096, 8192],
//!   "seeds": 20,
//!   "noise": "bernoulli-scaled",
//!   "output_dir": "out",
//!   "emit_trace": true
//! }
//! ```
//!
//! `instance` may be replaced by `instance_path`, a path to an instance file.
//! `seeds` is either a list of master seeds or a count `k`, meaning seeds
//! `0..k`. Relative paths are resolved against the config file's directory.
//! `noise` is the feedback distribution of the side the offline algorithm
//! learns (the utility for SC/SCSC, the objective for FSM); the other side is
//! always point-mass. Optional keys: `m_override`, `workers`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bicrit::offline::{OfflineSpec, Problem};
use bicrit::setfn::{build_instance, Distribution, Instance, InstanceDescription};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            Seeds::Count(k) => (0..*k).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_path: Option<PathBuf>,
    pub offline: OfflineSpec,
    pub horizons: Vec<u64>,
    pub seeds: Seeds,
    #[serde(default = "default_noise")]
    pub noise: Distribution,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_trace: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_override: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_noise() -> Distribution {
    Distribution::BernoulliScaled
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub horizon: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub m_override: Option<u64>,
    pub out: Option<PathBuf>,
}

/// A parsed, validated config with its instance built and overrides applied.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub instance: Instance,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

impl Loaded {
    pub fn problem(&self) -> Problem {
        self.config.offline.problem
    }

    /// Feedback distributions `(f, g)`.
    pub fn distributions(&self) -> (Distribution, Distribution) {
        match self.problem() {
            Problem::Fsm => (self.config.noise, Distribution::PointMass),
            Problem::Sc | Problem::Scsc => (Distribution::PointMass, self.config.noise),
        }
    }

    pub fn workers(&self) -> usize {
        self.config
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig> {
    serde_json::from_str(text).map_err(|e| anyhow::anyhow!("line {}, column {}: {e}", e.line(), e.column()))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Reads and validates a config without touching the file system beyond
/// reading it (and its instance file).
pub fn load(path: &Path, ov: &Overrides) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut config = parse(&text).with_context(|| format!("config {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let desc = match (&config.instance, &config.instance_path) {
        (Some(d), None) => d.clone(),
        (None, Some(p)) => {
            let p = resolve(base, p);
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading instance {}", p.display()))?;
            InstanceDescription::from_json(&text).with_context(|| format!("instance {}", p.display()))?
        }
        _ => bail!("config {}: exactly one of `instance` and `instance_path` is required", path.display()),
    };
    let instance = build_instance(&desc).with_context(|| format!("config {}: instance", path.display()))?;
    config
        .offline
        .validate(instance.ground.n())
        .with_context(|| format!("config {}", path.display()))?;

    if let Some(m) = ov.m_override {
        config.m_override = Some(m);
    }
    if let Some(w) = ov.workers {
        config.workers = Some(w);
    }
    if let Some(t) = ov.horizon {
        config.horizons = vec![t];
    }
    let seeds = match ov.seed {
        Some(s) => vec![s],
        None => config.seeds.to_vec(),
    };

    if config.horizons.is_empty() {
        bail!("config {}: horizons: at least one horizon is required", path.display());
    }
    if config.horizons.windows(2).any(|w| w[0] >= w[1]) {
        bail!("config {}: horizons: must be strictly increasing", path.display());
    }
    if let Some(&t) = config.horizons.iter().find(|&&t| t < 2) {
        bail!("config {}: horizons: every horizon must be at least 2, got {t}", path.display());
    }
    if seeds.is_empty() {
        bail!("config {}: seeds: at least one seed is required", path.display());
    }
    if config.m_override == Some(0) {
        bail!("config {}: m_override: must be at least 1", path.display());
    }
    if config.workers == Some(0) {
        bail!("config {}: workers: must be at least 1", path.display());
    }
    let out_dir = match &ov.out {
        Some(o) => o.clone(),
        None => resolve(base, &config.output_dir),
    };
    Ok(Loaded {
        config,
        instance,
        seeds,
        out_dir,
    })
}

/// Creates the output directory and confirms it accepts files.
pub fn prepare_output(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let probe = dir.join(".bicrit-write-probe");
    std::fs::write(&probe, b"").with_context(|| format!("output directory {} is not writable", dir.display()))?;
    std::fs::remove_file(&probe).ok();
    Ok(())
}
