use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bicrit::eval::{opt_for_spec, regret_ccv, scaling_exponent, theoretical_bound, OptResult, Parts};
use bicrit::offline::{certify, Certification, Sense};
use bicrit::online::{run_bicriteria_cmab, RunConfig, RunTrace};
use bicrit::setfn::StochasticEnv;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{load, prepare_output, Loaded, Overrides};
use crate::output::{trace_rows, write_csv, write_json, SweepRow};

/// Constant of the reference bound curve reported next to every result.
pub const BOUND_CONSTANT: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub n: usize,
    #[serde(flatten)]
    pub certification: Certification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub horizon: u64,
    pub seed: u64,
    pub m: u64,
    pub n_queries: usize,
    pub queries: Vec<String>,
    pub committed: String,
    pub budget_exhausted: bool,
    pub explore_rounds: usize,
    pub exploit_rounds: usize,
    pub regret_f: f64,
    pub ccv_g: f64,
    pub explore_part: Parts,
    pub exploit_part: Parts,
    pub clean_event: bool,
    pub theoretical_bound: f64,
    pub bound_constant: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub sense: Sense,
    pub opt_set: String,
    pub opt_objective: f64,
    pub instance_id: String,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonStats {
    pub horizon: u64,
    pub cells: usize,
    pub mean_m: f64,
    pub mean_regret_f: f64,
    pub se_regret_f: f64,
    pub mean_ccv_g: f64,
    pub se_ccv_g: f64,
    pub bound_c3: f64,
    pub regret_bound_ratio: f64,
    pub ccv_bound_ratio: f64,
    pub budget_exhausted_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub slope: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub horizon: u64,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub horizons: Vec<u64>,
    pub seeds: Vec<u64>,
    pub per_horizon: Vec<HorizonStats>,
    pub regret_exponent: Exponent,
    pub ccv_exponent: Exponent,
    pub failures: Vec<CellFailure>,
    pub warnings: Vec<String>,
    pub bound_note: String,
}

impl SweepSummary {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Everything shared by the cells of one experiment.
pub struct Experiment {
    pub loaded: Loaded,
    pub certification: Certification,
    pub opt: OptResult,
    env: StochasticEnv,
}

impl Experiment {
    pub fn new(loaded: Loaded) -> Result<Self> {
        let inst = &loaded.instance;
        let spec = &loaded.config.offline;
        let certification = certify(spec, inst).context("certifying the offline algorithm")?;
        let opt = opt_for_spec(spec, &inst.objective, &inst.constraint).context("brute-force optimum")?;
        let (f_dist, g_dist) = loaded.distributions();
        let env = StochasticEnv::new(
            inst.objective.clone(),
            inst.constraint.clone(),
            inst.h,
            f_dist,
            g_dist,
            0,
            &[],
        )?;
        Ok(Experiment {
            loaded,
            certification,
            opt,
            env,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.loaded.out_dir
    }

    /// One online run and its accounting.
    pub fn cell(&self, horizon: u64, seed: u64) -> Result<(RunTrace, RunSummary)> {
        let cert = &self.certification.cert;
        let kappa = self.loaded.config.offline.kappa;
        let cfg = RunConfig {
            horizon,
            cert: cert.clone(),
            env: self.env.clone(),
            offline: self.loaded.config.offline.clone(),
            seed,
            m_override: self.loaded.config.m_override,
        };
        let trace = run_bicriteria_cmab(cfg)?;
        let report = regret_ccv(&trace, &self.opt, cert, kappa, &self.env)?;
        let bound = theoretical_bound(cert, self.env.h(), horizon, BOUND_CONSTANT)?;
        let summary = RunSummary {
            horizon,
            seed,
            m: trace.m,
            n_queries: trace.queries.len(),
            queries: trace.queries.iter().map(|q| q.to_hex()).collect(),
            committed: trace.committed.to_hex(),
            budget_exhausted: trace.budget_exhausted,
            explore_rounds: trace.explore_rounds(),
            exploit_rounds: trace.exploit_rounds(),
            regret_f: report.regret_f,
            ccv_g: report.ccv_g,
            explore_part: report.explore_part,
            exploit_part: report.exploit_part,
            clean_event: trace.clean_event(&self.env)?,
            theoretical_bound: bound,
            bound_constant: BOUND_CONSTANT,
            alpha: cert.alpha,
            beta: cert.beta,
            kappa,
            sense: cert.sense,
            opt_set: self.opt.opt_set.to_hex(),
            opt_objective: self.opt.opt_objective,
            instance_id: trace.instance_id.clone(),
            warnings: trace.warnings.clone(),
        };
        Ok((trace, summary))
    }

    /// Runs one cell and writes its summary (and trace, if configured).
    pub fn write_cell(&self, horizon: u64, seed: u64) -> Result<RunSummary> {
        let (trace, summary) = self.cell(horizon, seed)?;
        let dir = self.out_dir();
        if self.loaded.config.emit_trace {
            write_csv(&dir.join(format!("trace_{horizon}_{seed}.csv")), trace_rows(&trace))?;
        }
        write_json(&dir.join(format!("summary_{horizon}_{seed}.json")), &summary)?;
        Ok(summary)
    }
}

pub fn cmd_certify(config: &Path, ov: &Overrides) -> Result<CertifyReport> {
    let loaded = load(config, ov)?;
    let certification = certify(&loaded.config.offline, &loaded.instance).context("certifying the offline algorithm")?;
    let report = CertifyReport {
        n: loaded.instance.ground.n(),
        certification,
    };
    prepare_output(&loaded.out_dir)?;
    write_json(&loaded.out_dir.join("certificate.json"), &report)?;
    Ok(report)
}

/// Single run at `--t` (default: the first horizon) and `--seed` (default:
/// `BICRIT_SEED`, then the first config seed).
pub fn cmd_run(config: &Path, ov: &Overrides) -> Result<(PathBuf, RunSummary)> {
    let loaded = load(config, ov)?;
    let horizon = loaded.config.horizons[0];
    let seed = loaded.seeds[0];
    let exp = Experiment::new(loaded)?;
    prepare_output(exp.out_dir())?;
    let summary = exp.write_cell(horizon, seed)?;
    Ok((exp.out_dir().join(format!("summary_{horizon}_{seed}.json")), summary))
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn exponent(points: &[(f64, f64)]) -> Exponent {
    match scaling_exponent(points) {
        Ok(fit) => Exponent {
            slope: Some(fit.slope),
            note: (!fit.warnings.is_empty()).then(|| fit.warnings.join("; ")),
        },
        Err(e) => Exponent {
            slope: None,
            note: Some(e.to_string()),
        },
    }
}

/// All `(T, seed)` cells on a worker pool; failed cells are recorded and the
/// sweep continues.
pub fn cmd_sweep(config: &Path, ov: &Overrides) -> Result<SweepSummary> {
    let loaded = load(config, ov)?;
    let mut warnings = Vec::new();
    if loaded.seeds.len() < 10 {
        warnings.push(format!("only {} seed(s); at least 10 are recommended", loaded.seeds.len()));
    }
    if loaded.config.horizons.len() < 4 {
        warnings.push(format!(
            "only {} horizon(s); scaling exponents need at least 4",
            loaded.config.horizons.len()
        ));
    }
    let workers = loaded.workers();
    let exp = Experiment::new(loaded)?;
    prepare_output(exp.out_dir())?;
    let horizons = exp.loaded.config.horizons.clone();
    let seeds = exp.loaded.seeds.clone();
    let cells: Vec<(u64, u64)> = horizons.iter().flat_map(|&t| seeds.iter().map(move |&s| (t, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("starting the worker pool")?;
    let results: Vec<Result<RunSummary>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(t, s)| {
                if exp.loaded.config.emit_trace {
                    exp.write_cell(t, s)
                } else {
                    exp.cell(t, s).map(|(_, summary)| summary)
                }
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut ok: Vec<RunSummary> = Vec::new();
    for (&(horizon, seed), r) in cells.iter().zip(results) {
        match r {
            Ok(s) => {
                rows.push(SweepRow {
                    horizon,
                    seed,
                    m: s.m,
                    regret_f: s.regret_f,
                    ccv_g: s.ccv_g,
                    bound_c3: s.theoretical_bound,
                });
                ok.push(s);
            }
            Err(e) => failures.push(CellFailure {
                horizon,
                seed,
                reason: format!("{e:#}"),
            }),
        }
    }
    let mut per_horizon = Vec::new();
    for &t in &horizons {
        let cell: Vec<&RunSummary> = ok.iter().filter(|s| s.horizon == t).collect();
        if cell.is_empty() {
            continue;
        }
        let regrets: Vec<f64> = cell.iter().map(|s| s.regret_f).collect();
        let ccvs: Vec<f64> = cell.iter().map(|s| s.ccv_g).collect();
        let (mean_regret_f, se_regret_f) = mean_se(&regrets);
        let (mean_ccv_g, se_ccv_g) = mean_se(&ccvs);
        let bound = cell[0].theoretical_bound;
        per_horizon.push(HorizonStats {
            horizon: t,
            cells: cell.len(),
            mean_m: cell.iter().map(|s| s.m as f64).sum::<f64>() / cell.len() as f64,
            mean_regret_f,
            se_regret_f,
            mean_ccv_g,
            se_ccv_g,
            bound_c3: bound,
            regret_bound_ratio: mean_regret_f / bound,
            ccv_bound_ratio: mean_ccv_g / bound,
            budget_exhausted_cells: cell.iter().filter(|s| s.budget_exhausted).count(),
        });
    }
    let pts = |key: fn(&HorizonStats) -> f64| -> Vec<(f64, f64)> {
        per_horizon.iter().map(|h| (h.horizon as f64, key(h))).collect()
    };
    let summary = SweepSummary {
        horizons,
        seeds,
        regret_exponent: exponent(&pts(|h| h.mean_regret_f)),
        ccv_exponent: exponent(&pts(|h| h.mean_ccv_g)),
        per_horizon,
        failures,
        warnings,
        bound_note: format!(
            "bound_C3 = {BOUND_CONSTANT} * delta^(2/3) * h * N^(1/3) * T^(2/3) * ln(T)^(1/3); \
             the constant is an engineering reference, not a proven value"
        ),
    };
    write_csv(&exp.out_dir().join("sweep.csv"), rows)?;
    write_json(&exp.out_dir().join("sweep_summary.json"), &summary)?;
    Ok(summary)
}
