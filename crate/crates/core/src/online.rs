//! Explore-then-exploit conversion of a resilient offline algorithm into a
//! bandit agent.
//!
//! Every set the offline algorithm asks about is played `m` times; the
//! algorithm only ever sees the resulting empirical means. Its output is
//! then played for the rest of the horizon.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offline::{OfflineSpec, Problem, ResilienceCert};
use crate::setfn::{ArmSet, Feedback, StochasticEnv, ValueOracle};

/// `m = ⌈δ^{2/3} T^{2/3} (ln T)^{1/3} / (2 N^{2/3})⌉`, at least 1.
pub fn exploration_reps(delta: f64, horizon: u64, n_calls: u64) -> Result<u64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive and finite, got {delta}")));
    }
    if horizon < 2 {
        return Err(Error::domain(format!("horizon must be at least 2, got {horizon}")));
    }
    if n_calls == 0 {
        return Err(Error::domain("the oracle-call bound N must be at least 1"));
    }
    let t = horizon as f64;
    let raw = (delta * t).powf(2.0 / 3.0) * t.ln().cbrt() / (2.0 * (n_calls as f64).powf(2.0 / 3.0));
    Ok((raw.ceil() as u64).max(1))
}

/// Hoeffding radius `√(h² ln T / (2m))` for an `m`-sample mean in `[0, h]`.
pub fn confidence_radius(h: f64, horizon: u64, m: u64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("h must be positive and finite, got {h}")));
    }
    if horizon < 2 {
        return Err(Error::domain(format!("horizon must be at least 2, got {horizon}")));
    }
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    Ok((h * h * (horizon as f64).ln() / (2.0 * m as f64)).sqrt())
}

/// Running mean `x̄_k = x̄_{k-1} + (x_k - x̄_{k-1}) / k`.
///
/// A block of identical samples averages to exactly that sample, which the
/// zero-noise tests rely on. Returns 0 for an empty slice.
pub fn empirical_mean(samples: &[f64]) -> f64 {
    let mut mean = 0.0;
    for (k, &x) in samples.iter().enumerate() {
        mean += (x - mean) / (k + 1) as f64;
    }
    mean
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Explore,
    Exploit,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Explore => "explore",
            Phase::Exploit => "exploit",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: u64,
    pub action: ArmSet,
    pub sampled_f: f64,
    pub sampled_g: f64,
    pub phase: Phase,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeans {
    pub f: f64,
    pub g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub horizon: u64,
    pub rounds: Vec<RoundRecord>,
    pub m: u64,
    /// Distinct non-empty sets the offline algorithm asked about, in order.
    pub queries: Vec<ArmSet>,
    /// Means over each query's block, aligned with `queries`.
    pub empirical_means: Vec<EmpiricalMeans>,
    pub committed: ArmSet,
    /// Exploration ran out of rounds before the offline algorithm finished.
    pub budget_exhausted: bool,
    pub warnings: Vec<String>,
    pub instance_id: String,
}

impl RunTrace {
    pub fn explore_rounds(&self) -> usize {
        self.rounds.iter().filter(|r| r.phase == Phase::Explore).count()
    }

    pub fn exploit_rounds(&self) -> usize {
        self.rounds.len() - self.explore_rounds()
    }

    /// Whether every fully explored query's means lie within the confidence
    /// radius of the true means.
    pub fn clean_event(&self, env: &StochasticEnv) -> Result<bool> {
        let rad = confidence_radius(env.h(), self.horizon, self.m)?;
        Ok(self.queries.iter().zip(&self.empirical_means).all(|(&a, mean)| {
            (mean.f - env.mean(a, Feedback::Reward)).abs() <= rad && (mean.g - env.mean(a, Feedback::Cost)).abs() <= rad
        }))
    }

    /// Checks the structural invariants of a trace: length `T`, explore
    /// blocks of `m` identical actions (the last may be truncated when the
    /// budget ran out), block means recomputing bit-exactly, and exploit
    /// rounds playing only `committed`.
    pub fn check_structure(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvariantViolation(msg));
        if self.rounds.len() as u64 != self.horizon {
            return bad(format!("{} rounds for horizon {}", self.rounds.len(), self.horizon));
        }
        if self.queries.len() != self.empirical_means.len() {
            return bad("queries and means differ in length".into());
        }
        let explore = self.explore_rounds();
        if self.rounds[..explore].iter().any(|r| r.phase != Phase::Explore) {
            return bad("exploit round before the end of exploration".into());
        }
        let m = self.m as usize;
        let full_blocks = self.queries.len() * m;
        let tail = explore.checked_sub(full_blocks);
        match tail {
            Some(0) => {}
            Some(k) if self.budget_exhausted && k < m => {}
            _ => return bad(format!("{explore} explore rounds for {} queries at m = {m}", self.queries.len())),
        }
        for (i, (&q, mean)) in self.queries.iter().zip(&self.empirical_means).enumerate() {
            let block = &self.rounds[i * m..(i + 1) * m];
            if block.iter().any(|r| r.action != q) {
                return bad(format!("block {i} does not play {q} throughout"));
            }
            let f: Vec<f64> = block.iter().map(|r| r.sampled_f).collect();
            let g: Vec<f64> = block.iter().map(|r| r.sampled_g).collect();
            if empirical_mean(&f).to_bits() != mean.f.to_bits() || empirical_mean(&g).to_bits() != mean.g.to_bits() {
                return bad(format!("means of block {i} do not recompute"));
            }
        }
        if self.rounds[explore..].iter().any(|r| r.action != self.committed) {
            return bad("an exploit round plays something other than the committed set".into());
        }
        for (i, r) in self.rounds.iter().enumerate() {
            if r.t != i as u64 + 1 {
                return bad(format!("round {i} carries index {}", r.t));
            }
        }
        Ok(())
    }
}

/// Oracle handed to the offline algorithm during exploration: each new
/// query is played `m` times and answered with its empirical mean on the
/// queried side.
pub struct ExplorationOracle<'e> {
    env: &'e mut StochasticEnv,
    which: Feedback,
    m: u64,
    horizon: u64,
    rounds: Vec<RoundRecord>,
    queries: Vec<ArmSet>,
    means: Vec<EmpiricalMeans>,
    index: HashMap<ArmSet, usize>,
    exhausted: bool,
}

impl<'e> ExplorationOracle<'e> {
    fn new(env: &'e mut StochasticEnv, which: Feedback, m: u64, horizon: u64) -> Self {
        ExplorationOracle {
            env,
            which,
            m,
            horizon,
            rounds: Vec::with_capacity(horizon as usize),
            queries: Vec::new(),
            means: Vec::new(),
            index: HashMap::new(),
            exhausted: false,
        }
    }

    fn play(&mut self, set: ArmSet, phase: Phase) -> (f64, f64) {
        let f = self.env.sample(set, Feedback::Reward);
        let g = self.env.sample(set, Feedback::Cost);
        self.rounds.push(RoundRecord {
            t: self.rounds.len() as u64 + 1,
            action: set,
            sampled_f: f,
            sampled_g: g,
            phase,
        });
        (f, g)
    }

    fn answer(&self, i: usize) -> f64 {
        match self.which {
            Feedback::Reward => self.means[i].f,
            Feedback::Cost => self.means[i].g,
        }
    }
}

impl ValueOracle for ExplorationOracle<'_> {
    fn ground_size(&self) -> usize {
        self.env.n()
    }

    fn value(&mut self, set: ArmSet) -> Result<f64> {
        set.check(self.env.n())?;
        if set.is_empty() {
            return Ok(0.0);
        }
        if let Some(&i) = self.index.get(&set) {
            return Ok(self.answer(i));
        }
        if self.exhausted {
            return Err(Error::BudgetExhausted);
        }
        let remaining = self.horizon - self.rounds.len() as u64;
        if remaining < self.m {
            // Spend what is left on the query, then stop the algorithm.
            for _ in 0..remaining {
                self.play(set, Phase::Explore);
            }
            self.exhausted = true;
            return Err(Error::BudgetExhausted);
        }
        let (mut f_bar, mut g_bar) = (0.0, 0.0);
        for k in 1..=self.m {
            let (f, g) = self.play(set, Phase::Explore);
            f_bar += (f - f_bar) / k as f64;
            g_bar += (g - g_bar) / k as f64;
        }
        self.index.insert(set, self.queries.len());
        self.queries.push(set);
        self.means.push(EmpiricalMeans { f: f_bar, g: g_bar });
        Ok(self.answer(self.queries.len() - 1))
    }

    fn distinct_queries(&self) -> usize {
        self.queries.len()
    }
}

/// Runs the explore-then-exploit schedule around an arbitrary offline
/// algorithm. `which` selects the side (`f` or `g`) the algorithm's oracle
/// answers for; both sides are sampled every round.
pub fn run_with_offline<F>(
    horizon: u64,
    m: u64,
    env: &mut StochasticEnv,
    which: Feedback,
    offline: F,
) -> Result<RunTrace>
where
    F: FnOnce(&mut dyn ValueOracle) -> Result<ArmSet>,
{
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    if horizon == 0 {
        return Err(Error::domain("horizon must be at least 1"));
    }
    let instance_id = env.fingerprint();
    let mut oracle = ExplorationOracle::new(env, which, m, horizon);
    let outcome = offline(&mut oracle);
    let (committed, budget_exhausted) = match outcome {
        Ok(set) => (set, false),
        Err(Error::BudgetExhausted) => (oracle.queries.last().copied().unwrap_or(ArmSet::EMPTY), true),
        Err(e) => {
            return Err(Error::Phase {
                phase: "explore",
                source: Box::new(e),
            })
        }
    };
    committed.check(oracle.env.n())?;
    while (oracle.rounds.len() as u64) < horizon {
        oracle.play(committed, Phase::Exploit);
    }
    let mut warnings = Vec::new();
    if budget_exhausted {
        warnings.push(format!(
            "exploration budget exhausted after {} queries; committed to the last fully explored set",
            oracle.queries.len()
        ));
    }
    Ok(RunTrace {
        horizon,
        rounds: oracle.rounds,
        m,
        queries: oracle.queries,
        empirical_means: oracle.means,
        committed,
        budget_exhausted,
        warnings,
        instance_id,
    })
}

/// Inputs of one online run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub horizon: u64,
    pub cert: ResilienceCert,
    pub env: StochasticEnv,
    pub offline: OfflineSpec,
    /// Master seed; sampling streams are keyed by `(seed, [horizon])`.
    pub seed: u64,
    pub m_override: Option<u64>,
}

impl RunConfig {
    pub fn m(&self) -> Result<u64> {
        match self.m_override {
            Some(0) => Err(Error::invalid("m_override", "must be at least 1")),
            Some(m) => Ok(m),
            None => exploration_reps(self.cert.delta, self.horizon, self.cert.n_calls),
        }
    }

    /// The horizon condition `T >= max{N, 2√2 N / δ}` under which the regret
    /// analysis applies.
    pub fn horizon_warning(&self) -> Option<String> {
        let n = self.cert.n_calls as f64;
        let need = n.max(2.0 * std::f64::consts::SQRT_2 * n / self.cert.delta);
        ((self.horizon as f64) < need).then(|| {
            format!(
                "horizon {} is below max(N, 2*sqrt(2)*N/delta) = {need:.3}; the regret bound does not apply",
                self.horizon
            )
        })
    }
}

/// Side of the problem the offline algorithm learns from feedback: the
/// utility `g` for the cover problems, the objective `f` for FSM.
pub fn learned_side(problem: Problem) -> Feedback {
    match problem {
        Problem::Sc | Problem::Scsc => Feedback::Cost,
        Problem::Fsm => Feedback::Reward,
    }
}

pub fn run_bicriteria_cmab(cfg: RunConfig) -> Result<RunTrace> {
    let RunConfig {
        horizon,
        mut env,
        offline,
        seed,
        ..
    } = cfg.clone();
    offline.validate(env.n())?;
    if horizon < 2 {
        return Err(Error::domain(format!("horizon must be at least 2, got {horizon}")));
    }
    let m = cfg.m()?;
    env.reseed(seed, &[horizon]);
    let known = env.f_mean().clone();
    let mut trace = run_with_offline(horizon, m, &mut env, learned_side(offline.problem), |oracle| {
        offline.run(&known, oracle).map(|r| r.selected)
    })?;
    if let Some(w) = cfg.horizon_warning() {
        trace.warnings.insert(0, w);
    }
    Ok(trace)
}
