//! Resilient offline bi-criteria algorithms.
//!
//! Every algorithm reads the stochastic side of the problem only through a
//! [`ValueOracle`], so the same code runs against exact values, an
//! epsilon-perturbed oracle, or the empirical means produced online.

mod cert;
mod fairness;
mod mintss;
mod scsc;

use serde::{Deserialize, Serialize};

pub use cert::{
    certify, resilience_params, scsc_instance_constants, CertInputs, Certification, ResilienceCert, ScscConstants,
};
pub use fairness::{fairness_matroid_member, greedy_fairness_bi_run, Fairness, FairnessMatroid};
pub use mintss::mintss_run;
pub use scsc::scsc_greedy_run;

use crate::error::{Error, Result};
use crate::setfn::{ArmSet, SetFunction, ValueOracle};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Problem {
    /// Submodular cover: modular cost, submodular utility threshold.
    #[serde(rename = "SC")]
    Sc,
    /// Submodular-cost submodular cover.
    #[serde(rename = "SCSC")]
    Scsc,
    /// Fair submodular maximization.
    #[serde(rename = "FSM")]
    Fsm,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

impl Problem {
    pub fn sense(self) -> Sense {
        match self {
            Problem::Sc | Problem::Scsc => Sense::Min,
            Problem::Fsm => Sense::Max,
        }
    }
}

/// Tie-breaking among equal greedy scores.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
}

impl TieBreak {
    /// Whether `score` at a later (higher) index replaces `best`.
    fn prefers(self, score: f64, best: f64) -> bool {
        match self {
            TieBreak::LowestIndex => score > best,
            TieBreak::HighestIndex => score >= best,
        }
    }
}

/// Greedy argmax over `candidates` (ascending) of `score`.
fn argmax<I, F>(candidates: I, tie: TieBreak, mut score: F) -> Result<Option<usize>>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(usize) -> Result<f64>,
{
    let mut best: Option<(usize, f64)> = None;
    for i in candidates {
        let s = score(i)?;
        match best {
            Some((_, b)) if !tie.prefers(s, b) => {}
            _ => best = Some((i, s)),
        }
    }
    Ok(best.map(|(i, _)| i))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfflineSpec {
    pub problem: Problem,
    pub kappa: f64,
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fairness: Option<Fairness>,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl OfflineSpec {
    pub fn sense(&self) -> Sense {
        self.problem.sense()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let (k, w) = (self.kappa, self.omega);
        if !k.is_finite() || !w.is_finite() {
            return Err(Error::invalid("offline", "kappa and omega must be finite"));
        }
        match self.problem {
            Problem::Sc | Problem::Scsc => {
                if !(w > 0.0) {
                    return Err(Error::invalid("offline.omega", format!("must be > 0, got {w}")));
                }
                if !(w < k) {
                    return Err(Error::invalid("offline.omega", format!("must be < kappa = {k}, got {w}")));
                }
                if self.fairness.is_some() {
                    return Err(Error::invalid("offline.fairness", "only meaningful for FSM"));
                }
                Ok(())
            }
            Problem::Fsm => {
                let fairness = self
                    .fairness
                    .as_ref()
                    .ok_or_else(|| Error::invalid("offline.fairness", "FSM needs a fairness partition"))?;
                FairnessMatroid::new(fairness, n, k, w).map(|_| ())
            }
        }
    }

    pub fn matroid(&self, n: usize) -> Result<FairnessMatroid> {
        let fairness = self
            .fairness
            .as_ref()
            .ok_or_else(|| Error::invalid("offline.fairness", "FSM needs a fairness partition"))?;
        FairnessMatroid::new(fairness, n, self.kappa, self.omega)
    }

    /// Runs the configured algorithm. `known` is the deterministic side of
    /// the problem (the cost for SC/SCSC, unused for FSM); `oracle` answers
    /// for the stochastic side.
    pub fn run(&self, known: &SetFunction, oracle: &mut dyn ValueOracle) -> Result<GreedyRun> {
        match self.problem {
            Problem::Sc => mintss_run(known, oracle, self.kappa, self.omega, self.tie_break),
            Problem::Scsc => scsc_greedy_run(known, oracle, self.kappa, self.tie_break),
            Problem::Fsm => greedy_fairness_bi_run(oracle, self, self.tie_break),
        }
    }
}

/// Output of a greedy run: the selected set and the chain `A_0 ⊂ A_1 ⊂ ...`
/// of intermediate selections starting from the empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyRun {
    pub selected: ArmSet,
    pub chain: Vec<ArmSet>,
}

impl GreedyRun {
    fn start() -> Self {
        GreedyRun {
            selected: ArmSet::EMPTY,
            chain: vec![ArmSet::EMPTY],
        }
    }

    fn push(&mut self, arm: usize) {
        self.selected = self.selected.with(arm);
        self.chain.push(self.selected);
    }
}
