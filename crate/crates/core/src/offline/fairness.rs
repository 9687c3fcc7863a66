use serde::{Deserialize, Serialize};

use super::{argmax, GreedyRun, OfflineSpec, Problem, TieBreak};
use crate::error::{Error, Result};
use crate::setfn::{ArmSet, ValueOracle};

/// Group partition with per-group lower and upper counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fairness {
    /// Group index of every arm.
    pub groups: Vec<usize>,
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
}

/// The relaxed fairness matroid `M_{1/ω}(P, κ/ω, l/ω, u/ω)`: sets with
/// `|S ∩ Ω_c| <= u_c/ω` for every group and
/// `Σ_c max(|S ∩ Ω_c|, l_c/ω) <= κ/ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FairnessMatroid {
    group_of: Vec<usize>,
    cap: u64,
    lower: Vec<u64>,
    upper: Vec<u64>,
}

impl FairnessMatroid {
    /// `omega` must satisfy `0 < ω <= 1` with `1/ω` a positive integer;
    /// `kappa` must be a non-negative integer.
    pub fn new(fairness: &Fairness, n: usize, kappa: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::invalid("offline.omega", format!("FSM needs 0 < omega <= 1, got {omega}")));
        }
        let inv = 1.0 / omega;
        let scale = inv.round();
        if (inv - scale).abs() > 1e-9 * scale {
            return Err(Error::invalid("offline.omega", format!("1/omega must be an integer, got {inv}")));
        }
        let scale = scale as u64;
        if !(kappa >= 0.0 && kappa.fract() == 0.0 && kappa < 1e9) {
            return Err(Error::invalid("offline.kappa", format!("FSM needs an integer kappa, got {kappa}")));
        }
        let kappa = kappa as u64;
        if fairness.groups.len() != n {
            return Err(Error::invalid(
                "offline.fairness.groups",
                format!("expected a group for each of {n} arms, got {}", fairness.groups.len()),
            ));
        }
        let c = fairness.lower.len();
        if fairness.upper.len() != c {
            return Err(Error::invalid(
                "offline.fairness.upper",
                format!("{} upper bounds for {c} lower bounds", fairness.upper.len()),
            ));
        }
        if let Some((arm, g)) = fairness.groups.iter().enumerate().find(|(_, &g)| g >= c) {
            return Err(Error::invalid(
                format!("offline.fairness.groups[{arm}]"),
                format!("group {g} out of range for {c} groups"),
            ));
        }
        for (i, (l, u)) in fairness.lower.iter().zip(&fairness.upper).enumerate() {
            if l > u {
                return Err(Error::invalid(
                    format!("offline.fairness.lower[{i}]"),
                    format!("lower bound {l} exceeds upper bound {u}"),
                ));
            }
        }
        let lower_sum: u64 = fairness.lower.iter().map(|&l| l as u64).sum();
        if lower_sum > kappa {
            return Err(Error::invalid(
                "offline.fairness.lower",
                format!("lower bounds sum to {lower_sum} > kappa = {kappa}"),
            ));
        }
        Ok(FairnessMatroid {
            group_of: fairness.groups.clone(),
            cap: kappa * scale,
            lower: fairness.lower.iter().map(|&l| l as u64 * scale).collect(),
            upper: fairness.upper.iter().map(|&u| u as u64 * scale).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.group_of.len()
    }

    pub fn num_groups(&self) -> usize {
        self.lower.len()
    }

    /// Scaled cardinality bound `κ/ω`.
    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn group_of(&self, arm: usize) -> usize {
        self.group_of[arm]
    }

    pub fn scaled_lower(&self) -> &[u64] {
        &self.lower
    }

    pub fn scaled_upper(&self) -> &[u64] {
        &self.upper
    }

    pub fn contains(&self, set: ArmSet) -> bool {
        let mut counts = vec![0u64; self.num_groups()];
        for a in set.arms() {
            counts[self.group_of[a]] += 1;
        }
        counts.iter().zip(&self.upper).all(|(c, u)| c <= u)
            && counts.iter().zip(&self.lower).map(|(&c, &l)| c.max(l)).sum::<u64>() <= self.cap
    }
}

pub fn fairness_matroid_member(matroid: &FairnessMatroid, set: ArmSet) -> bool {
    matroid.contains(set)
}

/// Greedy over the relaxed fairness matroid using the approximate oracle
/// for the marginal gains.
pub fn greedy_fairness_bi_run(f_hat: &mut dyn ValueOracle, spec: &OfflineSpec, tie: TieBreak) -> Result<GreedyRun> {
    if spec.problem != Problem::Fsm {
        return Err(Error::Contract(format!("greedy-fairness-bi needs an FSM spec, got {:?}", spec.problem)));
    }
    let n = f_hat.ground_size();
    let matroid = spec.matroid(n)?;
    let mut run = GreedyRun::start();
    loop {
        let s = run.selected;
        let feasible: Vec<usize> = (0..n)
            .filter(|&i| !s.contains(i) && matroid.contains(s.with(i)))
            .collect();
        if feasible.is_empty() {
            return Ok(run);
        }
        let base = f_hat.value(s)?;
        let pick = argmax(feasible, tie, |i| Ok(f_hat.value(s.with(i))? - base))?.expect("non-empty");
        run.push(pick);
    }
}
