use serde::{Deserialize, Serialize};

use super::armset::{ArmSet, MAX_ARMS};
use crate::error::{Error, Result};

/// Largest ground set for which exhaustive structure checks are run.
pub const EXHAUSTIVE_MAX_ARMS: usize = 12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetFnKind {
    Coverage,
    WeightedCoverage,
    Modular,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub monotone: bool,
    pub submodular: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Body {
    /// `coverers[e]` is the mask of arms covering element `e`.
    Coverage { weights: Vec<f64>, coverers: Vec<u32> },
    Modular { costs: Vec<f64> },
}

/// A deterministic, normalized set function over `n` arms.
#[derive(Clone, Debug, PartialEq)]
pub struct SetFunction {
    n: usize,
    kind: SetFnKind,
    body: Body,
    cap: Option<f64>,
    range_bound: f64,
    flags: Flags,
}

const COVERAGE_FLAGS: Flags = Flags {
    monotone: true,
    submodular: true,
};

impl SetFunction {
    /// Unit-weight coverage: `f(A)` counts the universe elements covered by `A`.
    pub fn coverage(universe: usize, covers: &[Vec<usize>]) -> Result<Self> {
        if universe == 0 {
            return Err(Error::invalid("payload.universe", "universe is empty"));
        }
        Self::build_coverage(SetFnKind::Coverage, vec![1.0; universe], covers)
    }

    pub fn weighted_coverage(weights: Vec<f64>, covers: &[Vec<usize>]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("payload.weights", "universe is empty"));
        }
        for (e, w) in weights.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::invalid(
                    format!("payload.weights[{e}]"),
                    format!("weight must be positive and finite, got {w}"),
                ));
            }
        }
        Self::build_coverage(SetFnKind::WeightedCoverage, weights, covers)
    }

    fn build_coverage(kind: SetFnKind, weights: Vec<f64>, covers: &[Vec<usize>]) -> Result<Self> {
        let n = covers.len();
        check_arity(n, "payload.covers")?;
        let mut coverers = vec![0u32; weights.len()];
        for (arm, elems) in covers.iter().enumerate() {
            if elems.is_empty() {
                return Err(Error::invalid(format!("payload.covers[{arm}]"), "arm covers no element"));
            }
            for &e in elems {
                if e >= weights.len() {
                    return Err(Error::invalid(
                        format!("payload.covers[{arm}]"),
                        format!("element {e} outside universe of size {}", weights.len()),
                    ));
                }
                coverers[e] |= 1 << arm;
            }
        }
        let mut f = SetFunction {
            n,
            kind,
            body: Body::Coverage { weights, coverers },
            cap: None,
            range_bound: 0.0,
            flags: COVERAGE_FLAGS,
        };
        f.range_bound = f.value(ArmSet::full(n));
        Ok(f)
    }

    /// Additive cost `f(A) = sum of per-arm costs`.
    pub fn modular(costs: Vec<f64>) -> Result<Self> {
        let n = costs.len();
        check_arity(n, "payload.costs")?;
        for (i, c) in costs.iter().enumerate() {
            if !(c.is_finite() && *c > 0.0) {
                return Err(Error::invalid(
                    format!("payload.costs[{i}]"),
                    format!("cost must be positive and finite, got {c}"),
                ));
            }
        }
        let mut f = SetFunction {
            n,
            kind: SetFnKind::Modular,
            body: Body::Modular { costs },
            cap: None,
            range_bound: 0.0,
            flags: COVERAGE_FLAGS,
        };
        f.range_bound = f.value(ArmSet::full(n));
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> SetFnKind {
        self.kind
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn range_bound(&self) -> f64 {
        self.range_bound
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    /// True for an uncapped modular function.
    pub fn is_modular(&self) -> bool {
        self.kind == SetFnKind::Modular && self.cap.is_none()
    }

    /// Per-arm costs of a modular function.
    pub fn costs(&self) -> Option<&[f64]> {
        match &self.body {
            Body::Modular { costs } => Some(costs),
            Body::Coverage { .. } => None,
        }
    }

    /// Checked evaluation.
    pub fn eval(&self, set: ArmSet) -> Result<f64> {
        set.check(self.n)?;
        Ok(self.value(set))
    }

    /// Evaluation without the range check; `set` must lie in the ground set.
    pub fn value(&self, set: ArmSet) -> f64 {
        debug_assert!(set.check(self.n).is_ok());
        let raw: f64 = match &self.body {
            Body::Coverage { weights, coverers } => coverers
                .iter()
                .zip(weights)
                .filter(|(mask, _)| *mask & set.bits() != 0)
                .map(|(_, w)| w)
                .sum(),
            Body::Modular { costs } => set.arms().map(|a| costs[a]).sum(),
        };
        match self.cap {
            Some(k) => raw.min(k),
            None => raw,
        }
    }

    pub fn singleton(&self, arm: usize) -> f64 {
        self.value(ArmSet::singleton(arm))
    }

    /// `f(A ∪ {x}) - f(A)` for `x ∉ A`.
    pub fn marginal_gain(&self, set: ArmSet, arm: usize) -> Result<f64> {
        set.check(self.n)?;
        if arm >= self.n {
            return Err(Error::OutOfRange { arm, n: self.n });
        }
        if set.contains(arm) {
            return Err(Error::domain(format!("arm {arm} already belongs to {set}")));
        }
        Ok(self.value(set.with(arm)) - self.value(set))
    }

    /// `min(f(·), kappa)`, which stays monotone and submodular.
    pub fn threshold_cap(&self, kappa: f64) -> Result<SetFunction> {
        if !(kappa >= 0.0) {
            return Err(Error::domain(format!("threshold must be non-negative, got {kappa}")));
        }
        let mut capped = self.clone();
        capped.cap = Some(self.cap.map_or(kappa, |c| c.min(kappa)));
        capped.range_bound = self.range_bound.min(kappa);
        Ok(capped)
    }
}

fn check_arity(n: usize, field: &str) -> Result<()> {
    if n == 0 || n > MAX_ARMS {
        return Err(Error::invalid(field, format!("needs 1..={MAX_ARMS} arms, got {n}")));
    }
    Ok(())
}

/// Verifies normalization, range, and the flagged monotonicity and
/// submodularity inequalities over every `A ⊆ B`, `x ∉ B`.
pub fn check_structure_exhaustive(f: &SetFunction) -> Result<()> {
    let n = f.n();
    if n > EXHAUSTIVE_MAX_ARMS {
        return Err(Error::Capability(format!(
            "exhaustive checks need n <= {EXHAUSTIVE_MAX_ARMS}, got {n}"
        )));
    }
    let values: Vec<f64> = ArmSet::all_subsets(n).map(|s| f.value(s)).collect();
    if values[0] != 0.0 {
        return Err(Error::InvariantViolation(format!("f(∅) = {}", values[0])));
    }
    let tol = 1e-9 * f.range_bound().max(1.0);
    for (mask, &v) in values.iter().enumerate() {
        if v < 0.0 || v > f.range_bound() + tol {
            return Err(Error::InvariantViolation(format!(
                "f({}) = {v} outside [0, {}]",
                ArmSet::from_bits(mask as u32),
                f.range_bound()
            )));
        }
    }
    let full = (1u32 << n) - 1;
    for b in 0..=full {
        // every submask a of b
        let mut a = b;
        loop {
            if f.flags().monotone && values[a as usize] > values[b as usize] + tol {
                return Err(Error::InvariantViolation(format!(
                    "monotonicity fails for {} ⊆ {}",
                    ArmSet::from_bits(a),
                    ArmSet::from_bits(b)
                )));
            }
            if f.flags().submodular {
                for x in ArmSet::from_bits(full & !b).arms() {
                    let ga = values[(a | 1 << x) as usize] - values[a as usize];
                    let gb = values[(b | 1 << x) as usize] - values[b as usize];
                    if ga + tol < gb {
                        return Err(Error::InvariantViolation(format!(
                            "submodularity fails for {} ⊆ {}, x = {x}",
                            ArmSet::from_bits(a),
                            ArmSet::from_bits(b)
                        )));
                    }
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    Ok(())
}

/// Short content hash of an `(f, g)` pair, used to check that a trace and
/// an optimum describe the same instance.
pub fn instance_id(f: &SetFunction, g: &SetFunction) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(format!("{f:?}|{g:?}").as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
