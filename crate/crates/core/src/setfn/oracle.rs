use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::armset::ArmSet;
use super::function::SetFunction;
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Fraction of epsilon used by the worst-case perturbation modes; the
/// oracle band is strict.
pub const WORST_CASE_SHRINK: f64 = 0.99;

/// Value access used by the offline algorithms.
///
/// The empty set is answered with `0` by normalization and never counts as
/// a query.
pub trait ValueOracle {
    fn ground_size(&self) -> usize;

    fn value(&mut self, set: ArmSet) -> Result<f64>;

    /// Number of distinct non-empty sets queried so far.
    fn distinct_queries(&self) -> usize;
}

/// Exact oracle over a borrowed function that records its query log.
#[derive(Debug)]
pub struct ExactOracle<'a> {
    f: &'a SetFunction,
    log: Vec<ArmSet>,
    memo: HashMap<ArmSet, f64>,
}

impl<'a> ExactOracle<'a> {
    pub fn new(f: &'a SetFunction) -> Self {
        ExactOracle {
            f,
            log: Vec::new(),
            memo: HashMap::new(),
        }
    }

    pub fn query_log(&self) -> &[ArmSet] {
        &self.log
    }
}

impl ValueOracle for ExactOracle<'_> {
    fn ground_size(&self) -> usize {
        self.f.n()
    }

    fn value(&mut self, set: ArmSet) -> Result<f64> {
        set.check(self.f.n())?;
        if set.is_empty() {
            return Ok(0.0);
        }
        if let Some(&v) = self.memo.get(&set) {
            return Ok(v);
        }
        let v = self.f.value(set);
        self.memo.insert(set, v);
        self.log.push(set);
        Ok(v)
    }

    fn distinct_queries(&self) -> usize {
        self.log.len()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbMode {
    None,
    WorstUp,
    WorstDown,
    UniformRandom,
}

impl PerturbMode {
    pub const ALL: [PerturbMode; 4] = [
        PerturbMode::None,
        PerturbMode::WorstUp,
        PerturbMode::WorstDown,
        PerturbMode::UniformRandom,
    ];
}

/// A fixed approximate oracle `f̂` with `|f̂(A) - f(A)| < epsilon`.
///
/// Each distinct set is perturbed once and memoized, so repeated queries see
/// one consistent function. Values are clamped at zero.
#[derive(Debug)]
pub struct NoisyOracle {
    base: SetFunction,
    epsilon: f64,
    mode: PerturbMode,
    rng: StreamRng,
    memo: HashMap<ArmSet, f64>,
    log: Vec<ArmSet>,
}

/// Wraps `f` in an epsilon-bounded perturbation. `seed` keys the stream used
/// by [`PerturbMode::UniformRandom`].
pub fn eps_perturb(f: &SetFunction, epsilon: f64, mode: PerturbMode, seed: u64) -> Result<NoisyOracle> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    Ok(NoisyOracle {
        base: f.clone(),
        epsilon,
        mode,
        rng: rng::stream(seed, &[], "oracle"),
        memo: HashMap::new(),
        log: Vec::new(),
    })
}

impl NoisyOracle {
    pub fn base(&self) -> &SetFunction {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mode(&self) -> PerturbMode {
        self.mode
    }

    pub fn query_log(&self) -> &[ArmSet] {
        &self.log
    }

    fn perturb(&mut self, exact: f64) -> f64 {
        let e = self.epsilon;
        if e == 0.0 {
            return exact;
        }
        let noisy = match self.mode {
            PerturbMode::None => exact,
            PerturbMode::WorstUp => exact + WORST_CASE_SHRINK * e,
            PerturbMode::WorstDown => exact - WORST_CASE_SHRINK * e,
            PerturbMode::UniformRandom => {
                let half = WORST_CASE_SHRINK * e;
                exact + self.rng.gen_range(-half..half)
            }
        };
        noisy.max(0.0)
    }
}

impl ValueOracle for NoisyOracle {
    fn ground_size(&self) -> usize {
        self.base.n()
    }

    fn value(&mut self, set: ArmSet) -> Result<f64> {
        set.check(self.base.n())?;
        if set.is_empty() {
            return Ok(0.0);
        }
        if let Some(&v) = self.memo.get(&set) {
            return Ok(v);
        }
        let v = self.perturb(self.base.value(set));
        self.memo.insert(set, v);
        self.log.push(set);
        Ok(v)
    }

    fn distinct_queries(&self) -> usize {
        self.log.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn sample_fn() -> SetFunction {
        let covers: Vec<Vec<usize>> = (0..10).map(|i| vec![i % 6, (i * 5 + 2) % 9]).collect();
        SetFunction::weighted_coverage((1..=9).map(|w| w as f64 * 0.3).collect(), &covers).unwrap()
    }

    #[test]
    fn zero_epsilon_is_exact() {
        let f = sample_fn();
        for mode in PerturbMode::ALL {
            let mut o = eps_perturb(&f, 0.0, mode, 1).unwrap();
            for s in ArmSet::all_subsets(10).step_by(7) {
                assert_eq!(o.value(s).unwrap(), f.value(s));
            }
        }
    }

    #[test]
    fn worst_up_offset() {
        let f = SetFunction::coverage(2, &[vec![0, 1]]).unwrap();
        let mut o = eps_perturb(&f, 0.1, PerturbMode::WorstUp, 0).unwrap();
        let v = o.value(ArmSet::singleton(0)).unwrap();
        assert!((v - 2.099).abs() < 1e-12, "{v}");
    }

    #[test]
    fn worst_down_clamps_at_zero() {
        let f = SetFunction::modular(vec![0.05, 1.0]).unwrap();
        let mut o = eps_perturb(&f, 0.1, PerturbMode::WorstDown, 0).unwrap();
        assert_eq!(o.value(ArmSet::singleton(0)).unwrap(), 0.0);
        assert!((o.value(ArmSet::singleton(1)).unwrap() - 0.901).abs() < 1e-12);
    }

    #[test]
    fn memoized_and_logged_once() {
        let f = sample_fn();
        let mut o = eps_perturb(&f, 0.5, PerturbMode::UniformRandom, 3).unwrap();
        let s = ArmSet::from_arms([1, 4, 7]);
        let v1 = o.value(s).unwrap();
        let v2 = o.value(s).unwrap();
        assert_eq!(v1, v2);
        o.value(ArmSet::EMPTY).unwrap();
        o.value(ArmSet::singleton(2)).unwrap();
        assert_eq!(o.query_log(), &[s, ArmSet::singleton(2)]);
        assert_eq!(o.distinct_queries(), 2);
    }

    #[test]
    fn band_is_strict_for_random_queries() {
        let f = sample_fn();
        let eps = 0.37;
        let mut pick = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (k, mode) in PerturbMode::ALL.into_iter().enumerate() {
            let mut o = eps_perturb(&f, eps, mode, k as u64).unwrap();
            for _ in 0..2_500 {
                let s = ArmSet::from_bits(pick.gen_range(0..1u32 << 10));
                let v = o.value(s).unwrap();
                assert!((v - f.value(s)).abs() < eps);
                assert!(v >= 0.0);
            }
        }
    }

    #[test]
    fn same_seed_same_values() {
        let f = sample_fn();
        let mut a = eps_perturb(&f, 0.2, PerturbMode::UniformRandom, 9).unwrap();
        let mut b = eps_perturb(&f, 0.2, PerturbMode::UniformRandom, 9).unwrap();
        for s in ArmSet::all_subsets(10).skip(1).step_by(13) {
            assert_eq!(a.value(s).unwrap().to_bits(), b.value(s).unwrap().to_bits());
        }
    }

    #[test]
    fn negative_epsilon_rejected() {
        assert!(eps_perturb(&sample_fn(), -0.1, PerturbMode::WorstUp, 0).is_err());
    }

    #[test]
    fn exact_oracle_logs_distinct_sets() {
        let f = sample_fn();
        let mut o = ExactOracle::new(&f);
        o.value(ArmSet::singleton(1)).unwrap();
        o.value(ArmSet::singleton(1)).unwrap();
        assert_eq!(o.distinct_queries(), 1);
        assert!(o.value(ArmSet::singleton(12)).is_err());
    }
}
