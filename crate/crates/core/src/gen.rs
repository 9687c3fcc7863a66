//! Random desk-scale instances for property tests, acceptance runs and the
//! demo.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::offline::{Fairness, FairnessMatroid, OfflineSpec, Problem, TieBreak};
use crate::setfn::{ArmSet, GroundSet, Instance, SetFunction};

/// An instance together with the offline spec it is meant for. `f` is the
/// objective (cost for the cover problems), `g` the constraint.
#[derive(Clone, Debug)]
pub struct Generated {
    pub f: SetFunction,
    pub g: SetFunction,
    pub spec: OfflineSpec,
}

impl Generated {
    pub fn n(&self) -> usize {
        self.f.n()
    }

    /// The instance with `h` set to the larger range bound.
    pub fn instance(&self) -> Instance {
        Instance {
            ground: GroundSet::new(self.n(), None).expect("1..=30 arms"),
            objective: self.f.clone(),
            constraint: self.g.clone(),
            h: self.f.range_bound().max(self.g.range_bound()),
        }
    }
}

/// Each arm covers every element independently with probability `p`, and at
/// least one element.
pub fn random_covers<R: Rng + ?Sized>(rng: &mut R, n: usize, universe: usize, p: f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| {
            let mut c: Vec<usize> = (0..universe).filter(|_| rng.gen_bool(p)).collect();
            if c.is_empty() {
                c.push(rng.gen_range(0..universe));
            }
            c
        })
        .collect()
}

/// Submodular cover: integer costs in `1..=5`, random unit-weight coverage,
/// `κ = 0.6 g(Ω)`, `ω = κ/4`.
pub fn random_sc<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Generated {
    let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=5) as f64).collect();
    let universe = rng.gen_range(n..=2 * n);
    let g = SetFunction::coverage(universe, &random_covers(rng, n, universe, 0.3)).expect("valid coverage");
    let kappa = 0.6 * g.range_bound();
    Generated {
        f: SetFunction::modular(costs).expect("positive costs"),
        g,
        spec: OfflineSpec {
            problem: Problem::Sc,
            kappa,
            omega: kappa / 4.0,
            fairness: None,
            tie_break: TieBreak::LowestIndex,
        },
    }
}

/// Submodular-cost cover: the cost is a weighted coverage of shared
/// resources, the utility a unit-weight coverage, `κ = 0.6 g(Ω)`.
pub fn random_scsc<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Generated {
    let resources = rng.gen_range(n..=2 * n);
    let weights: Vec<f64> = (0..resources).map(|_| rng.gen_range(0.5..3.0)).collect();
    let f = SetFunction::weighted_coverage(weights, &random_covers(rng, n, resources, 0.25)).expect("valid cost");
    let universe = rng.gen_range(n..=2 * n);
    let g = SetFunction::coverage(universe, &random_covers(rng, n, universe, 0.3)).expect("valid coverage");
    let kappa = 0.6 * g.range_bound();
    Generated {
        f,
        g,
        spec: OfflineSpec {
            problem: Problem::Scsc,
            kappa,
            omega: kappa / 4.0,
            fairness: None,
            tie_break: TieBreak::LowestIndex,
        },
    }
}

/// Largest member of `m`, by enumeration.
pub fn matroid_rank(m: &FairnessMatroid) -> usize {
    ArmSet::all_subsets(m.n()).filter(|&s| m.contains(s)).map(|s| s.len()).max().unwrap_or(0)
}

/// A random fairness partition with bounds.
pub fn random_fairness<R: Rng + ?Sized>(rng: &mut R, n: usize, groups: usize, kappa: u32) -> Fairness {
    let mut labels: Vec<usize> = (0..n).map(|i| i % groups).collect();
    labels.shuffle(rng);
    let mut lower = vec![0u32; groups];
    let mut upper = vec![0u32; groups];
    for c in 0..groups {
        let size = labels.iter().filter(|&&l| l == c).count() as u32;
        upper[c] = rng.gen_range(0..=size);
        lower[c] = rng.gen_range(0..=upper[c]);
    }
    while lower.iter().sum::<u32>() > kappa {
        let c = lower.iter().position(|&l| l > 0).expect("positive sum");
        lower[c] -= 1;
    }
    Fairness {
        groups: labels,
        lower,
        upper,
    }
}

/// Fair maximization with a weighted-coverage objective and unit
/// cardinality constraint. Resamples until a size-κ member of the exact
/// matroid exists and the relaxed matroid has rank `κ/ω`.
pub fn random_fsm<R: Rng + ?Sized>(rng: &mut R, n: usize, omega: f64) -> Generated {
    loop {
        let kappa = rng.gen_range(1..=n.min(4)) as u32;
        let groups = rng.gen_range(2..=3.min(n));
        let fairness = random_fairness(rng, n, groups, kappa);
        let k = kappa as f64;
        let (Ok(m1), Ok(mw)) = (
            FairnessMatroid::new(&fairness, n, k, 1.0),
            FairnessMatroid::new(&fairness, n, k, omega),
        ) else {
            continue;
        };
        if !ArmSet::all_subsets(n).any(|s| s.len() == kappa as usize && m1.contains(s)) {
            continue;
        }
        if matroid_rank(&mw) as u64 != mw.cap() {
            continue;
        }
        let universe = rng.gen_range(n..=2 * n);
        let weights: Vec<f64> = (0..universe).map(|_| rng.gen_range(0.5..2.0)).collect();
        let f = SetFunction::weighted_coverage(weights, &random_covers(rng, n, universe, 0.25)).expect("valid objective");
        return Generated {
            f,
            g: SetFunction::modular(vec![1.0; n]).expect("unit costs"),
            spec: OfflineSpec {
                problem: Problem::Fsm,
                kappa: k,
                omega,
                fairness: Some(fairness),
                tie_break: TieBreak::LowestIndex,
            },
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn generated_specs_validate() {
        let mut r = rng::stream(5, &[], "gen");
        for n in 3..=10 {
            for g in [random_sc(&mut r, n), random_scsc(&mut r, n)] {
                g.spec.validate(n).unwrap();
            }
            for omega in [1.0, 0.5, 1.0 / 3.0] {
                let g = random_fsm(&mut r, n, omega);
                g.spec.validate(n).unwrap();
            }
        }
    }
}
