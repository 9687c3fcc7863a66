use rand::Rng;
use serde::{Deserialize, Serialize};

use super::armset::ArmSet;
use super::function::{instance_id, SetFunction, EXHAUSTIVE_MAX_ARMS};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// `h` with probability `mean / h`, otherwise `0`.
    BernoulliScaled,
    /// The mean itself.
    PointMass,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feedback {
    Reward,
    Cost,
}

/// Bandit feedback source: per-round draws of `f_t(A)` and `g_t(A)` in
/// `[0, h]` with means `f(A)` and `g(A)`.
#[derive(Debug, Clone)]
pub struct StochasticEnv {
    f_mean: SetFunction,
    g_mean: SetFunction,
    h: f64,
    f_dist: Distribution,
    g_dist: Distribution,
    f_rng: StreamRng,
    g_rng: StreamRng,
}

impl StochasticEnv {
    /// Streams `"f"` and `"g"` are derived from `(seed, path)`.
    pub fn new(
        f_mean: SetFunction,
        g_mean: SetFunction,
        h: f64,
        f_dist: Distribution,
        g_dist: Distribution,
        seed: u64,
        path: &[u64],
    ) -> Result<Self> {
        if f_mean.n() != g_mean.n() {
            return Err(Error::Contract(format!(
                "reward and cost functions disagree on the ground set ({} vs {} arms)",
                f_mean.n(),
                g_mean.n()
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid("h", format!("must be positive and finite, got {h}")));
        }
        for (name, f) in [("objective", &f_mean), ("constraint", &g_mean)] {
            if f.range_bound() > h {
                return Err(Error::invalid(
                    "h",
                    format!("{name} range bound {} exceeds h = {h}", f.range_bound()),
                ));
            }
            if f.n() <= EXHAUSTIVE_MAX_ARMS {
                if let Some(s) = ArmSet::all_subsets(f.n()).find(|&s| f.value(s) > h) {
                    return Err(Error::invalid("h", format!("{name}({s}) exceeds h = {h}")));
                }
            }
        }
        Ok(StochasticEnv {
            f_rng: rng::stream(seed, path, "f"),
            g_rng: rng::stream(seed, path, "g"),
            f_mean,
            g_mean,
            h,
            f_dist,
            g_dist,
        })
    }

    /// Restarts both sampling streams from `(seed, path)`.
    pub fn reseed(&mut self, seed: u64, path: &[u64]) {
        self.f_rng = rng::stream(seed, path, "f");
        self.g_rng = rng::stream(seed, path, "g");
    }

    /// Identifier of the underlying instance, see [`instance_id`].
    pub fn fingerprint(&self) -> String {
        instance_id(&self.f_mean, &self.g_mean)
    }

    pub fn n(&self) -> usize {
        self.f_mean.n()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn f_mean(&self) -> &SetFunction {
        &self.f_mean
    }

    pub fn g_mean(&self) -> &SetFunction {
        &self.g_mean
    }

    pub fn dist(&self, which: Feedback) -> Distribution {
        match which {
            Feedback::Reward => self.f_dist,
            Feedback::Cost => self.g_dist,
        }
    }

    pub fn mean(&self, set: ArmSet, which: Feedback) -> f64 {
        match which {
            Feedback::Reward => self.f_mean.value(set),
            Feedback::Cost => self.g_mean.value(set),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.f_dist == Distribution::PointMass && self.g_dist == Distribution::PointMass
    }

    /// One draw using an external generator; the environment's own streams
    /// are untouched.
    pub fn draw<R: Rng + ?Sized>(&self, set: ArmSet, which: Feedback, rng: &mut R) -> f64 {
        let mean = self.mean(set, which);
        match self.dist(which) {
            Distribution::PointMass => mean,
            Distribution::BernoulliScaled => {
                if rng.gen::<f64>() < mean / self.h {
                    self.h
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&mut self, set: ArmSet, which: Feedback) -> f64 {
        let mean = self.mean(set, which);
        let (dist, rng) = match which {
            Feedback::Reward => (self.f_dist, &mut self.f_rng),
            Feedback::Cost => (self.g_dist, &mut self.g_rng),
        };
        match dist {
            Distribution::PointMass => mean,
            Distribution::BernoulliScaled => {
                if rng.gen::<f64>() < mean / self.h {
                    self.h
                } else {
                    0.0
                }
            }
        }
    }
}

/// One independent draw of the reward or cost of `set`.
pub fn noisy_sample(env: &mut StochasticEnv, set: ArmSet, which: Feedback) -> Result<f64> {
    set.check(env.n())?;
    Ok(env.sample(set, which))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn env(dist: Distribution, seed: u64) -> StochasticEnv {
        let covers: Vec<Vec<usize>> = (0..8).map(|i| vec![i % 5, (3 * i + 1) % 7]).collect();
        let g = SetFunction::coverage(7, &covers).unwrap();
        let f = SetFunction::modular(vec![0.5; 8]).unwrap();
        StochasticEnv::new(f, g, 7.0, dist, dist, seed, &[]).unwrap()
    }

    #[test]
    fn point_mass_returns_mean() {
        let mut e = env(Distribution::PointMass, 1);
        let s = ArmSet::from_arms([1, 2, 6]);
        assert_eq!(noisy_sample(&mut e, s, Feedback::Cost).unwrap(), e.g_mean().value(s));
        assert_eq!(noisy_sample(&mut e, s, Feedback::Reward).unwrap(), 1.5);
    }

    #[test]
    fn bernoulli_support_and_mean() {
        // mean 0.25 with h = 1
        let f = SetFunction::weighted_coverage(vec![0.25, 0.75], &[vec![0], vec![1]]).unwrap();
        let mut e = StochasticEnv::new(
            f.clone(),
            f,
            1.0,
            Distribution::BernoulliScaled,
            Distribution::BernoulliScaled,
            5,
            &[],
        )
        .unwrap();
        let s = ArmSet::singleton(0);
        let draws: Vec<f64> = (0..100_000).map(|_| e.sample(s, Feedback::Reward)).collect();
        assert!(draws.iter().all(|&d| d == 0.0 || d == 1.0));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.25).abs() < 0.01, "{mean}");
    }

    #[test]
    fn unbiased_across_random_actions() {
        let mut e = env(Distribution::BernoulliScaled, 2);
        let h = e.h();
        let mut pick = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let samples = 10_000;
        let tol = 4.0 * h / ((samples * 2) as f64).sqrt();
        for _ in 0..50 {
            let s = ArmSet::from_bits(pick.gen_range(0..256));
            let mean = (0..samples).map(|_| e.sample(s, Feedback::Cost)).sum::<f64>() / samples as f64;
            assert!((mean - e.g_mean().value(s)).abs() <= tol);
        }
    }

    #[test]
    fn seeded_sequences_are_identical() {
        let mut a = env(Distribution::BernoulliScaled, 77);
        let mut b = env(Distribution::BernoulliScaled, 77);
        let s = ArmSet::from_arms([0, 3]);
        for _ in 0..500 {
            assert_eq!(
                a.sample(s, Feedback::Cost).to_bits(),
                b.sample(s, Feedback::Cost).to_bits()
            );
        }
    }

    #[test]
    fn rejects_h_below_range() {
        let g = SetFunction::coverage(3, &[vec![0, 1, 2]]).unwrap();
        let f = SetFunction::modular(vec![1.0]).unwrap();
        assert!(StochasticEnv::new(f, g, 2.0, Distribution::PointMass, Distribution::PointMass, 0, &[]).is_err());
    }
}
