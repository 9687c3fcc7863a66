use std::collections::HashSet;

use bicrit::gen::{random_fsm, random_sc, random_scsc, Generated};
use bicrit::offline::{certify, Problem};
use bicrit::online::{learned_side, run_bicriteria_cmab, Phase, RunConfig};
use bicrit::rng;
use bicrit::Error;
use bicrit::setfn::{Distribution, ExactOracle, StochasticEnv};
use proptest::prelude::*;

fn config(g: &Generated, dist: Distribution, horizon: u64, seed: u64, m: Option<u64>) -> RunConfig {
    let inst = g.instance();
    let cert = certify(&g.spec, &inst).unwrap().cert;
    // The side the algorithm learns is stochastic; the other is known.
    let (f_dist, g_dist) = match g.spec.problem {
        Problem::Fsm => (dist, Distribution::PointMass),
        _ => (Distribution::PointMass, dist),
    };
    let env = StochasticEnv::new(inst.objective, inst.constraint, inst.h, f_dist, g_dist, 0, &[]).unwrap();
    RunConfig {
        horizon,
        cert,
        env,
        offline: g.spec.clone(),
        seed,
        m_override: m,
    }
}

fn generate(kind: u8, seed: u64, n: usize) -> Generated {
    let mut r = rng::stream(seed, &[], "online");
    match kind {
        0 => random_sc(&mut r, n),
        1 => random_scsc(&mut r, n),
        _ => random_fsm(&mut r, n, 0.5),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phase_accounting(kind in 0u8..3, seed in any::<u64>(), n in 2usize..=8, m in 1u64..=40, t in 50u64..3000) {
        let g = generate(kind, seed, n);
        let run = run_bicriteria_cmab(config(&g, Distribution::BernoulliScaled, t, seed, Some(m)));
        // With few samples the noisy greedy can legitimately find no cover.
        prop_assume!(!matches!(run.as_ref().map_err(|e| e.root()), Err(Error::Infeasible(_))));
        let trace = run.unwrap();
        trace.check_structure().unwrap();
        prop_assert_eq!(trace.rounds.len() as u64, t);
        prop_assert_eq!(trace.explore_rounds() + trace.exploit_rounds(), t as usize);
        let allowed: HashSet<_> = trace.queries.iter().copied().chain([trace.committed]).collect();
        for r in &trace.rounds {
            prop_assert!(allowed.contains(&r.action) || (trace.budget_exhausted && r.phase == Phase::Explore));
            prop_assert!(r.sampled_f >= 0.0 && r.sampled_f <= g.instance().h);
            prop_assert!(r.sampled_g >= 0.0 && r.sampled_g <= g.instance().h);
        }
        if !trace.budget_exhausted {
            prop_assert_eq!(trace.explore_rounds() as u64, m * trace.queries.len() as u64);
        }
    }

    #[test]
    fn zero_noise_collapse(kind in 0u8..3, seed in any::<u64>(), n in 2usize..=10) {
        let g = generate(kind, seed, n);
        let cfg = config(&g, Distribution::PointMass, 4 * (n * n) as u64 + 10, seed, Some(2));
        let (known, learned) = match g.spec.problem {
            Problem::Fsm => (&g.g, &g.f),
            _ => (&g.f, &g.g),
        };
        let mut o = ExactOracle::new(learned);
        let direct = g.spec.run(known, &mut o).unwrap().selected;
        let trace = run_bicriteria_cmab(cfg).unwrap();
        prop_assert!(!trace.budget_exhausted);
        prop_assert_eq!(trace.committed, direct);
        prop_assert_eq!(&trace.queries[..], o.query_log());
    }

    #[test]
    fn identical_configs_identical_traces(kind in 0u8..3, seed in any::<u64>(), n in 2usize..=6) {
        let g = generate(kind, seed, n);
        let a = run_bicriteria_cmab(config(&g, Distribution::BernoulliScaled, 700, seed, Some(5)));
        let b = run_bicriteria_cmab(config(&g, Distribution::BernoulliScaled, 700, seed, Some(5)));
        prop_assert_eq!(a, b);
    }
}

#[test]
fn learned_sides() {
    use bicrit::setfn::Feedback;
    assert_eq!(learned_side(Problem::Sc), Feedback::Cost);
    assert_eq!(learned_side(Problem::Fsm), Feedback::Reward);
}

#[test]
fn clean_event_frequency() {
    let g = generate(2, 99, 5);
    let horizon = 2048;
    let runs = 1000u64;
    let mut clean = 0;
    let mut n_calls = 0;
    for seed in 0..runs {
        let cfg = config(&g, Distribution::BernoulliScaled, horizon, seed, None);
        n_calls = cfg.cert.n_calls;
        let env = cfg.env.clone();
        let trace = run_bicriteria_cmab(cfg).unwrap();
        assert!(!trace.budget_exhausted);
        if trace.clean_event(&env).unwrap() {
            clean += 1;
        }
    }
    let p = 1.0 - 4.0 * n_calls as f64 / horizon as f64;
    let slack = 3.0 * (p * (1.0 - p) / runs as f64).sqrt();
    let rate = clean as f64 / runs as f64;
    assert!(rate >= p - slack, "rate {rate} < {p} - {slack}");
}
