//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes and returns JSON strings so the page can stay plain
//! JavaScript. The `*_json` functions are the native entry points; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use bicrit::eval::{opt_for_spec, theoretical_bound};
use bicrit::offline::{certify, OfflineSpec, Problem, ResilienceCert, Sense};
use bicrit::online::{confidence_radius, exploration_reps, run_bicriteria_cmab, Phase, RunConfig};
use bicrit::setfn::{
    build_instance, eps_perturb, ArmSet, Distribution, GroundSet, InstanceDescription, PerturbMode, StochasticEnv,
    ValueOracle,
};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

const BOUND_CONSTANT: f64 = 3.0;
const MAX_CURVE_POINTS: usize = 400;

/// What the page sends: an instance, the offline problem and the noise on
/// the learned side.
#[derive(Deserialize)]
pub struct Scenario {
    pub instance: InstanceDescription,
    pub offline: OfflineSpec,
    #[serde(default = "bernoulli")]
    pub noise: Distribution,
}

fn describe(ground: &GroundSet, s: ArmSet) -> String {
    let names: Vec<String> = s.arms().map(|a| ground.label(a)).collect();
    format!("{{{}}}", names.join(", "))
}

fn bernoulli() -> Distribution {
    Distribution::BernoulliScaled
}

/// The instance's certificate `(α, β, δ, N, ε cap)` and any warnings.
pub fn certificate_json(scenario: &str) -> Result<String, String> {
    let sc: Scenario = serde_json::from_str(scenario).map_err(|e| e.to_string())?;
    let inst = build_instance(&sc.instance).map_err(|e| e.to_string())?;
    sc.offline.validate(inst.ground.n()).map_err(|e| e.to_string())?;
    let cert = certify(&sc.offline, &inst).map_err(|e| e.to_string())?;
    serde_json::to_string(&serde_json::json!({ "cert": cert.cert, "h": inst.h, "warnings": cert.warnings }))
        .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SchedulePoint {
    horizon: u64,
    m: u64,
    rad: f64,
    explore_share: f64,
    bound: f64,
}

/// `m`, the confidence radius, the exploration share `min(N m, T) / T` and
/// the reference bound at `T = 2^4 .. 2^max_log2`.
pub fn schedule_json(delta: f64, n_calls: u64, h: f64, max_log2: u32) -> Result<String, String> {
    if !(4..=40).contains(&max_log2) {
        return Err(format!("max_log2 must lie in 4..=40, got {max_log2}"));
    }
    let cert = ResilienceCert {
        alpha: 1.0,
        beta: 1.0,
        delta,
        n_calls,
        sense: Sense::Max,
        epsilon_cap: None,
    };
    let mut points = Vec::new();
    for k in 4..=max_log2 {
        let horizon = 1u64 << k;
        let m = exploration_reps(delta, horizon, n_calls).map_err(|e| e.to_string())?;
        points.push(SchedulePoint {
            horizon,
            m,
            rad: confidence_radius(h, horizon, m).map_err(|e| e.to_string())?,
            explore_share: (n_calls.saturating_mul(m)).min(horizon) as f64 / horizon as f64,
            bound: theoretical_bound(&cert, h, horizon, BOUND_CONSTANT).map_err(|e| e.to_string())?,
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Simulation {
    m: u64,
    alpha: f64,
    beta: f64,
    delta: f64,
    n_calls: u64,
    queries: Vec<String>,
    committed: String,
    opt_set: String,
    budget_exhausted: bool,
    explore_rounds: usize,
    /// Round index, cumulative regret, cumulative constraint violation.
    curve: Vec<(u64, f64, f64)>,
    bound: f64,
    warnings: Vec<String>,
}

/// One online run, reported as a downsampled cumulative regret/CCV curve.
/// `m_override = 0` uses the certificate's schedule.
pub fn simulate_json(scenario: &str, horizon: u64, seed: u64, m_override: u64) -> Result<String, String> {
    let sc: Scenario = serde_json::from_str(scenario).map_err(|e| e.to_string())?;
    let inst = build_instance(&sc.instance).map_err(|e| e.to_string())?;
    sc.offline.validate(inst.ground.n()).map_err(|e| e.to_string())?;
    let cert = certify(&sc.offline, &inst).map_err(|e| e.to_string())?;
    let opt = opt_for_spec(&sc.offline, &inst.objective, &inst.constraint).map_err(|e| e.to_string())?;
    let (fd, gd) = match sc.offline.problem {
        Problem::Fsm => (sc.noise, Distribution::PointMass),
        Problem::Sc | Problem::Scsc => (Distribution::PointMass, sc.noise),
    };
    let env = StochasticEnv::new(inst.objective.clone(), inst.constraint.clone(), inst.h, fd, gd, 0, &[])
        .map_err(|e| e.to_string())?;
    let c = cert.cert.clone();
    let trace = run_bicriteria_cmab(RunConfig {
        horizon,
        cert: c.clone(),
        env,
        offline: sc.offline.clone(),
        seed,
        m_override: (m_override > 0).then_some(m_override),
    })
    .map_err(|e| e.to_string())?;

    let step = trace.rounds.len().div_ceil(MAX_CURVE_POINTS).max(1);
    let (f_star, kappa) = (opt.opt_objective, sc.offline.kappa);
    let (mut sf, mut sg) = (0.0, 0.0);
    let mut curve = Vec::new();
    for r in &trace.rounds {
        sf += r.sampled_f;
        sg += r.sampled_g;
        let t = r.t as f64;
        if r.t % step as u64 == 0 || r.t == horizon {
            let (reg, ccv) = match c.sense {
                Sense::Max => (c.alpha * t * f_star - sf, sg - c.beta * t * kappa),
                Sense::Min => (sf - c.alpha * t * f_star, c.beta * t * kappa - sg),
            };
            curve.push((r.t, reg, ccv));
        }
    }
    let out = Simulation {
        m: trace.m,
        alpha: c.alpha,
        beta: c.beta,
        delta: c.delta,
        n_calls: c.n_calls,
        queries: trace.queries.iter().map(|q| describe(&inst.ground, *q)).collect(),
        committed: describe(&inst.ground, trace.committed),
        opt_set: describe(&inst.ground, opt.opt_set),
        budget_exhausted: trace.budget_exhausted,
        explore_rounds: trace.rounds.iter().filter(|r| r.phase == Phase::Explore).count(),
        curve,
        bound: theoretical_bound(&c, inst.h, horizon, BOUND_CONSTANT).map_err(|e| e.to_string())?,
        warnings: trace.warnings,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Step {
    set: String,
    f: f64,
    g: f64,
    /// What the perturbed oracle reported for the learned side.
    seen: f64,
}

#[derive(Serialize)]
struct GreedyReport {
    steps: Vec<Step>,
    queries: usize,
    n_calls: u64,
    epsilon: f64,
}

/// The offline greedy's chain of selections against an `epsilon`-perturbed
/// oracle. `mode` is one of `none`, `worst-up`, `worst-down`,
/// `uniform-random`.
pub fn greedy_steps_json(scenario: &str, epsilon: f64, mode: &str, seed: u64) -> Result<String, String> {
    let sc: Scenario = serde_json::from_str(scenario).map_err(|e| e.to_string())?;
    let mode: PerturbMode = serde_json::from_value(serde_json::Value::String(mode.into())).map_err(|e| e.to_string())?;
    let inst = build_instance(&sc.instance).map_err(|e| e.to_string())?;
    sc.offline.validate(inst.ground.n()).map_err(|e| e.to_string())?;
    let cert = certify(&sc.offline, &inst).map_err(|e| e.to_string())?;
    let (known, learned) = match sc.offline.problem {
        Problem::Fsm => (&inst.constraint, &inst.objective),
        Problem::Sc | Problem::Scsc => (&inst.objective, &inst.constraint),
    };
    let mut oracle = eps_perturb(learned, epsilon, mode, seed).map_err(|e| e.to_string())?;
    let run = sc.offline.run(known, &mut oracle).map_err(|e| e.to_string())?;
    let queries = oracle.distinct_queries();
    let mut steps = Vec::with_capacity(run.chain.len());
    for &s in &run.chain {
        let seen = oracle.value(s).map_err(|e| e.to_string())?;
        steps.push(Step {
            set: describe(&inst.ground, s),
            f: inst.objective.value(s),
            g: inst.constraint.value(s),
            seen,
        });
    }
    let report = GreedyReport {
        steps,
        queries,
        n_calls: cert.cert.n_calls,
        epsilon,
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn certificate(scenario: &str) -> Result<String, JsValue> {
    certificate_json(scenario).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn schedule(delta: f64, n_calls: u32, h: f64, max_log2: u32) -> Result<String, JsValue> {
    schedule_json(delta, n_calls as u64, h, max_log2).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(scenario: &str, horizon: u32, seed: u32, m_override: u32) -> Result<String, JsValue> {
    simulate_json(scenario, horizon as u64, seed as u64, m_override as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn greedy_steps(scenario: &str, epsilon: f64, mode: &str, seed: u32) -> Result<String, JsValue> {
    greedy_steps_json(scenario, epsilon, mode, seed as u64).map_err(|e| JsValue::from_str(&e))
}
