//! Ground truth: brute-force optima, realized regret and constraint
//! violation, reference bound curves, concentration estimates, log-log fits
//! and numeric witnesses for the cover analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offline::{Certification, FairnessMatroid, OfflineSpec, Problem, ResilienceCert, Sense};
use crate::online::{confidence_radius, Phase, RunTrace};
use crate::rng;
use crate::setfn::{eps_perturb, instance_id, ArmSet, Feedback, PerturbMode, SetFunction, StochasticEnv, ValueOracle};

/// Largest ground set [`brute_force_opt`] will enumerate.
pub const BRUTE_FORCE_MAX_ARMS: usize = 22;

/// Feasible family for the optimum.
#[derive(Clone, Copy, Debug)]
pub enum Feasibility<'a> {
    /// `g(A) <= κ`.
    AtMost,
    /// `g(A) >= κ`.
    AtLeast,
    /// Members of the given matroid with exactly `κ` elements.
    Matroid(&'a FairnessMatroid),
}

/// Subset enumeration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Enumeration {
    Forward,
    Gray,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub opt_set: ArmSet,
    pub opt_objective: f64,
    pub feasible_count: u64,
    pub sense: Sense,
    pub instance_id: String,
}

pub fn brute_force_opt(f: &SetFunction, g: &SetFunction, kappa: f64, sense: Sense, feas: Feasibility) -> Result<OptResult> {
    brute_force_opt_with(f, g, kappa, sense, feas, Enumeration::Forward)
}

/// Exhaustive optimum; among equal objectives the numerically lowest mask
/// wins regardless of the enumeration order.
pub fn brute_force_opt_with(
    f: &SetFunction,
    g: &SetFunction,
    kappa: f64,
    sense: Sense,
    feas: Feasibility,
    order: Enumeration,
) -> Result<OptResult> {
    let n = f.n();
    if g.n() != n {
        return Err(Error::Contract(format!("objective has {n} arms, constraint has {}", g.n())));
    }
    if n > BRUTE_FORCE_MAX_ARMS {
        return Err(Error::Capability(format!(
            "brute force is capped at {BRUTE_FORCE_MAX_ARMS} arms, got {n}"
        )));
    }
    if let Feasibility::Matroid(m) = feas {
        if m.n() != n {
            return Err(Error::Contract(format!("matroid has {} arms, instance has {n}", m.n())));
        }
    }
    let feasible = |s: ArmSet| match feas {
        Feasibility::AtMost => g.value(s) <= kappa,
        Feasibility::AtLeast => g.value(s) >= kappa,
        Feasibility::Matroid(m) => s.len() as f64 == kappa && m.contains(s),
    };
    let better = |v: f64, s: ArmSet, best: Option<(ArmSet, f64)>| match best {
        None => true,
        Some((bs, bv)) => {
            let strictly = match sense {
                Sense::Max => v > bv,
                Sense::Min => v < bv,
            };
            strictly || (v == bv && s.bits() < bs.bits())
        }
    };
    let mut best: Option<(ArmSet, f64)> = None;
    let mut count = 0u64;
    let total = 1u64 << n;
    for i in 0..total {
        let bits = match order {
            Enumeration::Forward => i,
            Enumeration::Gray => i ^ (i >> 1),
        };
        let s = ArmSet::from_bits(bits as u32);
        if !feasible(s) {
            continue;
        }
        count += 1;
        let v = f.value(s);
        if better(v, s, best) {
            best = Some((s, v));
        }
    }
    let (opt_set, opt_objective) = best.ok_or_else(|| Error::Infeasible("no subset satisfies the constraint".into()))?;
    Ok(OptResult {
        opt_set,
        opt_objective,
        feasible_count: count,
        sense,
        instance_id: instance_id(f, g),
    })
}

/// Optimum for the problem an offline spec describes: the cheapest cover
/// for SC/SCSC, the best size-κ member of the unrelaxed fairness matroid
/// for FSM.
pub fn opt_for_spec(spec: &OfflineSpec, f: &SetFunction, g: &SetFunction) -> Result<OptResult> {
    match spec.problem {
        Problem::Sc | Problem::Scsc => brute_force_opt(f, g, spec.kappa, Sense::Min, Feasibility::AtLeast),
        Problem::Fsm => {
            let fairness = spec
                .fairness
                .as_ref()
                .ok_or_else(|| Error::invalid("offline.fairness", "FSM needs a fairness partition"))?;
            let m1 = FairnessMatroid::new(fairness, f.n(), spec.kappa, 1.0)?;
            brute_force_opt(f, g, spec.kappa, Sense::Max, Feasibility::Matroid(&m1))
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parts {
    pub regret_f: f64,
    pub ccv_g: f64,
    pub rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub regret_f: f64,
    pub ccv_g: f64,
    pub explore_part: Parts,
    pub exploit_part: Parts,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub sense: Sense,
}

/// Realized regret and constraint violation of a trace.
///
/// Max sense: `α T f(OPT) - Σ f_t` and `Σ g_t - β T κ`. Min sense:
/// `Σ f_t - α T f(OPT)` and `β T κ - Σ g_t`. Values are not clamped. Totals
/// are defined as the sum of the explore and exploit parts.
pub fn regret_ccv(trace: &RunTrace, opt: &OptResult, cert: &ResilienceCert, kappa: f64, env: &StochasticEnv) -> Result<RegretReport> {
    let env_id = env.fingerprint();
    if trace.instance_id != env_id || opt.instance_id != env_id {
        return Err(Error::Contract(format!(
            "instance mismatch: trace {}, optimum {}, environment {env_id}",
            trace.instance_id, opt.instance_id
        )));
    }
    if opt.sense != cert.sense {
        return Err(Error::Contract(format!(
            "optimum is {:?}-sense but the certificate is {:?}-sense",
            opt.sense, cert.sense
        )));
    }
    Ok(regret_from_rounds(trace, opt.opt_objective, cert, kappa))
}

fn regret_from_rounds(trace: &RunTrace, f_opt: f64, cert: &ResilienceCert, kappa: f64) -> RegretReport {
    let part = |phase: Phase| {
        let (mut sf, mut sg, mut k) = (0.0, 0.0, 0u64);
        for r in trace.rounds.iter().filter(|r| r.phase == phase) {
            sf += r.sampled_f;
            sg += r.sampled_g;
            k += 1;
        }
        let f_base = cert.alpha * k as f64 * f_opt;
        let g_base = cert.beta * k as f64 * kappa;
        let (regret_f, ccv_g) = match cert.sense {
            Sense::Max => (f_base - sf, sg - g_base),
            Sense::Min => (sf - f_base, g_base - sg),
        };
        Parts {
            regret_f,
            ccv_g,
            rounds: k,
        }
    };
    let explore = part(Phase::Explore);
    let exploit = part(Phase::Exploit);
    RegretReport {
        regret_f: explore.regret_f + exploit.regret_f,
        ccv_g: explore.ccv_g + exploit.ccv_g,
        explore_part: explore,
        exploit_part: exploit,
        alpha: cert.alpha,
        beta: cert.beta,
        kappa,
        sense: cert.sense,
    }
}

/// Reference curve `C δ^{2/3} h N^{1/3} T^{2/3} (ln T)^{1/3}`.
pub fn theoretical_bound(cert: &ResilienceCert, h: f64, horizon: u64, c: f64) -> Result<f64> {
    if horizon < 2 {
        return Err(Error::domain(format!("horizon must be at least 2, got {horizon}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain(format!("C must be positive, got {c}")));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("h must be positive, got {h}")));
    }
    if !(cert.delta.is_finite() && cert.delta > 0.0) || cert.n_calls == 0 {
        return Err(Error::domain("certificate needs delta > 0 and N >= 1"));
    }
    let t = horizon as f64;
    Ok(c * cert.delta.powf(2.0 / 3.0) * h * (cert.n_calls as f64).cbrt() * t.powf(2.0 / 3.0) * t.ln().cbrt())
}

/// Monte-Carlo estimate of the probability that every query's `m`-sample
/// means of `f` and `g` lie strictly within `confidence_radius(h, T, m)`.
/// Trial `i` draws from its own stream keyed by `(seed, [i])`.
pub fn clean_event_rate(env: &StochasticEnv, queries: &[ArmSet], m: u64, horizon: u64, trials: u64, seed: u64) -> Result<f64> {
    if trials < 100 {
        return Err(Error::domain(format!("need at least 100 trials, got {trials}")));
    }
    for q in queries {
        q.check(env.n())?;
    }
    let rad = confidence_radius(env.h(), horizon, m)?;
    let trial = |i: u64| {
        let mut r = rng::stream(seed, &[i], "clean-event");
        queries.iter().all(|&a| {
            [Feedback::Reward, Feedback::Cost].iter().all(|&which| {
                let mut mean = 0.0;
                for k in 1..=m {
                    mean += (env.draw(a, which, &mut r) - mean) / k as f64;
                }
                (mean - env.mean(a, which)).abs() < rad
            })
        })
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<bool> = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(trial).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<bool> = (0..trials).map(trial).collect();
    Ok(outcomes.iter().filter(|&&ok| ok).count() as f64 / trials as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    pub warnings: Vec<String>,
}

/// Least-squares slope of `ln y` against `ln T`. Non-positive `y` are
/// dropped with a warning; fewer than four surviving points is an error.
pub fn scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let mut warnings = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, y) in points {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("horizon must be positive, got {t}")));
        }
        if y > 0.0 && y.is_finite() {
            xs.push(t.ln());
            ys.push(y.ln());
        } else {
            warnings.push(format!("dropped point T = {t} with non-positive value {y}"));
        }
    }
    if xs.len() < 4 {
        return Err(Error::domain(format!(
            "need at least 4 positive points for a fit, {} remain",
            xs.len()
        )));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("all horizons are equal; the slope is undefined"));
    }
    let slope = sxy / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
        points_used: xs.len(),
        warnings,
    })
}

/// Returns the lowest-index `x ∉ S` with
/// `(min(g(S∪x),κ) - min(g(S),κ)) / c_x >= (κ - min(g(S),κ)) / opt_cost`.
///
/// Such an arm always exists when `opt_cost` is the cost of a cover; not
/// finding one means the inputs or the evaluation are wrong. Comparisons
/// allow a relative slack of `1e-12`.
pub fn density_bound_witness(g: &SetFunction, cost: &SetFunction, s: ArmSet, kappa: f64, opt_cost: f64) -> Result<usize> {
    let n = g.n();
    if cost.n() != n {
        return Err(Error::Contract(format!("utility has {n} arms, cost has {}", cost.n())));
    }
    let costs = cost
        .costs()
        .ok_or_else(|| Error::Contract("density bound needs a modular cost".into()))?;
    s.check(n)?;
    if s == ArmSet::full(n) {
        return Err(Error::domain("S must be a proper subset of the ground set"));
    }
    if !(opt_cost > 0.0) {
        return Err(Error::domain(format!("opt_cost must be positive, got {opt_cost}")));
    }
    let base = g.value(s).min(kappa);
    let rhs = (kappa - base) / opt_cost;
    let slack = 1e-12 * rhs.abs().max(1.0);
    (0..n)
        .filter(|&x| !s.contains(x))
        .find(|&x| (g.value(s.with(x)).min(kappa) - base) / costs[x] >= rhs - slack)
        .ok_or_else(|| {
            Error::InvariantViolation(format!("no arm outside {s} reaches density {rhs} (kappa = {kappa})"))
        })
}

/// `ln(a - b) >= ln a - 2b/a` for `a > 0`, `0 <= b <= 0.79 a`.
pub fn log_gap_check(a: f64, b: f64) -> Result<bool> {
    if !(a > 0.0 && a.is_finite()) || !(b >= 0.0 && b.is_finite()) {
        return Err(Error::domain(format!("need a > 0 and b >= 0, got a = {a}, b = {b}")));
    }
    // One ulp of slack so that b = 0.79 * a is accepted after rounding.
    if b / a > 0.79 * (1.0 + 1e-12) {
        return Err(Error::domain(format!("b/a = {} exceeds 0.79", b / a)));
    }
    Ok((a - b).ln() >= a.ln() - 2.0 * b / a)
}

/// Outcome of running an offline algorithm once against an
/// epsilon-perturbed oracle and checking its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResilienceOutcome {
    pub selected: ArmSet,
    pub f_selected: f64,
    pub g_selected: f64,
    pub f_opt: f64,
    pub epsilon: f64,
    pub queries: usize,
    /// The objective inequality of the certificate.
    pub objective_ok: bool,
    /// The constraint inequality of the certificate.
    pub constraint_ok: bool,
    /// Membership in the relaxed fairness matroid (FSM only; true otherwise).
    pub structure_ok: bool,
    pub calls_ok: bool,
    /// SCSC only: `f(S) <= (1 + 8ε c_max / (c_min μ)) α f(OPT)` and
    /// `g(S) >= κ - ε`. Reported, not part of [`holds`](Self::holds): the
    /// greedy can violate it when an optimum meets `κ` exactly and the oracle
    /// reports it just below.
    pub multiplicative_ok: Option<bool>,
}

impl ResilienceOutcome {
    pub fn holds(&self) -> bool {
        self.objective_ok && self.constraint_ok && self.structure_ok && self.calls_ok
    }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Runs `spec` on `(f, g)` with the learned side perturbed by `epsilon` in
/// `mode`, then checks
///
/// - SC: `f(S) <= α f(OPT) + δε` and `g(S) >= βκ - δε`;
/// - SCSC: the same additive pair (the multiplicative form is reported
///   separately in `multiplicative_ok`);
/// - FSM: `f(S) >= α f(OPT) - δε`, `|S| <= βκ + δε`, and `S` in the relaxed
///   fairness matroid;
///
/// and that the oracle saw at most `N` distinct sets.
pub fn resilience_trial(
    spec: &OfflineSpec,
    f: &SetFunction,
    g: &SetFunction,
    cert: &Certification,
    epsilon: f64,
    mode: PerturbMode,
    seed: u64,
) -> Result<ResilienceOutcome> {
    let c = &cert.cert;
    let opt = opt_for_spec(spec, f, g)?;
    let (known, learned) = match spec.problem {
        Problem::Sc | Problem::Scsc => (f, g),
        Problem::Fsm => (g, f),
    };
    let mut oracle = eps_perturb(learned, epsilon, mode, seed)?;
    let run = spec.run(known, &mut oracle)?;
    let s = run.selected;
    let (fs, gs, fo) = (f.value(s), g.value(s), opt.opt_objective);
    let de = c.delta * epsilon;
    let mut multiplicative_ok = None;
    let (objective_ok, constraint_ok, structure_ok) = match spec.problem {
        Problem::Sc => (le(fs, c.alpha * fo + de), le(c.beta * spec.kappa - de, gs), true),
        Problem::Scsc => {
            let k = cert
                .scsc
                .as_ref()
                .ok_or_else(|| Error::Contract("SCSC certificate without instance constants".into()))?;
            let factor = 1.0 + 8.0 * epsilon * k.c_max / (k.c_min * k.mu);
            multiplicative_ok = Some(le(fs, factor * c.alpha * fo) && le(spec.kappa - epsilon, gs));
            (le(fs, c.alpha * fo + de), le(c.beta * spec.kappa - de, gs), true)
        }
        Problem::Fsm => (
            le(c.alpha * fo - de, fs),
            le(gs, c.beta * spec.kappa + de),
            spec.matroid(f.n())?.contains(s),
        ),
    };
    let queries = oracle.distinct_queries();
    Ok(ResilienceOutcome {
        selected: s,
        f_selected: fs,
        g_selected: gs,
        f_opt: fo,
        epsilon,
        queries,
        objective_ok,
        constraint_ok,
        structure_ok,
        calls_ok: queries as u64 <= c.n_calls,
        multiplicative_ok,
    })
}

/// The error scale used for certificates without an epsilon cap: one `n`-th
/// of the learned side's range.
pub fn reference_epsilon(cert: &Certification, learned_range: f64, n: usize) -> f64 {
    cert.cert.epsilon_cap.unwrap_or(learned_range / n as f64)
}
