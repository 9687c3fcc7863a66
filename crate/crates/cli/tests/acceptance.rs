//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use bicrit::eval::{
    brute_force_opt, clean_event_rate, density_bound_witness, log_gap_check, opt_for_spec, reference_epsilon,
    regret_ccv, resilience_trial, Feasibility,
};
use bicrit::gen::{random_fairness, random_fsm, random_sc, random_scsc, Generated};
use bicrit::offline::{certify, fairness_matroid_member, FairnessMatroid, Problem, Sense};
use bicrit::online::{exploration_reps, run_bicriteria_cmab, Phase, RunConfig, RunTrace};
use bicrit::rng;
use bicrit::setfn::{ArmSet, Distribution, ExactOracle, PerturbMode, SetFunction, StochasticEnv};
use bicrit_cli::commands::{cmd_run, cmd_sweep, Experiment};
use bicrit_cli::config::{load, Overrides};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let e = start.elapsed();
    ensure(e < limit, || format!("took {e:.1?}, limit {limit:?}"))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn env_for(g: &Generated, dist: Distribution) -> StochasticEnv {
    let inst = g.instance();
    let (fd, gd) = match g.spec.problem {
        Problem::Fsm => (dist, Distribution::PointMass),
        _ => (Distribution::PointMass, dist),
    };
    StochasticEnv::new(inst.objective, inst.constraint, inst.h, fd, gd, 0, &[]).unwrap()
}

fn run_cfg(g: &Generated, dist: Distribution, horizon: u64, seed: u64, m: Option<u64>) -> RunConfig {
    RunConfig {
        horizon,
        cert: certify(&g.spec, &g.instance()).unwrap().cert,
        env: env_for(g, dist),
        offline: g.spec.clone(),
        seed,
        m_override: m,
    }
}

fn c1_exact_mintss() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let mut r = rng::stream(1, &[i], "acceptance-sc");
        let n = r.gen_range(2..=12);
        let g = random_sc(&mut r, n);
        let opt = opt_for_spec(&g.spec, &g.f, &g.g).map_err(|e| e.to_string())?;
        let mut o = ExactOracle::new(&g.g);
        let s = g.spec.run(&g.f, &mut o).map_err(|e| e.to_string())?.selected;
        let (k, w) = (g.spec.kappa, g.spec.omega);
        let bound = (1.0 + (k / w).ln()) * opt.opt_objective;
        ensure(g.f.value(s) <= bound + 1e-9, || format!("instance {i}: f(S) = {} > {bound}", g.f.value(s)))?;
        ensure(g.g.value(s) >= k - w, || format!("instance {i}: g(S) = {} < {}", g.g.value(s), k - w))?;
        worst = worst.max(g.f.value(s) / opt.opt_objective);
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("100 instances, worst f(S)/f(OPT) = {worst:.3}, {:.1?}", start.elapsed()))
}

fn c2_resilience() -> Outcome {
    let (mut trials, mut mult_checked, mut mult_broken) = (0, 0, 0);
    for (label, count) in [("SC", 100u64), ("SCSC", 60), ("FSM", 60)] {
        for i in 0..count {
            let mut r = rng::stream(2, &[i], label);
            let g = match label {
                "SC" => {
                    let n = r.gen_range(2..=12);
                    random_sc(&mut r, n)
                }
                "SCSC" => {
                    let n = r.gen_range(2..=10);
                    random_scsc(&mut r, n)
                }
                _ => {
                    let n = r.gen_range(3..=10);
                    let w = r.gen_range(1..=3);
                    random_fsm(&mut r, n, 1.0 / w as f64)
                }
            };
            let cert = certify(&g.spec, &g.instance()).map_err(|e| format!("{label} {i}: {e}"))?;
            let learned = if g.spec.problem == Problem::Fsm { &g.f } else { &g.g };
            let eps0 = reference_epsilon(&cert, learned.range_bound(), g.n());
            for mode in PerturbMode::ALL {
                for frac in [0.1, 0.5, 0.99] {
                    let out = resilience_trial(&g.spec, &g.f, &g.g, &cert, frac * eps0, mode, i)
                        .map_err(|e| format!("{label} {i} {mode:?}: {e}"))?;
                    ensure(out.holds(), || format!("{label} {i} {mode:?} eps = {}: {out:?}", frac * eps0))?;
                    trials += 1;
                    if let Some(ok) = out.multiplicative_ok {
                        mult_checked += 1;
                        mult_broken += usize::from(!ok);
                    }
                }
            }
        }
    }
    Ok(format!(
        "{trials} perturbed runs, 0 certificate violations (SCSC multiplicative form: {mult_broken}/{mult_checked} threshold-tie breaks)"
    ))
}

fn c3_matroid() -> Outcome {
    let mut checked = 0usize;
    for i in 0..50u64 {
        let mut r = rng::stream(3, &[i], "acceptance-matroid");
        let n = r.gen_range(2..=10);
        let kappa = r.gen_range(1..=n as u32);
        let groups = r.gen_range(1..=3);
        let w = r.gen_range(1..=3usize);
        let fair = random_fairness(&mut r, n, groups, kappa);
        let m = FairnessMatroid::new(&fair, n, kappa as f64, 1.0 / w as f64).map_err(|e| e.to_string())?;
        let groups = fair.lower.len();
        let mut member = vec![false; 1 << n];
        for s in ArmSet::all_subsets(n) {
            let mut counts = vec![0usize; groups];
            for a in s.arms() {
                counts[fair.groups[a]] += 1;
            }
            let caps = (0..groups).all(|c| counts[c] <= fair.upper[c] as usize * w);
            let load: usize = (0..groups).map(|c| counts[c].max(fair.lower[c] as usize * w)).sum();
            let expect = caps && load <= kappa as usize * w;
            ensure(fairness_matroid_member(&m, s) == expect, || format!("instance {i}: disagreement on {s}"))?;
            member[s.bits() as usize] = expect;
            checked += 1;
        }
        for s in ArmSet::all_subsets(n).filter(|s| member[s.bits() as usize]) {
            for a in s.arms() {
                ensure(member[s.without(a).bits() as usize], || format!("instance {i}: {s} member, {} not", s.without(a)))?;
            }
        }
    }
    Ok(format!("{checked} subsets over 50 instances agree; downward closed"))
}

fn c4_concentration() -> Outcome {
    let start = Instant::now();
    let f = SetFunction::modular(vec![0.2, 0.3, 0.1, 0.25]).unwrap();
    let g = SetFunction::modular(vec![0.1, 0.15, 0.4, 0.3]).unwrap();
    let env = StochasticEnv::new(f, g, 1.0, Distribution::BernoulliScaled, Distribution::BernoulliScaled, 0, &[])
        .map_err(|e| e.to_string())?;
    let queries = [
        ArmSet::from_arms([0]),
        ArmSet::from_arms([0, 1]),
        ArmSet::from_arms([0, 1, 2]),
        ArmSet::from_arms([1, 3]),
    ];
    let (horizon, trials) = (4096u64, 2000u64);
    let m = exploration_reps(1.0, horizon, 4).map_err(|e| e.to_string())?;
    ensure(m == 103, || format!("m = {m}, expected 103"))?;
    let rate = clean_event_rate(&env, &queries, m, horizon, trials, 4).map_err(|e| e.to_string())?;
    let p = 1.0 - 16.0 / horizon as f64;
    let floor = p - 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
    ensure(rate >= floor, || format!("rate {rate} < {floor}"))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("rate {rate:.4} >= {floor:.4}, {:.1?}", start.elapsed()))
}

/// Runs the scaling sweep; criteria 5 and 8 both use it.
fn scaling_sweep(out: &Path) -> Result<(bicrit_cli::commands::SweepSummary, Duration), String> {
    let start = Instant::now();
    let cfg = repo_root().join("configs/sc_scaling.json");
    let ov = Overrides { out: Some(out.to_path_buf()), ..Default::default() };
    let s = cmd_sweep(&cfg, &ov).map_err(|e| format!("{e:#}"))?;
    Ok((s, start.elapsed()))
}

fn c5_scaling(out: &Path) -> Outcome {
    let (s, took) = scaling_sweep(out)?;
    ensure(s.succeeded(), || format!("failed cells: {:?}", s.failures))?;
    ensure(s.horizons.len() == 6 && s.seeds.len() == 20, || "sweep grid is not 2^12..2^17 x 20".into())?;
    let mut lines = Vec::new();
    for (name, exp) in [("regret", &s.regret_exponent), ("ccv", &s.ccv_exponent)] {
        let slope = exp.slope.ok_or_else(|| format!("{name}: no fit ({:?})", exp.note))?;
        ensure((0.55..=0.85).contains(&slope), || format!("{name} slope {slope:.3} outside [0.55, 0.85]"))?;
        lines.push(format!("{name} slope {slope:.3}"));
    }
    for h in &s.per_horizon {
        ensure(h.mean_regret_f <= h.bound_c3, || format!("T = {}: mean regret {} > bound {}", h.horizon, h.mean_regret_f, h.bound_c3))?;
        ensure(h.mean_ccv_g <= h.bound_c3, || format!("T = {}: mean ccv {} > bound {}", h.horizon, h.mean_ccv_g, h.bound_c3))?;
    }
    let worst = s
        .per_horizon
        .iter()
        .map(|h| h.regret_bound_ratio.max(h.ccv_bound_ratio))
        .fold(f64::MIN, f64::max);
    ensure(took < Duration::from_secs(600), || format!("took {took:.1?}, limit 10 min"))?;
    Ok(format!("{}, max mean/bound {worst:.2e}, {took:.1?}", lines.join(", ")))
}

fn c6_witnesses() -> Outcome {
    let start = Instant::now();
    for i in 0..1000u64 {
        let mut r = rng::stream(6, &[i], "acceptance-density");
        let n = r.gen_range(2..=10);
        let g = random_sc(&mut r, n);
        let kappa = g.spec.kappa;
        let opt = brute_force_opt(&g.f, &g.g, kappa, Sense::Min, Feasibility::AtLeast).map_err(|e| e.to_string())?;
        let s = ArmSet::from_bits(r.gen::<u32>() & ArmSet::full(n).bits());
        let s = if s == ArmSet::full(n) { s.without(0) } else { s };
        density_bound_witness(&g.g, &g.f, s, kappa, opt.opt_objective).map_err(|e| format!("tuple {i}: {e}"))?;
    }
    let mut grid = 0;
    for ai in -30..=30 {
        let a = 10f64.powf(ai as f64 / 5.0);
        for bi in 0..=790 {
            let b = a * bi as f64 / 1000.0;
            ensure(log_gap_check(a, b) == Ok(true), || format!("log gap fails at a = {a}, b = {b}"))?;
            grid += 1;
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("1000 density tuples, {grid} log-gap points, {:.1?}", start.elapsed()))
}

/// Independent replay of the regret and CCV totals from the raw rounds.
fn replay(trace: &RunTrace, f_opt: f64, alpha: f64, beta: f64, kappa: f64, sense: Sense) -> (f64, f64) {
    let t = trace.horizon as f64;
    let sf: f64 = trace.rounds.iter().map(|r| r.sampled_f).sum();
    let sg: f64 = trace.rounds.iter().map(|r| r.sampled_g).sum();
    match sense {
        Sense::Max => (alpha * t * f_opt - sf, sg - beta * t * kappa),
        Sense::Min => (sf - alpha * t * f_opt, beta * t * kappa - sg),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn c7_structure() -> Outcome {
    let mut traces = 0;
    for i in 0..60u64 {
        let mut r = rng::stream(7, &[i], "acceptance-decomp");
        let n = r.gen_range(2..=8);
        let g = match i % 3 {
            0 => random_sc(&mut r, n),
            1 => random_scsc(&mut r, n),
            _ => random_fsm(&mut r, n.max(3), 0.5),
        };
        let m = r.gen_range(1..=30);
        let horizon = r.gen_range(20..=3000);
        let cfg = run_cfg(&g, Distribution::BernoulliScaled, horizon, i, Some(m));
        let (cert, env, kappa) = (cfg.cert.clone(), cfg.env.clone(), g.spec.kappa);
        let trace = match run_bicriteria_cmab(cfg) {
            Ok(t) => t,
            // Noisy greedy runs may legitimately fail to find a cover.
            Err(e) if matches!(e.root(), bicrit::Error::Infeasible(_)) => continue,
            Err(e) => return Err(format!("trace {i}: {e}")),
        };
        let opt = opt_for_spec(&g.spec, &g.f, &g.g).map_err(|e| e.to_string())?;
        let rep = regret_ccv(&trace, &opt, &cert, kappa, &env).map_err(|e| e.to_string())?;
        ensure(rep.explore_part.regret_f + rep.exploit_part.regret_f == rep.regret_f, || format!("trace {i}: regret parts"))?;
        ensure(rep.explore_part.ccv_g + rep.exploit_part.ccv_g == rep.ccv_g, || format!("trace {i}: ccv parts"))?;
        let explore = trace.rounds.iter().filter(|r| r.phase == Phase::Explore).count() as u64;
        ensure(rep.explore_part.rounds == explore, || format!("trace {i}: explore rounds"))?;
        let (rf, cg) = replay(&trace, opt.opt_objective, rep.alpha, rep.beta, kappa, rep.sense);
        ensure(close(rf, rep.regret_f) && close(cg, rep.ccv_g), || {
            format!("trace {i}: replay ({rf}, {cg}) vs report ({}, {})", rep.regret_f, rep.ccv_g)
        })?;
        traces += 1;
    }
    // Every cell of the scaling sweep, recomputed with its trace.
    let loaded = load(&repo_root().join("configs/sc_scaling.json"), &Overrides::default()).map_err(|e| format!("{e:#}"))?;
    let (horizons, seeds) = (loaded.config.horizons.clone(), loaded.seeds.clone());
    let exp = Experiment::new(loaded).map_err(|e| format!("{e:#}"))?;
    let mut cells = 0;
    for &t in &horizons {
        for &seed in &seeds {
            let (trace, s) = exp.cell(t, seed).map_err(|e| format!("{e:#}"))?;
            ensure(s.explore_part.regret_f + s.exploit_part.regret_f == s.regret_f, || format!("cell ({t}, {seed}): regret parts"))?;
            ensure(s.explore_part.ccv_g + s.exploit_part.ccv_g == s.ccv_g, || format!("cell ({t}, {seed}): ccv parts"))?;
            let (rf, cg) = replay(&trace, s.opt_objective, s.alpha, s.beta, s.kappa, s.sense);
            ensure(close(rf, s.regret_f) && close(cg, s.ccv_g), || format!("cell ({t}, {seed}): replay mismatch"))?;
            cells += 1;
        }
    }

    for i in 0..50u64 {
        let mut r = rng::stream(7, &[i], "acceptance-collapse");
        let n = r.gen_range(3..=10);
        let g = match i % 3 {
            0 => random_sc(&mut r, n),
            1 => random_scsc(&mut r, n),
            _ => {
                let w = r.gen_range(1..=2);
                random_fsm(&mut r, n, 1.0 / w as f64)
            }
        };
        let (known, learned) = if g.spec.problem == Problem::Fsm { (&g.g, &g.f) } else { (&g.f, &g.g) };
        let mut o = ExactOracle::new(learned);
        let direct = g.spec.run(known, &mut o).map_err(|e| e.to_string())?.selected;
        // m = 2 keeps every query inside the budget, whatever delta is.
        let horizon = 2 * (n * n) as u64 + 10;
        let trace = run_bicriteria_cmab(run_cfg(&g, Distribution::PointMass, horizon, i, Some(2))).map_err(|e| e.to_string())?;
        ensure(!trace.budget_exhausted, || format!("collapse {i}: budget exhausted"))?;
        ensure(trace.committed == direct, || format!("collapse {i}: committed {} vs direct {direct}", trace.committed))?;
        ensure(trace.queries == o.query_log(), || format!("collapse {i}: query sequences differ"))?;
    }
    Ok(format!("{traces} random traces + {cells} sweep cells decompose exactly; 50 zero-noise collapses"))
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn c8_determinism(first_sweep: &Path, scratch: &Path) -> Outcome {
    let (_, _) = scaling_sweep(&scratch.join("again"))?;
    let a = snapshot(first_sweep);
    let b = snapshot(&scratch.join("again"));
    ensure(a == b, || "scaling sweep reran to different bytes".into())?;
    let mut files = a.len();
    for name in ["sc_example.json", "fsm_example.json"] {
        let cfg = repo_root().join("configs").join(name);
        let dirs = [scratch.join(format!("{name}-1")), scratch.join(format!("{name}-2"))];
        for (k, d) in dirs.iter().enumerate() {
            let ov = Overrides {
                out: Some(d.clone()),
                horizon: Some(4096),
                seed: Some(7),
                workers: Some(k + 1),
                ..Default::default()
            };
            cmd_run(&cfg, &ov).map_err(|e| format!("{name}: {e:#}"))?;
            cmd_sweep(&cfg, &Overrides { out: Some(d.clone()), workers: Some(k + 1), ..Default::default() })
                .map_err(|e| format!("{name}: {e:#}"))?;
        }
        let (x, y) = (snapshot(&dirs[0]), snapshot(&dirs[1]));
        ensure(x == y, || format!("{name}: reruns differ"))?;
        files += x.len();
    }
    Ok(format!("{files} files byte-identical across reruns and worker counts"))
}

fn main() {
    let scratch = tempfile::tempdir().expect("temp dir");
    let sweep_dir = scratch.path().join("scaling");
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 offline exact-oracle guarantees", c1_exact_mintss()),
        ("2 resilience under adversarial noise", c2_resilience()),
        ("3 matroid oracle equivalence", c3_matroid()),
        ("4 concentration", c4_concentration()),
    ];
    results.push(("5 regret scaling order", c5_scaling(&sweep_dir)));
    results.push(("6 analysis witnesses", c6_witnesses()));
    results.push(("7 structural identities", c7_structure()));
    results.push(("8 determinism", c8_determinism(&sweep_dir, scratch.path())));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
