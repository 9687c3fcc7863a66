use super::{argmax, GreedyRun, TieBreak};
use crate::error::{Error, Result};
use crate::setfn::{ArmSet, SetFunction, ValueOracle};

/// Greedy submodular cover with a modular cost and tolerance `omega`.
///
/// Adds the arm maximizing `(min(ĝ(S ∪ {x}), κ) - ĝ(S)) / c_x` until
/// `ĝ(S) >= κ - ω`. The feasibility of `ĝ(Ω) >= κ - ω` is detected when the
/// greedy exhausts the ground set, so no extra query of `Ω` is spent.
pub fn mintss_run(
    cost: &SetFunction,
    g_hat: &mut dyn ValueOracle,
    kappa: f64,
    omega: f64,
    tie: TieBreak,
) -> Result<GreedyRun> {
    let costs = match cost.costs() {
        Some(c) if cost.is_modular() => c,
        _ => return Err(Error::Contract("MINTSS needs a modular cost function".into())),
    };
    let n = cost.n();
    if g_hat.ground_size() != n {
        return Err(Error::Contract(format!(
            "cost has {n} arms but the utility oracle has {}",
            g_hat.ground_size()
        )));
    }
    if !(omega > 0.0 && kappa.is_finite()) {
        return Err(Error::domain(format!("need omega > 0 and finite kappa, got omega = {omega}, kappa = {kappa}")));
    }
    let target = kappa - omega;
    let full = ArmSet::full(n);
    let mut run = GreedyRun::start();
    let mut current = g_hat.value(run.selected)?;
    while current < target {
        let s = run.selected;
        if s == full {
            return Err(Error::Infeasible(format!(
                "noisy utility of the full ground set is {current}, short of kappa - omega = {target} by {}",
                target - current
            )));
        }
        let pick = argmax(ArmSet::from_bits(full.bits() & !s.bits()).arms(), tie, |x| {
            Ok((g_hat.value(s.with(x))?.min(kappa) - current) / costs[x])
        })?
        .expect("a non-full set has a candidate");
        run.push(pick);
        current = g_hat.value(run.selected)?;
    }
    Ok(run)
}
