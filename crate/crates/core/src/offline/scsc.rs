use super::{argmax, GreedyRun, TieBreak};
use crate::error::{Error, Result};
use crate::setfn::{ArmSet, SetFunction, ValueOracle};

/// Greedy for submodular-cost submodular cover.
///
/// Adds the arm maximizing
/// `(min(ĝ(S ∪ {i}), κ) - min(ĝ(S), κ)) / f({i})` until `ĝ(S) >= κ`.
pub fn scsc_greedy_run(
    cost: &SetFunction,
    g_hat: &mut dyn ValueOracle,
    kappa: f64,
    tie: TieBreak,
) -> Result<GreedyRun> {
    let n = cost.n();
    if g_hat.ground_size() != n {
        return Err(Error::Contract(format!(
            "cost has {n} arms but the utility oracle has {}",
            g_hat.ground_size()
        )));
    }
    if !kappa.is_finite() {
        return Err(Error::domain(format!("kappa must be finite, got {kappa}")));
    }
    let singles: Vec<f64> = (0..n).map(|i| cost.singleton(i)).collect();
    if let Some(i) = singles.iter().position(|&c| !(c > 0.0)) {
        return Err(Error::Contract(format!("singleton cost of arm {i} is not positive")));
    }
    let full = ArmSet::full(n);
    let mut run = GreedyRun::start();
    let mut current = g_hat.value(run.selected)?;
    while current < kappa {
        let s = run.selected;
        if s == full {
            return Err(Error::Infeasible(format!(
                "noisy utility of the full ground set is {current}, short of kappa = {kappa} by {}",
                kappa - current
            )));
        }
        let base = current.min(kappa);
        let pick = argmax(ArmSet::from_bits(full.bits() & !s.bits()).arms(), tie, |i| {
            Ok((g_hat.value(s.with(i))?.min(kappa) - base) / singles[i])
        })?
        .expect("a non-full set has a candidate");
        run.push(pick);
        current = g_hat.value(run.selected)?;
    }
    Ok(run)
}
