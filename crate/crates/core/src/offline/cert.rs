use serde::{Deserialize, Serialize};

use super::{OfflineSpec, Problem, Sense};
use crate::error::{Error, Result};
use crate::setfn::{ArmSet, ExactOracle, Instance, SetFunction, EXHAUSTIVE_MAX_ARMS};

/// The `(α, β, δ, N)` tuple certifying an offline algorithm, plus the
/// largest oracle error for which the guarantee is proven.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResilienceCert {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub n_calls: u64,
    pub sense: Sense,
    /// `None` means no bound on ε is required.
    pub epsilon_cap: Option<f64>,
}

impl ResilienceCert {
    /// A max-sense certificate with `α = 0` promises nothing about the objective.
    pub fn is_vacuous(&self) -> bool {
        self.sense == Sense::Max && self.alpha <= 0.0
    }

    pub fn admits(&self, epsilon: f64) -> bool {
        epsilon >= 0.0 && self.epsilon_cap.is_none_or(|cap| epsilon <= cap)
    }
}

/// Instance constants consumed by [`resilience_params`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", deny_unknown_fields)]
pub enum CertInputs {
    #[serde(rename = "SC")]
    Sc {
        kappa: f64,
        omega: f64,
        n: usize,
        c_min: f64,
        c_max: f64,
        f_max: f64,
    },
    #[serde(rename = "SCSC")]
    Scsc {
        rho: f64,
        psi: f64,
        gamma: f64,
        mu: f64,
        c_min: f64,
        c_max: f64,
        f_max: f64,
        n: usize,
    },
    #[serde(rename = "FSM")]
    Fsm { omega: f64, kappa: f64, n: usize },
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(format!("consts.{field}"), format!("must be positive and finite, got {v}")))
    }
}

fn nonzero(field: &str, n: usize) -> Result<u64> {
    if n == 0 {
        Err(Error::invalid(format!("consts.{field}"), "must be at least 1"))
    } else {
        Ok(n as u64)
    }
}

pub fn resilience_params(consts: &CertInputs) -> Result<ResilienceCert> {
    match *consts {
        CertInputs::Sc {
            kappa,
            omega,
            n,
            c_min,
            c_max,
            f_max,
        } => {
            let (kappa, omega) = (positive("kappa", kappa)?, positive("omega", omega)?);
            let (c_min, c_max, f_max) = (positive("c_min", c_min)?, positive("c_max", c_max)?, positive("f_max", f_max)?);
            let n = nonzero("n", n)?;
            if omega >= kappa {
                return Err(Error::invalid("consts.omega", format!("must be below kappa = {kappa}, got {omega}")));
            }
            if c_min > c_max {
                return Err(Error::invalid("consts.c_min", format!("{c_min} exceeds c_max = {c_max}")));
            }
            Ok(ResilienceCert {
                alpha: 1.0 + (kappa / omega).ln(),
                beta: 1.0 - omega / kappa,
                delta: c_max / (omega * c_min) * f_max * (3.0 + 6.0 * n as f64),
                n_calls: n * n,
                sense: Sense::Min,
                epsilon_cap: Some(omega * c_min / (4.0 * n as f64 * c_max)),
            })
        }
        CertInputs::Scsc {
            rho,
            psi,
            gamma,
            mu,
            c_min,
            c_max,
            f_max,
            n,
        } => {
            let (rho, psi, gamma, mu) = (
                positive("rho", rho)?,
                positive("psi", psi)?,
                positive("gamma", gamma)?,
                positive("mu", mu)?,
            );
            let (c_min, c_max, f_max) = (positive("c_min", c_min)?, positive("c_max", c_max)?, positive("f_max", f_max)?);
            let n = nonzero("n", n)?;
            let alpha = rho * ((psi / gamma).ln() + 2.0);
            Ok(ResilienceCert {
                alpha,
                beta: 1.0,
                delta: (8.0 * c_max / (c_min * mu) * alpha * f_max).max(1.0),
                n_calls: n * n,
                sense: Sense::Min,
                epsilon_cap: Some(mu * c_min / (8.0 * c_max)),
            })
        }
        CertInputs::Fsm { omega, kappa, n } => {
            let (omega, kappa) = (positive("omega", omega)?, positive("kappa", kappa)?);
            let n = nonzero("n", n)?;
            if omega > 1.0 {
                return Err(Error::invalid("consts.omega", format!("must be at most 1, got {omega}")));
            }
            Ok(ResilienceCert {
                alpha: 1.0 - omega,
                beta: 1.0 / omega,
                delta: (4.0 * kappa / (1.0 + omega)).max(1.0),
                n_calls: ((n as f64 * kappa / omega).round() as u64).max(1),
                sense: Sense::Max,
                epsilon_cap: None,
            })
        }
    }
}

/// Constants of a submodular-cost cover instance measured along a greedy run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScscConstants {
    /// Curvature `max_X Σ_{x∈X} f({x}) / f(X)`.
    pub rho: f64,
    /// Largest singleton utility.
    pub psi: f64,
    /// Smallest positive capped marginal utility seen along the run.
    pub gamma: f64,
    /// Smallest utility increment between consecutive run steps.
    pub mu: f64,
    pub c_min: f64,
    pub c_max: f64,
}

/// `chain` is the run's prefix chain `A_0 = ∅ ⊂ A_1 ⊂ ... ⊂ A_k`. Marginals
/// for γ are taken at `A_0 .. A_{k-1}`, the states from which a pick was made.
pub fn scsc_instance_constants(cost: &SetFunction, g: &SetFunction, kappa: f64, chain: &[ArmSet]) -> Result<ScscConstants> {
    let n = cost.n();
    if g.n() != n {
        return Err(Error::Contract(format!("cost has {n} arms, utility has {}", g.n())));
    }
    if n > EXHAUSTIVE_MAX_ARMS {
        return Err(Error::Capability(format!(
            "curvature needs all subsets; n = {n} exceeds {EXHAUSTIVE_MAX_ARMS}"
        )));
    }
    if chain.len() < 2 {
        return Err(Error::domain("mu is undefined for a run with no steps"));
    }
    for s in chain {
        s.check(n)?;
    }
    let rho = ArmSet::all_subsets(n)
        .filter(|x| !x.is_empty())
        .map(|x| x.arms().map(|a| cost.singleton(a)).sum::<f64>() / cost.value(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let psi = (0..n).map(|a| g.singleton(a)).fold(f64::NEG_INFINITY, f64::max);
    let mut gamma = f64::INFINITY;
    for &a in &chain[..chain.len() - 1] {
        let base = g.value(a);
        for x in (0..n).filter(|&x| !a.contains(x)) {
            let gain = (g.value(a.with(x)) - base).min(kappa);
            if gain > 0.0 {
                gamma = gamma.min(gain);
            }
        }
    }
    if !gamma.is_finite() {
        return Err(Error::domain("no positive marginal utility along the run; gamma is undefined"));
    }
    let mu = chain
        .windows(2)
        .map(|w| g.value(w[1]) - g.value(w[0]))
        .fold(f64::INFINITY, f64::min);
    let singles = (0..n).map(|a| cost.singleton(a));
    let c_min = singles.clone().fold(f64::INFINITY, f64::min);
    let c_max = singles.fold(f64::NEG_INFINITY, f64::max);
    Ok(ScscConstants {
        rho,
        psi,
        gamma,
        mu,
        c_min,
        c_max,
    })
}

/// A certificate together with the constants it was computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub problem: Problem,
    pub cert: ResilienceCert,
    pub inputs: CertInputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scsc: Option<ScscConstants>,
    pub warnings: Vec<String>,
}

/// Reads the constants a certificate needs off a concrete instance. For
/// SCSC this replays the greedy with an exact oracle on the true utility.
pub fn certify(spec: &OfflineSpec, instance: &Instance) -> Result<Certification> {
    let n = instance.ground.n();
    spec.validate(n)?;
    let cost = &instance.objective;
    let mut scsc = None;
    let inputs = match spec.problem {
        Problem::Sc => {
            let costs = cost
                .costs()
                .ok_or_else(|| Error::Contract("SC needs a modular objective cost".into()))?;
            CertInputs::Sc {
                kappa: spec.kappa,
                omega: spec.omega,
                n,
                c_min: costs.iter().copied().fold(f64::INFINITY, f64::min),
                c_max: costs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                f_max: cost.range_bound(),
            }
        }
        Problem::Scsc => {
            let mut oracle = ExactOracle::new(&instance.constraint);
            let run = super::scsc_greedy_run(cost, &mut oracle, spec.kappa, spec.tie_break)?;
            let k = scsc_instance_constants(cost, &instance.constraint, spec.kappa, &run.chain)?;
            let inputs = CertInputs::Scsc {
                rho: k.rho,
                psi: k.psi,
                gamma: k.gamma,
                mu: k.mu,
                c_min: k.c_min,
                c_max: k.c_max,
                f_max: cost.range_bound(),
                n,
            };
            scsc = Some(k);
            inputs
        }
        Problem::Fsm => CertInputs::Fsm {
            omega: spec.omega,
            kappa: spec.kappa,
            n,
        },
    };
    let cert = resilience_params(&inputs)?;
    let mut warnings = Vec::new();
    if cert.is_vacuous() {
        warnings.push("alpha = 0: the objective guarantee is vacuous".to_string());
    }
    Ok(Certification {
        problem: spec.problem,
        cert,
        inputs,
        scsc,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sc_example() {
        let c = resilience_params(&CertInputs::Sc {
            kappa: 2.0,
            omega: 0.5,
            n: 3,
            c_min: 1.0,
            c_max: 3.0,
            f_max: 5.0,
        })
        .unwrap();
        assert!((c.alpha - (1.0 + 4f64.ln())).abs() < 1e-12);
        assert!((c.alpha - 2.386).abs() < 1e-3);
        assert_eq!(c.beta, 0.75);
        assert!((c.delta - 630.0).abs() < 1e-9);
        assert_eq!(c.n_calls, 9);
        assert_eq!(c.sense, Sense::Min);
        assert!((c.epsilon_cap.unwrap() - 0.5 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn fsm_examples() {
        let c = resilience_params(&CertInputs::Fsm {
            omega: 0.5,
            kappa: 2.0,
            n: 4,
        })
        .unwrap();
        assert_eq!((c.alpha, c.beta, c.n_calls), (0.5, 2.0, 16));
        assert!((c.delta - 8.0 / 1.5).abs() < 1e-12);
        assert_eq!(c.epsilon_cap, None);
        assert!(!c.is_vacuous());

        let c = resilience_params(&CertInputs::Fsm {
            omega: 1.0,
            kappa: 7.0,
            n: 4,
        })
        .unwrap();
        assert_eq!((c.alpha, c.beta), (0.0, 1.0));
        assert!(c.is_vacuous());
    }

    #[test]
    fn scsc_formula_and_floor() {
        let mk = |f_max| CertInputs::Scsc {
            rho: 1.0,
            psi: 2.0,
            gamma: 2.0,
            mu: 1.0,
            c_min: 1.0,
            c_max: 1.0,
            f_max,
            n: 2,
        };
        let c = resilience_params(&mk(3.0)).unwrap();
        assert_eq!(c.alpha, 2.0);
        assert_eq!(c.delta, 8.0 * 2.0 * 3.0);
        assert_eq!(c.epsilon_cap, Some(1.0 / 8.0));
        let c = resilience_params(&mk(1e-3)).unwrap();
        assert_eq!(c.delta, 1.0);
    }

    #[test]
    fn non_positive_constants_rejected() {
        let err = resilience_params(&CertInputs::Sc {
            kappa: 2.0,
            omega: 0.5,
            n: 3,
            c_min: 0.0,
            c_max: 3.0,
            f_max: 5.0,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Invalid { ref field, .. } if field == "consts.c_min"));
        assert!(resilience_params(&CertInputs::Fsm {
            omega: 0.5,
            kappa: 2.0,
            n: 0
        })
        .is_err());
    }

    #[test]
    fn scsc_constants_on_example() {
        let cost = SetFunction::weighted_coverage(vec![1.0, 1.0, 1.0], &[vec![0, 2], vec![1, 2]]).unwrap();
        let g = SetFunction::coverage(3, &[vec![0, 1], vec![1, 2]]).unwrap();
        let chain = [ArmSet::EMPTY, ArmSet::from_arms([0]), ArmSet::from_arms([0, 1])];
        let k = scsc_instance_constants(&cost, &g, 3.0, &chain).unwrap();
        assert!((k.rho - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(k.psi, 2.0);
        assert_eq!(k.mu, 1.0);
        assert_eq!(k.gamma, 1.0);
        assert_eq!((k.c_min, k.c_max), (2.0, 2.0));
        assert!(scsc_instance_constants(&cost, &g, 3.0, &chain[..1]).is_err());

        let modular = SetFunction::modular(vec![1.0, 2.0]).unwrap();
        assert_eq!(scsc_instance_constants(&modular, &g, 3.0, &chain).unwrap().rho, 1.0);
    }

    #[test]
    fn capability_cap() {
        let cost = SetFunction::modular(vec![1.0; 13]).unwrap();
        let g = SetFunction::modular(vec![1.0; 13]).unwrap();
        let chain = [ArmSet::EMPTY, ArmSet::singleton(0)];
        assert!(matches!(
            scsc_instance_constants(&cost, &g, 1.0, &chain),
            Err(Error::Capability(_))
        ));
    }
}
