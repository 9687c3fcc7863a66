//! JSON instance descriptions.
//!
//! ```json
//! {
//!   "ground": { "n": 3, "labels": ["a", "b", "c"] },
//!   "objective": { "kind": "modular", "payload": { "costs": [1, 1, 3] } },
//!   "constraint": { "kind": "coverage", "payload": { "universe": 2, "covers": [[0], [1], [0, 1]] } },
//!   "h": 3.0
//! }
//! ```
//!
//! Kinds are `coverage` (`universe`, `covers`), `weighted-coverage`
//! (`weights`, `covers`) and `modular` (`costs`). Element and arm indices are
//! zero-based. `h` is optional and defaults to the larger range bound.
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use super::armset::GroundSet;
use super::function::SetFunction;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDescription {
    pub ground: GroundDesc,
    pub objective: FunctionDesc,
    pub constraint: FunctionDesc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundDesc {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionDesc {
    Coverage(CoveragePayload),
    WeightedCoverage(WeightedCoveragePayload),
    Modular(ModularPayload),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveragePayload {
    pub universe: usize,
    pub covers: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedCoveragePayload {
    pub weights: Vec<f64>,
    pub covers: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModularPayload {
    pub costs: Vec<f64>,
}

impl FunctionDesc {
    pub fn coverage(universe: usize, covers: Vec<Vec<usize>>) -> Self {
        FunctionDesc::Coverage(CoveragePayload { universe, covers })
    }

    pub fn weighted_coverage(weights: Vec<f64>, covers: Vec<Vec<usize>>) -> Self {
        FunctionDesc::WeightedCoverage(WeightedCoveragePayload { weights, covers })
    }

    pub fn modular(costs: Vec<f64>) -> Self {
        FunctionDesc::Modular(ModularPayload { costs })
    }

    fn arity(&self) -> usize {
        match self {
            FunctionDesc::Coverage(p) => p.covers.len(),
            FunctionDesc::WeightedCoverage(p) => p.covers.len(),
            FunctionDesc::Modular(p) => p.costs.len(),
        }
    }

    fn build(&self) -> Result<SetFunction> {
        match self {
            FunctionDesc::Coverage(p) => SetFunction::coverage(p.universe, &p.covers),
            FunctionDesc::WeightedCoverage(p) => SetFunction::weighted_coverage(p.weights.clone(), &p.covers),
            FunctionDesc::Modular(p) => SetFunction::modular(p.costs.clone()),
        }
    }
}

/// A validated instance: ground set, objective `f`, constraint `g` and the
/// shared feedback range `h`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub ground: GroundSet,
    pub objective: SetFunction,
    pub constraint: SetFunction,
    pub h: f64,
}

impl InstanceDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::invalid(format!("instance (line {}, column {})", e.line(), e.column()), e.to_string())
        })
    }
}

pub fn build_instance(desc: &InstanceDescription) -> Result<Instance> {
    let ground = GroundSet::new(desc.ground.n, desc.ground.labels.clone())?;
    let mut built = Vec::with_capacity(2);
    for (name, f) in [("objective", &desc.objective), ("constraint", &desc.constraint)] {
        if f.arity() != ground.n() {
            return Err(Error::invalid(
                format!("{name}.payload"),
                format!("describes {} arms but ground.n = {}", f.arity(), ground.n()),
            ));
        }
        built.push(f.build().map_err(|e| match e {
            Error::Invalid { field, msg } => Error::invalid(format!("{name}.{field}"), msg),
            other => other,
        })?);
    }
    let constraint = built.pop().expect("two functions");
    let objective = built.pop().expect("two functions");
    let natural = objective.range_bound().max(constraint.range_bound());
    let h = match desc.h {
        None => natural,
        Some(h) if !(h.is_finite() && h > 0.0) => {
            return Err(Error::invalid("h", format!("must be positive and finite, got {h}")))
        }
        Some(h) if h < natural => {
            return Err(Error::invalid("h", format!("{h} is below the largest range bound {natural}")))
        }
        Some(h) => h,
    };
    Ok(Instance {
        ground,
        objective,
        constraint,
        h,
    })
}
