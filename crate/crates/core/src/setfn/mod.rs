//! Ground sets, set functions and the noise wrappers around them.

mod armset;
mod env;
mod function;
mod instance;
mod oracle;

pub use armset::{ArmSet, GroundSet, MAX_ARMS};
pub use env::{noisy_sample, Distribution, Feedback, StochasticEnv};
pub use function::{check_structure_exhaustive, instance_id, Flags, SetFnKind, SetFunction, EXHAUSTIVE_MAX_ARMS};
pub use instance::{build_instance, FunctionDesc, GroundDesc, Instance, InstanceDescription};
pub use oracle::{eps_perturb, ExactOracle, NoisyOracle, PerturbMode, ValueOracle, WORST_CASE_SHRINK};
