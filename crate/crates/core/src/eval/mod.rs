//! Plan evaluation, the reference oracle, and single-operator simulation.

mod engine;
mod oracle;
mod simulate;

pub use engine::{evaluate, EvalError};
pub use oracle::{oracle_evaluate, oracle_evaluate_bounded, OracleError, DEFAULT_ORACLE_BOUND};
pub use simulate::{direct_evaluate, simulate_algebra_in_calculus, tuple_relation, AlgebraOp};
