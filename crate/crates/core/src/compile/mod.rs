//! Compiling calculus queries to algebra plans.

mod plan;
mod reduce;

use thiserror::Error;

use crate::calculus::{check_safety, CalculusQuery};
use crate::category::{InstanceCategory, Violation};
use crate::normalize::{fold_empty_quantifiers, rename_variables, to_prenex_with_limit, NormalizeError, PrenexQuery, DEFAULT_CLAUSE_LIMIT};

pub use plan::{AlgebraPlan, CatArrow, NodeId, PlanBuilder, PlanError, PlanNode, PlanOp};
pub use reduce::{
    build_clause_category, build_context, build_predicate_objects, build_range_objects, build_relationship_objects,
    compile_clause, reduce, ClauseDiagram, Context,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("query is not safe: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Unsafe(Vec<Violation>),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error("negated tree or graph predicate `{0}` is not supported")]
    NegatedPredicate(String),
    #[error("universally quantified variable `{0}` is not used in the matrix")]
    UnusedUniversal(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("{0}")]
    Invalid(String),
}

/// Deliberate miscompilations, for checking that verification catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Swaps `>`/`>=`, `<`/`<=` and `=`/`!=` in comparison selections.
    FlipTheta,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileOptions {
    pub clause_limit: usize,
    pub fault: Option<Fault>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            clause_limit: DEFAULT_CLAUSE_LIMIT,
            fault: None,
        }
    }
}

/// The normalized query the compiler works from, with the renaming applied.
pub fn normalized(q: &CalculusQuery, cat: &InstanceCategory, opts: &CompileOptions) -> Result<(PrenexQuery, Vec<(String, String)>), CompileError> {
    let violations = check_safety(q, cat);
    if !violations.is_empty() {
        return Err(CompileError::Unsafe(violations));
    }
    let folded = fold_empty_quantifiers(q, cat);
    let prenex = to_prenex_with_limit(&folded, opts.clause_limit)?;
    Ok(rename_variables(&prenex))
}

pub fn compile(q: &CalculusQuery, cat: &InstanceCategory) -> Result<AlgebraPlan, CompileError> {
    compile_with(q, cat, &CompileOptions::default())
}

/// Checks safety, folds quantifiers over empty ranges, normalizes, renames
/// and reduces.
pub fn compile_with(q: &CalculusQuery, cat: &InstanceCategory, opts: &CompileOptions) -> Result<AlgebraPlan, CompileError> {
    let (canonical, mapping) = normalized(q, cat, opts)?;
    reduce(&canonical, &mapping, cat, opts)
}
