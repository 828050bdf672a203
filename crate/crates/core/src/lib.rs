//! A query engine over instance categories: finite objects of elements and
//! total functions between them.
//!
//! Queries are written in a range-coupled calculus, normalized to prenex
//! form with a disjunctive matrix, compiled to categorical algebra plans
//! (`Lim`, `Select`, `Divide`, `Project`, set operators and the tree and
//! graph operators) and evaluated. An independent enumerating evaluator of
//! the calculus serves as the reference semantics in tests.

pub mod algebra;
pub mod bench;
pub mod calculus;
pub mod category;
pub mod compile;
pub mod dewey;
pub mod eval;
pub mod io;
pub mod normalize;
pub mod pipeline;
pub mod relation;
pub mod testgen;
pub mod value;

pub use category::{CategoryObject, Element, ElementId, InstanceCategory, Morphism, ObjectKind, Payload};
pub use dewey::DeweyCode;
pub use relation::{Column, Relation};
pub use value::{Decimal, Value};
