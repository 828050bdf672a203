//! Categorical algebra: pure operators over an [`InstanceCategory`] and
//! [`Relation`] values.

mod basic;
mod graph;
mod limit;
mod tree;

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::category::{CategoryError, ElementId, InstanceCategory};
use crate::value::{KindMismatch, Value};

pub use basic::{
    difference, divide, intersect, map, op_divide, op_map, op_project, op_select, project, scan, select, union,
};
pub use graph::{get_nhop, get_reach, op_get_nhop, op_get_reach, reach_admits_path_len, EdgeSet};
pub use limit::{lim, op_cat, op_lim, DiagramHandle, DiagramSpec, LimConstraint, MorphismConstraint};
pub use tree::{dewey_of, get_ancestor, get_parent, get_sibling, op_get_ancestor, op_get_parent, op_get_sibling};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error(transparent)]
    Category(#[from] CategoryError),
    #[error(transparent)]
    Compare(#[from] KindMismatch),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("relations are not union-compatible: ({lhs}) vs ({rhs})")]
    Incompatible { lhs: String, rhs: String },
    #[error("invalid diagram: {0}")]
    Diagram(String),
    #[error("element {0} carries no dewey code")]
    NotDewey(ElementId),
    #[error("edge set `{edges}`: {reason}")]
    EdgeSet { edges: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

/// θ_M comparison operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Gt,
    Lt,
    Le,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Lt, CmpOp::Le, CmpOp::Ge];

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        }
    }

    /// The operator of the negated comparison.
    pub fn complement(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CmpOp> {
        CmpOp::ALL.into_iter().find(|op| op.symbol() == s)
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// How a diagram arrow acts on an element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MorphismRef {
    /// A morphism stored in the category.
    Named(String),
    /// The `j`-th projection of a relationship object (0-based).
    Component(usize),
    /// Column equality; projections of derived relationship objects.
    Identity,
}

impl MorphismRef {
    pub fn apply<'a>(&self, cat: &'a InstanceCategory, x: &'a ElementId) -> Option<&'a ElementId> {
        match self {
            MorphismRef::Named(f) => cat.try_apply(f, x),
            MorphismRef::Component(j) => cat.tuple_component(x, *j),
            MorphismRef::Identity => Some(x),
        }
    }
}

impl fmt::Display for MorphismRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismRef::Named(name) => f.write_str(name),
            MorphismRef::Component(j) => write!(f, "pi{}", j + 1),
            MorphismRef::Identity => f.write_str("id"),
        }
    }
}

/// One side of a selection predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    /// `A(x)`: attribute `attr` of the element in `column`.
    Attr { column: String, attr: String },
    /// `f(x)`: the image of the element in `column`; undefined outside the domain.
    Image { column: String, morphism: MorphismRef },
    /// The element itself.
    Element { column: String },
    Const(Value),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Attr { column, attr } => write!(f, "{column}.{attr}"),
            Operand::Image { column, morphism } => write!(f, "{morphism}({column})"),
            Operand::Element { column } => f.write_str(column),
            Operand::Const(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectionPredicate {
    pub lhs: Operand,
    pub op: CmpOp,
    pub rhs: Operand,
}

impl SelectionPredicate {
    pub fn new(lhs: Operand, op: CmpOp, rhs: Operand) -> Self {
        Self { lhs, op, rhs }
    }

    pub fn columns(&self) -> Vec<&str> {
        [&self.lhs, &self.rhs]
            .into_iter()
            .filter_map(|o| match o {
                Operand::Attr { column, .. } | Operand::Image { column, .. } | Operand::Element { column } => {
                    Some(column.as_str())
                }
                Operand::Const(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for SelectionPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op, self.rhs)
    }
}

/// Set-operator label for range objects: `(A | B)`, `(A & B)`, `(A - B)`.
/// Equal labels are kept as they are.
pub fn combine_label(op: char, lhs: &str, rhs: &str) -> String {
    if lhs == rhs {
        lhs.to_string()
    } else {
        format!("({lhs} {op} {rhs})")
    }
}
