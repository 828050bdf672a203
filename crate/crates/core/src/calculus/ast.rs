use std::collections::BTreeSet;

use crate::algebra::{combine_label, CmpOp};
use crate::value::Value;

/// A set expression over object names, giving a variable its range.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RangeExpr {
    In(String),
    Or(Box<RangeExpr>, Box<RangeExpr>),
    And(Box<RangeExpr>, Box<RangeExpr>),
    AndNot(Box<RangeExpr>, Box<RangeExpr>),
}

impl RangeExpr {
    pub fn object(name: impl Into<String>) -> Self {
        RangeExpr::In(name.into())
    }

    pub fn or(self, other: RangeExpr) -> Self {
        RangeExpr::Or(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: RangeExpr) -> Self {
        RangeExpr::And(Box::new(self), Box::new(other))
    }

    pub fn and_not(self, other: RangeExpr) -> Self {
        RangeExpr::AndNot(Box::new(self), Box::new(other))
    }

    /// Object names mentioned, left to right, with repeats.
    pub fn objects(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_objects(&mut out);
        out
    }

    fn collect_objects<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            RangeExpr::In(o) => out.push(o),
            RangeExpr::Or(a, b) | RangeExpr::And(a, b) | RangeExpr::AndNot(a, b) => {
                a.collect_objects(out);
                b.collect_objects(out);
            }
        }
    }

    /// The object label a result column carries for this range.
    pub fn label(&self) -> String {
        match self {
            RangeExpr::In(o) => o.clone(),
            RangeExpr::Or(a, b) => combine_label('|', &a.label(), &b.label()),
            RangeExpr::And(a, b) => combine_label('&', &a.label(), &b.label()),
            RangeExpr::AndNot(a, b) => combine_label('-', &a.label(), &b.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RangeTerm {
    pub var: String,
    pub range: RangeExpr,
}

/// `r = (x1, ..., xm) in R`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationshipMembership {
    pub var: String,
    pub components: Vec<String>,
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// `x.attr`
    Attr { var: String, attr: String },
    /// The element bound to a variable.
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(&self) -> Option<&str> {
        match self {
            Term::Attr { var, .. } | Term::Var(var) => Some(var),
            Term::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeAxis {
    Parent,
    Ancestor,
    Sibling,
}

impl TreeAxis {
    pub fn keyword(self) -> &'static str {
        match self {
            TreeAxis::Parent => "isParent",
            TreeAxis::Ancestor => "isAncestor",
            TreeAxis::Sibling => "isSibling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }

    pub fn dual(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Cmp { lhs: Term, op: CmpOp, rhs: Term },
    /// `f(arg) = result`
    MorphEq { morphism: String, arg: String, result: String },
    Tree { axis: TreeAxis, x: String, y: String },
    Reach { x: String, y: String, edges: String },
    NHop { n: u32, x: String, y: String, edges: String },
    /// `x in O`; only meaningful as a range conjunct.
    In { var: String, range: RangeExpr },
    /// `r = (x, y) in R`; only meaningful as a top-level conjunct.
    Member(RelationshipMembership),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Quant { q: Quantifier, var: String, range: RangeExpr, body: Box<Formula> },
}

impl Formula {
    pub fn negate(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn quant(q: Quantifier, var: impl Into<String>, range: RangeExpr, body: Formula) -> Formula {
        Formula::Quant {
            q,
            var: var.into(),
            range,
            body: Box::new(body),
        }
    }

    /// Conjunction, flattening nested conjunctions and dropping `true`.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::And(inner) => flat.extend(inner),
                Formula::True => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::True,
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    /// Disjunction, flattening nested disjunctions and dropping `false`.
    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::Or(inner) => flat.extend(inner),
                Formula::False => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::False,
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    pub fn is_atom(&self) -> bool {
        !matches!(self, Formula::Not(_) | Formula::And(_) | Formula::Or(_) | Formula::Quant { .. })
    }

    /// Variables mentioned by an atom, in order.
    pub fn atom_vars(&self) -> Vec<&str> {
        match self {
            Formula::True | Formula::False => vec![],
            Formula::Cmp { lhs, rhs, .. } => lhs.var().into_iter().chain(rhs.var()).collect(),
            Formula::MorphEq { arg, result, .. } => vec![arg, result],
            Formula::Tree { x, y, .. } | Formula::Reach { x, y, .. } | Formula::NHop { x, y, .. } => vec![x, y],
            Formula::In { var, .. } => vec![var],
            Formula::Member(m) => std::iter::once(m.var.as_str()).chain(m.components.iter().map(|s| s.as_str())).collect(),
            Formula::Not(_) | Formula::And(_) | Formula::Or(_) | Formula::Quant { .. } => vec![],
        }
    }

    /// Variables occurring free, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Quant { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            atom => {
                for v in atom.atom_vars() {
                    if !bound.iter().any(|b| b == v) && !out.iter().any(|o| o == v) {
                        out.push(v.to_string());
                    }
                }
            }
        }
    }

    /// Whether `var` occurs free.
    pub fn mentions(&self, var: &str) -> bool {
        self.free_vars().iter().any(|v| v == var)
    }

    /// Maximum quantifier nesting depth.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(|f| f.quantifier_depth()).max().unwrap_or(0),
            Formula::Quant { body, .. } => 1 + body.quantifier_depth(),
            _ => 0,
        }
    }

    /// Renames free occurrences of variables via `map`.
    pub fn rename(&self, map: &dyn Fn(&str) -> Option<String>) -> Formula {
        let r = |v: &String| map(v).unwrap_or_else(|| v.clone());
        let term = |t: &Term| match t {
            Term::Attr { var, attr } => Term::Attr {
                var: r(var),
                attr: attr.clone(),
            },
            Term::Var(v) => Term::Var(r(v)),
            Term::Const(c) => Term::Const(c.clone()),
        };
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Cmp { lhs, op, rhs } => Formula::Cmp {
                lhs: term(lhs),
                op: *op,
                rhs: term(rhs),
            },
            Formula::MorphEq { morphism, arg, result } => Formula::MorphEq {
                morphism: morphism.clone(),
                arg: r(arg),
                result: r(result),
            },
            Formula::Tree { axis, x, y } => Formula::Tree {
                axis: *axis,
                x: r(x),
                y: r(y),
            },
            Formula::Reach { x, y, edges } => Formula::Reach {
                x: r(x),
                y: r(y),
                edges: edges.clone(),
            },
            Formula::NHop { n, x, y, edges } => Formula::NHop {
                n: *n,
                x: r(x),
                y: r(y),
                edges: edges.clone(),
            },
            Formula::In { var, range } => Formula::In {
                var: r(var),
                range: range.clone(),
            },
            Formula::Member(m) => Formula::Member(RelationshipMembership {
                var: r(&m.var),
                components: m.components.iter().map(r).collect(),
                object: m.object.clone(),
            }),
            Formula::Not(f) => Formula::negate(f.rename(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename(map)).collect()),
            Formula::Quant { q, var, range, body } => {
                let inner = |v: &str| if v == var { None } else { map(v) };
                Formula::Quant {
                    q: *q,
                    var: var.clone(),
                    range: range.clone(),
                    body: Box::new(body.rename(&inner)),
                }
            }
        }
    }
}

/// A parsed calculus query `{ targets | ranges ∧ memberships ∧ matrix }`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CalculusQuery {
    pub targets: Vec<String>,
    pub ranges: Vec<RangeTerm>,
    pub memberships: Vec<RelationshipMembership>,
    pub matrix: Formula,
}

impl CalculusQuery {
    pub fn range_of(&self, var: &str) -> Option<&RangeExpr> {
        self.ranges.iter().find(|r| r.var == var).map(|r| &r.range)
    }

    pub fn membership_of(&self, var: &str) -> Option<&RelationshipMembership> {
        self.memberships.iter().find(|m| m.var == var)
    }

    /// Free variables: targets, then ranged, relationship and component
    /// variables, then variables free in the matrix, without repeats.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |v: &str| {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        };
        self.targets.iter().for_each(|t| push(t));
        self.ranges.iter().for_each(|r| push(&r.var));
        for m in &self.memberships {
            push(&m.var);
            m.components.iter().for_each(|c| push(c));
        }
        for v in self.matrix.free_vars() {
            push(&v);
        }
        out
    }

    /// Every object name the query mentions.
    pub fn object_names(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, out: &mut BTreeSet<String>) {
            match f {
                Formula::Reach { edges, .. } | Formula::NHop { edges, .. } => {
                    out.insert(edges.clone());
                }
                Formula::In { range, .. } => out.extend(range.objects().into_iter().map(String::from)),
                Formula::Member(m) => {
                    out.insert(m.object.clone());
                }
                Formula::Not(g) => walk(g, out),
                Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| walk(g, out)),
                Formula::Quant { range, body, .. } => {
                    out.extend(range.objects().into_iter().map(String::from));
                    walk(body, out);
                }
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        for r in &self.ranges {
            out.extend(r.range.objects().into_iter().map(String::from));
        }
        for m in &self.memberships {
            out.insert(m.object.clone());
        }
        walk(&self.matrix, &mut out);
        out
    }
}
