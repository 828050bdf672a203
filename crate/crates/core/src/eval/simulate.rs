//! Single algebra operators and the calculus expressions that define them.

use crate::algebra::{
    divide, lim, map, op_cat, op_get_ancestor, op_get_nhop, op_get_parent, op_get_reach, op_get_sibling, project, scan,
    select, AlgebraError, CmpOp, DiagramHandle, DiagramSpec, MorphismRef, Operand, SelectionPredicate,
};
use crate::calculus::{CalculusQuery, Formula, Quantifier, RangeExpr, RangeTerm, RelationshipMembership, Term, TreeAxis};
use crate::category::{InstanceCategory, ObjectKind, Payload};
use crate::relation::{Column, Relation, Row};

/// One operator applied to stored objects.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraOp {
    /// `Map(f, S1)` for `f: S1 -> S2`.
    Map { morphism: String, domain: String, codomain: String },
    /// `Select(S, A(x) θ B(x))`; the predicate's columns are all `x`.
    Select { object: String, pred: SelectionPredicate },
    /// Projection of a relationship object onto some of its components.
    Project { relationship: String, arity: usize, keep: Vec<usize> },
    /// `π_Ā S1 ÷ π_B S2`: dividend components `by` are matched positionally
    /// against divisor components `divisor_by`. The projection morphisms of
    /// both relationships are named so the calculus can reach components;
    /// `by_objects` are the objects the divided components range over.
    Divide {
        dividend: String,
        dividend_proj: Vec<String>,
        by: Vec<usize>,
        by_objects: Vec<String>,
        divisor: String,
        divisor_proj: Vec<String>,
        divisor_by: Vec<usize>,
    },
    Tree { axis: TreeAxis, d1: String, d2: String },
    Reach { source: String, target: String, edges: String },
    NHop { source: String, target: String, edges: String, n: u32 },
    /// `Cat(S1, ..., Sn, arrows)`, observed through its product of objects.
    Cat(DiagramSpec),
    /// `Lim(Cat(...))`. Arrows are stored morphisms or identities.
    Lim(DiagramSpec),
}

fn var(i: usize) -> String {
    format!("x{}", i + 1)
}

fn range(var: String, object: &str) -> RangeTerm {
    RangeTerm {
        var,
        range: RangeExpr::object(object),
    }
}

fn term(op: &Operand) -> Term {
    match op {
        Operand::Attr { column, attr } => Term::Attr {
            var: column.clone(),
            attr: attr.clone(),
        },
        Operand::Image { column, morphism } => Term::Attr {
            var: column.clone(),
            attr: morphism.to_string(),
        },
        Operand::Element { column } => Term::Var(column.clone()),
        Operand::Const(v) => Term::Const(v.clone()),
    }
}

fn morph_eq(morphism: impl Into<String>, arg: impl Into<String>, result: impl Into<String>) -> Formula {
    Formula::MorphEq {
        morphism: morphism.into(),
        arg: arg.into(),
        result: result.into(),
    }
}

fn diagram_query(spec: &DiagramSpec, with_arrows: bool) -> CalculusQuery {
    let targets: Vec<String> = (0..spec.objects.len()).map(var).collect();
    let ranges = spec.objects.iter().enumerate().map(|(i, o)| range(var(i), o)).collect();
    let index = |o: &str| spec.objects.iter().position(|p| p == o).map(var).unwrap_or_else(|| o.to_string());
    let arrows = if with_arrows {
        spec.constraints
            .iter()
            .map(|c| {
                let (s, t) = (index(&c.source), index(&c.target));
                match &c.morphism {
                    MorphismRef::Identity => Formula::Cmp {
                        lhs: Term::Var(s),
                        op: CmpOp::Eq,
                        rhs: Term::Var(t),
                    },
                    m => morph_eq(m.to_string(), s, t),
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    CalculusQuery {
        targets,
        ranges,
        memberships: Vec::new(),
        matrix: Formula::and(arrows),
    }
}

/// The calculus expression defining `op`'s output.
pub fn simulate_algebra_in_calculus(op: &AlgebraOp) -> CalculusQuery {
    match op {
        AlgebraOp::Map { morphism, domain, codomain } => CalculusQuery {
            targets: vec!["y".into()],
            ranges: vec![range("y".into(), codomain)],
            memberships: Vec::new(),
            matrix: Formula::quant(Quantifier::Exists, "x", RangeExpr::object(domain), morph_eq(morphism, "x", "y")),
        },
        AlgebraOp::Select { object, pred } => CalculusQuery {
            targets: vec!["x".into()],
            ranges: vec![range("x".into(), object)],
            memberships: Vec::new(),
            matrix: Formula::Cmp {
                lhs: term(&pred.lhs),
                op: pred.op,
                rhs: term(&pred.rhs),
            },
        },
        AlgebraOp::Project { relationship, arity, keep } => CalculusQuery {
            targets: keep.iter().map(|&i| var(i)).collect(),
            ranges: Vec::new(),
            memberships: vec![RelationshipMembership {
                var: "r".into(),
                components: (0..*arity).map(var).collect(),
                object: relationship.clone(),
            }],
            matrix: Formula::True,
        },
        AlgebraOp::Divide {
            dividend,
            dividend_proj,
            by,
            by_objects,
            divisor,
            divisor_proj,
            divisor_by,
        } => {
            let arity = dividend_proj.len();
            let keep: Vec<usize> = (0..arity).filter(|i| !by.contains(i)).collect();
            let components = (0..arity)
                .map(|i| if by.contains(&i) { format!("w{}", i + 1) } else { var(i) })
                .collect();
            // (x, y) ∈ S1 for the y picked out by t: some u in S1 agrees with
            // x on the kept components and with t on the divided ones.
            let mut body: Vec<Formula> = keep.iter().map(|&i| morph_eq(&dividend_proj[i], "u", var(i))).collect();
            let mut inner_vars = Vec::new();
            for (k, (&b, &d)) in by.iter().zip(divisor_by).enumerate() {
                let v = format!("v{}", k + 1);
                body.push(morph_eq(&divisor_proj[d], "t", v.clone()));
                body.push(morph_eq(&dividend_proj[b], "u", v.clone()));
                inner_vars.push((v, &by_objects[k]));
            }
            let mut matrix = Formula::and(body);
            for (v, object) in inner_vars.into_iter().rev() {
                matrix = Formula::quant(Quantifier::Exists, v, RangeExpr::object(object), matrix);
            }
            matrix = Formula::quant(Quantifier::Exists, "u", RangeExpr::object(dividend), matrix);
            matrix = Formula::quant(Quantifier::Forall, "t", RangeExpr::object(divisor), matrix);
            CalculusQuery {
                targets: keep.iter().map(|&i| var(i)).collect(),
                ranges: Vec::new(),
                memberships: vec![RelationshipMembership {
                    var: "s".into(),
                    components,
                    object: dividend.clone(),
                }],
                matrix,
            }
        }
        AlgebraOp::Tree { axis, d1, d2 } => CalculusQuery {
            targets: vec!["x1".into(), "x2".into()],
            ranges: vec![range("x1".into(), d1), range("x2".into(), d2)],
            memberships: Vec::new(),
            matrix: Formula::Tree {
                axis: *axis,
                x: "x1".into(),
                y: "x2".into(),
            },
        },
        AlgebraOp::Reach { source, target, edges } => CalculusQuery {
            targets: vec!["x1".into(), "x2".into()],
            ranges: vec![range("x1".into(), source), range("x2".into(), target)],
            memberships: Vec::new(),
            matrix: Formula::Reach {
                x: "x1".into(),
                y: "x2".into(),
                edges: edges.clone(),
            },
        },
        AlgebraOp::NHop { source, target, edges, n } => CalculusQuery {
            targets: vec!["x1".into(), "x2".into()],
            ranges: vec![range("x1".into(), source), range("x2".into(), target)],
            memberships: Vec::new(),
            matrix: Formula::NHop {
                n: *n,
                x: "x1".into(),
                y: "x2".into(),
                edges: edges.clone(),
            },
        },
        AlgebraOp::Cat(spec) => diagram_query(spec, false),
        AlgebraOp::Lim(spec) => diagram_query(spec, true),
    }
}

/// The relation of a relationship object's tuples, one column per component.
pub fn tuple_relation(cat: &InstanceCategory, relationship: &str, vars: &[String]) -> Result<Relation, AlgebraError> {
    let object = cat
        .object(relationship)
        .ok_or_else(|| AlgebraError::Invalid(format!("no object `{relationship}`")))?;
    if object.kind != ObjectKind::Relationship || object.components.len() != vars.len() {
        return Err(AlgebraError::Invalid(format!(
            "`{relationship}` is not a relationship of arity {}",
            vars.len()
        )));
    }
    let columns = vars
        .iter()
        .zip(&object.components)
        .map(|(v, c)| Column::new(v.clone(), c.clone()))
        .collect();
    let mut rows = Vec::new();
    for id in cat.members(relationship)? {
        match cat.element(id).map(|e| &e.payload) {
            Some(Payload::Tuple(parts)) if parts.len() == vars.len() => rows.push(Row::from(parts.clone())),
            _ => return Err(AlgebraError::Invalid(format!("element {id} of `{relationship}` is not a tuple"))),
        }
    }
    Ok(Relation::new(columns, rows))
}

/// Evaluates `op` with the algebra operators.
pub fn direct_evaluate(op: &AlgebraOp, cat: &InstanceCategory) -> Result<Relation, AlgebraError> {
    match op {
        AlgebraOp::Map { morphism, domain, .. } => map(cat, morphism, &scan(cat, domain, "x")?, "y"),
        AlgebraOp::Select { object, pred } => select(cat, &scan(cat, object, "x")?, pred),
        AlgebraOp::Project { relationship, arity, keep } => {
            let vars: Vec<String> = (0..*arity).map(var).collect();
            let keep: Vec<&String> = keep.iter().map(|&i| &vars[i]).collect();
            project(&tuple_relation(cat, relationship, &vars)?, &keep)
        }
        AlgebraOp::Divide {
            dividend,
            dividend_proj,
            by,
            divisor,
            divisor_proj,
            divisor_by,
            ..
        } => {
            let vars: Vec<String> = (0..dividend_proj.len()).map(var).collect();
            let divisor_vars: Vec<String> = (0..divisor_proj.len()).map(|i| format!("t{}", i + 1)).collect();
            let picked: Vec<&String> = divisor_by.iter().map(|&i| &divisor_vars[i]).collect();
            let divisor = project(&tuple_relation(cat, divisor, &divisor_vars)?, &picked)?;
            let by: Vec<&String> = by.iter().map(|&i| &vars[i]).collect();
            divide(&tuple_relation(cat, dividend, &vars)?, &divisor, &by)
        }
        AlgebraOp::Tree { axis, d1, d2 } => match axis {
            TreeAxis::Parent => op_get_parent(cat, d1, d2),
            TreeAxis::Ancestor => op_get_ancestor(cat, d1, d2),
            TreeAxis::Sibling => op_get_sibling(cat, d1, d2),
        },
        AlgebraOp::Reach { source, target, edges } => op_get_reach(cat, source, target, edges),
        AlgebraOp::NHop { source, target, edges, n } => op_get_nhop(cat, source, target, edges, *n as usize),
        AlgebraOp::Cat(spec) => {
            let handle = op_cat(cat, spec)?;
            lim(cat, &DiagramHandle::new(handle.inputs().to_vec(), Vec::new())?)
        }
        AlgebraOp::Lim(spec) => lim(cat, &op_cat(cat, spec)?),
    }
}
