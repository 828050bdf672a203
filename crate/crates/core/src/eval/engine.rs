//! Bottom-up plan interpreter.

use std::fmt;

use crate::algebra::{
    difference, divide, get_ancestor, get_nhop, get_parent, get_reach, get_sibling, intersect, lim, map, project, scan,
    select, union, AlgebraError, DiagramHandle, LimConstraint,
};
use crate::calculus::TreeAxis;
use crate::category::InstanceCategory;
use crate::compile::{AlgebraPlan, NodeId, PlanOp};
use crate::relation::{Column, Relation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalError {
    pub node: NodeId,
    pub op: &'static str,
    pub source: AlgebraError,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node n{} ({}): {}", self.node, self.op, self.source)
    }
}

impl std::error::Error for EvalError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

enum Slot {
    Empty,
    Rel(Relation),
    Diagram(DiagramHandle),
}

fn relabel(r: Relation, vars: &[String; 2]) -> Relation {
    let columns = r
        .columns()
        .iter()
        .zip(vars)
        .map(|(c, v)| Column::new(v.clone(), c.object.clone()))
        .collect();
    r.with_columns(columns)
}

/// Evaluates the live nodes of `plan` in order and returns the root's
/// relation, relabelled with the plan's output names. Rows are canonical.
pub fn evaluate(plan: &AlgebraPlan, cat: &InstanceCategory) -> Result<Relation, EvalError> {
    let mut slots: Vec<Slot> = (0..plan.nodes().len()).map(|_| Slot::Empty).collect();
    for id in plan.live_nodes() {
        let op = &plan.node(id).op;
        let fail = |source: AlgebraError| EvalError {
            node: id,
            op: op.name(),
            source,
        };
        let rel = |n: NodeId| -> Result<&Relation, EvalError> {
            match &slots[n] {
                Slot::Rel(r) => Ok(r),
                _ => Err(fail(AlgebraError::Invalid(format!("input n{n} is not a relation")))),
            }
        };
        let value = match op {
            PlanOp::Scan { object, var } => Slot::Rel(scan(cat, object, var).map_err(fail)?),
            PlanOp::Map { input, morphism, var } => Slot::Rel(map(cat, morphism, rel(*input)?, var).map_err(fail)?),
            PlanOp::Select { input, pred } => Slot::Rel(select(cat, rel(*input)?, pred).map_err(fail)?),
            PlanOp::Project { input, keep } => Slot::Rel(project(rel(*input)?, keep).map_err(fail)?),
            PlanOp::Divide { dividend, divisor, by } => {
                Slot::Rel(divide(rel(*dividend)?, rel(*divisor)?, by).map_err(fail)?)
            }
            PlanOp::Union { lhs, rhs } => Slot::Rel(union(rel(*lhs)?, rel(*rhs)?).map_err(fail)?),
            PlanOp::Intersect { lhs, rhs } => Slot::Rel(intersect(rel(*lhs)?, rel(*rhs)?).map_err(fail)?),
            PlanOp::Difference { lhs, rhs } => Slot::Rel(difference(rel(*lhs)?, rel(*rhs)?).map_err(fail)?),
            PlanOp::Cat { inputs, arrows } => {
                let inputs: Vec<Relation> = inputs.iter().map(|&n| rel(n).cloned()).collect::<Result<_, _>>()?;
                let columns: Vec<String> = inputs.iter().flat_map(|r| r.columns().iter().map(|c| c.var.clone())).collect();
                let index = |v: &str| {
                    columns
                        .iter()
                        .position(|c| c == v)
                        .ok_or_else(|| fail(AlgebraError::UnknownColumn(v.to_string())))
                };
                let constraints = arrows
                    .iter()
                    .map(|a| {
                        Ok(LimConstraint {
                            morphism: a.morphism.clone(),
                            source: index(&a.source)?,
                            target: index(&a.target)?,
                        })
                    })
                    .collect::<Result<Vec<_>, EvalError>>()?;
                Slot::Diagram(DiagramHandle::new(inputs, constraints).map_err(fail)?)
            }
            PlanOp::Lim { diagram } => match &slots[*diagram] {
                Slot::Diagram(d) => Slot::Rel(lim(cat, d).map_err(fail)?),
                _ => return Err(fail(AlgebraError::Invalid(format!("input n{diagram} is not a diagram")))),
            },
            PlanOp::Tree { axis, lhs, rhs, vars } => {
                let (a, b) = (rel(*lhs)?, rel(*rhs)?);
                let r = match axis {
                    TreeAxis::Parent => get_parent(cat, a, b),
                    TreeAxis::Ancestor => get_ancestor(cat, a, b),
                    TreeAxis::Sibling => get_sibling(cat, a, b),
                };
                Slot::Rel(relabel(r.map_err(fail)?, vars))
            }
            PlanOp::Reach { source, target, edges, vars } => {
                Slot::Rel(relabel(get_reach(cat, rel(*source)?, rel(*target)?, edges).map_err(fail)?, vars))
            }
            PlanOp::NHop { source, target, edges, n, vars } => Slot::Rel(relabel(
                get_nhop(cat, rel(*source)?, rel(*target)?, edges, *n as usize).map_err(fail)?,
                vars,
            )),
        };
        slots[id] = value;
    }
    let root = plan.root();
    match std::mem::replace(&mut slots[root], Slot::Empty) {
        Slot::Rel(r) => {
            let columns = r
                .columns()
                .iter()
                .zip(plan.labels())
                .map(|(c, (_, label))| Column::new(label.clone(), c.object.clone()))
                .collect();
            Ok(r.with_columns(columns))
        }
        _ => Err(EvalError {
            node: root,
            op: plan.node(root).op.name(),
            source: AlgebraError::Invalid("plan root is not a relation".into()),
        }),
    }
}
