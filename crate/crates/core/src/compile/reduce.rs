//! The calculus-to-algebra reduction over a normalized query.

use std::collections::{BTreeMap, HashMap};

use super::plan::{CatArrow, NodeId, PlanBuilder, PlanOp};
use super::{CompileError, CompileOptions, Fault};
use crate::algebra::{CmpOp, MorphismRef, Operand, SelectionPredicate};
use crate::calculus::{Formula, Quantifier, RangeExpr, Term};
use crate::category::{InstanceCategory, ObjectKind};
use crate::normalize::{Clause, Literal, PrenexQuery};

/// Range objects and relationship arrows shared by every clause.
pub struct Context {
    /// Free variables, then quantified ones: the column order of every
    /// clause result.
    pub vars: Vec<String>,
    pub ranges: BTreeMap<String, NodeId>,
    pub relationship_arrows: Vec<CatArrow>,
    /// Column names of derived predicate objects, per distinct atom.
    predicates: HashMap<Formula, [String; 2]>,
}

/// A clause diagram: the objects and arrows of its category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseDiagram {
    pub inputs: Vec<NodeId>,
    pub arrows: Vec<CatArrow>,
}

fn range_node(b: &mut PlanBuilder, var: &str, range: &RangeExpr) -> Result<NodeId, CompileError> {
    let op = match range {
        RangeExpr::In(o) => PlanOp::Scan {
            object: o.clone(),
            var: var.to_string(),
        },
        RangeExpr::Or(l, r) => PlanOp::Union {
            lhs: range_node(b, var, l)?,
            rhs: range_node(b, var, r)?,
        },
        RangeExpr::And(l, r) => PlanOp::Intersect {
            lhs: range_node(b, var, l)?,
            rhs: range_node(b, var, r)?,
        },
        RangeExpr::AndNot(l, r) => PlanOp::Difference {
            lhs: range_node(b, var, l)?,
            rhs: range_node(b, var, r)?,
        },
    };
    Ok(b.add(op)?)
}

/// One range node per variable: range terms become scans combined by set
/// operators; relationship variables scan their object; unranged
/// relationship components scan the component object.
pub fn build_range_objects(
    b: &mut PlanBuilder,
    q: &PrenexQuery,
    cat: &InstanceCategory,
) -> Result<(Vec<String>, BTreeMap<String, NodeId>), CompileError> {
    let mut vars: Vec<String> = Vec::new();
    let mut ranges = BTreeMap::new();
    for r in &q.ranges {
        ranges.insert(r.var.clone(), range_node(b, &r.var, &r.range)?);
        vars.push(r.var.clone());
    }
    for m in &q.memberships {
        let obj = cat
            .object(&m.object)
            .ok_or_else(|| CompileError::Invalid(format!("unknown relationship object `{}`", m.object)))?;
        ranges.insert(
            m.var.clone(),
            b.add(PlanOp::Scan {
                object: m.object.clone(),
                var: m.var.clone(),
            })?,
        );
        vars.push(m.var.clone());
        for (c, comp) in m.components.iter().zip(&obj.components) {
            if !ranges.contains_key(c) {
                ranges.insert(
                    c.clone(),
                    b.add(PlanOp::Scan {
                        object: comp.clone(),
                        var: c.clone(),
                    })?,
                );
                vars.push(c.clone());
            }
        }
    }
    for p in &q.prefix {
        ranges.insert(p.var.clone(), range_node(b, &p.var, &p.range)?);
        vars.push(p.var.clone());
    }
    Ok((vars, ranges))
}

/// The projection arrows `pi_j: r -> x_j` of each membership.
pub fn build_relationship_objects(q: &PrenexQuery, cat: &InstanceCategory) -> Result<Vec<CatArrow>, CompileError> {
    let mut arrows = Vec::new();
    for m in &q.memberships {
        let obj = cat
            .object(&m.object)
            .filter(|o| o.kind == ObjectKind::Relationship)
            .ok_or_else(|| CompileError::Invalid(format!("`{}` is not a relationship object", m.object)))?;
        if obj.components.len() != m.components.len() {
            return Err(CompileError::Invalid(format!(
                "`{}` has arity {}, membership lists {}",
                m.object,
                obj.components.len(),
                m.components.len()
            )));
        }
        for (j, c) in m.components.iter().enumerate() {
            arrows.push(CatArrow {
                morphism: MorphismRef::Component(j),
                source: m.var.clone(),
                target: c.clone(),
            });
        }
    }
    Ok(arrows)
}

pub fn build_context(b: &mut PlanBuilder, q: &PrenexQuery, cat: &InstanceCategory) -> Result<Context, CompileError> {
    let (vars, ranges) = build_range_objects(b, q, cat)?;
    Ok(Context {
        vars,
        ranges,
        relationship_arrows: build_relationship_objects(q, cat)?,
        predicates: HashMap::new(),
    })
}

fn is_derived_predicate(atom: &Formula) -> bool {
    matches!(atom, Formula::Tree { .. } | Formula::Reach { .. } | Formula::NHop { .. })
}

/// One derived relationship object per positive tree or graph literal,
/// with identity arrows onto the variables' columns.
pub fn build_predicate_objects(
    b: &mut PlanBuilder,
    clause: &Clause,
    ctx: &mut Context,
) -> Result<Vec<(NodeId, Vec<CatArrow>)>, CompileError> {
    let mut out = Vec::new();
    for lit in clause.iter().filter(|l| is_derived_predicate(&l.atom)) {
        if !lit.positive {
            return Err(CompileError::NegatedPredicate(lit.to_string()));
        }
        let next = ctx.predicates.len() + 1;
        let vars = ctx
            .predicates
            .entry(lit.atom.clone())
            .or_insert_with(|| [format!("p{next}_1"), format!("p{next}_2")])
            .clone();
        let (x, y) = match &lit.atom {
            Formula::Tree { x, y, .. } | Formula::Reach { x, y, .. } | Formula::NHop { x, y, .. } => (x, y),
            _ => unreachable!(),
        };
        let range = |v: &str| {
            ctx.ranges
                .get(v)
                .copied()
                .ok_or_else(|| CompileError::Invalid(format!("variable `{v}` has no range")))
        };
        let (rx, ry) = (range(x)?, range(y)?);
        let op = match &lit.atom {
            Formula::Tree { axis, .. } => PlanOp::Tree {
                axis: *axis,
                lhs: rx,
                rhs: ry,
                vars: vars.clone(),
            },
            Formula::Reach { edges, .. } => PlanOp::Reach {
                source: rx,
                target: ry,
                edges: edges.clone(),
                vars: vars.clone(),
            },
            Formula::NHop { n, edges, .. } => PlanOp::NHop {
                source: rx,
                target: ry,
                edges: edges.clone(),
                n: *n,
                vars: vars.clone(),
            },
            _ => unreachable!(),
        };
        let node = b.add(op)?;
        let [v1, v2] = vars;
        let arrows = vec![
            CatArrow {
                morphism: MorphismRef::Identity,
                source: v1,
                target: x.clone(),
            },
            CatArrow {
                morphism: MorphismRef::Identity,
                source: v2,
                target: y.clone(),
            },
        ];
        out.push((node, arrows));
    }
    Ok(out)
}

/// The clause category: every variable's range object, the relationship
/// and predicate objects, and one arrow per positive `f(x) = y`.
pub fn build_clause_category(
    b: &mut PlanBuilder,
    clause: &Clause,
    ctx: &mut Context,
) -> Result<ClauseDiagram, CompileError> {
    let mut inputs: Vec<NodeId> = ctx.vars.iter().map(|v| ctx.ranges[v]).collect();
    let mut arrows = ctx.relationship_arrows.clone();
    for lit in clause.iter().filter(|l| l.positive) {
        if let Formula::MorphEq { morphism, arg, result } = &lit.atom {
            let arrow = CatArrow {
                morphism: MorphismRef::Named(morphism.clone()),
                source: arg.clone(),
                target: result.clone(),
            };
            if !arrows.contains(&arrow) {
                arrows.push(arrow);
            }
        }
    }
    for (node, more) in build_predicate_objects(b, clause, ctx)? {
        if !inputs.contains(&node) {
            inputs.push(node);
        }
        arrows.extend(more);
    }
    Ok(ClauseDiagram { inputs, arrows })
}

fn operand(t: &Term) -> Operand {
    match t {
        Term::Attr { var, attr } => Operand::Attr {
            column: var.clone(),
            attr: attr.clone(),
        },
        Term::Var(v) => Operand::Element { column: v.clone() },
        Term::Const(c) => Operand::Const(c.clone()),
    }
}

fn inject(op: CmpOp, fault: Option<Fault>) -> CmpOp {
    match fault {
        Some(Fault::FlipTheta) => match op {
            CmpOp::Gt => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Gt,
            CmpOp::Lt => CmpOp::Le,
            CmpOp::Le => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        },
        None => op,
    }
}

/// Selection for a comparison or negated morphism literal; `None` for
/// literals the diagram already enforces.
fn selection(lit: &Literal, opts: &CompileOptions) -> Result<Option<SelectionPredicate>, CompileError> {
    match (&lit.atom, lit.positive) {
        (Formula::Cmp { lhs, op, rhs }, positive) => {
            let op = if positive { *op } else { op.complement() };
            Ok(Some(SelectionPredicate::new(operand(lhs), inject(op, opts.fault), operand(rhs))))
        }
        (Formula::MorphEq { morphism, arg, result }, false) => Ok(Some(SelectionPredicate::new(
            Operand::Image {
                column: arg.clone(),
                morphism: MorphismRef::Named(morphism.clone()),
            },
            CmpOp::Ne,
            Operand::Element { column: result.clone() },
        ))),
        (Formula::MorphEq { .. }, true) => Ok(None),
        (a, _) if is_derived_predicate(a) => Ok(None),
        (Formula::True | Formula::False, _) => Ok(None),
        (other, _) => Err(CompileError::Invalid(format!("`{other}` cannot appear in a clause"))),
    }
}

/// `Lim` of the clause category, then one selection per comparison, then
/// a projection onto the variable columns.
pub fn compile_clause(
    b: &mut PlanBuilder,
    clause: &Clause,
    ctx: &mut Context,
    opts: &CompileOptions,
) -> Result<NodeId, CompileError> {
    let diagram = build_clause_category(b, clause, ctx)?;
    let cat = b.add(PlanOp::Cat {
        inputs: diagram.inputs,
        arrows: diagram.arrows,
    })?;
    let mut node = b.add(PlanOp::Lim { diagram: cat })?;
    for lit in clause {
        if let Some(pred) = selection(lit, opts)? {
            node = b.add(PlanOp::Select { input: node, pred })?;
        }
    }
    Ok(b.project(node, ctx.vars.clone())?)
}

fn product(b: &mut PlanBuilder, ctx: &Context, vars: &[String]) -> Result<NodeId, CompileError> {
    let inputs = vars.iter().map(|v| ctx.ranges[v]).collect();
    let cat = b.add(PlanOp::Cat { inputs, arrows: vec![] })?;
    Ok(b.add(PlanOp::Lim { diagram: cat })?)
}

/// Steps after normalization: clause limits, union, quantifier
/// elimination innermost-first, and the final projection.
pub fn reduce(
    q: &PrenexQuery,
    labels: &[(String, String)],
    cat: &InstanceCategory,
    opts: &CompileOptions,
) -> Result<super::AlgebraPlan, CompileError> {
    for p in q.prefix.iter().filter(|p| p.q == Quantifier::Forall) {
        let used = q
            .clauses
            .iter()
            .flatten()
            .any(|l| l.atom.atom_vars().contains(&p.var.as_str()));
        if !used {
            return Err(CompileError::UnusedUniversal(p.var.clone()));
        }
    }
    let mut b = PlanBuilder::new();
    let mut ctx = build_context(&mut b, q, cat)?;
    let mut clause_nodes = Vec::new();
    for clause in &q.clauses {
        clause_nodes.push(compile_clause(&mut b, clause, &mut ctx, opts)?);
    }
    let mut node = match clause_nodes.split_first() {
        Some((&first, rest)) => {
            let mut acc = first;
            for &n in rest {
                acc = b.add(PlanOp::Union { lhs: acc, rhs: n })?;
            }
            acc
        }
        None => {
            let all = product(&mut b, &ctx, &ctx.vars.clone())?;
            b.add(PlanOp::Difference { lhs: all, rhs: all })?
        }
    };

    let mut cols = ctx.vars.clone();
    let mut end = q.prefix.len();
    while end > 0 {
        let kind = q.prefix[end - 1].q;
        let mut start = end;
        while start > 0 && q.prefix[start - 1].q == kind {
            start -= 1;
        }
        let block: Vec<String> = q.prefix[start..end].iter().map(|p| p.var.clone()).collect();
        let rest: Vec<String> = cols.iter().filter(|c| !block.contains(c)).cloned().collect();
        node = match kind {
            Quantifier::Exists => b.project(node, rest.clone())?,
            Quantifier::Forall => {
                let divisor = product(&mut b, &ctx, &block)?;
                b.add(PlanOp::Divide {
                    dividend: node,
                    divisor,
                    by: block,
                })?
            }
        };
        cols = rest;
        end = start;
    }
    let targets = q.targets.clone();
    node = b.project(node, targets.clone())?;
    let out_labels = targets
        .iter()
        .map(|t| {
            let label = labels.iter().find(|(_, new)| new == t).map(|(old, _)| old.clone());
            (t.clone(), label.unwrap_or_else(|| t.clone()))
        })
        .collect();
    Ok(b.finish(node, out_labels)?)
}
