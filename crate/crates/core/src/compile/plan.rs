//! Algebra plans: DAGs of operator nodes with a stable text form.

use std::collections::HashMap;
use std::fmt;

use crate::algebra::{MorphismRef, Operand, SelectionPredicate};
use crate::calculus::TreeAxis;

pub type NodeId = usize;

/// An arrow between two columns of a `cat` diagram.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CatArrow {
    pub morphism: MorphismRef,
    pub source: String,
    pub target: String,
}

impl fmt::Display for CatArrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.morphism, self.source, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlanOp {
    Scan { object: String, var: String },
    Map { input: NodeId, morphism: String, var: String },
    Select { input: NodeId, pred: SelectionPredicate },
    Project { input: NodeId, keep: Vec<String> },
    Divide { dividend: NodeId, divisor: NodeId, by: Vec<String> },
    Union { lhs: NodeId, rhs: NodeId },
    Intersect { lhs: NodeId, rhs: NodeId },
    Difference { lhs: NodeId, rhs: NodeId },
    /// A diagram; only consumed by `Lim`.
    Cat { inputs: Vec<NodeId>, arrows: Vec<CatArrow> },
    Lim { diagram: NodeId },
    Tree { axis: TreeAxis, lhs: NodeId, rhs: NodeId, vars: [String; 2] },
    Reach { source: NodeId, target: NodeId, edges: String, vars: [String; 2] },
    NHop { source: NodeId, target: NodeId, edges: String, n: u32, vars: [String; 2] },
}

impl PlanOp {
    pub fn name(&self) -> &'static str {
        match self {
            PlanOp::Scan { .. } => "scan",
            PlanOp::Map { .. } => "map",
            PlanOp::Select { .. } => "select",
            PlanOp::Project { .. } => "project",
            PlanOp::Divide { .. } => "divide",
            PlanOp::Union { .. } => "union",
            PlanOp::Intersect { .. } => "intersect",
            PlanOp::Difference { .. } => "difference",
            PlanOp::Cat { .. } => "cat",
            PlanOp::Lim { .. } => "lim",
            PlanOp::Tree { axis: TreeAxis::Parent, .. } => "getParent",
            PlanOp::Tree { axis: TreeAxis::Ancestor, .. } => "getAncestor",
            PlanOp::Tree { axis: TreeAxis::Sibling, .. } => "getSibling",
            PlanOp::Reach { .. } => "getReach",
            PlanOp::NHop { .. } => "getnHop",
        }
    }

    pub fn inputs(&self) -> Vec<NodeId> {
        match self {
            PlanOp::Scan { .. } => vec![],
            PlanOp::Map { input, .. } | PlanOp::Select { input, .. } | PlanOp::Project { input, .. } => vec![*input],
            PlanOp::Divide { dividend, divisor, .. } => vec![*dividend, *divisor],
            PlanOp::Union { lhs, rhs } | PlanOp::Intersect { lhs, rhs } | PlanOp::Difference { lhs, rhs } => {
                vec![*lhs, *rhs]
            }
            PlanOp::Cat { inputs, .. } => inputs.clone(),
            PlanOp::Lim { diagram } => vec![*diagram],
            PlanOp::Tree { lhs, rhs, .. } => vec![*lhs, *rhs],
            PlanOp::Reach { source, target, .. } | PlanOp::NHop { source, target, .. } => vec![*source, *target],
        }
    }

    fn params(&self) -> String {
        match self {
            PlanOp::Scan { object, var } => format!("{object} as {var}"),
            PlanOp::Map { morphism, var, .. } => format!("{morphism} as {var}"),
            PlanOp::Select { pred, .. } => pred.to_string(),
            PlanOp::Project { keep, .. } => format!("[{}]", keep.join(", ")),
            PlanOp::Divide { by, .. } => format!("by [{}]", by.join(", ")),
            PlanOp::Union { .. } | PlanOp::Intersect { .. } | PlanOp::Difference { .. } | PlanOp::Lim { .. } => {
                String::new()
            }
            PlanOp::Cat { arrows, .. } => {
                let a: Vec<String> = arrows.iter().map(|a| a.to_string()).collect();
                format!("[{}]", a.join("; "))
            }
            PlanOp::Tree { vars, .. } => format!("as ({}, {})", vars[0], vars[1]),
            PlanOp::Reach { edges, vars, .. } => format!("{edges} as ({}, {})", vars[0], vars[1]),
            PlanOp::NHop { edges, n, vars, .. } => format!("{edges} n={n} as ({}, {})", vars[0], vars[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanNode {
    pub op: PlanOp,
    /// Output column variables (for `cat`, the diagram's flattened columns).
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanError {
    pub node: NodeId,
    pub message: String,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node n{}: {}", self.node, self.message)
    }
}

impl std::error::Error for PlanError {}

/// A DAG of operator nodes. Inputs always precede their consumers, so node
/// order is a topological order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlgebraPlan {
    nodes: Vec<PlanNode>,
    root: NodeId,
    /// `(plan column, output label)` for the root's columns.
    labels: Vec<(String, String)>,
}

impl AlgebraPlan {
    pub fn nodes(&self) -> &[PlanNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &PlanNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn labels(&self) -> &[(String, String)] {
        &self.labels
    }

    pub fn set_root(&mut self, root: NodeId, labels: Vec<(String, String)>) {
        self.root = root;
        self.labels = labels;
    }

    /// Nodes reachable from the root, in id order.
    pub fn live_nodes(&self) -> Vec<NodeId> {
        let mut live = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            if n < live.len() && !live[n] {
                live[n] = true;
                stack.extend(self.nodes[n].op.inputs());
            }
        }
        (0..self.nodes.len()).filter(|&i| live[i]).collect()
    }

    /// Checks acyclicity, input kinds and column schemas bottom-up.
    pub fn check(&self) -> Result<(), PlanError> {
        if self.root >= self.nodes.len() {
            return Err(PlanError {
                node: self.root,
                message: "root is not a node".into(),
            });
        }
        for (id, node) in self.nodes.iter().enumerate() {
            let cols = infer_columns(&node.op, id, &self.nodes[..id])?;
            if cols != node.columns {
                return Err(PlanError {
                    node: id,
                    message: format!("declared columns [{}] differ from [{}]", node.columns.join(", "), cols.join(", ")),
                });
            }
        }
        if matches!(self.nodes[self.root].op, PlanOp::Cat { .. }) {
            return Err(PlanError {
                node: self.root,
                message: "a diagram cannot be the plan result".into(),
            });
        }
        let root_cols = &self.nodes[self.root].columns;
        if self.labels.len() != root_cols.len() || self.labels.iter().zip(root_cols).any(|((c, _), r)| c != r) {
            return Err(PlanError {
                node: self.root,
                message: "output labels do not match the root's columns".into(),
            });
        }
        Ok(())
    }

    /// The line-oriented text form: one node per line, then the root.
    pub fn to_text(&self) -> String {
        let live = self.live_nodes();
        let renumber: HashMap<NodeId, usize> = live.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut out = String::new();
        for &n in &live {
            let op = &self.nodes[n].op;
            let inputs: Vec<String> = op.inputs().iter().map(|i| format!("n{}", renumber[i])).collect();
            let head = match op {
                PlanOp::Scan { .. } => format!("n{} scan", renumber[&n]),
                _ => format!("n{} {}({})", renumber[&n], op.name(), inputs.join(", ")),
            };
            let params = op.params();
            if params.is_empty() {
                out.push_str(&head);
            } else {
                out.push_str(&format!("{head} {params}"));
            }
            out.push('\n');
        }
        let labels: Vec<String> = self
            .labels
            .iter()
            .map(|(c, l)| if c == l { c.clone() } else { format!("{c} as {l}") })
            .collect();
        out.push_str(&format!("root n{} [{}]\n", renumber[&self.root], labels.join(", ")));
        out
    }
}

impl fmt::Display for AlgebraPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn err(node: NodeId, message: impl Into<String>) -> PlanError {
    PlanError {
        node,
        message: message.into(),
    }
}

/// The output columns of `op` given earlier nodes.
pub(crate) fn infer_columns(op: &PlanOp, id: NodeId, earlier: &[PlanNode]) -> Result<Vec<String>, PlanError> {
    let input = |n: NodeId| -> Result<&PlanNode, PlanError> {
        earlier
            .get(n)
            .ok_or_else(|| err(id, format!("input n{n} does not precede this node")))
    };
    let relation = |n: NodeId| -> Result<&Vec<String>, PlanError> {
        let node = input(n)?;
        if matches!(node.op, PlanOp::Cat { .. }) {
            return Err(err(id, format!("input n{n} is a diagram, not a relation")));
        }
        Ok(&node.columns)
    };
    let unary = |n: NodeId| -> Result<(), PlanError> {
        match relation(n)?.len() {
            1 => Ok(()),
            k => Err(err(id, format!("input n{n} has {k} columns, expected 1"))),
        }
    };
    let has = |cols: &[String], c: &str| cols.iter().any(|x| x == c);
    match op {
        PlanOp::Scan { var, .. } => Ok(vec![var.clone()]),
        PlanOp::Map { input, var, .. } => {
            unary(*input)?;
            Ok(vec![var.clone()])
        }
        PlanOp::Select { input, pred } => {
            let cols = relation(*input)?;
            for c in pred.columns() {
                if !has(cols, c) {
                    return Err(err(id, format!("selection mentions unknown column `{c}`")));
                }
            }
            if let (Operand::Image { .. }, Operand::Image { .. }) = (&pred.lhs, &pred.rhs) {
                return Err(err(id, "selection compares two images"));
            }
            Ok(cols.clone())
        }
        PlanOp::Project { input, keep } => {
            let cols = relation(*input)?;
            if keep.is_empty() {
                return Err(err(id, "projection keeps no columns"));
            }
            for (i, k) in keep.iter().enumerate() {
                if !has(cols, k) || keep[..i].contains(k) {
                    return Err(err(id, format!("projection column `{k}` is unknown or repeated")));
                }
            }
            Ok(keep.clone())
        }
        PlanOp::Divide { dividend, divisor, by } => {
            let cols = relation(*dividend)?;
            let dcols = relation(*divisor)?;
            if by.is_empty() || dcols.len() != by.len() {
                return Err(err(id, "divisor arity does not match the division columns"));
            }
            for (i, b) in by.iter().enumerate() {
                if !has(cols, b) || by[..i].contains(b) {
                    return Err(err(id, format!("division column `{b}` is unknown or repeated")));
                }
            }
            let rest: Vec<String> = cols.iter().filter(|c| !by.contains(c)).cloned().collect();
            if rest.is_empty() {
                return Err(err(id, "division by every column"));
            }
            Ok(rest)
        }
        PlanOp::Union { lhs, rhs } | PlanOp::Intersect { lhs, rhs } | PlanOp::Difference { lhs, rhs } => {
            let (a, b) = (relation(*lhs)?, relation(*rhs)?);
            if a != b {
                return Err(err(id, format!("inputs are not union-compatible: [{}] vs [{}]", a.join(", "), b.join(", "))));
            }
            Ok(a.clone())
        }
        PlanOp::Cat { inputs, arrows } => {
            if inputs.is_empty() {
                return Err(err(id, "empty diagram"));
            }
            let mut cols: Vec<String> = Vec::new();
            for &n in inputs {
                for c in relation(n)? {
                    if has(&cols, c) {
                        return Err(err(id, format!("column `{c}` appears twice in the diagram")));
                    }
                    cols.push(c.clone());
                }
            }
            for a in arrows {
                if !has(&cols, &a.source) || !has(&cols, &a.target) {
                    return Err(err(id, format!("arrow {a} refers to a column outside the diagram")));
                }
            }
            Ok(cols)
        }
        PlanOp::Lim { diagram } => {
            let node = input(*diagram)?;
            if !matches!(node.op, PlanOp::Cat { .. }) {
                return Err(err(id, "lim needs a cat input"));
            }
            Ok(node.columns.clone())
        }
        PlanOp::Tree { lhs, rhs, vars, .. }
        | PlanOp::Reach { source: lhs, target: rhs, vars, .. }
        | PlanOp::NHop { source: lhs, target: rhs, vars, .. } => {
            unary(*lhs)?;
            unary(*rhs)?;
            if let PlanOp::NHop { n: 0, .. } = op {
                return Err(err(id, "nhop needs n >= 1"));
            }
            if vars[0] == vars[1] {
                return Err(err(id, "predicate columns must differ"));
            }
            Ok(vars.to_vec())
        }
    }
}

/// Appends nodes, sharing structurally identical ones.
#[derive(Default)]
pub struct PlanBuilder {
    plan: AlgebraPlan,
    index: HashMap<PlanOp, NodeId>,
}

impl PlanBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, op: PlanOp) -> Result<NodeId, PlanError> {
        if let Some(&id) = self.index.get(&op) {
            return Ok(id);
        }
        let id = self.plan.nodes.len();
        let columns = infer_columns(&op, id, &self.plan.nodes)?;
        self.plan.nodes.push(PlanNode { op: op.clone(), columns });
        self.index.insert(op, id);
        Ok(id)
    }

    pub fn columns(&self, id: NodeId) -> &[String] {
        &self.plan.nodes[id].columns
    }

    pub fn op(&self, id: NodeId) -> &PlanOp {
        &self.plan.nodes[id].op
    }

    /// Projection that collapses onto an inner projection and disappears
    /// when it keeps every column in order.
    pub fn project(&mut self, input: NodeId, keep: Vec<String>) -> Result<NodeId, PlanError> {
        if self.columns(input) == keep.as_slice() {
            return Ok(input);
        }
        let input = match self.op(input) {
            PlanOp::Project { input: inner, .. } => *inner,
            _ => input,
        };
        self.add(PlanOp::Project { input, keep })
    }

    pub fn finish(mut self, root: NodeId, labels: Vec<(String, String)>) -> Result<AlgebraPlan, PlanError> {
        self.plan.set_root(root, labels);
        self.plan.check()?;
        Ok(self.plan)
    }
}
