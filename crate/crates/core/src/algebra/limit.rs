//! `Cat` and `Lim`: diagrams of objects and morphism constraints, and the
//! set of tuples that makes every arrow commute.

use std::collections::{HashMap, HashSet};

use super::{scan, AlgebraError, MorphismRef};
use crate::category::{ElementId, InstanceCategory, ObjectKind};
use crate::relation::{Column, Relation, Row};

/// An arrow `morphism: source -> target` between two diagram objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismConstraint {
    pub morphism: MorphismRef,
    pub source: String,
    pub target: String,
}

/// A diagram over stored objects, as written in `Cat(S1, ..., f: Si -> Sj)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiagramSpec {
    pub objects: Vec<String>,
    pub constraints: Vec<MorphismConstraint>,
}

/// Arrow between two columns of a diagram's flattened schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimConstraint {
    pub morphism: MorphismRef,
    pub source: usize,
    pub target: usize,
}

/// An evaluable diagram. Each input relation is one diagram object; a
/// multi-column input stands for a derived relationship object whose
/// projections are its columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramHandle {
    inputs: Vec<Relation>,
    constraints: Vec<LimConstraint>,
}

impl DiagramHandle {
    pub fn new(inputs: Vec<Relation>, constraints: Vec<LimConstraint>) -> Result<Self, AlgebraError> {
        if inputs.is_empty() {
            return Err(AlgebraError::Diagram("a diagram needs at least one object".into()));
        }
        let mut vars = HashSet::new();
        for c in inputs.iter().flat_map(|r| r.columns()) {
            if !vars.insert(c.var.as_str()) {
                return Err(AlgebraError::Diagram(format!("column `{}` appears twice", c.var)));
            }
        }
        let width = vars.len();
        for c in &constraints {
            if c.source >= width || c.target >= width {
                return Err(AlgebraError::Diagram(format!(
                    "constraint {} refers to column {} of a {width}-column diagram",
                    c.morphism,
                    c.source.max(c.target)
                )));
            }
        }
        Ok(Self { inputs, constraints })
    }

    pub fn inputs(&self) -> &[Relation] {
        &self.inputs
    }

    pub fn constraints(&self) -> &[LimConstraint] {
        &self.constraints
    }

    pub fn columns(&self) -> Vec<Column> {
        self.inputs.iter().flat_map(|r| r.columns().iter().cloned()).collect()
    }
}

/// Validates `spec` against `cat` and bundles it for [`op_lim`]. Each
/// object becomes a one-column input whose column is named after it.
pub fn op_cat(cat: &InstanceCategory, spec: &DiagramSpec) -> Result<DiagramHandle, AlgebraError> {
    if spec.objects.is_empty() {
        return Err(AlgebraError::Diagram("a diagram needs at least one object".into()));
    }
    let mut position = HashMap::new();
    for (i, o) in spec.objects.iter().enumerate() {
        if position.insert(o.as_str(), i).is_some() {
            return Err(AlgebraError::Diagram(format!("object `{o}` listed twice")));
        }
        if cat.object(o).is_none() {
            return Err(AlgebraError::Diagram(format!("object `{o}` does not exist")));
        }
    }
    let mut constraints = Vec::with_capacity(spec.constraints.len());
    for c in &spec.constraints {
        let describe = || format!("{}: {} -> {}", c.morphism, c.source, c.target);
        let (&source, &target) = match (position.get(c.source.as_str()), position.get(c.target.as_str())) {
            (Some(s), Some(t)) => (s, t),
            _ => {
                return Err(AlgebraError::Diagram(format!("constraint {} names an object outside the diagram", describe())));
            }
        };
        match &c.morphism {
            MorphismRef::Named(f) => {
                let m = cat
                    .morphism(f)
                    .ok_or_else(|| AlgebraError::Diagram(format!("constraint {}: morphism `{f}` does not exist", describe())))?;
                if m.domain != c.source || m.codomain != c.target {
                    return Err(AlgebraError::Diagram(format!(
                        "constraint {}: `{f}` is declared {} -> {}",
                        describe(),
                        m.domain,
                        m.codomain
                    )));
                }
            }
            MorphismRef::Component(j) => {
                let rel = cat.object(&c.source).unwrap();
                if rel.kind != ObjectKind::Relationship || rel.components.get(*j) != Some(&c.target) {
                    return Err(AlgebraError::Diagram(format!(
                        "constraint {}: component {} of `{}` is not `{}`",
                        describe(),
                        j + 1,
                        c.source,
                        c.target
                    )));
                }
            }
            MorphismRef::Identity => {
                if cat.root_of(&c.source) != cat.root_of(&c.target) {
                    return Err(AlgebraError::Diagram(format!("constraint {}: objects do not share elements", describe())));
                }
            }
        }
        constraints.push(LimConstraint {
            morphism: c.morphism.clone(),
            source,
            target,
        });
    }
    let inputs = spec
        .objects
        .iter()
        .map(|o| scan(cat, o, o))
        .collect::<Result<Vec<_>, _>>()?;
    DiagramHandle::new(inputs, constraints)
}

pub fn op_lim(cat: &InstanceCategory, diagram: &DiagramHandle) -> Result<Relation, AlgebraError> {
    lim(cat, diagram)
}

struct Block {
    /// Flattened diagram columns held by this block, in row order.
    cols: Vec<usize>,
    rows: Vec<Vec<ElementId>>,
}

impl Block {
    fn position(&self, col: usize) -> Option<usize> {
        self.cols.iter().position(|&c| c == col)
    }
}

fn holds(cat: &InstanceCategory, c: &LimConstraint, row: &[ElementId], src: usize, tgt: usize) -> bool {
    c.morphism.apply(cat, &row[src]) == Some(&row[tgt])
}

/// The limit of a diagram: every tuple, one component per diagram column,
/// with `m(row[source]) = row[target]` for each constraint.
///
/// Constraints are joined greedily, cheapest block pair first, with a hash
/// join keyed on the target column. Blocks left unconnected are combined by
/// Cartesian product. The result does not depend on the join order.
pub fn lim(cat: &InstanceCategory, diagram: &DiagramHandle) -> Result<Relation, AlgebraError> {
    let columns = diagram.columns();
    let mut next_col = 0;
    let mut blocks: Vec<Block> = diagram
        .inputs
        .iter()
        .map(|r| {
            let cols = (next_col..next_col + r.arity()).collect();
            next_col += r.arity();
            Block {
                cols,
                rows: r.rows().iter().map(|row| row.to_vec()).collect(),
            }
        })
        .collect();
    let mut pending: Vec<&LimConstraint> = diagram.constraints.iter().collect();

    let block_of = |blocks: &[Block], col: usize| blocks.iter().position(|b| b.position(col).is_some()).unwrap();

    filter_internal(cat, &mut blocks, &mut pending);
    loop {
        let mut best: Option<(usize, usize, usize, u128)> = None;
        for (ci, c) in pending.iter().enumerate() {
            let (a, b) = (block_of(&blocks, c.source), block_of(&blocks, c.target));
            if a == b {
                continue;
            }
            let cost = blocks[a].rows.len() as u128 * blocks[b].rows.len() as u128;
            if best.is_none_or(|(.., bc)| cost < bc) {
                best = Some((ci, a, b, cost));
            }
        }
        let Some((ci, a, b, _)) = best else { break };
        let c = pending.remove(ci);
        let joined = hash_join(cat, &blocks[a], &blocks[b], c);
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        blocks.remove(hi);
        blocks.remove(lo);
        blocks.push(joined);
        filter_internal(cat, &mut blocks, &mut pending);
    }
    debug_assert!(pending.is_empty());

    // Unconnected blocks: Cartesian product, smallest first.
    blocks.sort_by_key(|b| b.rows.len());
    let mut acc = Block {
        cols: Vec::new(),
        rows: vec![Vec::new()],
    };
    for b in blocks {
        let mut rows = Vec::with_capacity(acc.rows.len().saturating_mul(b.rows.len()));
        for left in &acc.rows {
            for right in &b.rows {
                let mut row = Vec::with_capacity(left.len() + right.len());
                row.extend_from_slice(left);
                row.extend_from_slice(right);
                rows.push(row);
            }
        }
        acc.cols.extend(b.cols);
        acc.rows = rows;
    }

    let order: Vec<usize> = (0..columns.len()).map(|c| acc.position(c).unwrap()).collect();
    let rows = acc
        .rows
        .into_iter()
        .map(|row| order.iter().map(|&i| row[i].clone()).collect::<Row>());
    Ok(Relation::new(columns, rows))
}

/// Applies every pending constraint whose two columns already sit in the
/// same block, and drops it from `pending`.
fn filter_internal(cat: &InstanceCategory, blocks: &mut [Block], pending: &mut Vec<&LimConstraint>) {
    pending.retain(|c| {
        for b in blocks.iter_mut() {
            if let (Some(s), Some(t)) = (b.position(c.source), b.position(c.target)) {
                b.rows.retain(|row| holds(cat, c, row, s, t));
                return false;
            }
        }
        true
    });
}

fn hash_join(cat: &InstanceCategory, a: &Block, b: &Block, c: &LimConstraint) -> Block {
    let (src_block, tgt_block) = if a.position(c.source).is_some() { (a, b) } else { (b, a) };
    let s = src_block.position(c.source).unwrap();
    let t = tgt_block.position(c.target).unwrap();
    let mut index: HashMap<&ElementId, Vec<usize>> = HashMap::new();
    for (i, row) in tgt_block.rows.iter().enumerate() {
        index.entry(&row[t]).or_default().push(i);
    }
    let mut rows = Vec::new();
    for left in &src_block.rows {
        let Some(image) = c.morphism.apply(cat, &left[s]) else { continue };
        if let Some(matches) = index.get(image) {
            for &i in matches {
                let mut row = left.clone();
                row.extend_from_slice(&tgt_block.rows[i]);
                rows.push(row);
            }
        }
    }
    let mut cols = src_block.cols.clone();
    cols.extend_from_slice(&tgt_block.cols);
    Block { cols, rows }
}
