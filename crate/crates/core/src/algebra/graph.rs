//! Reachability over edge sets.
//!
//! An edge set is a binary relationship object whose tuples are
//! `(source, target)` pairs of a node object.

use std::collections::{HashMap, HashSet};

use super::{scan, AlgebraError};
use crate::category::{ElementId, InstanceCategory, ObjectKind, Payload};
use crate::relation::{Relation, Row};

/// Whether a path of `len` edges witnesses reachability. Paths must use at
/// least one edge, so a node reaches itself only through a cycle.
pub fn reach_admits_path_len(len: usize) -> bool {
    len >= 1
}

/// Dense adjacency lists over the nodes touched by an edge set.
pub struct EdgeSet {
    index: HashMap<ElementId, usize>,
    forward: Vec<Vec<usize>>,
    backward: Vec<Vec<usize>>,
    edge_count: usize,
}

impl EdgeSet {
    pub fn load(cat: &InstanceCategory, edges: &str) -> Result<Self, AlgebraError> {
        let err = |reason: String| AlgebraError::EdgeSet {
            edges: edges.to_string(),
            reason,
        };
        let object = cat.object(edges).ok_or_else(|| err("no such object".into()))?;
        if object.kind != ObjectKind::Relationship || object.components.len() != 2 {
            return Err(err("not a binary relationship object".into()));
        }
        let (src_obj, dst_obj) = (&object.components[0], &object.components[1]);
        let mut set = EdgeSet {
            index: HashMap::new(),
            forward: Vec::new(),
            backward: Vec::new(),
            edge_count: 0,
        };
        let mut seen = HashSet::new();
        for id in cat.members(edges)? {
            let element = cat.element(id).ok_or_else(|| err(format!("edge {id} has no payload")))?;
            let Payload::Tuple(parts) = &element.payload else {
                return Err(err(format!("edge {id} is not a tuple")));
            };
            let [src, dst] = parts.as_slice() else {
                return Err(err(format!("edge {id} is not a pair")));
            };
            if !cat.contains(src_obj, src) {
                return Err(err(format!("edge {id} starts outside `{src_obj}`")));
            }
            if !cat.contains(dst_obj, dst) {
                return Err(err(format!("edge {id} ends outside `{dst_obj}`")));
            }
            let (s, d) = (set.node(src), set.node(dst));
            if seen.insert((s, d)) {
                set.forward[s].push(d);
                set.backward[d].push(s);
                set.edge_count += 1;
            }
        }
        Ok(set)
    }

    fn node(&mut self, id: &ElementId) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.forward.len();
        self.index.insert(id.clone(), i);
        self.forward.push(Vec::new());
        self.backward.push(Vec::new());
        i
    }

    pub fn node_count(&self) -> usize {
        self.forward.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Nodes reachable from `start` over paths admitted by
    /// [`reach_admits_path_len`]. Breadth-first; `O(nodes + edges)`.
    fn reachable_from(&self, start: usize, reverse: bool, seen: &mut [bool]) -> Vec<usize> {
        let adj = if reverse { &self.backward } else { &self.forward };
        seen.fill(false);
        let mut out = Vec::new();
        if reach_admits_path_len(0) {
            seen[start] = true;
            out.push(start);
        }
        let mut queue: Vec<usize> = Vec::new();
        for &n in &adj[start] {
            if !seen[n] {
                seen[n] = true;
                out.push(n);
                queue.push(n);
            }
        }
        while let Some(u) = queue.pop() {
            for &n in &adj[u] {
                if !seen[n] {
                    seen[n] = true;
                    out.push(n);
                    queue.push(n);
                }
            }
        }
        out
    }

    /// Nodes at the end of some walk of exactly `n` edges from `start`.
    fn walk_ends(&self, start: usize, n: usize, reverse: bool, mark: &mut [bool]) -> Vec<usize> {
        let adj = if reverse { &self.backward } else { &self.forward };
        let mut frontier = vec![start];
        for _ in 0..n {
            mark.fill(false);
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in &adj[u] {
                    if !mark[v] {
                        mark[v] = true;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                return next;
            }
            frontier = next;
        }
        frontier
    }
}

fn unary_ids(rel: &Relation) -> Result<Vec<ElementId>, AlgebraError> {
    if rel.arity() != 1 {
        return Err(AlgebraError::Invalid(format!("graph operators expect one-column inputs, got {}", rel.arity())));
    }
    Ok(rel.rows().iter().map(|r| r[0].clone()).collect())
}

fn pairs_by<F>(edges: &EdgeSet, s: &Relation, t: &Relation, mut expand: F) -> Result<Relation, AlgebraError>
where
    F: FnMut(usize, bool, &mut [bool]) -> Vec<usize>,
{
    let sources = unary_ids(s)?;
    let targets = unary_ids(t)?;
    let ids: Vec<&ElementId> = {
        let mut v = vec![None; edges.node_count()];
        for (id, &i) in &edges.index {
            v[i] = Some(id);
        }
        v.into_iter().map(Option::unwrap).collect()
    };
    let mut scratch = vec![false; edges.node_count()];
    let mut rows: Vec<Row> = Vec::new();
    // Search from the smaller side; backwards over reversed edges when
    // that is the target side.
    if sources.len() <= targets.len() {
        let wanted: HashSet<&ElementId> = targets.iter().collect();
        for src in &sources {
            let Some(&start) = edges.index.get(src) else { continue };
            for n in expand(start, false, &mut scratch) {
                if wanted.contains(ids[n]) {
                    rows.push(vec![src.clone(), ids[n].clone()].into_boxed_slice());
                }
            }
        }
    } else {
        let wanted: HashSet<&ElementId> = sources.iter().collect();
        for dst in &targets {
            let Some(&start) = edges.index.get(dst) else { continue };
            for n in expand(start, true, &mut scratch) {
                if wanted.contains(ids[n]) {
                    rows.push(vec![ids[n].clone(), dst.clone()].into_boxed_slice());
                }
            }
        }
    }
    let mut columns = s.columns().to_vec();
    columns.extend_from_slice(t.columns());
    Ok(Relation::new(columns, rows))
}

/// Pairs `(x1, x2)` in `S × T` joined by a directed path over `edges`.
///
/// Runs one breadth-first search per element of the smaller of `S` and `T`:
/// `O(n² + min(|S|, |T|)·|E|)` for `n` nodes.
pub fn get_reach(cat: &InstanceCategory, s: &Relation, t: &Relation, edges: &str) -> Result<Relation, AlgebraError> {
    let graph = EdgeSet::load(cat, edges)?;
    pairs_by(&graph, s, t, |start, reverse, seen| graph.reachable_from(start, reverse, seen))
}

/// Pairs `(x1, x2)` in `S × T` joined by a walk of exactly `n` edges.
/// Walks may revisit nodes.
pub fn get_nhop(cat: &InstanceCategory, s: &Relation, t: &Relation, edges: &str, n: usize) -> Result<Relation, AlgebraError> {
    if n == 0 {
        return Err(AlgebraError::Invalid("nhop needs n >= 1".into()));
    }
    let graph = EdgeSet::load(cat, edges)?;
    pairs_by(&graph, s, t, |start, reverse, mark| graph.walk_ends(start, n, reverse, mark))
}

pub fn op_get_reach(cat: &InstanceCategory, s: &str, t: &str, edges: &str) -> Result<Relation, AlgebraError> {
    get_reach(cat, &scan(cat, s, "x1")?, &scan(cat, t, "x2")?, edges)
}

pub fn op_get_nhop(cat: &InstanceCategory, s: &str, t: &str, edges: &str, n: usize) -> Result<Relation, AlgebraError> {
    get_nhop(cat, &scan(cat, s, "x1")?, &scan(cat, t, "x2")?, edges, n)
}
