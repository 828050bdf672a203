//! Reference semantics: exhaustive enumeration of the calculus.
//!
//! Deliberately independent of the algebra operators. Reachability is a
//! fresh breadth-first search over the edge tuples, tree axes compare Dewey
//! components directly, and nothing is indexed.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::calculus::{check_safety, CalculusQuery, Formula, RangeExpr, Term, TreeAxis};
use crate::category::{ElementId, InstanceCategory, Payload, Violation};
use crate::relation::{Column, Relation};
use crate::value::Value;

/// Default cap on the number of candidate assignments the oracle visits.
pub const DEFAULT_ORACLE_BOUND: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    Unsafe(Vec<Violation>),
    Bound { size: u64, bound: u64 },
    Eval(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Unsafe(v) => {
                let parts: Vec<String> = v.iter().map(|v| v.to_string()).collect();
                write!(f, "query is not safe: {}", parts.join("; "))
            }
            OracleError::Bound { size, bound } => {
                write!(f, "enumeration of {size} assignments exceeds the bound of {bound}")
            }
            OracleError::Eval(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for OracleError {}

fn range_set(range: &RangeExpr, cat: &InstanceCategory) -> BTreeSet<ElementId> {
    match range {
        RangeExpr::In(o) => cat.members(o).map(|m| m.iter().cloned().collect()).unwrap_or_default(),
        RangeExpr::Or(a, b) => &range_set(a, cat) | &range_set(b, cat),
        RangeExpr::And(a, b) => &range_set(a, cat) & &range_set(b, cat),
        RangeExpr::AndNot(a, b) => &range_set(a, cat) - &range_set(b, cat),
    }
}

fn tuple_of<'a>(cat: &'a InstanceCategory, x: &ElementId) -> Option<&'a [ElementId]> {
    match &cat.element(x)?.payload {
        Payload::Tuple(parts) => Some(parts),
        _ => None,
    }
}

fn dewey_components<'a>(cat: &'a InstanceCategory, x: &ElementId) -> Option<&'a [u32]> {
    let element = cat.element(x)?;
    let v = match &element.payload {
        Payload::Atom(v) => v,
        Payload::Record(_) => element.record_field("dewey")?,
        Payload::Tuple(_) => return None,
    };
    match v {
        Value::Dewey(d) => Some(d.components()),
        _ => None,
    }
}

struct Oracle<'a> {
    cat: &'a InstanceCategory,
    ranges: RefCell<HashMap<RangeExpr, Vec<ElementId>>>,
    adjacency: RefCell<HashMap<String, HashMap<ElementId, Vec<ElementId>>>>,
    reachable: RefCell<HashMap<(String, ElementId), BTreeSet<ElementId>>>,
}

type Env = Vec<(String, ElementId)>;

impl<'a> Oracle<'a> {
    fn members(&self, range: &RangeExpr) -> Vec<ElementId> {
        self.ranges
            .borrow_mut()
            .entry(range.clone())
            .or_insert_with(|| range_set(range, self.cat).into_iter().collect())
            .clone()
    }

    fn successors(&self, edges: &str, x: &ElementId) -> Vec<ElementId> {
        let mut adjacency = self.adjacency.borrow_mut();
        let adj = adjacency.entry(edges.to_string()).or_insert_with(|| {
            let mut adj: HashMap<ElementId, Vec<ElementId>> = HashMap::new();
            for e in self.cat.members(edges).unwrap_or(&[]) {
                if let Some([s, t]) = tuple_of(self.cat, e) {
                    let out = adj.entry(s.clone()).or_default();
                    if !out.contains(t) {
                        out.push(t.clone());
                    }
                }
            }
            adj
        });
        adj.get(x).cloned().unwrap_or_default()
    }

    /// Nodes at the end of some walk of one or more edges from `x`.
    fn reach_from(&self, edges: &str, x: &ElementId) -> BTreeSet<ElementId> {
        let key = (edges.to_string(), x.clone());
        if let Some(r) = self.reachable.borrow().get(&key) {
            return r.clone();
        }
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<ElementId> = self.successors(edges, x).into();
        while let Some(n) = queue.pop_front() {
            if seen.insert(n.clone()) {
                queue.extend(self.successors(edges, &n));
            }
        }
        self.reachable.borrow_mut().insert(key, seen.clone());
        seen
    }

    /// Nodes at the end of some walk of exactly `n` edges from `x`.
    fn walk_from(&self, edges: &str, x: &ElementId, n: u32) -> BTreeSet<ElementId> {
        let mut frontier: BTreeSet<ElementId> = [x.clone()].into();
        for _ in 0..n {
            frontier = frontier.iter().flat_map(|f| self.successors(edges, f)).collect();
        }
        frontier
    }

    fn lookup<'e>(&self, env: &'e Env, var: &str) -> Result<&'e ElementId, OracleError> {
        env.iter()
            .rev()
            .find(|(v, _)| *v == var)
            .map(|(_, id)| id)
            .ok_or_else(|| OracleError::Eval(format!("unbound variable `{var}`")))
    }

    fn term(&self, env: &Env, t: &Term) -> Result<Result<Value, ElementId>, OracleError> {
        Ok(match t {
            Term::Const(v) => Ok(v.clone()),
            Term::Var(v) => Err(self.lookup(env, v)?.clone()),
            Term::Attr { var, attr } => {
                let x = self.lookup(env, var)?;
                Ok(self.cat.attribute_of(x, attr).map_err(|e| OracleError::Eval(e.to_string()))?)
            }
        })
    }

    fn holds(&self, f: &Formula, env: &mut Env) -> Result<bool, OracleError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Cmp { lhs, op, rhs } => match (self.term(env, lhs)?, self.term(env, rhs)?) {
                (Ok(a), Ok(b)) => {
                    let ord = a.compare(&b).map_err(|e| OracleError::Eval(e.to_string()))?;
                    op.holds(ord)
                }
                (Err(a), Err(b)) => {
                    let ord = if a == b { Ordering::Equal } else { a.cmp(&b) };
                    match op.symbol() {
                        "=" | "!=" => op.holds(ord),
                        s => return Err(OracleError::Eval(format!("elements cannot be compared with `{s}`"))),
                    }
                }
                _ => return Err(OracleError::Eval("an element is compared with a value".into())),
            },
            Formula::MorphEq { morphism, arg, result } => {
                let x = self.lookup(env, arg)?;
                let y = self.lookup(env, result)?;
                self.cat.try_apply(morphism, x) == Some(y)
            }
            Formula::Tree { axis, x, y } => {
                let a = self.lookup(env, x)?;
                let b = self.lookup(env, y)?;
                let missing = |id: &ElementId| OracleError::Eval(format!("element {id} carries no dewey code"));
                let ca = dewey_components(self.cat, a).ok_or_else(|| missing(a))?;
                let cb = dewey_components(self.cat, b).ok_or_else(|| missing(b))?;
                match axis {
                    TreeAxis::Parent => cb.len() == ca.len() + 1 && cb.starts_with(ca),
                    TreeAxis::Ancestor => cb.len() > ca.len() && cb.starts_with(ca),
                    TreeAxis::Sibling => {
                        let n = ca.len();
                        n >= 2 && cb.len() == n && ca[..n - 1] == cb[..n - 1] && ca[n - 1] != cb[n - 1]
                    }
                }
            }
            Formula::Reach { x, y, edges } => {
                let a = self.lookup(env, x)?;
                let b = self.lookup(env, y)?;
                self.reach_from(edges, a).contains(b)
            }
            Formula::NHop { n, x, y, edges } => {
                let a = self.lookup(env, x)?;
                let b = self.lookup(env, y)?;
                self.walk_from(edges, a, *n).contains(b)
            }
            Formula::In { var, range } => {
                let x = self.lookup(env, var)?;
                range_set(range, self.cat).contains(x)
            }
            Formula::Member(m) => {
                let r = self.lookup(env, &m.var)?;
                self.cat.contains(&m.object, r)
                    && match tuple_of(self.cat, r) {
                        Some(parts) if parts.len() == m.components.len() => {
                            let mut ok = true;
                            for (c, p) in m.components.iter().zip(parts) {
                                ok &= self.lookup(env, c)? == p;
                            }
                            ok
                        }
                        _ => false,
                    }
            }
            Formula::Not(g) => !self.holds(g, env)?,
            Formula::And(fs) => {
                for g in fs {
                    if !self.holds(g, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for g in fs {
                    if self.holds(g, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Quant { q, var, range, body } => {
                let want = matches!(q, crate::calculus::Quantifier::Exists);
                let mut result = !want;
                for x in self.members(range) {
                    env.push((var.clone(), x));
                    let h = self.holds(body, env);
                    env.pop();
                    if h? == want {
                        result = want;
                        break;
                    }
                }
                result
            }
        })
    }
}

/// Number of candidate assignments: free-variable domains times every
/// quantifier range along the deepest nesting.
fn work_estimate(oracle: &Oracle, domains: &[Vec<ElementId>], matrix: &Formula) -> u64 {
    fn nested(oracle: &Oracle, f: &Formula) -> u64 {
        match f {
            Formula::Not(g) => nested(oracle, g),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(|g| nested(oracle, g)).fold(1, u64::saturating_add),
            Formula::Quant { range, body, .. } => {
                (oracle.members(range).len() as u64).max(1).saturating_mul(nested(oracle, body))
            }
            _ => 1,
        }
    }
    domains
        .iter()
        .fold(1u64, |acc, d| acc.saturating_mul(d.len() as u64))
        .saturating_mul(nested(oracle, matrix))
}

/// Evaluates `q` by enumerating every assignment of its free variables,
/// with the default bound.
pub fn oracle_evaluate(q: &CalculusQuery, cat: &InstanceCategory) -> Result<Relation, OracleError> {
    oracle_evaluate_bounded(q, cat, DEFAULT_ORACLE_BOUND)
}

/// Free variables range over their range term, their relationship object,
/// or (for an unranged component) the component object. Free variables
/// that are not targets are read existentially.
pub fn oracle_evaluate_bounded(q: &CalculusQuery, cat: &InstanceCategory, bound: u64) -> Result<Relation, OracleError> {
    let violations = check_safety(q, cat);
    if !violations.is_empty() {
        return Err(OracleError::Unsafe(violations));
    }
    let oracle = Oracle {
        cat,
        ranges: RefCell::default(),
        adjacency: RefCell::default(),
        reachable: RefCell::default(),
    };

    let mut vars: Vec<String> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut domains: Vec<Vec<ElementId>> = Vec::new();
    for v in q.free_vars() {
        let (label, domain) = if let Some(range) = q.range_of(&v) {
            (range.label(), oracle.members(range))
        } else if let Some(m) = q.membership_of(&v) {
            let members = cat.members(&m.object).map_err(|e| OracleError::Eval(e.to_string()))?;
            (m.object.clone(), members.to_vec())
        } else if let Some((m, j)) = q
            .memberships
            .iter()
            .find_map(|m| m.components.iter().position(|c| *c == v).map(|j| (m, j)))
        {
            let object = cat
                .object(&m.object)
                .and_then(|o| o.components.get(j))
                .ok_or_else(|| OracleError::Eval(format!("`{}` has no component {}", m.object, j + 1)))?;
            let members = cat.members(object).map_err(|e| OracleError::Eval(e.to_string()))?;
            (object.clone(), members.to_vec())
        } else {
            return Err(OracleError::Eval(format!("variable `{v}` has no range")));
        };
        vars.push(v);
        labels.push(label);
        domains.push(domain);
    }

    let size = work_estimate(&oracle, &domains, &q.matrix);
    if size > bound {
        return Err(OracleError::Bound { size, bound });
    }

    let target_pos: Vec<usize> = q
        .targets
        .iter()
        .map(|t| vars.iter().position(|v| v == t).expect("targets are free variables"))
        .collect();
    let columns = target_pos
        .iter()
        .map(|&i| Column::new(vars[i].clone(), labels[i].clone()))
        .collect();
    let mut rows = BTreeSet::new();
    let members: Vec<Formula> = q.memberships.iter().cloned().map(Formula::Member).collect();

    if domains.iter().all(|d| !d.is_empty()) {
        let mut counter = vec![0usize; vars.len()];
        loop {
            let mut env: Env = vars
                .iter()
                .zip(&counter)
                .zip(&domains)
                .map(|((v, &i), d)| (v.clone(), d[i].clone()))
                .collect();
            let mut ok = true;
            for m in &members {
                ok = ok && oracle.holds(m, &mut env)?;
            }
            if ok && oracle.holds(&q.matrix, &mut env)? {
                rows.insert(target_pos.iter().map(|&i| env[i].1.clone()).collect::<Vec<_>>());
            }
            let mut k = vars.len();
            loop {
                if k == 0 {
                    return Ok(Relation::new(columns, rows.into_iter().map(Vec::into_boxed_slice)));
                }
                k -= 1;
                counter[k] += 1;
                if counter[k] < domains[k].len() {
                    break;
                }
                counter[k] = 0;
            }
        }
    }
    Ok(Relation::new(columns, rows.into_iter().map(Vec::into_boxed_slice)))
}
