//! Random safe queries with stratified construct coverage.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::category::{DECIMALS, INT_MAX, TEXTS};
use crate::algebra::CmpOp;
use crate::calculus::{
    check_safety, CalculusQuery, Formula, Quantifier, RangeExpr, RangeTerm, RelationshipMembership, Term, TreeAxis,
};
use crate::category::{Carrier, InstanceCategory, ObjectKind, Payload};
use crate::compile::{compile, CompileError};
use crate::value::{Decimal, Value};

/// A query construct the generator can be asked to exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Construct {
    MorphEq,
    Compare,
    Forall,
    Exists,
    Reach,
    NHop,
    Tree,
    Membership,
    RangeAlgebra,
    Disjunction,
    Negation,
}

impl Construct {
    pub const ALL: [Construct; 11] = [
        Construct::MorphEq,
        Construct::Compare,
        Construct::Forall,
        Construct::Exists,
        Construct::Reach,
        Construct::NHop,
        Construct::Tree,
        Construct::Membership,
        Construct::RangeAlgebra,
        Construct::Disjunction,
        Construct::Negation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Construct::MorphEq => "morphism-eq",
            Construct::Compare => "compare",
            Construct::Forall => "forall",
            Construct::Exists => "exists",
            Construct::Reach => "reach",
            Construct::NHop => "nhop",
            Construct::Tree => "tree",
            Construct::Membership => "membership",
            Construct::RangeAlgebra => "range-algebra",
            Construct::Disjunction => "or",
            Construct::Negation => "not",
        }
    }

    pub fn parse(s: &str) -> Option<Construct> {
        Construct::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Which constructs generated queries may use, and how deeply quantifiers
/// nest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Features {
    pub constructs: BTreeSet<Construct>,
    pub max_depth: usize,
}

impl Features {
    pub fn all(max_depth: usize) -> Self {
        Self {
            constructs: Construct::ALL.into_iter().collect(),
            max_depth,
        }
    }

    pub fn none() -> Self {
        Self {
            constructs: BTreeSet::new(),
            max_depth: 0,
        }
    }

    pub fn has(&self, c: Construct) -> bool {
        self.constructs.contains(&c)
    }
}

impl Default for Features {
    fn default() -> Self {
        Features::all(3)
    }
}

/// The constructs a query actually contains.
pub fn constructs_of(q: &CalculusQuery) -> BTreeSet<Construct> {
    fn walk(f: &Formula, out: &mut BTreeSet<Construct>) {
        match f {
            Formula::Cmp { .. } => {
                out.insert(Construct::Compare);
            }
            Formula::MorphEq { .. } => {
                out.insert(Construct::MorphEq);
            }
            Formula::Tree { .. } => {
                out.insert(Construct::Tree);
            }
            Formula::Reach { .. } => {
                out.insert(Construct::Reach);
            }
            Formula::NHop { .. } => {
                out.insert(Construct::NHop);
            }
            Formula::Not(g) => {
                out.insert(Construct::Negation);
                walk(g, out);
            }
            Formula::And(fs) => fs.iter().for_each(|g| walk(g, out)),
            Formula::Or(fs) => {
                out.insert(Construct::Disjunction);
                fs.iter().for_each(|g| walk(g, out));
            }
            Formula::Quant { q, range, body, .. } => {
                out.insert(match q {
                    Quantifier::Forall => Construct::Forall,
                    Quantifier::Exists => Construct::Exists,
                });
                if !matches!(range, RangeExpr::In(_)) {
                    out.insert(Construct::RangeAlgebra);
                }
                walk(body, out);
            }
            Formula::Member(_) => {
                out.insert(Construct::Membership);
            }
            Formula::True | Formula::False | Formula::In { .. } => {}
        }
    }
    let mut out = BTreeSet::new();
    if !q.memberships.is_empty() {
        out.insert(Construct::Membership);
    }
    if q.ranges.iter().any(|r| !matches!(r.range, RangeExpr::In(_))) {
        out.insert(Construct::RangeAlgebra);
    }
    walk(&q.matrix, &mut out);
    out
}

#[derive(Debug, Clone)]
struct Var {
    name: String,
    root: String,
}

/// What the category offers to a query.
struct Catalog {
    /// Owned non-relationship objects whose elements all carry the listed
    /// record attributes, with the attribute kinds.
    entities: Vec<(String, Vec<(String, &'static str)>)>,
    /// Owned relationship objects and their component roots.
    relationships: Vec<(String, Vec<String>)>,
    /// Names usable as a range for each root: the root, then its subsets.
    ranges: Vec<(String, Vec<String>)>,
    /// `(name, domain root, codomain root)`.
    morphisms: Vec<(String, String, String)>,
}

impl Catalog {
    fn new(cat: &InstanceCategory) -> Self {
        let mut entities = Vec::new();
        let mut relationships = Vec::new();
        let mut ranges: Vec<(String, Vec<String>)> = Vec::new();
        for o in cat.objects() {
            let Carrier::Owned(elements) = &o.carrier else { continue };
            ranges.push((o.name.clone(), vec![o.name.clone()]));
            if o.kind == ObjectKind::Relationship {
                let roots = o
                    .components
                    .iter()
                    .map(|c| cat.root_of(c).unwrap_or(c).to_string())
                    .collect();
                relationships.push((o.name.clone(), roots));
                continue;
            }
            let mut attrs: Option<Vec<(String, &'static str)>> = None;
            for e in elements {
                let Payload::Record(fields) = &e.payload else {
                    attrs = Some(Vec::new());
                    break;
                };
                let here: Vec<(String, &'static str)> = fields.iter().map(|(k, v)| (k.clone(), v.kind_name())).collect();
                attrs = Some(match attrs {
                    None => here,
                    Some(prev) => prev.into_iter().filter(|a| here.contains(a)).collect(),
                });
            }
            entities.push((o.name.clone(), attrs.unwrap_or_default()));
        }
        for o in cat.objects() {
            if o.parent().is_some() {
                if let Some(root) = cat.root_of(&o.name) {
                    if let Some(entry) = ranges.iter_mut().find(|(r, _)| r == root) {
                        entry.1.push(o.name.clone());
                    }
                }
            }
        }
        let morphisms = cat
            .morphisms()
            .iter()
            .filter_map(|m| {
                Some((
                    m.name.clone(),
                    cat.root_of(&m.domain)?.to_string(),
                    cat.root_of(&m.codomain)?.to_string(),
                ))
            })
            .collect();
        Catalog {
            entities,
            relationships,
            ranges,
            morphisms,
        }
    }

    fn attrs(&self, root: &str) -> &[(String, &'static str)] {
        self.entities
            .iter()
            .find(|(n, _)| n == root)
            .map(|(_, a)| a.as_slice())
            .unwrap_or(&[])
    }

    fn has_dewey(&self, root: &str) -> bool {
        self.attrs(root).iter().any(|(a, k)| a == "dewey" && *k == "dewey")
    }

    fn edge_sets(&self) -> Vec<(&str, &str)> {
        self.relationships
            .iter()
            .filter(|(_, c)| c.len() == 2 && c[0] == c[1])
            .map(|(n, c)| (n.as_str(), c[0].as_str()))
            .collect()
    }

    fn range_names(&self, root: &str) -> &[String] {
        self.ranges
            .iter()
            .find(|(r, _)| r == root)
            .map(|(_, n)| n.as_slice())
            .unwrap_or(&[])
    }

    fn applicable(&self, c: Construct) -> bool {
        match c {
            Construct::MorphEq => !self.morphisms.is_empty(),
            Construct::Compare => self.entities.iter().any(|(_, a)| !a.is_empty()),
            Construct::Reach | Construct::NHop => !self.edge_sets().is_empty(),
            Construct::Tree => self.entities.iter().any(|(n, _)| self.has_dewey(n)),
            Construct::Membership => !self.relationships.is_empty(),
            Construct::RangeAlgebra => self.ranges.iter().any(|(_, n)| n.len() >= 2),
            Construct::Forall | Construct::Exists | Construct::Disjunction | Construct::Negation => true,
        }
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    cat: &'a Catalog,
    features: &'a Features,
    fresh: usize,
    quantifiers: usize,
    size: usize,
}

impl Gen<'_> {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn pick<'v, T>(&mut self, items: &'v [T]) -> Option<&'v T> {
        items.choose(&mut self.rng)
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn range_for(&mut self, root: &str, force_algebra: bool) -> RangeExpr {
        let names = self.cat.range_names(root).to_vec();
        if names.len() >= 2 && self.features.has(Construct::RangeAlgebra) && (force_algebra || self.chance(0.25)) {
            let a = names[self.rng.random_range(0..names.len())].clone();
            let mut b = names[self.rng.random_range(0..names.len())].clone();
            if a == b {
                b = names.iter().find(|n| **n != a).cloned().unwrap_or(b);
            }
            let (a, b) = (RangeExpr::object(a), RangeExpr::object(b));
            return match self.rng.random_range(0..3) {
                0 => a.or(b),
                1 => a.and(b),
                _ => a.and_not(b),
            };
        }
        RangeExpr::object(self.pick(&names).cloned().unwrap_or_else(|| root.to_string()))
    }

    fn constant(&mut self, kind: &str) -> Option<Value> {
        Some(match kind {
            "int" => Value::Int(self.rng.random_range(0..=INT_MAX + 1)),
            "text" => Value::from(TEXTS.get(self.rng.random_range(0..=TEXTS.len())).copied().unwrap_or("d")),
            "decimal" => {
                let (n, d) = *DECIMALS.choose(&mut self.rng)?;
                Value::Decimal(Decimal::from_ratio(n, d)?)
            }
            "bool" => Value::Bool(self.chance(0.5)),
            _ => return None,
        })
    }

    /// Picks from `candidates`, avoiding `v` itself most of the time.
    fn partner(&mut self, v: &Var, candidates: Vec<&Var>) -> Option<String> {
        let others: Vec<&Var> = candidates.iter().copied().filter(|w| w.name != v.name).collect();
        let pool = if others.is_empty() || self.chance(0.1) { candidates } else { others };
        pool.choose(&mut self.rng).map(|w| w.name.clone())
    }

    fn op(&mut self) -> CmpOp {
        *CmpOp::ALL.choose(&mut self.rng).expect("six operators")
    }

    /// Element equality between `v` and a same-root variable (possibly
    /// itself). Always safe.
    fn element_compare(&mut self, v: &Var, scope: &[Var]) -> Formula {
        let same: Vec<&Var> = scope.iter().filter(|w| w.root == v.root).collect();
        let other = self.partner(v, same).unwrap_or_else(|| v.name.clone());
        let op = if self.chance(0.5) { CmpOp::Eq } else { CmpOp::Ne };
        Formula::Cmp {
            lhs: Term::Var(v.name.clone()),
            op,
            rhs: Term::Var(other),
        }
    }

    fn compare(&mut self, v: &Var, scope: &[Var]) -> Option<Formula> {
        let attrs: Vec<(String, &'static str)> = self.cat.attrs(&v.root).to_vec();
        if attrs.is_empty() || self.chance(0.1) {
            return Some(self.element_compare(v, scope));
        }
        let (attr, kind) = attrs[self.rng.random_range(0..attrs.len())].clone();
        let partners: Vec<&Var> = scope
            .iter()
            .filter(|w| self.cat.attrs(&w.root).iter().any(|(a, k)| *a == attr && *k == kind))
            .collect();
        let lhs = Term::Attr {
            var: v.name.clone(),
            attr: attr.clone(),
        };
        let rhs = match self.constant(kind) {
            Some(c) if !self.chance(0.3) || partners.is_empty() => Term::Const(c),
            _ if !partners.is_empty() => Term::Attr {
                var: self.partner(v, partners).expect("nonempty"),
                attr,
            },
            _ => return Some(self.element_compare(v, scope)),
        };
        let (lhs, rhs) = if self.chance(0.2) { (rhs, lhs) } else { (lhs, rhs) };
        Some(Formula::Cmp { lhs, op: self.op(), rhs })
    }

    fn morph_eq(&mut self, v: &Var, scope: &[Var]) -> Option<Formula> {
        let mut options = Vec::new();
        for (f, dom, cod) in &self.cat.morphisms {
            for w in scope {
                if *dom == v.root && *cod == w.root {
                    options.push((f.clone(), v.name.clone(), w.name.clone()));
                }
                if *dom == w.root && *cod == v.root {
                    options.push((f.clone(), w.name.clone(), v.name.clone()));
                }
            }
        }
        let (morphism, arg, result) = self.pick(&options)?.clone();
        Some(Formula::MorphEq { morphism, arg, result })
    }

    fn tree(&mut self, v: &Var, scope: &[Var]) -> Option<Formula> {
        if !self.cat.has_dewey(&v.root) {
            return None;
        }
        let others: Vec<&Var> = scope.iter().filter(|w| self.cat.has_dewey(&w.root)).collect();
        let w = self.partner(v, others)?;
        let axis = *[TreeAxis::Parent, TreeAxis::Ancestor, TreeAxis::Sibling].choose(&mut self.rng)?;
        let (x, y) = if self.chance(0.5) { (v.name.clone(), w) } else { (w, v.name.clone()) };
        Some(Formula::Tree { axis, x, y })
    }

    fn graph(&mut self, v: &Var, scope: &[Var], nhop: bool) -> Option<Formula> {
        let sets: Vec<String> = self
            .cat
            .edge_sets()
            .into_iter()
            .filter(|(_, root)| *root == v.root)
            .map(|(n, _)| n.to_string())
            .collect();
        let edges = self.pick(&sets)?.clone();
        let others: Vec<&Var> = scope.iter().filter(|w| w.root == v.root).collect();
        let w = self.partner(v, others)?;
        let (x, y) = if self.chance(0.5) { (v.name.clone(), w) } else { (w, v.name.clone()) };
        Some(if nhop {
            Formula::NHop {
                n: self.rng.random_range(1..=3),
                x,
                y,
                edges,
            }
        } else {
            Formula::Reach { x, y, edges }
        })
    }

    fn atom_of(&mut self, c: Construct, v: &Var, scope: &[Var]) -> Option<Formula> {
        match c {
            Construct::Compare => self.compare(v, scope),
            Construct::MorphEq => self.morph_eq(v, scope),
            Construct::Tree => self.tree(v, scope),
            Construct::Reach => self.graph(v, scope, false),
            Construct::NHop => self.graph(v, scope, true),
            _ => None,
        }
    }

    /// An atom mentioning `v`.
    fn atom(&mut self, v: &Var, scope: &[Var], allow_pred: bool) -> Formula {
        let mut kinds = vec![Construct::Compare, Construct::MorphEq];
        if allow_pred {
            kinds.extend([Construct::Tree, Construct::Reach, Construct::NHop]);
        }
        kinds.retain(|c| self.features.has(*c));
        while !kinds.is_empty() {
            let i = self.rng.random_range(0..kinds.len());
            if let Some(f) = self.atom_of(kinds[i], v, scope) {
                return f;
            }
            kinds.remove(i);
        }
        self.element_compare(v, scope)
    }

    fn any_root(&mut self) -> String {
        let mut roots: Vec<String> = self.cat.entities.iter().map(|(n, _)| n.clone()).collect();
        if self.chance(0.2) {
            roots.extend(self.cat.relationships.iter().map(|(n, _)| n.clone()));
        }
        roots[self.rng.random_range(0..roots.len())].clone()
    }

    fn quantified(&mut self, q: Quantifier, scope: &[Var], depth: usize, allow_pred: bool, root: Option<String>) -> Formula {
        self.quantifiers += 1;
        let root = root.unwrap_or_else(|| self.any_root());
        let v = Var {
            name: self.fresh("v"),
            root: root.clone(),
        };
        let range = self.range_for(&root, false);
        let mut inner: Vec<Var> = scope.to_vec();
        inner.push(v.clone());
        let first = self.atom(&v, &inner, allow_pred);
        let body = if self.chance(0.6) {
            let rest = self.formula(&inner, depth - 1, allow_pred);
            if q == Quantifier::Forall && self.features.has(Construct::Disjunction) && self.chance(0.5) {
                Formula::or(vec![first, rest])
            } else {
                Formula::and(vec![first, rest])
            }
        } else {
            first
        };
        Formula::quant(q, v.name, range, body)
    }

    fn formula(&mut self, scope: &[Var], depth: usize, allow_pred: bool) -> Formula {
        self.size += 1;
        let v = scope[self.rng.random_range(0..scope.len())].clone();
        if self.size > 6 {
            return self.atom(&v, scope, allow_pred);
        }
        let mut choices = vec![(0, 4)];
        choices.push((1, 1));
        if self.features.has(Construct::Disjunction) {
            choices.push((2, 1));
        }
        if self.features.has(Construct::Negation) {
            choices.push((3, 1));
        }
        let quantifiers: Vec<Quantifier> = [(Construct::Forall, Quantifier::Forall), (Construct::Exists, Quantifier::Exists)]
            .into_iter()
            .filter(|(c, _)| self.features.has(*c))
            .map(|(_, q)| q)
            .collect();
        if depth > 0 && !quantifiers.is_empty() && self.quantifiers < self.features.max_depth + 1 {
            choices.push((4, 2));
        }
        let total: u32 = choices.iter().map(|(_, w)| w).sum();
        let mut roll = self.rng.random_range(0..total);
        let choice = choices
            .iter()
            .find(|(_, w)| {
                if roll < *w {
                    true
                } else {
                    roll -= w;
                    false
                }
            })
            .map(|(c, _)| *c)
            .unwrap_or(0);
        match choice {
            1 => Formula::and(vec![self.formula(scope, depth, allow_pred), self.formula(scope, depth, allow_pred)]),
            2 => Formula::or(vec![self.formula(scope, depth, allow_pred), self.formula(scope, depth, allow_pred)]),
            3 => Formula::negate(self.formula(scope, depth, false)),
            4 => {
                let q = *quantifiers.choose(&mut self.rng).expect("nonempty");
                self.quantified(q, scope, depth, allow_pred, None)
            }
            _ => self.atom(&v, scope, allow_pred),
        }
    }

    fn query(&mut self) -> CalculusQuery {
        let enabled: Vec<Construct> = Construct::ALL
            .into_iter()
            .filter(|c| self.features.has(*c) && self.cat.applicable(*c))
            .collect();
        // Constructs that need a particular shape of category get a double
        // share, so they still reach their coverage target.
        let weighted: Vec<Construct> = enabled
            .iter()
            .flat_map(|&c| {
                let w = match c {
                    Construct::Reach | Construct::NHop | Construct::RangeAlgebra | Construct::Membership => 2,
                    _ => 1,
                };
                std::iter::repeat_n(c, w)
            })
            .collect();
        let focus = self.pick(&weighted).copied();

        let mut ranges = Vec::new();
        let mut memberships = Vec::new();
        let mut scope: Vec<Var> = Vec::new();
        let mut targets = Vec::new();
        let use_membership =
            focus == Some(Construct::Membership) || (enabled.contains(&Construct::Membership) && self.chance(0.15));
        if use_membership {
            let (object, roots) = self.pick(&self.cat.relationships).cloned().expect("applicable");
            let r = Var {
                name: "r".into(),
                root: object.clone(),
            };
            let comps: Vec<Var> = roots
                .iter()
                .enumerate()
                .map(|(j, root)| Var {
                    name: format!("x{}", j + 1),
                    root: root.clone(),
                })
                .collect();
            memberships.push(RelationshipMembership {
                var: r.name.clone(),
                components: comps.iter().map(|c| c.name.clone()).collect(),
                object,
            });
            for c in &comps {
                if self.chance(0.7) {
                    targets.push(c.name.clone());
                }
            }
            if targets.is_empty() || self.chance(0.1) {
                targets.push(r.name.clone());
            }
            scope.push(r);
            scope.extend(comps);
        } else {
            let root = match focus {
                Some(Construct::Reach | Construct::NHop) => {
                    let sets = self.cat.edge_sets();
                    sets[self.rng.random_range(0..sets.len())].1.to_string()
                }
                Some(Construct::Tree) => {
                    let roots: Vec<String> = self
                        .cat
                        .entities
                        .iter()
                        .filter(|(n, _)| self.cat.has_dewey(n))
                        .map(|(n, _)| n.clone())
                        .collect();
                    roots[self.rng.random_range(0..roots.len())].clone()
                }
                Some(Construct::RangeAlgebra) => {
                    let roots: Vec<String> = self
                        .cat
                        .ranges
                        .iter()
                        .filter(|(_, n)| n.len() >= 2)
                        .map(|(r, _)| r.clone())
                        .collect();
                    roots[self.rng.random_range(0..roots.len())].clone()
                }
                Some(Construct::Compare) => {
                    let roots: Vec<String> = self
                        .cat
                        .entities
                        .iter()
                        .filter(|(_, a)| !a.is_empty())
                        .map(|(n, _)| n.clone())
                        .collect();
                    roots[self.rng.random_range(0..roots.len())].clone()
                }
                Some(Construct::MorphEq) => {
                    let m = self.pick(&self.cat.morphisms).cloned().expect("applicable");
                    m.1
                }
                _ => self.cat.entities[self.rng.random_range(0..self.cat.entities.len())].0.clone(),
            };
            let n = if matches!(focus, Some(Construct::Reach | Construct::NHop | Construct::Tree)) || self.chance(0.4) {
                2
            } else {
                1
            };
            for i in 0..n {
                let root = if i == 0 || self.chance(0.7) { root.clone() } else { self.any_root() };
                let name = format!("x{}", i + 1);
                let range = self.range_for(&root, i == 0 && focus == Some(Construct::RangeAlgebra));
                ranges.push(RangeTerm {
                    var: name.clone(),
                    range,
                });
                targets.push(name.clone());
                scope.push(Var { name, root });
            }
        }

        let mut parts = Vec::new();
        let depth = self.features.max_depth;
        let anchor = scope[0].clone();
        match focus {
            Some(c @ (Construct::Compare | Construct::MorphEq | Construct::Tree | Construct::Reach | Construct::NHop)) => {
                let pivot = scope
                    .iter()
                    .find(|v| match c {
                        Construct::Reach | Construct::NHop => self.cat.edge_sets().iter().any(|(_, r)| *r == v.root),
                        Construct::Tree => self.cat.has_dewey(&v.root),
                        Construct::Compare => !self.cat.attrs(&v.root).is_empty(),
                        _ => true,
                    })
                    .cloned()
                    .unwrap_or_else(|| anchor.clone());
                let scope_now = scope.clone();
                let f = self
                    .atom_of(c, &pivot, &scope_now)
                    .unwrap_or_else(|| self.atom(&pivot, &scope_now, true));
                parts.push(f);
            }
            Some(Construct::Forall) if depth > 0 => {
                let scope_now = scope.clone();
                parts.push(self.quantified(Quantifier::Forall, &scope_now, depth, true, None));
            }
            Some(Construct::Exists) if depth > 0 => {
                let scope_now = scope.clone();
                parts.push(self.quantified(Quantifier::Exists, &scope_now, depth, true, None));
            }
            Some(Construct::Disjunction) => {
                let scope_now = scope.clone();
                let a = self.formula(&scope_now, depth, true);
                let b = self.formula(&scope_now, depth, true);
                parts.push(Formula::Or(vec![a, b]));
            }
            Some(Construct::Negation) => {
                let scope_now = scope.clone();
                let g = self.formula(&scope_now, depth, false);
                parts.push(Formula::negate(g));
            }
            _ => {}
        }
        let has_atoms = self.features.has(Construct::Compare) || self.features.has(Construct::MorphEq);
        if has_atoms || !enabled.is_empty() {
            let extra = self.rng.random_range(0..=1);
            for _ in 0..extra {
                let scope_now = scope.clone();
                parts.push(self.formula(&scope_now, depth, true));
            }
        }
        if !self.features.constructs.iter().any(|c| {
            matches!(
                c,
                Construct::Compare | Construct::MorphEq | Construct::Tree | Construct::Reach | Construct::NHop
            )
        }) && !self.features.has(Construct::Forall)
            && !self.features.has(Construct::Exists)
        {
            // Nothing but ranges to work with: keep the matrix trivial.
            parts.retain(|f| !matches!(f, Formula::Cmp { lhs: Term::Var(_), .. }));
        }
        CalculusQuery {
            targets,
            ranges,
            memberships,
            matrix: Formula::and(parts),
        }
    }
}

/// Generates a safe query over `cat` using only the enabled constructs.
///
/// One enabled construct applicable to `cat` is chosen per query and
/// forced to appear, so every construct is exercised in a predictable share
/// of cases. Candidates the compiler rejects as degenerate (a universal
/// variable that normalization leaves unused, or a matrix beyond the clause
/// limit) are discarded and redrawn. Returns `None` only if `cat` has no
/// object to range over.
pub fn gen_query(seed: u64, cat: &InstanceCategory, features: &Features) -> Option<CalculusQuery> {
    let catalog = Catalog::new(cat);
    if catalog.entities.is_empty() && catalog.relationships.is_empty() {
        return None;
    }
    let mut catalog = catalog;
    if catalog.entities.is_empty() {
        // Relationship objects can still be ranged over directly.
        catalog.entities = catalog.relationships.iter().map(|(n, _)| (n.clone(), Vec::new())).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..64 {
        let mut g = Gen {
            rng: ChaCha8Rng::seed_from_u64(rng.random()),
            cat: &catalog,
            features,
            fresh: 0,
            quantifiers: 0,
            size: 0,
        };
        let q = g.query();
        if !check_safety(&q, cat).is_empty() {
            last = Some(q);
            continue;
        }
        match compile(&q, cat) {
            Err(CompileError::UnusedUniversal(_)) | Err(CompileError::Normalize(_)) => last = Some(q),
            _ => return Some(q),
        }
    }
    last
}
