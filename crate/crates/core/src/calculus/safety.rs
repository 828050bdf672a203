//! Range-restriction and typing checks against a category.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use crate::algebra::{dewey_of, CmpOp};
use crate::category::{InstanceCategory, ObjectKind, Violation};

#[derive(Clone)]
struct VarInfo {
    /// Objects whose members the variable may take.
    objects: Vec<String>,
    root: Option<String>,
}

struct Checker<'a> {
    cat: &'a InstanceCategory,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn report(&mut self, subject: impl Into<String>, message: impl Into<String>) {
        let v = Violation {
            subject: subject.into(),
            message: message.into(),
        };
        if !self.out.contains(&v) {
            self.out.push(v);
        }
    }

    /// Checks a range expression and returns its common root, if sound.
    fn range(&mut self, var: &str, range: &RangeExpr) -> VarInfo {
        let mut roots = BTreeSet::new();
        let mut objects = Vec::new();
        for o in range.objects() {
            match self.cat.object(o) {
                None => self.report(var, format!("range mentions unknown object `{o}`")),
                Some(_) => match self.cat.root_of(o) {
                    Some(r) => {
                        roots.insert(r.to_string());
                        objects.push(o.to_string());
                    }
                    None => self.report(o, "subset chain of object is broken"),
                },
            }
        }
        if roots.len() > 1 {
            let list: Vec<_> = roots.iter().map(String::as_str).collect();
            self.report(var, format!("range objects are not union-compatible: {}", list.join(", ")));
        }
        VarInfo {
            objects,
            root: (roots.len() == 1).then(|| roots.into_iter().next().unwrap()),
        }
    }

    fn attribute_kinds(&mut self, var: &str, info: &VarInfo, attr: &str) -> BTreeSet<&'static str> {
        let mut kinds = BTreeSet::new();
        for o in &info.objects {
            let Ok(members) = self.cat.members(o) else { continue };
            for id in members {
                match self.cat.attribute_of(id, attr) {
                    Ok(v) => {
                        kinds.insert(v.kind_name());
                    }
                    Err(e) => {
                        self.report(format!("{var}.{attr}"), format!("attribute does not resolve on `{o}`: {e}"));
                        return kinds;
                    }
                }
            }
        }
        if kinds.len() > 1 {
            let list: Vec<_> = kinds.iter().copied().collect();
            self.report(format!("{var}.{attr}"), format!("attribute has mixed kinds: {}", list.join(", ")));
        }
        kinds
    }

    fn term_kinds(&mut self, term: &Term, scope: &HashMap<String, VarInfo>) -> Option<BTreeSet<&'static str>> {
        match term {
            Term::Const(v) => Some(BTreeSet::from([v.kind_name()])),
            Term::Attr { var, attr } => {
                let info = scope.get(var)?.clone();
                Some(self.attribute_kinds(var, &info, attr))
            }
            Term::Var(_) => None,
        }
    }

    fn require_var<'s>(&mut self, var: &str, scope: &'s HashMap<String, VarInfo>) -> Option<&'s VarInfo> {
        let info = scope.get(var);
        if info.is_none() {
            self.report(var, "variable has no range");
        }
        info
    }

    fn formula(&mut self, f: &Formula, scope: &mut HashMap<String, VarInfo>) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Not(g) => self.formula(g, scope),
            Formula::And(parts) | Formula::Or(parts) => parts.iter().for_each(|g| self.formula(g, scope)),
            Formula::Quant { var, range, body, .. } => {
                if scope.contains_key(var) {
                    self.report(var, "quantifier rebinds a variable already in scope");
                }
                let info = self.range(var, range);
                let saved = scope.insert(var.clone(), info);
                self.formula(body, scope);
                match saved {
                    Some(s) => scope.insert(var.clone(), s),
                    None => scope.remove(var),
                };
            }
            Formula::In { var, .. } => self.report(var, "range term `in` is only allowed as a top-level conjunct"),
            Formula::Member(m) => self.report(&m.var, "relationship membership is only allowed as a top-level conjunct"),
            Formula::Cmp { lhs, op, rhs } => {
                for v in f.atom_vars() {
                    self.require_var(v, scope);
                }
                let element_terms = matches!(lhs, Term::Var(_)) as u8 + matches!(rhs, Term::Var(_)) as u8;
                match element_terms {
                    2 if !matches!(op, CmpOp::Eq | CmpOp::Ne) => {
                        self.report(f.to_string(), "elements can only be compared with = or !=")
                    }
                    1 => self.report(f.to_string(), "cannot compare an element with a value"),
                    _ => {}
                }
                if element_terms == 0 {
                    let (Some(a), Some(b)) = (self.term_kinds(lhs, scope), self.term_kinds(rhs, scope)) else { return };
                    if !a.is_empty() && !b.is_empty() && a.is_disjoint(&b) {
                        let a: Vec<_> = a.into_iter().collect();
                        let b: Vec<_> = b.into_iter().collect();
                        self.report(f.to_string(), format!("compares {} with {}", a.join("/"), b.join("/")));
                    }
                }
            }
            Formula::MorphEq { morphism, arg, result } => {
                let arg_root = self.require_var(arg, scope).map(|i| i.root.clone());
                let res_root = self.require_var(result, scope).map(|i| i.root.clone());
                let Some(m) = self.cat.morphism(morphism) else {
                    self.report(morphism, "unknown morphism");
                    return;
                };
                let dom = self.cat.root_of(&m.domain).map(str::to_string);
                let cod = self.cat.root_of(&m.codomain).map(str::to_string);
                if let Some(Some(r)) = arg_root {
                    if dom.as_ref() != Some(&r) {
                        self.report(morphism, format!("domain `{}` does not match the range of `{arg}`", m.domain));
                    }
                }
                if let Some(Some(r)) = res_root {
                    if cod.as_ref() != Some(&r) {
                        self.report(morphism, format!("codomain `{}` does not match the range of `{result}`", m.codomain));
                    }
                }
            }
            Formula::Tree { axis, x, y } => {
                for v in [x, y] {
                    let Some(info) = self.require_var(v, scope).cloned() else { continue };
                    for o in &info.objects {
                        let Ok(members) = self.cat.members(o) else { continue };
                        if let Some(bad) = members.iter().find(|id| dewey_of(self.cat, id).is_err()) {
                            self.report(v, format!("{} needs dewey codes but {bad} in `{o}` has none", axis.keyword()));
                            break;
                        }
                    }
                }
            }
            Formula::Reach { x, y, edges } | Formula::NHop { x, y, edges, .. } => {
                if let Formula::NHop { n: 0, .. } = f {
                    self.report(f.to_string(), "nhop needs a positive hop count");
                }
                let roots: Vec<Option<String>> =
                    [x, y].iter().map(|v| self.require_var(v, scope).and_then(|i| i.root.clone())).collect();
                let Some(e) = self.cat.object(edges) else {
                    self.report(edges, "unknown edge set");
                    return;
                };
                if e.kind != ObjectKind::Relationship || e.components.len() != 2 {
                    self.report(edges, "edge set must be a binary relationship object");
                    return;
                }
                let ends: Vec<Option<&str>> = e.components.iter().map(|c| self.cat.root_of(c)).collect();
                if ends[0] != ends[1] {
                    self.report(edges, "edge endpoints lie in different node objects");
                }
                for (v, root) in [x, y].into_iter().zip(roots) {
                    if let (Some(r), Some(node)) = (root, ends[0]) {
                        if r != node {
                            self.report(v, format!("range is not a subset of the node object `{node}` of `{edges}`"));
                        }
                    }
                }
            }
        }
    }
}

/// Violations of range restriction, name resolution and typing. Empty when
/// the query can be compiled and enumerated.
pub fn check_safety(q: &CalculusQuery, cat: &InstanceCategory) -> Vec<Violation> {
    let mut ck = Checker { cat, out: Vec::new() };
    let mut scope: HashMap<String, VarInfo> = HashMap::new();

    if q.targets.is_empty() {
        ck.report("query", "no target variables");
    }
    let mut seen = BTreeSet::new();
    for t in &q.targets {
        if !seen.insert(t) {
            ck.report(t, "target listed twice");
        }
    }

    for r in &q.ranges {
        let info = ck.range(&r.var, &r.range);
        if scope.insert(r.var.clone(), info).is_some() {
            ck.report(&r.var, "variable has two range terms");
        }
    }

    let mut relationship_vars = BTreeSet::new();
    for m in &q.memberships {
        if scope.contains_key(&m.var) || !relationship_vars.insert(m.var.clone()) {
            ck.report(&m.var, "relationship variable is bound twice");
        }
        let Some(obj) = cat.object(&m.object) else {
            ck.report(&m.var, format!("membership in unknown object `{}`", m.object));
            continue;
        };
        if obj.kind != ObjectKind::Relationship {
            ck.report(&m.object, "membership object is not a relationship");
            continue;
        }
        if obj.components.len() != m.components.len() {
            ck.report(
                &m.var,
                format!("`{}` has arity {}, membership lists {}", m.object, obj.components.len(), m.components.len()),
            );
            continue;
        }
        scope.insert(
            m.var.clone(),
            VarInfo {
                objects: vec![m.object.clone()],
                root: cat.root_of(&m.object).map(str::to_string),
            },
        );
        for (c, comp_obj) in m.components.iter().zip(&obj.components) {
            let comp_root = cat.root_of(comp_obj).map(str::to_string);
            match scope.get(c) {
                Some(info) => {
                    if info.root.is_some() && comp_root.is_some() && info.root != comp_root {
                        ck.report(c, format!("range does not match component `{comp_obj}` of `{}`", m.object));
                    }
                }
                None => {
                    scope.insert(
                        c.clone(),
                        VarInfo {
                            objects: vec![comp_obj.clone()],
                            root: comp_root,
                        },
                    );
                }
            }
        }
    }

    for t in &q.targets {
        if !scope.contains_key(t) {
            ck.report(t, "target variable has no range or membership");
        }
    }
    for v in q.matrix.free_vars() {
        if !scope.contains_key(&v) {
            ck.report(&v, "variable has no range");
        }
    }
    let mut matrix_scope = scope.clone();
    ck.formula(&q.matrix, &mut matrix_scope);
    ck.out
}
