//! Prenex normal form with a disjunctive matrix, and canonical renaming.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::calculus::{quote_ident, CalculusQuery, Formula, Quantifier, RangeExpr, RangeTerm, RelationshipMembership};
use crate::category::InstanceCategory;

pub const DEFAULT_CLAUSE_LIMIT: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("disjunctive normal form exceeds {limit} clauses")]
    ClauseLimit { limit: usize },
}

/// A possibly negated atomic formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub positive: bool,
    pub atom: Formula,
}

impl Literal {
    pub fn to_formula(&self) -> Formula {
        if self.positive {
            self.atom.clone()
        } else {
            Formula::negate(self.atom.clone())
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

pub type Clause = Vec<Literal>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrefixEntry {
    pub q: Quantifier,
    pub var: String,
    pub range: RangeExpr,
}

/// A query whose matrix is a quantifier prefix over a DNF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrenexQuery {
    pub targets: Vec<String>,
    pub ranges: Vec<RangeTerm>,
    pub memberships: Vec<RelationshipMembership>,
    pub prefix: Vec<PrefixEntry>,
    pub clauses: Vec<Clause>,
}

impl PrenexQuery {
    pub fn matrix_formula(&self) -> Formula {
        Formula::or(
            self.clauses
                .iter()
                .map(|c| Formula::and(c.iter().map(Literal::to_formula).collect()))
                .chain(self.clauses.is_empty().then_some(Formula::False))
                .collect(),
        )
    }

    /// The equivalent calculus query with the prefix written out.
    pub fn to_query(&self) -> CalculusQuery {
        let matrix = self
            .prefix
            .iter()
            .rev()
            .fold(self.matrix_formula(), |body, p| Formula::quant(p.q, p.var.clone(), p.range.clone(), body));
        CalculusQuery {
            targets: self.targets.clone(),
            ranges: self.ranges.clone(),
            memberships: self.memberships.clone(),
            matrix,
        }
    }
}

impl fmt::Display for PrenexQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_query())
    }
}

/// Pushes negation down to atoms, dualizing quantifiers.
pub fn negation_normal_form(f: &Formula) -> Formula {
    nnf(f, true)
}

fn nnf(f: &Formula, positive: bool) -> Formula {
    match (f, positive) {
        (Formula::Not(g), p) => nnf(g, !p),
        (Formula::True, false) => Formula::False,
        (Formula::False, false) => Formula::True,
        (Formula::And(parts), true) => Formula::and(parts.iter().map(|g| nnf(g, true)).collect()),
        (Formula::And(parts), false) => Formula::or(parts.iter().map(|g| nnf(g, false)).collect()),
        (Formula::Or(parts), true) => Formula::or(parts.iter().map(|g| nnf(g, true)).collect()),
        (Formula::Or(parts), false) => Formula::and(parts.iter().map(|g| nnf(g, false)).collect()),
        (Formula::Quant { q, var, range, body }, p) => {
            Formula::quant(if p { *q } else { q.dual() }, var.clone(), range.clone(), nnf(body, p))
        }
        (atom, true) => atom.clone(),
        (atom, false) => Formula::negate(atom.clone()),
    }
}

/// Gives every quantifier a variable name distinct from all free variables
/// and from every other quantifier.
fn standardize_apart(f: &Formula, used: &mut HashSet<String>) -> Formula {
    match f {
        Formula::Not(g) => Formula::negate(standardize_apart(g, used)),
        Formula::And(parts) => Formula::And(parts.iter().map(|g| standardize_apart(g, used)).collect()),
        Formula::Or(parts) => Formula::Or(parts.iter().map(|g| standardize_apart(g, used)).collect()),
        Formula::Quant { q, var, range, body } => {
            let fresh = if used.contains(var) {
                (1..).map(|i| format!("{var}_{i}")).find(|c| !used.contains(c)).unwrap()
            } else {
                var.clone()
            };
            used.insert(fresh.clone());
            let renamed = if &fresh == var {
                (**body).clone()
            } else {
                let (from, to) = (var.clone(), fresh.clone());
                body.rename(&move |v| (v == from).then(|| to.clone()))
            };
            Formula::quant(*q, fresh, range.clone(), standardize_apart(&renamed, used))
        }
        atom => atom.clone(),
    }
}

/// Hoists quantifiers out of an NNF formula, left to right, never
/// commuting one quantifier past another.
fn hoist(f: Formula, prefix: &mut Vec<PrefixEntry>) -> Formula {
    match f {
        Formula::Quant { q, var, range, body } => {
            prefix.push(PrefixEntry { q, var, range });
            hoist(*body, prefix)
        }
        Formula::And(parts) => Formula::and(parts.into_iter().map(|g| hoist(g, prefix)).collect()),
        Formula::Or(parts) => Formula::or(parts.into_iter().map(|g| hoist(g, prefix)).collect()),
        other => other,
    }
}

/// Prenex form of the matrix: NNF, standardize apart, hoist, then DNF.
///
/// Hoisting a quantifier across a sibling conjunct or disjunct assumes its
/// range is nonempty; [`fold_empty_quantifiers`] removes the other case.
pub fn to_prenex(q: &CalculusQuery) -> Result<PrenexQuery, NormalizeError> {
    to_prenex_with_limit(q, DEFAULT_CLAUSE_LIMIT)
}

pub fn to_prenex_with_limit(q: &CalculusQuery, clause_limit: usize) -> Result<PrenexQuery, NormalizeError> {
    let mut used: HashSet<String> = q.free_vars().into_iter().collect();
    let apart = standardize_apart(&negation_normal_form(&q.matrix), &mut used);
    let mut prefix = Vec::new();
    let matrix = hoist(apart, &mut prefix);
    Ok(PrenexQuery {
        targets: q.targets.clone(),
        ranges: q.ranges.clone(),
        memberships: q.memberships.clone(),
        prefix,
        clauses: to_dnf_with_limit(&matrix, clause_limit)?,
    })
}

pub fn to_dnf(matrix: &Formula) -> Result<Vec<Clause>, NormalizeError> {
    to_dnf_with_limit(matrix, DEFAULT_CLAUSE_LIMIT)
}

/// Disjunctive normal form of a quantifier-free formula. Literals are
/// deduplicated per clause; clauses containing `P` and `!P` are dropped, as
/// are repeated clauses.
pub fn to_dnf_with_limit(matrix: &Formula, limit: usize) -> Result<Vec<Clause>, NormalizeError> {
    let clauses = dnf(&negation_normal_form(matrix), limit)?;
    let mut out: Vec<Clause> = Vec::new();
    for c in clauses {
        if let Some(c) = tidy_clause(c) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

fn tidy_clause(clause: Clause) -> Option<Clause> {
    let mut out: Clause = Vec::new();
    for lit in clause {
        match (&lit.atom, lit.positive) {
            (Formula::True, true) | (Formula::False, false) => continue,
            (Formula::True, false) | (Formula::False, true) => return None,
            _ => {}
        }
        if out.iter().any(|l| l.atom == lit.atom && l.positive != lit.positive) {
            return None;
        }
        if !out.contains(&lit) {
            out.push(lit);
        }
    }
    Some(out)
}

fn dnf(f: &Formula, limit: usize) -> Result<Vec<Clause>, NormalizeError> {
    let too_many = || NormalizeError::ClauseLimit { limit };
    Ok(match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Not(g) => vec![vec![Literal {
            positive: false,
            atom: (**g).clone(),
        }]],
        Formula::Or(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(dnf(p, limit)?);
                if out.len() > limit {
                    return Err(too_many());
                }
            }
            out
        }
        Formula::And(parts) => {
            let mut acc: Vec<Clause> = vec![vec![]];
            for p in parts {
                let rhs = dnf(p, limit)?;
                if acc.len().saturating_mul(rhs.len()) > limit {
                    return Err(too_many());
                }
                acc = acc
                    .iter()
                    .flat_map(|a| rhs.iter().map(move |b| a.iter().chain(b).cloned().collect()))
                    .collect();
            }
            acc
        }
        Formula::Quant { .. } => unreachable!("to_dnf expects a quantifier-free formula"),
        atom => vec![vec![Literal {
            positive: true,
            atom: atom.clone(),
        }]],
    })
}

/// Renames variables to `x1, x2, ...` in order of first occurrence: range
/// terms, memberships, the quantifier prefix, then the matrix. Returns the
/// renamed query and the `(old, new)` mapping.
pub fn rename_variables(q: &PrenexQuery) -> (PrenexQuery, Vec<(String, String)>) {
    let mut order: Vec<String> = Vec::new();
    let mut note = |v: &str| {
        if !order.iter().any(|o| o == v) {
            order.push(v.to_string());
        }
    };
    q.ranges.iter().for_each(|r| note(&r.var));
    for m in &q.memberships {
        note(&m.var);
        m.components.iter().for_each(|c| note(c));
    }
    q.prefix.iter().for_each(|p| note(&p.var));
    for c in &q.clauses {
        for lit in c {
            lit.atom.atom_vars().into_iter().for_each(&mut note);
        }
    }
    q.targets.iter().for_each(|t| note(t));

    let mapping: Vec<(String, String)> = order
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), format!("x{}", i + 1)))
        .collect();
    let lookup = |v: &str| mapping.iter().find(|(o, _)| o == v).map(|(_, n)| n.clone());
    let name = |v: &String| lookup(v).unwrap_or_else(|| v.clone());
    let renamed = PrenexQuery {
        targets: q.targets.iter().map(name).collect(),
        ranges: q
            .ranges
            .iter()
            .map(|r| RangeTerm {
                var: name(&r.var),
                range: r.range.clone(),
            })
            .collect(),
        memberships: q
            .memberships
            .iter()
            .map(|m| RelationshipMembership {
                var: name(&m.var),
                components: m.components.iter().map(name).collect(),
                object: m.object.clone(),
            })
            .collect(),
        prefix: q
            .prefix
            .iter()
            .map(|p| PrefixEntry {
                q: p.q,
                var: name(&p.var),
                range: p.range.clone(),
            })
            .collect(),
        clauses: q
            .clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|l| Literal {
                        positive: l.positive,
                        atom: l.atom.rename(&lookup),
                    })
                    .collect()
            })
            .collect(),
    };
    (renamed, mapping)
}

/// Replaces quantifiers whose range is empty in `cat` by their vacuous
/// truth value (`forall` by true, `exists` by false), and quantifiers over
/// a non-empty range whose body does not mention their variable by that
/// body.
pub fn fold_empty_quantifiers(q: &CalculusQuery, cat: &InstanceCategory) -> CalculusQuery {
    fn walk(f: &Formula, cat: &InstanceCategory) -> Formula {
        match f {
            Formula::Not(g) => Formula::negate(walk(g, cat)),
            Formula::And(parts) => Formula::and(parts.iter().map(|g| walk(g, cat)).collect()),
            Formula::Or(parts) => Formula::or(parts.iter().map(|g| walk(g, cat)).collect()),
            Formula::Quant { q, var, range, body } => {
                if range_is_empty(range, cat) {
                    match q {
                        Quantifier::Forall => Formula::True,
                        Quantifier::Exists => Formula::False,
                    }
                } else {
                    let body = walk(body, cat);
                    if body.mentions(var) {
                        Formula::quant(*q, var.clone(), range.clone(), body)
                    } else {
                        body
                    }
                }
            }
            atom => atom.clone(),
        }
    }
    CalculusQuery {
        matrix: walk(&q.matrix, cat),
        ..q.clone()
    }
}

/// Whether a range expression denotes the empty set in `cat`. Unknown
/// objects count as empty.
pub fn range_is_empty(range: &RangeExpr, cat: &InstanceCategory) -> bool {
    let members = range_members(range, cat);
    members.is_empty()
}

/// The members of a range expression, in canonical order.
pub fn range_members(range: &RangeExpr, cat: &InstanceCategory) -> Vec<crate::category::ElementId> {
    use std::collections::BTreeSet;
    fn eval(r: &RangeExpr, cat: &InstanceCategory) -> BTreeSet<crate::category::ElementId> {
        match r {
            RangeExpr::In(o) => cat.members(o).map(|m| m.iter().cloned().collect()).unwrap_or_default(),
            RangeExpr::Or(a, b) => eval(a, cat).union(&eval(b, cat)).cloned().collect(),
            RangeExpr::And(a, b) => eval(a, cat).intersection(&eval(b, cat)).cloned().collect(),
            RangeExpr::AndNot(a, b) => eval(a, cat).difference(&eval(b, cat)).cloned().collect(),
        }
    }
    eval(range, cat).into_iter().collect()
}

/// Renders clauses one per line, for `explain`.
pub fn format_clauses(clauses: &[Clause]) -> String {
    if clauses.is_empty() {
        return "no clauses (matrix is false)\n".to_string();
    }
    let mut out = String::new();
    for (i, c) in clauses.iter().enumerate() {
        let lits: Vec<String> = c.iter().map(|l| l.to_string()).collect();
        let body = if lits.is_empty() { "true".to_string() } else { lits.join(" && ") };
        out.push_str(&format!("clause {}: {body}\n", i + 1));
    }
    out
}

/// Renders the quantifier prefix, for `explain`.
pub fn format_prefix(prefix: &[PrefixEntry]) -> String {
    prefix
        .iter()
        .map(|p| format!("{} {} in {}", p.q.keyword(), quote_ident(&p.var), p.range))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{parse, parse_formula, Term};
    use proptest::prelude::*;

    fn dnf_text(src: &str) -> Vec<Vec<String>> {
        to_dnf(&parse_formula(src).unwrap())
            .unwrap()
            .iter()
            .map(|c| c.iter().map(|l| l.to_string()).collect())
            .collect()
    }

    #[test]
    fn distribution() {
        assert_eq!(
            dnf_text("(a.p = 1 || b.p = 2) && c.p = 3"),
            vec![vec!["a.p = 1", "c.p = 3"], vec!["b.p = 2", "c.p = 3"]]
        );
    }

    #[test]
    fn dnf_is_a_fixpoint_on_dnf() {
        assert_eq!(dnf_text("a.p = 1 && !b.p = 2 || c.p = 3"), vec![vec!["a.p = 1", "!b.p = 2"], vec!["c.p = 3"]]);
    }

    #[test]
    fn contradictions_and_duplicates_are_dropped() {
        assert_eq!(dnf_text("a.p = 1 && !a.p = 1 || c.p = 3 && c.p = 3"), vec![vec!["c.p = 3"]]);
        assert!(dnf_text("false").is_empty());
        assert_eq!(dnf_text("true"), vec![Vec::<String>::new()]);
    }

    #[test]
    fn clause_limit_is_enforced() {
        let big = (0..13).map(|i| format!("(a.p = {i} || b.p = {i})")).collect::<Vec<_>>().join(" && ");
        let f = parse_formula(&big).unwrap();
        assert_eq!(to_dnf(&f), Err(NormalizeError::ClauseLimit { limit: 4096 }));
        assert_eq!(to_dnf_with_limit(&f, 1 << 13).unwrap().len(), 1 << 13);
    }

    #[test]
    fn negated_exists_becomes_forall() {
        let q = parse("{ x | x in S && !(exists v in O : v.p = 1) }").unwrap();
        let p = to_prenex(&q).unwrap();
        assert_eq!(
            p.prefix,
            vec![PrefixEntry {
                q: Quantifier::Forall,
                var: "v".into(),
                range: RangeExpr::object("O")
            }]
        );
        assert_eq!(format_clauses(&p.clauses), "clause 1: !v.p = 1\n");
    }

    #[test]
    fn quantifier_free_query_has_empty_prefix() {
        let q = parse("{ x | x in S && (x.a = 1 || x.b = 2) && x.c = 3 }").unwrap();
        let p = to_prenex(&q).unwrap();
        assert!(p.prefix.is_empty());
        assert_eq!(p.clauses.len(), 2);
    }

    #[test]
    fn hoisting_keeps_source_order_and_renames_clashes() {
        let q = parse("{ x | x in S && (forall v in A : v.p = x.p) && exists v in B : exists x_1 in C : v.q = x_1.q }").unwrap();
        let p = to_prenex(&q).unwrap();
        let vars: Vec<_> = p.prefix.iter().map(|e| (e.q, e.var.as_str())).collect();
        assert_eq!(
            vars,
            vec![(Quantifier::Forall, "v"), (Quantifier::Exists, "v_1"), (Quantifier::Exists, "x_1")]
        );
        let reparsed = parse(&p.to_string()).unwrap();
        assert_eq!(reparsed, p.to_query());
    }

    #[test]
    fn renaming_is_canonical() {
        let a = to_prenex(&parse("{ a, b | a in S && b in T && forall c in U : f(a) = b || c.p = a.p }").unwrap()).unwrap();
        let b = to_prenex(&parse("{ p, q | p in S && q in T && forall r in U : f(p) = q || r.p = p.p }").unwrap()).unwrap();
        let (ra, map) = rename_variables(&a);
        let (rb, _) = rename_variables(&b);
        assert_eq!(ra, rb);
        assert_eq!(map[0], ("a".to_string(), "x1".to_string()));
        let (again, ident) = rename_variables(&ra);
        assert_eq!(again, ra);
        assert!(ident.iter().all(|(o, n)| o == n));
    }

    fn atom(i: usize) -> Formula {
        Formula::Cmp {
            lhs: Term::Attr {
                var: format!("v{i}"),
                attr: "p".into(),
            },
            op: crate::algebra::CmpOp::Eq,
            rhs: Term::Const(crate::value::Value::Int(1)),
        }
    }

    fn truth(f: &Formula, assign: u32) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Not(g) => !truth(g, assign),
            Formula::And(ps) => ps.iter().all(|g| truth(g, assign)),
            Formula::Or(ps) => ps.iter().any(|g| truth(g, assign)),
            Formula::Cmp { lhs: Term::Attr { var, .. }, .. } => {
                let i: u32 = var[1..].parse().unwrap();
                assign >> i & 1 == 1
            }
            _ => unreachable!(),
        }
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![(0usize..8).prop_map(atom), Just(Formula::True), Just(Formula::False)];
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::negate),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
                prop::collection::vec(inner, 2..4).prop_map(Formula::Or),
            ]
        })
    }

    proptest! {
        #[test]
        fn dnf_matches_truth_table(f in arb_formula()) {
            let clauses = to_dnf(&f).unwrap();
            let g = PrenexQuery {
                targets: vec![], ranges: vec![], memberships: vec![], prefix: vec![], clauses: clauses.clone(),
            }.matrix_formula();
            for assign in 0..256u32 {
                prop_assert_eq!(truth(&f, assign), truth(&g, assign));
            }
            for c in &clauses {
                for (i, l) in c.iter().enumerate() {
                    prop_assert!(!c[..i].contains(l));
                    prop_assert!(!c.iter().any(|m| m.atom == l.atom && m.positive != l.positive));
                }
            }
        }
    }
}
