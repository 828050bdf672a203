use std::collections::{HashMap, HashSet};

use super::{combine_label, AlgebraError, CmpOp, Operand, SelectionPredicate};
use crate::category::{CategoryError, ElementId, InstanceCategory};
use crate::relation::{Column, Relation, Row};
use crate::value::Value;

/// All elements of `object` as a one-column relation bound to `var`.
pub fn scan(cat: &InstanceCategory, object: &str, var: &str) -> Result<Relation, AlgebraError> {
    let ids = cat.members(object)?;
    Ok(Relation::unary(var, object, ids.iter().cloned()))
}

/// The image `f(S)` of a one-column relation, deduplicated.
pub fn map(cat: &InstanceCategory, morphism: &str, input: &Relation, out_var: &str) -> Result<Relation, AlgebraError> {
    let f = cat
        .morphism(morphism)
        .ok_or_else(|| CategoryError::UnknownMorphism(morphism.to_string()))?;
    if input.arity() != 1 {
        return Err(AlgebraError::Invalid(format!("map expects a one-column input, got {}", input.arity())));
    }
    let images = input
        .rows()
        .iter()
        .map(|r| cat.apply_morphism(morphism, &r[0]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Relation::unary(out_var, f.codomain.clone(), images))
}

/// `Map f(S)` for a stored object `S = dom(f)`; the result column is `y`.
pub fn op_map(cat: &InstanceCategory, morphism: &str, input: &str) -> Result<Relation, AlgebraError> {
    let f = cat
        .morphism(morphism)
        .ok_or_else(|| CategoryError::UnknownMorphism(morphism.to_string()))?;
    if f.domain != input {
        return Err(AlgebraError::Invalid(format!(
            "morphism `{morphism}` has domain `{}`, not `{input}`",
            f.domain
        )));
    }
    map(cat, morphism, &scan(cat, input, "x")?, "y")
}

enum Resolved {
    Value(Value),
    Element(Option<ElementId>),
}

fn column_of(input: &Relation, column: &str) -> Result<usize, AlgebraError> {
    input
        .column_index(column)
        .ok_or_else(|| AlgebraError::UnknownColumn(column.to_string()))
}

struct BoundOperand<'p> {
    operand: &'p Operand,
    column: Option<usize>,
}

impl<'p> BoundOperand<'p> {
    fn bind(operand: &'p Operand, input: &Relation) -> Result<Self, AlgebraError> {
        let column = match operand {
            Operand::Attr { column, .. } | Operand::Image { column, .. } | Operand::Element { column } => {
                Some(column_of(input, column)?)
            }
            Operand::Const(_) => None,
        };
        Ok(Self { operand, column })
    }

    fn resolve(&self, cat: &InstanceCategory, row: &[ElementId]) -> Result<Resolved, AlgebraError> {
        Ok(match self.operand {
            Operand::Attr { attr, .. } => Resolved::Value(cat.attribute_of(&row[self.column.unwrap()], attr)?),
            Operand::Image { morphism, .. } => {
                Resolved::Element(morphism.apply(cat, &row[self.column.unwrap()]).cloned())
            }
            Operand::Element { .. } => Resolved::Element(Some(row[self.column.unwrap()].clone())),
            Operand::Const(v) => Resolved::Value(v.clone()),
        })
    }
}

fn compare_resolved(lhs: Resolved, op: CmpOp, rhs: Resolved) -> Result<bool, AlgebraError> {
    match (lhs, rhs) {
        (Resolved::Value(a), Resolved::Value(b)) => Ok(op.holds(a.compare(&b)?)),
        (Resolved::Element(a), Resolved::Element(b)) => {
            let equal = matches!((&a, &b), (Some(x), Some(y)) if x == y);
            match op {
                CmpOp::Eq => Ok(equal),
                CmpOp::Ne => Ok(!equal),
                _ => Err(AlgebraError::Invalid(format!("elements can only be compared with = or !=, not {op}"))),
            }
        }
        _ => Err(AlgebraError::Invalid("cannot compare an element with an attribute value".into())),
    }
}

/// Rows of `input` satisfying `pred`; columns unchanged.
pub fn select(cat: &InstanceCategory, input: &Relation, pred: &SelectionPredicate) -> Result<Relation, AlgebraError> {
    let lhs = BoundOperand::bind(&pred.lhs, input)?;
    let rhs = BoundOperand::bind(&pred.rhs, input)?;
    let mut kept = Vec::new();
    for row in input.rows() {
        if compare_resolved(lhs.resolve(cat, row)?, pred.op, rhs.resolve(cat, row)?)? {
            kept.push(row.clone());
        }
    }
    Ok(Relation::new(input.columns().to_vec(), kept))
}

pub fn op_select(cat: &InstanceCategory, input: &Relation, pred: &SelectionPredicate) -> Result<Relation, AlgebraError> {
    select(cat, input, pred)
}

/// Restricts `input` to the `keep` columns, in that order, removing duplicates.
pub fn project<S: AsRef<str>>(input: &Relation, keep: &[S]) -> Result<Relation, AlgebraError> {
    if keep.is_empty() {
        return Err(AlgebraError::Invalid("projection needs at least one column".into()));
    }
    let mut seen = HashSet::new();
    let mut indices = Vec::with_capacity(keep.len());
    for k in keep {
        let k = k.as_ref();
        if !seen.insert(k) {
            return Err(AlgebraError::Invalid(format!("column `{k}` listed twice in projection")));
        }
        indices.push(column_of(input, k)?);
    }
    let columns = indices.iter().map(|&i| input.columns()[i].clone()).collect();
    let rows = input
        .rows()
        .iter()
        .map(|r| indices.iter().map(|&i| r[i].clone()).collect::<Row>());
    Ok(Relation::new(columns, rows))
}

pub fn op_project<S: AsRef<str>>(input: &Relation, keep: &[S]) -> Result<Relation, AlgebraError> {
    project(input, keep)
}

/// Relational division `dividend[by] ÷ divisor`.
///
/// The quotient ranges over the dividend columns not in `by`. A tuple `t`
/// qualifies when it occurs in the dividend and `t` combined with every
/// divisor row is a dividend row. An empty divisor yields every `t`.
pub fn divide<S: AsRef<str>>(dividend: &Relation, divisor: &Relation, by: &[S]) -> Result<Relation, AlgebraError> {
    let mut by_idx = Vec::with_capacity(by.len());
    for b in by {
        let i = column_of(dividend, b.as_ref())?;
        if by_idx.contains(&i) {
            return Err(AlgebraError::Invalid(format!("column `{}` listed twice in division", b.as_ref())));
        }
        by_idx.push(i);
    }
    if by_idx.is_empty() {
        return Err(AlgebraError::Invalid("division needs at least one divisor column".into()));
    }
    if divisor.arity() != by_idx.len() {
        return Err(AlgebraError::Invalid(format!(
            "divisor has {} columns but division is by {}",
            divisor.arity(),
            by_idx.len()
        )));
    }
    let keep_idx: Vec<usize> = (0..dividend.arity()).filter(|i| !by_idx.contains(i)).collect();
    if keep_idx.is_empty() {
        return Err(AlgebraError::Invalid("division by every column leaves an empty quotient schema".into()));
    }

    let wanted: HashSet<&[ElementId]> = divisor.rows().iter().map(|r| &**r).collect();
    let mut groups: HashMap<Row, HashSet<Row>> = HashMap::new();
    for row in dividend.rows() {
        let key: Row = keep_idx.iter().map(|&i| row[i].clone()).collect();
        let part: Row = by_idx.iter().map(|&i| row[i].clone()).collect();
        let entry = groups.entry(key).or_default();
        if wanted.contains(&*part) {
            entry.insert(part);
        }
    }
    let columns = keep_idx.iter().map(|&i| dividend.columns()[i].clone()).collect();
    let rows = groups
        .into_iter()
        .filter(|(_, found)| found.len() == wanted.len())
        .map(|(k, _)| k);
    Ok(Relation::new(columns, rows))
}

pub fn op_divide<S: AsRef<str>>(dividend: &Relation, divisor: &Relation, by: &[S]) -> Result<Relation, AlgebraError> {
    divide(dividend, divisor, by)
}

fn compatible_columns(lhs: &Relation, rhs: &Relation, op: char) -> Result<Vec<Column>, AlgebraError> {
    let same = lhs.arity() == rhs.arity() && lhs.columns().iter().zip(rhs.columns()).all(|(a, b)| a.var == b.var);
    if !same {
        let show = |r: &Relation| r.columns().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
        return Err(AlgebraError::Incompatible {
            lhs: show(lhs),
            rhs: show(rhs),
        });
    }
    Ok(lhs
        .columns()
        .iter()
        .zip(rhs.columns())
        .map(|(a, b)| Column::new(a.var.clone(), combine_label(op, &a.object, &b.object)))
        .collect())
}

pub fn union(lhs: &Relation, rhs: &Relation) -> Result<Relation, AlgebraError> {
    let columns = compatible_columns(lhs, rhs, '|')?;
    Ok(Relation::new(columns, lhs.rows().iter().chain(rhs.rows()).cloned()))
}

pub fn intersect(lhs: &Relation, rhs: &Relation) -> Result<Relation, AlgebraError> {
    let columns = compatible_columns(lhs, rhs, '&')?;
    Ok(Relation::new(columns, lhs.rows().iter().filter(|r| rhs.contains(r)).cloned()))
}

pub fn difference(lhs: &Relation, rhs: &Relation) -> Result<Relation, AlgebraError> {
    let columns = compatible_columns(lhs, rhs, '-')?;
    Ok(Relation::new(columns, lhs.rows().iter().filter(|r| !rhs.contains(r)).cloned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MorphismRef;
    use crate::category::{CategoryObject, Element, Morphism, ObjectKind, Payload};
    use proptest::prelude::*;

    fn id(o: &str, i: u32) -> ElementId {
        ElementId::new(o, i)
    }

    fn people() -> InstanceCategory {
        let rec = |i: u32, age: i64| {
            Element::new(id("P", i), Payload::Record(vec![("age".into(), Value::Int(age)), ("name".into(), Value::Text(format!("p{i}")))]))
        };
        let p = CategoryObject::owned("P", ObjectKind::Entity, vec![rec(0, 30), rec(1, 41), rec(2, 30)]);
        let b = CategoryObject::from_atoms("B", ObjectKind::Entity, [Value::Int(0)]);
        let c = Morphism::new("c", "P", "B", (0..3).map(|i| (id("P", i), id("B", 0))).collect());
        let idp = Morphism::new("idP", "P", "P", (0..3).map(|i| (id("P", i), id("P", i))).collect());
        InstanceCategory::new(vec![p, b], vec![c, idp])
    }

    fn pairs(rows: &[(u32, u32)]) -> Relation {
        Relation::new(
            vec![Column::new("x", "A"), Column::new("y", "B")],
            rows.iter().map(|&(a, b)| vec![id("A", a), id("B", b)].into_boxed_slice()),
        )
    }

    #[test]
    fn map_identity_and_constant() {
        let cat = people();
        assert_eq!(op_map(&cat, "idP", "P").unwrap().rows(), scan(&cat, "P", "y").unwrap().rows());
        let image = op_map(&cat, "c", "P").unwrap();
        assert_eq!(image.len(), 1);
        assert_eq!(image.rows()[0][0], id("B", 0));
        assert!(op_map(&cat, "c", "B").is_err());
        assert!(op_map(&cat, "nope", "P").is_err());
    }

    #[test]
    fn select_reflexive_and_empty() {
        let cat = people();
        let all = scan(&cat, "P", "x").unwrap();
        let age = Operand::Attr { column: "x".into(), attr: "age".into() };
        let same = SelectionPredicate::new(age.clone(), CmpOp::Eq, age.clone());
        assert_eq!(select(&cat, &all, &same).unwrap(), all);
        let empty = Relation::empty(all.columns().to_vec());
        let gt = SelectionPredicate::new(age.clone(), CmpOp::Gt, Operand::Const(Value::Int(30)));
        assert!(select(&cat, &empty, &gt).unwrap().is_empty());
        assert_eq!(select(&cat, &all, &gt).unwrap().len(), 1);
    }

    #[test]
    fn select_errors() {
        let cat = people();
        let all = scan(&cat, "P", "x").unwrap();
        let cross = SelectionPredicate::new(
            Operand::Attr { column: "x".into(), attr: "age".into() },
            CmpOp::Lt,
            Operand::Const(Value::Text("old".into())),
        );
        assert!(matches!(select(&cat, &all, &cross), Err(AlgebraError::Compare(_))));
        let missing = SelectionPredicate::new(
            Operand::Attr { column: "x".into(), attr: "height".into() },
            CmpOp::Lt,
            Operand::Const(Value::Int(1)),
        );
        assert!(matches!(select(&cat, &all, &missing), Err(AlgebraError::Category(_))));
        let unknown = SelectionPredicate::new(Operand::Element { column: "z".into() }, CmpOp::Eq, Operand::Const(Value::Int(1)));
        assert_eq!(select(&cat, &all, &unknown), Err(AlgebraError::UnknownColumn("z".into())));
    }

    #[test]
    fn image_comparison_handles_undefined() {
        let cat = people();
        let b = scan(&cat, "B", "y").unwrap();
        let ne = SelectionPredicate::new(
            Operand::Image { column: "y".into(), morphism: MorphismRef::Named("c".into()) },
            CmpOp::Ne,
            Operand::Element { column: "y".into() },
        );
        // B#0 is outside dom(c): the image is undefined, so `!=` holds.
        assert_eq!(select(&cat, &b, &ne).unwrap().len(), 1);
    }

    #[test]
    fn project_identity_and_dedup() {
        let r = pairs(&[(0, 0), (0, 1), (1, 1)]);
        assert_eq!(project(&r, &["x", "y"]).unwrap(), r);
        assert_eq!(project(&r, &["x"]).unwrap().len(), 2);
        assert_eq!(project(&r, &["y", "x"]).unwrap().columns()[0].var, "y");
        assert!(project(&r, &["q"]).is_err());
        assert!(project::<&str>(&r, &[]).is_err());
        assert!(project(&r, &["x", "x"]).is_err());
    }

    #[test]
    fn divide_vacuous_and_saturated() {
        let full = pairs(&[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let divisor = Relation::unary("y", "B", [id("B", 0), id("B", 1)]);
        let q = divide(&full, &divisor, &["y"]).unwrap();
        assert_eq!(q, Relation::unary("x", "A", [id("A", 0), id("A", 1)]));

        let partial = pairs(&[(0, 0), (0, 1), (1, 0)]);
        assert_eq!(divide(&partial, &divisor, &["y"]).unwrap().len(), 1);

        let none = Relation::empty(vec![Column::new("y", "B")]);
        assert_eq!(divide(&partial, &none, &["y"]).unwrap(), project(&partial, &["x"]).unwrap());
        assert!(divide(&full, &divisor, &["x", "y"]).is_err());
        assert!(divide(&full, &full, &["y"]).is_err());
    }

    #[test]
    fn set_operator_identities() {
        let x = pairs(&[(0, 1), (2, 2)]);
        let empty = pairs(&[]);
        assert_eq!(union(&x, &x).unwrap(), x);
        assert_eq!(intersect(&x, &x).unwrap(), x);
        assert!(difference(&x, &x).unwrap().is_empty());
        assert_eq!(union(&empty, &x).unwrap(), x);
        let other = Relation::unary("x", "A", [id("A", 0)]);
        assert!(matches!(union(&x, &other), Err(AlgebraError::Incompatible { .. })));
    }

    fn arb_pairs() -> impl Strategy<Value = Vec<(u32, u32)>> {
        proptest::collection::vec((0u32..4, 0u32..4), 0..14)
    }

    proptest! {
        #[test]
        fn set_ops_match_hashset(a in arb_pairs(), b in arb_pairs()) {
            let (ra, rb) = (pairs(&a), pairs(&b));
            let sa: HashSet<_> = a.iter().copied().collect();
            let sb: HashSet<_> = b.iter().copied().collect();
            let expect = |s: HashSet<(u32, u32)>| pairs(&s.into_iter().collect::<Vec<_>>());
            prop_assert_eq!(union(&ra, &rb).unwrap(), expect(&sa | &sb));
            prop_assert_eq!(intersect(&ra, &rb).unwrap(), expect(&sa & &sb));
            prop_assert_eq!(difference(&ra, &rb).unwrap(), expect(&sa - &sb));
        }

        #[test]
        fn divide_matches_double_loop(a in arb_pairs(), d in proptest::collection::vec(0u32..4, 0..4)) {
            let dividend = pairs(&a);
            let divisor = Relation::unary("y", "B", d.iter().map(|&i| id("B", i)));
            let got = divide(&dividend, &divisor, &["y"]).unwrap();
            let candidates: HashSet<u32> = a.iter().map(|p| p.0).collect();
            let expected: Vec<ElementId> = candidates
                .into_iter()
                .filter(|&x| d.iter().all(|&y| a.contains(&(x, y))))
                .map(|x| id("A", x))
                .collect();
            prop_assert_eq!(got, Relation::unary("x", "A", expected));
        }

        #[test]
        fn project_matches_comprehension(a in arb_pairs()) {
            let got = project(&pairs(&a), &["y"]).unwrap();
            let expected: HashSet<u32> = a.iter().map(|p| p.1).collect();
            prop_assert_eq!(got, Relation::unary("y", "B", expected.into_iter().map(|y| id("B", y))));
        }
    }
}
