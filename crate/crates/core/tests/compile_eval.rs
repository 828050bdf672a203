mod common;

use catquery::calculus::parse;
use catquery::compile::{compile, compile_with, CompileError, CompileOptions, Fault};
use catquery::eval::{evaluate, oracle_evaluate, oracle_evaluate_bounded, OracleError};
use catquery::Relation;

fn both(src: &str) -> (Relation, Relation) {
    let cat = common::campus();
    let q = parse(src).unwrap_or_else(|e| panic!("{src}: {e}"));
    let plan = compile(&q, &cat).unwrap_or_else(|e| panic!("{src}: {e}"));
    let got = evaluate(&plan, &cat).unwrap_or_else(|e| panic!("{src}: {e}\n{}", plan.to_text()));
    let want = oracle_evaluate(&q, &cat).unwrap();
    (got, want)
}

fn names(r: &Relation) -> Vec<Vec<String>> {
    let cat = common::campus();
    r.rows().iter().map(|row| row.iter().map(|x| cat.display_element(x)).collect()).collect()
}

const QUERIES: &[&str] = &[
    "{ x | x in Person }",
    "{ x | x in Person && x.age > 30 }",
    "{ x | x in Person && (x.age < 20 || x.name = \"eve\") }",
    "{ x | x in Person - Senior }",
    "{ x | x in Person & Senior }",
    "{ x | x in Senior | Person }",
    "{ x, y | x in Person && y in Person && advisor(x) = y }",
    "{ x | x in Person && !(advisor(x) = x) }",
    "{ x | x in Person && forall c in Course : exists t in Takes : Takes_1(t) = x && Takes_2(t) = c }",
    "{ x | x in Person && exists t in Takes : Takes_1(t) = x }",
    "{ x | x in Person && !(exists t in Takes : Takes_1(t) = x) }",
    "{ x | x in Person && forall c in Course : c.level = 1 || (exists t in Takes : Takes_1(t) = x && Takes_2(t) = c) }",
    "{ x, y | x in Person && y in Person && reach(x, y, Follows) }",
    "{ x | x in Person && reach(x, x, Follows) }",
    "{ x, y | x in Person && y in Person && nhop(2, x, y, Follows) }",
    "{ c | r = (p, c) in Takes && p.age < 25 }",
    "{ p, c | r = (p, c) in Takes && c.level = 2 }",
    "{ a, b | a in Node && b in Node && isParent(a, b) }",
    "{ a, b | a in Node && b in Node && isAncestor(a, b) && b.tag = \"b\" }",
    "{ a, b | a in Node && b in Node && isSibling(a, b) }",
    "{ x | x in Person && forall v in Nobody : false }",
    "{ x | x in Person && exists v in Nobody : true }",
    "{ x | x in Person && x.age > 100 }",
    "{ x | x in Person && (forall y in Person : y.age <= x.age) }",
    "{ x | x in Person && exists y in Person : advisor(x) = y && y.age > x.age }",
    "{ x | x in Person && forall c in Course : forall t in Takes : !(Takes_2(t) = c) || !(Takes_1(t) = x) || c.level = 2 }",
];

#[test]
fn compiled_plans_agree_with_the_oracle() {
    for src in QUERIES {
        let (got, want) = both(src);
        assert_eq!(got, want, "{src}");
    }
}

#[test]
fn selected_results() {
    let (got, _) = both("{ x | x in Person && forall c in Course : exists t in Takes : Takes_1(t) = x && Takes_2(t) = c }");
    assert_eq!(names(&got), vec![vec!["ann"], vec!["cy"]]);
    let (got, _) = both("{ x | x in Person && reach(x, x, Follows) }");
    assert_eq!(names(&got), vec![vec!["ann"], vec!["bob"], vec!["cy"], vec!["eve"]]);
    let (got, _) = both("{ x | x in Person && forall v in Nobody : false }");
    assert_eq!(got.len(), 5);
    let (got, _) = both("{ x | x in Person && exists v in Nobody : true }");
    assert!(got.is_empty());
}

#[test]
fn output_columns_keep_source_names() {
    let (got, _) = both("{ who, what | r = (who, what) in Takes }");
    let vars: Vec<&str> = got.columns().iter().map(|c| c.var.as_str()).collect();
    assert_eq!(vars, ["who", "what"]);
    assert_eq!(got.columns()[1].object, "Course");
}

#[test]
fn plan_shapes() {
    let cat = common::campus();
    let plan = |src: &str| compile(&parse(src).unwrap(), &cat).unwrap().to_text();

    let reach = plan("{ x, y | x in Person && y in Senior && reach(x, y, Follows) }");
    assert!(reach.contains("getReach("), "{reach}");
    assert!(reach.contains("lim("), "{reach}");
    assert!(reach.lines().any(|l| l.contains("project(") && l.ends_with("[x1, x2]")), "{reach}");

    let div = plan("{ x | x in Person && forall c in Course : exists t in Takes : Takes_1(t) = x && Takes_2(t) = c }");
    assert!(div.contains("divide("), "{div}");

    let diff = plan("{ x | x in Person - Senior }");
    assert!(diff.contains("difference("), "{diff}");

    for src in QUERIES {
        let text = plan(src);
        assert!(!text.contains("not("), "{text}");
    }
}

#[test]
fn rejections() {
    let cat = common::campus();
    let err = |src: &str| compile(&parse(src).unwrap(), &cat).unwrap_err();
    assert!(matches!(err("{ x | x in Person && !reach(x, x, Follows) }"), CompileError::NegatedPredicate(_)));
    assert!(matches!(err("{ x | x in Ghost }"), CompileError::Unsafe(_)));
    assert!(matches!(err("{ x | x in Person && x.name > 3 }"), CompileError::Unsafe(_)));
}

#[test]
fn quantifiers_not_mentioning_their_variable_are_dropped() {
    let (got, want) = both("{ x | x in Person && forall c in Course : x.age > 30 }");
    assert_eq!(got, want);
    assert_eq!(names(&got), [["ann"], ["cy"]]);
    // With an empty range the universal is vacuously true instead.
    let (got, want) = both("{ x | x in Person && forall v in Nobody : exists c in Course : x.age > 30 }");
    assert_eq!(got, want);
    assert_eq!(got.len(), 5);
}

#[test]
fn flipped_comparisons_change_results() {
    let cat = common::campus();
    let q = parse("{ x | x in Person && x.age > 30 }").unwrap();
    let opts = CompileOptions {
        fault: Some(Fault::FlipTheta),
        ..Default::default()
    };
    let bad = evaluate(&compile_with(&q, &cat, &opts).unwrap(), &cat).unwrap();
    assert_ne!(bad, oracle_evaluate(&q, &cat).unwrap());
}

#[test]
fn oracle_bound_is_enforced() {
    let cat = common::campus();
    let q = parse("{ x, y | x in Person && y in Person }").unwrap();
    assert!(matches!(oracle_evaluate_bounded(&q, &cat, 10), Err(OracleError::Bound { size: 25, bound: 10 })));
    assert_eq!(oracle_evaluate_bounded(&q, &cat, 25).unwrap().len(), 25);
}
