mod common;

use catquery::calculus::parse;
use catquery::compile::compile;
use catquery::eval::evaluate;
use catquery::io::{
    category_from_json_str, category_to_json_string, edges_from_str, edges_to_string, load_workspace, relation_to_json_lines,
    relation_to_table, table_from_reader, table_to_csv, xml_from_str, IoError,
};
use catquery::{InstanceCategory, Value};

#[test]
fn json_round_trip() {
    let cat = common::campus();
    let text = category_to_json_string(&cat);
    let back = category_from_json_str(&text).unwrap();
    assert_eq!(back, cat);
    assert_eq!(category_to_json_string(&back), text);
}

#[test]
fn empty_json_category() {
    let cat = category_from_json_str(r#"{"objects": [], "morphisms": []}"#).unwrap();
    assert!(cat.objects().is_empty());
    assert_eq!(category_from_json_str("{}").unwrap(), InstanceCategory::default());
}

#[test]
fn json_values_and_references() {
    let cat = category_from_json_str(
        r#"{"objects": [
            {"name": "N", "kind": "attribute", "elements": [{"key": "a", "value": {"dec": "1/3"}}, {"value": {"dewey": "1.2"}}, {"value": true}]},
            {"name": "Sub", "kind": "attribute", "parent": "N", "members": ["a", 2]},
            {"name": "R", "kind": "relationship", "components": ["N", "Sub"], "elements": [{"tuple": [1, "a"]}]}
        ], "morphisms": [{"name": "f", "domain": "Sub", "codomain": "N", "pairs": [["a", 1], [2, 1]]}]}"#,
    )
    .unwrap();
    assert_eq!(cat.members("Sub").unwrap().len(), 2);
    let a = &cat.members("N").unwrap()[0];
    assert_eq!(cat.attribute_of(a, "value").unwrap(), Value::Decimal("1/3".parse().unwrap()));
    assert_eq!(cat.display_element(a), "a");
}

#[test]
fn non_total_morphism_is_rejected() {
    let err = category_from_json_str(
        r#"{"objects": [{"name": "A", "kind": "entity", "elements": [{"key": "p", "value": 1}, {"key": "q", "value": 2}]}],
            "morphisms": [{"name": "f", "domain": "A", "codomain": "A", "pairs": [["p", "q"]]}]}"#,
    )
    .unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, IoError::Invalid(_)));
    assert!(msg.contains("not total") && msg.contains("A#1"), "{msg}");
}

#[test]
fn schema_errors_carry_a_path() {
    let err = category_from_json_str(r#"{"objects": [{"name": "A", "kind": "entity", "elements": [{"colour": 1}]}]}"#).unwrap_err();
    assert!(err.to_string().starts_with("objects[0].elements[0]"), "{err}");
    let err = category_from_json_str(r#"{"objects": [{"name": "A", "kind": "thing"}]}"#).unwrap_err();
    assert!(err.to_string().contains("objects[0].kind"), "{err}");
    let err = category_from_json_str(r#"{"objects": [{"name": "A", "kind": "entity", "elements": [{"value": 1.5}]}]}"#).unwrap_err();
    assert!(err.to_string().contains("objects[0].elements[0].value"), "{err}");
    let err = category_from_json_str(
        r#"{"objects": [{"name": "A", "kind": "entity", "elements": [{"value": 1}]}],
            "morphisms": [{"name": "f", "domain": "A", "codomain": "A", "pairs": [[0, "zz"]]}]}"#,
    )
    .unwrap_err();
    assert!(err.to_string().contains("morphisms[0].pairs[0]") && err.to_string().contains("zz"), "{err}");
}

#[test]
fn csv_tables() {
    let cat = table_from_reader("id,age\n".as_bytes(), "t", "T", "id").unwrap();
    assert!(cat.members("T").unwrap().is_empty());

    let src = "id,age,name\np1,30,ann\np2,41,bob\np3,30,cy\n";
    let cat = table_from_reader(src.as_bytes(), "t", "T", "id").unwrap();
    assert!(cat.validate().is_empty());
    assert_eq!(cat.members("T").unwrap().len(), 3);
    assert_eq!(cat.members("T_age").unwrap().len(), 2);
    let p2 = &cat.members("T").unwrap()[1];
    assert_eq!(cat.attribute_of(p2, "age").unwrap(), Value::Int(41));
    assert_eq!(cat.display_element(cat.try_apply("T_name", p2).unwrap()), "bob");
    assert_eq!(table_to_csv(&cat, "T").unwrap(), src);

    let dup = table_from_reader("id,age\na,1\na,2\n".as_bytes(), "t", "T", "id").unwrap_err();
    assert!(dup.to_string().contains("t:3") && dup.to_string().contains("duplicate key"), "{dup}");
    let ragged = table_from_reader("id,age\na,1,9\n".as_bytes(), "t", "T", "id").unwrap_err();
    assert!(ragged.to_string().starts_with("t:2"), "{ragged}");
    assert!(table_from_reader("age\n1\n".as_bytes(), "t", "T", "id").is_err());
}

#[test]
fn edge_lists() {
    let nodes = table_from_reader("id\na\nb\nc\n".as_bytes(), "n", "V", "id").unwrap();
    let part = edges_from_str("a a\n# comment\na b\na b\n\nb c\n", "e", &nodes, "V", "E").unwrap();
    let cat = nodes.merge(part).unwrap();
    assert!(cat.validate().is_empty());
    assert_eq!(cat.members("E").unwrap().len(), 3);
    assert_eq!(edges_to_string(&cat, "E").unwrap(), "a a\na b\nb c\n");
    assert!(cat.morphism("E_src").is_some() && cat.morphism("E_dst").is_some());

    let err = edges_from_str("a z\n", "e", &cat, "V", "F").unwrap_err();
    assert!(err.to_string().contains("e:1") && err.to_string().contains("`z`"), "{err}");
}

#[test]
fn xml_documents() {
    let cat = xml_from_str("<a><b/><b/></a>", "x", "Doc").unwrap();
    assert!(cat.validate().is_empty());
    let codes = |tag: &str| -> Vec<String> { cat.members(tag).unwrap().iter().map(|x| cat.display_element(x)).collect() };
    assert_eq!(codes("a"), ["1"]);
    assert_eq!(codes("b"), ["1.1", "1.2"]);

    let cat = xml_from_str("<r id=\"7\"> hi <c>x</c> there </r>", "x", "Doc").unwrap();
    assert_eq!(codes_of(&cat, "r"), ["1"]);
    assert_eq!(codes_of(&cat, "c"), ["1.1"]);
    assert_eq!(codes_of(&cat, "@id"), ["1.2"]);
    let r = &cat.members("r").unwrap()[0];
    assert_eq!(cat.attribute_of(r, "text").unwrap(), Value::from("hi  there"));
    let id = &cat.members("@id").unwrap()[0];
    assert_eq!(cat.attribute_of(id, "text").unwrap(), Value::from("7"));

    assert!(xml_from_str("<a><b></a>", "x", "Doc").is_err());
}

fn codes_of(cat: &InstanceCategory, tag: &str) -> Vec<String> {
    cat.members(tag).unwrap().iter().map(|x| cat.display_element(x)).collect()
}

#[test]
fn relation_output() {
    let cat = common::campus();
    let q = parse("{ x, y | x in Senior && y in Person && advisor(y) = x }").unwrap();
    let rel = evaluate(&compile(&q, &cat).unwrap(), &cat).unwrap();
    assert_eq!(
        relation_to_json_lines(&rel, &cat),
        "{\"x\":\"ann\",\"y\":\"bob\"}\n{\"x\":\"ann\",\"y\":\"dee\"}\n{\"x\":\"cy\",\"y\":\"ann\"}\n{\"x\":\"cy\",\"y\":\"cy\"}\n{\"x\":\"cy\",\"y\":\"eve\"}\n"
    );
    assert_eq!(
        relation_to_table(&rel, &cat),
        "x    y\n---  ---\nann  bob\nann  dee\ncy   ann\ncy   cy\ncy   eve\n(5 rows)\n"
    );
}

#[test]
fn workspaces() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("people.csv"), "id,age\nann,30\nbob,20\n").unwrap();
    std::fs::write(p.join("knows.txt"), "ann bob\n").unwrap();
    std::fs::write(p.join("doc.xml"), "<a><b/></a>").unwrap();
    std::fs::write(p.join("extra.json"), r#"{"objects": [{"name": "Z", "kind": "entity"}]}"#).unwrap();
    std::fs::write(
        p.join("ws.toml"),
        r#"
[[sources]]
type = "csv"
path = "people.csv"
object = "Person"
key = "id"

[[sources]]
type = "edges"
path = "knows.txt"
nodes = "Person"
name = "Knows"

[[sources]]
type = "xml"
path = "doc.xml"
name = "Doc"

[[sources]]
type = "json"
path = "extra.json"
"#,
    )
    .unwrap();
    let cat = load_workspace(p.join("ws.toml")).unwrap();
    for o in ["Person", "Person_age", "Knows", "Doc", "a", "b", "Z"] {
        assert!(cat.object(o).is_some(), "{o}");
    }
    std::fs::write(p.join("bad.toml"), "[[sources]]\ntype = \"parquet\"\npath = \"x\"\n").unwrap();
    assert!(load_workspace(p.join("bad.toml")).is_err());
    std::fs::write(p.join("cat.json"), category_to_json_string(&common::campus())).unwrap();
    assert_eq!(load_workspace(p.join("cat.json")).unwrap(), common::campus());
}
