use std::ffi::{CStr, CString};
use std::ptr;

use catquery_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cq_last_error()) }.to_str().unwrap().to_string()
}

const PEOPLE: &str = r#"{"objects": [
  {"name": "Person", "kind": "entity", "elements": [
    {"key": "ann", "record": {"age": 34}},
    {"key": "bob", "record": {"age": 22}},
    {"key": "cy", "record": {"age": 41}}]},
  {"name": "Knows", "kind": "relationship", "components": ["Person", "Person"], "elements": [
    {"tuple": ["ann", "bob"]}, {"tuple": ["bob", "cy"]}]}],
 "morphisms": [
  {"name": "Knows_src", "domain": "Knows", "codomain": "Person", "pairs": [[0, "ann"], [1, "bob"]]},
  {"name": "Knows_dst", "domain": "Knows", "codomain": "Person", "pairs": [[0, "bob"], [1, "cy"]]}]}"#;

fn people() -> *mut CqCategory {
    let mut cat = ptr::null_mut();
    let status = unsafe { cq_category_from_json(c(PEOPLE).as_ptr(), &mut cat) };
    assert_eq!(status, CqStatus::Ok, "{}", last_error());
    cat
}

#[test]
fn run_reports_rows_and_cells() {
    let cat = people();
    unsafe {
        assert_eq!(cq_category_object_count(cat), 2);
        let mut rel = ptr::null_mut();
        let q = c("{ x, y | x in Person && y in Person && reach(x, y, Knows) }");
        assert_eq!(cq_query_run(cat, q.as_ptr(), &mut rel), CqStatus::Ok, "{}", last_error());
        assert_eq!(cq_relation_row_count(rel), 3);
        assert_eq!(cq_relation_column_count(rel), 2);
        assert_eq!(CStr::from_ptr(cq_relation_column_name(rel, 1)).to_str().unwrap(), "y");
        assert!(cq_relation_column_name(rel, 2).is_null());
        let mut cell = ptr::null();
        assert_eq!(cq_relation_cell(rel, 2, 1, &mut cell), CqStatus::Ok);
        assert_eq!(CStr::from_ptr(cell).to_str().unwrap(), "cy");
        assert_eq!(cq_relation_cell(rel, 3, 0, &mut cell), CqStatus::OutOfRange);
        let json = CStr::from_ptr(cq_relation_json(rel)).to_str().unwrap();
        assert_eq!(json.lines().next(), Some(r#"{"x":"ann","y":"bob"}"#));
        cq_relation_free(rel);
        cq_category_free(cat);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let cat = people();
    unsafe {
        let mut rel = ptr::null_mut();
        assert_eq!(cq_query_run(cat, c("{ x | x in").as_ptr(), &mut rel), CqStatus::Parse);
        assert!(rel.is_null());
        assert!(last_error().contains('^'));
        assert_eq!(cq_query_run(cat, c("{ x | x in Ghost }").as_ptr(), &mut rel), CqStatus::Parse);
        assert!(last_error().contains("Ghost"));
        let q = c("{ x | x in Person && !reach(x, x, Knows) }");
        assert_eq!(cq_query_run(cat, q.as_ptr(), &mut rel), CqStatus::Compile);
        assert_eq!(cq_query_run(ptr::null(), q.as_ptr(), &mut rel), CqStatus::NullArgument);
        assert_eq!(cq_query_run(cat, ptr::null(), &mut rel), CqStatus::NullArgument);
        let bad = [0xffu8, 0];
        assert_eq!(cq_query_run(cat, bad.as_ptr().cast(), &mut rel), CqStatus::InvalidUtf8);

        let mut other = ptr::null_mut();
        assert_eq!(cq_category_from_json(c("{\"objects\": 3}").as_ptr(), &mut other), CqStatus::Load);
        assert!(other.is_null());
        assert!(last_error().contains("objects"));
        assert_eq!(cq_category_load(c("/no/such/file.toml").as_ptr(), &mut other), CqStatus::Load);
        cq_category_free(cat);
        cq_category_free(ptr::null_mut());
        cq_relation_free(ptr::null_mut());
        cq_string_free(ptr::null_mut());
    }
}

#[test]
fn compile_and_json_round_trip() {
    let cat = people();
    unsafe {
        let mut plan = ptr::null_mut();
        let q = c("{ x | x in Person && x.age > 30 }");
        assert_eq!(cq_query_compile(cat, q.as_ptr(), &mut plan), CqStatus::Ok);
        let text = CStr::from_ptr(plan).to_str().unwrap().to_string();
        assert!(text.contains("select(") && text.ends_with("[x1 as x]\n"), "{text}");
        cq_string_free(plan);

        let mut json = ptr::null_mut();
        assert_eq!(cq_category_to_json(cat, &mut json), CqStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(cq_category_from_json(json, &mut back), CqStatus::Ok);
        let mut json2 = ptr::null_mut();
        assert_eq!(cq_category_to_json(back, &mut json2), CqStatus::Ok);
        assert_eq!(CStr::from_ptr(json), CStr::from_ptr(json2));
        cq_string_free(json);
        cq_string_free(json2);
        cq_category_free(back);
        cq_category_free(cat);
    }
}

#[test]
fn loads_workspaces_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.csv"), "id,age\nann,3\nbob,4\n").unwrap();
    std::fs::write(
        dir.path().join("ws.toml"),
        "[[sources]]\ntype = \"csv\"\npath = \"p.csv\"\nobject = \"P\"\nkey = \"id\"\n",
    )
    .unwrap();
    let path = c(dir.path().join("ws.toml").to_str().unwrap());
    unsafe {
        let mut cat = ptr::null_mut();
        assert_eq!(cq_category_load(path.as_ptr(), &mut cat), CqStatus::Ok, "{}", last_error());
        let mut rel = ptr::null_mut();
        assert_eq!(cq_query_run(cat, c("{ x | x in P }").as_ptr(), &mut rel), CqStatus::Ok);
        assert_eq!(cq_relation_row_count(rel), 2);
        cq_relation_free(rel);
        cq_category_free(cat);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(cq_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
