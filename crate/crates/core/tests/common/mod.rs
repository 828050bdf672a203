#![allow(dead_code)]

use catquery::category::{CategoryObject, Element, ElementId, InstanceCategory, Morphism, ObjectKind, Payload};
use catquery::{DeweyCode, Value};

pub fn id(object: &str, ordinal: u32) -> ElementId {
    ElementId::new(object, ordinal)
}

pub fn record(object: &str, ordinal: u32, fields: &[(&str, Value)]) -> Element {
    let fields = fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    Element::new(id(object, ordinal), Payload::Record(fields))
}

pub fn tuple(object: &str, ordinal: u32, parts: &[ElementId]) -> Element {
    Element::new(id(object, ordinal), Payload::Tuple(parts.to_vec()))
}

fn projections(name: &str, components: &[&str], tuples: &[Vec<u32>]) -> Vec<Morphism> {
    components
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let mapping = tuples
                .iter()
                .enumerate()
                .map(|(i, t)| (id(name, i as u32), id(c, t[j])))
                .collect();
            Morphism::new(format!("{name}_{}", j + 1), name, *c, mapping)
        })
        .collect()
}

/// A relationship object over `components`, plus projection morphisms
/// `{name}_1`, `{name}_2`, ...
pub fn relationship(name: &str, components: &[&str], tuples: &[Vec<u32>]) -> (CategoryObject, Vec<Morphism>) {
    let elements = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let parts: Vec<ElementId> = t.iter().zip(components).map(|(&o, c)| id(c, o)).collect();
            tuple(name, i as u32, &parts)
        })
        .collect();
    let object = CategoryObject::relationship(name, components.iter().map(|c| c.to_string()).collect(), elements);
    (object, projections(name, components, tuples))
}

/// People, courses, enrolments, an advisor map, a follows graph and a
/// small XML-like tree.
pub fn campus() -> InstanceCategory {
    let people = [("ann", 34), ("bob", 22), ("cy", 41), ("dee", 19), ("eve", 30)];
    let person = CategoryObject::owned(
        "Person",
        ObjectKind::Entity,
        people
            .iter()
            .enumerate()
            .map(|(i, (n, a))| record("Person", i as u32, &[("name", Value::from(*n)), ("age", Value::Int(*a))]).with_label(*n))
            .collect(),
    );
    let courses = [("logic", 1), ("sets", 2), ("graphs", 2)];
    let course = CategoryObject::owned(
        "Course",
        ObjectKind::Entity,
        courses
            .iter()
            .enumerate()
            .map(|(i, (t, l))| record("Course", i as u32, &[("title", Value::from(*t)), ("level", Value::Int(*l))]).with_label(*t))
            .collect(),
    );
    let adult = CategoryObject::subset("Senior", ObjectKind::Entity, "Person", vec![id("Person", 0), id("Person", 2)]);
    let (takes, mut morphisms) = relationship(
        "Takes",
        &["Person", "Course"],
        &[vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![2, 1], vec![2, 2], vec![2, 0], vec![4, 2]],
    );
    let (follows, more) = relationship("Follows", &["Person", "Person"], &[vec![0, 1], vec![1, 2], vec![2, 0], vec![3, 4], vec![4, 4]]);
    morphisms.extend(more);
    morphisms.push(Morphism::new(
        "advisor",
        "Person",
        "Person",
        vec![(id("Person", 0), id("Person", 2)), (id("Person", 1), id("Person", 0)), (id("Person", 2), id("Person", 2)), (id("Person", 3), id("Person", 0)), (id("Person", 4), id("Person", 2))],
    ));
    let codes = ["1", "1.1", "1.2", "1.2.1", "1.2.2", "1.3"];
    let node = CategoryObject::owned(
        "Node",
        ObjectKind::Entity,
        codes
            .iter()
            .enumerate()
            .map(|(i, c)| record("Node", i as u32, &[("dewey", Value::Dewey(c.parse::<DeweyCode>().unwrap())), ("tag", Value::from(if i % 2 == 0 { "a" } else { "b" }))]))
            .collect(),
    );
    let empty = CategoryObject::owned("Nobody", ObjectKind::Entity, Vec::new());
    let cat = InstanceCategory::new(vec![person, course, adult, takes, follows, node, empty], morphisms);
    assert!(cat.validate().is_empty(), "{:?}", cat.validate());
    cat
}
