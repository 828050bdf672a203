//! Instance categories: finite objects of elements and total functions
//! between them.
//!
//! A category is stored as a presentation. Only the generating morphisms
//! are kept; identities and composites are never materialized.
//!
//! Objects either own their elements or are subsets of another object. A
//! subset shares the element ids of its root owner, so set algebra between
//! objects with a common root compares element identity directly.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::value::Value;

/// Identity of an element: its owning object and an ordinal within it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId {
    object: Arc<str>,
    ordinal: u32,
}

impl ElementId {
    pub fn new(object: impl Into<Arc<str>>, ordinal: u32) -> Self {
        Self {
            object: object.into(),
            ordinal,
        }
    }

    pub fn object(&self) -> &str {
        &self.object
    }

    pub fn ordinal(&self) -> u32 {
        self.ordinal
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.object, self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Atom(Value),
    /// Named attributes, in declaration order.
    Record(Vec<(String, Value)>),
    /// Components of a relationship element.
    Tuple(Vec<ElementId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub id: ElementId,
    /// Optional human-readable key, used by loaders and output formatting.
    pub label: Option<String>,
    pub payload: Payload,
}

impl Element {
    pub fn new(id: ElementId, payload: Payload) -> Self {
        Self {
            id,
            label: None,
            payload,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn record_field(&self, name: &str) -> Option<&Value> {
        match &self.payload {
            Payload::Record(fields) => fields.iter().find(|(k, _)| k == name).map(|(_, v)| v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectKind {
    Entity,
    Attribute,
    Relationship,
}

impl ObjectKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObjectKind::Entity => "entity",
            ObjectKind::Attribute => "attribute",
            ObjectKind::Relationship => "relationship",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "entity" => Some(ObjectKind::Entity),
            "attribute" => Some(ObjectKind::Attribute),
            "relationship" => Some(ObjectKind::Relationship),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Carrier {
    Owned(Vec<Element>),
    Subset { parent: String, members: Vec<ElementId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryObject {
    pub name: String,
    pub kind: ObjectKind,
    /// Component objects of a relationship object's tuples.
    pub components: Vec<String>,
    pub carrier: Carrier,
}

impl CategoryObject {
    pub fn owned(name: impl Into<String>, kind: ObjectKind, elements: Vec<Element>) -> Self {
        Self {
            name: name.into(),
            kind,
            components: Vec::new(),
            carrier: Carrier::Owned(elements),
        }
    }

    pub fn relationship(name: impl Into<String>, components: Vec<String>, elements: Vec<Element>) -> Self {
        Self {
            name: name.into(),
            kind: ObjectKind::Relationship,
            components,
            carrier: Carrier::Owned(elements),
        }
    }

    pub fn subset(name: impl Into<String>, kind: ObjectKind, parent: impl Into<String>, members: Vec<ElementId>) -> Self {
        Self {
            name: name.into(),
            kind,
            components: Vec::new(),
            carrier: Carrier::Subset {
                parent: parent.into(),
                members,
            },
        }
    }

    /// Builds an owned object from atomic values; element ordinals follow
    /// the input order.
    pub fn from_atoms(name: &str, kind: ObjectKind, values: impl IntoIterator<Item = Value>) -> Self {
        let object: Arc<str> = Arc::from(name);
        let elements = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| Element::new(ElementId::new(object.clone(), i as u32), Payload::Atom(v)))
            .collect();
        Self::owned(name, kind, elements)
    }

    pub fn parent(&self) -> Option<&str> {
        match &self.carrier {
            Carrier::Owned(_) => None,
            Carrier::Subset { parent, .. } => Some(parent),
        }
    }

    pub fn member_ids(&self) -> Vec<ElementId> {
        match &self.carrier {
            Carrier::Owned(elements) => elements.iter().map(|e| e.id.clone()).collect(),
            Carrier::Subset { members, .. } => members.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match &self.carrier {
            Carrier::Owned(elements) => elements.len(),
            Carrier::Subset { members, .. } => members.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub name: String,
    pub domain: String,
    pub codomain: String,
    pub mapping: Vec<(ElementId, ElementId)>,
}

impl Morphism {
    pub fn new(
        name: impl Into<String>,
        domain: impl Into<String>,
        codomain: impl Into<String>,
        mapping: Vec<(ElementId, ElementId)>,
    ) -> Self {
        Self {
            name: name.into(),
            domain: domain.into(),
            codomain: codomain.into(),
            mapping,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CategoryError {
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("element {element} is not in the domain of morphism `{morphism}`")]
    NotInDomain { morphism: String, element: ElementId },
    #[error("unknown element {0}")]
    UnknownElement(ElementId),
    #[error("element {element} has no attribute `{attribute}`")]
    MissingAttribute { element: ElementId, attribute: String },
    #[error("attribute `{attribute}` of element {element} is not atomic")]
    NonAtomicAttribute { element: ElementId, attribute: String },
    #[error("name `{0}` is defined twice")]
    DuplicateName(String),
}

/// One broken invariant found by [`InstanceCategory::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// The offending object, morphism or element.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

struct MorphismIndex {
    table: HashMap<ElementId, ElementId>,
}

/// A finite category instance: the database a query runs against.
pub struct InstanceCategory {
    objects: Vec<CategoryObject>,
    morphisms: Vec<Morphism>,
    object_index: HashMap<String, usize>,
    morphism_index: HashMap<String, usize>,
    member_sets: Vec<HashSet<ElementId>>,
    member_lists: Vec<Vec<ElementId>>,
    element_index: HashMap<ElementId, (usize, usize)>,
    tables: Vec<MorphismIndex>,
}

impl Clone for InstanceCategory {
    fn clone(&self) -> Self {
        Self::new(self.objects.clone(), self.morphisms.clone())
    }
}

impl fmt::Debug for InstanceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InstanceCategory")
            .field("objects", &self.objects)
            .field("morphisms", &self.morphisms)
            .finish()
    }
}

impl PartialEq for InstanceCategory {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects && self.morphisms == other.morphisms
    }
}

impl Default for InstanceCategory {
    fn default() -> Self {
        Self::new(Vec::new(), Vec::new())
    }
}

impl InstanceCategory {
    /// Indexes the given objects and morphisms. Construction never fails;
    /// broken invariants are reported by [`validate`](Self::validate). When a
    /// name repeats, lookups resolve to its first occurrence.
    pub fn new(objects: Vec<CategoryObject>, morphisms: Vec<Morphism>) -> Self {
        let mut object_index = HashMap::new();
        for (i, o) in objects.iter().enumerate() {
            object_index.entry(o.name.clone()).or_insert(i);
        }
        let mut morphism_index = HashMap::new();
        for (i, m) in morphisms.iter().enumerate() {
            morphism_index.entry(m.name.clone()).or_insert(i);
        }
        let mut element_index = HashMap::new();
        for (oi, o) in objects.iter().enumerate() {
            if let Carrier::Owned(elements) = &o.carrier {
                for (ei, e) in elements.iter().enumerate() {
                    element_index.entry(e.id.clone()).or_insert((oi, ei));
                }
            }
        }
        let member_lists: Vec<Vec<ElementId>> = objects.iter().map(|o| o.member_ids()).collect();
        let member_sets = member_lists.iter().map(|l| l.iter().cloned().collect()).collect();
        let tables = morphisms
            .iter()
            .map(|m| {
                let mut table = HashMap::with_capacity(m.mapping.len());
                for (a, b) in &m.mapping {
                    table.entry(a.clone()).or_insert_with(|| b.clone());
                }
                MorphismIndex { table }
            })
            .collect();
        Self {
            objects,
            morphisms,
            object_index,
            morphism_index,
            member_sets,
            member_lists,
            element_index,
            tables,
        }
    }

    pub fn objects(&self) -> &[CategoryObject] {
        &self.objects
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn into_parts(self) -> (Vec<CategoryObject>, Vec<Morphism>) {
        (self.objects, self.morphisms)
    }

    pub fn object(&self, name: &str) -> Option<&CategoryObject> {
        self.object_index.get(name).map(|&i| &self.objects[i])
    }

    pub fn morphism(&self, name: &str) -> Option<&Morphism> {
        self.morphism_index.get(name).map(|&i| &self.morphisms[i])
    }

    /// Element ids of an object in insertion order.
    pub fn members(&self, object: &str) -> Result<&[ElementId], CategoryError> {
        self.object_index
            .get(object)
            .map(|&i| self.member_lists[i].as_slice())
            .ok_or_else(|| CategoryError::UnknownObject(object.to_string()))
    }

    pub fn contains(&self, object: &str, id: &ElementId) -> bool {
        self.object_index
            .get(object)
            .is_some_and(|&i| self.member_sets[i].contains(id))
    }

    pub fn element(&self, id: &ElementId) -> Option<&Element> {
        let &(oi, ei) = self.element_index.get(id)?;
        match &self.objects[oi].carrier {
            Carrier::Owned(elements) => elements.get(ei),
            Carrier::Subset { .. } => None,
        }
    }

    /// Follows subset parents up to the owning object. `None` on a dangling
    /// parent or a cycle.
    pub fn root_of<'a>(&'a self, object: &'a str) -> Option<&'a str> {
        let mut current = object;
        for _ in 0..=self.objects.len() {
            let o = self.object(current)?;
            match o.parent() {
                None => return Some(&o.name),
                Some(p) => current = p,
            }
        }
        None
    }

    /// `f(x)`, if `x` lies in the domain of `f`.
    pub fn try_apply(&self, morphism: &str, x: &ElementId) -> Option<&ElementId> {
        let &i = self.morphism_index.get(morphism)?;
        self.tables[i].table.get(x)
    }

    pub fn apply_morphism(&self, morphism: &str, x: &ElementId) -> Result<ElementId, CategoryError> {
        let &i = self
            .morphism_index
            .get(morphism)
            .ok_or_else(|| CategoryError::UnknownMorphism(morphism.to_string()))?;
        self.tables[i]
            .table
            .get(x)
            .cloned()
            .ok_or_else(|| CategoryError::NotInDomain {
                morphism: morphism.to_string(),
                element: x.clone(),
            })
    }

    /// The `index`-th component of a relationship element.
    pub fn tuple_component(&self, x: &ElementId, index: usize) -> Option<&ElementId> {
        match &self.element(x)?.payload {
            Payload::Tuple(parts) => parts.get(index),
            _ => None,
        }
    }

    /// Resolves `attr` at `x`: a record field first, then a morphism named
    /// `attr` defined at `x` whose image carries an atomic value. An atomic
    /// element also answers to the attribute name `value`.
    pub fn attribute_of(&self, x: &ElementId, attr: &str) -> Result<Value, CategoryError> {
        let element = self.element(x).ok_or_else(|| CategoryError::UnknownElement(x.clone()))?;
        if let Some(v) = element.record_field(attr) {
            return Ok(v.clone());
        }
        if let Some(image) = self.try_apply(attr, x) {
            let target = self
                .element(image)
                .ok_or_else(|| CategoryError::UnknownElement(image.clone()))?;
            return match &target.payload {
                Payload::Atom(v) => Ok(v.clone()),
                Payload::Record(fields) if fields.len() == 1 => Ok(fields[0].1.clone()),
                _ => Err(CategoryError::NonAtomicAttribute {
                    element: x.clone(),
                    attribute: attr.to_string(),
                }),
            };
        }
        if attr == "value" {
            if let Payload::Atom(v) = &element.payload {
                return Ok(v.clone());
            }
        }
        Err(CategoryError::MissingAttribute {
            element: x.clone(),
            attribute: attr.to_string(),
        })
    }

    /// A human-friendly rendering of an element: its label when present.
    pub fn display_element(&self, id: &ElementId) -> String {
        match self.element(id).and_then(|e| e.label.as_deref()) {
            Some(label) => label.to_string(),
            None => id.to_string(),
        }
    }

    /// Combines two partial categories. Names must not clash.
    pub fn merge(self, other: InstanceCategory) -> Result<InstanceCategory, CategoryError> {
        let (mut objects, mut morphisms) = self.into_parts();
        let (more_objects, more_morphisms) = other.into_parts();
        for o in more_objects {
            if objects.iter().any(|x| x.name == o.name) {
                return Err(CategoryError::DuplicateName(o.name));
            }
            objects.push(o);
        }
        for m in more_morphisms {
            if morphisms.iter().any(|x| x.name == m.name) {
                return Err(CategoryError::DuplicateName(m.name));
            }
            morphisms.push(m);
        }
        Ok(InstanceCategory::new(objects, morphisms))
    }

    /// Checks every structural invariant and reports each violation.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |subject: String, message: String| out.push(Violation { subject, message });

        let mut seen = HashSet::new();
        for o in &self.objects {
            if !seen.insert(o.name.as_str()) {
                push(format!("object {}", o.name), "duplicate object name".into());
            }
        }
        let mut seen = HashSet::new();
        for m in &self.morphisms {
            if !seen.insert(m.name.as_str()) {
                push(format!("morphism {}", m.name), "duplicate morphism name".into());
            }
        }

        for o in &self.objects {
            let subject = format!("object {}", o.name);
            match &o.carrier {
                Carrier::Owned(elements) => {
                    let mut ordinals = HashSet::new();
                    for e in elements {
                        let esub = format!("element {}", e.id);
                        if e.id.object() != o.name {
                            push(esub.clone(), format!("id names object `{}` but is owned by `{}`", e.id.object(), o.name));
                        }
                        if !ordinals.insert(e.id.ordinal()) {
                            push(esub.clone(), "duplicate element id".into());
                        }
                        match (&e.payload, o.kind) {
                            (Payload::Tuple(parts), ObjectKind::Relationship) => {
                                if parts.len() != o.components.len() {
                                    push(
                                        esub.clone(),
                                        format!("tuple arity {} but relationship declares {} components", parts.len(), o.components.len()),
                                    );
                                } else {
                                    for (j, (part, comp)) in parts.iter().zip(&o.components).enumerate() {
                                        if !self.contains(comp, part) {
                                            push(esub.clone(), format!("component {} ({part}) is not an element of `{comp}`", j + 1));
                                        }
                                    }
                                }
                            }
                            (_, ObjectKind::Relationship) => {
                                push(esub.clone(), "relationship element must be a tuple".into())
                            }
                            (Payload::Tuple(_), _) => push(esub.clone(), format!("{} element cannot be a tuple", o.kind.as_str())),
                            (Payload::Record(fields), _) => {
                                let mut names = HashSet::new();
                                for (k, _) in fields {
                                    if !names.insert(k.as_str()) {
                                        push(esub.clone(), format!("duplicate record attribute `{k}`"));
                                    }
                                }
                            }
                            (Payload::Atom(_), _) => {}
                        }
                    }
                }
                Carrier::Subset { parent, members } => {
                    if self.object(parent).is_none() {
                        push(subject.clone(), format!("subset parent `{parent}` does not exist"));
                    } else if self.root_of(&o.name).is_none() {
                        push(subject.clone(), "subset chain forms a cycle".into());
                    } else {
                        let mut dup = HashSet::new();
                        for m in members {
                            if !self.contains(parent, m) {
                                push(format!("element {m}"), format!("member of `{}` is not an element of parent `{parent}`", o.name));
                            }
                            if !dup.insert(m) {
                                push(format!("element {m}"), format!("listed twice in `{}`", o.name));
                            }
                        }
                    }
                }
            }
            if o.kind == ObjectKind::Relationship {
                for comp in &o.components {
                    if self.object(comp).is_none() {
                        push(subject.clone(), format!("component object `{comp}` does not exist"));
                    }
                }
            }
        }

        for (mi, m) in self.morphisms.iter().enumerate() {
            let subject = format!("morphism {}", m.name);
            let dom_ok = self.object(&m.domain).is_some();
            let cod_ok = self.object(&m.codomain).is_some();
            if !dom_ok {
                push(subject.clone(), format!("domain `{}` does not exist", m.domain));
            }
            if !cod_ok {
                push(subject.clone(), format!("codomain `{}` does not exist", m.codomain));
            }
            if !(dom_ok && cod_ok) {
                continue;
            }
            let mut keys = HashSet::new();
            for (a, b) in &m.mapping {
                if !keys.insert(a) {
                    push(subject.clone(), format!("element {a} has more than one image"));
                }
                if !self.contains(&m.domain, a) {
                    push(subject.clone(), format!("maps {a}, which is not in domain `{}`", m.domain));
                }
                if !self.contains(&m.codomain, b) {
                    push(subject.clone(), format!("image {b} of {a} is not in codomain `{}`", m.codomain));
                }
            }
            let table = &self.tables[mi].table;
            for x in self.members(&m.domain).unwrap_or(&[]) {
                if !table.contains_key(x) {
                    push(subject.clone(), format!("not total: element {x} of `{}` has no image", m.domain));
                }
            }
        }
        out
    }
}

/// Convenience for `cat.validate()`.
pub fn validate_category(cat: &InstanceCategory) -> Vec<Violation> {
    cat.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_objects() -> InstanceCategory {
        let s = CategoryObject::from_atoms("S", ObjectKind::Entity, [Value::Int(0), Value::Int(1)]);
        let t = CategoryObject::from_atoms("T", ObjectKind::Entity, [Value::Int(7)]);
        let f = Morphism::new(
            "f",
            "S",
            "T",
            vec![(ElementId::new("S", 0), ElementId::new("T", 0)), (ElementId::new("S", 1), ElementId::new("T", 0))],
        );
        InstanceCategory::new(vec![s, t], vec![f])
    }

    #[test]
    fn empty_category_is_valid() {
        assert!(InstanceCategory::default().validate().is_empty());
    }

    #[test]
    fn constant_map_into_singleton() {
        let cat = two_objects();
        assert!(cat.validate().is_empty());
        assert_eq!(cat.apply_morphism("f", &ElementId::new("S", 1)).unwrap(), ElementId::new("T", 0));
    }

    #[test]
    fn apply_errors() {
        let cat = two_objects();
        assert_eq!(
            cat.apply_morphism("g", &ElementId::new("S", 0)),
            Err(CategoryError::UnknownMorphism("g".into()))
        );
        assert!(matches!(
            cat.apply_morphism("f", &ElementId::new("T", 0)),
            Err(CategoryError::NotInDomain { .. })
        ));
    }

    #[test]
    fn missing_image_is_one_totality_violation() {
        let s = CategoryObject::from_atoms("S", ObjectKind::Entity, [Value::Int(0), Value::Int(1)]);
        let t = CategoryObject::from_atoms("T", ObjectKind::Entity, [Value::Int(7)]);
        let f = Morphism::new("f", "S", "T", vec![(ElementId::new("S", 0), ElementId::new("T", 0))]);
        let v = InstanceCategory::new(vec![s, t], vec![f]).validate();
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].message.contains("S#1"), "{}", v[0]);
        assert!(v[0].message.contains("not total"));
    }

    #[test]
    fn attribute_record_and_morphism_paths() {
        let person = CategoryObject::owned(
            "Person",
            ObjectKind::Entity,
            vec![Element::new(ElementId::new("Person", 0), Payload::Record(vec![("age".into(), Value::Int(30))]))],
        );
        let ints = CategoryObject::from_atoms("Int", ObjectKind::Attribute, [Value::Int(30)]);
        let years = Morphism::new("years", "Person", "Int", vec![(ElementId::new("Person", 0), ElementId::new("Int", 0))]);
        let cat = InstanceCategory::new(vec![person, ints], vec![years]);
        let p0 = ElementId::new("Person", 0);
        assert_eq!(cat.attribute_of(&p0, "age").unwrap(), Value::Int(30));
        assert_eq!(cat.attribute_of(&p0, "years").unwrap(), Value::Int(30));
        assert!(matches!(cat.attribute_of(&p0, "height"), Err(CategoryError::MissingAttribute { .. })));
    }

    #[test]
    fn non_atomic_attribute() {
        let a = CategoryObject::from_atoms("A", ObjectKind::Entity, [Value::Int(1)]);
        let r = CategoryObject::relationship(
            "R",
            vec!["A".into()],
            vec![Element::new(ElementId::new("R", 0), Payload::Tuple(vec![ElementId::new("A", 0)]))],
        );
        let g = Morphism::new("g", "A", "R", vec![(ElementId::new("A", 0), ElementId::new("R", 0))]);
        let cat = InstanceCategory::new(vec![a, r], vec![g]);
        assert!(cat.validate().is_empty());
        assert!(matches!(
            cat.attribute_of(&ElementId::new("A", 0), "g"),
            Err(CategoryError::NonAtomicAttribute { .. })
        ));
    }

    #[test]
    fn subset_members_share_root_ids() {
        let n = CategoryObject::from_atoms("N", ObjectKind::Entity, (0..3).map(Value::Int));
        let s = CategoryObject::subset("S", ObjectKind::Entity, "N", vec![ElementId::new("N", 2)]);
        let bad = CategoryObject::subset("B", ObjectKind::Entity, "S", vec![ElementId::new("N", 0)]);
        let cat = InstanceCategory::new(vec![n, s, bad], vec![]);
        assert_eq!(cat.root_of("B"), Some("N"));
        assert!(cat.contains("S", &ElementId::new("N", 2)));
        let v = cat.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("parent `S`"));
    }

    #[test]
    fn duplicate_and_dangling_names() {
        let a = CategoryObject::from_atoms("A", ObjectKind::Entity, [Value::Int(1)]);
        let a2 = CategoryObject::from_atoms("A", ObjectKind::Entity, []);
        let f = Morphism::new("f", "A", "Missing", vec![]);
        let v = InstanceCategory::new(vec![a, a2], vec![f]).validate();
        assert!(v.iter().any(|x| x.message.contains("duplicate object name")));
        assert!(v.iter().any(|x| x.message.contains("codomain `Missing`")));
    }
}
