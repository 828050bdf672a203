//! The JSON category-instance format.
//!
//! Elements are referred to by their `key` when they have one, otherwise
//! by ordinal. Subset objects list `members`; relationship elements carry a
//! `tuple` of references into the component objects.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value as Json};

use super::{read_file, write_file, IoError};
use crate::category::{Carrier, CategoryObject, Element, ElementId, InstanceCategory, Morphism, ObjectKind, Payload};
use crate::dewey::DeweyCode;
use crate::value::{Decimal, Value};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoryDoc {
    #[serde(default)]
    objects: Vec<ObjectDoc>,
    #[serde(default)]
    morphisms: Vec<MorphismDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    components: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    members: Vec<Ref>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    elements: Vec<ElementDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    key: Option<String>,
    /// Only written when it differs from the element's position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ordinal: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    record: Option<Map<String, Json>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tuple: Option<Vec<Ref>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Ref {
    Ordinal(u32),
    Key(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MorphismDoc {
    name: String,
    domain: String,
    codomain: String,
    #[serde(default)]
    pairs: Vec<(Ref, Ref)>,
}

fn value_from_json(v: &Json, at: &str) -> Result<Value, IoError> {
    let bad = |m: &str| IoError::format(at, m);
    match v {
        Json::Bool(b) => Ok(Value::Bool(*b)),
        Json::String(s) => Ok(Value::Text(s.clone())),
        Json::Number(n) => n
            .as_i64()
            .map(Value::Int)
            .ok_or_else(|| bad("numbers must be 64-bit integers; write decimals as {\"dec\": \"1.5\"}")),
        Json::Object(m) if m.len() == 1 => {
            let (k, v) = m.iter().next().unwrap();
            let s = v.as_str().ok_or_else(|| bad("tagged values hold a string"))?;
            match k.as_str() {
                "dec" => s
                    .parse::<Decimal>()
                    .map(Value::Decimal)
                    .map_err(|_| bad(&format!("invalid decimal `{s}`"))),
                "dewey" => s
                    .parse::<DeweyCode>()
                    .map(Value::Dewey)
                    .map_err(|e| bad(&format!("invalid dewey code `{s}`: {e}"))),
                other => Err(bad(&format!("unknown value tag `{other}`"))),
            }
        }
        _ => Err(bad("expected an integer, string, boolean, {\"dec\": ..} or {\"dewey\": ..}")),
    }
}

fn value_to_json(v: &Value) -> Json {
    let tagged = |k: &str, s: String| Json::Object(Map::from_iter([(k.to_string(), Json::String(s))]));
    match v {
        Value::Int(i) => Json::Number(Number::from(*i)),
        Value::Text(s) => Json::String(s.clone()),
        Value::Bool(b) => Json::Bool(*b),
        Value::Decimal(d) => tagged("dec", d.to_string()),
        Value::Dewey(d) => tagged("dewey", d.to_string()),
    }
}

/// Key and ordinal lookup for the elements of each owning object.
struct Resolver {
    roots: HashMap<String, String>,
    keys: HashMap<String, HashMap<String, u32>>,
    ordinals: HashMap<String, Vec<u32>>,
}

impl Resolver {
    fn new(doc: &CategoryDoc) -> Self {
        let parents: HashMap<&str, Option<&str>> = doc.objects.iter().map(|o| (o.name.as_str(), o.parent.as_deref())).collect();
        let mut roots = HashMap::new();
        for o in &doc.objects {
            let mut current = o.name.as_str();
            for _ in 0..=doc.objects.len() {
                match parents.get(current) {
                    Some(Some(p)) => current = p,
                    _ => break,
                }
            }
            roots.insert(o.name.clone(), current.to_string());
        }
        let mut keys = HashMap::new();
        let mut ordinals = HashMap::new();
        for o in doc.objects.iter().filter(|o| o.parent.is_none()) {
            let mut k = HashMap::new();
            let mut ords = Vec::new();
            for (i, e) in o.elements.iter().enumerate() {
                let ord = e.ordinal.unwrap_or(i as u32);
                if let Some(key) = &e.key {
                    k.entry(key.clone()).or_insert(ord);
                }
                ords.push(ord);
            }
            keys.insert(o.name.clone(), k);
            ordinals.insert(o.name.clone(), ords);
        }
        Self { roots, keys, ordinals }
    }

    fn resolve(&self, object: &str, r: &Ref, at: &str) -> Result<ElementId, IoError> {
        let root = self
            .roots
            .get(object)
            .ok_or_else(|| IoError::format(at, format!("unknown object `{object}`")))?;
        let ordinal = match r {
            Ref::Key(k) => *self
                .keys
                .get(root)
                .and_then(|m| m.get(k))
                .ok_or_else(|| IoError::format(at, format!("no element with key `{k}` in `{root}`")))?,
            Ref::Ordinal(n) => {
                if !self.ordinals.get(root).is_some_and(|o| o.contains(n)) {
                    return Err(IoError::format(at, format!("no element with ordinal {n} in `{root}`")));
                }
                *n
            }
        };
        Ok(ElementId::new(root.as_str(), ordinal))
    }
}

fn build(doc: CategoryDoc) -> Result<InstanceCategory, IoError> {
    let resolver = Resolver::new(&doc);
    let mut objects = Vec::with_capacity(doc.objects.len());
    for (oi, o) in doc.objects.iter().enumerate() {
        let at = format!("objects[{oi}]");
        let kind = ObjectKind::parse(&o.kind)
            .ok_or_else(|| IoError::format(format!("{at}.kind"), format!("unknown kind `{}`", o.kind)))?;
        if let Some(parent) = &o.parent {
            if !o.elements.is_empty() {
                return Err(IoError::format(&at, "a subset object lists members, not elements"));
            }
            let members = o
                .members
                .iter()
                .enumerate()
                .map(|(i, r)| resolver.resolve(parent, r, &format!("{at}.members[{i}]")))
                .collect::<Result<_, _>>()?;
            let mut object = CategoryObject::subset(&o.name, kind, parent, members);
            object.components = o.components.clone();
            objects.push(object);
            continue;
        }
        if !o.members.is_empty() {
            return Err(IoError::format(&at, "only subset objects (with a parent) list members"));
        }
        let mut elements = Vec::with_capacity(o.elements.len());
        for (ei, e) in o.elements.iter().enumerate() {
            let at = format!("{at}.elements[{ei}]");
            let id = ElementId::new(o.name.as_str(), e.ordinal.unwrap_or(ei as u32));
            let payload = match (&e.value, &e.record, &e.tuple) {
                (Some(v), None, None) => Payload::Atom(value_from_json(v, &format!("{at}.value"))?),
                (None, Some(fields), None) => Payload::Record(
                    fields
                        .iter()
                        .map(|(k, v)| Ok((k.clone(), value_from_json(v, &format!("{at}.record.{k}"))?)))
                        .collect::<Result<_, IoError>>()?,
                ),
                (None, None, Some(parts)) => {
                    if parts.len() != o.components.len() {
                        return Err(IoError::format(
                            format!("{at}.tuple"),
                            format!("expected {} components, found {}", o.components.len(), parts.len()),
                        ));
                    }
                    Payload::Tuple(
                        parts
                            .iter()
                            .zip(&o.components)
                            .enumerate()
                            .map(|(j, (r, c))| resolver.resolve(c, r, &format!("{at}.tuple[{j}]")))
                            .collect::<Result<_, _>>()?,
                    )
                }
                _ => return Err(IoError::format(&at, "an element has exactly one of `value`, `record` or `tuple`")),
            };
            let mut element = Element::new(id, payload);
            element.label = e.key.clone();
            elements.push(element);
        }
        let mut object = CategoryObject::owned(&o.name, kind, elements);
        object.components = o.components.clone();
        objects.push(object);
    }
    let mut morphisms = Vec::with_capacity(doc.morphisms.len());
    for (mi, m) in doc.morphisms.iter().enumerate() {
        let mapping = m
            .pairs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let at = format!("morphisms[{mi}].pairs[{i}]");
                Ok((resolver.resolve(&m.domain, a, &at)?, resolver.resolve(&m.codomain, b, &at)?))
            })
            .collect::<Result<_, IoError>>()?;
        morphisms.push(Morphism::new(&m.name, &m.domain, &m.codomain, mapping));
    }
    let cat = InstanceCategory::new(objects, morphisms);
    let violations = cat.validate();
    if violations.is_empty() {
        Ok(cat)
    } else {
        Err(IoError::Invalid(violations))
    }
}

pub fn category_from_json_str(src: &str) -> Result<InstanceCategory, IoError> {
    let de = &mut serde_json::Deserializer::from_str(src);
    let doc: CategoryDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        IoError::format(if path == "." { "document".to_string() } else { path }, e.into_inner().to_string())
    })?;
    build(doc)
}

/// Reads and validates a category file.
pub fn load_category_json(path: impl AsRef<Path>) -> Result<InstanceCategory, IoError> {
    let path = path.as_ref();
    category_from_json_str(&read_file(path)?).map_err(|e| match e {
        IoError::Format { location, message } => IoError::format(format!("{}: {location}", path.display()), message),
        other => other,
    })
}

fn reference(cat: &InstanceCategory, unique: &HashMap<String, HashMap<&str, usize>>, id: &ElementId) -> Ref {
    let label = cat.element(id).and_then(|e| e.label.as_deref());
    match label {
        Some(l) if unique.get(id.object()).and_then(|m| m.get(l)) == Some(&1) => Ref::Key(l.to_string()),
        _ => Ref::Ordinal(id.ordinal()),
    }
}

pub fn category_to_json_string(cat: &InstanceCategory) -> String {
    let mut unique: HashMap<String, HashMap<&str, usize>> = HashMap::new();
    for o in cat.objects() {
        if let Carrier::Owned(elements) = &o.carrier {
            let counts = unique.entry(o.name.clone()).or_default();
            for label in elements.iter().filter_map(|e| e.label.as_deref()) {
                *counts.entry(label).or_default() += 1;
            }
        }
    }
    let objects = cat
        .objects()
        .iter()
        .map(|o| {
            let (parent, members, elements) = match &o.carrier {
                Carrier::Subset { parent, members } => (
                    Some(parent.clone()),
                    members.iter().map(|m| reference(cat, &unique, m)).collect(),
                    Vec::new(),
                ),
                Carrier::Owned(elements) => (
                    None,
                    Vec::new(),
                    elements
                        .iter()
                        .enumerate()
                        .map(|(i, e)| {
                            let mut doc = ElementDoc {
                                key: e.label.clone(),
                                ordinal: (e.id.ordinal() != i as u32).then_some(e.id.ordinal()),
                                value: None,
                                record: None,
                                tuple: None,
                            };
                            match &e.payload {
                                Payload::Atom(v) => doc.value = Some(value_to_json(v)),
                                Payload::Record(fields) => {
                                    doc.record = Some(fields.iter().map(|(k, v)| (k.clone(), value_to_json(v))).collect())
                                }
                                Payload::Tuple(parts) => {
                                    doc.tuple = Some(parts.iter().map(|p| reference(cat, &unique, p)).collect())
                                }
                            }
                            doc
                        })
                        .collect(),
                ),
            };
            ObjectDoc {
                name: o.name.clone(),
                kind: o.kind.as_str().to_string(),
                components: o.components.clone(),
                parent,
                members,
                elements,
            }
        })
        .collect();
    let morphisms = cat
        .morphisms()
        .iter()
        .map(|m| MorphismDoc {
            name: m.name.clone(),
            domain: m.domain.clone(),
            codomain: m.codomain.clone(),
            pairs: m
                .mapping
                .iter()
                .map(|(a, b)| (reference(cat, &unique, a), reference(cat, &unique, b)))
                .collect(),
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&CategoryDoc { objects, morphisms }).expect("category documents serialize");
    out.push('\n');
    out
}

pub fn save_category_json(cat: &InstanceCategory, path: impl AsRef<Path>) -> Result<(), IoError> {
    write_file(path.as_ref(), &category_to_json_string(cat))
}
