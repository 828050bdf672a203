//! XML documents with Dewey-coded elements.
//!
//! Every node of the document becomes an element of one owning object
//! named after the document, with a record `{dewey, text}` and its code as
//! label. Each distinct tag gets a subset object of the same name, and each
//! attribute name `a` a subset object `@a`. The root is `1`, the k-th child
//! element of `c` is `c.k`, and attributes follow the child elements,
//! numbered on from the last child in document order. Text is the trimmed
//! concatenation of a node's direct text children. Namespaces are ignored.

use std::path::Path;

use indexmap::IndexMap;

use super::{read_file, IoError};
use crate::category::{CategoryObject, Element, ElementId, InstanceCategory, ObjectKind, Payload};
use crate::dewey::DeweyCode;
use crate::value::Value;

struct Builder<'a> {
    doc: &'a str,
    elements: Vec<Element>,
    tags: IndexMap<String, Vec<ElementId>>,
}

impl Builder<'_> {
    fn push(&mut self, tag: String, code: &DeweyCode, text: String) {
        let id = ElementId::new(self.doc, self.elements.len() as u32);
        let fields = vec![("dewey".to_string(), Value::Dewey(code.clone())), ("text".to_string(), Value::Text(text))];
        self.elements
            .push(Element::new(id.clone(), Payload::Record(fields)).with_label(code.to_string()));
        self.tags.entry(tag).or_default().push(id);
    }

    fn visit(&mut self, node: roxmltree::Node, code: DeweyCode) {
        let text: String = node
            .children()
            .filter(|c| c.is_text())
            .filter_map(|c| c.text())
            .collect();
        self.push(node.tag_name().name().to_string(), &code, text.trim().to_string());
        let mut k = 0;
        for child in node.children().filter(|c| c.is_element()) {
            k += 1;
            self.visit(child, code.child(k));
        }
        for attr in node.attributes() {
            k += 1;
            self.push(format!("@{}", attr.name()), &code.child(k), attr.value().trim().to_string());
        }
    }
}

pub fn xml_from_str(src: &str, origin: &str, doc_name: &str) -> Result<InstanceCategory, IoError> {
    let doc = roxmltree::Document::parse(src).map_err(|e| IoError::format(origin, e.to_string()))?;
    let mut b = Builder {
        doc: doc_name,
        elements: Vec::new(),
        tags: IndexMap::new(),
    };
    b.visit(doc.root_element(), DeweyCode::root());
    let mut objects = vec![CategoryObject::owned(doc_name, ObjectKind::Entity, b.elements)];
    for (tag, members) in b.tags {
        if tag == doc_name {
            return Err(IoError::format(origin, format!("tag `{tag}` has the same name as the document object")));
        }
        objects.push(CategoryObject::subset(tag, ObjectKind::Entity, doc_name, members));
    }
    Ok(InstanceCategory::new(objects, Vec::new()))
}

pub fn load_xml(path: impl AsRef<Path>, doc_name: &str) -> Result<InstanceCategory, IoError> {
    let path = path.as_ref();
    xml_from_str(&read_file(path)?, &path.display().to_string(), doc_name)
}
