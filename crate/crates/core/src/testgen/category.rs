//! Random small categories with independently computed side tables.

use std::collections::{BTreeMap, BTreeSet};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Limits;
use crate::category::{CategoryObject, Element, ElementId, InstanceCategory, Morphism, ObjectKind, Payload};
use crate::dewey::DeweyCode;
use crate::value::{Decimal, Value};

/// What the generator knows about the category it built, computed from its
/// own choices rather than from the stored instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    /// Every morphism as a finite map, projections included.
    pub morphisms: BTreeMap<String, BTreeMap<ElementId, ElementId>>,
    /// `(parent, child)` pairs of the generated forests.
    pub parent: BTreeSet<(ElementId, ElementId)>,
    /// `(ancestor, descendant)` pairs, proper.
    pub ancestor: BTreeSet<(ElementId, ElementId)>,
    /// Ordered pairs of distinct children of one parent.
    pub sibling: BTreeSet<(ElementId, ElementId)>,
    /// Edge pairs of each relationship whose two components coincide.
    pub edges: BTreeMap<String, BTreeSet<(ElementId, ElementId)>>,
    /// Transitive closure of each edge set (paths of one or more edges),
    /// by Floyd–Warshall over the component object.
    pub closure: BTreeMap<String, BTreeSet<(ElementId, ElementId)>>,
}

pub(crate) const DECIMALS: [(i64, i64); 4] = [(1, 2), (1, 3), (2, 1), (5, 4)];
pub(crate) const TEXTS: [&str; 3] = ["a", "b", "c"];
pub(crate) const INT_MAX: i64 = 3;

/// Floyd–Warshall over `nodes`; `closure[i][j]` iff a path of one or more
/// edges leads from `i` to `j`.
pub fn floyd_warshall(nodes: &[ElementId], edges: &BTreeSet<(ElementId, ElementId)>) -> BTreeSet<(ElementId, ElementId)> {
    let n = nodes.len();
    let pos = |x: &ElementId| nodes.iter().position(|y| y == x);
    let mut m = vec![vec![false; n]; n];
    for (a, b) in edges {
        if let (Some(i), Some(j)) = (pos(a), pos(b)) {
            m[i][j] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                let through = m[k].clone();
                for (cell, reach) in m[i].iter_mut().zip(through) {
                    *cell |= reach;
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] {
                out.insert((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    out
}

struct Entity {
    name: String,
    ids: Vec<ElementId>,
}

/// Generates a valid category within `limits`, and its ground truth.
///
/// The first object is always an entity with at least one element. Entity
/// elements are records `{k: int, s: text, q: decimal, dewey}` whose Dewey
/// codes lay out a random forest. Further objects are entities, subsets or
/// binary relationships; each relationship `R` comes with projection
/// morphisms `R_1` and `R_2`, which are not counted against the morphism
/// limit.
pub fn gen_category(seed: u64, limits: &Limits) -> (InstanceCategory, GroundTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truth = GroundTruth::default();
    let n_objects = rng.random_range(1..=limits.max_objects.max(1));
    let mut objects = Vec::new();
    let mut morphisms = Vec::new();
    let mut entities: Vec<Entity> = Vec::new();
    let mut subsets: Vec<(String, String, Vec<ElementId>)> = Vec::new();
    let entity_names = ["A", "B", "C", "D", "F", "G"];

    for i in 0..n_objects {
        let role = if i == 0 {
            0
        } else if entities.len() == entity_names.len() {
            1
        } else {
            match rng.random_range(0..100) {
                0..=29 => 0,
                30..=54 => 1,
                _ => 2,
            }
        };
        match role {
            0 => {
                let name = entity_names[entities.len()].to_string();
                let count = if i == 0 {
                    rng.random_range(1..=limits.max_elements.max(1))
                } else if rng.random_bool(0.1) {
                    0
                } else {
                    rng.random_range(1..=limits.max_elements.max(1))
                };
                let lower = name.to_lowercase();
                let mut parent: Vec<Option<usize>> = Vec::with_capacity(count);
                let mut codes: Vec<DeweyCode> = Vec::with_capacity(count);
                let mut children = vec![0u32; count];
                let mut roots = 0u32;
                for e in 0..count {
                    let p = if e == 0 || rng.random_bool(0.3) { None } else { Some(rng.random_range(0..e)) };
                    let code = match p {
                        None => {
                            roots += 1;
                            DeweyCode::new(vec![roots]).expect("positive component")
                        }
                        Some(p) => {
                            children[p] += 1;
                            codes[p].child(children[p])
                        }
                    };
                    parent.push(p);
                    codes.push(code);
                }
                let ids: Vec<ElementId> = (0..count).map(|e| ElementId::new(name.as_str(), e as u32)).collect();
                let elements = (0..count)
                    .map(|e| {
                        let (n, d) = DECIMALS[rng.random_range(0..DECIMALS.len())];
                        let fields = vec![
                            ("k".to_string(), Value::Int(rng.random_range(0..=INT_MAX))),
                            ("s".to_string(), Value::from(TEXTS[rng.random_range(0..TEXTS.len())])),
                            ("q".to_string(), Value::Decimal(Decimal::from_ratio(n, d).expect("nonzero denominator"))),
                            ("dewey".to_string(), Value::Dewey(codes[e].clone())),
                        ];
                        Element::new(ids[e].clone(), Payload::Record(fields)).with_label(format!("{lower}{e}"))
                    })
                    .collect();
                for (c, p) in parent.iter().enumerate() {
                    if let Some(p) = *p {
                        truth.parent.insert((ids[p].clone(), ids[c].clone()));
                        let mut a = Some(p);
                        while let Some(x) = a {
                            truth.ancestor.insert((ids[x].clone(), ids[c].clone()));
                            a = parent[x];
                        }
                    }
                    for (d, q) in parent.iter().enumerate() {
                        if c != d && p.is_some() && p == q {
                            truth.sibling.insert((ids[c].clone(), ids[d].clone()));
                        }
                    }
                }
                objects.push(CategoryObject::owned(&name, ObjectKind::Entity, elements));
                entities.push(Entity { name, ids });
            }
            1 => {
                let parent = &entities[rng.random_range(0..entities.len())];
                let members: Vec<ElementId> = parent.ids.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
                let name = format!("S{}", parent.name);
                let name = if subsets.iter().any(|(n, _, _)| *n == name) { format!("{name}{i}") } else { name };
                objects.push(CategoryObject::subset(&name, ObjectKind::Entity, &parent.name, members.clone()));
                subsets.push((name, parent.name.clone(), members));
            }
            _ => {
                let a = rng.random_range(0..entities.len());
                let b = if rng.random_bool(0.6) { a } else { rng.random_range(0..entities.len()) };
                let name = format!("R{i}");
                let mut pairs = BTreeSet::new();
                let possible = entities[a].ids.len() * entities[b].ids.len();
                let want = rng.random_range(0..=limits.max_elements.max(1)).min(possible);
                while pairs.len() < want {
                    let x = entities[a].ids[rng.random_range(0..entities[a].ids.len())].clone();
                    let y = entities[b].ids[rng.random_range(0..entities[b].ids.len())].clone();
                    pairs.insert((x, y));
                }
                let pairs: Vec<(ElementId, ElementId)> = pairs.into_iter().collect();
                let ids: Vec<ElementId> = (0..pairs.len()).map(|t| ElementId::new(name.as_str(), t as u32)).collect();
                let lower = name.to_lowercase();
                let elements = pairs
                    .iter()
                    .zip(&ids)
                    .enumerate()
                    .map(|(t, ((x, y), id))| {
                        Element::new(id.clone(), Payload::Tuple(vec![x.clone(), y.clone()])).with_label(format!("{lower}_{t}"))
                    })
                    .collect();
                let (ca, cb) = (entities[a].name.clone(), entities[b].name.clone());
                objects.push(CategoryObject::relationship(&name, vec![ca.clone(), cb.clone()], elements));
                for (j, comp) in [&ca, &cb].into_iter().enumerate() {
                    let mapping: Vec<(ElementId, ElementId)> = ids
                        .iter()
                        .zip(&pairs)
                        .map(|(id, (x, y))| (id.clone(), if j == 0 { x.clone() } else { y.clone() }))
                        .collect();
                    truth.morphisms.insert(format!("{name}_{}", j + 1), mapping.iter().cloned().collect());
                    morphisms.push(Morphism::new(format!("{name}_{}", j + 1), &name, comp.as_str(), mapping));
                }
                if a == b {
                    let set: BTreeSet<_> = pairs.iter().cloned().collect();
                    truth.closure.insert(name.clone(), floyd_warshall(&entities[a].ids, &set));
                    truth.edges.insert(name, set);
                }
            }
        }
    }

    let n_morphisms = rng.random_range(0..=limits.max_morphisms);
    for m in 0..n_morphisms {
        // Domains are entities or subsets; codomains are entities.
        let n_domains = entities.len() + subsets.len();
        let d = rng.random_range(0..n_domains);
        let (dom_name, dom_ids) = if d < entities.len() {
            (entities[d].name.clone(), entities[d].ids.clone())
        } else {
            let (n, _, members) = &subsets[d - entities.len()];
            (n.clone(), members.clone())
        };
        let cod = &entities[rng.random_range(0..entities.len())];
        if cod.ids.is_empty() && !dom_ids.is_empty() {
            continue;
        }
        let name = format!("f{}", m + 1);
        let mapping: Vec<(ElementId, ElementId)> = dom_ids
            .iter()
            .map(|x| (x.clone(), cod.ids[rng.random_range(0..cod.ids.len())].clone()))
            .collect();
        truth.morphisms.insert(name.clone(), mapping.iter().cloned().collect());
        morphisms.push(Morphism::new(name, dom_name, cod.name.as_str(), mapping));
    }

    let cat = InstanceCategory::new(objects, morphisms);
    debug_assert!(cat.validate().is_empty(), "{:?}", cat.validate());
    (cat, truth)
}
