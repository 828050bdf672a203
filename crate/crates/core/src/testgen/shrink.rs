//! Greedy, deterministic shrinking of failing (category, query) pairs.

use std::collections::BTreeSet;

use crate::calculus::{check_safety, CalculusQuery, Formula};
use crate::category::{Carrier, CategoryObject, ElementId, InstanceCategory, Payload};

/// Upper bound on predicate evaluations per shrink.
const MAX_ATTEMPTS: usize = 2000;

/// Repeatedly applies the first simplification that keeps `fails` true,
/// until none does. Candidates are tried in a fixed order: formula parts,
/// targets, elements, morphisms, then objects. Every candidate is a valid
/// category and a safe query before `fails` sees it.
pub fn shrink(
    cat: &InstanceCategory,
    query: &CalculusQuery,
    fails: &dyn Fn(&InstanceCategory, &CalculusQuery) -> bool,
) -> (InstanceCategory, CalculusQuery) {
    let mut cat = cat.clone();
    let mut query = query.clone();
    let mut attempts = 0;
    'outer: loop {
        for q in query_candidates(&query) {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                break 'outer;
            }
            if check_safety(&q, &cat).is_empty() && fails(&cat, &q) {
                query = q;
                continue 'outer;
            }
        }
        for c in category_candidates(&cat, &query) {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                break 'outer;
            }
            if c.validate().is_empty() && check_safety(&query, &c).is_empty() && fails(&c, &query) {
                cat = c;
                continue 'outer;
            }
        }
        break;
    }
    (cat, query)
}

/// Total size, for judging shrink quality: elements plus morphism pairs plus
/// formula nodes.
pub fn case_size(cat: &InstanceCategory, query: &CalculusQuery) -> usize {
    let elements: usize = cat.objects().iter().map(|o| o.len()).sum();
    let pairs: usize = cat.morphisms().iter().map(|m| m.mapping.len()).sum();
    elements + pairs + formula_size(&query.matrix) + query.targets.len()
}

fn formula_size(f: &Formula) -> usize {
    1 + match f {
        Formula::Not(g) => formula_size(g),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().map(formula_size).sum(),
        Formula::Quant { body, .. } => formula_size(body),
        _ => 0,
    }
}

fn query_candidates(q: &CalculusQuery) -> Vec<CalculusQuery> {
    let mut out: Vec<CalculusQuery> = formula_variants(&q.matrix)
        .into_iter()
        .map(|matrix| CalculusQuery { matrix, ..q.clone() })
        .collect();
    if q.targets.len() > 1 {
        for i in 0..q.targets.len() {
            let mut t = q.clone();
            t.targets.remove(i);
            out.push(t);
        }
    }
    out
}

/// Each result removes or trivializes one part of `f`.
fn formula_variants(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    match f {
        Formula::True | Formula::False => return out,
        Formula::And(fs) | Formula::Or(fs) => {
            let rebuild = |parts: Vec<Formula>| match f {
                Formula::And(_) => Formula::and(parts),
                _ => Formula::or(parts),
            };
            for i in 0..fs.len() {
                let mut parts = fs.clone();
                parts.remove(i);
                out.push(rebuild(parts));
            }
            for i in 0..fs.len() {
                for v in formula_variants(&fs[i]) {
                    let mut parts = fs.clone();
                    parts[i] = v;
                    out.push(rebuild(parts));
                }
            }
        }
        Formula::Not(g) => {
            out.push((**g).clone());
            out.extend(formula_variants(g).into_iter().map(Formula::negate));
        }
        Formula::Quant { q, var, range, body } => {
            out.push(Formula::True);
            out.push(Formula::False);
            out.extend(
                formula_variants(body)
                    .into_iter()
                    .map(|b| Formula::quant(*q, var.clone(), range.clone(), b)),
            );
        }
        _ => {}
    }
    if !matches!(f, Formula::Quant { .. }) {
        out.push(Formula::True);
        out.push(Formula::False);
    }
    out
}

fn category_candidates(cat: &InstanceCategory, q: &CalculusQuery) -> Vec<InstanceCategory> {
    let mut out = Vec::new();
    for o in cat.objects() {
        if let Carrier::Owned(elements) = &o.carrier {
            for e in elements.iter().rev() {
                out.push(remove_elements(cat, BTreeSet::from([e.id.clone()])));
            }
        }
    }
    for o in cat.objects() {
        if let Carrier::Subset { members, .. } = &o.carrier {
            for m in members {
                let (mut objects, morphisms) = cat.clone().into_parts();
                for p in objects.iter_mut().filter(|p| p.name == o.name) {
                    if let Carrier::Subset { members, .. } = &mut p.carrier {
                        members.retain(|x| x != m);
                    }
                }
                out.push(InstanceCategory::new(objects, morphisms));
            }
        }
    }
    let used = q.object_names();
    for m in cat.morphisms() {
        if !used.contains(&m.name) {
            let (objects, mut morphisms) = cat.clone().into_parts();
            morphisms.retain(|x| x.name != m.name);
            out.push(InstanceCategory::new(objects, morphisms));
        }
    }
    for o in cat.objects() {
        let referenced = used.contains(&o.name)
            || cat.objects().iter().any(|p| p.parent() == Some(&o.name) || p.components.contains(&o.name))
            || cat.morphisms().iter().any(|m| m.domain == o.name || m.codomain == o.name);
        if !referenced {
            let (mut objects, morphisms) = cat.clone().into_parts();
            objects.retain(|x| x.name != o.name);
            out.push(InstanceCategory::new(objects, morphisms));
        }
    }
    out
}

/// Removes elements, cascading to tuples that mention them, subset members
/// and morphism pairs. A morphism whose image element disappears is
/// redirected to the first remaining element of its codomain, or dropped if
/// none remains.
fn remove_elements(cat: &InstanceCategory, seed: BTreeSet<ElementId>) -> InstanceCategory {
    let (objects, morphisms) = cat.clone().into_parts();
    let mut gone = seed;
    loop {
        let before = gone.len();
        for o in &objects {
            if let Carrier::Owned(elements) = &o.carrier {
                for e in elements {
                    if let Payload::Tuple(parts) = &e.payload {
                        if parts.iter().any(|p| gone.contains(p)) {
                            gone.insert(e.id.clone());
                        }
                    }
                }
            }
        }
        if gone.len() == before {
            break;
        }
    }
    let objects: Vec<CategoryObject> = objects
        .into_iter()
        .map(|mut o| {
            match &mut o.carrier {
                Carrier::Owned(elements) => elements.retain(|e| !gone.contains(&e.id)),
                Carrier::Subset { members, .. } => members.retain(|m| !gone.contains(m)),
            }
            o
        })
        .collect();
    let trimmed = InstanceCategory::new(objects.clone(), Vec::new());
    let morphisms = morphisms
        .into_iter()
        .filter_map(|mut m| {
            m.mapping.retain(|(x, _)| !gone.contains(x));
            if m.mapping.iter().any(|(_, y)| gone.contains(y)) {
                let fallback = trimmed.members(&m.codomain).ok()?.first()?.clone();
                for (_, y) in m.mapping.iter_mut() {
                    if gone.contains(y) {
                        *y = fallback.clone();
                    }
                }
            }
            Some(m)
        })
        .collect();
    InstanceCategory::new(objects, morphisms)
}
