//! Scaling sweeps for `Lim` and `getReach`.

use std::time::Instant;

use crate::algebra::{op_cat, op_get_reach, op_lim, DiagramSpec};
use crate::category::{CategoryObject, Element, ElementId, InstanceCategory, Morphism, ObjectKind, Payload};
use crate::value::Value;

/// One measured size: `n` elements per object (lim) or nodes (reach).
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    /// Output rows of the measured operator.
    pub rows: usize,
    /// Edges in the graph (reach) or 0.
    pub edges: usize,
    /// Median wall time over the repetitions.
    pub seconds: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn timed<T>(reps: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut times = Vec::with_capacity(reps.max(1));
    let mut last = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let out = f();
        times.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    (last.expect("at least one repetition"), median(times))
}

/// `p` objects `O1..Op` of `n` integer atoms each, no morphisms.
pub fn lim_category(p: usize, n: usize) -> InstanceCategory {
    let objects = (1..=p)
        .map(|i| CategoryObject::from_atoms(&format!("O{i}"), ObjectKind::Entity, (0..n as i64).map(Value::Int)))
        .collect();
    InstanceCategory::new(objects, Vec::new())
}

/// `Lim` of the `p`-object product diagram at each size.
pub fn lim_sweep(p: usize, sizes: &[usize], reps: usize) -> Vec<BenchRow> {
    sizes
        .iter()
        .map(|&n| {
            let cat = lim_category(p, n);
            let spec = DiagramSpec {
                objects: (1..=p).map(|i| format!("O{i}")).collect(),
                constraints: Vec::new(),
            };
            let diagram = op_cat(&cat, &spec).expect("product diagram is valid");
            let (rel, seconds) = timed(reps, || op_lim(&cat, &diagram).expect("lim evaluates"));
            BenchRow {
                n,
                rows: rel.len(),
                edges: 0,
                seconds,
            }
        })
        .collect()
}

/// A chain `v0 -> v1 -> ... -> v(n-1)` over `Node`, edges `E`, with the
/// source set `Start = {v0}`.
pub fn chain_category(n: usize) -> InstanceCategory {
    let nodes: Vec<Element> = (0..n)
        .map(|i| Element::new(ElementId::new("Node", i as u32), Payload::Atom(Value::Int(i as i64))).with_label(format!("v{i}")))
        .collect();
    let ids: Vec<ElementId> = nodes.iter().map(|e| e.id.clone()).collect();
    let edges: Vec<Element> = (1..n)
        .map(|i| Element::new(ElementId::new("E", (i - 1) as u32), Payload::Tuple(vec![ids[i - 1].clone(), ids[i].clone()])))
        .collect();
    let edge_ids: Vec<ElementId> = edges.iter().map(|e| e.id.clone()).collect();
    let objects = vec![
        CategoryObject::owned("Node", ObjectKind::Entity, nodes),
        CategoryObject::subset("Start", ObjectKind::Entity, "Node", ids.iter().take(1).cloned().collect()),
        CategoryObject::relationship("E", vec!["Node".into(), "Node".into()], edges),
    ];
    let morphisms = vec![
        Morphism::new("E_src", "E", "Node", edge_ids.iter().cloned().zip(ids.iter().cloned()).collect()),
        Morphism::new("E_dst", "E", "Node", edge_ids.iter().cloned().zip(ids.iter().skip(1).cloned()).collect()),
    ];
    InstanceCategory::new(objects, morphisms)
}

/// `getReach(Start, Node, E)` on chains of each size.
pub fn reach_sweep(sizes: &[usize], reps: usize) -> Vec<BenchRow> {
    sizes
        .iter()
        .map(|&n| {
            let cat = chain_category(n);
            let (rel, seconds) = timed(reps, || op_get_reach(&cat, "Start", "Node", "E").expect("reach evaluates"));
            BenchRow {
                n,
                rows: rel.len(),
                edges: n.saturating_sub(1),
                seconds,
            }
        })
        .collect()
}

/// Least-squares slope of `ln(seconds)` against `ln(x(row))`.
pub fn log_log_slope(rows: &[BenchRow], x: impl Fn(&BenchRow) -> f64) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| x(r) > 0.0 && r.seconds > 0.0)
        .map(|r| (x(r).ln(), r.seconds.ln()))
        .collect();
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = format!("{:>8}  {:>10}  {:>8}  {:>12}\n", "n", "rows", "edges", "seconds");
    for r in rows {
        out.push_str(&format!("{:>8}  {:>10}  {:>8}  {:>12.6}\n", r.n, r.rows, r.edges, r.seconds));
    }
    out
}
