//! Workloads shared by the benchmarks.

use zdist::{Constraint, Instance, RelationDef, Template};

/// Binary template over a single symmetric offset set.
pub fn distance_template(distances: &[i64]) -> Template {
    let offsets: Vec<i64> = distances.iter().flat_map(|&d| [d, -d]).collect();
    Template::new("dist", vec![RelationDef::binary("R", offsets)]).unwrap()
}

pub fn graph_instance(n: usize, edges: &[(usize, usize)]) -> Instance {
    Instance::new(
        n,
        edges.iter().map(|&(a, b)| Constraint::new("R", [a, b])).collect(),
    )
    .unwrap()
}

pub fn petersen() -> Instance {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    graph_instance(10, &edges)
}

pub fn complete(n: usize) -> Instance {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    graph_instance(n, &edges)
}

pub fn cycle(n: usize) -> Instance {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph_instance(n, &edges)
}
