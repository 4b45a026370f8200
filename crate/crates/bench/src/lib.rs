//! Fixtures shared by the benchmarks.

use agp_core::{Graph, Layout, NodeId};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Random edges with a heavy-tailed endpoint distribution: the first endpoint
/// is uniform, the second is drawn as `floor(n * u^2)`, which concentrates
/// degree on low ids and gives the power-law-ish push lists sampling targets.
pub fn skewed_edges(n: usize, m: usize, seed: u64) -> Vec<(NodeId, NodeId)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m + n);
    // A ring keeps the graph connected.
    for u in 0..n {
        edges.push((u as NodeId, ((u + 1) % n) as NodeId));
    }
    while edges.len() < m + n {
        let u = rng.random_range(0..n);
        let x: f64 = rng.random();
        let v = ((n as f64) * x * x) as usize;
        if u != v {
            edges.push((u as NodeId, v.min(n - 1) as NodeId));
        }
    }
    edges
}

pub fn skewed_graph(n: usize, m: usize, seed: u64) -> Graph {
    Graph::from_edges(n, &skewed_edges(n, m, seed), Layout::Undirected, false).expect("valid fixture")
}
