//! Graph fixtures shared by the integration suites.
#![allow(dead_code)]

use agp_core::{Graph, Layout, Measure, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn undirected(n: usize, edges: &[(NodeId, NodeId)]) -> Graph {
    Graph::from_edges(n, edges, Layout::Undirected, false).unwrap()
}

pub fn triangle() -> Graph {
    undirected(3, &[(0, 1), (1, 2), (2, 0)])
}

pub fn complete(n: u32) -> Graph {
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    undirected(n as usize, &edges)
}

/// `s` (node 0) joined to `n` spokes, each spoke joined to `v` (node `n + 1`).
pub fn star_path(n: u32) -> Graph {
    let edges: Vec<_> = (1..=n).flat_map(|i| [(0, i), (i, n + 1)]).collect();
    undirected(n as usize + 2, &edges)
}

/// Two triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
pub fn two_triangles() -> Graph {
    undirected(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)])
}

/// Erdos-Renyi edge list over `n` nodes.
pub fn gnp_edges(n: u32, p: f64, rng: &mut impl Rng) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// G(n, p) with a ring added so the graph is connected.
pub fn connected_gnp(n: u32, p: f64, seed: u64) -> Graph {
    let mut edges = gnp_edges(n, p, &mut rng(seed));
    edges.extend((0..n).map(|i| (i, (i + 1) % n)));
    undirected(n as usize, &edges)
}

/// A dense random core `0..core` with a sparse ring-plus-chords periphery
/// `core..core+peri`, linked by a handful of bridge edges.
pub fn core_periphery(core: u32, p: f64, peri: u32, chords: u32, bridges: u32, seed: u64) -> Graph {
    let mut r = rng(seed);
    let mut edges = gnp_edges(core, p, &mut r);
    edges.extend((0..peri).map(|i| (core + i, core + (i + 1) % peri)));
    for _ in 0..chords {
        let (a, b) = (r.random_range(0..peri), r.random_range(0..peri));
        if a != b {
            edges.push((core + a, core + b));
        }
    }
    for _ in 0..bridges {
        edges.push((r.random_range(0..core), core + r.random_range(0..peri)));
    }
    undirected((core + peri) as usize, &edges)
}

/// The five measures used throughout, with `lambda1` filled in for Katz.
pub fn measures(lambda1: f64) -> Vec<Measure> {
    vec![
        Measure::Transition { hops: 3 },
        Measure::Ppr { alpha: 0.2 },
        Measure::Hkpr { t: 5.0 },
        Measure::Katz { beta: 0.5 / lambda1, lambda1: Some(lambda1) },
        Measure::SingleTargetPpr { alpha: 0.2 },
    ]
}
