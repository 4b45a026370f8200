//! Sweep-cut local clustering over degree-normalized scores.

use serde::{Deserialize, Serialize};

use crate::error::{AgpError, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Nodes with a positive score, highest first (ties by ascending id).
    pub order: Vec<NodeId>,
    pub best_prefix_len: usize,
    pub best_conductance: f64,
    /// `curve[i - 1]` is the conductance of the first `i` nodes of `order`.
    pub curve: Vec<f64>,
}

impl SweepResult {
    pub fn best_set(&self) -> &[NodeId] {
        &self.order[..self.best_prefix_len]
    }
}

/// `pi(v) / d_v`, with zero for degree-0 nodes.
pub fn normalize_scores(g: &Graph, pi: &[f64]) -> Result<Vec<f64>> {
    if pi.len() != g.n() {
        return Err(AgpError::Shape(format!("score vector has {} entries, graph has {} nodes", pi.len(), g.n())));
    }
    Ok(pi
        .iter()
        .zip(g.degrees())
        .map(|(&p, &d)| if d == 0 { 0.0 } else { p / d as f64 })
        .collect())
}

/// `cut / min(vol, total - vol)`, or 1 when the denominator vanishes.
#[inline]
fn phi(cut: u64, vol: u64, total: u64) -> f64 {
    let denom = vol.min(total - vol);
    if denom == 0 {
        1.0
    } else {
        cut as f64 / denom as f64
    }
}

/// Conductance of `set` computed from scratch.
pub fn conductance(g: &Graph, set: &[bool]) -> f64 {
    let mut vol = 0u64;
    let mut cut = 0u64;
    for u in (0..g.n()).filter(|&u| set[u]) {
        vol += g.degree(u as NodeId) as u64;
        cut += g.neighbors(u as NodeId).iter().filter(|&&w| !set[w as usize]).count() as u64;
    }
    phi(cut, vol, g.neighbor_array().len() as u64)
}

/// Scans prefixes of the score ordering and returns the one of least conductance.
///
/// At most `min(max_prefix, #positive, n - 1)` prefixes are evaluated.
pub fn sweep_cut(g: &Graph, scores: &[f64], max_prefix: Option<usize>) -> Result<SweepResult> {
    if g.is_directed() {
        return Err(AgpError::config("sweep cut needs an undirected graph"));
    }
    if scores.len() != g.n() {
        return Err(AgpError::Shape(format!("score vector has {} entries, graph has {} nodes", scores.len(), g.n())));
    }
    if let Some(v) = scores.iter().position(|s| s.is_nan()) {
        return Err(AgpError::Numeric(format!("score of node {v} is NaN")));
    }
    let mut order: Vec<NodeId> = (0..g.n() as NodeId).filter(|&v| scores[v as usize] > 0.0).collect();
    order.sort_by(|&x, &y| scores[y as usize].total_cmp(&scores[x as usize]).then(x.cmp(&y)));

    let limit = max_prefix.unwrap_or(usize::MAX).min(order.len()).min(g.n().saturating_sub(1));
    if limit == 0 {
        return Err(AgpError::EmptySweep);
    }

    let total = g.neighbor_array().len() as u64;
    let mut in_set = vec![false; g.n()];
    let (mut vol, mut cut) = (0u64, 0u64);
    let mut curve = Vec::with_capacity(limit);
    for &u in &order[..limit] {
        let mut inside = 0u64;
        let mut loops = 0u64;
        for &w in g.neighbors(u) {
            if w == u {
                loops += 1;
            } else if in_set[w as usize] {
                inside += 1;
            }
        }
        let d = g.degree(u) as u64;
        in_set[u as usize] = true;
        vol += d;
        cut = cut + (d - loops - inside) - inside;
        curve.push(phi(cut, vol, total));
    }

    let mut best = 0;
    for (i, &c) in curve.iter().enumerate() {
        if c < curve[best] {
            best = i;
        }
    }
    Ok(SweepResult {
        order,
        best_prefix_len: best + 1,
        best_conductance: curve[best],
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Layout;

    fn undirected(n: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::from_edges(n, edges, Layout::Undirected, false).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let tri = undirected(3, &[(0, 1), (1, 2), (2, 0)]);
        let s = normalize_scores(&tri, &[0.5, 0.3, 0.2]).unwrap();
        assert_eq!(s, vec![0.25, 0.15, 0.1]);
        assert_eq!(normalize_scores(&tri, &[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert!(normalize_scores(&tri, &[0.0; 2]).is_err());
        let iso = undirected(3, &[(0, 1)]);
        assert_eq!(normalize_scores(&iso, &[1.0, 1.0, 1.0]).unwrap()[2], 0.0);
    }

    #[test]
    fn two_triangles_with_bridge() {
        let g = undirected(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        let scores = [0.3, 0.3, 0.2, 0.05, 0.01, 0.01];
        let res = sweep_cut(&g, &scores, None).unwrap();
        assert_eq!(res.best_prefix_len, 3);
        let mut set = res.best_set().to_vec();
        set.sort();
        assert_eq!(set, vec![0, 1, 2]);
        assert_eq!(res.best_conductance, 1.0 / 7.0);
        assert_eq!(res.curve.len(), 5);
    }

    #[test]
    fn k4_single_node() {
        let g = undirected(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let res = sweep_cut(&g, &[0.4, 0.3, 0.2, 0.1], None).unwrap();
        assert_eq!(res.curve[0], 1.0);
    }

    #[test]
    fn path_prefixes() {
        let g = undirected(3, &[(0, 1), (1, 2)]);
        let res = sweep_cut(&g, &[0.9, 0.5, 0.1], None).unwrap();
        assert_eq!(res.curve, vec![1.0, 1.0]);
        assert_eq!(res.best_prefix_len, 1);
        assert_eq!(res.best_conductance, 1.0);
    }

    #[test]
    fn ties_break_by_id_and_zero_scores_fail() {
        let g = undirected(4, &[(0, 1), (1, 2), (2, 3)]);
        let res = sweep_cut(&g, &[0.0, 0.5, 0.5, 0.5], None).unwrap();
        assert_eq!(res.order, vec![1, 2, 3]);
        assert!(matches!(sweep_cut(&g, &[0.0; 4], None), Err(AgpError::EmptySweep)));
        assert_eq!(sweep_cut(&g, &[0.4, 0.3, 0.2, 0.1], Some(1)).unwrap().curve.len(), 1);
    }

    #[test]
    fn self_loops_do_not_cross_the_cut() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)], Layout::Undirected, true).unwrap();
        let res = sweep_cut(&g, &[0.5, 0.3, 0.1], None).unwrap();
        for (i, c) in res.curve.iter().enumerate() {
            let mut set = vec![false; 3];
            res.order[..=i].iter().for_each(|&v| set[v as usize] = true);
            assert_eq!(*c, conductance(&g, &set));
        }
    }
}
