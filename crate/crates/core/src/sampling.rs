//! Subset sampling over degree-grouped push lists, and the keyed random
//! streams that make randomized propagation reproducible.
//!
//! Inside group `G_k` every entry has degree in `[2^k, 2^(k+1))`, so its
//! inclusion probability `p_v = base * d_v^-a` is within a factor `2^a` of
//! `p* = base * (2^k)^-a`. We draw `l ~ Binomial(|G_k|, p*)`, pick `l`
//! distinct members uniformly, and keep each with probability `p_v / p*`.
//! Every member ends up included independently with probability exactly
//! `p_v`, at expected cost `O(1 + sum_{v in G_k} p_v)`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::graph::{Graph, NodeId};
use crate::propagation::InversePower;

/// A family of independent ChaCha streams, one per `(level, node)`.
///
/// The key folds in the user seed plus an optional column and part index, so
/// feature columns draw from disjoint streams regardless of scheduling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStreams {
    key: [u8; 32],
}

impl RandomStreams {
    pub fn new(seed: u64) -> RandomStreams {
        RandomStreams::keyed(seed, 0, 0)
    }

    pub fn keyed(seed: u64, column: u64, part: u64) -> RandomStreams {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&column.to_le_bytes());
        key[16..24].copy_from_slice(&part.to_le_bytes());
        key[24..].copy_from_slice(b"agp-prop");
        RandomStreams { key }
    }

    pub fn stream(&self, level: u32, node: NodeId) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(((level as u64) << 32) | node as u64);
        rng
    }
}

/// Exact `Binomial(n, p)` draw; `p` is clamped to `[0, 1]`.
pub fn binomial<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> usize {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n as u64, p)
            .expect("p lies in (0, 1)")
            .sample(rng) as usize
    }
}

/// Counters from one subset-sampling call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleCost {
    pub groups: usize,
    pub candidates: usize,
}

/// Samples entries `from..end` of `u`'s push list, each independently with
/// probability `min(1, base * d_v^-a)`. Accepted nodes are appended to `out`.
///
/// `from` is an absolute index into [`Graph::neighbor_array`] inside `u`'s
/// range, normally the end of the deterministic prefix.
pub fn subset_sample<R: Rng + ?Sized>(
    g: &Graph,
    u: NodeId,
    from: usize,
    base: f64,
    a: f64,
    rng: &mut R,
    out: &mut Vec<NodeId>,
) -> SampleCost {
    subset_sample_with(g, u, from, base, InversePower::new(a), rng, out)
}

pub(crate) fn subset_sample_with<R: Rng + ?Sized>(
    g: &Graph,
    u: NodeId,
    from: usize,
    base: f64,
    inv_a: InversePower,
    rng: &mut R,
    out: &mut Vec<NodeId>,
) -> SampleCost {
    let mut cost = SampleCost::default();
    if base <= 0.0 {
        return cost;
    }
    let groups = g.groups(u);
    let first = groups.partition_point(|grp| grp.end <= from);
    for grp in &groups[first..] {
        let lo = grp.start.max(from);
        cost.groups += 1;
        cost.candidates += sample_group_with(g, lo..grp.end, grp.k, base, inv_a, rng, out);
    }
    cost
}

/// Samples one degree group. Returns the binomial candidate count `l`.
pub fn sample_group<R: Rng + ?Sized>(
    g: &Graph,
    members: std::ops::Range<usize>,
    k: u32,
    base: f64,
    a: f64,
    rng: &mut R,
    out: &mut Vec<NodeId>,
) -> usize {
    sample_group_with(g, members, k, base, InversePower::new(a), rng, out)
}

fn sample_group_with<R: Rng + ?Sized>(
    g: &Graph,
    members: std::ops::Range<usize>,
    k: u32,
    base: f64,
    inv_a: InversePower,
    rng: &mut R,
    out: &mut Vec<NodeId>,
) -> usize {
    let size = members.len();
    let p_star = (base * inv_a.of(1u32 << k)).min(1.0);
    let drawn = binomial(rng, size, p_star);
    if drawn == 0 {
        return 0;
    }
    let slice = &g.neighbor_array()[members];
    for idx in index::sample(rng, size, drawn) {
        let v = slice[idx];
        let p_v = (base * inv_a.of(g.degree(v))).min(1.0);
        if p_v >= p_star || rng.random::<f64>() * p_star < p_v {
            out.push(v);
        }
    }
    drawn
}

/// Uniform subset sampling over a whole range with a single probability `p`.
pub fn sample_uniform<R: Rng + ?Sized>(
    g: &Graph,
    range: std::ops::Range<usize>,
    p: f64,
    rng: &mut R,
    out: &mut Vec<NodeId>,
) -> usize {
    let size = range.len();
    let drawn = binomial(rng, size, p);
    let slice = &g.neighbor_array()[range];
    if drawn == size {
        out.extend_from_slice(slice);
    } else {
        out.extend(index::sample(rng, size, drawn).into_iter().map(|i| slice[i]));
    }
    drawn
}
