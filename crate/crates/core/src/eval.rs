//! Accuracy metrics and independent reference implementations.
//!
//! [`dense_oracle`] never touches the push machinery: it rebuilds a dense
//! operator from the adjacency lists, recounts degrees, uses the measure's raw
//! weights and sums matrix powers in double-double arithmetic.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AgpError, Result};
use crate::graph::{Graph, Layout, NodeId};
use crate::propagation::randomized::{randomized_propagate, RandomizedConfig};
use crate::propagation::{Exponents, SparseSignal};
use crate::weights::{select_level_count, Measure, WeightScheme};

/// Largest graph [`dense_oracle`] accepts.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub max_error: f64,
    pub precision_at_k: f64,
    pub k: usize,
    pub wall_time: f64,
    pub push_count: u64,
}

/// `max_v |truth(v) - est(v)|`, divided by `d_v` when `normalized`
/// (degree-0 nodes are then skipped).
pub fn max_error(g: &Graph, truth: &[f64], est: &[f64], normalized: bool) -> Result<f64> {
    if truth.len() != g.n() {
        return Err(AgpError::Shape(format!("vectors of length {} on a graph of {} nodes", truth.len(), g.n())));
    }
    max_error_with(truth, est, normalized.then(|| g.degrees()))
}

/// [`max_error`] with an optional degree vector instead of a graph.
pub fn max_error_with(truth: &[f64], est: &[f64], degrees: Option<&[u32]>) -> Result<f64> {
    if truth.len() != est.len() || degrees.is_some_and(|d| d.len() != truth.len()) {
        return Err(AgpError::Shape(format!("vectors of length {} and {}", truth.len(), est.len())));
    }
    let mut worst = 0.0f64;
    for (v, (t, e)) in truth.iter().zip(est).enumerate() {
        let diff = (t - e).abs();
        let err = match degrees.map(|d| d[v]) {
            None => diff,
            Some(0) => continue,
            Some(d) => diff / d as f64,
        };
        worst = worst.max(err);
    }
    Ok(worst)
}

fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&x, &y| values[y].total_cmp(&values[x]).then(x.cmp(&y)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Overlap of the two top-`k` sets, divided by `k`. Ties rank lower ids first.
pub fn precision_at_k(truth: &[f64], est: &[f64], k: usize) -> Result<f64> {
    if truth.len() != est.len() {
        return Err(AgpError::Shape(format!("vectors of length {} and {}", truth.len(), est.len())));
    }
    if k == 0 || k > truth.len() {
        return Err(AgpError::config(format!("k must lie in 1..={}, got {k}", truth.len())));
    }
    let a = top_k(truth, k);
    let b = top_k(est, k);
    let common = a.iter().filter(|v| b.binary_search(v).is_ok()).count();
    Ok(common as f64 / k as f64)
}

/// Unevaluated sum `hi + lo` with roughly 106 bits of precision.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = Dd::two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = Dd::two_sum(s, e);
        Dd { hi, lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = Dd::two_sum(p, e);
        Dd { hi, lo }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Degree used in the normalization: list length, except that in the reverse
/// layout it is the out-degree, i.e. how often a node appears in other lists.
fn operator_degrees(g: &Graph) -> Vec<u64> {
    let n = g.n();
    let mut deg = vec![0u64; n];
    for u in 0..n {
        let list = &g.neighbor_array()[g.offsets()[u]..g.offsets()[u + 1]];
        match g.layout() {
            Layout::DirectedReverse => list.iter().for_each(|&w| deg[w as usize] += 1),
            _ => deg[u] += list.len() as u64,
        }
    }
    deg
}

fn inv_pow(d: u64, e: f64) -> Dd {
    if e == 0.0 {
        Dd::from(1.0)
    } else if d == 0 {
        Dd::from(0.0)
    } else if e == 1.0 {
        // 1/d to double-double precision.
        let q = 1.0 / d as f64;
        let r = (-q).mul_add(d as f64, 1.0);
        Dd { hi: q, lo: r / d as f64 }
    } else {
        Dd::from((d as f64).powf(-e))
    }
}

/// Dense `sum_{i<=L} w_i M^i x` with `M = D^-a A D^-b`, raw (unnormalized)
/// weights and `L = scheme.levels()`.
pub fn dense_oracle(g: &Graph, scheme: &WeightScheme, exps: Exponents, x: &[f64]) -> Result<Vec<f64>> {
    dense_series(g, scheme.measure(), scheme.levels(), exps, x)
}

/// As [`dense_oracle`], taking the measure and level count directly.
pub fn dense_series(g: &Graph, measure: &Measure, levels: usize, exps: Exponents, x: &[f64]) -> Result<Vec<f64>> {
    let n = g.n();
    if n > DENSE_LIMIT {
        return Err(AgpError::Capacity(format!("dense oracle handles at most {DENSE_LIMIT} nodes, got {n}")));
    }
    if x.len() != n {
        return Err(AgpError::Shape(format!("signal has {} entries, graph has {n} nodes", x.len())));
    }
    let deg = operator_degrees(g);
    // m[v * n + u]: weight of the u -> v step.
    let mut m = vec![Dd::default(); n * n];
    for u in 0..n {
        let out = inv_pow(deg[u], exps.b);
        for &v in &g.neighbor_array()[g.offsets()[u]..g.offsets()[u + 1]] {
            let v = v as usize;
            m[v * n + u] = m[v * n + u].add(inv_pow(deg[v], exps.a).mul(out));
        }
    }
    let weights = measure.raw_weights(levels);
    let mut z: Vec<Dd> = x.iter().map(|&v| Dd::from(v)).collect();
    let mut acc = vec![Dd::default(); n];
    for (i, &w) in weights.iter().enumerate() {
        if i > 0 {
            z = (0..n)
                .map(|v| {
                    m[v * n..(v + 1) * n]
                        .iter()
                        .zip(&z)
                        .filter(|(c, _)| c.hi != 0.0)
                        .fold(Dd::default(), |s, (c, zu)| s.add(c.mul(*zu)))
                })
                .collect();
        }
        if w != 0.0 {
            let w = Dd::from(w);
            acc.iter_mut().zip(&z).for_each(|(a, zv)| *a = a.add(w.mul(*zv)));
        }
    }
    Ok(acc.into_iter().map(Dd::value).collect())
}

/// Largest adjacency eigenvalue by power iteration on `A + I` (the shift
/// keeps bipartite graphs from oscillating). Undirected graphs only.
pub fn dense_spectral_radius(g: &Graph) -> Result<f64> {
    let n = g.n();
    if n > DENSE_LIMIT {
        return Err(AgpError::Capacity(format!("spectral radius limited to {DENSE_LIMIT} nodes, got {n}")));
    }
    if g.is_directed() {
        return Err(AgpError::config("spectral radius needs an undirected graph"));
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let mut y = x.clone();
        for u in 0..n {
            for &v in g.neighbors(u as NodeId) {
                y[v as usize] += x[u];
            }
        }
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        let settled = (rayleigh - lambda).abs() <= 1e-15 * rayleigh;
        lambda = rayleigh;
        x = y;
        if settled {
            break;
        }
    }
    Ok(lambda - 1.0)
}

/// Poisson draw by inversion over the pmf recurrence.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, t: f64) -> usize {
    let u: f64 = rng.random();
    let mut k = 0;
    let mut p = (-t).exp();
    let mut cdf = p;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= t / k as f64;
        cdf += p;
    }
    k
}

/// Monte-Carlo heat-kernel PageRank from `s`.
///
/// Without `fixed_len`, every walk takes `Poisson(t)` steps and credits its
/// end point with `1 / walks`. With `fixed_len = L`, every walk takes `L` steps
/// and the node at step `k` receives `e^-t t^k / (walks k!)`. A walk that hits
/// a node with no outgoing entries stays there.
pub fn mc_hkpr<R: Rng + ?Sized>(
    g: &Graph,
    s: NodeId,
    t: f64,
    walks: usize,
    fixed_len: Option<usize>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if g.layout() == Layout::DirectedReverse {
        return Err(AgpError::config("random walks need out-neighbour lists"));
    }
    if s as usize >= g.n() {
        return Err(AgpError::Shape(format!("source {s} outside 0..{}", g.n())));
    }
    if walks == 0 {
        return Err(AgpError::config("need at least one walk"));
    }
    Measure::Hkpr { t }.validate()?;
    if t > 700.0 {
        return Err(AgpError::config(format!("e^-t underflows for t = {t}")));
    }
    let step = |u: NodeId, rng: &mut R| -> NodeId {
        let list = g.neighbors(u);
        if list.is_empty() {
            u
        } else {
            list[rng.random_range(0..list.len())]
        }
    };
    let mut pi = vec![0.0; g.n()];
    match fixed_len {
        None => {
            let mut ends = vec![0u64; g.n()];
            for _ in 0..walks {
                let mut u = s;
                for _ in 0..poisson(rng, t) {
                    u = step(u, rng);
                }
                ends[u as usize] += 1;
            }
            pi.iter_mut().zip(&ends).for_each(|(p, &c)| *p = c as f64 / walks as f64);
        }
        Some(len) => {
            let credit: Vec<f64> = Measure::Hkpr { t }.raw_weights(len).iter().map(|w| w / walks as f64).collect();
            for _ in 0..walks {
                let mut u = s;
                pi[u as usize] += credit[0];
                for c in &credit[1..] {
                    u = step(u, rng);
                    pi[u as usize] += c;
                }
            }
        }
    }
    Ok(pi)
}

/// One point of an accuracy/cost curve, averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub delta: f64,
    pub levels: usize,
    pub epsilon: f64,
    pub max_error: f64,
    pub push_count: f64,
}

/// MaxError against `truth` and mean push count of the randomized engine at
/// each `delta`, over `runs` seeds starting at `seed`.
#[allow(clippy::too_many_arguments)]
pub fn tradeoff_curve(
    g: &Graph,
    measure: &Measure,
    exps: Exponents,
    x: &SparseSignal,
    truth: &[f64],
    deltas: &[f64],
    runs: u64,
    seed: u64,
    normalized: bool,
) -> Result<Vec<TradeoffPoint>> {
    if runs == 0 {
        return Err(AgpError::config("need at least one run"));
    }
    let mut points = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let levels = select_level_count(measure, delta)?;
        let scheme = WeightScheme::new(measure.clone(), levels)?;
        let cfg = RandomizedConfig::new(delta, 0);
        let (mut err, mut pushes) = (0.0, 0.0);
        for run in 0..runs {
            let cfg = RandomizedConfig { seed: seed + run, ..cfg };
            let res = randomized_propagate(g, &scheme, exps, x, &cfg)?;
            err += max_error(g, truth, &res.values, normalized)?;
            pushes += res.provenance.push_count as f64;
        }
        points.push(TradeoffPoint {
            delta,
            levels,
            epsilon: cfg.epsilon_for(levels),
            max_error: err / runs as f64,
            push_count: pushes / runs as f64,
        });
    }
    Ok(points)
}
