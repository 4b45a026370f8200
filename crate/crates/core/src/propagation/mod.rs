//! Residue/reserve propagation shared by the exact and randomized engines.
//!
//! At level `i` the residue `r(i) = Y_i M^i x` (with `M = D^-a A D^-b`) is
//! converted into reserve `(w_i / Y_i) r(i)` and pushed one hop further,
//! scaled by `Y_{i+1} / Y_i`. Residues live in dense arrays with explicit
//! worklists so clearing a level costs only its active nodes.

pub mod basic;
pub mod randomized;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{AgpError, Result};
use crate::graph::{Graph, NodeId};
use crate::weights::WeightScheme;

/// Laplacian exponents `a` (on the receiving node) and `b` (on the sender).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub a: f64,
    pub b: f64,
}

impl Exponents {
    pub const fn new(a: f64, b: f64) -> Exponents {
        Exponents { a, b }
    }

    /// Symmetric normalization used by SGC, APPNP and GDC.
    pub const GNN: Exponents = Exponents::new(0.5, 0.5);

    pub fn validate(&self) -> Result<()> {
        for (name, e) in [("a", self.a), ("b", self.b)] {
            if !(e.is_finite() && e >= 0.0) {
                return Err(AgpError::config(format!("exponent {name} must be finite and >= 0, got {e}")));
            }
        }
        Ok(())
    }
}

/// `d^-e`, with `0^-e = 0` for `e > 0` (pseudo-inverse of a zero degree).
#[derive(Debug, Clone, Copy)]
pub(crate) enum InversePower {
    Zero,
    Half,
    One,
    General(f64),
}

impl InversePower {
    pub(crate) fn new(e: f64) -> InversePower {
        if e == 0.0 {
            InversePower::Zero
        } else if e == 0.5 {
            InversePower::Half
        } else if e == 1.0 {
            InversePower::One
        } else {
            InversePower::General(e)
        }
    }

    #[inline]
    pub(crate) fn of(self, d: u32) -> f64 {
        match self {
            InversePower::Zero => 1.0,
            _ if d == 0 => 0.0,
            InversePower::Half => 1.0 / (d as f64).sqrt(),
            InversePower::One => 1.0 / d as f64,
            InversePower::General(e) => (d as f64).powf(-e),
        }
    }
}

/// A nonnegative graph signal as `(node, value)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseSignal {
    entries: Vec<(NodeId, f64)>,
}

impl SparseSignal {
    pub fn new(entries: Vec<(NodeId, f64)>) -> SparseSignal {
        SparseSignal { entries }
    }

    pub fn one_hot(node: NodeId) -> SparseSignal {
        SparseSignal::new(vec![(node, 1.0)])
    }

    /// Keeps the nonzero entries of a dense vector.
    pub fn from_dense(values: &[f64]) -> SparseSignal {
        SparseSignal::new(
            values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i as NodeId, *v))
                .collect(),
        )
    }

    /// `1/n` on every node.
    pub fn uniform(n: usize) -> SparseSignal {
        SparseSignal::new((0..n as NodeId).map(|u| (u, 1.0 / n as f64)).collect())
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v.abs()).sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(u, v) in &self.entries {
            out[u as usize] += v;
        }
        out
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        for &(u, v) in &self.entries {
            if u as usize >= n {
                return Err(AgpError::Shape(format!("signal entry {u} outside 0..{n}")));
            }
            if !v.is_finite() {
                return Err(AgpError::Numeric(format!("signal entry {u} is {v}")));
            }
            if v < 0.0 {
                return Err(AgpError::Numeric(format!(
                    "signal entry {u} is negative ({v}); split signed signals first"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Basic,
    Randomized,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Basic => "basic",
            Engine::Randomized => "randomized",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub engine: Engine,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub levels: usize,
    pub seed: Option<u64>,
    /// Deterministic pushes, sampled increments and sampled degree groups.
    pub push_count: u64,
    /// Residue that reached nodes with nowhere to push (dangling or isolated).
    pub dropped_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    /// Dense estimate, already multiplied by the scheme's rescale factor.
    pub values: Vec<f64>,
    /// `||r(i)||_1` per processed level, in normalized units.
    pub level_mass: Vec<f64>,
    pub provenance: Provenance,
}

/// Residues, worklists and the reserve accumulator for one invocation.
#[derive(Debug)]
pub(crate) struct PropagationState {
    pub residue_cur: Vec<f64>,
    pub residue_next: Vec<f64>,
    pub active_cur: Vec<NodeId>,
    pub active_next: Vec<NodeId>,
    pub reserve: Vec<f64>,
    pub push_count: u64,
    pub dropped_mass: f64,
    pub level_mass: Vec<f64>,
}

impl PropagationState {
    pub(crate) fn new(n: usize, x: &SparseSignal) -> PropagationState {
        let mut state = PropagationState {
            residue_cur: vec![0.0; n],
            residue_next: vec![0.0; n],
            active_cur: Vec::new(),
            active_next: Vec::new(),
            reserve: vec![0.0; n],
            push_count: 0,
            dropped_mass: 0.0,
            level_mass: Vec::new(),
        };
        for &(u, v) in x.entries() {
            if v == 0.0 {
                continue;
            }
            if state.residue_cur[u as usize] == 0.0 {
                state.active_cur.push(u);
            }
            state.residue_cur[u as usize] += v;
        }
        state
    }

    /// Adds `mass` to `v`'s next-level residue.
    #[inline]
    pub(crate) fn deposit(&mut self, v: NodeId, mass: f64) {
        if mass == 0.0 {
            return;
        }
        let slot = &mut self.residue_next[v as usize];
        if *slot == 0.0 {
            self.active_next.push(v);
        }
        *slot += mass;
    }

    /// Deterministic push of `base * d_v^-a` to every entry of `range`.
    #[inline]
    pub(crate) fn push_all(&mut self, g: &Graph, range: Range<usize>, base: f64, inv_a: InversePower) {
        let neighbors = &g.neighbor_array()[range];
        self.push_count += neighbors.len() as u64;
        for &v in neighbors {
            self.deposit(v, base * inv_a.of(g.degree(v)));
        }
    }

    pub(crate) fn record_level_mass(&mut self) {
        let mass = self.active_cur.iter().map(|&u| self.residue_cur[u as usize]).sum();
        self.level_mass.push(mass);
    }

    /// Clears the current level and promotes the next one.
    pub(crate) fn advance(&mut self) {
        for &u in &self.active_cur {
            self.residue_cur[u as usize] = 0.0;
        }
        self.active_cur.clear();
        std::mem::swap(&mut self.residue_cur, &mut self.residue_next);
        std::mem::swap(&mut self.active_cur, &mut self.active_next);
    }

    /// Converts the residue left at the last level into reserve.
    pub(crate) fn finish(&mut self, scheme: &WeightScheme, level: usize) {
        if level != scheme.levels() || scheme.partial(level) == 0.0 {
            return;
        }
        self.record_level_mass();
        let keep = scheme.weight(level) / scheme.partial(level);
        for &u in &self.active_cur {
            self.reserve[u as usize] += keep * self.residue_cur[u as usize];
        }
    }

    pub(crate) fn into_values(self, rescale: f64) -> (Vec<f64>, Vec<f64>, u64, f64) {
        let mut values = self.reserve;
        if rescale != 1.0 {
            values.iter_mut().for_each(|v| *v *= rescale);
        }
        (values, self.level_mass, self.push_count, self.dropped_mass * rescale)
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(AgpError::Numeric(format!("estimate at node {i} is {}", values[i]))),
        None => Ok(()),
    }
}
