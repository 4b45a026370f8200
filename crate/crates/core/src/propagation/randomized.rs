//! Randomized propagation: deterministic pushes where the pushed mass reaches
//! `epsilon`, subset-sampled `epsilon` increments everywhere else.

use serde::{Deserialize, Serialize};

use crate::error::{AgpError, Result};
use crate::graph::Graph;
use crate::sampling::{sample_uniform, subset_sample_with, RandomStreams};
use crate::weights::WeightScheme;

use super::{check_finite, Engine, Exponents, InversePower, PropagationResult, PropagationState, Provenance, SparseSignal};

/// Accuracy target and randomness for [`randomized_propagate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedConfig {
    /// Relative-error threshold.
    pub delta: f64,
    /// Per-push threshold. Derived from `delta` and `L` when absent.
    pub epsilon: Option<f64>,
    pub seed: u64,
}

impl RandomizedConfig {
    pub fn new(delta: f64, seed: u64) -> RandomizedConfig {
        RandomizedConfig { delta, epsilon: None, seed }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> RandomizedConfig {
        self.epsilon = Some(epsilon);
        self
    }

    /// `epsilon = delta / (50 L (L + 1))` unless set explicitly.
    pub fn epsilon_for(&self, levels: usize) -> f64 {
        match self.epsilon {
            Some(eps) => eps,
            None => {
                let l = levels.max(1) as f64;
                self.delta / (50.0 * l * (l + 1.0))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.epsilon {
            Some(eps) if !(eps.is_finite() && eps >= 0.0) => {
                Err(AgpError::config(format!("epsilon must be finite and >= 0, got {eps}")))
            }
            Some(_) if !(self.delta.is_finite() && self.delta >= 0.0) => {
                Err(AgpError::config(format!("delta must be finite and >= 0, got {}", self.delta)))
            }
            None if !(self.delta > 0.0 && self.delta < 1.0) => {
                Err(AgpError::config(format!("delta must lie in (0, 1), got {}", self.delta)))
            }
            _ => Ok(()),
        }
    }
}

/// Unbiased estimate of `sum_{i<=L} w_i (D^-a A D^-b)^i x`.
///
/// `x` must be nonnegative with `||x||_1 <= 1`.
pub fn randomized_propagate(
    g: &Graph,
    scheme: &WeightScheme,
    exps: Exponents,
    x: &SparseSignal,
    cfg: &RandomizedConfig,
) -> Result<PropagationResult> {
    randomized_propagate_with(g, scheme, exps, x, cfg, &RandomStreams::new(cfg.seed))
}

/// As [`randomized_propagate`], drawing from caller-supplied streams.
pub fn randomized_propagate_with(
    g: &Graph,
    scheme: &WeightScheme,
    exps: Exponents,
    x: &SparseSignal,
    cfg: &RandomizedConfig,
    streams: &RandomStreams,
) -> Result<PropagationResult> {
    cfg.validate()?;
    exps.validate()?;
    x.validate(g.n())?;
    let norm = x.l1_norm();
    if norm > 1.0 + 1e-9 {
        return Err(AgpError::Numeric(format!(
            "signal has l1 norm {norm}; normalize it to at most 1 first"
        )));
    }
    let levels = scheme.levels();
    let eps = cfg.epsilon_for(levels);
    let inv_a = InversePower::new(exps.a);
    let inv_b = InversePower::new(exps.b);
    let root = if exps.a > 0.0 { 1.0 / exps.a } else { 0.0 };
    let mut state = PropagationState::new(g.n(), x);
    let mut sampled = Vec::new();

    let mut level = 0;
    while level < levels && !state.active_cur.is_empty() {
        let tail = scheme.partial(level);
        if tail == 0.0 {
            break;
        }
        state.record_level_mass();
        let ratio = scheme.partial(level + 1) / tail;
        let keep = scheme.weight(level) / tail;
        for idx in 0..state.active_cur.len() {
            let u = state.active_cur[idx];
            let r = state.residue_cur[u as usize];
            state.reserve[u as usize] += keep * r;
            if ratio == 0.0 {
                continue;
            }
            let range = g.push_range(u);
            // Mass pushed to a neighbour before its own d_v^-a factor.
            let base = ratio * r * inv_b.of(g.degree(u));
            if range.is_empty() || base == 0.0 {
                state.dropped_mass += ratio * r;
                continue;
            }
            if eps == 0.0 {
                state.push_all(g, range, base, inv_a);
                continue;
            }
            let base_prob = base / eps;
            sampled.clear();
            if exps.a == 0.0 {
                if base_prob >= 1.0 {
                    state.push_all(g, range, base, inv_a);
                    continue;
                }
                let mut rng = streams.stream(level as u32, u);
                sample_uniform(g, range, base_prob, &mut rng, &mut sampled);
                state.push_count += 1;
            } else {
                // d_v <= (base / eps)^(1/a)  <=>  base * d_v^-a >= eps
                let prefix = g.neighbor_prefix_below(u, base_prob.powf(root));
                let rest = prefix.end;
                if !prefix.is_empty() {
                    state.push_all(g, prefix, base, inv_a);
                }
                if rest == range.end {
                    continue;
                }
                let mut rng = streams.stream(level as u32, u);
                let cost = subset_sample_with(g, u, rest, base_prob, inv_a, &mut rng, &mut sampled);
                state.push_count += cost.groups as u64;
            }
            state.push_count += sampled.len() as u64;
            for &v in &sampled {
                state.deposit(v, eps);
            }
        }
        state.advance();
        level += 1;
        if ratio == 0.0 {
            break;
        }
    }
    state.finish(scheme, level);

    let (values, level_mass, push_count, dropped_mass) = state.into_values(scheme.rescale());
    check_finite(&values)?;
    Ok(PropagationResult {
        values,
        level_mass,
        provenance: Provenance {
            engine: Engine::Randomized,
            epsilon: eps,
            delta: Some(cfg.delta),
            levels,
            seed: Some(cfg.seed),
            push_count,
            dropped_mass,
        },
    })
}
