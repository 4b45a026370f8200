//! Exact level-by-level propagation: every residue is pushed to every entry
//! of its push list. Used as ground truth and as the `epsilon = 0` reference.

use crate::error::Result;
use crate::graph::Graph;
use crate::weights::WeightScheme;

use super::{check_finite, Engine, Exponents, InversePower, PropagationResult, PropagationState, Provenance, SparseSignal};

/// Computes `sum_{i<=L} w_i (D^-a A D^-b)^i x` with `L = scheme.levels()`.
pub fn basic_propagate(
    g: &Graph,
    scheme: &WeightScheme,
    exps: Exponents,
    x: &SparseSignal,
) -> Result<PropagationResult> {
    exps.validate()?;
    x.validate(g.n())?;
    let inv_a = InversePower::new(exps.a);
    let inv_b = InversePower::new(exps.b);
    let mut state = PropagationState::new(g.n(), x);
    let levels = scheme.levels();

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
            let base = ratio * r * inv_b.of(g.degree(u));
            if range.is_empty() || base == 0.0 {
                state.dropped_mass += ratio * r;
                continue;
            }
            state.push_all(g, range, base, inv_a);
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
            engine: Engine::Basic,
            epsilon: 0.0,
            delta: None,
            levels,
            seed: None,
            push_count,
            dropped_mass,
        },
    })
}
