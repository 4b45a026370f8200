//! Weight sequences `w_i`, tail sums `Y_i = sum_{k >= i} w_k`, and level-count
//! selection for every supported proximity measure.

use serde::{Deserialize, Serialize};

use crate::error::{AgpError, Result};
use crate::propagation::Exponents;

/// A proximity measure and its scalar parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    /// `w_hops = 1`, all other weights zero.
    Transition { hops: usize },
    /// Global PageRank: PPR weights with a uniform signal.
    PageRank { alpha: f64 },
    Ppr { alpha: f64 },
    SingleTargetPpr { alpha: f64 },
    Hkpr { t: f64 },
    /// `w_i = beta^i`. `lambda1` is the largest adjacency eigenvalue, if known.
    Katz { beta: f64, lambda1: Option<f64> },
    Custom { weights: Vec<f64> },
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::Transition { .. } => "transition",
            Measure::PageRank { .. } => "pagerank",
            Measure::Ppr { .. } => "ppr",
            Measure::SingleTargetPpr { .. } => "single_target_ppr",
            Measure::Hkpr { .. } => "hkpr",
            Measure::Katz { .. } => "katz",
            Measure::Custom { .. } => "custom",
        }
    }

    /// Laplacian exponents the measure is defined with.
    pub fn default_exponents(&self) -> Exponents {
        match self {
            Measure::SingleTargetPpr { .. } => Exponents::new(1.0, 0.0),
            Measure::Katz { .. } => Exponents::new(0.0, 0.0),
            _ => Exponents::new(0.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_open_unit = |x: f64| x > 0.0 && x < 1.0;
        match *self {
            Measure::Transition { .. } => Ok(()),
            Measure::PageRank { alpha } | Measure::Ppr { alpha } | Measure::SingleTargetPpr { alpha } => {
                if in_open_unit(alpha) {
                    Ok(())
                } else {
                    Err(AgpError::config(format!("alpha must lie in (0, 1), got {alpha}")))
                }
            }
            Measure::Hkpr { t } => {
                if t > 0.0 && t.is_finite() {
                    Ok(())
                } else {
                    Err(AgpError::config(format!("heat constant t must be positive, got {t}")))
                }
            }
            Measure::Katz { beta, lambda1 } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(AgpError::config(format!("beta must be positive, got {beta}")));
                }
                match lambda1 {
                    Some(l) if !(l > 0.0 && l.is_finite()) => {
                        Err(AgpError::config(format!("lambda1 must be positive, got {l}")))
                    }
                    Some(l) if beta * l >= 1.0 => Err(AgpError::config(format!(
                        "katz series diverges: beta * lambda1 = {} >= 1",
                        beta * l
                    ))),
                    _ => Ok(()),
                }
            }
            Measure::Custom { ref weights } => {
                if weights.is_empty() {
                    return Err(AgpError::config("custom weight list is empty"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(AgpError::config("custom weights must be finite and nonnegative"));
                }
                if weights.iter().all(|&w| w == 0.0) {
                    return Err(AgpError::config("custom weights are all zero"));
                }
                Ok(())
            }
        }
    }

    /// Un-normalized weights `w_0..=w_levels`.
    pub fn raw_weights(&self, levels: usize) -> Vec<f64> {
        match *self {
            Measure::Transition { hops } => (0..=levels).map(|i| if i == hops { 1.0 } else { 0.0 }).collect(),
            Measure::PageRank { alpha } | Measure::Ppr { alpha } | Measure::SingleTargetPpr { alpha } => {
                (0..=levels).map(|i| alpha * (1.0 - alpha).powi(i as i32)).collect()
            }
            Measure::Hkpr { t } => {
                let mut w = Vec::with_capacity(levels + 1);
                let mut cur = (-t).exp();
                for i in 0..=levels {
                    w.push(cur);
                    cur = cur * t / (i + 1) as f64;
                }
                w
            }
            Measure::Katz { beta, .. } => (0..=levels).map(|i| beta.powi(i as i32)).collect(),
            Measure::Custom { ref weights } => {
                (0..=levels).map(|i| weights.get(i).copied().unwrap_or(0.0)).collect()
            }
        }
    }

    /// Closed-form untruncated tail `sum_{k >= i} w_k`, where one exists.
    pub fn raw_tail(&self, i: usize) -> Option<f64> {
        match *self {
            Measure::PageRank { alpha } | Measure::Ppr { alpha } | Measure::SingleTargetPpr { alpha } => {
                Some((1.0 - alpha).powi(i as i32))
            }
            Measure::Katz { beta, .. } if beta < 1.0 => Some(beta.powi(i as i32) / (1.0 - beta)),
            Measure::Transition { hops } => Some(if i <= hops { 1.0 } else { 0.0 }),
            _ => None,
        }
    }
}

/// Truncated, normalized weights for a fixed level count.
///
/// `weights` sum to one; `partials[i] = sum_{k=i}^{L} weights[k]`, so
/// `partials[L] == weights[L]`. `rescale` is the raw truncated sum, and
/// multiplying a normalized result by it recovers `sum_{i<=L} w_i M^i x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    measure: Measure,
    weights: Vec<f64>,
    partials: Vec<f64>,
    rescale: f64,
}

impl WeightScheme {
    /// Computes `w` and `Y` for levels `0..=levels`.
    pub fn new(measure: Measure, levels: usize) -> Result<WeightScheme> {
        measure.validate()?;
        if let Measure::Transition { hops } = measure {
            if hops > levels {
                return Err(AgpError::config(format!(
                    "transition over {hops} hops needs at least {hops} levels, got {levels}"
                )));
            }
        }
        let raw = measure.raw_weights(levels);
        let total = compensated_sum(raw.iter().copied());
        if !(total > 0.0 && total.is_finite()) {
            return Err(AgpError::Numeric(format!(
                "truncated weight sum is {total}; cannot normalize"
            )));
        }
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mut partials = vec![0.0; levels + 1];
        let mut acc = DoubleDouble::default();
        for i in (0..=levels).rev() {
            acc.add(weights[i]);
            partials[i] = acc.value();
        }
        Ok(WeightScheme {
            measure,
            weights,
            partials,
            rescale: total,
        })
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// `L`: the highest level index.
    pub fn levels(&self) -> usize {
        self.weights.len() - 1
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    #[inline]
    pub fn partial(&self, i: usize) -> f64 {
        self.partials[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn partials(&self) -> &[f64] {
        &self.partials
    }

    pub fn rescale(&self) -> f64 {
        self.rescale
    }
}

/// Level count `L` for which the weight tail beyond `L` is at most `delta / 19`.
pub fn select_level_count(measure: &Measure, delta: f64) -> Result<usize> {
    measure.validate()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AgpError::config(format!("delta must lie in (0, 1), got {delta}")));
    }
    let levels = match *measure {
        Measure::Transition { hops } => return Ok(hops),
        Measure::PageRank { alpha } | Measure::Ppr { alpha } | Measure::SingleTargetPpr { alpha } => {
            ((delta / 19.0).ln() / (1.0 - alpha).ln()).ceil()
        }
        Measure::Hkpr { t } => {
            let stirling = 2.0 * std::f64::consts::E * t;
            stirling.max((19.0 / delta).log2()).ceil()
        }
        Measure::Katz { beta, lambda1 } => {
            let Some(lambda1) = lambda1 else {
                return Err(AgpError::config(
                    "katz needs lambda1 (largest adjacency eigenvalue) or an explicit level count",
                ));
            };
            let rho = beta * lambda1;
            (((1.0 - rho) * delta / 19.0).ln() / rho.ln()).ceil()
        }
        Measure::Custom { .. } => {
            return Err(AgpError::config("custom weights need an explicit level count"));
        }
    };
    Ok(levels.max(0.0) as usize)
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = DoubleDouble::default();
    values.for_each(|v| acc.add(v));
    acc.value()
}

/// Running sum kept as an unevaluated `hi + lo` pair.
#[derive(Debug, Clone, Copy, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn add(&mut self, x: f64) {
        let s = self.hi + x;
        let bp = s - self.hi;
        let err = (self.hi - (s - bp)) + (x - bp);
        self.hi = s;
        self.lo += err;
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}
