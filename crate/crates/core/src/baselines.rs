//! Comparison policies: a primal-dual bang-per-buck rule, a sliding-window
//! variant of the optimistic primal-dual policy, and a budget-blind greedy rule.
//!
//! The first two are reconstructions with their free parameters exposed: the
//! multiplicative-weights step, the denominator floor, and the window length.

use crate::confidence::{ArmStatistics, ConfidenceParams};
use crate::error::{invalid, Error, Result};
use crate::model::{Policy, ProblemShape, RoundContext, RoundFeedback};
use crate::oaucb::{argmax_lowest, OaUcb, OaUcbConfig, PredictionSource};

fn confidence_for(shape: &ProblemShape, delta: Option<f64>) -> Result<ConfidenceParams<f64>> {
    match delta {
        Some(delta) => ConfidenceParams::new(delta),
        None => Ok(ConfidenceParams::for_horizon(shape.horizon)),
    }
}

fn check_shape(shape: &ProblemShape) -> Result<()> {
    if shape.null_index >= shape.num_actions {
        return Err(Error::NoNullAction);
    }
    if shape.num_resources == 0 {
        return Err(invalid("need at least one resource"));
    }
    Ok(())
}

/// Records a non-null per-unit sample.
fn record(stats: &mut ArmStatistics<f64>, action: usize, feedback: &RoundFeedback) {
    if action != stats.null_index() {
        stats.record(
            action,
            feedback.outcome.per_unit_reward,
            &feedback.outcome.per_unit_cost,
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdbConfig {
    /// Confidence parameter; `None` means `1/T`.
    pub delta: Option<f64>,
    /// Multiplicative-weights step; `None` means `sqrt(ln(d+1)/B)` clamped to `[1e-6, 0.5]`.
    pub epsilon: Option<f64>,
    /// Replaces smaller cost denominators.
    pub cost_floor: f64,
}

impl Default for PdbConfig {
    fn default() -> Self {
        Self {
            delta: None,
            epsilon: None,
            cost_floor: 1e-9,
        }
    }
}

/// Default multiplicative-weights step for `d` resources and budget `B`.
pub fn default_pdb_epsilon(num_resources: usize, budget: f64) -> f64 {
    ((num_resources as f64 + 1.0).ln() / budget)
        .sqrt()
        .clamp(1e-6, 0.5)
}

/// Primal-dual bang-per-buck: after one pull of every real action, plays
/// `argmax UCB_r(a) / max(ŵᵀLCB_c(a), floor)` where the resource weights
/// `w_i ∝ (1+ε)^{Σ_t LCB_c(A_t, i)}` grow with pessimistic consumption.
#[derive(Debug, Clone)]
pub struct PrimalDualBwk {
    shape: ProblemShape,
    config: PdbConfig,
    params: ConfidenceParams<f64>,
    stats: ArmStatistics<f64>,
    /// `ln w_i`.
    log_weights: Vec<f64>,
    epsilon: Option<f64>,
}

impl PrimalDualBwk {
    pub fn new(shape: ProblemShape, config: PdbConfig) -> Result<Self> {
        check_shape(&shape)?;
        if let Some(eps) = config.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(invalid(format!(
                    "multiplicative-weights step must be in (0,1), got {eps}"
                )));
            }
        }
        if !(config.cost_floor > 0.0) {
            return Err(invalid("cost floor must be > 0"));
        }
        Ok(Self {
            params: confidence_for(&shape, config.delta)?,
            stats: ArmStatistics::new(shape.num_actions, shape.num_resources, shape.null_index),
            log_weights: vec![0.0; shape.num_resources],
            epsilon: config.epsilon,
            shape,
            config,
        })
    }

    /// Normalized resource weights.
    pub fn weights(&self) -> Vec<f64> {
        let top = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = self.log_weights.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    pub fn stats(&self) -> &ArmStatistics<f64> {
        &self.stats
    }
}

impl Policy for PrimalDualBwk {
    fn name(&self) -> String {
        "pdb".into()
    }

    fn reset(&mut self) {
        *self = Self::new(self.shape, self.config.clone()).expect("configuration was validated");
    }

    fn select(&mut self, ctx: &RoundContext) -> usize {
        if self.epsilon.is_none() {
            self.epsilon = Some(default_pdb_epsilon(self.shape.num_resources, ctx.budget));
        }
        let null = self.shape.null_index;
        if let Some(a) =
            (0..self.shape.num_actions).find(|&a| a != null && self.stats.count(a) == 0)
        {
            return a;
        }
        let w = self.weights();
        let scores: Vec<f64> = (0..self.shape.num_actions)
            .map(|a| {
                if a == null {
                    return 0.0;
                }
                let cost: f64 = self
                    .stats
                    .lcb_costs(a, &self.params)
                    .iter()
                    .zip(&w)
                    .map(|(c, w)| c * w)
                    .sum();
                self.stats.ucb_reward(a, &self.params) / cost.max(self.config.cost_floor)
            })
            .collect();
        argmax_lowest(&scores)
    }

    fn observe(&mut self, _ctx: &RoundContext, action: usize, feedback: &RoundFeedback) {
        let step = self.epsilon.unwrap_or(0.5).ln_1p();
        let lcb = self.stats.lcb_costs(action, &self.params);
        for (lw, c) in self.log_weights.iter_mut().zip(&lcb) {
            *lw += step * c;
        }
        record(&mut self.stats, action, feedback);
    }

    fn dual_weights(&self) -> Option<Vec<f64>> {
        Some(self.weights())
    }
}

/// Default sliding-window length `4⌈√T⌉`.
pub fn default_window(horizon: usize) -> usize {
    4 * (horizon as f64).sqrt().ceil() as usize
}

/// The optimistic primal-dual policy restricted to the last `window` rounds
/// of statistics, with `Q̂` replaced by the running mean of demand times `T`.
pub fn sliding_window_ucb(
    shape: ProblemShape,
    window: Option<usize>,
    delta: Option<f64>,
) -> Result<OaUcb> {
    let config = OaUcbConfig {
        delta,
        window: Some(window.unwrap_or_else(|| default_window(shape.horizon))),
        prediction: PredictionSource::RunningMean,
        ..OaUcbConfig::default()
    };
    Ok(OaUcb::new(shape, config)?.with_label("sw-ucb"))
}

/// Plays `argmax UCB_r`, ignoring consumption.
#[derive(Debug, Clone)]
pub struct GreedyUcb {
    shape: ProblemShape,
    delta: Option<f64>,
    params: ConfidenceParams<f64>,
    stats: ArmStatistics<f64>,
}

impl GreedyUcb {
    pub fn new(shape: ProblemShape, delta: Option<f64>) -> Result<Self> {
        check_shape(&shape)?;
        Ok(Self {
            params: confidence_for(&shape, delta)?,
            stats: ArmStatistics::new(shape.num_actions, shape.num_resources, shape.null_index),
            shape,
            delta,
        })
    }
}

impl Policy for GreedyUcb {
    fn name(&self) -> String {
        "greedy-ucb".into()
    }

    fn reset(&mut self) {
        *self = Self::new(self.shape, self.delta).expect("configuration was validated");
    }

    fn select(&mut self, _ctx: &RoundContext) -> usize {
        let ucb: Vec<f64> = (0..self.shape.num_actions)
            .map(|a| self.stats.ucb_reward(a, &self.params))
            .collect();
        argmax_lowest(&ucb)
    }

    fn observe(&mut self, _ctx: &RoundContext, action: usize, feedback: &RoundFeedback) {
        record(&mut self.stats, action, feedback);
    }
}
