//! The optimistic primal-dual policy driven by total-demand predictions.
//!
//! Each round scores every action by its composite reward
//! `UCB_r(a) − (Q̂/B)·μᵀ LCB_c(a)`, plays the best one, and feeds the dual
//! weights `μ` (over the `d` resources plus a null resource) the linear loss
//! `g = q·β − (q·Q̂/B)·LCB_c(A_t)` through AdaHedge, where `β = (1,…,1,0)`.

use std::collections::VecDeque;

use crate::confidence::{ArmStatistics, ConfidenceParams};
use crate::error::{invalid, Result};
use crate::hedge::AdaHedge;
use crate::model::{Policy, ProblemShape, RoundContext, RoundFeedback};
use crate::scalar::Real;

/// Composite reward of every action.
///
/// `lcb[a]` holds the `d` real-resource LCBs of action `a`; only the first
/// `d` dual weights take part (the null resource has LCB 0).
pub fn composite_scores<T: Real>(ucb: &[T], lcb: &[Vec<T>], mu: &[T], ratio: T) -> Vec<T> {
    ucb.iter()
        .zip(lcb)
        .map(|(&u, l)| {
            u - ratio
                * l.iter()
                    .zip(mu)
                    .fold(T::zero(), |acc, (&c, &w)| acc + c * w)
        })
        .collect()
}

/// Index of the largest score, lowest index on ties.
pub fn argmax_lowest<T: PartialOrd + Copy>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// `q·β − (q·Q̂/B)·(lcb, 0)`, a vector of length `d + 1`.
pub fn dual_gradient<T: Real>(demand: T, prediction: T, budget: T, lcb: &[T]) -> Vec<T> {
    let scale = demand * prediction / budget;
    lcb.iter()
        .map(|&c| demand - scale * c)
        .chain(std::iter::once(T::zero()))
        .collect()
}

/// Where the policy's `Q̂_t` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PredictionSource {
    /// The oracle prediction handed over in the round context.
    #[default]
    Oracle,
    /// The running mean of observed demand times `T`, ignoring the oracle.
    RunningMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OaUcbConfig {
    /// Confidence parameter; `None` means `1/T`.
    pub delta: Option<f64>,
    /// Lower bound on `Q̂` used before dividing; the effective floor is the
    /// larger of this and the largest demand observed so far.
    pub prediction_floor: f64,
    /// Restrict statistics to the last `W` rounds.
    pub window: Option<usize>,
    pub prediction: PredictionSource,
}

impl Default for OaUcbConfig {
    fn default() -> Self {
        Self {
            delta: None,
            prediction_floor: 1e-9,
            window: None,
            prediction: PredictionSource::Oracle,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Pending {
    action: usize,
    prediction: f64,
    lcb: Vec<f64>,
}

/// Per-round sample kept for sliding-window forgetting.
type WindowEntry = Option<(usize, f64, Vec<f64>)>;

#[derive(Debug, Clone)]
pub struct OaUcb {
    shape: ProblemShape,
    config: OaUcbConfig,
    params: ConfidenceParams<f64>,
    stats: ArmStatistics<f64>,
    hedge: AdaHedge<f64>,
    window: VecDeque<WindowEntry>,
    largest_demand: f64,
    demand_sum: f64,
    demand_rounds: usize,
    pending: Option<Pending>,
    label: String,
}

impl OaUcb {
    pub fn new(shape: ProblemShape, config: OaUcbConfig) -> Result<Self> {
        if shape.null_index >= shape.num_actions {
            return Err(crate::error::Error::NoNullAction);
        }
        if shape.num_resources == 0 {
            return Err(invalid("need at least one resource"));
        }
        if config.window == Some(0) {
            return Err(invalid("window must be >= 1"));
        }
        if !(config.prediction_floor > 0.0) {
            return Err(invalid("prediction floor must be > 0"));
        }
        let params = match config.delta {
            Some(delta) => ConfidenceParams::new(delta)?,
            None => ConfidenceParams::for_horizon(shape.horizon),
        };
        let label = if config.window.is_some() {
            "sw-ucb"
        } else {
            "oa-ucb"
        }
        .to_string();
        Ok(Self {
            stats: ArmStatistics::new(shape.num_actions, shape.num_resources, shape.null_index),
            hedge: AdaHedge::new(shape.num_resources + 1)?,
            shape,
            config,
            params,
            window: VecDeque::new(),
            largest_demand: 0.0,
            demand_sum: 0.0,
            demand_rounds: 0,
            pending: None,
            label,
        })
    }

    /// Renames the policy in logs and tables.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn config(&self) -> &OaUcbConfig {
        &self.config
    }

    pub fn stats(&self) -> &ArmStatistics<f64> {
        &self.stats
    }

    pub fn hedge(&self) -> &AdaHedge<f64> {
        &self.hedge
    }

    pub fn confidence(&self) -> &ConfidenceParams<f64> {
        &self.params
    }

    /// `Q̂` after applying the prediction source and the positivity floor.
    pub fn effective_prediction(&self, ctx: &RoundContext) -> f64 {
        let raw = match self.config.prediction {
            PredictionSource::Oracle => ctx.prediction,
            PredictionSource::RunningMean if self.demand_rounds > 0 => {
                self.demand_sum / self.demand_rounds as f64 * ctx.horizon as f64
            }
            PredictionSource::RunningMean => 0.0,
        };
        let floor = self.config.prediction_floor.max(self.largest_demand);
        if raw.is_nan() {
            floor
        } else {
            raw.max(floor)
        }
    }

    /// Composite rewards for the current statistics and weights.
    pub fn scores(&self, prediction: f64, budget: f64) -> Vec<f64> {
        let (ucb, lcb) = self.bounds();
        composite_scores(&ucb, &lcb, self.hedge.weights(), prediction / budget)
    }

    fn bounds(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k = self.shape.num_actions;
        let ucb = (0..k)
            .map(|a| self.stats.ucb_reward(a, &self.params))
            .collect();
        let lcb = (0..k)
            .map(|a| self.stats.lcb_costs(a, &self.params))
            .collect();
        (ucb, lcb)
    }
}

impl Policy for OaUcb {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn reset(&mut self) {
        let label = std::mem::take(&mut self.label);
        *self = Self::new(self.shape, self.config.clone())
            .expect("configuration was validated")
            .with_label(label);
    }

    fn select(&mut self, ctx: &RoundContext) -> usize {
        let prediction = self.effective_prediction(ctx);
        let action = argmax_lowest(&self.scores(prediction, ctx.budget));
        let lcb = self.stats.lcb_costs(action, &self.params);
        self.pending = Some(Pending {
            action,
            prediction,
            lcb,
        });
        action
    }

    fn observe(&mut self, ctx: &RoundContext, action: usize, feedback: &RoundFeedback) {
        let pending = match self.pending.take() {
            Some(p) if p.action == action => p,
            _ => Pending {
                action,
                prediction: self.effective_prediction(ctx),
                lcb: self.stats.lcb_costs(action, &self.params),
            },
        };
        let q = feedback.demand;
        let g = dual_gradient(q, pending.prediction, ctx.budget, &pending.lcb);
        self.hedge
            .step(&g)
            .expect("gradient is finite for finite feedback");

        let outcome = &feedback.outcome;
        let sample = (action != self.shape.null_index).then(|| {
            (
                action,
                outcome.per_unit_reward,
                outcome.per_unit_cost.clone(),
            )
        });
        if let Some((a, r, c)) = &sample {
            self.stats.record(*a, *r, c);
        }
        if let Some(w) = self.config.window {
            self.window.push_back(sample);
            while self.window.len() > w {
                if let Some(Some((a, r, c))) = self.window.pop_front() {
                    self.stats.forget(a, r, &c);
                }
            }
        }
        self.largest_demand = self.largest_demand.max(q);
        self.demand_sum += q;
        self.demand_rounds += 1;
    }

    fn dual_weights(&self) -> Option<Vec<f64>> {
        Some(self.hedge.weights().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Outcome;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn shape(k: usize, d: usize, horizon: usize) -> ProblemShape {
        ProblemShape {
            num_actions: k,
            num_resources: d,
            null_index: k - 1,
            horizon,
        }
    }

    fn ctx(t: usize, prediction: f64, budget: f64) -> RoundContext {
        RoundContext {
            t,
            horizon: 100,
            prediction,
            budget,
        }
    }

    fn feedback(t: usize, q: f64, r: f64, c: Vec<f64>) -> RoundFeedback {
        RoundFeedback {
            t,
            demand: q,
            prediction: 0.0,
            outcome: Outcome::scaled(r, c, q),
        }
    }

    #[test]
    fn fresh_state_picks_first_real_action() {
        let mut p = OaUcb::new(shape(4, 2, 100), OaUcbConfig::default()).unwrap();
        assert_eq!(p.select(&ctx(1, 500.0, 50.0)), 0);
    }

    #[test]
    fn hand_scored_example() {
        let ucb = [0.9, 0.8, 0.0];
        let lcb = [vec![0.9], vec![0.4], vec![0.0]];
        let scores = composite_scores(&ucb, &lcb, &[0.5, 0.5], 2.0);
        assert_abs_diff_eq!(scores[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(scores[1], 0.4, epsilon = 1e-15);
        assert_eq!(scores[2], 0.0);
        assert_eq!(argmax_lowest(&scores), 1);
    }

    #[test]
    fn vanishing_ratio_is_greedy() {
        let ucb = [0.5, 0.9, 0.0];
        let lcb = [vec![0.0], vec![1.0], vec![0.0]];
        assert_eq!(
            argmax_lowest(&composite_scores(&ucb, &lcb, &[1.0, 0.0], 1e-12)),
            1
        );
        assert_eq!(
            argmax_lowest(&composite_scores(&ucb, &lcb, &[1.0, 0.0], 10.0)),
            0
        );
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(argmax_lowest(&[0.3, 0.7, 0.7, 0.1]), 1);
        assert_eq!(argmax_lowest(&[0.0, 0.0]), 0);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(
            dual_gradient(2.0, 100.0, 50.0, &[0.4]),
            vec![2.0 - 4.0 * 0.4, 0.0]
        );
        assert_abs_diff_eq!(
            dual_gradient(2.0, 100.0, 50.0, &[0.4])[0],
            0.4,
            epsilon = 1e-15
        );
        assert_eq!(
            dual_gradient(3.0, 100.0, 50.0, &[0.0, 0.0]),
            vec![3.0, 3.0, 0.0]
        );
        assert_eq!(dual_gradient(0.0, 100.0, 50.0, &[0.7]), vec![0.0, 0.0]);
    }

    #[test]
    fn zero_demand_leaves_weights_unchanged() {
        let mut p = OaUcb::new(shape(2, 1, 100), OaUcbConfig::default()).unwrap();
        let c = ctx(1, 10.0, 5.0);
        let a = p.select(&c);
        p.observe(&c, a, &feedback(1, 0.0, 0.5, vec![0.5]));
        assert_eq!(p.hedge().weights(), &[0.5, 0.5]);
    }

    #[test]
    fn gradient_uses_pre_update_lcb() {
        // The first pull of an arm has LCB 0, so the gradient is q·β even
        // though the recorded sample has a large cost.
        let mut p = OaUcb::new(shape(2, 1, 100), OaUcbConfig::default()).unwrap();
        let c = ctx(1, 10.0, 5.0);
        let a = p.select(&c);
        assert_eq!(a, 0);
        p.observe(&c, a, &feedback(1, 1.0, 1.0, vec![1.0]));
        // g = (1, 0): ρ = 0.5, μ = (0.2, 0.8).
        assert_abs_diff_eq!(p.hedge().weights()[0], 0.2, epsilon = 1e-12);
        assert_eq!(p.stats().count(0), 1);
    }

    #[test]
    fn prediction_floor() {
        let mut p = OaUcb::new(shape(2, 1, 100), OaUcbConfig::default()).unwrap();
        assert_eq!(p.effective_prediction(&ctx(1, -5.0, 1.0)), 1e-9);
        let c = ctx(1, 10.0, 5.0);
        let a = p.select(&c);
        p.observe(&c, a, &feedback(1, 7.0, 0.5, vec![0.5]));
        assert_eq!(p.effective_prediction(&ctx(2, 3.0, 1.0)), 7.0);
        assert_eq!(p.effective_prediction(&ctx(2, 30.0, 1.0)), 30.0);
    }

    #[test]
    fn running_mean_source() {
        let config = OaUcbConfig {
            prediction: PredictionSource::RunningMean,
            ..Default::default()
        };
        let mut p = OaUcb::new(shape(2, 1, 100), config).unwrap();
        for (t, q) in [(1, 2.0), (2, 4.0)] {
            let c = ctx(t, 1e6, 5.0);
            let a = p.select(&c);
            p.observe(&c, a, &feedback(t, q, 0.5, vec![0.5]));
        }
        assert_eq!(p.effective_prediction(&ctx(3, 1e6, 5.0)), 300.0);
    }

    #[test]
    fn window_of_one_keeps_last_round() {
        let config = OaUcbConfig {
            window: Some(1),
            ..Default::default()
        };
        let mut p = OaUcb::new(shape(3, 1, 100), config).unwrap();
        let mut t = 0;
        let mut play = |p: &mut OaUcb, r: f64| {
            t += 1;
            let c = ctx(t, 10.0, 5.0);
            let a = p.select(&c);
            p.observe(&c, a, &feedback(t, 1.0, r, vec![0.3]));
            a
        };
        play(&mut p, 0.2);
        let second = play(&mut p, 0.6);
        assert_eq!((0..3).map(|a| p.stats().count(a)).sum::<u64>(), 1);
        assert_eq!(p.stats().count(second), 1);
        assert_abs_diff_eq!(p.stats().mean_reward(second), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn reset_restores_fresh_state() {
        let mut p = OaUcb::new(shape(3, 1, 100), OaUcbConfig::default())
            .unwrap()
            .with_label("x");
        let c = ctx(1, 10.0, 5.0);
        let a = p.select(&c);
        p.observe(&c, a, &feedback(1, 1.0, 0.5, vec![0.5]));
        p.reset();
        assert_eq!(p.stats().count(a), 0);
        assert_eq!(p.hedge().steps(), 0);
        assert_eq!(p.name(), "x");
    }

    fn arb_instance() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, f64, Vec<f64>)> {
        (2usize..6, 1usize..4).prop_flat_map(|(k, d)| {
            (
                prop::collection::vec(0.0f64..=1.0, k),
                prop::collection::vec(prop::collection::vec(0.0f64..=1.0, d), k),
                prop::collection::vec(0.0f64..1.0, d + 1),
                0.0f64..20.0,
                prop::collection::vec(0.0f64..1.0, k),
            )
        })
    }

    proptest! {
        #[test]
        fn selected_action_beats_every_mixture((ucb, lcb, raw_mu, ratio, raw_u) in arb_instance()) {
            let norm = |v: &[f64]| { let s: f64 = v.iter().sum::<f64>() + 1e-12; v.iter().map(|x| x / s).collect::<Vec<_>>() };
            let mu = norm(&raw_mu);
            let u = norm(&raw_u);
            let scores = composite_scores(&ucb, &lcb, &mu, ratio);
            let best = scores[argmax_lowest(&scores)];
            let mixed: f64 = scores.iter().zip(&u).map(|(s, w)| s * w).sum();
            prop_assert!(best >= mixed - 1e-12);
        }

        #[test]
        fn scaling_prediction_and_budget_keeps_action(seed in any::<u64>(), scale in 0.01f64..100.0) {
            use rand::Rng;
            let mut rng = crate::rng::stream(seed, &[]);
            let run = |s: f64, rng_seed: u64| {
                let mut rng = crate::rng::stream(rng_seed, &[]);
                let mut p = OaUcb::new(shape(4, 2, 100), OaUcbConfig::default()).unwrap();
                let mut actions = Vec::new();
                for t in 1..=30 {
                    let c = ctx(t, 40.0 * s, 20.0 * s);
                    let a = p.select(&c);
                    let r: f64 = rng.random();
                    let costs = vec![rng.random(), rng.random()];
                    p.observe(&c, a, &feedback(t, 1.0, r, costs));
                    actions.push(a);
                }
                actions
            };
            let s = rng.random::<u64>();
            prop_assert_eq!(run(1.0, s), run(scale, s));
        }
    }
}
