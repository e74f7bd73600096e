//! Domain types and the round-by-round simulation loop.
//!
//! Each round first asks the oracle for a prediction `Q̂_t` of the total
//! demand, then asks the policy for an action, then reveals the demand `q_t`
//! and the per-unit outcome. The first round whose cumulative consumption
//! exceeds the budget on any resource is the stopping time `τ`: it is still
//! observed by the policy, but its reward is not counted and the null action
//! is forced for every later round.

use serde::{Deserialize, Serialize};

use crate::demand::{DemandModel, OutcomeSampler};
use crate::error::{config, Error, Result};
use crate::oracles::PredictionOracle;
use crate::rng::{self, StreamRng};

/// Per-unit outcome distribution of the generic environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OutcomeNoise {
    /// Outcomes equal their means.
    Deterministic,
    /// Independent Gaussians truncated to `[0,1]`, calibrated to the means.
    TruncatedGaussian { sigma: f64 },
}

impl Default for OutcomeNoise {
    fn default() -> Self {
        OutcomeNoise::TruncatedGaussian { sigma: 1.0 }
    }
}

/// What a policy is told about an instance before the first round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemShape {
    pub num_actions: usize,
    pub num_resources: usize,
    pub null_index: usize,
    pub horizon: usize,
}

/// Ground truth of a generic instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    /// Mean per-unit reward of each action, including the null action.
    pub rewards: Vec<f64>,
    /// Mean per-unit consumption, `costs[action][resource]`.
    pub costs: Vec<Vec<f64>>,
    pub null_index: usize,
    /// `b`, so that the per-resource budget is `B = b T`.
    pub normalized_budget: f64,
    pub horizon: usize,
    pub demand: DemandModel,
    #[serde(default)]
    pub noise: OutcomeNoise,
}

impl EnvironmentSpec {
    pub fn num_actions(&self) -> usize {
        self.rewards.len()
    }

    pub fn num_resources(&self) -> usize {
        self.costs.first().map_or(0, Vec::len)
    }

    pub fn budget(&self) -> f64 {
        self.normalized_budget * self.horizon as f64
    }

    pub fn shape(&self) -> ProblemShape {
        ProblemShape {
            num_actions: self.num_actions(),
            num_resources: self.num_resources(),
            null_index: self.null_index,
            horizon: self.horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.num_actions();
        let d = self.num_resources();
        if k == 0 || d == 0 {
            return Err(config(
                "environment needs at least one action and one resource",
            ));
        }
        if self.costs.len() != k || self.costs.iter().any(|c| c.len() != d) {
            return Err(config("cost matrix must be K x d"));
        }
        if self.null_index >= k
            || self.rewards[self.null_index] != 0.0
            || self.costs[self.null_index].iter().any(|&c| c != 0.0)
        {
            return Err(Error::NoNullAction);
        }
        let in_unit = |x: &f64| (0.0..=1.0).contains(x);
        if !self.rewards.iter().all(in_unit) || !self.costs.iter().flatten().all(in_unit) {
            return Err(config("mean rewards and costs must lie in [0,1]"));
        }
        if self.horizon == 0 {
            return Err(config("horizon must be >= 1"));
        }
        if !(self.normalized_budget > 0.0) || !self.normalized_budget.is_finite() {
            return Err(config("normalized budget must be > 0"));
        }
        if let OutcomeNoise::TruncatedGaussian { sigma } = self.noise {
            if !(sigma > 0.0) {
                return Err(config("outcome sigma must be > 0"));
            }
        }
        self.demand.validate(self.horizon)
    }
}

/// Realized outcome of playing an action in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub per_unit_reward: f64,
    pub per_unit_cost: Vec<f64>,
    /// `q_t R_t`.
    pub reward: f64,
    /// `q_t C_{t,i}`.
    pub consumption: Vec<f64>,
    /// Units sold per product, for pricing environments.
    pub sales: Option<Vec<u64>>,
    /// Number of arriving customers, for pricing environments.
    pub customers: Option<u64>,
}

impl Outcome {
    pub fn nothing(num_resources: usize) -> Self {
        Self {
            per_unit_reward: 0.0,
            per_unit_cost: vec![0.0; num_resources],
            reward: 0.0,
            consumption: vec![0.0; num_resources],
            sales: None,
            customers: None,
        }
    }

    /// Scales per-unit outcomes by the demand volume.
    pub fn scaled(per_unit_reward: f64, per_unit_cost: Vec<f64>, demand: f64) -> Self {
        let consumption = per_unit_cost.iter().map(|c| demand * c).collect();
        Self {
            reward: demand * per_unit_reward,
            per_unit_reward,
            per_unit_cost,
            consumption,
            sales: None,
            customers: None,
        }
    }
}

/// Anything that turns `(round, action, demand)` into an outcome.
///
/// Implementations must be deterministic in their arguments so that different
/// policies facing the same environment see paired outcomes.
pub trait Environment {
    fn num_actions(&self) -> usize;
    fn num_resources(&self) -> usize;
    fn null_index(&self) -> usize;
    fn horizon(&self) -> usize;
    fn budget(&self) -> f64;
    fn outcome(&self, t: usize, action: usize, demand: f64) -> Outcome;
}

/// The generic environment: calibrated per-unit outcome sampler plus a seed.
/// Noise for `(t, action)` comes from its own stream, independent of pull order.
#[derive(Debug, Clone)]
pub struct BwkEnvironment {
    spec: EnvironmentSpec,
    sampler: OutcomeSampler,
    seed: u64,
}

impl BwkEnvironment {
    pub fn new(spec: EnvironmentSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let sigma = match spec.noise {
            OutcomeNoise::Deterministic => None,
            OutcomeNoise::TruncatedGaussian { sigma } => Some(sigma),
        };
        let sampler = OutcomeSampler::new(&spec.rewards, &spec.costs, spec.null_index, sigma)?;
        Ok(Self {
            spec,
            sampler,
            seed,
        })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn sampler(&self) -> &OutcomeSampler {
        &self.sampler
    }
}

impl Environment for BwkEnvironment {
    fn num_actions(&self) -> usize {
        self.spec.num_actions()
    }
    fn num_resources(&self) -> usize {
        self.spec.num_resources()
    }
    fn null_index(&self) -> usize {
        self.spec.null_index
    }
    fn horizon(&self) -> usize {
        self.spec.horizon
    }
    fn budget(&self) -> f64 {
        self.spec.budget()
    }
    fn outcome(&self, t: usize, action: usize, demand: f64) -> Outcome {
        let mut rng: StreamRng =
            rng::stream(self.seed, &[rng::tag::OUTCOME, t as u64, action as u64]);
        let (r, c) = self.sampler.sample(action, &mut rng);
        Outcome::scaled(r, c, demand)
    }
}

/// What a policy knows when choosing the action of round `t` (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundContext {
    pub t: usize,
    pub horizon: usize,
    pub prediction: f64,
    pub budget: f64,
}

/// Feedback revealed after the action of round `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundFeedback {
    pub t: usize,
    pub demand: f64,
    pub prediction: f64,
    pub outcome: Outcome,
}

/// A sequential decision rule. Implementations are deterministic functions
/// of their construction parameters and the feedback they have observed.
pub trait Policy {
    fn name(&self) -> String;
    /// Returns to the freshly constructed state.
    fn reset(&mut self);
    fn select(&mut self, ctx: &RoundContext) -> usize;
    fn observe(&mut self, ctx: &RoundContext, action: usize, feedback: &RoundFeedback);
    /// Current dual weights over the `d + 1` resources, if the policy keeps any.
    fn dual_weights(&self) -> Option<Vec<f64>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub feedback: RoundFeedback,
    pub action: usize,
    /// Dual weights the action was selected with.
    pub dual_weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub rounds: Vec<RoundRecord>,
    /// First round whose consumption exceeded the budget, or `T + 1`.
    pub stopping_time: usize,
    /// `Σ_{t<τ} q_t R_t`.
    pub total_reward: f64,
    /// `Q = Σ_{t≤T} q_t`.
    pub realized_demand: f64,
    pub budget: f64,
}

impl TrajectoryLog {
    /// Actions chosen in rounds `1..=T`.
    pub fn actions(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.action).collect()
    }

    /// Consumption of `resource` summed over rounds before `τ`.
    pub fn counted_consumption(&self, resource: usize) -> f64 {
        self.rounds
            .iter()
            .take(self.stopping_time - 1)
            .map(|r| r.feedback.outcome.consumption[resource])
            .sum()
    }
}

/// Generates demand from the spec's model and plays one run.
pub fn simulate_run(
    spec: &EnvironmentSpec,
    policy: &mut dyn Policy,
    oracle: &mut dyn PredictionOracle,
    seed: u64,
) -> Result<TrajectoryLog> {
    spec.validate()?;
    let demand = spec.demand.generate_seeded(spec.horizon, seed)?;
    let env = BwkEnvironment::new(spec.clone(), rng::mix_seed(seed, &[rng::tag::OUTCOME]))?;
    run_with_demand(&env, &demand.values, policy, oracle)
}

/// Plays one run on a given demand sequence.
pub fn run_with_demand<E: Environment + ?Sized>(
    env: &E,
    demand: &[f64],
    policy: &mut dyn Policy,
    oracle: &mut dyn PredictionOracle,
) -> Result<TrajectoryLog> {
    let horizon = env.horizon();
    let d = env.num_resources();
    let null = env.null_index();
    if null >= env.num_actions() {
        return Err(Error::NoNullAction);
    }
    if demand.len() != horizon {
        return Err(config(format!(
            "demand has {} rounds, horizon is {horizon}",
            demand.len()
        )));
    }
    let budget = env.budget();
    let mut used = vec![0.0; d];
    let mut rounds = Vec::with_capacity(horizon);
    let mut stopping_time = horizon + 1;
    let mut total_reward = 0.0;

    for t in 1..=horizon {
        let prediction = oracle.predict(&demand[..t - 1], t, horizon);
        let q = demand[t - 1];
        let ctx = RoundContext {
            t,
            horizon,
            prediction,
            budget,
        };
        if stopping_time <= horizon {
            rounds.push(RoundRecord {
                feedback: RoundFeedback {
                    t,
                    demand: q,
                    prediction,
                    outcome: Outcome::nothing(d),
                },
                action: null,
                dual_weights: None,
            });
            continue;
        }
        let dual_weights = policy.dual_weights();
        let action = policy.select(&ctx);
        assert!(
            action < env.num_actions(),
            "policy chose action {action} out of range"
        );
        let outcome = if action == null {
            Outcome::nothing(d)
        } else {
            env.outcome(t, action, q)
        };
        let feedback = RoundFeedback {
            t,
            demand: q,
            prediction,
            outcome,
        };
        policy.observe(&ctx, action, &feedback);

        let mut violated = false;
        for (u, c) in used.iter_mut().zip(&feedback.outcome.consumption) {
            *u += c;
            violated |= *u > budget;
        }
        if violated {
            stopping_time = t;
        } else {
            total_reward += feedback.outcome.reward;
        }
        rounds.push(RoundRecord {
            feedback,
            action,
            dual_weights,
        });
    }

    Ok(TrajectoryLog {
        rounds,
        stopping_time,
        total_reward,
        realized_demand: demand.iter().sum(),
        budget,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub regret: f64,
    pub competitive_ratio: f64,
}

/// Regret and competitive ratio against the LP benchmark.
pub fn compute_metrics(log: &TrajectoryLog, opt_lp_value: f64) -> Result<Metrics> {
    if !(opt_lp_value > 0.0) || !opt_lp_value.is_finite() {
        return Err(config(format!(
            "benchmark value must be > 0, got {opt_lp_value}"
        )));
    }
    Ok(Metrics {
        regret: opt_lp_value - log.total_reward,
        competitive_ratio: log.total_reward / opt_lp_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::StaticOracle;

    struct Always(usize);

    impl Policy for Always {
        fn name(&self) -> String {
            format!("always-{}", self.0)
        }
        fn reset(&mut self) {}
        fn select(&mut self, _: &RoundContext) -> usize {
            self.0
        }
        fn observe(&mut self, _: &RoundContext, _: usize, _: &RoundFeedback) {}
    }

    fn unit_spec(horizon: usize, b: f64) -> EnvironmentSpec {
        EnvironmentSpec {
            rewards: vec![1.0, 0.0],
            costs: vec![vec![1.0], vec![0.0]],
            null_index: 1,
            normalized_budget: b,
            horizon,
            demand: DemandModel::Fixed {
                values: vec![1.0; horizon],
            },
            noise: OutcomeNoise::Deterministic,
        }
    }

    #[test]
    fn overshooting_round_is_excluded() {
        let spec = unit_spec(10, 0.5);
        let log = simulate_run(&spec, &mut Always(0), &mut StaticOracle::new(10.0), 0).unwrap();
        assert_eq!(log.stopping_time, 6);
        assert_eq!(log.total_reward, 5.0);
        assert_eq!(log.actions(), vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(log.counted_consumption(0), 5.0);
    }

    #[test]
    fn null_policy_never_stops() {
        let spec = unit_spec(10, 0.5);
        let log = simulate_run(&spec, &mut Always(1), &mut StaticOracle::new(10.0), 0).unwrap();
        assert_eq!(log.stopping_time, 11);
        assert_eq!(log.total_reward, 0.0);
        assert_eq!(log.realized_demand, 10.0);
    }

    #[test]
    fn runs_are_reproducible() {
        let mut spec = unit_spec(50, 0.3);
        spec.rewards = vec![0.6, 0.0];
        spec.costs = vec![vec![0.4], vec![0.0]];
        spec.noise = OutcomeNoise::TruncatedGaussian { sigma: 1.0 };
        spec.demand = DemandModel::Ar1(crate::demand::Ar1DemandParams::new(12.0, 0.5, 2.0));
        let a = simulate_run(&spec, &mut Always(0), &mut StaticOracle::new(1.0), 9).unwrap();
        let b = simulate_run(&spec, &mut Always(0), &mut StaticOracle::new(1.0), 9).unwrap();
        let c = simulate_run(&spec, &mut Always(0), &mut StaticOracle::new(1.0), 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_missing_null_action() {
        let mut spec = unit_spec(4, 0.5);
        spec.rewards = vec![1.0, 0.5];
        assert_eq!(spec.validate(), Err(Error::NoNullAction));
        assert!(simulate_run(&spec, &mut Always(0), &mut StaticOracle::new(1.0), 0).is_err());
    }

    #[test]
    fn metrics_arithmetic() {
        let spec = unit_spec(10, 0.5);
        let mut log = simulate_run(&spec, &mut Always(1), &mut StaticOracle::new(1.0), 0).unwrap();
        assert_eq!(
            compute_metrics(&log, 750.0).unwrap(),
            Metrics {
                regret: 750.0,
                competitive_ratio: 0.0
            }
        );
        log.total_reward = 750.0;
        assert_eq!(
            compute_metrics(&log, 750.0).unwrap(),
            Metrics {
                regret: 0.0,
                competitive_ratio: 1.0
            }
        );
        log.total_reward = 720.0;
        let m = compute_metrics(&log, 750.0).unwrap();
        assert_eq!(m.regret, 30.0);
        assert!((m.competitive_ratio - 0.96).abs() < 1e-15);
        assert!(compute_metrics(&log, 0.0).is_err());
        assert!(compute_metrics(&log, -1.0).is_err());
    }
}
