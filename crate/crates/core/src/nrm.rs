//! Network revenue management: choosing among price vectors for `J` products
//! that draw on `d` shared resources.
//!
//! Each of the `q_t` arriving customers buys product `j` independently with
//! probability `λ_j(p)`. Revenue is `Σ_j p_j D_j` and resource `i` is drawn
//! down by `Σ_j A[i][j] D_j`, with `A` stored resource × product. The null
//! price (selling nothing) is appended after the configured price vectors.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::confidence::ConfidenceParams;
use crate::demand::DemandModel;
use crate::error::{config, invalid, Error, Result};
use crate::hedge::AdaHedge;
use crate::lp::{solve_opt_lp, LpSolution};
use crate::model::{Environment, Outcome, Policy, ProblemShape, RoundContext, RoundFeedback};
use crate::oaucb::{argmax_lowest, dual_gradient};
use crate::rng::{self, StreamRng};

/// Per-customer purchase probabilities as a function of the price vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChoiceModel {
    /// `λ_j = intercept_j − slope_j·p_j`.
    Linear {
        intercept: Vec<f64>,
        slope: Vec<f64>,
    },
    /// `λ_j = scale_j·exp(−rate_j·p_j)`.
    Exponential { scale: Vec<f64>, rate: Vec<f64> },
    /// `λ_j = weight_j·exp(−rate_j·p_j) / (1 + Σ_k exp(−rate_k·p_k))`.
    Logit { weight: Vec<f64>, rate: Vec<f64> },
    /// `values[k]` is `λ` at the `k`-th configured price vector.
    Table { values: Vec<Vec<f64>> },
}

impl ChoiceModel {
    /// `λ` at the `index`-th price vector `price`.
    pub fn lambda(&self, index: usize, price: &[f64]) -> Result<Vec<f64>> {
        let check_len = |v: &[f64]| {
            if v.len() == price.len() {
                Ok(())
            } else {
                Err(config(format!(
                    "choice coefficients have {} entries for {} products",
                    v.len(),
                    price.len()
                )))
            }
        };
        let out: Vec<f64> = match self {
            ChoiceModel::Linear { intercept, slope } => {
                check_len(intercept)?;
                check_len(slope)?;
                price
                    .iter()
                    .zip(intercept.iter().zip(slope))
                    .map(|(p, (a, b))| a - b * p)
                    .collect()
            }
            ChoiceModel::Exponential { scale, rate } => {
                check_len(scale)?;
                check_len(rate)?;
                price
                    .iter()
                    .zip(scale.iter().zip(rate))
                    .map(|(p, (a, b))| a * (-b * p).exp())
                    .collect()
            }
            ChoiceModel::Logit { weight, rate } => {
                check_len(weight)?;
                check_len(rate)?;
                let utilities: Vec<f64> = price
                    .iter()
                    .zip(rate)
                    .map(|(p, b)| (-b * p).exp())
                    .collect();
                let denom = 1.0 + utilities.iter().sum::<f64>();
                utilities
                    .iter()
                    .zip(weight)
                    .map(|(u, w)| w * u / denom)
                    .collect()
            }
            ChoiceModel::Table { values } => {
                let row = values
                    .get(index)
                    .ok_or_else(|| config(format!("choice table has no row for price {index}")))?;
                check_len(row)?;
                row.clone()
            }
        };
        if out.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(config(format!(
                "purchase probabilities {out:?} at price {price:?} leave [0,1]"
            )));
        }
        Ok(out)
    }
}

/// A pricing instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NrmSpec {
    /// The `K` selectable price vectors, each of length `J`.
    pub prices: Vec<Vec<f64>>,
    /// `A[i][j]`: units of resource `i` used per unit of product `j`.
    pub consumption: Vec<Vec<f64>>,
    pub choice: ChoiceModel,
    pub normalized_budget: f64,
    pub horizon: usize,
    pub demand: DemandModel,
}

impl NrmSpec {
    pub fn num_products(&self) -> usize {
        self.prices.first().map_or(0, Vec::len)
    }

    pub fn num_resources(&self) -> usize {
        self.consumption.len()
    }

    /// Configured prices plus the null price.
    pub fn num_actions(&self) -> usize {
        self.prices.len() + 1
    }

    pub fn null_index(&self) -> usize {
        self.prices.len()
    }

    pub fn budget(&self) -> f64 {
        self.normalized_budget * self.horizon as f64
    }

    pub fn shape(&self) -> ProblemShape {
        ProblemShape {
            num_actions: self.num_actions(),
            num_resources: self.num_resources(),
            null_index: self.null_index(),
            horizon: self.horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.num_products();
        if self.prices.is_empty() || j == 0 || self.prices.iter().any(|p| p.len() != j) {
            return Err(config(
                "price set must hold K >= 1 vectors of a common length J >= 1",
            ));
        }
        if self
            .prices
            .iter()
            .flatten()
            .any(|p| !(p.is_finite() && *p >= 0.0))
        {
            return Err(config("prices must be finite and >= 0"));
        }
        if self.consumption.is_empty() || self.consumption.iter().any(|row| row.len() != j) {
            return Err(config("consumption matrix must be d x J with d >= 1"));
        }
        if self
            .consumption
            .iter()
            .flatten()
            .any(|a| !(a.is_finite() && *a >= 0.0))
        {
            return Err(config("consumption entries must be finite and >= 0"));
        }
        if self.horizon == 0 {
            return Err(config("horizon must be >= 1"));
        }
        if !(self.normalized_budget > 0.0) || !self.normalized_budget.is_finite() {
            return Err(config("normalized budget must be > 0"));
        }
        for k in 0..self.prices.len() {
            self.lambda(k)?;
        }
        self.demand.validate(self.horizon)
    }

    /// True purchase probabilities at action `a`; zero at the null price.
    pub fn lambda(&self, action: usize) -> Result<Vec<f64>> {
        if action == self.null_index() {
            return Ok(vec![0.0; self.num_products()]);
        }
        let price = self
            .prices
            .get(action)
            .ok_or_else(|| invalid(format!("no price {action}")))?;
        self.choice.lambda(action, price)
    }

    /// `A·v` for a product vector `v`.
    pub fn consume(&self, per_product: &[f64]) -> Vec<f64> {
        self.consumption
            .iter()
            .map(|row| row.iter().zip(per_product).map(|(a, v)| a * v).sum())
            .collect()
    }

    /// Per-customer means `r(p) = pᵀλ(p)` and `c(p) = A·λ(p)` of every action.
    pub fn mean_outcomes(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let mut rewards = Vec::with_capacity(self.num_actions());
        let mut costs = Vec::with_capacity(self.num_actions());
        for a in 0..self.num_actions() {
            let lambda = self.lambda(a)?;
            let price = self
                .prices
                .get(a)
                .map_or(0.0, |p| p.iter().zip(&lambda).map(|(p, l)| p * l).sum());
            rewards.push(price);
            costs.push(self.consume(&lambda));
        }
        Ok((rewards, costs))
    }
}

/// The benchmark LP of a pricing instance for total demand `Q`.
///
/// Per-customer revenue and consumption can exceed 1, so both are rescaled
/// into `[0,1]` before solving and the value is scaled back; the optimal
/// allocation is unchanged by the rescaling.
pub fn nrm_opt_lp(spec: &NrmSpec, total_demand: f64) -> Result<LpSolution<f64>> {
    spec.validate()?;
    let (rewards, costs) = spec.mean_outcomes()?;
    let r_scale = rewards.iter().copied().fold(0.0, f64::max).max(1.0);
    let c_scale = costs.iter().flatten().copied().fold(0.0, f64::max).max(1.0);
    let r: Vec<f64> = rewards.iter().map(|x| x / r_scale).collect();
    let c: Vec<Vec<f64>> = costs
        .iter()
        .map(|row| row.iter().map(|x| x / c_scale).collect())
        .collect();
    let mut solution = solve_opt_lp(&r, &c, &total_demand, &(spec.budget() / c_scale))?;
    solution.value *= r_scale;
    Ok(solution)
}

/// Number of customers for a real demand volume.
pub fn customer_count(demand: f64) -> u64 {
    if demand.is_finite() && demand > 0.0 {
        demand.round() as u64
    } else {
        0
    }
}

/// `D_j ~ Binomial(round(q), λ_j)` independently per product.
pub fn sample_nrm_demand(lambda: &[f64], demand: f64, rng: &mut StreamRng) -> Vec<u64> {
    let n = customer_count(demand);
    lambda
        .iter()
        .map(|&l| match l {
            l if l <= 0.0 || n == 0 => 0,
            l if l >= 1.0 => n,
            l => Binomial::new(n, l)
                .expect("probability in (0,1)")
                .sample(rng),
        })
        .collect()
}

/// A pricing environment; sales for `(t, action)` come from their own stream.
#[derive(Debug, Clone)]
pub struct NrmEnvironment {
    spec: NrmSpec,
    lambdas: Vec<Vec<f64>>,
    seed: u64,
}

impl NrmEnvironment {
    pub fn new(spec: NrmSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let lambdas = (0..spec.num_actions())
            .map(|a| spec.lambda(a))
            .collect::<Result<_>>()?;
        Ok(Self {
            spec,
            lambdas,
            seed,
        })
    }

    pub fn spec(&self) -> &NrmSpec {
        &self.spec
    }
}

impl Environment for NrmEnvironment {
    fn num_actions(&self) -> usize {
        self.spec.num_actions()
    }
    fn num_resources(&self) -> usize {
        self.spec.num_resources()
    }
    fn null_index(&self) -> usize {
        self.spec.null_index()
    }
    fn horizon(&self) -> usize {
        self.spec.horizon
    }
    fn budget(&self) -> f64 {
        self.spec.budget()
    }
    fn outcome(&self, t: usize, action: usize, demand: f64) -> Outcome {
        let d = self.spec.num_resources();
        let customers = customer_count(demand);
        if action == self.spec.null_index() {
            return Outcome {
                customers: Some(customers),
                sales: Some(vec![0; self.spec.num_products()]),
                ..Outcome::nothing(d)
            };
        }
        let mut rng = rng::stream(self.seed, &[rng::tag::OUTCOME, t as u64, action as u64]);
        let sales = sample_nrm_demand(&self.lambdas[action], demand, &mut rng);
        let sold: Vec<f64> = sales.iter().map(|&x| x as f64).collect();
        let reward: f64 = self.spec.prices[action]
            .iter()
            .zip(&sold)
            .map(|(p, s)| p * s)
            .sum();
        let consumption = self.spec.consume(&sold);
        let per_unit = |x: f64| if demand > 0.0 { x / demand } else { 0.0 };
        Outcome {
            per_unit_reward: per_unit(reward),
            per_unit_cost: consumption.iter().map(|&c| per_unit(c)).collect(),
            reward,
            consumption,
            sales: Some(sales),
            customers: Some(customers),
        }
    }
}

/// Per-price purchase-rate estimates `D̂_j(p)` from sales per customer.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceStatistics {
    counts: Vec<u64>,
    rate_sums: Vec<Vec<f64>>,
}

impl PriceStatistics {
    pub fn new(num_actions: usize, num_products: usize) -> Self {
        Self {
            counts: vec![0; num_actions],
            rate_sums: vec![vec![0.0; num_products]; num_actions],
        }
    }

    pub fn count(&self, action: usize) -> u64 {
        self.counts[action]
    }

    /// Records `D_j / n` for a round with `n ≥ 1` customers.
    pub fn record(&mut self, action: usize, sales: &[u64], customers: u64) {
        if customers == 0 {
            return;
        }
        self.counts[action] += 1;
        for (acc, &s) in self.rate_sums[action].iter_mut().zip(sales) {
            *acc += s as f64 / customers as f64;
        }
    }

    pub fn mean_rate(&self, action: usize, product: usize) -> f64 {
        (self.rate_sums[action][product] / self.counts[action].max(1) as f64).clamp(0.0, 1.0)
    }

    pub fn upper(&self, action: usize, params: &ConfidenceParams<f64>) -> Vec<f64> {
        (0..self.rate_sums[action].len())
            .map(|j| params.upper(self.mean_rate(action, j), self.counts[action]))
            .collect()
    }

    pub fn lower(&self, action: usize, params: &ConfidenceParams<f64>) -> Vec<f64> {
        (0..self.rate_sums[action].len())
            .map(|j| params.lower(self.mean_rate(action, j), self.counts[action]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OaUcbDpConfig {
    /// Confidence parameter; `None` means `1/T`.
    pub delta: Option<f64>,
    /// Lower bound on `Q̂`; the effective floor also covers the largest demand seen.
    pub prediction_floor: f64,
    /// Charge the dual-weighted resource cost in the score. Without it the
    /// policy maximizes optimistic revenue only.
    pub opportunity_cost: bool,
}

impl Default for OaUcbDpConfig {
    fn default() -> Self {
        Self {
            delta: None,
            prediction_floor: 1e-9,
            opportunity_cost: true,
        }
    }
}

/// The optimistic primal-dual policy on price vectors: scores each price by
/// `UCB(p)ᵀp − (Q̂/B)·μᵀA·LCB(p)` with confidence bounds on purchase rates.
#[derive(Debug, Clone)]
pub struct OaUcbDp {
    prices: Vec<Vec<f64>>,
    consumption: Vec<Vec<f64>>,
    shape: ProblemShape,
    config: OaUcbDpConfig,
    params: ConfidenceParams<f64>,
    stats: PriceStatistics,
    hedge: AdaHedge<f64>,
    largest_demand: f64,
    pending: Option<(usize, f64, Vec<f64>)>,
}

impl OaUcbDp {
    pub fn new(spec: &NrmSpec, config: OaUcbDpConfig) -> Result<Self> {
        spec.validate()?;
        if !(config.prediction_floor > 0.0) {
            return Err(invalid("prediction floor must be > 0"));
        }
        let shape = spec.shape();
        if shape.null_index >= shape.num_actions {
            return Err(Error::NoNullAction);
        }
        let params = match config.delta {
            Some(delta) => ConfidenceParams::new(delta)?,
            None => ConfidenceParams::for_horizon(spec.horizon),
        };
        Ok(Self {
            prices: spec.prices.clone(),
            consumption: spec.consumption.clone(),
            stats: PriceStatistics::new(shape.num_actions, spec.num_products()),
            hedge: AdaHedge::new(shape.num_resources + 1)?,
            shape,
            config,
            params,
            largest_demand: 0.0,
            pending: None,
        })
    }

    /// Revenue-only variant.
    pub fn greedy(spec: &NrmSpec, delta: Option<f64>) -> Result<Self> {
        Self::new(
            spec,
            OaUcbDpConfig {
                delta,
                opportunity_cost: false,
                ..Default::default()
            },
        )
    }

    pub fn stats(&self) -> &PriceStatistics {
        &self.stats
    }

    pub fn hedge(&self) -> &AdaHedge<f64> {
        &self.hedge
    }

    fn effective_prediction(&self, raw: f64) -> f64 {
        let floor = self.config.prediction_floor.max(self.largest_demand);
        if raw.is_nan() {
            floor
        } else {
            raw.max(floor)
        }
    }

    /// `A·LCB(p)` for action `a`.
    fn consumption_lcb(&self, action: usize) -> Vec<f64> {
        if action == self.shape.null_index {
            return vec![0.0; self.shape.num_resources];
        }
        let lcb = self.stats.lower(action, &self.params);
        self.consumption
            .iter()
            .map(|row| row.iter().zip(&lcb).map(|(a, l)| a * l).sum())
            .collect()
    }

    /// Scores of all actions for a given `Q̂ / B`.
    pub fn scores(&self, ratio: f64) -> Vec<f64> {
        let mu = self.hedge.weights();
        (0..self.shape.num_actions)
            .map(|a| {
                if a == self.shape.null_index {
                    return 0.0;
                }
                let revenue: f64 = self
                    .stats
                    .upper(a, &self.params)
                    .iter()
                    .zip(&self.prices[a])
                    .map(|(u, p)| u * p)
                    .sum();
                if !self.config.opportunity_cost {
                    return revenue;
                }
                let cost: f64 = self
                    .consumption_lcb(a)
                    .iter()
                    .zip(mu)
                    .map(|(c, m)| c * m)
                    .sum();
                revenue - ratio * cost
            })
            .collect()
    }
}

impl Policy for OaUcbDp {
    fn name(&self) -> String {
        if self.config.opportunity_cost {
            "oa-ucb-dp"
        } else {
            "greedy-ucb"
        }
        .into()
    }

    fn reset(&mut self) {
        self.stats = PriceStatistics::new(self.shape.num_actions, self.prices[0].len());
        self.hedge = AdaHedge::new(self.shape.num_resources + 1).expect("dimension was validated");
        self.largest_demand = 0.0;
        self.pending = None;
    }

    fn select(&mut self, ctx: &RoundContext) -> usize {
        let prediction = self.effective_prediction(ctx.prediction);
        let action = argmax_lowest(&self.scores(prediction / ctx.budget));
        self.pending = Some((action, prediction, self.consumption_lcb(action)));
        action
    }

    fn observe(&mut self, ctx: &RoundContext, action: usize, feedback: &RoundFeedback) {
        let (prediction, lcb) = match self.pending.take() {
            Some((a, p, l)) if a == action => (p, l),
            _ => (
                self.effective_prediction(ctx.prediction),
                self.consumption_lcb(action),
            ),
        };
        let q = feedback.demand;
        if self.config.opportunity_cost {
            let g = dual_gradient(q, prediction, ctx.budget, &lcb);
            self.hedge
                .step(&g)
                .expect("gradient is finite for finite feedback");
        }
        if action != self.shape.null_index {
            if let (Some(sales), Some(n)) = (&feedback.outcome.sales, feedback.outcome.customers) {
                self.stats.record(action, sales, n);
            }
        }
        self.largest_demand = self.largest_demand.max(q);
    }

    fn dual_weights(&self) -> Option<Vec<f64>> {
        self.config
            .opportunity_cost
            .then(|| self.hedge.weights().to_vec())
    }
}

/// One product drawing on itself, six prices with a tabulated demand curve.
pub fn preset_single_product(
    normalized_budget: f64,
    horizon: usize,
    demand: DemandModel,
) -> NrmSpec {
    NrmSpec {
        prices: [10.0, 11.0, 13.0, 15.0, 17.0, 19.0]
            .iter()
            .map(|&p| vec![p])
            .collect(),
        consumption: vec![vec![1.0]],
        choice: ChoiceModel::Table {
            values: [1.0, 0.9, 0.7, 0.5, 0.3, 0.1]
                .iter()
                .map(|&l| vec![l])
                .collect(),
        },
        normalized_budget,
        horizon,
        demand,
    }
}

/// Two products on three resources with the named choice model.
pub fn preset_multi_product(
    choice: &str,
    normalized_budget: f64,
    horizon: usize,
    demand: DemandModel,
) -> Result<NrmSpec> {
    let choice = match choice {
        "linear" => ChoiceModel::Linear {
            intercept: vec![1.0, 1.0],
            slope: vec![0.1, 0.05],
        },
        "exponential" | "exp" => ChoiceModel::Exponential {
            scale: vec![1.0, 1.0],
            rate: vec![0.2, 0.1],
        },
        "logit" => ChoiceModel::Logit {
            weight: vec![4.0, 4.0],
            rate: vec![0.4, 0.2],
        },
        other => return Err(config(format!("unknown choice model '{other}'"))),
    };
    Ok(NrmSpec {
        prices: vec![
            vec![5.0, 10.0],
            vec![6.0, 11.0],
            vec![6.0, 13.0],
            vec![7.0, 15.0],
            vec![8.0, 17.0],
            vec![9.0, 19.0],
        ],
        consumption: vec![vec![1.0, 1.0], vec![3.0, 1.0], vec![1.0, 4.0]],
        choice,
        normalized_budget,
        horizon,
        demand,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::Ar1DemandParams;
    use crate::lp::enumerate_vertices_oracle;
    use crate::model::run_with_demand;
    use crate::oaucb::{OaUcb, OaUcbConfig};
    use crate::oracles::StaticOracle;
    use approx::assert_abs_diff_eq;

    fn ar1() -> DemandModel {
        DemandModel::Ar1(Ar1DemandParams::new(12.0, 0.5, 2.0))
    }

    #[test]
    fn choice_model_examples() {
        let spec = preset_multi_product("linear", 20.0, 10, ar1()).unwrap();
        assert_eq!(spec.lambda(0).unwrap(), vec![0.5, 0.5]);
        let spec = preset_multi_product("exp", 20.0, 10, ar1()).unwrap();
        let l = spec.lambda(0).unwrap();
        assert_abs_diff_eq!(l[0], (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(l[1], 0.36788, epsilon = 1e-5);
        assert_eq!(spec.lambda(spec.null_index()).unwrap(), vec![0.0, 0.0]);
        let spec = preset_multi_product("logit", 20.0, 10, ar1()).unwrap();
        let l = spec.lambda(0).unwrap();
        let denom = 1.0 + (-2.0f64).exp() * 2.0;
        assert_abs_diff_eq!(l[0], 4.0 * (-2.0f64).exp() / denom, epsilon = 1e-15);
        assert!(preset_multi_product("probit", 20.0, 10, ar1()).is_err());
    }

    #[test]
    fn out_of_range_probabilities_are_config_errors() {
        let model = ChoiceModel::Linear {
            intercept: vec![1.0],
            slope: vec![0.1],
        };
        assert!(matches!(model.lambda(0, &[11.0]), Err(Error::Config(_))));
        let mut spec = preset_single_product(10.0, 10, ar1());
        spec.choice = ChoiceModel::Table {
            values: vec![vec![1.2]; 6],
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn single_product_means() {
        let spec = preset_single_product(10.0, 100, ar1());
        let (r, c) = spec.mean_outcomes().unwrap();
        let expected = [10.0, 9.9, 9.1, 7.5, 5.1, 1.9, 0.0];
        for (a, e) in r.iter().zip(expected) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-12);
        }
        let lambdas: Vec<f64> = c.iter().map(|row| row[0]).collect();
        assert_eq!(lambdas, vec![1.0, 0.9, 0.7, 0.5, 0.3, 0.1, 0.0]);
    }

    #[test]
    fn opt_lp_cases() {
        let spec = preset_single_product(30.0, 100, ar1());
        // B = 3000 ≥ Q = 2400: the highest-revenue price.
        let s = nrm_opt_lp(&spec, 2400.0).unwrap();
        assert_abs_diff_eq!(s.value, 24_000.0, epsilon = 1e-6);
        // Cross-check a binding instance against vertex enumeration on the
        // unscaled problem written in the enumerator's units.
        let spec = preset_single_product(10.0, 100, ar1());
        let s = nrm_opt_lp(&spec, 2400.0).unwrap();
        let (r, c) = spec.mean_outcomes().unwrap();
        let r_unit: Vec<f64> = r.iter().map(|x| x / 10.0).collect();
        let v = enumerate_vertices_oracle(&r_unit, &c, &2400.0, &1000.0).unwrap() * 10.0;
        assert_abs_diff_eq!(s.value, v, epsilon = 1e-6);
        let multi = preset_multi_product("logit", 20.0, 100, ar1()).unwrap();
        let s = nrm_opt_lp(&multi, 2400.0).unwrap();
        let (r, c) = multi.mean_outcomes().unwrap();
        let rs = r.iter().copied().fold(0.0, f64::max);
        let cs = c.iter().flatten().copied().fold(0.0, f64::max).max(1.0);
        let r_unit: Vec<f64> = r.iter().map(|x| x / rs).collect();
        let c_unit: Vec<Vec<f64>> = c
            .iter()
            .map(|row| row.iter().map(|x| x / cs).collect())
            .collect();
        let v = enumerate_vertices_oracle(&r_unit, &c_unit, &2400.0, &(2000.0 / cs)).unwrap() * rs;
        assert_abs_diff_eq!(s.value, v, epsilon = 1e-6);
    }

    #[test]
    fn binomial_sales() {
        let mut rng = rng::stream(1, &[]);
        assert_eq!(sample_nrm_demand(&[1.0, 0.0], 7.4, &mut rng), vec![7, 0]);
        assert_eq!(sample_nrm_demand(&[0.5], 0.3, &mut rng), vec![0]);
        let reps = 2000;
        let total: u64 = (0..reps)
            .map(|_| sample_nrm_demand(&[0.5], 1000.0, &mut rng)[0])
            .sum();
        let mean = total as f64 / reps as f64;
        assert!((mean - 500.0).abs() < 4.0 * 250f64.sqrt() / (reps as f64).sqrt());
    }

    #[test]
    fn environment_accounting() {
        let spec = preset_multi_product("linear", 20.0, 10, ar1()).unwrap();
        let env = NrmEnvironment::new(spec.clone(), 5).unwrap();
        let o = env.outcome(3, 2, 24.4);
        let sales = o.sales.clone().unwrap();
        assert_eq!(o.customers, Some(24));
        let revenue: f64 = spec.prices[2]
            .iter()
            .zip(&sales)
            .map(|(p, s)| p * *s as f64)
            .sum();
        assert_eq!(o.reward, revenue);
        assert_eq!(o.consumption[1], 3.0 * sales[0] as f64 + sales[1] as f64);
        assert_eq!(env.outcome(3, 2, 24.4), o);
        let null = env.outcome(3, spec.null_index(), 24.4);
        assert_eq!(null.reward, 0.0);
    }

    #[test]
    fn fresh_policy_prefers_largest_price_sum() {
        let spec = preset_multi_product("linear", 20.0, 100, ar1()).unwrap();
        let mut p = OaUcbDp::new(&spec, OaUcbDpConfig::default()).unwrap();
        let ctx = RoundContext {
            t: 1,
            horizon: 100,
            prediction: 2400.0,
            budget: 2000.0,
        };
        assert_eq!(p.select(&ctx), 5);
        let tiny = RoundContext {
            prediction: 1e-12,
            ..ctx
        };
        assert_eq!(p.select(&tiny), 5);
    }

    #[test]
    fn zero_sales_give_demand_gradient() {
        let spec = preset_single_product(10.0, 100, ar1());
        let mut p = OaUcbDp::new(&spec, OaUcbDpConfig::default()).unwrap();
        let ctx = RoundContext {
            t: 1,
            horizon: 100,
            prediction: 2400.0,
            budget: 1000.0,
        };
        let a = p.select(&ctx);
        let fb = RoundFeedback {
            t: 1,
            demand: 3.0,
            prediction: 2400.0,
            outcome: Outcome {
                sales: Some(vec![0]),
                customers: Some(3),
                ..Outcome::nothing(1)
            },
        };
        p.observe(&ctx, a, &fb);
        // g = (3, 0): ρ = 1.5, μ₂ ∝ (e^{-3/η}, 1) with η = 1.5/ln 2.
        let w = p.hedge().weights();
        assert_abs_diff_eq!(w[0], 0.2, epsilon = 1e-12);
        assert_eq!(p.stats().count(a), 1);
        assert_eq!(p.stats().mean_rate(a, 0), 0.0);
    }

    #[test]
    fn reduces_to_generic_policy_on_unit_prices() {
        let demand: Vec<f64> = (0..100).map(|t| 5.0 + (t % 7) as f64).collect();
        let spec = NrmSpec {
            prices: vec![vec![1.0]; 4],
            consumption: vec![vec![1.0]],
            choice: ChoiceModel::Table {
                values: vec![vec![0.9], vec![0.6], vec![0.4], vec![0.2]],
            },
            normalized_budget: 2.0,
            horizon: 100,
            demand: DemandModel::Fixed {
                values: demand.clone(),
            },
        };
        let env = NrmEnvironment::new(spec.clone(), 11).unwrap();
        let prediction = demand.iter().sum::<f64>();
        let mut dp = OaUcbDp::new(&spec, OaUcbDpConfig::default()).unwrap();
        let mut generic = OaUcb::new(spec.shape(), OaUcbConfig::default()).unwrap();
        let a =
            run_with_demand(&env, &demand, &mut dp, &mut StaticOracle::new(prediction)).unwrap();
        let b = run_with_demand(
            &env,
            &demand,
            &mut generic,
            &mut StaticOracle::new(prediction),
        )
        .unwrap();
        assert_eq!(a.actions(), b.actions());
        assert!(a.actions().iter().any(|&x| x != a.actions()[0]));
    }
}
