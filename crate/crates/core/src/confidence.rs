//! Confidence radius and the optimistic reward / pessimistic cost bounds.

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Confidence radius `sqrt(2 v ln(1/δ) / N) + 4 ln(1/δ) / N`.
pub fn rad<T: Real>(v: T, n: u64, delta: T) -> Result<T> {
    if !(v >= T::zero()) || !v.is_finite() {
        return Err(invalid(format!(
            "rad: v must be finite and >= 0, got {v:?}"
        )));
    }
    if n == 0 {
        return Err(invalid("rad: N must be >= 1"));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(invalid(format!(
            "rad: delta must lie in (0,1), got {delta:?}"
        )));
    }
    Ok(rad_unchecked(v, n, delta.recip().ln()))
}

#[inline]
pub(crate) fn rad_unchecked<T: Real>(v: T, n: u64, log_inv_delta: T) -> T {
    let n = T::from_u64(n).expect("count fits in scalar");
    (T::lit(2.0) * v * log_inv_delta / n).sqrt() + T::lit(4.0) * log_inv_delta / n
}

/// Validated confidence level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceParams<T = f64> {
    delta: T,
    log_inv_delta: T,
}

impl<T: Real> ConfidenceParams<T> {
    pub fn new(delta: T) -> Result<Self> {
        if !(delta > T::zero() && delta < T::one()) {
            return Err(invalid(format!("delta must lie in (0,1), got {delta:?}")));
        }
        Ok(Self {
            delta,
            log_inv_delta: delta.recip().ln(),
        })
    }

    /// The default level `δ = 1/T`; a horizon of one round falls back to `δ = 1/2`.
    pub fn for_horizon(horizon: usize) -> Self {
        let delta = if horizon >= 2 {
            T::one() / T::from_usize(horizon).expect("horizon fits")
        } else {
            T::lit(0.5)
        };
        Self::new(delta).expect("1/T lies in (0,1)")
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn log_inv_delta(&self) -> T {
        self.log_inv_delta
    }

    /// Radius around a sample mean computed from `n` pulls (`n = 0` is treated as 1).
    pub fn radius(&self, mean: T, n: u64) -> T {
        rad_unchecked(clamp_unit(mean), n.max(1), self.log_inv_delta)
    }

    /// `min{mean + rad, 1}`.
    pub fn upper(&self, mean: T, n: u64) -> T {
        (clamp_unit(mean) + self.radius(mean, n)).min(T::one())
    }

    /// `max{mean - rad, 0}`.
    pub fn lower(&self, mean: T, n: u64) -> T {
        (clamp_unit(mean) - self.radius(mean, n)).max(T::zero())
    }
}

pub(crate) fn clamp_unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// Per-action pull counts and running sums of per-unit outcomes.
///
/// The null action is known a priori: its reward UCB and cost LCBs are pinned
/// to zero regardless of what has been recorded for it.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStatistics<T = f64> {
    counts: Vec<u64>,
    reward_sum: Vec<T>,
    cost_sum: Vec<Vec<T>>,
    num_resources: usize,
    null_index: usize,
}

impl<T: Real> ArmStatistics<T> {
    pub fn new(num_actions: usize, num_resources: usize, null_index: usize) -> Self {
        assert!(null_index < num_actions, "null index out of range");
        Self {
            counts: vec![0; num_actions],
            reward_sum: vec![T::zero(); num_actions],
            cost_sum: vec![vec![T::zero(); num_resources]; num_actions],
            num_resources,
            null_index,
        }
    }

    pub fn num_actions(&self) -> usize {
        self.counts.len()
    }

    pub fn num_resources(&self) -> usize {
        self.num_resources
    }

    pub fn null_index(&self) -> usize {
        self.null_index
    }

    pub fn count(&self, action: usize) -> u64 {
        self.counts[action]
    }

    /// `max(N, 1)`.
    pub fn count_plus(&self, action: usize) -> u64 {
        self.counts[action].max(1)
    }

    pub fn record(&mut self, action: usize, reward: T, costs: &[T]) {
        debug_assert_eq!(costs.len(), self.num_resources);
        self.counts[action] += 1;
        self.reward_sum[action] = self.reward_sum[action] + reward;
        for (acc, &c) in self.cost_sum[action].iter_mut().zip(costs) {
            *acc = *acc + c;
        }
    }

    /// Removes a previously recorded sample (sliding-window statistics).
    pub fn forget(&mut self, action: usize, reward: T, costs: &[T]) {
        debug_assert!(self.counts[action] > 0);
        self.counts[action] -= 1;
        if self.counts[action] == 0 {
            self.reward_sum[action] = T::zero();
            self.cost_sum[action]
                .iter_mut()
                .for_each(|c| *c = T::zero());
            return;
        }
        self.reward_sum[action] = self.reward_sum[action] - reward;
        for (acc, &c) in self.cost_sum[action].iter_mut().zip(costs) {
            *acc = *acc - c;
        }
    }

    pub fn mean_reward(&self, action: usize) -> T {
        clamp_unit(self.reward_sum[action] / self.n_plus(action))
    }

    pub fn mean_cost(&self, action: usize, resource: usize) -> T {
        clamp_unit(self.cost_sum[action][resource] / self.n_plus(action))
    }

    fn n_plus(&self, action: usize) -> T {
        T::from_u64(self.count_plus(action)).expect("count fits")
    }

    /// Reward UCB; zero for the null action.
    pub fn ucb_reward(&self, action: usize, params: &ConfidenceParams<T>) -> T {
        if action == self.null_index {
            return T::zero();
        }
        params.upper(self.mean_reward(action), self.counts[action])
    }

    /// Cost LCB for `resource` in `0..=d`; index `d` is the null resource and always 0.
    pub fn lcb_cost(&self, action: usize, resource: usize, params: &ConfidenceParams<T>) -> T {
        assert!(
            resource <= self.num_resources,
            "resource index out of range"
        );
        if resource == self.num_resources || action == self.null_index {
            return T::zero();
        }
        params.lower(self.mean_cost(action, resource), self.counts[action])
    }

    /// Cost LCBs over the `d` real resources.
    pub fn lcb_costs(&self, action: usize, params: &ConfidenceParams<T>) -> Vec<T> {
        (0..self.num_resources)
            .map(|i| self.lcb_cost(action, i, params))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn rad_without_variance_term() {
        for &(n, delta) in &[(1u64, 0.1), (10, 0.01), (400, 0.5)] {
            let expected = 4.0 * (1.0f64 / delta).ln() / n as f64;
            assert_abs_diff_eq!(rad(0.0, n, delta).unwrap(), expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn rad_reference_values() {
        let e_inv = (-1.0f64).exp();
        assert_abs_diff_eq!(
            rad(1.0, 1, e_inv).unwrap(),
            2f64.sqrt() + 4.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(rad(0.25, 400, 0.01).unwrap(), 0.121924, epsilon = 1e-6);
        assert_abs_diff_eq!(rad(0.25f32, 400, 0.01).unwrap(), 0.121924, epsilon = 1e-5);
    }

    #[test]
    fn rad_domain_errors() {
        assert!(rad(-0.1, 1, 0.1).is_err());
        assert!(rad(0.1, 0, 0.1).is_err());
        assert!(rad(0.1, 1, 0.0).is_err());
        assert!(rad(0.1, 1, 1.0).is_err());
        assert!(rad(f64::NAN, 1, 0.5).is_err());
    }

    fn stats_with(mean: f64, n: u64) -> ArmStatistics {
        let mut s = ArmStatistics::new(2, 1, 1);
        for _ in 0..n {
            s.record(0, mean, &[mean]);
        }
        s
    }

    #[test]
    fn ucb_examples() {
        let p = ConfidenceParams::new(0.01).unwrap();
        let fresh = ArmStatistics::<f64>::new(3, 2, 2);
        assert_eq!(fresh.ucb_reward(0, &p), 1.0);
        let s = stats_with(0.5, 100);
        // 0.5 + sqrt(2*0.5*ln(100)/100) + 4*ln(100)/100
        assert_abs_diff_eq!(s.ucb_reward(0, &p), 0.898_803_41, epsilon = 1e-7);
        assert_eq!(s.ucb_reward(1, &p), 0.0);
    }

    #[test]
    fn lcb_examples() {
        let p = ConfidenceParams::new(0.01).unwrap();
        let s = stats_with(0.9, 400);
        // 0.9 - sqrt(2*0.9*ln(100)/400) - 4*ln(100)/400
        assert_abs_diff_eq!(s.lcb_cost(0, 0, &p), 0.709_992_52, epsilon = 1e-7);
        // Null resource.
        assert_eq!(s.lcb_cost(0, 1, &p), 0.0);
        let fresh = ArmStatistics::<f64>::new(3, 2, 2);
        assert_eq!(fresh.lcb_cost(0, 0, &p), 0.0);
        assert_eq!(fresh.lcb_cost(1, 2, &p), 0.0);
    }

    #[test]
    fn forget_restores_previous_means() {
        let mut s = ArmStatistics::<f64>::new(2, 1, 1);
        s.record(0, 0.2, &[0.4]);
        s.record(0, 0.6, &[0.8]);
        s.forget(0, 0.2, &[0.4]);
        assert_eq!(s.count(0), 1);
        assert_abs_diff_eq!(s.mean_reward(0), 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean_cost(0, 0), 0.8, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn rad_shrinks_with_samples(v in 0.0f64..1.0, n in 1u64..10_000, delta in 1e-6f64..0.9) {
            prop_assert!(rad(v, n + 1, delta).unwrap() < rad(v, n, delta).unwrap());
        }

        #[test]
        fn rad_grows_with_confidence(v in 0.0f64..1.0, n in 1u64..10_000, delta in 1e-6f64..0.9) {
            prop_assert!(rad(v, n, delta * 0.5).unwrap() > rad(v, n, delta).unwrap());
        }

        #[test]
        fn bounds_stay_in_unit_interval(
            samples in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 0..50),
            delta in 1e-9f64..0.99,
        ) {
            let p = ConfidenceParams::new(delta).unwrap();
            let mut s = ArmStatistics::new(2, 1, 1);
            for (r, c) in samples {
                s.record(0, r, &[c]);
                let u = s.ucb_reward(0, &p);
                let l = s.lcb_cost(0, 0, &p);
                prop_assert!((0.0..=1.0).contains(&u));
                prop_assert!((0.0..=1.0).contains(&l));
                prop_assert!(l <= s.mean_cost(0, 0) && s.mean_reward(0) <= u);
            }
        }
    }
}
