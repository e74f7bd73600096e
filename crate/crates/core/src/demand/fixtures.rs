//! Deterministic two-instance families used to show that no policy can do
//! well on both members without advice about the total demand.

use crate::demand::DemandModel;
use crate::error::{invalid, Result};
use crate::model::{EnvironmentSpec, OutcomeNoise};

/// Instances `I^(1)`, `I^(2)` that agree on everything observable up to a point.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundPair {
    pub first: EnvironmentSpec,
    pub second: EnvironmentSpec,
}

/// Two deterministic actions `r = (1, 3/4)`, `c = (1, 1/2)` plus the null
/// action, `B = T/2`. `which = 1` has demand 1 for the first half and 1/16
/// afterwards; `which = 2` has demand 1 throughout.
pub fn fixture_lemma2(which: u8, horizon: usize) -> Result<EnvironmentSpec> {
    if horizon == 0 || horizon % 2 != 0 {
        return Err(invalid(format!(
            "horizon must be a positive even integer, got {horizon}"
        )));
    }
    let half = horizon / 2;
    let values = match which {
        1 => (1..=horizon)
            .map(|t| if t <= half { 1.0 } else { 1.0 / 16.0 })
            .collect(),
        2 => vec![1.0; horizon],
        other => {
            return Err(invalid(format!(
                "instance selector must be 1 or 2, got {other}"
            )))
        }
    };
    Ok(EnvironmentSpec {
        rewards: vec![1.0, 0.75, 0.0],
        costs: vec![vec![1.0], vec![0.5], vec![0.0]],
        null_index: 2,
        normalized_budget: 0.5,
        horizon,
        demand: DemandModel::Fixed { values },
        noise: OutcomeNoise::Deterministic,
    })
}

/// Builds the pair whose total demands bracket a prediction `Q̂` by `±ε`.
///
/// Both share the first `T₀ = prefix.len()` demands, `r = (1, (1+c)/2, 0)`,
/// `c = (1, c, 0)` with `c = (Q̂-ε)/(Q̂+ε)`, and `B = Q̂ - ε`. Tail demands
/// are constant so that `Q^(1) = Q̂ - ε` and `Q^(2) = Q̂ + ε`.
pub fn fixture_thm1_pair(
    prefix: &[f64],
    prediction: f64,
    eps: f64,
    horizon: usize,
) -> Result<LowerBoundPair> {
    let t0 = prefix.len();
    if t0 == 0 || t0 >= horizon {
        return Err(invalid(format!(
            "need 1 <= T0 < T, got T0={t0}, T={horizon}"
        )));
    }
    if prefix.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
        return Err(invalid("prefix demands must be positive"));
    }
    let seen: f64 = prefix.iter().sum();
    if !(eps > 0.0) {
        return Err(invalid(format!("epsilon must be > 0, got {eps}")));
    }
    if eps > prediction / 2.0 {
        return Err(invalid(format!(
            "epsilon {eps} exceeds half the prediction {prediction}"
        )));
    }
    if !(prediction - eps - seen > 0.0) {
        return Err(invalid(format!(
            "prediction minus epsilon ({}) must exceed the observed demand {seen}",
            prediction - eps
        )));
    }
    let ratio = (prediction - eps) / (prediction + eps);
    let budget = prediction - eps;
    let remaining = (horizon - t0) as f64;
    let build = |total: f64| {
        let tail = (total - seen) / remaining;
        let values = prefix
            .iter()
            .copied()
            .chain(std::iter::repeat(tail).take(horizon - t0))
            .collect();
        EnvironmentSpec {
            rewards: vec![1.0, (1.0 + ratio) / 2.0, 0.0],
            costs: vec![vec![1.0], vec![ratio], vec![0.0]],
            null_index: 2,
            normalized_budget: budget / horizon as f64,
            horizon,
            demand: DemandModel::Fixed { values },
            noise: OutcomeNoise::Deterministic,
        }
    };
    Ok(LowerBoundPair {
        first: build(prediction - eps),
        second: build(prediction + eps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lemma2_instances() {
        let i1 = fixture_lemma2(1, 8).unwrap();
        let i2 = fixture_lemma2(2, 8).unwrap();
        assert_eq!(i1.budget(), 4.0);
        let DemandModel::Fixed { values } = &i1.demand else {
            panic!()
        };
        assert_eq!(
            values,
            &[1.0, 1.0, 1.0, 1.0, 0.0625, 0.0625, 0.0625, 0.0625]
        );
        let DemandModel::Fixed { values } = &i2.demand else {
            panic!()
        };
        assert_eq!(values, &[1.0; 8]);
        assert!(i1.validate().is_ok() && i2.validate().is_ok());
        assert!(fixture_lemma2(1, 7).is_err());
        assert!(fixture_lemma2(3, 8).is_err());
    }

    #[test]
    fn thm1_pair_parameters() {
        let prefix = vec![5.0; 4];
        let pair = fixture_thm1_pair(&prefix, 100.0, 20.0, 10).unwrap();
        assert_abs_diff_eq!(pair.first.costs[1][0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pair.first.budget(), 80.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.second.budget(), 80.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.first.rewards[1], 5.0 / 6.0, epsilon = 1e-15);
        let total = |s: &EnvironmentSpec| match &s.demand {
            DemandModel::Fixed { values } => values.iter().sum::<f64>(),
            _ => unreachable!(),
        };
        assert_abs_diff_eq!(total(&pair.first), 80.0, epsilon = 1e-12);
        assert_abs_diff_eq!(total(&pair.second), 120.0, epsilon = 1e-12);
        assert!(pair.first.validate().is_ok());
    }

    #[test]
    fn thm1_pair_rejects_infeasible_epsilon() {
        let prefix = vec![5.0; 4];
        assert!(fixture_thm1_pair(&prefix, 100.0, 0.0, 10).is_err());
        assert!(fixture_thm1_pair(&prefix, 100.0, 60.0, 10).is_err());
        assert!(fixture_thm1_pair(&prefix, 30.0, 12.0, 10).is_err());
        assert!(fixture_thm1_pair(&prefix, 100.0, 20.0, 4).is_err());
    }
}
