//! Demand-volume generators and per-unit outcome samplers.

mod fixtures;
mod truncnorm;

pub use fixtures::{fixture_lemma2, fixture_thm1_pair, LowerBoundPair};
pub use truncnorm::{OutcomeSampler, TruncatedUnitGaussian};

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::rng::{self, StreamRng};

/// `q_t = α + β t + ξ_t` with `ξ_t` uniform on `[-M, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearDemandParams {
    pub alpha: f64,
    pub beta: f64,
    pub noise: f64,
}

impl LinearDemandParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(config(format!(
                "linear demand: noise half-width must be >= 0, got {}",
                self.noise
            )));
        }
        if !(self.alpha > self.noise) {
            return Err(config(format!(
                "linear demand: need alpha > M so demand stays positive (alpha={}, M={})",
                self.alpha, self.noise
            )));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(config(format!(
                "linear demand: beta must be > 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn mean_at(&self, t: usize) -> f64 {
        self.alpha + self.beta * t as f64
    }
}

/// `q_t = α + β q_{t-1} + ξ_t` with `ξ_t ~ N(0, σ²)`, started from `initial`
/// (the value preceding round 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar1DemandParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    /// Defaults to the stationary mean `α / (1 - β)`.
    #[serde(default)]
    pub initial: Option<f64>,
}

impl Ar1DemandParams {
    pub fn new(alpha: f64, beta: f64, sigma: f64) -> Self {
        Self {
            alpha,
            beta,
            sigma,
            initial: None,
        }
    }

    pub fn stationary_mean(&self) -> f64 {
        self.alpha / (1.0 - self.beta)
    }

    pub fn initial_value(&self) -> f64 {
        self.initial.unwrap_or_else(|| self.stationary_mean())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(config(format!(
                "AR(1) demand: alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.beta.abs() < 1.0) {
            return Err(config(format!(
                "AR(1) demand: need |beta| < 1, got {}",
                self.beta
            )));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(config(format!(
                "AR(1) demand: sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(self.initial_value() >= 0.0) {
            return Err(config("AR(1) demand: initial value must be >= 0"));
        }
        Ok(())
    }

    /// Half-width `σ sqrt(2 ln(2/δ) / (1 - β²))` of the high-probability band.
    fn band(&self, delta: f64) -> f64 {
        self.sigma * (2.0 / (1.0 - self.beta * self.beta) * (2.0 / delta).ln()).sqrt()
    }

    /// High-probability demand range `[q_lo, q_hi]` at confidence `δ`.
    pub fn bounds(&self, delta: f64) -> (f64, f64) {
        let (a, b) = (self.initial_value(), self.stationary_mean());
        let w = self.band(delta);
        (a.min(b) - w, a.max(b) + w)
    }

    /// Whether the positivity condition `min{q_1, α/(1-β)} > band(δ)` holds.
    pub fn positivity_holds(&self, delta: f64) -> bool {
        self.initial_value().min(self.stationary_mean()) > self.band(delta)
    }
}

/// Demand sequence plus the number of AR(1) draws that were floored at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSequence {
    pub values: Vec<f64>,
    pub floored: usize,
}

impl DemandSequence {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

pub fn gen_linear(
    params: &LinearDemandParams,
    horizon: usize,
    rng: &mut impl Rng,
) -> Result<DemandSequence> {
    params.validate()?;
    let m = params.noise;
    let values = if m > 0.0 {
        let noise = Uniform::new_inclusive(-m, m).map_err(|e| config(e.to_string()))?;
        (1..=horizon)
            .map(|t| params.mean_at(t) + noise.sample(rng))
            .collect()
    } else {
        (1..=horizon).map(|t| params.mean_at(t)).collect()
    };
    Ok(DemandSequence { values, floored: 0 })
}

pub fn gen_ar1(
    params: &Ar1DemandParams,
    horizon: usize,
    rng: &mut impl Rng,
) -> Result<DemandSequence> {
    params.validate()?;
    let noise = Normal::new(0.0, params.sigma).map_err(|e| config(e.to_string()))?;
    let mut prev = params.initial_value();
    let mut floored = 0;
    let values = (0..horizon)
        .map(|_| {
            let mut q = params.alpha + params.beta * prev;
            if params.sigma > 0.0 {
                q += noise.sample(rng);
            }
            if q < 0.0 {
                floored += 1;
                q = 0.0;
            }
            prev = q;
            q
        })
        .collect();
    Ok(DemandSequence { values, floored })
}

/// Demand process of an environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DemandModel {
    Linear(LinearDemandParams),
    Ar1(Ar1DemandParams),
    /// A fixed sequence; its length must equal the horizon.
    Fixed {
        values: Vec<f64>,
    },
}

impl DemandModel {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        match self {
            DemandModel::Linear(p) => p.validate(),
            DemandModel::Ar1(p) => p.validate(),
            DemandModel::Fixed { values } => {
                if values.len() != horizon {
                    return Err(config(format!(
                        "fixed demand has {} values for a horizon of {horizon}",
                        values.len()
                    )));
                }
                if values.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
                    return Err(config("fixed demand values must be finite and >= 0"));
                }
                Ok(())
            }
        }
    }

    pub fn generate(&self, horizon: usize, rng: &mut impl Rng) -> Result<DemandSequence> {
        match self {
            DemandModel::Linear(p) => gen_linear(p, horizon, rng),
            DemandModel::Ar1(p) => gen_ar1(p, horizon, rng),
            DemandModel::Fixed { values } => {
                self.validate(horizon)?;
                Ok(DemandSequence {
                    values: values.clone(),
                    floored: 0,
                })
            }
        }
    }

    /// Generates from the demand stream of `seed`.
    pub fn generate_seeded(&self, horizon: usize, seed: u64) -> Result<DemandSequence> {
        let mut rng: StreamRng = rng::stream(seed, &[rng::tag::DEMAND]);
        self.generate(horizon, &mut rng)
    }

    /// Human-readable description of the noise distribution in use.
    pub fn noise_description(&self) -> &'static str {
        match self {
            DemandModel::Linear(_) => "uniform[-M, M]",
            DemandModel::Ar1(_) => "normal(0, sigma^2), floored at 0",
            DemandModel::Fixed { .. } => "none",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn noiseless_linear_is_exact() {
        let p = LinearDemandParams {
            alpha: 2.0,
            beta: 3.0,
            noise: 0.0,
        };
        let q = gen_linear(&p, 10, &mut stream(1, &[])).unwrap();
        assert_eq!(q.values[0], 5.0);
        assert_eq!(q.values[9], 32.0);
        assert_eq!(q.total(), 185.0);
    }

    #[test]
    fn linear_stays_in_band_and_is_positive() {
        let p = LinearDemandParams {
            alpha: 5.0,
            beta: 0.5,
            noise: 2.0,
        };
        let q = gen_linear(&p, 1000, &mut stream(2, &[])).unwrap();
        for (i, &v) in q.values.iter().enumerate() {
            let mean = p.mean_at(i + 1);
            assert!(v >= mean - 2.0 && v <= mean + 2.0 && v > 0.0);
        }
    }

    #[test]
    fn linear_mean_matches_model() {
        // Monte-Carlo: mean of q_t over n replications within 4σ/√n of α + βt.
        let p = LinearDemandParams {
            alpha: 5.0,
            beta: 0.5,
            noise: 2.0,
        };
        let n = 10_000;
        let mut rng = stream(3, &[]);
        let mut sums = [0.0; 5];
        for _ in 0..n {
            let q = gen_linear(&p, 5, &mut rng).unwrap();
            for (s, v) in sums.iter_mut().zip(&q.values) {
                *s += v;
            }
        }
        let sd = 2.0 / 3f64.sqrt();
        for (i, s) in sums.iter().enumerate() {
            assert!((s / n as f64 - p.mean_at(i + 1)).abs() < 4.0 * sd / (n as f64).sqrt());
        }
    }

    #[test]
    fn linear_rejects_nonpositive_demand() {
        let bad = LinearDemandParams {
            alpha: 1.0,
            beta: 0.5,
            noise: 2.0,
        };
        assert!(gen_linear(&bad, 3, &mut stream(0, &[])).is_err());
        let flat = LinearDemandParams {
            alpha: 3.0,
            beta: 0.0,
            noise: 1.0,
        };
        assert!(flat.validate().is_err());
    }

    #[test]
    fn ar1_fixed_point_and_transient() {
        let mut p = Ar1DemandParams::new(12.0, 0.5, 0.0);
        let q = gen_ar1(&p, 20, &mut stream(0, &[])).unwrap();
        assert!(q.values.iter().all(|&v| v == 24.0));

        p.initial = Some(0.0);
        let q = gen_ar1(&p, 60, &mut stream(0, &[])).unwrap();
        assert_eq!(&q.values[..4], &[12.0, 18.0, 21.0, 22.5]);
        assert_abs_diff_eq!(q.values[59], 24.0, epsilon = 1e-12);
    }

    #[test]
    fn ar1_long_run_mean() {
        let p = Ar1DemandParams::new(12.0, 0.5, 2.0);
        let q = gen_ar1(&p, 200_000, &mut stream(5, &[])).unwrap();
        let mean = q.total() / q.values.len() as f64;
        // Long-run std of the mean is σ / (1 - β) / √n ≈ 0.009.
        assert!((mean - 24.0).abs() < 0.05, "mean {mean}");
        assert_eq!(q.floored, 0);
    }

    #[test]
    fn ar1_floors_negative_draws() {
        let p = Ar1DemandParams {
            alpha: 0.1,
            beta: 0.0,
            sigma: 5.0,
            initial: None,
        };
        let q = gen_ar1(&p, 500, &mut stream(9, &[])).unwrap();
        assert!(q.floored > 0);
        assert!(q.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn ar1_bounds_cover_most_runs() {
        let p = Ar1DemandParams::new(12.0, 0.5, 2.0);
        let horizon = 500;
        let delta = 1e-3;
        assert!(p.positivity_holds(delta));
        let (lo, hi) = p.bounds(delta);
        let reps = 200;
        let inside = (0..reps)
            .filter(|&r| {
                let q = gen_ar1(&p, horizon, &mut stream(r, &[11])).unwrap();
                q.values.iter().all(|&v| lo <= v && v <= hi)
            })
            .count();
        let allowed = 1.0 - 3.0 * horizon as f64 * delta;
        assert!(inside as f64 / reps as f64 >= allowed.max(0.0));
    }

    #[test]
    fn fixed_demand_length_checked() {
        let m = DemandModel::Fixed {
            values: vec![1.0; 3],
        };
        assert!(m.generate_seeded(4, 0).is_err());
        assert_eq!(m.generate_seeded(3, 0).unwrap().values, vec![1.0; 3]);
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let m = DemandModel::Ar1(Ar1DemandParams::new(12.0, 0.5, 2.0));
        assert_eq!(
            m.generate_seeded(50, 4).unwrap(),
            m.generate_seeded(50, 4).unwrap()
        );
        assert_ne!(
            m.generate_seeded(50, 4).unwrap(),
            m.generate_seeded(50, 5).unwrap()
        );
    }
}
