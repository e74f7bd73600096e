//! Gaussian outcomes truncated to `[0, 1]`, calibrated so the post-truncation
//! mean hits a target.

use rand::Rng;
use statrs::function::erf::erfc;

use crate::error::{config, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `ln Φ(x)`, accurate far into the lower tail.
fn ln_cdf(x: f64) -> f64 {
    if x > -5.0 {
        (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
    } else {
        ln_pdf(x) + lower_mills(-x).ln()
    }
}

/// `Φ(-t) / φ(t)` for `t >= 5` by the Laplace continued fraction.
fn lower_mills(t: f64) -> f64 {
    let mut acc = t;
    for k in (1..=60).rev() {
        acc = t + k as f64 / acc;
    }
    1.0 / acc
}

/// Standard normal restricted to `[a, b]`.
#[derive(Debug, Clone, Copy)]
struct StdInterval {
    a: f64,
    b: f64,
    /// True when the interval was reflected so that it sits in the lower tail.
    mirrored: bool,
    ln_cdf_a: f64,
    ln_cdf_b: f64,
}

impl StdInterval {
    fn new(a: f64, b: f64) -> Self {
        let (a, b, mirrored) = if a + b > 0.0 {
            (-b, -a, true)
        } else {
            (a, b, false)
        };
        Self {
            a,
            b,
            mirrored,
            ln_cdf_a: ln_cdf(a),
            ln_cdf_b: ln_cdf(b),
        }
    }

    fn mean(&self) -> f64 {
        let ratio = (self.ln_cdf_a - self.ln_cdf_b).exp();
        let num = (ln_pdf(self.a) - self.ln_cdf_b).exp() - (ln_pdf(self.b) - self.ln_cdf_b).exp();
        let m = num / (1.0 - ratio);
        if self.mirrored {
            -m
        } else {
            m
        }
    }

    /// Inverse-CDF draw solved in log space by Newton's method.
    fn quantile(&self, u: f64) -> f64 {
        let ratio = (self.ln_cdf_a - self.ln_cdf_b).exp();
        let target = self.ln_cdf_b + (ratio + u * (1.0 - ratio)).ln();
        let mut z = self.b;
        for _ in 0..100 {
            let lc = ln_cdf(z);
            let step = (lc - target) / (ln_pdf(z) - lc).exp();
            let next = (z - step).clamp(self.a, self.b);
            if (next - z).abs() <= 1e-13 * (1.0 + z.abs()) {
                z = next;
                break;
            }
            z = next;
        }
        if self.mirrored {
            -z
        } else {
            z
        }
    }
}

/// `N(location, sigma²)` truncated to `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedUnitGaussian {
    location: f64,
    sigma: f64,
    interval: StdInterval,
}

impl TruncatedUnitGaussian {
    pub fn new(location: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !location.is_finite() {
            return Err(config(format!(
                "truncated gaussian needs finite location and sigma > 0 (got {location}, {sigma})"
            )));
        }
        let interval = StdInterval::new(-location / sigma, (1.0 - location) / sigma);
        Ok(Self {
            location,
            sigma,
            interval,
        })
    }

    /// Finds the location whose truncated mean equals `target` (to 1e-12) by bisection.
    pub fn calibrated(target: f64, sigma: f64) -> Result<Self> {
        if !(target > 0.0 && target < 1.0) {
            return Err(config(format!(
                "target mean must lie in (0,1), got {target}"
            )));
        }
        let mean_at = |loc: f64| Self::new(loc, sigma).map(|d| d.mean());
        let (mut lo, mut hi) = (-1.0, 2.0);
        while mean_at(lo)? > target {
            lo = 2.0 * lo - 1.0;
            if lo < -1e7 {
                return Err(config(format!("cannot calibrate truncated mean {target}")));
            }
        }
        while mean_at(hi)? < target {
            hi = 2.0 * hi;
            if hi > 1e7 {
                return Err(config(format!("cannot calibrate truncated mean {target}")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let m = mean_at(mid)?;
            if (m - target).abs() < 1e-13 {
                return Self::new(mid, sigma);
            }
            if m < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::new(0.5 * (lo + hi), sigma)
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> f64 {
        (self.location + self.sigma * self.interval.mean()).clamp(0.0, 1.0)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        (self.location + self.sigma * self.interval.quantile(u)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy)]
enum Coordinate {
    Fixed(f64),
    Gaussian(TruncatedUnitGaussian),
}

impl Coordinate {
    fn calibrated(target: f64, sigma: Option<f64>) -> Result<Self> {
        match sigma {
            _ if target == 0.0 || target == 1.0 => Ok(Coordinate::Fixed(target)),
            None if (0.0..=1.0).contains(&target) => Ok(Coordinate::Fixed(target)),
            Some(s) => TruncatedUnitGaussian::calibrated(target, s).map(Coordinate::Gaussian),
            None => Err(config(format!("mean {target} outside [0,1]"))),
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            Coordinate::Fixed(v) => *v,
            Coordinate::Gaussian(g) => g.sample(rng),
        }
    }

    fn mean(&self) -> f64 {
        match self {
            Coordinate::Fixed(v) => *v,
            Coordinate::Gaussian(g) => g.mean(),
        }
    }
}

/// Per-action sampler of per-unit outcomes `(R, C_1, ..., C_d)`.
///
/// With `sigma = None` outcomes are deterministic and equal to the means.
#[derive(Debug, Clone)]
pub struct OutcomeSampler {
    coords: Vec<Vec<Coordinate>>,
    null_index: usize,
}

impl OutcomeSampler {
    pub fn new(
        rewards: &[f64],
        costs: &[Vec<f64>],
        null_index: usize,
        sigma: Option<f64>,
    ) -> Result<Self> {
        let coords = rewards
            .iter()
            .zip(costs)
            .enumerate()
            .map(|(a, (&r, c))| {
                if a == null_index {
                    return Ok(vec![Coordinate::Fixed(0.0); c.len() + 1]);
                }
                std::iter::once(r)
                    .chain(c.iter().copied())
                    .map(|m| Coordinate::calibrated(m, sigma))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coords, null_index })
    }

    /// Draws `(R, C)` for `action`.
    pub fn sample(&self, action: usize, rng: &mut impl Rng) -> (f64, Vec<f64>) {
        let coords = &self.coords[action];
        let reward = coords[0].sample(rng);
        let costs = coords[1..].iter().map(|c| c.sample(rng)).collect();
        (reward, costs)
    }

    /// Post-truncation means `(r, c)` the sampler realizes for `action`.
    pub fn means(&self, action: usize) -> (f64, Vec<f64>) {
        let coords = &self.coords[action];
        (
            coords[0].mean(),
            coords[1..].iter().map(Coordinate::mean).collect(),
        )
    }

    pub fn null_index(&self) -> usize {
        self.null_index
    }
}
