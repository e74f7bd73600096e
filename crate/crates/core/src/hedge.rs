//! Scale-free AdaHedge over the probability simplex.
//!
//! Weights are `softmax(θ / η)` where `θ` is the negated cumulative gradient
//! and `η` grows by the mixability gap of every round divided by
//! `κ² = ln m`. While `η = 0` the weights are the follow-the-leader limit:
//! uniform over the coordinates that maximize `θ`.

use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaHedge<T = f64> {
    theta: Vec<T>,
    eta: T,
    kappa_sq: T,
    weights: Vec<T>,
    steps: usize,
}

impl<T: Real> AdaHedge<T> {
    /// A fresh learner over `dims >= 2` coordinates with uniform weights.
    pub fn new(dims: usize) -> Result<Self> {
        if dims < 2 {
            return Err(invalid(format!(
                "AdaHedge needs at least 2 coordinates, got {dims}"
            )));
        }
        let m = T::from_usize(dims).expect("dims fits");
        Ok(Self {
            theta: vec![T::zero(); dims],
            eta: T::zero(),
            kappa_sq: m.ln(),
            weights: vec![m.recip(); dims],
            steps: 0,
        })
    }

    pub fn dims(&self) -> usize {
        self.theta.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    /// `κ = sqrt(ln m)`.
    pub fn kappa(&self) -> T {
        self.kappa_sq.sqrt()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Mixability gap of `g` against the current weights.
    pub fn mixability_gap(&self, g: &[T]) -> T {
        let dot = dot(g, &self.weights);
        let rho = if self.steps == 0 {
            dot - min_over(g, |_| true)
        } else {
            // Only coordinates with positive weight take part in the log-sum-exp.
            let floor = min_over(g, |j| self.weights[j] > T::zero());
            if self.eta > T::zero() {
                let mix = self
                    .weights
                    .iter()
                    .zip(g)
                    .filter(|(w, _)| **w > T::zero())
                    .fold(T::zero(), |acc, (&w, &gj)| {
                        acc + w * (-(gj - floor) / self.eta).exp()
                    });
                dot - floor + self.eta * mix.ln()
            } else {
                dot - floor
            }
        };
        rho.max(T::zero())
    }

    /// Feeds the linear loss `g` and returns the round's mixability gap.
    pub fn step(&mut self, g: &[T]) -> Result<T> {
        if g.len() != self.dims() {
            return Err(invalid(format!(
                "gradient has {} coordinates, expected {}",
                g.len(),
                self.dims()
            )));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(invalid("gradient must be finite"));
        }
        let rho = self.mixability_gap(g);
        for (th, &gj) in self.theta.iter_mut().zip(g) {
            *th = *th - gj;
        }
        self.eta = self.eta + rho / self.kappa_sq;
        self.steps += 1;
        self.refresh_weights();
        Ok(rho)
    }

    fn refresh_weights(&mut self) {
        let top = self.theta.iter().copied().fold(T::neg_infinity(), T::max);
        if self.eta > T::zero() {
            let mut total = T::zero();
            for (w, &th) in self.weights.iter_mut().zip(&self.theta) {
                *w = ((th - top) / self.eta).exp();
                total = total + *w;
            }
            self.weights.iter_mut().for_each(|w| *w = *w / total);
        } else {
            let leaders = self.theta.iter().filter(|&&th| th == top).count();
            let share = T::one() / T::from_usize(leaders).expect("count fits");
            for (w, &th) in self.weights.iter_mut().zip(&self.theta) {
                *w = if th == top { share } else { T::zero() };
            }
        }
    }
}

/// `2 sqrt((4 + ln m) Σ_t ‖g_t‖_∞²)`, the regret certificate for AdaHedge with `κ = sqrt(ln m)`.
pub fn hedge_regret_bound<T: Real, G: AsRef<[T]>>(gradients: &[G], dims: usize) -> T {
    let sum_sq = gradients.iter().fold(T::zero(), |acc, g| {
        let sup = g.as_ref().iter().fold(T::zero(), |m, x| m.max(x.abs()));
        acc + sup * sup
    });
    let m = T::from_usize(dims).expect("dims fits");
    T::lit(2.0) * ((T::lit(4.0) + m.ln()) * sum_sq).sqrt()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn min_over<T: Real>(g: &[T], keep: impl Fn(usize) -> bool) -> T {
    g.iter()
        .enumerate()
        .filter(|(j, _)| keep(*j))
        .fold(T::infinity(), |m, (_, &x)| m.min(x))
}
