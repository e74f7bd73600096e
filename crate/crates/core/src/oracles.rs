//! Prediction oracles producing `Q̂_t`, a forecast of the total demand
//! `Q = Σ_{s≤T} q_s`, from the demand prefix `q_1..q_{t-1}`.
//!
//! The estimators are written against [`Real`] so they can be evaluated in
//! `f32` or `f64`; the oracle objects used by the simulator work in `f64`.

use crate::scalar::Real;

/// A forecaster of the total demand.
///
/// `predict` receives the full prefix each round. Implementations may keep
/// incremental state that assumes successive calls extend the same prefix;
/// `reset` starts a new sequence.
pub trait PredictionOracle {
    fn predict(&mut self, prefix: &[f64], t: usize, horizon: usize) -> f64;
    fn reset(&mut self);
    fn label(&self) -> String;
}

impl<O: PredictionOracle + ?Sized> PredictionOracle for Box<O> {
    fn predict(&mut self, prefix: &[f64], t: usize, horizon: usize) -> f64 {
        (**self).predict(prefix, t, horizon)
    }
    fn reset(&mut self) {
        (**self).reset()
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

/// Extrapolates the empirical mean of the prefix, or `prior` per round when
/// nothing has been observed yet.
pub fn mean_extrapolation<T: Real>(sum: T, count: usize, horizon: usize, prior: T) -> T {
    let per_round = if count == 0 {
        prior
    } else {
        sum / T::lit(count as f64)
    };
    per_round * T::lit(horizon as f64)
}

/// Running sums for the least-squares line fit `q_s ≈ α + β s`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LineFit<T = f64> {
    n: usize,
    sum_q: T,
    sum_sq: T,
}

impl<T: Real> LineFit<T> {
    pub fn new() -> Self {
        Self {
            n: 0,
            sum_q: T::zero(),
            sum_sq: T::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Appends `q_{n+1}`.
    pub fn push(&mut self, q: T) {
        self.n += 1;
        self.sum_q = self.sum_q + q;
        self.sum_sq = self.sum_sq + T::lit(self.n as f64) * q;
    }

    pub fn observed_total(&self) -> T {
        self.sum_q
    }

    /// `(α̂, β̂)`, defined once at least two points are in.
    pub fn coefficients(&self) -> Option<(T, T)> {
        if self.n < 2 {
            return None;
        }
        let n = T::lit(self.n as f64);
        let nf = self.n as f64;
        // Σs and Σs² over s = 1..n in closed form.
        let sum_s = T::lit(nf * (nf + 1.0) / 2.0);
        let sxx = T::lit(nf * (nf * nf - 1.0) / 12.0);
        let sxy = self.sum_sq - sum_s * self.sum_q / n;
        let beta = sxy / sxx;
        let alpha = (self.sum_q - beta * sum_s) / n;
        Some((alpha, beta))
    }

    /// `Σ_{s<t} q_s + Σ_{s=t}^{T} (α̂ + β̂ s)` for `t = n + 1`, falling back to
    /// mean extrapolation while `t ≤ 3`.
    pub fn predict_total(&self, horizon: usize, prior: T) -> T {
        let t = self.n + 1;
        match self.coefficients() {
            Some((alpha, beta)) if t >= 4 && t <= horizon => {
                let remaining = (horizon - t + 1) as f64;
                let future_s = (t + horizon) as f64 * remaining / 2.0;
                self.sum_q + alpha * T::lit(remaining) + beta * T::lit(future_s)
            }
            Some(_) if t > horizon => self.sum_q,
            _ => mean_extrapolation(self.sum_q, self.n, horizon, prior),
        }
    }
}

/// Least-squares forecast for the prefix in one call.
pub fn ls_linear_predict<T: Real>(prefix: &[T], horizon: usize, prior: T) -> T {
    let mut fit = LineFit::new();
    prefix.iter().for_each(|&q| fit.push(q));
    fit.predict_total(horizon, prior)
}

/// Ridge regression state for the AR(1) fit `q_s ≈ α + β q_{s-1}`, `q_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeState<T = f64> {
    lambda: T,
    /// Upper triangle of the symmetric 2×2 matrix `V`.
    v: [T; 3],
    zeta: [T; 2],
    last: T,
    sum_q: T,
    n: usize,
}

/// Bound on `|β̂|` so that `1 − β̂` stays away from zero.
pub const AR1_BETA_CLAMP: f64 = 0.999;

impl<T: Real> RidgeState<T> {
    pub fn new(lambda: T) -> Self {
        Self {
            lambda,
            v: [lambda, T::zero(), lambda],
            zeta: [T::zero(); 2],
            last: T::zero(),
            sum_q: T::zero(),
            n: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// `V` as a full matrix.
    pub fn gram(&self) -> [[T; 2]; 2] {
        [[self.v[0], self.v[1]], [self.v[1], self.v[2]]]
    }

    pub fn zeta(&self) -> [T; 2] {
        self.zeta
    }

    /// Adds the regression pair `(z_{s-1}, q_s)`.
    pub fn push(&mut self, q: T) {
        let prev = self.last;
        self.v[0] = self.v[0] + T::one();
        self.v[1] = self.v[1] + prev;
        self.v[2] = self.v[2] + prev * prev;
        self.zeta[0] = self.zeta[0] + q;
        self.zeta[1] = self.zeta[1] + prev * q;
        self.last = q;
        self.sum_q = self.sum_q + q;
        self.n += 1;
    }

    /// `γ̂ = V⁻¹ζ = (α̂, β̂)`, unclamped.
    pub fn coefficients(&self) -> (T, T) {
        let [a, b, d] = self.v;
        let det = a * d - b * b;
        let alpha = (d * self.zeta[0] - b * self.zeta[1]) / det;
        let beta = (a * self.zeta[1] - b * self.zeta[0]) / det;
        (alpha, beta)
    }

    /// Forecast of `Q` for `t = n + 1`. Uses mean extrapolation while
    /// `t ≤ 2`; afterwards the AR(1) plug-in
    /// `Σ_{s<t} q_s + (β̂ − β̂ⁿ)/(1 − β̂)·q_{t−1} + φ̂(n − β̂ + β̂ⁿ⁺¹)`
    /// with `n = T − t + 1` and `φ̂ = α̂/(1 − β̂)`.
    pub fn predict_total(&self, horizon: usize, prior: T) -> T {
        let t = self.n + 1;
        if t <= 2 {
            return mean_extrapolation(self.sum_q, self.n, horizon, prior);
        }
        if t > horizon {
            return self.sum_q;
        }
        let (alpha, beta) = self.coefficients();
        let clamp = T::lit(AR1_BETA_CLAMP);
        ar1_plugin_total(
            self.sum_q,
            self.last,
            alpha,
            beta.max(-clamp).min(clamp),
            horizon - t + 1,
        )
    }
}

/// `observed + (β − βⁿ)/(1 − β)·last + φ(n − β + βⁿ⁺¹)` with `φ = α/(1 − β)`,
/// where `n` is the number of rounds still to come.
pub fn ar1_plugin_total<T: Real>(observed: T, last: T, alpha: T, beta: T, n: usize) -> T {
    let one = T::one();
    let phi = alpha / (one - beta);
    let beta_n = beta.powi(n as i32);
    let carry = (beta - beta_n) / (one - beta) * last;
    let level = phi * (T::lit(n as f64) - beta + beta_n * beta);
    observed + carry + level
}

/// AR(1) ridge forecast for the prefix in one call.
pub fn ar1_ridge_predict<T: Real>(prefix: &[T], horizon: usize, lambda: T, prior: T) -> T {
    let mut state = RidgeState::new(lambda);
    prefix.iter().for_each(|&q| state.push(q));
    state.predict_total(horizon, prior)
}

/// How much of the demand prefix an incremental estimator has absorbed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Seen {
    len: usize,
    last: f64,
}

/// Brings an incremental estimator up to date with `prefix`, restarting it
/// if the prefix is shorter than, or visibly diverges from, what was seen.
fn sync<S>(
    state: &mut S,
    seen: &mut Seen,
    prefix: &[f64],
    fresh: impl Fn() -> S,
    push: impl Fn(&mut S, f64),
) {
    if prefix.len() < seen.len || (seen.len > 0 && prefix[seen.len - 1] != seen.last) {
        *state = fresh();
        *seen = Seen::default();
    }
    for &q in &prefix[seen.len..] {
        push(state, q);
    }
    if let Some(&last) = prefix.last() {
        *seen = Seen {
            len: prefix.len(),
            last,
        };
    }
}

/// Least-squares linear-trend oracle.
#[derive(Debug, Clone)]
pub struct LeastSquaresOracle {
    prior: f64,
    fit: LineFit<f64>,
    seen: Seen,
}

impl LeastSquaresOracle {
    /// `prior` is the per-round demand assumed before any observation.
    pub fn new(prior: f64) -> Self {
        Self {
            prior,
            fit: LineFit::new(),
            seen: Seen::default(),
        }
    }
}

impl PredictionOracle for LeastSquaresOracle {
    fn predict(&mut self, prefix: &[f64], _t: usize, horizon: usize) -> f64 {
        sync(
            &mut self.fit,
            &mut self.seen,
            prefix,
            LineFit::new,
            LineFit::push,
        );
        self.fit.predict_total(horizon, self.prior)
    }
    fn reset(&mut self) {
        self.fit = LineFit::new();
        self.seen = Seen::default();
    }
    fn label(&self) -> String {
        "least-squares".into()
    }
}

/// AR(1) ridge-regression oracle.
#[derive(Debug, Clone)]
pub struct Ar1RidgeOracle {
    prior: f64,
    lambda: f64,
    state: RidgeState<f64>,
    seen: Seen,
}

impl Ar1RidgeOracle {
    pub fn new(lambda: f64, prior: f64) -> Self {
        Self {
            prior,
            lambda,
            state: RidgeState::new(lambda),
            seen: Seen::default(),
        }
    }
}

impl PredictionOracle for Ar1RidgeOracle {
    fn predict(&mut self, prefix: &[f64], _t: usize, horizon: usize) -> f64 {
        let lambda = self.lambda;
        sync(
            &mut self.state,
            &mut self.seen,
            prefix,
            || RidgeState::new(lambda),
            RidgeState::push,
        );
        self.state.predict_total(horizon, self.prior)
    }
    fn reset(&mut self) {
        self.state = RidgeState::new(self.lambda);
        self.seen = Seen::default();
    }
    fn label(&self) -> String {
        "ar1-ridge".into()
    }
}

/// Refreshes the inner forecast only at `t = 1` and `t = 2^k`, holding the
/// last value in between.
#[derive(Debug, Clone)]
pub struct PowerOfTwo<O> {
    inner: O,
    held: Option<f64>,
}

impl<O: PredictionOracle> PowerOfTwo<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, held: None }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: PredictionOracle> PredictionOracle for PowerOfTwo<O> {
    fn predict(&mut self, prefix: &[f64], t: usize, horizon: usize) -> f64 {
        match self.held {
            Some(value) if !t.is_power_of_two() => value,
            _ => {
                let value = self.inner.predict(prefix, t, horizon);
                self.held = Some(value);
                value
            }
        }
    }
    fn reset(&mut self) {
        self.inner.reset();
        self.held = None;
    }
    fn label(&self) -> String {
        format!("pow2({})", self.inner.label())
    }
}

/// Returns a fixed value every round: `Q + xT` for an offset `x`, with
/// `x = 0` being the clairvoyant oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticOracle {
    value: f64,
    label: String,
}

impl StaticOracle {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            label: "static".into(),
        }
    }

    pub fn clairvoyant(total: f64) -> Self {
        Self {
            value: total,
            label: "clairvoyant".into(),
        }
    }

    pub fn offset(total: f64, x: f64, horizon: usize) -> Self {
        Self {
            value: total + x * horizon as f64,
            label: format!("{x:+}T"),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl PredictionOracle for StaticOracle {
    fn predict(&mut self, _prefix: &[f64], _t: usize, _horizon: usize) -> f64 {
        self.value
    }
    fn reset(&mut self) {}
    fn label(&self) -> String {
        self.label.clone()
    }
}
