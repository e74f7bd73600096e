//! Bandits with knapsacks under time-varying demand, with online predictions
//! of the total demand.
//!
//! The simulator plays a policy against an environment whose per-round
//! rewards and consumptions are per-unit outcomes scaled by an exogenous
//! demand volume `q_t`. Policies may consult a [`PredictionOracle`] for a
//! forecast of the total demand. Runs are judged against the fluid LP
//! benchmark solved by [`lp::solve_opt_lp`].
//!
//! Numerical kernels are generic over the scalar type; the aliases at the
//! crate root fix it to `f64`.

pub mod baselines;
pub mod confidence;
pub mod demand;
pub mod error;
pub mod hedge;
pub mod lp;
pub mod model;
pub mod nrm;
pub mod oaucb;
pub mod oracles;
pub mod rng;
pub mod scalar;

pub use baselines::{sliding_window_ucb, GreedyUcb, PdbConfig, PrimalDualBwk};
pub use confidence::{rad, ArmStatistics, ConfidenceParams};
pub use demand::{
    Ar1DemandParams, DemandModel, DemandSequence, LinearDemandParams, OutcomeSampler,
};
pub use error::{Error, Result};
pub use hedge::{hedge_regret_bound, AdaHedge};
pub use lp::{enumerate_vertices_oracle, opt_lp_value, solve_opt_lp, LpSolution, LpStatus};
pub use model::{
    compute_metrics, run_with_demand, simulate_run, BwkEnvironment, Environment, EnvironmentSpec,
    Metrics, Outcome, OutcomeNoise, Policy, ProblemShape, RoundContext, RoundFeedback,
    TrajectoryLog,
};
pub use nrm::{nrm_opt_lp, ChoiceModel, NrmEnvironment, NrmSpec, OaUcbDp, OaUcbDpConfig};
pub use oaucb::{OaUcb, OaUcbConfig, PredictionSource};
pub use oracles::{Ar1RidgeOracle, LeastSquaresOracle, PowerOfTwo, PredictionOracle, StaticOracle};
pub use scalar::{LpField, Real};

/// Per-arm statistics in double precision.
pub type ArmStats = ArmStatistics<f64>;
/// Confidence parameters in double precision.
pub type Confidence = ConfidenceParams<f64>;
/// AdaHedge in double precision.
pub type Hedge = AdaHedge<f64>;
