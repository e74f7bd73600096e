//! Replicated runs over the configuration grid, aggregation, and oracle traces.
//!
//! Replication `r` derives its seed from the master seed alone, so every
//! policy, oracle, and grid cell in that replication sees the same demand
//! sequence and the same outcome noise (indexed by round and action).

use std::time::Instant;

use bwk_core::rng::{mix_seed, tag};
use bwk_core::{compute_metrics, run_with_demand, PredictionOracle};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CellSpec, ExperimentConfig};
use crate::error::{config_error, Result};

/// Label of the oracle column for policies that take no advice.
pub const NO_ORACLE: &str = "none";

/// Execution knobs that do not change what is simulated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Worker threads; `None` lets the pool decide.
    pub threads: Option<usize>,
    /// Record wall-clock time per run. Off by default so that outputs are
    /// byte-identical across reruns.
    pub timing: bool,
}

/// One simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub preset: String,
    pub algo: String,
    pub oracle: String,
    pub b: f64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub rep: usize,
    pub seed: u64,
    pub regret: f64,
    pub cr: f64,
    pub tau: usize,
    pub opt_lp: f64,
    pub total_reward: f64,
    pub wall_ms: f64,
}

/// Summary of the replications of one `(algo, oracle, b, T)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algo: String,
    pub oracle: String,
    pub b: f64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub mean_regret: f64,
    pub stderr_regret: f64,
    pub mean_cr: f64,
    pub stderr_cr: f64,
    pub mean_tau: f64,
    pub runtime_ms: f64,
}

/// Per-round forecast error of one oracle, averaged over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub oracle: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub t: usize,
    pub mean_abs_error: f64,
    pub stderr_abs_error: f64,
    pub mean_rel_error: f64,
}

/// Seed of replication `rep`.
pub fn replication_seed(master: u64, rep: usize) -> u64 {
    mix_seed(master, &[tag::REPLICATION, rep as u64])
}

/// Placeholder oracle for policies that ignore predictions.
struct NoAdvice;

impl PredictionOracle for NoAdvice {
    fn predict(&mut self, _prefix: &[f64], _t: usize, _horizon: usize) -> f64 {
        f64::NAN
    }
    fn reset(&mut self) {}
    fn label(&self) -> String {
        NO_ORACLE.into()
    }
}

fn with_pool<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(config_error("--threads must be >= 1"));
        }
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?.install(job))
}

/// Runs every policy/oracle pair on every grid cell and replication.
///
/// Rows come back ordered by cell, replication, policy, then oracle,
/// independent of the number of worker threads.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<Vec<ResultRow>> {
    config.validate()?;
    if config.policies.is_empty() {
        return Err(config_error(format!(
            "experiment '{}' lists no policies",
            config.name
        )));
    }
    let cells = config.cells()?;
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.replications).map(move |rep| (c, rep)))
        .collect();
    let chunks: Vec<Result<Vec<ResultRow>>> = with_pool(options.threads, || {
        tasks
            .par_iter()
            .map(|&(c, rep)| run_replication(config, &cells[c], rep, options.timing))
            .collect()
    })?;
    let mut rows = Vec::new();
    for chunk in chunks {
        rows.extend(chunk?);
    }
    Ok(rows)
}

fn run_replication(
    config: &ExperimentConfig,
    cell: &CellSpec,
    rep: usize,
    timing: bool,
) -> Result<Vec<ResultRow>> {
    let seed = replication_seed(config.seed, rep);
    let horizon = cell.horizon();
    let demand = cell.demand().generate_seeded(horizon, seed)?.values;
    let total: f64 = demand.iter().sum();
    let opt = cell.opt_lp(total)?;
    let env = cell.environment(mix_seed(seed, &[tag::OUTCOME]))?;

    let mut rows = Vec::new();
    for spec in &config.policies {
        let oracles: Vec<Box<dyn PredictionOracle>> = if spec.uses_oracle() {
            config
                .oracles
                .iter()
                .map(|o| o.build(total, horizon))
                .collect()
        } else {
            vec![Box::new(NoAdvice)]
        };
        for mut oracle in oracles {
            let mut policy = cell.build_policy(spec, config.delta)?;
            let started = Instant::now();
            let log = run_with_demand(env.as_ref(), &demand, policy.as_mut(), oracle.as_mut())?;
            let wall_ms = if timing {
                started.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            let metrics = compute_metrics(&log, opt)?;
            rows.push(ResultRow {
                experiment: config.name.clone(),
                preset: config.preset.clone().unwrap_or_default(),
                algo: policy.name(),
                oracle: oracle.label(),
                b: cell.normalized_budget(),
                horizon,
                rep,
                seed,
                regret: metrics.regret,
                cr: metrics.competitive_ratio,
                tau: log.stopping_time,
                opt_lp: opt,
                total_reward: log.total_reward,
                wall_ms,
            });
        }
    }
    Ok(rows)
}

/// `(mean, sample standard deviation / √n)`; the error is 0 for a single value.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Groups rows by `(algo, oracle, b, T)` in order of first appearance.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut groups: Vec<(&ResultRow, Vec<&ResultRow>)> = Vec::new();
    for row in rows {
        let same = |g: &&ResultRow| {
            g.algo == row.algo
                && g.oracle == row.oracle
                && g.b.to_bits() == row.b.to_bits()
                && g.horizon == row.horizon
        };
        match groups.iter_mut().find(|(key, _)| same(key)) {
            Some((_, members)) => members.push(row),
            None => groups.push((row, vec![row])),
        }
    }
    groups
        .into_iter()
        .map(|(key, members)| {
            let column =
                |f: fn(&ResultRow) -> f64| members.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let (mean_regret, stderr_regret) = mean_and_stderr(&column(|r| r.regret));
            let (mean_cr, stderr_cr) = mean_and_stderr(&column(|r| r.cr));
            let (mean_tau, _) = mean_and_stderr(&column(|r| r.tau as f64));
            let (runtime_ms, _) = mean_and_stderr(&column(|r| r.wall_ms));
            AggregateRow {
                algo: key.algo.clone(),
                oracle: key.oracle.clone(),
                b: key.b,
                horizon: key.horizon,
                mean_regret,
                stderr_regret,
                mean_cr,
                stderr_cr,
                mean_tau,
                runtime_ms,
            }
        })
        .collect()
}

/// Runs each configured oracle against generated demand alone and records
/// `|Q̂_t − Q|` for every round, averaged over replications.
pub fn trace_oracle(config: &ExperimentConfig, options: &RunOptions) -> Result<Vec<TraceRow>> {
    config.validate()?;
    if config.oracles.is_empty() {
        return Err(config_error(format!(
            "experiment '{}' lists no oracles",
            config.name
        )));
    }
    let cells = config.cells()?;
    let mut horizons: Vec<usize> = Vec::new();
    let mut demand_cells: Vec<&CellSpec> = Vec::new();
    for cell in &cells {
        if !horizons.contains(&cell.horizon()) {
            horizons.push(cell.horizon());
            demand_cells.push(cell);
        }
    }
    let mut rows = Vec::new();
    for cell in demand_cells {
        let horizon = cell.horizon();
        for spec in &config.oracles {
            let per_rep: Vec<Result<(Vec<f64>, f64)>> = with_pool(options.threads, || {
                (0..config.replications)
                    .into_par_iter()
                    .map(|rep| {
                        let demand = cell
                            .demand()
                            .generate_seeded(horizon, replication_seed(config.seed, rep))?
                            .values;
                        let total: f64 = demand.iter().sum();
                        let mut oracle = spec.build(total, horizon);
                        let errors = (1..=horizon)
                            .map(|t| (oracle.predict(&demand[..t - 1], t, horizon) - total).abs())
                            .collect();
                        Ok((errors, total))
                    })
                    .collect()
            })?;
            let per_rep: Vec<(Vec<f64>, f64)> = per_rep.into_iter().collect::<Result<_>>()?;
            let label = spec.label();
            for t in 1..=horizon {
                let abs: Vec<f64> = per_rep.iter().map(|(e, _)| e[t - 1]).collect();
                let rel: Vec<f64> = per_rep.iter().map(|(e, q)| e[t - 1] / q).collect();
                let (mean_abs_error, stderr_abs_error) = mean_and_stderr(&abs);
                rows.push(TraceRow {
                    oracle: label.clone(),
                    horizon,
                    t,
                    mean_abs_error,
                    stderr_abs_error,
                    mean_rel_error: mean_and_stderr(&rel).0,
                });
            }
        }
    }
    Ok(rows)
}
