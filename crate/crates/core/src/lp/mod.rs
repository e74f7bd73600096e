//! The fluid LP benchmark
//!
//! ```text
//! max  Q·rᵀu   s.t.  Q·cᵀu ≤ B·1,  u ≥ 0,  Σu = 1
//! ```
//!
//! solved by a dense tableau simplex with Bland's rule. The problem is posed
//! in per-unit form (`cᵀu ≤ B/Q`) with the simplex constraint relaxed to
//! `Σu ≤ 1`; the leftover mass is given to the null action, which has zero
//! reward and consumption, so the two problems have the same optimum and the
//! all-slack basis is a feasible start.

mod vertex;

pub use vertex::{enumerate_vertices_oracle, VERTEX_ORACLE_MAX_CONSTRAINTS};

use crate::error::{invalid, Error, Result};
use crate::scalar::LpField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    /// The pivot guard tripped; the reported point is feasible but may be suboptimal.
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    /// `Q·rᵀu*`.
    pub value: T,
    /// `u*`, a distribution over actions.
    pub allocation: Vec<T>,
    /// Resources whose budget constraint is tight at `u*`.
    pub binding: Vec<usize>,
    pub status: LpStatus,
    pub pivots: usize,
}

/// Index of the first action with zero reward and zero consumption.
pub fn find_null_action<T: LpField>(rewards: &[T], costs: &[Vec<T>]) -> Option<usize> {
    rewards
        .iter()
        .zip(costs)
        .position(|(r, c)| r.is_zero() && c.iter().all(|x| x.is_zero()))
}

fn check_shape<T: LpField>(
    rewards: &[T],
    costs: &[Vec<T>],
    total_demand: &T,
    budget: &T,
) -> Result<usize> {
    let d = costs.first().map_or(0, Vec::len);
    if rewards.is_empty()
        || rewards.len() != costs.len()
        || d == 0
        || costs.iter().any(|c| c.len() != d)
    {
        return Err(invalid(
            "rewards must have length K and costs must be K x d with d >= 1",
        ));
    }
    if *total_demand <= T::zero() || *budget <= T::zero() {
        return Err(invalid("total demand and budget must be > 0"));
    }
    let unit = |x: &T| *x >= T::zero() && *x <= T::one();
    if !rewards.iter().all(unit) || !costs.iter().flatten().all(unit) {
        return Err(invalid("rewards and costs must lie in [0,1]"));
    }
    Ok(d)
}

/// Solves the benchmark LP for means `rewards[a]`, `costs[a][i]`, total
/// demand `Q` and per-resource budget `B`.
pub fn solve_opt_lp<T: LpField>(
    rewards: &[T],
    costs: &[Vec<T>],
    total_demand: &T,
    budget: &T,
) -> Result<LpSolution<T>> {
    let d = check_shape(rewards, costs, total_demand, budget)?;
    let null = find_null_action(rewards, costs).ok_or(Error::NoNullAction)?;
    let k = rewards.len();
    let m = d + 1;
    let ratio = budget.clone() / total_demand.clone();

    // Tableau rows 0..m are constraints, row m is the objective in the form
    // z − rᵀu = 0. Columns 0..k are actions, k..k+m slacks, last is the rhs.
    let width = k + m + 1;
    let mut tab = vec![vec![T::zero(); width]; m + 1];
    for i in 0..d {
        for a in 0..k {
            tab[i][a] = costs[a][i].clone();
        }
        tab[i][k + i] = T::one();
        tab[i][width - 1] = ratio.clone();
    }
    for a in 0..k {
        tab[d][a] = T::one();
        tab[m][a] = -rewards[a].clone();
    }
    tab[d][k + d] = T::one();
    tab[d][width - 1] = T::one();
    let mut basis: Vec<usize> = (k..k + m).collect();

    let tol = T::pivot_tolerance();
    let limit = 50 * (k + m) * (k + m);
    let mut pivots = 0;
    let mut status = LpStatus::Optimal;
    loop {
        // Bland: the lowest-index column with a negative reduced cost enters.
        let Some(enter) = (0..k + m).find(|&j| tab[m][j] < -tol.clone()) else {
            break;
        };
        if pivots >= limit {
            status = LpStatus::IterationLimit;
            break;
        }
        // Ratio test; ties go to the lowest-index basic variable.
        let mut leave: Option<(usize, T)> = None;
        for (i, row) in tab.iter().enumerate().take(m) {
            if row[enter] > tol {
                let q = row[width - 1].clone() / row[enter].clone();
                let better = match &leave {
                    None => true,
                    Some((li, lq)) => q < *lq || (q == *lq && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, q));
                }
            }
        }
        // Σu ≤ 1 bounds every action column, so some row always qualifies.
        let (row, _) = leave.expect("the simplex row bounds every column");
        pivot(&mut tab, row, enter);
        basis[row] = enter;
        pivots += 1;
    }

    let mut allocation = vec![T::zero(); k];
    let mut slack = vec![T::zero(); m];
    for (i, &b) in basis.iter().enumerate() {
        let v = tab[i][width - 1].clone();
        let v = if v < T::zero() { T::zero() } else { v };
        if b < k {
            allocation[b] = v;
        } else {
            slack[b - k] = v;
        }
    }
    allocation[null] = allocation[null].clone() + slack[d].clone();
    let binding = (0..d).filter(|&i| slack[i].is_negligible()).collect();
    let value = total_demand.clone() * tab[m][width - 1].clone();
    Ok(LpSolution {
        value,
        allocation,
        binding,
        status,
        pivots,
    })
}

fn pivot<T: LpField>(tab: &mut [Vec<T>], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for x in tab[row].iter_mut() {
        *x = x.clone() / p.clone();
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (x, y) in r.iter_mut().zip(&pivot_row) {
            *x = x.clone() - f.clone() * y.clone();
        }
        r[col] = T::zero();
    }
}

/// `OPT_LP` in double precision.
pub fn opt_lp_value(
    rewards: &[f64],
    costs: &[Vec<f64>],
    total_demand: f64,
    budget: f64,
) -> Result<f64> {
    solve_opt_lp(rewards, costs, &total_demand, &budget).map(|s| s.value)
}

#[cfg(test)]
mod tests;
