//! Brute-force vertex enumeration, used to cross-check the simplex solver.

use crate::error::{invalid, Error, Result};
use crate::scalar::LpField;

/// Largest `K + d + 1` the enumeration accepts.
pub const VERTEX_ORACLE_MAX_CONSTRAINTS: usize = 12;

/// Maximum of `Q·rᵀu` over the basic feasible solutions of
/// `Q·cᵀu + s = B·1, Σu = 1, u, s ≥ 0`.
///
/// Unlike the simplex solver this keeps the simplex constraint as an
/// equality and works with the unscaled constraint matrix.
pub fn enumerate_vertices_oracle<T: LpField>(
    rewards: &[T],
    costs: &[Vec<T>],
    total_demand: &T,
    budget: &T,
) -> Result<T> {
    let k = rewards.len();
    let d = costs.first().map_or(0, Vec::len);
    if k == 0 || costs.len() != k || d == 0 || costs.iter().any(|c| c.len() != d) {
        return Err(invalid(
            "rewards must have length K and costs must be K x d with d >= 1",
        ));
    }
    if k + d + 1 > VERTEX_ORACLE_MAX_CONSTRAINTS {
        return Err(Error::TooLarge(format!(
            "{} constraints exceed the enumeration limit of {VERTEX_ORACLE_MAX_CONSTRAINTS}",
            k + d + 1
        )));
    }
    let rows = d + 1;
    let cols = k + d;
    // Column j of the equality system [Q·cᵀ I; 1ᵀ 0].
    let column = |j: usize| -> Vec<T> {
        (0..rows)
            .map(|i| match (i < d, j < k) {
                (true, true) => total_demand.clone() * costs[j][i].clone(),
                (true, false) => {
                    if j - k == i {
                        T::one()
                    } else {
                        T::zero()
                    }
                }
                (false, true) => T::one(),
                (false, false) => T::zero(),
            })
            .collect()
    };
    let rhs: Vec<T> = (0..rows)
        .map(|i| if i < d { budget.clone() } else { T::one() })
        .collect();
    let tol = T::pivot_tolerance();

    let mut best: Option<T> = None;
    for chosen in combinations(cols, rows) {
        let matrix: Vec<Vec<T>> = chosen.iter().map(|&j| column(j)).collect();
        let Some(x) = solve_columns(&matrix, &rhs) else {
            continue;
        };
        if x.iter().any(|v| *v < -tol.clone()) {
            continue;
        }
        let value = chosen
            .iter()
            .zip(&x)
            .filter(|(&j, _)| j < k)
            .fold(T::zero(), |acc, (&j, v)| {
                acc + rewards[j].clone() * v.clone()
            });
        let value = total_demand.clone() * value;
        if best.as_ref().is_none_or(|b| value > *b) {
            best = Some(value);
        }
    }
    best.ok_or_else(|| invalid("no basic feasible solution"))
}

/// Solves `Σ_j x_j · columns[j] = rhs` by Gaussian elimination with partial
/// pivoting; `None` if the columns are (numerically) dependent.
fn solve_columns<T: LpField>(columns: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    let n = rhs.len();
    let mut a: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut row: Vec<T> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| {
            a[x][col]
                .abs()
                .partial_cmp(&a[y][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[p][col].is_negligible() {
            return None;
        }
        a.swap(col, p);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone() / a[col][col].clone();
                for c in col..=n {
                    let delta = f.clone() * a[col][c].clone();
                    a[r][c] = a[r][c].clone() - delta;
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n].clone() / a[i][i].clone()).collect())
}

/// All `size`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(
        start: usize,
        n: usize,
        size: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for j in start..n {
            current.push(j);
            rec(j + 1, n, size, current, out);
            current.pop();
        }
    }
    rec(0, n, size, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(2, 3).len(), 0);
    }

    #[test]
    fn refuses_large_instances() {
        let r = vec![0.5; 10];
        let c = vec![vec![0.5; 2]; 10];
        assert!(matches!(
            enumerate_vertices_oracle(&r, &c, &1.0, &1.0),
            Err(Error::TooLarge(_))
        ));
    }
}
