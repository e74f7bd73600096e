use super::*;
use crate::demand::{fixture_lemma2, DemandModel};
use crate::scalar::rational;
use approx::assert_abs_diff_eq;
use num_rational::{BigRational, Ratio};
use proptest::prelude::*;
use rand::Rng;

fn fixture_totals(which: u8, horizon: usize) -> (Vec<f64>, Vec<Vec<f64>>, f64, f64) {
    let spec = fixture_lemma2(which, horizon).unwrap();
    let DemandModel::Fixed { values } = &spec.demand else {
        unreachable!()
    };
    (
        spec.rewards.clone(),
        spec.costs.clone(),
        values.iter().sum(),
        spec.budget(),
    )
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn exact_instance(r: &[f64], c: &[Vec<f64>]) -> (Vec<BigRational>, Vec<Vec<BigRational>>) {
    (
        r.iter().map(|&x| exact(x)).collect(),
        c.iter()
            .map(|row| row.iter().map(|&x| exact(x)).collect())
            .collect(),
    )
}

#[test]
fn all_ones_fixture_is_three_quarters() {
    let (r, c, q, b) = fixture_totals(2, 1000);
    let s = solve_opt_lp(&r, &c, &q, &b).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert_eq!(s.value, 750.0);
    assert_eq!(s.allocation, vec![0.0, 1.0, 0.0]);
    assert_eq!(s.binding, vec![0]);

    let (er, ec) = exact_instance(&r, &c);
    let s = solve_opt_lp(&er, &ec, &exact(q), &exact(b)).unwrap();
    assert_eq!(s.value, rational(750, 1));
}

#[test]
fn low_tail_fixture_value() {
    let (r, c, q, b) = fixture_totals(1, 640);
    assert_eq!(q, 340.0);
    let s = solve_opt_lp(&r, &c, &q, &b).unwrap();
    assert_abs_diff_eq!(s.value, 330.0, epsilon = 1e-7);
    assert_abs_diff_eq!(s.allocation[0], 15.0 / 17.0, epsilon = 1e-12);
    assert_abs_diff_eq!(s.allocation[1], 2.0 / 17.0, epsilon = 1e-12);

    let (er, ec) = exact_instance(&r, &c);
    let s = solve_opt_lp(&er, &ec, &exact(q), &exact(b)).unwrap();
    assert_eq!(s.value, rational(330, 1));
    assert_eq!(
        s.allocation,
        vec![rational(15, 17), rational(2, 17), rational(0, 1)]
    );
    assert_eq!(
        enumerate_vertices_oracle(&er, &ec, &exact(q), &exact(b)).unwrap(),
        rational(330, 1)
    );
    // 33T/64 across horizons.
    for horizon in [64, 128, 1024] {
        let (r, c, q, b) = fixture_totals(1, horizon);
        let v = opt_lp_value(&r, &c, q, b).unwrap();
        assert_abs_diff_eq!(v, 33.0 * horizon as f64 / 64.0, epsilon = 1e-9);
    }
}

#[test]
fn slack_budget_picks_best_reward() {
    let r = [0.3, 0.9, 0.6, 0.0];
    let c = [
        vec![0.2, 0.9],
        vec![0.8, 0.1],
        vec![0.5, 0.5],
        vec![0.0, 0.0],
    ];
    let s = solve_opt_lp(&r, &c, &100.0, &90.0).unwrap();
    assert_abs_diff_eq!(s.value, 90.0, epsilon = 1e-12);
    for (u, e) in s.allocation.iter().zip([0.0, 1.0, 0.0, 0.0]) {
        assert_abs_diff_eq!(*u, e, epsilon = 1e-12);
    }
    assert!(s.binding.is_empty());
}

#[test]
fn single_action_closed_form() {
    for &(r1, c1, q, b) in &[
        (0.7f64, 0.5f64, 100.0f64, 20.0f64),
        (0.7, 0.5, 100.0, 80.0),
        (0.4, 0.0, 50.0, 1.0),
    ] {
        let expected: f64 = if c1 > 0.0 {
            (q * r1).min(b * r1 / c1)
        } else {
            q * r1
        };
        let r = [r1, 0.0];
        let c = [vec![c1], vec![0.0]];
        assert_abs_diff_eq!(
            opt_lp_value(&r, &c, q, b).unwrap(),
            expected,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            enumerate_vertices_oracle(&r, &c, &q, &b).unwrap(),
            expected,
            epsilon = 1e-9
        );
    }
}

#[test]
fn rejects_bad_input() {
    let c = [vec![0.5], vec![0.0]];
    assert!(solve_opt_lp(&[0.5, 0.0], &c, &0.0, &1.0).is_err());
    assert!(solve_opt_lp(&[0.5, 0.0], &c, &1.0, &-1.0).is_err());
    assert!(solve_opt_lp(&[1.5, 0.0], &c, &1.0, &1.0).is_err());
    assert_eq!(
        solve_opt_lp(&[0.5, 0.1], &c, &1.0, &1.0),
        Err(Error::NoNullAction)
    );
}

fn random_instance(rng: &mut impl Rng) -> (Vec<f64>, Vec<Vec<f64>>, f64, f64) {
    let k = rng.random_range(2..=6);
    let d = rng.random_range(1..=3);
    let null = rng.random_range(0..k);
    let mut r: Vec<f64> = (0..k).map(|_| rng.random()).collect();
    let mut c: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.random()).collect())
        .collect();
    r[null] = 0.0;
    c[null] = vec![0.0; d];
    let q = rng.random_range(1.0..1000.0);
    let b = q * rng.random_range(0.01..1.2);
    (r, c, q, b)
}

#[test]
fn agrees_with_vertex_enumeration() {
    let mut rng = crate::rng::stream(2024, &[]);
    for _ in 0..1000 {
        let (r, c, q, b) = random_instance(&mut rng);
        let s = solve_opt_lp(&r, &c, &q, &b).unwrap();
        let oracle = enumerate_vertices_oracle(&r, &c, &q, &b).unwrap();
        assert!(
            (s.value - oracle).abs() <= 1e-7 * oracle.max(1.0),
            "{r:?} {c:?} {q} {b}: {} vs {oracle}",
            s.value
        );
        // Feasibility of the reported allocation.
        let total: f64 = s.allocation.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        assert!(s.allocation.iter().all(|&u| u >= 0.0));
        for i in 0..c[0].len() {
            let used: f64 = s
                .allocation
                .iter()
                .zip(&c)
                .map(|(u, ca)| q * u * ca[i])
                .sum();
            assert!(used <= b + 1e-9 * b.max(1.0));
        }
        let value: f64 = q * s
            .allocation
            .iter()
            .zip(&r)
            .map(|(u, ra)| u * ra)
            .sum::<f64>();
        assert!((value - s.value).abs() <= 1e-9 * s.value.max(1.0));
    }
}

#[test]
fn exact_arithmetic_agrees() {
    let mut rng = crate::rng::stream(7, &[]);
    for _ in 0..100 {
        let k = rng.random_range(2..=5);
        let d = rng.random_range(1..=3);
        let cell = |rng: &mut crate::rng::StreamRng| Ratio::<i64>::new(rng.random_range(0..=8), 8);
        let mut r: Vec<Ratio<i64>> = (0..k).map(|_| cell(&mut rng)).collect();
        let mut c: Vec<Vec<Ratio<i64>>> = (0..k)
            .map(|_| (0..d).map(|_| cell(&mut rng)).collect())
            .collect();
        r[k - 1] = Ratio::from_integer(0);
        c[k - 1] = vec![Ratio::from_integer(0); d];
        let q = Ratio::from_integer(rng.random_range(1..50));
        let b = Ratio::new(rng.random_range(1..100), 2);
        let s = solve_opt_lp(&r, &c, &q, &b).unwrap();
        assert_eq!(s.value, enumerate_vertices_oracle(&r, &c, &q, &b).unwrap());
        let total = s
            .allocation
            .iter()
            .fold(Ratio::from_integer(0), |acc, u| acc + u);
        assert_eq!(total, Ratio::from_integer(1));
    }
}

#[test]
fn single_precision_solver() {
    let r = [1.0f32, 0.75, 0.0];
    let c = [vec![1.0f32], vec![0.5], vec![0.0]];
    let s = solve_opt_lp(&r, &c, &1000.0f32, &500.0f32).unwrap();
    assert!((s.value - 750.0).abs() < 1e-2);
}

proptest! {
    #[test]
    fn value_is_monotone(seed in any::<u64>(), bump in 0.0f64..0.5, which in 0usize..6) {
        let mut rng = crate::rng::stream(seed, &[]);
        let (r, c, q, b) = random_instance(&mut rng);
        let base = opt_lp_value(&r, &c, q, b).unwrap();
        let more_budget = opt_lp_value(&r, &c, q, b * (1.0 + bump)).unwrap();
        prop_assert!(more_budget >= base - 1e-9 * base.max(1.0));
        let a = which % r.len();
        if !(r[a] == 0.0 && c[a].iter().all(|&x| x == 0.0)) {
            let mut r2 = r.clone();
            r2[a] = (r2[a] + bump).min(1.0);
            let richer = opt_lp_value(&r2, &c, q, b).unwrap();
            prop_assert!(richer >= base - 1e-9 * base.max(1.0));
        }
    }
}
