mod common;

use common::*;
use l1homotopy::bench::{ser_db, SER_CAP_DB};
use l1homotopy::homotopy::adaptive::{solve_arw, WeightPolicy};
use l1homotopy::homotopy::lasso::solve_lasso_observed;
use l1homotopy::homotopy::reweight::solve_irw;
use l1homotopy::homotopy::{SolverOptions, StepKind, WeightedProblem};
use l1homotopy::linalg::{mmio, refactorize, DenseMatrix, FactorMode, GramFactor};
use l1homotopy::prox::soft_threshold;
use l1homotopy::signal::{
    daub4_forward, daub4_inverse, derive_seed, haar_forward, haar_inverse, Rng,
};
use proptest::prelude::*;

fn random_problem(seed: u64, m: usize, n: usize, frac: f64) -> WeightedProblem {
    let mut rng = Rng::new(seed);
    let a = gaussian_matrix(&mut rng, m, n);
    let y = gaussian_vec(&mut rng, m);
    let tau = frac * naive_matvec_t(&a, &y).iter().fold(0.0f64, |s, v| s.max(v.abs()));
    WeightedProblem::uniform(a, y, tau).unwrap()
}

#[derive(Debug, Clone)]
enum Op {
    Insert(usize),
    Remove(usize),
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(
        prop_oneof![(0usize..60).prop_map(Op::Insert), (0usize..60).prop_map(Op::Remove)],
        1..120,
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn factor_updates_track_fresh_factor(seed in any::<u64>(), seq in ops()) {
        let mut rng = Rng::new(seed);
        let a = gaussian_matrix(&mut rng, 200, 60);
        let mut chol = GramFactor::new(FactorMode::Cholesky, 200).with_refactor_period(0);
        let mut inv = GramFactor::new(FactorMode::Inverse, 200).with_refactor_period(0);
        for op in seq {
            match op {
                Op::Insert(c) if chol.position(c).is_none() && chol.order() < 50 => {
                    chol.insert(&a, c).unwrap();
                    inv.insert(&a, c).unwrap();
                }
                Op::Remove(k) if chol.order() > 0 => {
                    let pos = k % chol.order();
                    chol.remove(pos).unwrap();
                    inv.remove(pos).unwrap();
                }
                _ => {}
            }
        }
        prop_assert_eq!(chol.columns(), inv.columns());
        let fresh = refactorize(&a, chol.columns(), FactorMode::Cholesky).unwrap();
        let rhs = gaussian_vec(&mut rng, chol.order());
        let want = fresh.solve(&rhs).unwrap();
        prop_assert!(max_abs_diff(&chol.solve(&rhs).unwrap(), &want) <= 1e-10);
        prop_assert!(max_abs_diff(&inv.solve(&rhs).unwrap(), &want) <= 1e-8);
        let r = chol.payload();
        let s = chol.order();
        for i in 0..s {
            prop_assert!(r[i * s + i] > 0.0);
            for j in 0..i {
                prop_assert_eq!(r[i * s + j], 0.0);
            }
        }
    }

    #[test]
    fn insert_then_remove_restores_solves(seed in any::<u64>(), k in 1usize..12) {
        let mut rng = Rng::new(seed);
        let a = gaussian_matrix(&mut rng, 30, 20);
        for mode in [FactorMode::Cholesky, FactorMode::Inverse] {
            let mut f = GramFactor::new(mode, 30);
            for c in 0..k {
                f.insert(&a, c).unwrap();
            }
            let rhs = gaussian_vec(&mut rng, k);
            let before = f.solve(&rhs).unwrap();
            f.insert(&a, 19).unwrap();
            f.remove(k).unwrap();
            prop_assert!(max_abs_diff(&f.solve(&rhs).unwrap(), &before) <= 1e-10);
        }
    }

    #[test]
    fn wavelets_are_orthonormal(seed in any::<u64>(), log_n in 1u32..9) {
        let n = 1usize << log_n;
        let x = gaussian_vec(&mut Rng::new(seed), n);
        let e: f64 = x.iter().map(|v| v * v).sum();
        let h = haar_forward(&x).unwrap();
        prop_assert!((h.iter().map(|v| v * v).sum::<f64>() - e).abs() <= 1e-10 * e.max(1.0));
        prop_assert!(max_abs_diff(&haar_inverse(&h).unwrap(), &x) <= 1e-12);
        if n >= 4 {
            let d = daub4_forward(&x).unwrap();
            prop_assert!((d.iter().map(|v| v * v).sum::<f64>() - e).abs() <= 1e-10 * e.max(1.0));
            prop_assert!(max_abs_diff(&daub4_inverse(&d).unwrap(), &x) <= 1e-12);
        }
    }

    #[test]
    fn lasso_path_stays_optimal(seed in any::<u64>(), m in 5usize..30, extra in 1usize..40, frac in 0.01f64..0.9) {
        let p = random_problem(seed, m, m + extra, frac);
        let mut worst = 0.0f64;
        let aty = naive_matvec_t(p.a(), p.y());
        let lead = (0..aty.len()).max_by(|&i, &j| aty[i].abs().total_cmp(&aty[j].abs())).unwrap();
        let mut prev = vec![lead];
        let mut one_change = true;
        let (x, rep) = solve_lasso_observed(&p, &SolverOptions::default(), &mut |bp| {
            worst = worst.max(scaled_kkt(p.a(), p.y(), bp.weights, bp.x));
            let mut cur = bp.support.to_vec();
            cur.sort_unstable();
            let diff = cur.iter().filter(|i| !prev.contains(i)).count()
                + prev.iter().filter(|i| !cur.contains(i)).count();
            let expected = match bp.kind {
                StepKind::Add(_) | StepKind::Remove(_) => 1,
                StepKind::Exchange { .. } => 2,
                StepKind::ReachedTarget => 0,
            };
            one_change &= diff == expected;
            prev = cur;
        }).unwrap();
        prop_assert!(worst <= 1e-9, "breakpoint residual {}", worst);
        prop_assert!(one_change);
        prop_assert!(scaled_kkt(p.a(), p.y(), p.weights(), &x) <= 1e-9);
        prop_assert!(rep.support_size <= m);
    }

    #[test]
    fn reweighting_rounds_are_optimal(seed in any::<u64>(), m in 8usize..30, extra in 1usize..40) {
        let p = random_problem(seed, m, m + extra, 0.05);
        let (_, rounds) = solve_irw(&p, 3, &SolverOptions::default()).unwrap();
        prop_assert_eq!(rounds.len(), 4);
        for r in &rounds {
            prop_assert!(scaled_kkt(p.a(), p.y(), &r.weights, &r.x) <= 1e-9);
            prop_assert!(r.weights.iter().all(|w| *w > 0.0 && *w <= p.tau()));
        }
    }

    #[test]
    fn adaptive_run_ends_optimal_below_tau(seed in any::<u64>(), m in 8usize..30, extra in 1usize..40, policy in 0usize..3) {
        let p = random_problem(seed, m, m + extra, 0.02);
        let policy = [WeightPolicy::Reciprocal, WeightPolicy::HalfMax, WeightPolicy::Hybrid { switch_step: 4 }][policy];
        let (x, w, rep) = solve_arw(&p, policy, &SolverOptions::default()).unwrap();
        prop_assert!(scaled_kkt(p.a(), p.y(), &w, &x) <= 1e-9);
        prop_assert!(w.iter().all(|v| *v <= p.tau() * (1.0 + 1e-12)));
        prop_assert!(rep.support_size <= m);
    }

    #[test]
    fn soft_threshold_is_the_prox(u in -10.0f64..10.0, t in 0.0f64..5.0) {
        let s = soft_threshold(u, t);
        // minimizer of t|v| + (v − u)²/2
        let f = |v: f64| t * v.abs() + 0.5 * (v - u) * (v - u);
        prop_assert!(f(s) <= f(s + 1e-3) && f(s) <= f(s - 1e-3));
        prop_assert!(s.abs() <= u.abs());
    }

    #[test]
    fn matrix_market_round_trip(seed in any::<u64>(), m in 1usize..8, n in 1usize..8, scale in -300i32..300) {
        let mut rng = Rng::new(seed);
        let data: Vec<f64> = (0..m * n).map(|_| rng.gaussian() * 10f64.powi(scale)).collect();
        let a = DenseMatrix::new(m, n, data).unwrap();
        let text = mmio::to_string(&a);
        prop_assert_eq!(mmio::parse(&text, "prop".as_ref()).unwrap(), a);
    }

    #[test]
    fn ser_ignores_common_scale(seed in any::<u64>(), k in 0.01f64..100.0) {
        let mut rng = Rng::new(seed);
        let x = gaussian_vec(&mut rng, 16);
        let e = gaussian_vec(&mut rng, 16);
        let xh: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + 0.1 * b).collect();
        let xs: Vec<f64> = x.iter().map(|v| v * k).collect();
        let xhs: Vec<f64> = xh.iter().map(|v| v * k).collect();
        let s = ser_db(&x, &xh).unwrap();
        prop_assert!((s - ser_db(&xs, &xhs).unwrap()).abs() <= 1e-9);
        prop_assert!(s < SER_CAP_DB);
    }

    #[test]
    fn derived_seeds_are_stable_and_separated(seed in any::<u64>(), i in 0u64..1000) {
        prop_assert_eq!(derive_seed(seed, "noise", &[i]), derive_seed(seed, "noise", &[i]));
        prop_assert_ne!(derive_seed(seed, "noise", &[i]), derive_seed(seed, "matrix", &[i]));
        prop_assert_ne!(derive_seed(seed, "noise", &[i]), derive_seed(seed, "noise", &[i + 1]));
    }
}
