use proptest::prelude::*;

use rrs_core::analysis::{err, gamma_bound, min_norm_solution, row_space_projection};
use rrs_core::matrix::{read_matrix_market, write_matrix_market};
use rrs_core::problems::gen_gaussian;
use rrs_core::solver::{reflect, solve, ErrOracle, SolverState};
use rrs_core::{Matrix, RngStream, RowSampler, SolveConfig};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Random m×n matrix with a few exact zeros and at least one nonzero row.
fn matrix() -> impl Strategy<Value = Matrix> {
    (1usize..8, 1usize..7).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop_oneof![3 => -5.0f64..5.0, 1 => Just(0.0)], m * n)
            .prop_filter_map("all-zero matrix", move |v| {
                if v.iter().all(|&x| x == 0.0) {
                    None
                } else {
                    Matrix::from_dense(m, n, v).ok()
                }
            })
    })
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_an_involution(a in matrix(), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let x0: Vec<f64> = (0..a.ncols()).map(|_| rng.next_normal()).collect();
        let b: Vec<f64> = (0..a.nrows()).map(|_| rng.next_normal()).collect();
        for i in (0..a.nrows()).filter(|&i| a.row_sq_norm(i) > 0.0) {
            let mut x = x0.clone();
            reflect(&mut x, &a, &b, i).unwrap();
            reflect(&mut x, &a, &b, i).unwrap();
            prop_assert!(dist(&x, &x0) <= 1e-12 * norm(&x0).max(1.0));
        }
    }

    #[test]
    fn matrix_market_round_trip(a in matrix(), csr in any::<bool>()) {
        let a = if csr { a.to_csr() } else { a };
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let back = read_matrix_market(&buf[..]).unwrap();
        prop_assert_eq!((back.nrows(), back.ncols()), (a.nrows(), a.ncols()));
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let (x, y) = (a.get(i, j), back.get(i, j));
                prop_assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn dense_and_csr_rows_agree(a in matrix(), seed in any::<u64>()) {
        let csr = a.to_csr();
        let x = RngStream::new(seed, 1).normal_vec(a.ncols());
        for i in 0..a.nrows() {
            let d = a.row(i).unwrap().dot(&x);
            let s = csr.row(i).unwrap().dot(&x);
            prop_assert!((d - s).abs() <= 1e-14 * (1.0 + d.abs()));
        }
        prop_assert_eq!(a.mul_vec(&x).unwrap().len(), csr.mul_vec(&x).unwrap().len());
    }

    #[test]
    fn cached_norms_match_rows(a in matrix()) {
        let mut total = 0.0;
        for i in 0..a.nrows() {
            let direct: f64 = (0..a.ncols()).map(|j| a.get(i, j).powi(2)).sum();
            prop_assert!((a.row_sq_norm(i) - direct).abs() <= 1e-12 * (1.0 + direct));
            total += direct;
        }
        prop_assert!((a.frobenius_sq() - total).abs() <= 1e-12 * (1.0 + total));
        prop_assert!((a.to_csr().frobenius_sq() - total).abs() <= 1e-12 * (1.0 + total));
    }

    #[test]
    fn error_is_translation_invariant(
        v in vector(12),
        shift in vector(4),
    ) {
        let (x, rest) = v.split_at(4);
        let (xr, x0) = rest.split_at(4);
        prop_assume!(dist(x0, xr) > 1e-3);
        let plus = |u: &[f64]| -> Vec<f64> { u.iter().zip(&shift).map(|(a, b)| a + b).collect() };
        let e1 = err(x, xr, x0).unwrap();
        let e2 = err(&plus(x), &plus(xr), &plus(x0)).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-9 * (1.0 + e1));
    }

    #[test]
    fn gamma_is_monotone_in_l(q in 2usize..60, l1 in 0.0f64..1.0, l2 in 0.0f64..1.0) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let (g_lo, g_hi) = (gamma_bound(q, lo).unwrap(), gamma_bound(q, hi).unwrap());
        prop_assert!(g_lo <= g_hi + 1e-15);
        prop_assert!(g_lo >= 1.0 / q as f64 - 1e-15);
        prop_assert!(g_hi < 1.0);
    }
}

// Slower properties use fewer cases.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn iterates_stay_in_x0_plus_row_space(seed in any::<u64>(), m in 3usize..12, extra in 1usize..10, q in 2usize..8) {
        let n = m + extra;
        let p = gen_gaussian(m, n, &mut RngStream::new(seed, 7)).unwrap();
        let x0 = RngStream::new(seed, 8).normal_vec(n);
        let x_ref = min_norm_solution(&p.a, &p.b).unwrap();
        let oracle = ErrOracle::new(&x_ref, &x0).unwrap();
        for cfg in [SolveConfig::rs(), SolveConfig::rrs(q), SolveConfig::kaczmarz()] {
            let cfg = cfg.with_tol(0.0).with_budget(300).with_stream(seed, 0);
            let trace = solve(&p.a, &p.b, &x0, &cfg, &oracle).unwrap();
            let d: Vec<f64> = trace.solution.iter().zip(&x0).map(|(x, y)| x - y).collect();
            let proj = row_space_projection(&p.a, &d).unwrap();
            prop_assert!(dist(&proj, &d) <= 1e-8 * (1.0 + norm(&d)));
        }
    }

    #[test]
    fn uniform_weights_reproduce_rrs_exactly(seed in any::<u64>(), q in 2usize..12) {
        let p = gen_gaussian(40, 8, &mut RngStream::new(seed, 3)).unwrap();
        let x_ref = p.x_ref.clone().unwrap();
        let x0 = vec![0.0; 8];
        let oracle = ErrOracle::new(&x_ref, &x0).unwrap();
        let plain = SolveConfig::rrs(q).with_stream(seed, 5).with_budget(800);
        let weighted = SolveConfig::rrs_weighted(vec![1.0 / q as f64; q]).with_stream(seed, 5).with_budget(800);
        let a = solve(&p.a, &p.b, &x0, &plain, &oracle).unwrap();
        let b = solve(&p.a, &p.b, &x0, &weighted, &oracle).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a.solution), bits(&b.solution));
        prop_assert_eq!(a.checkpoints.len(), b.checkpoints.len());
        for (c, d) in a.checkpoints.iter().zip(&b.checkpoints) {
            prop_assert_eq!(c.err.to_bits(), d.err.to_bits());
        }
    }

    #[test]
    fn solutions_are_fixed_points(seed in any::<u64>(), q in 2usize..8) {
        let p = gen_gaussian(30, 6, &mut RngStream::new(seed, 3)).unwrap();
        let x_star = p.x_ref.clone().unwrap();
        let mut state = SolverState::new(&p.a, &p.b, &x_star, RngStream::new(seed, 0)).unwrap();
        for _ in 0..20 {
            state.restart(&vec![1.0 / q as f64; q]);
            state.reflect_step();
        }
        prop_assert!(dist(state.x(), &x_star) <= 1e-10 * (1.0 + norm(&x_star)));
    }

    #[test]
    fn reflection_budget_is_respected(seed in any::<u64>(), q in 2usize..25, budget in 1usize..400) {
        let p = gen_gaussian(20, 5, &mut RngStream::new(seed, 3)).unwrap();
        let x_ref = p.x_ref.clone().unwrap();
        let x0 = vec![0.0; 5];
        let oracle = ErrOracle::new(&x_ref, &x0).unwrap();
        let rs = solve(&p.a, &p.b, &x0, &SolveConfig::rs().with_tol(0.0).with_budget(budget), &oracle).unwrap();
        prop_assert!(rs.iterations() == budget || rs.converged());
        let rrs = solve(&p.a, &p.b, &x0, &SolveConfig::rrs(q).with_tol(0.0).with_budget(budget), &oracle).unwrap();
        if !rrs.converged() {
            prop_assert_eq!(rrs.iterations(), budget / (q - 1) * (q - 1));
        }
        prop_assert_eq!(rrs.iterations(), rrs.restarts() * (q - 1));
        prop_assert!(rrs.iterations() <= budget);
    }

    #[test]
    fn restarts_never_move_away_from_a_solution(seed in any::<u64>(), q in 2usize..10) {
        let p = gen_gaussian(60, 10, &mut RngStream::new(seed, 3)).unwrap();
        let x_star = p.x_ref.clone().unwrap();
        let mut state = SolverState::new(&p.a, &p.b, &[0.0; 10], RngStream::new(seed, 0)).unwrap();
        let w = vec![1.0 / q as f64; q];
        let mut prev = dist(state.x(), &x_star);
        for _ in 0..50 {
            state.restart(&w);
            let d = dist(state.x(), &x_star);
            prop_assert!(d <= prev + 1e-10);
            prev = d;
        }
    }

    #[test]
    fn min_norm_solution_is_orthogonal_to_the_kernel(seed in any::<u64>(), m in 2usize..10, extra in 1usize..10) {
        let n = m + extra;
        let p = gen_gaussian(m, n, &mut RngStream::new(seed, 3)).unwrap();
        let x = min_norm_solution(&p.a, &p.b).unwrap();
        let r = p.a.mul_vec(&x).unwrap();
        prop_assert!(dist(&r, &p.b) <= 1e-8 * (1.0 + norm(&p.b)));
        // any kernel vector: v − P_row(v)
        let v = RngStream::new(seed, 4).normal_vec(n);
        let pv = row_space_projection(&p.a, &v).unwrap();
        let k: Vec<f64> = v.iter().zip(&pv).map(|(a, b)| a - b).collect();
        let dot: f64 = k.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!(dot.abs() <= 1e-8 * (1.0 + norm(&k) * norm(&x)));
    }

    #[test]
    fn generator_is_deterministic(seed in any::<u64>(), stream in any::<u64>()) {
        let a = gen_gaussian(15, 4, &mut RngStream::new(seed, stream)).unwrap();
        let b = gen_gaussian(15, 4, &mut RngStream::new(seed, stream)).unwrap();
        prop_assert_eq!(a.a.dense_values(), b.a.dense_values());
        prop_assert_eq!(&a.b, &b.b);
        let c = gen_gaussian(15, 4, &mut RngStream::new(seed.wrapping_add(1), stream)).unwrap();
        prop_assert_ne!(a.a.dense_values(), c.a.dense_values());
    }
}

/// Upper 1% point of χ²(k), Wilson–Hilferty.
fn chi2_critical_99(k: usize) -> f64 {
    let k = k as f64;
    let z = 2.326_347_874;
    let t = 2.0 / (9.0 * k);
    k * (1.0 - t + z * t.sqrt()).powi(3)
}

#[test]
fn sampler_frequencies_follow_row_norms() {
    let a = Matrix::from_rows(&[
        vec![1.0, 0.0],
        vec![0.0, 0.0],
        vec![2.0, 1.0],
        vec![0.5, 0.5],
        vec![3.0, 0.0],
        vec![0.0, 0.1],
    ])
    .unwrap();
    let mut s = RowSampler::new(&a, RngStream::new(42, 0)).unwrap();
    let draws = 100_000;
    let mut counts = [0usize; 6];
    for _ in 0..draws {
        counts[s.draw()] += 1;
    }
    assert_eq!(counts[1], 0, "zero row drawn");
    let f = a.frobenius_sq();
    let mut chi2 = 0.0;
    let mut cells = 0;
    for (i, &c) in counts.iter().enumerate() {
        let expected = draws as f64 * a.row_sq_norm(i) / f;
        if expected > 0.0 {
            chi2 += (c as f64 - expected).powi(2) / expected;
            cells += 1;
        }
    }
    assert!(chi2 < chi2_critical_99(cells - 1), "chi2 = {chi2}");
}
