use chaoscope_core::matrix::io::{edge_list, from_csv, from_json, parse_edge_list, read_matrix, to_csv, to_json};
use chaoscope_core::matrix::{
    build_random_walk, build_rank_one, p_xi, p_xi_symmetric, q_xi, q_xi_core, row_square_sums_squared,
    sum_cubes, sum_squares, validate, Graph, InteractionMatrix, SubsetState,
};
use proptest::prelude::*;

/// Random well-formed matrix: entries in [0, 1), zero diagonal, then scaled
/// so both row and column sums are at most `target`.
fn matrix_strategy(max_n: usize) -> impl Strategy<Value = InteractionMatrix> {
    (2..=max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0.0f64..1.0, n * n), 0.1f64..1.0, 0.0f64..1.0))
        .prop_map(|(n, mut data, target, sparsity)| {
            for i in 0..n {
                for j in 0..n {
                    let idx = i * n + j;
                    if i == j || data[idx] < sparsity * 0.5 {
                        data[idx] = 0.0;
                    }
                }
            }
            let row = (0..n).map(|i| data[i * n..(i + 1) * n].iter().sum::<f64>()).fold(0.0, f64::max);
            let col = (0..n).map(|j| (0..n).map(|i| data[i * n + j]).sum::<f64>()).fold(0.0, f64::max);
            let top = row.max(col);
            if top > 0.0 {
                data.iter_mut().for_each(|x| *x *= target / top);
            }
            InteractionMatrix::from_dense(n, &data).unwrap()
        })
}

fn subset_of(n: usize, bits: u64) -> SubsetState {
    SubsetState::from_mask(n, bits & ((1u64 << n) - 1))
}

proptest! {
    #[test]
    fn json_round_trip_is_exact(xi in matrix_strategy(8)) {
        let back = from_json(&to_json(&xi)).unwrap();
        prop_assert_eq!(back.to_dense(), xi.to_dense());
        prop_assert_eq!(read_matrix(&to_json(&xi)).unwrap().to_dense(), xi.to_dense());
    }

    #[test]
    fn csv_round_trip_is_exact(xi in matrix_strategy(8)) {
        let back = from_csv(&to_csv(&xi)).unwrap();
        prop_assert_eq!(back.to_dense(), xi.to_dense());
    }

    #[test]
    fn generated_matrices_validate(xi in matrix_strategy(9)) {
        let r = validate(&xi, true);
        prop_assert!(r.passed());
        prop_assert!(xi.delta() <= 1.0);
        let dmax = xi.delta_i().iter().copied().fold(0.0, f64::max);
        prop_assert_eq!(dmax, xi.delta());
    }

    #[test]
    fn symmetric_closed_form_of_p(xi in matrix_strategy(7)) {
        let s = InteractionMatrix::from_triplets(
            xi.n(),
            xi.triplets().flat_map(|(i, j, v)| [(i, j, v / 2.0), (j, i, v / 2.0)]),
        ).unwrap();
        prop_assert!(s.is_symmetric() || s.nnz() == 0);
        let a = p_xi(&s);
        let b = p_xi_symmetric(&s);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn p_bounds_sum_of_cubes_and_square_sums(xi in matrix_strategy(7)) {
        let p = p_xi(&xi);
        prop_assert!(p >= sum_cubes(&xi) + row_square_sums_squared(&xi) - 1e-15);
    }

    #[test]
    fn q_against_dense_products(xi in matrix_strategy(7), bits in any::<u64>()) {
        let n = xi.n();
        let v = subset_of(n, bits | 1);
        let m = xi.to_matrix();
        let prod = m.transpose() * &m + &m * m.transpose();
        let idx: Vec<usize> = v.iter().collect();
        let d = xi.delta();
        let mut want = 0.0;
        for &i in &idx {
            for &j in &idx {
                want += m[(i, j)] * m[(i, j)] + d * prod[(i, j)];
            }
        }
        want += d * d * idx.len() as f64;
        let core = q_xi_core(&xi, &v).unwrap();
        prop_assert!((core - want).abs() <= 1e-12 * want.max(1.0));
        let q = q_xi(&xi, &v).unwrap();
        prop_assert!((q - (d * idx.len() as f64 + 1.0) * core).abs() <= 1e-12 * q.max(1.0));
    }

    #[test]
    fn q_is_monotone_in_v(xi in matrix_strategy(7), bits in any::<u64>(), extra in 0usize..7) {
        let n = xi.n();
        let v = subset_of(n, bits | 1);
        let mut w = v.clone();
        w.insert(extra % n);
        prop_assert!(q_xi(&xi, &v).unwrap() <= q_xi(&xi, &w).unwrap() + 1e-15);
    }

    #[test]
    fn subset_display_parse_round_trip(n in 1usize..70, seed in any::<u64>()) {
        let idx: Vec<usize> = (0..n).filter(|i| (seed.rotate_left(*i as u32) & 1) == 1).collect();
        let v = SubsetState::from_indices(n, &idx).unwrap();
        let back = SubsetState::parse(n, &v.to_string()).unwrap();
        prop_assert_eq!(&back, &v);
        prop_assert_eq!(v.len(), idx.len());
        prop_assert!(v.is_subset_of(&SubsetState::full(n)));
    }

    #[test]
    fn random_walk_rows_are_stochastic(n in 3usize..30, m in 1usize..4, seed in any::<u64>()) {
        let m = (2 * m).min(n - 1);
        if let Ok(g) = Graph::random_regular(n, m, seed) {
            let xi = build_random_walk(&g);
            prop_assert!(xi.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-12));
            prop_assert!(xi.col_sums().iter().all(|s| (s - 1.0).abs() < 1e-12));
            prop_assert!(xi.is_symmetric());
        }
    }

    #[test]
    fn rank_one_entries(alpha in prop::collection::vec(0.0f64..0.3, 2..8)) {
        let n = alpha.len();
        let beta: Vec<f64> = (0..n).map(|i| 1.0 / (n as f64) * ((i % 3) as f64) / 2.0).collect();
        if let Ok(xi) = build_rank_one(&alpha, &beta) {
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 0.0 } else { alpha[i] * beta[j] };
                    prop_assert!((xi.get(i, j) - want).abs() < 1e-15);
                }
            }
        }
    }
}

#[test]
fn regular_graph_identities() {
    for &m in &[2usize, 4, 8] {
        for &n in &[20usize, 60, 200] {
            let g = Graph::random_regular(n, m, 17 + n as u64).unwrap();
            assert_eq!(g.regular_degree(), Some(m));
            let xi = build_random_walk(&g);
            let (nf, mf) = (n as f64, m as f64);
            assert!((sum_squares(&xi) - nf / mf).abs() < 1e-12 * nf);
            assert!((row_square_sums_squared(&xi) - nf / (mf * mf)).abs() < 1e-12 * nf);
            assert!((sum_cubes(&xi) - nf / (mf * mf)).abs() < 1e-12 * nf);
            assert!((p_xi(&xi) - 6.0 * nf / (mf * mf)).abs() < 1e-12 * nf);
        }
    }
}

#[test]
fn edge_list_round_trip_and_errors() {
    let g = Graph::cycle(5).unwrap();
    let back = parse_edge_list(&edge_list(&g), Some(5)).unwrap();
    assert_eq!(back.edges(), g.edges());
    let err = parse_edge_list("0 1\n# c\n2 2\n", None).unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
    let err = from_csv("0,0.5\n0.5,x\n").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
}
