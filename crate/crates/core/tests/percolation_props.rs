use chaoscope_core::matrix::{build_mean_field, Graph, InteractionMatrix, SubsetState};
use chaoscope_core::percolation::{
    expectation_bound, fpp_simulate, mc_expectation, mc_law, mean_field_moment, simulate, BoundFamily,
    ExactEngine, Functional, McEngine, Payload, PercolationModel, SubsetFunction,
};
use chaoscope_core::matrix::build_random_walk;
use proptest::prelude::*;

fn model_strategy(max_n: usize) -> impl Strategy<Value = PercolationModel> {
    (2..=max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0.0f64..1.0, n * n), 0.2f64..1.0, 0.3f64..2.5))
        .prop_map(|(n, mut data, target, kappa)| {
            for i in 0..n {
                data[i * n + i] = 0.0;
            }
            let row = (0..n).map(|i| data[i * n..(i + 1) * n].iter().sum::<f64>()).fold(0.0, f64::max);
            let col = (0..n).map(|j| (0..n).map(|i| data[i * n + j]).sum::<f64>()).fold(0.0, f64::max);
            let top = row.max(col).max(1e-12);
            data.iter_mut().for_each(|x| *x *= target / top);
            PercolationModel::new(InteractionMatrix::from_dense(n, &data).unwrap(), kappa).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_kills_constants_and_is_nonnegative_on_increasing(m in model_strategy(7)) {
        let e = ExactEngine::new(&m).unwrap();
        let n = m.n();
        let c = SubsetFunction::constant(n, 2.5).unwrap();
        prop_assert!(e.generator_apply(&c).unwrap().values().iter().all(|x| x.abs() < 1e-12));
        let card = SubsetFunction::cardinality_pow(n, 2).unwrap();
        prop_assert!(e.generator_apply(&card).unwrap().values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn expectation_is_a_contraction_and_monotone(m in model_strategy(6), t in 0.0f64..3.0) {
        let e = ExactEngine::new(&m).unwrap();
        let n = m.n();
        let f = SubsetFunction::from_fn(n, |mask| ((mask * 2654435761) % 97) as f64 / 97.0 - 0.5).unwrap();
        let all = e.expectation_all(&f, t, 1e-13).unwrap();
        prop_assert!(all.sup_norm() <= f.sup_norm() + 1e-12);
        let card = SubsetFunction::cardinality_pow(n, 1).unwrap();
        let a = e.expectation_all(&card, t, 1e-13).unwrap();
        let b = e.expectation_all(&card, t + 0.2, 1e-13).unwrap();
        for mask in 0..(1u64 << n) {
            prop_assert!(a.get(mask) <= b.get(mask) + 1e-12);
            prop_assert!(a.get(mask) >= card.get(mask) - 1e-12);
            prop_assert!(a.get(mask) <= n as f64 + 1e-12);
        }
    }

    #[test]
    fn semigroup_property(m in model_strategy(6), s in 0.0f64..1.5, t in 0.0f64..1.5) {
        let e = ExactEngine::new(&m).unwrap();
        let n = m.n();
        let f = SubsetFunction::from_fn(n, |mask| (mask as f64).cos()).unwrap();
        let one = e.expectation_all(&e.expectation_all(&f, s, 1e-14).unwrap(), t, 1e-14).unwrap();
        let two = e.expectation_all(&f, s + t, 1e-14).unwrap();
        for (a, b) in one.values().iter().zip(two.values()) {
            prop_assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn linear_first_family_is_a_bound(m in model_strategy(6), t in 0.05f64..2.0, x in prop::collection::vec(0.0f64..1.0, 6)) {
        let n = m.n();
        let x: Vec<f64> = x.into_iter().take(n).collect();
        let payload = Payload::Vector(x.clone());
        let e = ExactEngine::new(&m).unwrap();
        let table = Functional::Linear { x, p: 0 }.table(m.xi()).unwrap();
        for mask in 1..(1u64 << n) {
            let v = SubsetState::from_mask(n, mask);
            let exact = e.expectation(&table, &v, t, 1e-13).unwrap();
            let b = expectation_bound(&m, BoundFamily::IIa, &v, t, &payload).unwrap();
            prop_assert!(exact <= b + 1e-9 * b.max(1.0));
        }
    }
}

#[test]
fn single_edge_closed_form_exact_and_mc() {
    let a = 0.6;
    let kappa = 1.3;
    let xi = InteractionMatrix::from_rows(&[vec![0.0, a], vec![0.0, 0.0]]).unwrap();
    let m = PercolationModel::new(xi, kappa).unwrap();
    let e = ExactEngine::new(&m).unwrap();
    let card = SubsetFunction::cardinality_pow(2, 1).unwrap();
    let v = SubsetState::from_indices(2, &[0]).unwrap();
    for &t in &[0.1, 1.0, 3.0] {
        let want = 2.0 - (-kappa * a * t).exp();
        assert!((e.expectation(&card, &v, t, 1e-14).unwrap() - want).abs() < 1e-10);
    }
    let est = mc_expectation(&m, &Functional::Cardinality { p: 1 }, &v, 1.0, 20_000, 5, McEngine::Gillespie).unwrap();
    let want = 2.0 - (-kappa * a).exp();
    assert!((est.mean - want).abs() < 3.0 * est.stderr, "{} +- {}", est.mean, est.stderr);
}

#[test]
fn fpp_and_gillespie_laws_agree_on_cycle() {
    let xi = build_random_walk(&Graph::cycle(4).unwrap());
    let m = PercolationModel::new(xi, 1.0).unwrap();
    let v = SubsetState::from_indices(4, &[0]).unwrap();
    let a = mc_law(&m, &v, 0.8, 20_000, 1, McEngine::Gillespie).unwrap();
    let b = mc_law(&m, &v, 0.8, 20_000, 2, McEngine::Fpp).unwrap();
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).cloned().collect();
    let tv: f64 = keys
        .iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.03, "tv = {tv}");
}

#[test]
fn trajectories_are_seed_deterministic() {
    let m = PercolationModel::new(build_mean_field(6).unwrap(), 1.0).unwrap();
    let v = SubsetState::from_indices(6, &[2]).unwrap();
    assert_eq!(simulate(&m, &v, 2.0, 9).unwrap(), simulate(&m, &v, 2.0, 9).unwrap());
    assert_eq!(fpp_simulate(&m, &v, 2.0, 9).unwrap(), fpp_simulate(&m, &v, 2.0, 9).unwrap());
    let t = simulate(&m, &v, 2.0, 9).unwrap();
    assert!(t.times.windows(2).all(|w| w[0] <= w[1]));
    assert!(t.final_state().contains(2));
}

#[test]
fn lumped_chain_matches_subset_engine() {
    let n = 10;
    let m = PercolationModel::new(build_mean_field(n).unwrap(), 0.7).unwrap();
    let e = ExactEngine::new(&m).unwrap();
    let sq = SubsetFunction::cardinality_pow(n, 2).unwrap();
    for k in 1..=4 {
        let v = SubsetState::from_indices(n, &(0..k).collect::<Vec<_>>()).unwrap();
        let a = e.expectation(&sq, &v, 1.5, 1e-14).unwrap();
        let b = mean_field_moment(n, k, 0.7, 1.5, 2).unwrap();
        assert!((a - b).abs() < 1e-10 * a, "{a} vs {b}");
    }
}
