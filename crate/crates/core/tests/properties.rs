use ghz_core::ops::measure_plus_mass;
use ghz_core::protocol::{
    deserialize, evaluate, finalize_parties, monte_carlo, pairs_per_party, serialize,
};
use ghz_core::{
    fuse, measure_stabilizer, random_dp, GhzDiagState, PauliString, RandomSearchConfig,
    StabilizerIndex,
};
use proptest::prelude::*;

fn state(n: usize) -> impl Strategy<Value = GhzDiagState> {
    prop::collection::vec(0.0f64..1.0, 1 << n).prop_filter_map("nonzero weights", move |w| {
        let total: f64 = w.iter().sum();
        (total > 1e-6).then(|| GhzDiagState::new(n, w.iter().map(|x| x / total).collect()).unwrap())
    })
}

fn sized_state(max: usize) -> impl Strategy<Value = GhzDiagState> {
    (2..=max).prop_flat_map(state)
}

fn searched_protocol() -> impl Strategy<Value = std::sync::Arc<ghz_core::protocol::Node>> {
    (any::<u64>(), 2usize..=4, 0usize..6, 0usize..4).prop_map(|(seed, n, extra, slot)| {
        let k = n - 1 + extra;
        let cfg = RandomSearchConfig {
            buffer: 4,
            temperature: 1e-3,
            seed,
            ..Default::default()
        };
        let t = random_dp(n, k, 0.9, &cfg).unwrap();
        t.cell(n, k).unwrap()[slot].node().clone()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fusion_conserves_probability(a in sized_state(4), b in sized_state(4), i in 0usize..4, j in 0usize..4) {
        let (i, j) = (i % a.n(), j % b.n());
        let out = fuse(&a, i, &b, j).unwrap();
        prop_assert_eq!(out.n(), a.n() + b.n() - 1);
        prop_assert!((out.coeffs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(out.coeffs().iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn measurement_splits_probability(main in sized_state(4), pick in any::<prop::sample::Index>(), anc_seed in any::<u64>()) {
        let n = main.n();
        let s = StabilizerIndex::new(n, 1 + pick.index((1 << n) - 1) as u32).unwrap();
        let w = s.weight();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(anc_seed);
        let weights: Vec<f64> = (0..1 << w).map(|_| rand::Rng::random::<f64>(&mut rng) + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let anc = GhzDiagState::new(w, weights.iter().map(|x| x / total).collect()).unwrap();
        let r = measure_stabilizer(&main, s, &anc).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.success_prob));
        let mass = measure_plus_mass(&main, s, &anc).unwrap();
        prop_assert!((mass.iter().sum::<f64>() - r.success_prob).abs() < 1e-12);
        if let Ok(post) = r.post_state() {
            prop_assert!((post.coeffs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stabilizer_products_follow_masks(n in 2usize..7, a in 1u32..64, b in 1u32..64) {
        let full = (1u32 << n) - 1;
        let (a, b) = (a & full, b & full);
        prop_assume!(a != 0 && b != 0 && a != b);
        let pa = StabilizerIndex::new(n, a).unwrap().to_pauli();
        let pb = StabilizerIndex::new(n, b).unwrap().to_pauli();
        let pab = StabilizerIndex::new(n, a ^ b).unwrap().to_pauli();
        let prod: PauliString = &pa * &pb;
        prop_assert_eq!(prod.letters(), pab.letters());
        // stabilizers commute, so the product is real
        prop_assert!(prod.sign().is_some());
        prop_assert_eq!(&(&pa * &pb), &(&pb * &pa));
    }

    #[test]
    fn protocols_round_trip(root in searched_protocol(), f in 0.5f64..1.0) {
        let p = ghz_core::protocol::Protocol::new(root, Default::default()).with_evaluation(f).unwrap();
        let back = deserialize(&serialize(&p)).unwrap();
        prop_assert_eq!(&back.root, &p.root);
        prop_assert_eq!(back.predicted_fidelity, p.predicted_fidelity);
        prop_assert_eq!(back.success_probabilities, p.success_probabilities);
    }

    #[test]
    fn party_assignment_is_consistent(root in searched_protocol()) {
        let parties = finalize_parties(&root);
        prop_assert_eq!(parties.len(), root.k());
        prop_assert!(parties.iter().all(|&(u, v)| u != v && u < root.n() && v < root.n()));
        let per = pairs_per_party(&root);
        prop_assert_eq!(per.iter().sum::<usize>(), 2 * root.k());
        prop_assert!(per.iter().all(|&c| c > 0));
    }

    #[test]
    fn perfect_pairs_give_perfect_states(root in searched_protocol()) {
        let e = evaluate(&root, 1.0).unwrap();
        prop_assert_eq!(e.state.fidelity(), 1.0);
        prop_assert!(e.success.iter().all(|s| s.probability == 1.0));
    }

    #[test]
    fn failures_only_add_steps(root in searched_protocol(), seed in any::<u64>()) {
        let r = monte_carlo(&root, 0.85, 200, seed).unwrap();
        prop_assert!(r.min_steps >= r.deterministic_steps);
        prop_assert!(r.mean_steps >= r.deterministic_steps as f64);
        prop_assert!(r.p50 <= r.p90 && r.p90 <= r.p99 && r.p99 <= r.max_steps);
    }
}
