use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use transversal::collection::GraphCollection;
use transversal::config::PipelineConfig;
use transversal::constructions::{
    bridgeless_lower_bound, gnp, has_property_r, random_collection, random_tree, round_robin_one_factorization, Base, Model,
};
use transversal::factors::{builtin_spec, ft_factor};
use transversal::graph::Graph;
use transversal::oracle::{exists_transversal_exact, factor_template, verify_transversal, Decision, TransversalMode};
use transversal::trees::rainbow_spanning_tree;

fn collection(n: usize, m: usize, p: f64, seed: u64) -> GraphCollection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GraphCollection::new(n, (0..m).map(|_| gnp(n, p, &mut rng)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_witnesses_verify(n in 2usize..8, p in 0.2f64..0.9, seed in any::<u64>()) {
        let k2 = builtin_spec("K2").unwrap();
        let n = n & !1;
        let coll = collection(n, n / 2, p, seed);
        let template = factor_template(&k2.f, n / 2);
        let mode = TransversalMode::Factor { r: 2, t: 1 };
        if let Decision::Yes(emb) = exists_transversal_exact(&coll, &template, &mode, u64::MAX).unwrap() {
            prop_assert!(verify_transversal(&coll, &emb, &template, &mode).is_ok());
        }
    }

    #[test]
    fn one_factorizations_partition(half in 1usize..12) {
        let v = 2 * half;
        let ms = round_robin_one_factorization(v).unwrap();
        let mut seen = std::collections::HashSet::new();
        for m in &ms {
            prop_assert_eq!(m.len(), half);
            for &e in m {
                prop_assert!(seen.insert(e));
            }
        }
        prop_assert_eq!(seen.len(), v * (v - 1) / 2);
    }

    #[test]
    fn bridgeless_degree(name in prop::sample::select(vec!["K3", "K4", "C4", "C5", "C6"]), copies in 1usize..6) {
        let spec = builtin_spec(name).unwrap();
        let coll = bridgeless_lower_bound(&spec, copies).unwrap();
        let rn = spec.r() * copies;
        prop_assert_eq!(coll.m(), spec.e() * copies);
        prop_assert_eq!(coll.min_degree().unwrap(), rn / 2 - 1);
    }

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), p in 0.0f64..1.0) {
        for model in [
            Model::IidGnp { p },
            Model::SharedBasePlusNoise { p, noise: 0.1 },
            Model::Identical { base: Base::Gnp { p } },
        ] {
            prop_assert_eq!(random_collection(12, 5, &model, seed).unwrap(), random_collection(12, 5, &model, seed).unwrap());
        }
        prop_assert_eq!(random_tree(20, 3, seed).unwrap().edges(), random_tree(20, 3, seed).unwrap().edges());
    }

    #[test]
    fn property_r_is_monotone_in_the_floor(psi in prop::collection::vec(0usize..3, 16)) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let holds: Vec<bool> = (1..=4).map(|f| has_property_r(&psi, 4, 3, f, &mut rng)).collect();
        for w in holds.windows(2) {
            prop_assert!(!w[0] || w[1]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn factors_on_complete_colours(name in prop::sample::select(vec!["K2", "K3", "P3", "C4", "K1,2"]), copies in 1usize..8, seed in any::<u64>()) {
        let spec = builtin_spec(name).unwrap();
        let n = spec.r() * copies;
        let coll = GraphCollection::identical(&Graph::complete(n), spec.t * copies);
        let f = ft_factor(&coll, &spec, &PipelineConfig::with_seed(seed)).unwrap();
        prop_assert!(f.verify(&coll, &spec).is_ok());
    }

    #[test]
    fn trees_on_complete_colours(n in 2usize..40, cap in 2usize..5, seed in any::<u64>()) {
        let coll = GraphCollection::identical(&Graph::complete(n), n - 1);
        let tree = random_tree(n, cap, seed).unwrap();
        let emb = rainbow_spanning_tree(&coll, &tree, &PipelineConfig::with_seed(seed)).unwrap();
        prop_assert!(verify_transversal(&coll, &emb, &tree.to_graph(), &TransversalMode::Rainbow).is_ok());
    }
}
