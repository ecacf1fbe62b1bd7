mod common;

use common::*;
use objcat::knowledge::*;
use objcat::scenarios::{example_actions, example_schema};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn graph_invariants_hold_along_random_sequences(
        params in parameters(),
        seed in any::<u64>(),
        ops in prop::collection::vec(op(), 1..40),
    ) {
        let (g1, a1) = run_ops(params, seed, &ops)?;
        // determinism under a fixed seed
        let (g2, a2) = run_ops(params, seed, &ops)?;
        prop_assert_eq!(a1, a2);
        prop_assert_eq!(g1, g2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn merge_quiescence_after_every_reward(
        params in parameters(),
        seed in any::<u64>(),
        interactions in prop::collection::vec((raw_percept(), reward()), 1..30),
    ) {
        let schema = example_schema();
        let mut agent = Agent::new(KnowledgeGraph::new(schema.clone(), example_actions(), params, seed).unwrap());
        for (i, ((color, form), r)) in interactions.into_iter().enumerate() {
            let p = Percept::from_values(&schema, &[color, form]).unwrap();
            agent.present(format!("p{i}"), p).unwrap();
            prop_assert!(agent.reward(r).is_ok());
            prop_assert!(agent.graph().merge_candidate().is_none());
            prop_assert_eq!(agent.history().len(), i + 1);
        }
    }

    #[test]
    fn weight_adaptation_conserves_the_sum(
        features in 1usize..6,
        steps in prop::collection::vec((0u8..3, prop::collection::vec(-1.0f64..1.0, 6), 0.0f64..2.0), 1..60),
    ) {
        let mut w = AttributeWeights::uniform(features);
        for (case, sims, step) in steps {
            let case = [AdaptationCase::Merged, AdaptationCase::Split, AdaptationCase::ContradictingFirstExperience][case as usize];
            w.adapt(case, &sims[..=features], step);
            prop_assert!((w.sum() - (features + 1) as f64).abs() < 1e-9);
            prop_assert!(w.values().iter().all(|&v| v >= 0.0));
        }
    }
}
