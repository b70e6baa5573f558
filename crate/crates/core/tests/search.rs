use std::path::PathBuf;

use aotree::analysis::brute_force_optimal;
use aotree::dataset::encode;
use aotree::search::ChildChoice;
use aotree::synth::random_instance;
use aotree::{fit, load_csv, ClassColumn, Engine, Provenance, SearchConfig, Termination};
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn fit_matches_oracle(seed in any::<u64>(), depth in prop::option::of(1usize..=3)) {
        let inst = random_instance(seed);
        let config = SearchConfig::new(inst.lambda).max_depth(depth);
        let (tree, stats) = fit(&inst.dataset, config).unwrap();
        let (best, _) = brute_force_optimal(&inst.dataset, inst.lambda, depth).unwrap();
        prop_assert_eq!(stats.termination, Termination::Solved);
        prop_assert!((stats.objective - best).abs() <= 1e-9, "{} vs {}", stats.objective, best);
        if let Some(d) = depth {
            prop_assert!(tree.root.depth() <= d);
        }
        let eval = tree.evaluate(&inst.dataset).unwrap();
        prop_assert!((eval.objective - stats.objective).abs() <= 1e-12);
        prop_assert!(stats.evaluations >= stats.iterations || stats.iterations == 0);
    }

    #[test]
    fn lowest_upper_policy_is_also_optimal(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let config = SearchConfig::new(inst.lambda).child_choice(ChildChoice::LowestUpper);
        let (_, stats) = fit(&inst.dataset, config).unwrap();
        let (best, _) = brute_force_optimal(&inst.dataset, inst.lambda, None).unwrap();
        prop_assert!((stats.objective - best).abs() <= 1e-9);
    }

    #[test]
    fn anytime_tree_is_valid_at_every_budget(seed in any::<u64>(), budget in 0u64..6) {
        let inst = random_instance(seed);
        let (tree, stats) = fit(&inst.dataset, SearchConfig::new(inst.lambda).max_iterations(Some(budget))).unwrap();
        let (best, _) = brute_force_optimal(&inst.dataset, inst.lambda, None).unwrap();
        prop_assert!(stats.objective <= best + 1e-9);
        prop_assert!(stats.iterations <= budget);
        if stats.termination != Termination::Solved {
            prop_assert_eq!(tree.provenance, Provenance::Anytime);
        }
    }
}

#[test]
fn parallel_and_sequential_agree() {
    let class = ClassColumn::Name("class".into());
    let raw = load_csv(data("mushroom.csv"), &class, true).unwrap().drop_constant_features().0;
    let ds = encode(&raw, aotree::Encoding::Ordinal).unwrap();
    let (tp, sp) = fit(&ds, SearchConfig::new(0.01).parallel(true)).unwrap();
    let (ts, ss) = fit(&ds, SearchConfig::new(0.01).parallel(false)).unwrap();
    assert_eq!(tp.root, ts.root);
    assert_eq!((sp.iterations, sp.evaluations, sp.memo_size), (ss.iterations, ss.evaluations, ss.memo_size));
    assert_eq!(sp.objective, ss.objective);
}

#[test]
fn monk1_trace_is_deterministic() {
    let raw = load_csv(data("monk1.csv"), &ClassColumn::default(), true).unwrap();
    let ds = encode(&raw, aotree::Encoding::OnehotFull).unwrap();
    let trace = |parallel| {
        let mut engine = Engine::new(&ds, SearchConfig::new(0.01).parallel(parallel)).unwrap();
        let mut lines = Vec::new();
        engine.run_with(|e, it| lines.push(e.trace_line(it)));
        lines
    };
    let first = trace(true);
    assert_eq!(first, trace(false));
    assert_eq!(first.len(), 284);
}

#[test]
fn memo_keys_are_canonical_and_unique() {
    let inst = random_instance(7);
    let mut engine = Engine::new(&inst.dataset, SearchConfig::new(inst.lambda)).unwrap();
    engine.run();
    let mut seen = std::collections::HashSet::new();
    for (id, node) in engine.nodes().iter().enumerate() {
        assert!(seen.insert(node.key.clone()));
        assert_eq!(engine.lookup(&node.key), Some(id as u32));
        assert!(node.key.clauses().windows(2).all(|w| w[0].0 < w[1].0));
    }
}
