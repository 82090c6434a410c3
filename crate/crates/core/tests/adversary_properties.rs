use proptest::prelude::*;

use opinion_core::adversary::{
    exact_one_majority_probability, exhaustive_strong_search, expert_count, format_assignment,
    parse_assignment, random_adversary, read_assignment, strong_adversary, strong_sizes,
    weak_adversary, AdversaryError, AdversaryKind, AdversarySpec, Strategy,
};
use opinion_core::dynamics::{DisseminationMode, Disseminator, ExpertAssignment};
use opinion_core::experiments::{run_experiment, ExperimentConfig};
use opinion_core::graph::{
    disjoint_union, generate_complete, generate_counterexample, generate_line,
    generate_random_regular, generate_star, Block, ConstructionMode, CounterexampleParams, Graph,
    GraphSpec,
};

fn star_expander() -> Graph {
    disjoint_union(&generate_star(500), &generate_random_regular(2000, 4, 3).unwrap())
}

#[test]
fn random_adversary_label_split_is_binomial() {
    let g = generate_complete(100);
    let draws = 10_000;
    let total: usize = (0..draws)
        .map(|s| {
            let a = random_adversary(&g, 0.4, 0.2, s).unwrap();
            assert_eq!(a.len(), 40);
            a.e1.len()
        })
        .sum();
    let mean = total as f64 / draws as f64;
    // Standard error of the mean of Bin(40, 0.7) draws.
    let sigma = (40.0f64 * 0.7 * 0.3).sqrt() / (draws as f64).sqrt();
    assert!((mean - 28.0).abs() < 4.0 * sigma, "mean |E1| = {mean}");
}

#[test]
fn random_adversary_experts_are_uniform() {
    // Each vertex is chosen with probability 40/100.
    let g = generate_complete(100);
    let mut hits = [0usize; 100];
    let draws = 5_000;
    for s in 0..draws {
        let a = random_adversary(&g, 0.4, 0.2, s).unwrap();
        for &v in a.e1.iter().chain(&a.e0) {
            hits[v] += 1;
        }
    }
    let sigma = (draws as f64 * 0.4 * 0.6).sqrt();
    for (v, &h) in hits.iter().enumerate() {
        assert!((h as f64 - 0.4 * draws as f64).abs() < 5.0 * sigma, "vertex {v}: {h}");
    }
}

#[test]
fn half_delta_leaves_no_zero_experts() {
    let g = generate_line(30);
    let a = random_adversary(&g, 0.3, 0.5, 4).unwrap();
    assert!(a.e0.is_empty());
    let w = weak_adversary(&g, &Strategy::EvenSpread, 0.3, 0.5, 4).unwrap();
    assert!(w.e0.is_empty());
    let s = strong_adversary(&g, &Strategy::EvenSpread, 0.3, 0.5, 4).unwrap();
    assert!(s.e0.is_empty());
    for a in [a, w, s] {
        let d = Disseminator::new(&g, &a).unwrap();
        let it = d.iterative(1).final_labeling;
        assert_eq!(it.ones(), 30, "connected graph, only One experts");
    }
}

#[test]
fn weak_star_center_is_an_expert() {
    let g = star_expander();
    let mu = 80.0 / g.n() as f64;
    for seed in 0..20 {
        let a = weak_adversary(&g, &Strategy::StarCenterFirst, mu, 0.25, seed).unwrap();
        assert_eq!(a.len(), 80);
        assert!(a.e1.contains(&0) || a.e0.contains(&0));
    }
}

#[test]
fn strong_ones_on_star() {
    let g = star_expander();
    let mu = 80.0 / g.n() as f64;
    let a = strong_adversary(&g, &Strategy::OnesOnStar, mu, 0.25, 0).unwrap();
    assert_eq!((a.e1.len(), a.e0.len()), strong_sizes(g.n(), mu, 0.25));
    assert!(a.e1.iter().all(|&v| v <= 500));
    assert!(a.e1.contains(&0));
}

#[test]
fn prefix_on_path() {
    let g = generate_line(13);
    let a = strong_adversary(&g, &Strategy::Prefix { ones: 6, zeros: 2 }, 8.0 / 13.0, 0.25, 0).unwrap();
    assert_eq!(a, ExpertAssignment::new((0..6).collect(), vec![6, 7]));
}

#[test]
fn blocks_strategy_needs_the_five_block_graph() {
    let p = CounterexampleParams::new(0.4, 0.45, 0.089, 5e-4, 0.004);
    let g = generate_counterexample(&p, 20_000, ConstructionMode::Regular, 0).unwrap();
    let a = strong_adversary(&g, &Strategy::BlocksIO, 0.4, 0.45, 0).unwrap();
    let l = g.layout().unwrap();
    assert_eq!(a.e1, l.range(Block::I).collect::<Vec<_>>());
    assert_eq!(a.e0, l.range(Block::O).collect::<Vec<_>>());
    assert!(matches!(
        strong_adversary(&generate_line(13), &Strategy::BlocksIO, 0.4, 0.45, 0),
        Err(AdversaryError::Structure { .. })
    ));
}

#[test]
fn strong_size_mismatch_is_rejected() {
    let g = generate_line(13);
    let r = strong_adversary(&g, &Strategy::Prefix { ones: 5, zeros: 3 }, 8.0 / 13.0, 0.25, 0);
    assert!(matches!(r, Err(AdversaryError::SizeMismatch { .. })));
}

#[test]
fn assignment_file_round_trip() {
    let a = ExpertAssignment::new(vec![3, 1, 4], vec![5, 9]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.txt");
    std::fs::write(&path, format_assignment(&a)).unwrap();
    assert_eq!(read_assignment(&path).unwrap(), a);
    assert!(parse_assignment("E1: 1 2\n").is_err());
    assert!(parse_assignment("E1: 1\nE0: x\n").is_err());
}

/// Small deterministic graphs for the oracle comparison.
fn small_graphs() -> Vec<(&'static str, GraphSpec)> {
    vec![
        ("line9", GraphSpec::Line { n: 9 }),
        ("star7", GraphSpec::Star { leaves: 7 }),
        ("k6", GraphSpec::Complete { n: 6 }),
        (
            "star_line",
            GraphSpec::Union {
                parts: vec![GraphSpec::Star { leaves: 4 }, GraphSpec::Line { n: 6 }],
            },
        ),
        (
            "k3_k4",
            GraphSpec::Union {
                parts: vec![GraphSpec::Complete { n: 3 }, GraphSpec::Complete { n: 4 }],
            },
        ),
    ]
}

#[test]
fn exhaustive_search_agrees_with_monte_carlo() {
    for (name, spec) in small_graphs() {
        let g = spec.build(None).unwrap();
        for mode in [DisseminationMode::Iterative, DisseminationMode::NonIterative] {
            let r = exhaustive_strong_search(&g, 0.4, 0.25, mode).unwrap();
            let worst = r.worst.clone();
            let config = ExperimentConfig {
                scenario: name.into(),
                graph: spec.clone(),
                adversary: AdversarySpec::new(
                    AdversaryKind::Strong,
                    0.4,
                    0.25,
                    Some(Strategy::Explicit { e1: worst.e1.clone(), e0: worst.e0.clone() }),
                ),
                mode,
                trials: 4000,
                seed: 99,
                resample_graph: None,
                record_timing: false,
            };
            let (_, summary) = run_experiment(&config).unwrap();
            let q = r.probability;
            let se = (q * (1.0 - q) / 4000.0).sqrt();
            let f = summary.one_majority.frequency;
            assert!((f - q).abs() <= 3.0 * se + 1e-12, "{name} {mode}: {f} vs {q}");
            assert_eq!(exact_one_majority_probability(&g, &worst, mode).unwrap(), q);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assignments_respect_size_contracts(
        n in 10usize..300,
        mu in 0.05f64..0.5,
        delta in 0.01f64..=0.5,
        seed in any::<u64>(),
    ) {
        let g = generate_line(n);
        let k = expert_count(n, mu);
        let r = random_adversary(&g, mu, delta, seed).unwrap();
        prop_assert_eq!(r.len(), k);
        prop_assert!(r.validate(n).is_ok());
        prop_assert_eq!(&r, &random_adversary(&g, mu, delta, seed).unwrap());

        let w = weak_adversary(&g, &Strategy::EvenSpread, mu, delta, seed).unwrap();
        prop_assert_eq!(w.len(), k);
        prop_assert!(w.validate(n).is_ok());

        let (k1, k0) = strong_sizes(n, mu, delta);
        prop_assert_eq!(k1 + k0, k);
        for s in [Strategy::EvenSpread, Strategy::RandomPlacement { seed: Some(seed) }] {
            let a = strong_adversary(&g, &s, mu, delta, seed).unwrap();
            prop_assert_eq!((a.e1.len(), a.e0.len()), (k1, k0));
            prop_assert!(a.validate(n).is_ok());
        }
    }
}
