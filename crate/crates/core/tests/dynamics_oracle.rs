//! The dissemination engines against a plain adjacency-list reimplementation.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opinion_core::adversary::random_adversary;
use opinion_core::dynamics::{
    delta, expected_delta, BlockCounts, Disseminator, ExpertAssignment, Label,
};
use opinion_core::graph::{
    disjoint_union, generate_complete, generate_counterexample, generate_er, generate_line,
    generate_star, Block, ConstructionMode, CounterexampleParams, Graph,
};

fn reference() -> CounterexampleParams {
    CounterexampleParams::new(0.4, 0.45, 0.089, 5e-4, 0.004)
}

fn adjacency(g: &Graph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.n()];
    for (u, v) in g.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    adj
}

fn initial(n: usize, a: &ExpertAssignment) -> Vec<Label> {
    let mut labels = vec![Label::Unlabeled; n];
    for &v in &a.e1 {
        labels[v] = Label::One;
    }
    for &v in &a.e0 {
        labels[v] = Label::Zero;
    }
    labels
}

fn count(adj: &[usize], labels: &[Label]) -> (usize, usize) {
    let ones = adj.iter().filter(|&&u| labels[u] == Label::One).count();
    let zeros = adj.iter().filter(|&&u| labels[u] == Label::Zero).count();
    (ones, zeros)
}

fn naive_noniterative(adj: &[Vec<usize>], a: &ExpertAssignment, seed: u64) -> Vec<Label> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let experts = initial(adj.len(), a);
    let mut out = experts.clone();
    for v in 0..adj.len() {
        if experts[v] != Label::Unlabeled {
            continue;
        }
        let (x, y) = count(&adj[v], &experts);
        let one = if x == y { rng.random::<bool>() } else { x > y };
        out[v] = if one { Label::One } else { Label::Zero };
    }
    out
}

/// Labels and the number of rounds.
fn naive_iterative(adj: &[Vec<usize>], a: &ExpertAssignment, seed: u64) -> (Vec<Label>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = initial(adj.len(), a);
    let mut rounds = 0;
    while labels.contains(&Label::Unlabeled) {
        rounds += 1;
        let snapshot = labels.clone();
        let mut decided = false;
        for v in 0..adj.len() {
            if snapshot[v] != Label::Unlabeled {
                continue;
            }
            let (x, y) = count(&adj[v], &snapshot);
            if x == 0 && y == 0 {
                continue;
            }
            let one = if x == y { rng.random::<bool>() } else { x > y };
            labels[v] = if one { Label::One } else { Label::Zero };
            decided = true;
        }
        if !decided {
            for l in labels.iter_mut().filter(|l| **l == Label::Unlabeled) {
                *l = if rng.random::<bool>() { Label::One } else { Label::Zero };
            }
        }
    }
    (labels, rounds)
}

fn some_assignment(n: usize, experts: usize, seed: u64) -> ExpertAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, n, experts.min(n)).into_vec();
    let split = rng.random_range(0..=chosen.len());
    ExpertAssignment::new(chosen[..split].to_vec(), chosen[split..].to_vec())
}

fn check_against_naive(g: &Graph, a: &ExpertAssignment, seed: u64) {
    let adj = adjacency(g);
    let d = Disseminator::new(g, a).unwrap();
    let non = d.noniterative(seed);
    assert_eq!(non.final_labeling.as_slice(), naive_noniterative(&adj, a, seed).as_slice());
    assert_eq!(non.round_count(), 1);

    let it = d.iterative(seed);
    let (labels, rounds) = naive_iterative(&adj, a, seed);
    assert_eq!(it.final_labeling.as_slice(), labels.as_slice());
    assert_eq!(it.round_count(), rounds);
    check_trace_invariants(g, a, &it);
}

fn check_trace_invariants(g: &Graph, a: &ExpertAssignment, t: &opinion_core::dynamics::Trace) {
    let labels = &t.final_labeling;
    assert_eq!(labels.unlabeled(), 0);
    assert_eq!(labels.ones() + labels.zeros(), g.n());
    assert!(a.e1.iter().all(|&v| labels.get(v) == Label::One));
    assert!(a.e0.iter().all(|&v| labels.get(v) == Label::Zero));
    let mut seen = vec![false; g.n()];
    for &v in a.e1.iter().chain(&a.e0) {
        seen[v] = true;
    }
    for r in &t.rounds {
        // Every round labels someone new, and nobody twice.
        assert!(!r.ones.is_empty() || !r.zeros.is_empty());
        for &v in r.ones.iter().chain(&r.zeros) {
            assert!(!seen[v as usize], "vertex {v} relabeled in round {}", r.index);
            seen[v as usize] = true;
        }
        for &v in &r.ones {
            assert_eq!(labels.get(v as usize), Label::One);
        }
    }
    assert!(seen.iter().all(|&s| s));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engines_match_naive_on_er(
        n in 1usize..120,
        p in 0.0f64..0.2,
        experts in 0usize..30,
        seed in any::<u64>(),
    ) {
        let g = generate_er(n, p, seed).unwrap();
        check_against_naive(&g, &some_assignment(n, experts, seed ^ 1), seed ^ 2);
    }

    #[test]
    fn engines_match_naive_on_small_counterexample(seed in any::<u64>(), regular in any::<bool>()) {
        let mode = if regular { ConstructionMode::Regular } else { ConstructionMode::Random };
        let g = generate_counterexample(&reference(), 1500, mode, seed).unwrap();
        check_against_naive(&g, &some_assignment(1500, 600, seed), seed);
    }

    #[test]
    fn engines_match_naive_on_unions(leaves in 1usize..40, len in 1usize..40, seed in any::<u64>()) {
        let g = disjoint_union(&generate_star(leaves), &generate_line(len));
        let g = disjoint_union(&g, &generate_complete(5));
        let n = g.n();
        check_against_naive(&g, &some_assignment(n, n / 5, seed), seed);
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let g = generate_er(200, 0.03, seed).unwrap();
        let a = some_assignment(200, 20, seed);
        let d = Disseminator::new(&g, &a).unwrap();
        prop_assert_eq!(d.iterative(seed), d.iterative(seed));
        prop_assert_eq!(d.noniterative(seed), d.noniterative(seed));
    }

    #[test]
    fn full_first_round_makes_engines_agree(n in 2usize..60, e1 in 0usize..30, e0 in 0usize..30, seed in any::<u64>()) {
        // On a complete graph every non-expert decides in round 1 and the
        // coins are drawn in the same order.
        prop_assume!(e1 + e0 >= 1 && e1 + e0 <= n);
        let g = generate_complete(n);
        let a = ExpertAssignment::new((0..e1).collect(), (e1..e1 + e0).collect());
        let d = Disseminator::new(&g, &a).unwrap();
        prop_assert_eq!(d.iterative(seed).final_labeling, d.noniterative(seed).final_labeling);
    }
}

#[test]
fn reference_placement_trace() {
    let g = generate_counterexample(&reference(), 20_000, ConstructionMode::Regular, 0).unwrap();
    let l = g.layout().unwrap();
    let a = ExpertAssignment::new(l.range(Block::I).collect(), l.range(Block::O).collect());
    let d = Disseminator::new(&g, &a).unwrap();

    let it = d.iterative(9);
    assert_eq!(it.round_count(), 2);
    assert_eq!(it.coins_used, 0);
    let first = &it.rounds[0];
    let j: Vec<u32> = l.range(Block::J).map(|v| v as u32).collect();
    let p: Vec<u32> = l.range(Block::P).map(|v| v as u32).collect();
    let dd: Vec<u32> = l.range(Block::D).map(|v| v as u32).collect();
    assert_eq!(first.ones, j);
    assert_eq!(first.zeros, p);
    assert_eq!(it.rounds[1].ones, dd);
    assert_eq!(it.final_labeling.ones(), 10_040);
    assert_eq!(it.final_labeling.zeros(), 9_960);

    let non = d.noniterative(9);
    assert_eq!(non.coins_used, 80);
    for v in l.range(Block::J) {
        assert_eq!(non.final_labeling.get(v), Label::One);
    }
    for v in l.range(Block::P) {
        assert_eq!(non.final_labeling.get(v), Label::Zero);
    }
    check_trace_invariants(&g, &a, &it);
}

#[test]
fn reference_placement_regular_deltas_match_expectation() {
    let p = reference();
    let g = generate_counterexample(&p, 20_000, ConstructionMode::Regular, 0).unwrap();
    let l = g.layout().unwrap();
    let a = ExpertAssignment::new(l.range(Block::I).collect(), l.range(Block::O).collect());
    let counts = BlockCounts::from_assignment(&g, &a).unwrap();
    let d = Disseminator::new(&g, &a).unwrap();
    for (b, exact) in [(Block::J, 676), (Block::P, -4)] {
        let e = expected_delta(b, &counts, &p, 20_000).unwrap();
        for v in l.range(b) {
            assert_eq!(d.delta(v).unwrap(), exact);
            assert!((exact as f64 - e).abs() <= 3.0);
        }
    }
}

#[test]
fn whole_block_assignments_stay_within_three_of_expectation() {
    // Labeling whole blocks leaves one rounding unit per incident random
    // block plus the single D edge as the only gap to the expectation.
    let p = reference();
    let g = generate_counterexample(&p, 20_000, ConstructionMode::Regular, 0).unwrap();
    let l = g.layout().unwrap();
    let choices = [Label::Unlabeled, Label::One, Label::Zero];
    for code in 0..3usize.pow(5) {
        let mut e1 = Vec::new();
        let mut e0 = Vec::new();
        let mut block_label = [Label::Unlabeled; 5];
        for (k, b) in Block::ALL.into_iter().enumerate() {
            block_label[k] = choices[code / 3usize.pow(k as u32) % 3];
            match block_label[k] {
                Label::One => e1.extend(l.range(b)),
                Label::Zero => e0.extend(l.range(b)),
                Label::Unlabeled => {}
            }
        }
        let a = ExpertAssignment::new(e1, e0);
        let counts = BlockCounts::from_assignment(&g, &a).unwrap();
        let d = Disseminator::new(&g, &a).unwrap();
        for (k, b) in Block::ALL.into_iter().enumerate().filter(|&(_, b)| b != Block::D) {
            if block_label[k] != Label::Unlabeled {
                continue;
            }
            let e = expected_delta(b, &counts, &p, g.n()).unwrap();
            let worst = l
                .range(b)
                .map(|v| (d.delta(v).unwrap() as f64 - e).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 3.0, "labels {block_label:?}, block {b}: deviation {worst}");
        }
    }
}

#[test]
fn random_mode_mean_delta_on_p() {
    let p = reference();
    let g = generate_counterexample(&p, 20_000, ConstructionMode::Random, 21).unwrap();
    let l = g.layout().unwrap();
    let a = ExpertAssignment::new(l.range(Block::I).collect(), l.range(Block::O).collect());
    let d = Disseminator::new(&g, &a).unwrap();
    let sum: i64 = l.range(Block::P).map(|v| d.delta(v).unwrap()).sum();
    let mean = sum as f64 / l.sizes().p as f64;
    let q = p.p_ip();
    let sigma = (q * (1.0 - q) * l.sizes().i as f64).sqrt();
    assert!((mean + 3.8).abs() < 4.0 * sigma, "mean delta {mean}");
    // The mean of |P| independent vertices concentrates far more tightly.
    assert!((mean + 3.8).abs() < 4.0 * sigma / (l.sizes().p as f64).sqrt());
}

#[test]
fn empty_assignment_flips_every_vertex() {
    let g = generate_er(300, 0.05, 2).unwrap();
    let a = ExpertAssignment::empty();
    let d = Disseminator::new(&g, &a).unwrap();
    assert_eq!(d.noniterative(1).coins_used, 300);
    let it = d.iterative(1);
    assert_eq!(it.coins_used, 300);
    assert!(it.rounds[0].stall);
}

#[test]
fn delta_counts_expert_neighbours() {
    let g = generate_line(13);
    let a = ExpertAssignment::new((0..6).collect(), vec![6, 7]);
    assert_eq!(delta(&g, &a, 8).unwrap(), -1);
    assert_eq!(delta(&g, &a, 12).unwrap(), 0);
}

#[test]
fn random_adversary_assignments_feed_the_engines() {
    let g = generate_er(500, 0.02, 4).unwrap();
    for seed in 0..10 {
        let a = random_adversary(&g, 0.4, 0.2, seed).unwrap();
        check_against_naive(&g, &a, seed);
    }
}
