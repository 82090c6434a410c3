use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use super::{strong_sizes, AdversaryError};
use crate::concentration::{exact_binomial_tail, TailMode};
use crate::dynamics::{neighbor_tally, DisseminationMode, ExpertAssignment, Label, Labeling};
use crate::graph::{Graph, GraphMode};

pub const SEARCH_MAX_VERTICES: usize = 16;
/// Coin outcomes enumerated per assignment in the iterative process.
pub const SEARCH_MAX_STATES: usize = 1 << 20;

/// Coin counts up to this size use exact integer binomial coefficients.
const EXACT_INTEGER_COINS: usize = 120;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub worst: ExpertAssignment,
    /// Probability of a strict One majority under `worst`.
    pub probability: f64,
    /// Number of assignments evaluated.
    pub evaluated: usize,
}

/// `P(Bin(c, 1/2) ≥ t)`.
fn fair_coins_at_least(c: usize, t: i64) -> f64 {
    if t <= 0 {
        return 1.0;
    }
    if t as usize > c {
        return 0.0;
    }
    let t = t as usize;
    if c <= EXACT_INTEGER_COINS {
        let mut binom: u128 = 1;
        let mut hits: u128 = 0;
        for x in 0..=c {
            if x >= t {
                hits += binom;
            }
            binom = binom * (c - x) as u128 / (x + 1) as u128;
        }
        hits as f64 / 2f64.powi(c as i32)
    } else {
        exact_binomial_tail(c as u64, 0.5, TailMode::AtLeast(t as u64))
    }
}

/// Probability that `ones_so_far` plus `c` fair coins is a strict majority of `n`.
fn majority_with_coins(n: usize, ones_so_far: usize, c: usize) -> f64 {
    let need = (n / 2 + 1) as i64 - ones_so_far as i64;
    fair_coins_at_least(c, need)
}

/// Exact probability of a strict One majority for a fixed assignment,
/// summing over every coin outcome.
pub fn exact_one_majority_probability(
    graph: &Graph,
    assignment: &ExpertAssignment,
    mode: DisseminationMode,
) -> Result<f64, AdversaryError> {
    let labels = assignment.labeling(graph.n())?;
    match mode {
        DisseminationMode::NonIterative => {
            let (mut ones, mut coins) = (labels.ones(), 0);
            for v in (0..graph.n()).filter(|&v| labels.get(v) == Label::Unlabeled) {
                let (a, b) = neighbor_tally(graph, &labels, v);
                if a > b {
                    ones += 1;
                } else if a == b {
                    coins += 1;
                }
            }
            Ok(majority_with_coins(graph.n(), ones, coins))
        }
        DisseminationMode::Iterative => {
            let pending = (0..graph.n())
                .filter(|&v| labels.get(v) == Label::Unlabeled)
                .collect();
            let mut states = 0;
            iterative_probability(graph, labels, pending, &mut states)
        }
    }
}

fn iterative_probability(
    graph: &Graph,
    labels: Labeling,
    pending: Vec<usize>,
    states: &mut usize,
) -> Result<f64, AdversaryError> {
    if pending.is_empty() {
        return Ok(if 2 * labels.ones() > graph.n() { 1.0 } else { 0.0 });
    }
    let (mut ones, mut zeros, mut ties, mut waiting) = (vec![], vec![], vec![], vec![]);
    for &v in &pending {
        let (a, b) = neighbor_tally(graph, &labels, v);
        match (a, b) {
            (a, b) if a > b => ones.push(v),
            (a, b) if a < b => zeros.push(v),
            (0, 0) => waiting.push(v),
            _ => ties.push(v),
        }
    }
    if ones.is_empty() && zeros.is_empty() && ties.is_empty() {
        return Ok(majority_with_coins(graph.n(), labels.ones(), waiting.len()));
    }
    let mut base = labels;
    for &v in &ones {
        base.set(v, Label::One);
    }
    for &v in &zeros {
        base.set(v, Label::Zero);
    }
    if ties.len() >= usize::BITS as usize - 1 {
        return Err(AdversaryError::StateCap(SEARCH_MAX_STATES));
    }
    let outcomes = 1usize << ties.len();
    let mut total = 0.0;
    for mask in 0..outcomes {
        *states += 1;
        if *states > SEARCH_MAX_STATES {
            return Err(AdversaryError::StateCap(SEARCH_MAX_STATES));
        }
        let mut next = base.clone();
        for (bit, &v) in ties.iter().enumerate() {
            let label = if mask >> bit & 1 == 1 { Label::One } else { Label::Zero };
            next.set(v, label);
        }
        total += iterative_probability(graph, next, waiting.clone(), states)?;
    }
    Ok(total / outcomes as f64)
}

/// Minimum One-majority probability over every strong assignment of sizes
/// [`strong_sizes`]. Ties in probability go to the lexicographically smallest
/// assignment.
pub fn exhaustive_strong_search(
    graph: &Graph,
    mu: f64,
    delta: f64,
    mode: DisseminationMode,
) -> Result<SearchResult, AdversaryError> {
    let n = graph.n();
    if n > SEARCH_MAX_VERTICES {
        return Err(AdversaryError::SearchCap {
            n,
            limit: SEARCH_MAX_VERTICES,
        });
    }
    if graph.mode() == GraphMode::Random {
        return Err(AdversaryError::RandomGraph);
    }
    super::check_params(mu, delta)?;
    let (k1, k0) = strong_sizes(n, mu, delta);
    let candidates: Vec<ExpertAssignment> = (0..n)
        .combinations(k1)
        .flat_map(|e1| {
            let rest: Vec<usize> = (0..n).filter(|v| !e1.contains(v)).collect();
            rest.into_iter()
                .combinations(k0)
                .map(move |e0| ExpertAssignment::new(e1.clone(), e0))
        })
        .collect();
    let scored = candidates
        .into_par_iter()
        .map(|a| exact_one_majority_probability(graph, &a, mode).map(|p| (p, a)))
        .collect::<Result<Vec<_>, _>>()?;
    let evaluated = scored.len();
    let (probability, worst) = scored
        .into_iter()
        .min_by(|(p, a), (q, b)| p.total_cmp(q).then_with(|| a.cmp(b)))
        .expect("at least one assignment");
    Ok(SearchResult {
        worst,
        probability,
        evaluated,
    })
}
