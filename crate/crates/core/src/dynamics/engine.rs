use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{DynamicsError, ExpertAssignment, Label, Labeling};
use crate::graph::Graph;

/// Traces of graphs larger than this are exported as counts only.
pub const TRACE_LIST_LIMIT: usize = 10_000;

/// Labeled-vertex counts per block, so clique neighborhoods are tallied
/// without touching their members.
#[derive(Clone, Copy, Default)]
struct BlockTotals {
    ones: [u32; 5],
    zeros: [u32; 5],
}

impl BlockTotals {
    fn from_labeling(graph: &Graph, labels: &Labeling) -> Self {
        let mut t = Self::default();
        if graph.layout().is_some() {
            for v in 0..labels.len() {
                t.add(graph, v, labels.get(v));
            }
        }
        t
    }

    fn add(&mut self, graph: &Graph, v: usize, label: Label) {
        if let Some(b) = graph.block_of(v) {
            match label {
                Label::One => self.ones[b.index()] += 1,
                Label::Zero => self.zeros[b.index()] += 1,
                Label::Unlabeled => {}
            }
        }
    }
}

/// Labeled One / Zero neighbors of `v`, where `v` itself is unlabeled.
fn tally(graph: &Graph, labels: &[Label], totals: &BlockTotals, v: usize) -> (u32, u32) {
    let (mut a, mut b) = (0u32, 0u32);
    for &blk in graph.implicit_blocks(v) {
        a += totals.ones[blk.index()];
        b += totals.zeros[blk.index()];
    }
    for &u in graph.explicit_neighbors(v) {
        match labels[u as usize] {
            Label::One => a += 1,
            Label::Zero => b += 1,
            Label::Unlabeled => {}
        }
    }
    (a, b)
}

/// Plain neighbor scan of labeled One / Zero neighbors. Counts `v`'s own
/// label never, since a vertex is not its own neighbor.
pub fn neighbor_tally(graph: &Graph, labeling: &Labeling, v: usize) -> (usize, usize) {
    graph
        .neighbors(v)
        .fold((0, 0), |(a, b), u| match labeling.get(u) {
            Label::One => (a + 1, b),
            Label::Zero => (a, b + 1),
            Label::Unlabeled => (a, b),
        })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub index: usize,
    pub ones: Vec<u32>,
    pub zeros: Vec<u32>,
    /// Coins flipped in this round.
    pub coins: usize,
    /// Fallback round: nothing could be decided, all remaining vertices flipped coins.
    pub stall: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub rounds: Vec<RoundRecord>,
    pub coins_used: usize,
    pub final_labeling: Labeling,
}

impl Trace {
    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    /// One JSON record per round. Vertex lists are replaced by counts above
    /// [`TRACE_LIST_LIMIT`] vertices.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let lists = self.final_labeling.len() <= TRACE_LIST_LIMIT;
        for r in &self.rounds {
            let record = if lists {
                serde_json::json!({
                    "round": r.index, "ones": r.ones, "zeros": r.zeros,
                    "coins": r.coins, "stall": r.stall,
                })
            } else {
                serde_json::json!({
                    "round": r.index, "ones_count": r.ones.len(),
                    "zeros_count": r.zeros.len(), "coins": r.coins, "stall": r.stall,
                })
            };
            writeln!(out, "{record}")?;
        }
        Ok(())
    }
}

/// A graph and expert assignment with the first-round tallies precomputed.
///
/// The first round only depends on the experts, so repeated trials that differ
/// only in their tie seed share this work.
pub struct Disseminator<'g> {
    graph: &'g Graph,
    experts: Labeling,
    first: Vec<(u32, u32)>,
}

impl<'g> Disseminator<'g> {
    pub fn new(graph: &'g Graph, assignment: &ExpertAssignment) -> Result<Self, DynamicsError> {
        let experts = assignment.labeling(graph.n())?;
        let totals = BlockTotals::from_labeling(graph, &experts);
        let labels = experts.as_slice();
        let first = (0..graph.n())
            .into_par_iter()
            .with_min_len(256)
            .map(|v| {
                if labels[v] == Label::Unlabeled {
                    tally(graph, labels, &totals, v)
                } else {
                    (0, 0)
                }
            })
            .collect();
        Ok(Self {
            graph,
            experts,
            first,
        })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    /// Expert-only labeling.
    pub fn experts(&self) -> &Labeling {
        &self.experts
    }

    /// `(|N(v) ∩ E₁|, |N(v) ∩ E₀|)` for a non-expert `v`.
    pub fn first_round_tally(&self, v: usize) -> Result<(u32, u32), DynamicsError> {
        if v >= self.graph.n() {
            return Err(DynamicsError::VertexOutOfRange(v));
        }
        if self.experts.get(v) != Label::Unlabeled {
            return Err(DynamicsError::ExpertVertex(v));
        }
        Ok(self.first[v])
    }

    pub fn delta(&self, v: usize) -> Result<i64, DynamicsError> {
        let (a, b) = self.first_round_tally(v)?;
        Ok(a as i64 - b as i64)
    }

    fn non_experts(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.graph.n()).filter(|&v| self.experts.get(v) == Label::Unlabeled)
    }

    /// Single round against the experts; every tie, including vertices with
    /// no expert neighbor, is a fair coin.
    pub fn noniterative(&self, tie_seed: u64) -> Trace {
        let mut rng = ChaCha8Rng::seed_from_u64(tie_seed);
        let mut labels = self.experts.clone();
        let mut round = RoundRecord {
            index: 1,
            ones: Vec::new(),
            zeros: Vec::new(),
            coins: 0,
            stall: false,
        };
        for v in self.non_experts() {
            let (a, b) = self.first[v];
            let one = if a != b {
                a > b
            } else {
                round.coins += 1;
                rng.random::<bool>()
            };
            if one {
                round.ones.push(v as u32);
            } else {
                round.zeros.push(v as u32);
            }
        }
        apply(&mut labels, &round, None);
        Trace {
            coins_used: round.coins,
            rounds: vec![round],
            final_labeling: labels,
        }
    }

    /// Rounds against all labeled vertices until everyone is labeled. Ties
    /// between labeled neighbors are coins; vertices with no labeled neighbor
    /// wait. If a round decides nobody, the remaining vertices flip coins.
    pub fn iterative(&self, tie_seed: u64) -> Trace {
        let graph = self.graph;
        let mut rng = ChaCha8Rng::seed_from_u64(tie_seed);
        let mut labels = self.experts.clone();
        let mut totals = BlockTotals::from_labeling(graph, &labels);
        let mut pending: Vec<usize> = self.non_experts().collect();
        let mut rounds = Vec::new();
        let mut coins_used = 0;

        while !pending.is_empty() {
            let index = rounds.len() + 1;
            let mut round = RoundRecord {
                index,
                ones: Vec::new(),
                zeros: Vec::new(),
                coins: 0,
                stall: false,
            };
            let mut waiting = Vec::new();
            for &v in &pending {
                let (a, b) = if index == 1 {
                    self.first[v]
                } else {
                    tally(graph, labels.as_slice(), &totals, v)
                };
                let one = match a.cmp(&b) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal if a > 0 => {
                        round.coins += 1;
                        rng.random::<bool>()
                    }
                    std::cmp::Ordering::Equal => {
                        waiting.push(v);
                        continue;
                    }
                };
                if one {
                    round.ones.push(v as u32);
                } else {
                    round.zeros.push(v as u32);
                }
            }
            if round.ones.is_empty() && round.zeros.is_empty() {
                round.stall = true;
                for &v in &waiting {
                    round.coins += 1;
                    if rng.random::<bool>() {
                        round.ones.push(v as u32);
                    } else {
                        round.zeros.push(v as u32);
                    }
                }
                waiting.clear();
            }
            apply(&mut labels, &round, Some((graph, &mut totals)));
            coins_used += round.coins;
            rounds.push(round);
            pending = waiting;
        }
        Trace {
            rounds,
            coins_used,
            final_labeling: labels,
        }
    }
}

fn apply(labels: &mut Labeling, round: &RoundRecord, mut totals: Option<(&Graph, &mut BlockTotals)>) {
    for (list, label) in [(&round.ones, Label::One), (&round.zeros, Label::Zero)] {
        for &v in list {
            labels.set(v as usize, label);
            if let Some((g, t)) = totals.as_mut() {
                t.add(g, v as usize, label);
            }
        }
    }
}
