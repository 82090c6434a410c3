use std::path::PathBuf;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{read_assignment, AdversaryError};
use crate::dynamics::ExpertAssignment;
use crate::graph::{Block, Graph, PartKind};

/// Named expert placements.
///
/// Ordering strategies (`star_center_first`, `even_spread`) produce a vertex
/// sequence; the strong adversary gives the first `|E₀|` of it label Zero and
/// the rest label One.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Strategy {
    /// `E₁ = I`, `E₀ = O` on the five-block graph.
    #[serde(rename = "blocks_I_O")]
    BlocksIO,
    /// `E₁ = {0..ones}`, `E₀` the next `zeros` vertices.
    Prefix { ones: usize, zeros: usize },
    Explicit { e1: Vec<usize>, e0: Vec<usize> },
    AssignmentFile { path: PathBuf },
    /// Center of the first star, then [`Strategy::EvenSpread`] over the rest.
    StarCenterFirst,
    /// `E₁` on the first star (center first), `E₀` spread over everything else.
    OnesOnStar,
    /// Greedy: each next expert minimizes the largest expert count in any
    /// closed neighborhood it touches.
    EvenSpread,
    /// Uniform random set; without a seed the caller's random stream is used.
    RandomPlacement {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::BlocksIO => "blocks_I_O",
            Strategy::Prefix { .. } => "prefix",
            Strategy::Explicit { .. } => "explicit",
            Strategy::AssignmentFile { .. } => "assignment_file",
            Strategy::StarCenterFirst => "star_center_first",
            Strategy::OnesOnStar => "ones_on_star",
            Strategy::EvenSpread => "even_spread",
            Strategy::RandomPlacement { .. } => "random_placement",
        }
    }

    /// Whether the outcome depends on the caller's random stream.
    pub fn is_randomized(&self) -> bool {
        matches!(self, Strategy::RandomPlacement { seed: None })
    }

    fn structure(&self, reason: impl Into<String>) -> AdversaryError {
        AdversaryError::Structure {
            strategy: self.name().to_string(),
            reason: reason.into(),
        }
    }

    /// Expert set of size `k` for the weak adversary.
    pub fn select(&self, graph: &Graph, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>, AdversaryError> {
        let n = graph.n();
        if k > n {
            return Err(AdversaryError::SizeMismatch {
                expected: format!("at most {n}"),
                got: k.to_string(),
            });
        }
        let set = match self {
            Strategy::BlocksIO => {
                let l = graph
                    .layout()
                    .ok_or_else(|| self.structure("graph has no I/J/O/P/D blocks"))?;
                l.range(Block::I).chain(l.range(Block::O)).take(k).collect()
            }
            Strategy::Prefix { ones, zeros } => (0..(ones + zeros).min(n)).collect(),
            Strategy::Explicit { .. } | Strategy::AssignmentFile { .. } => {
                let a = self.assign(graph, 0, 0, rng)?;
                a.e1.iter().chain(&a.e0).copied().collect()
            }
            Strategy::StarCenterFirst => {
                let star = first_star(graph).ok_or_else(|| self.structure("no star part"))?;
                let mut s = Spreader::new(n);
                if k > 0 {
                    s.place(graph, star.start);
                }
                s.fill(graph, k, |_| true)
            }
            Strategy::OnesOnStar => {
                let star = first_star(graph).ok_or_else(|| self.structure("no star part"))?;
                let mut s = Spreader::new(n);
                for v in star.clone().take(k) {
                    s.place(graph, v);
                }
                s.fill(graph, k, |_| true)
            }
            Strategy::EvenSpread => Spreader::new(n).fill(graph, k, |_| true),
            Strategy::RandomPlacement { seed } => {
                let mut own = seed.map(ChaCha8Rng::seed_from_u64);
                let rng = own.as_mut().unwrap_or(rng);
                let mut set = index::sample(rng, n, k).into_vec();
                set.shuffle(rng);
                set
            }
        };
        Ok(set)
    }

    /// Labeled expert sets for the strong adversary. Sizes are checked by the caller.
    pub fn assign(
        &self,
        graph: &Graph,
        k1: usize,
        k0: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<ExpertAssignment, AdversaryError> {
        let a = match self {
            Strategy::BlocksIO => {
                let l = graph
                    .layout()
                    .ok_or_else(|| self.structure("graph has no I/J/O/P/D blocks"))?;
                ExpertAssignment::new(l.range(Block::I).collect(), l.range(Block::O).collect())
            }
            Strategy::Prefix { ones, zeros } => {
                ExpertAssignment::new((0..*ones).collect(), (*ones..ones + zeros).collect())
            }
            Strategy::Explicit { e1, e0 } => ExpertAssignment::new(e1.clone(), e0.clone()),
            Strategy::AssignmentFile { path } => read_assignment(path)?,
            Strategy::OnesOnStar => {
                let star = first_star(graph).ok_or_else(|| self.structure("no star part"))?;
                if star.len() < k1 {
                    return Err(self.structure(format!(
                        "star has {} vertices, {k1} ones requested",
                        star.len()
                    )));
                }
                let e1: Vec<usize> = star.clone().take(k1).collect();
                let e0 = Spreader::new(graph.n()).fill(graph, k0, |v| !star.contains(&v));
                if e0.len() < k0 {
                    return Err(self.structure("not enough vertices off the star"));
                }
                ExpertAssignment::new(e1, e0)
            }
            Strategy::StarCenterFirst | Strategy::EvenSpread | Strategy::RandomPlacement { .. } => {
                let mut order = self.select(graph, k1 + k0, rng)?;
                let e1 = order.split_off(k0.min(order.len()));
                ExpertAssignment::new(e1, order)
            }
        };
        Ok(a)
    }
}

fn first_star(graph: &Graph) -> Option<std::ops::Range<usize>> {
    graph
        .parts()
        .iter()
        .find(|p| p.kind == PartKind::Star)
        .map(|p| p.range.clone())
}

/// Greedy even placement state: `load[u]` counts chosen vertices in `N[u]`.
struct Spreader {
    load: Vec<u32>,
    chosen: Vec<bool>,
    order: Vec<usize>,
}

impl Spreader {
    fn new(n: usize) -> Self {
        Self {
            load: vec![0; n],
            chosen: vec![false; n],
            order: Vec::new(),
        }
    }

    fn place(&mut self, graph: &Graph, v: usize) {
        self.chosen[v] = true;
        self.order.push(v);
        self.load[v] += 1;
        for u in graph.neighbors(v) {
            self.load[u] += 1;
        }
    }

    /// Extends the placement to `k` vertices, choosing among `allowed` ones.
    fn fill(mut self, graph: &Graph, k: usize, allowed: impl Fn(usize) -> bool) -> Vec<usize> {
        while self.order.len() < k {
            let mut best: Option<((u32, u64), usize)> = None;
            for v in (0..graph.n()).filter(|&v| !self.chosen[v] && allowed(v)) {
                let mut max = self.load[v];
                let mut sum = self.load[v] as u64;
                for u in graph.neighbors(v) {
                    max = max.max(self.load[u]);
                    sum += self.load[u] as u64;
                }
                let score = (max, sum);
                if best.is_none_or(|(b, _)| score < b) {
                    best = Some((score, v));
                    if score == (0, 0) {
                        break;
                    }
                }
            }
            match best {
                Some((_, v)) => self.place(graph, v),
                None => break,
            }
        }
        self.order
    }
}
