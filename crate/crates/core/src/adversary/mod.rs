//! Adversaries choose who the experts are and which of them hold the truth.
//!
//! The random adversary chooses nothing: the expert set is uniform and every
//! expert independently holds label One with probability `1/2 + δ`. The weak
//! adversary picks the expert set but the labels stay random. The strong
//! adversary picks both sets.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, ExpertAssignment};
use crate::graph::{round_half_up, Graph};

mod search;
mod strategy;

pub use search::{
    exact_one_majority_probability, exhaustive_strong_search, SearchResult, SEARCH_MAX_STATES,
    SEARCH_MAX_VERTICES,
};
pub use strategy::Strategy;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("invalid adversary parameters: {0}")]
    InvalidParams(String),
    #[error("strategy produced {got} experts, expected {expected}")]
    SizeMismatch { expected: String, got: String },
    #[error("graph lacks the structure strategy `{strategy}` needs: {reason}")]
    Structure { strategy: String, reason: String },
    #[error("{0} adversary needs a strategy")]
    MissingStrategy(AdversaryKind),
    #[error("exhaustive search is capped at {limit} vertices, graph has {n}")]
    SearchCap { n: usize, limit: usize },
    #[error("exhaustive search needs more than {0} coin states")]
    StateCap(usize),
    #[error("exhaustive search needs a deterministic graph, got a random one")]
    RandomGraph,
    #[error("malformed assignment file: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryKind {
    Random,
    Weak,
    Strong,
}

impl std::fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            AdversaryKind::Random => "random",
            AdversaryKind::Weak => "weak",
            AdversaryKind::Strong => "strong",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub mu: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
}

impl AdversarySpec {
    pub fn new(kind: AdversaryKind, mu: f64, delta: f64, strategy: Option<Strategy>) -> Self {
        Self {
            kind,
            mu,
            delta,
            strategy,
        }
    }

    pub fn validate(&self) -> Result<(), AdversaryError> {
        check_params(self.mu, self.delta)?;
        if self.kind != AdversaryKind::Random && self.strategy.is_none() {
            return Err(AdversaryError::MissingStrategy(self.kind));
        }
        Ok(())
    }

    /// Whether two calls with different seeds can give different assignments.
    pub fn is_randomized(&self) -> bool {
        match self.kind {
            AdversaryKind::Random | AdversaryKind::Weak => true,
            AdversaryKind::Strong => self
                .strategy
                .as_ref()
                .is_some_and(Strategy::is_randomized),
        }
    }

    /// Draws an assignment; `seed` feeds every random choice.
    pub fn assign(&self, graph: &Graph, seed: u64) -> Result<ExpertAssignment, AdversaryError> {
        self.validate()?;
        let strategy = self.strategy.as_ref();
        match self.kind {
            AdversaryKind::Random => random_adversary(graph, self.mu, self.delta, seed),
            AdversaryKind::Weak => weak_adversary(
                graph,
                strategy.expect("validated"),
                self.mu,
                self.delta,
                seed,
            ),
            AdversaryKind::Strong => {
                strong_adversary(graph, strategy.expect("validated"), self.mu, self.delta, seed)
            }
        }
    }
}

fn check_params(mu: f64, delta: f64) -> Result<(), AdversaryError> {
    // μ up to 1 is allowed: small hand-built examples use more than half experts.
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(AdversaryError::InvalidParams(format!("μ = {mu} outside (0, 1]")));
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(AdversaryError::InvalidParams(format!("δ = {delta} outside (0, 1/2]")));
    }
    Ok(())
}

/// `round(μn)`.
pub fn expert_count(n: usize, mu: f64) -> usize {
    round_half_up(mu * n as f64).clamp(0, n as i64) as usize
}

/// `(|E₁|, |E₀|)` for the strong adversary: `|E₁| = round((1/2+δ)μn)` and
/// `|E₀|` takes the rest of `round(μn)`.
pub fn strong_sizes(n: usize, mu: f64, delta: f64) -> (usize, usize) {
    let k = expert_count(n, mu);
    let k1 = (round_half_up((0.5 + delta) * mu * n as f64).max(0) as usize).min(k);
    (k1, k - k1)
}

/// Splits a chosen expert set into labels with independent `1/2 + δ` coins,
/// in ascending vertex order.
fn random_partition(mut experts: Vec<usize>, delta: f64, rng: &mut ChaCha8Rng) -> ExpertAssignment {
    experts.sort_unstable();
    let (mut e1, mut e0) = (Vec::new(), Vec::new());
    for v in experts {
        if rng.random_bool(0.5 + delta) {
            e1.push(v);
        } else {
            e0.push(v);
        }
    }
    ExpertAssignment::new(e1, e0)
}

pub fn random_adversary(
    graph: &Graph,
    mu: f64,
    delta: f64,
    seed: u64,
) -> Result<ExpertAssignment, AdversaryError> {
    check_params(mu, delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = expert_count(graph.n(), mu);
    let experts = index::sample(&mut rng, graph.n(), k).into_vec();
    Ok(random_partition(experts, delta, &mut rng))
}

pub fn weak_adversary(
    graph: &Graph,
    strategy: &Strategy,
    mu: f64,
    delta: f64,
    seed: u64,
) -> Result<ExpertAssignment, AdversaryError> {
    check_params(mu, delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = expert_count(graph.n(), mu);
    let experts = strategy.select(graph, k, &mut rng)?;
    if experts.len() != k {
        return Err(AdversaryError::SizeMismatch {
            expected: k.to_string(),
            got: experts.len().to_string(),
        });
    }
    let a = random_partition(experts, delta, &mut rng);
    a.validate(graph.n())?;
    Ok(a)
}

/// Runs the strategy and checks the result against the strong size contract.
pub fn strong_adversary(
    graph: &Graph,
    strategy: &Strategy,
    mu: f64,
    delta: f64,
    seed: u64,
) -> Result<ExpertAssignment, AdversaryError> {
    check_params(mu, delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (k1, k0) = strong_sizes(graph.n(), mu, delta);
    let a = strategy.assign(graph, k1, k0, &mut rng)?;
    if (a.e1.len(), a.e0.len()) != (k1, k0) {
        return Err(AdversaryError::SizeMismatch {
            expected: format!("({k1}, {k0})"),
            got: format!("({}, {})", a.e1.len(), a.e0.len()),
        });
    }
    a.validate(graph.n())?;
    Ok(a)
}

/// Two lines, `E1: v v …` and `E0: v v …`, 0-indexed.
pub fn format_assignment(a: &ExpertAssignment) -> String {
    let line = |name: &str, vs: &[usize]| {
        let mut s = format!("{name}:");
        for v in vs {
            s.push(' ');
            s.push_str(&v.to_string());
        }
        s
    };
    format!("{}\n{}\n", line("E1", &a.e1), line("E0", &a.e0))
}

pub fn parse_assignment(text: &str) -> Result<ExpertAssignment, AdversaryError> {
    let (mut e1, mut e0) = (None, None);
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| AdversaryError::Parse(format!("missing `:` in `{line}`")))?;
        let vs = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| AdversaryError::Parse(format!("bad vertex `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let slot = match head.trim() {
            "E1" => &mut e1,
            "E0" => &mut e0,
            other => return Err(AdversaryError::Parse(format!("unknown set `{other}`"))),
        };
        if slot.replace(vs).is_some() {
            return Err(AdversaryError::Parse(format!("set {} given twice", head.trim())));
        }
    }
    match (e1, e0) {
        (Some(e1), Some(e0)) => Ok(ExpertAssignment::new(e1, e0)),
        _ => Err(AdversaryError::Parse("need both E1 and E0 lines".into())),
    }
}

pub fn read_assignment(path: &std::path::Path) -> Result<ExpertAssignment, AdversaryError> {
    parse_assignment(&std::fs::read_to_string(path)?)
}
