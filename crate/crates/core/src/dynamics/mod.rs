//! Label state and the two dissemination processes.
//!
//! Non-experts adopt the majority label among their labeled neighbors. In the
//! non-iterative process only experts count and every undecided vertex flips
//! a fair coin. In the iterative process undecided vertices without labeled
//! neighbors wait for the next round; rounds repeat until everyone is labeled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

mod engine;
mod expected;

pub use engine::{neighbor_tally, Disseminator, RoundRecord, Trace, TRACE_LIST_LIMIT};
pub use expected::{expected_delta, BlockCounts};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid expert assignment: {0}")]
    InvalidAssignment(String),
    #[error("vertex {0} is an expert; Δ is only defined for non-experts")]
    ExpertVertex(usize),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("labeling still has {0} unlabeled vertices")]
    Unlabeled(usize),
    #[error("expected Δ is not defined for block {0}")]
    UnsupportedBlock(crate::graph::Block),
    #[error("graph has no block layout")]
    NoLayout,
    #[error("block counts inconsistent with sizes: {0}")]
    InconsistentCounts(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Label {
    Unlabeled,
    Zero,
    One,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisseminationMode {
    Iterative,
    #[serde(rename = "noniterative")]
    NonIterative,
}

impl std::fmt::Display for DisseminationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            DisseminationMode::Iterative => "iterative",
            DisseminationMode::NonIterative => "noniterative",
        })
    }
}

impl std::str::FromStr for DisseminationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iterative" => Ok(Self::Iterative),
            "noniterative" | "non-iterative" => Ok(Self::NonIterative),
            other => Err(format!("unknown dissemination mode `{other}`")),
        }
    }
}

/// Per-vertex labels with cached counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    labels: Vec<Label>,
    ones: usize,
    zeros: usize,
}

impl Labeling {
    pub fn new(n: usize) -> Self {
        Self {
            labels: vec![Label::Unlabeled; n],
            ones: 0,
            zeros: 0,
        }
    }

    /// Builds a labeling from raw labels, recomputing the counts.
    pub fn from_labels(labels: Vec<Label>) -> Self {
        let ones = labels.iter().filter(|&&l| l == Label::One).count();
        let zeros = labels.iter().filter(|&&l| l == Label::Zero).count();
        Self {
            labels,
            ones,
            zeros,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, v: usize) -> Label {
        self.labels[v]
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.labels
    }

    /// Labels an unlabeled vertex. Labels are final: relabeling panics.
    pub fn set(&mut self, v: usize, label: Label) {
        assert_eq!(self.labels[v], Label::Unlabeled, "vertex {v} already labeled");
        match label {
            Label::One => self.ones += 1,
            Label::Zero => self.zeros += 1,
            Label::Unlabeled => return,
        }
        self.labels[v] = label;
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }

    pub fn unlabeled(&self) -> usize {
        self.labels.len() - self.ones - self.zeros
    }
}

/// Disjoint expert sets: `e1` holds label One, `e0` label Zero. Both sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExpertAssignment {
    pub e1: Vec<usize>,
    pub e0: Vec<usize>,
}

impl ExpertAssignment {
    pub fn new(mut e1: Vec<usize>, mut e0: Vec<usize>) -> Self {
        e1.sort_unstable();
        e0.sort_unstable();
        Self { e1, e0 }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.e1.len() + self.e0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, n: usize) -> Result<(), DynamicsError> {
        let mut seen = vec![false; n];
        for &v in self.e1.iter().chain(&self.e0) {
            if v >= n {
                return Err(DynamicsError::InvalidAssignment(format!(
                    "vertex {v} outside 0..{n}"
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(DynamicsError::InvalidAssignment(format!(
                    "vertex {v} listed twice"
                )));
            }
        }
        Ok(())
    }

    /// Labeling with only the experts labeled.
    pub fn labeling(&self, n: usize) -> Result<Labeling, DynamicsError> {
        self.validate(n)?;
        let mut l = Labeling::new(n);
        for &v in &self.e1 {
            l.set(v, Label::One);
        }
        for &v in &self.e0 {
            l.set(v, Label::Zero);
        }
        Ok(l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    OneMajority,
    ZeroMajority,
    NoStrictMajority,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub ones: usize,
    pub zeros: usize,
}

impl Verdict {
    pub fn from_counts(ones: usize, zeros: usize) -> Self {
        let n = ones + zeros;
        let kind = if 2 * ones > n {
            VerdictKind::OneMajority
        } else if 2 * zeros > n {
            VerdictKind::ZeroMajority
        } else {
            VerdictKind::NoStrictMajority
        };
        Self { kind, ones, zeros }
    }
}

pub fn majority_outcome(labeling: &Labeling) -> Result<Verdict, DynamicsError> {
    match labeling.unlabeled() {
        0 => Ok(Verdict::from_counts(labeling.ones(), labeling.zeros())),
        k => Err(DynamicsError::Unlabeled(k)),
    }
}

/// `|N(v) ∩ E₁| − |N(v) ∩ E₀|` for a non-expert `v`.
pub fn delta(graph: &Graph, assignment: &ExpertAssignment, v: usize) -> Result<i64, DynamicsError> {
    Disseminator::new(graph, assignment)?.delta(v)
}

pub fn disseminate_noniterative(
    graph: &Graph,
    assignment: &ExpertAssignment,
    tie_seed: u64,
) -> Result<Labeling, DynamicsError> {
    Ok(Disseminator::new(graph, assignment)?
        .noniterative(tie_seed)
        .final_labeling)
}

pub fn disseminate_iterative(
    graph: &Graph,
    assignment: &ExpertAssignment,
    tie_seed: u64,
) -> Result<Trace, DynamicsError> {
    Ok(Disseminator::new(graph, assignment)?.iterative(tie_seed))
}
