//! Majority opinion forming on graphs under adversarial expert placement.
//!
//! Experts start with label One (the truth) or Zero; everyone else adopts the
//! majority label among their labeled neighbors, either once against the
//! experts or iteratively round by round. The crate provides the graphs, the
//! adversaries, both dissemination processes, exact probability oracles for
//! small instances and a seeded Monte Carlo harness.

pub mod adversary;
pub mod cli;
pub mod concentration;
pub mod dynamics;
pub mod experiments;
pub mod graph;

use thiserror::Error;

use adversary::AdversaryError;
use concentration::ConcentrationError;
use dynamics::DynamicsError;
use experiments::ExperimentError;
use graph::GraphError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Concentration(#[from] ConcentrationError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const INVALID: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
}

fn graph_code(e: &GraphError) -> i32 {
    match e {
        GraphError::InvalidParams(_) | GraphError::InvalidProbability(_) => exit::INVALID,
        GraphError::InfeasibleSizes(_)
        | GraphError::Infeasible(_)
        | GraphError::ExportTooLarge { .. } => exit::INFEASIBLE,
        GraphError::Invariant(_) | GraphError::Io(_) => exit::INTERNAL,
    }
}

fn dynamics_code(e: &DynamicsError) -> i32 {
    match e {
        DynamicsError::Graph(g) => graph_code(g),
        DynamicsError::InvalidAssignment(_)
        | DynamicsError::ExpertVertex(_)
        | DynamicsError::VertexOutOfRange(_)
        | DynamicsError::UnsupportedBlock(_)
        | DynamicsError::InconsistentCounts(_) => exit::INVALID,
        DynamicsError::NoLayout => exit::INFEASIBLE,
        DynamicsError::Unlabeled(_) => exit::INTERNAL,
    }
}

fn adversary_code(e: &AdversaryError) -> i32 {
    match e {
        AdversaryError::InvalidParams(_)
        | AdversaryError::MissingStrategy(_)
        | AdversaryError::Parse(_)
        | AdversaryError::SizeMismatch { .. } => exit::INVALID,
        AdversaryError::Structure { .. }
        | AdversaryError::SearchCap { .. }
        | AdversaryError::StateCap(_)
        | AdversaryError::RandomGraph => exit::INFEASIBLE,
        AdversaryError::Io(_) => exit::INTERNAL,
        AdversaryError::Dynamics(d) => dynamics_code(d),
    }
}

fn experiment_code(e: &ExperimentError) -> i32 {
    match e {
        ExperimentError::InvalidConfig(_) => exit::INVALID,
        ExperimentError::Trial { source, .. } => experiment_code(source),
        ExperimentError::Graph(g) => graph_code(g),
        ExperimentError::Adversary(a) => adversary_code(a),
        ExperimentError::Dynamics(d) => dynamics_code(d),
        ExperimentError::ThreadPool(_) | ExperimentError::Io(_) => exit::INTERNAL,
    }
}

impl Error {
    /// 2 for invalid parameters or usage, 3 for infeasible sizes and caps, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Json(_) => exit::INVALID,
            Error::Graph(e) => graph_code(e),
            Error::Dynamics(e) => dynamics_code(e),
            Error::Adversary(e) => adversary_code(e),
            Error::Concentration(e) => match e {
                ConcentrationError::Hypothesis { .. } | ConcentrationError::InvalidArgument(_) => {
                    exit::INVALID
                }
                ConcentrationError::Graph(g) => graph_code(g),
            },
            Error::Experiment(e) => experiment_code(e),
            Error::Io(_) => exit::INTERNAL,
        }
    }
}
