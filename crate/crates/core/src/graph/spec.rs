//! JSON graph descriptions, e.g.
//! `{"type": "counterexample", "mu": 0.4, "delta": 0.45, "eps1": 0.089,
//!   "eps2": 0.0005, "d": 0.004, "n": 20000, "mode": "regular"}`.

use serde::{Deserialize, Serialize};

use super::{
    disjoint_union, generate_complete, generate_counterexample, generate_er, generate_line,
    generate_random_regular, generate_star, validate_params, ConstructionMode,
    CounterexampleParams, Graph, GraphError,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GraphSpec {
    Counterexample {
        #[serde(flatten)]
        params: CounterexampleParams,
        n: usize,
        mode: ConstructionMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        /// Build even if the parameters fail validation.
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        allow_invalid: bool,
    },
    Er {
        n: usize,
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Line {
        n: usize,
    },
    Star {
        leaves: usize,
    },
    Complete {
        n: usize,
    },
    Regular {
        n: usize,
        deg: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Union {
        parts: Vec<GraphSpec>,
    },
}

impl GraphSpec {
    /// Whether building depends on a seed.
    pub fn is_random(&self) -> bool {
        match self {
            GraphSpec::Counterexample { mode, .. } => *mode == ConstructionMode::Random,
            GraphSpec::Er { .. } | GraphSpec::Regular { .. } => true,
            GraphSpec::Line { .. } | GraphSpec::Star { .. } | GraphSpec::Complete { .. } => false,
            GraphSpec::Union { parts } => parts.iter().any(GraphSpec::is_random),
        }
    }

    /// The seed written in the spec, if any.
    pub fn seed(&self) -> Option<u64> {
        match self {
            GraphSpec::Counterexample { seed, .. }
            | GraphSpec::Er { seed, .. }
            | GraphSpec::Regular { seed, .. } => *seed,
            _ => None,
        }
    }

    /// Builds the graph. `seed` overrides any seed in the spec; union parts get
    /// distinct seeds `seed + index`.
    pub fn build(&self, seed: Option<u64>) -> Result<Graph, GraphError> {
        let pick = |own: &Option<u64>| seed.or(*own).unwrap_or(0);
        match self {
            GraphSpec::Counterexample {
                params,
                n,
                mode,
                seed: own,
                allow_invalid,
            } => {
                let report = validate_params(params);
                if !report.is_ok() && !allow_invalid {
                    let names: Vec<_> = report
                        .violations
                        .iter()
                        .map(|v| v.constraint.as_str())
                        .collect();
                    return Err(GraphError::InvalidParams(names.join(", ")));
                }
                generate_counterexample(params, *n, *mode, pick(own))
            }
            GraphSpec::Er { n, p, seed: own } => generate_er(*n, *p, pick(own)),
            GraphSpec::Line { n } => Ok(generate_line(*n)),
            GraphSpec::Star { leaves } => Ok(generate_star(*leaves)),
            GraphSpec::Complete { n } => Ok(generate_complete(*n)),
            GraphSpec::Regular { n, deg, seed: own } => {
                generate_random_regular(*n, *deg, pick(own))
            }
            GraphSpec::Union { parts } => {
                let mut acc = Graph::empty();
                for (k, part) in parts.iter().enumerate() {
                    let g = part.build(seed.map(|s| s.wrapping_add(k as u64)))?;
                    acc = disjoint_union(&acc, &g);
                }
                Ok(acc)
            }
        }
    }
}
