//! Canned scenario pairs contrasting iterative and non-iterative dissemination.

use std::fmt::Write as _;

use serde::Serialize;

use super::{run_experiment_with, ExperimentConfig, ExperimentError, RunOptions, Summary};
use crate::adversary::{
    exact_one_majority_probability, exhaustive_strong_search, AdversaryKind, AdversarySpec,
    Strategy,
};
use crate::dynamics::{DisseminationMode, ExpertAssignment};
use crate::graph::{ConstructionMode, CounterexampleParams, GraphSpec};

/// Reference parameter point for the five-block graph at `n = 20000`.
pub const REFERENCE_PARAMS: CounterexampleParams = CounterexampleParams {
    mu: 0.4,
    delta: 0.45,
    eps1: 0.089,
    eps2: 5e-4,
    d: 0.004,
};
pub const REFERENCE_N: usize = 20_000;

/// Star leaves and expander size of the star-plus-expander demonstration.
const STAR_LEAVES: usize = 500;
const EXPANDER_N: usize = 2000;
const EXPANDER_DEG: usize = 4;
const STAR_EXPANDER_EXPERTS: f64 = 80.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Path,
    Counterexample,
    StarExpander,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "path" => Ok(Preset::Path),
            "counterexample" => Ok(Preset::Counterexample),
            "star_expander" | "star-expander" => Ok(Preset::StarExpander),
            other => Err(format!(
                "unknown preset `{other}` (expected path, counterexample or star_expander)"
            )),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Preset::Path => "path",
            Preset::Counterexample => "counterexample",
            Preset::StarExpander => "star_expander",
        })
    }
}

fn config(
    scenario: &str,
    graph: &GraphSpec,
    adversary: AdversarySpec,
    mode: DisseminationMode,
    trials: usize,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        scenario: scenario.to_string(),
        graph: graph.clone(),
        adversary,
        mode,
        trials,
        seed,
        resample_graph: None,
        record_timing: false,
    }
}

/// Experiment configs of a preset. `trials` overrides each scenario's default.
pub fn preset_configs(preset: Preset, seed: u64, trials: Option<usize>) -> Vec<ExperimentConfig> {
    use DisseminationMode::{Iterative, NonIterative};
    match preset {
        Preset::Path => {
            let g = GraphSpec::Line { n: 13 };
            let strong = |s| AdversarySpec::new(AdversaryKind::Strong, 8.0 / 13.0, 0.25, Some(s));
            vec![
                config(
                    "path_top",
                    &g,
                    strong(Strategy::Prefix { ones: 6, zeros: 2 }),
                    Iterative,
                    trials.unwrap_or(1000),
                    seed,
                ),
                config(
                    "path_bottom",
                    &g,
                    strong(Strategy::Explicit {
                        e1: (0..6).collect(),
                        e0: vec![6, 9],
                    }),
                    NonIterative,
                    trials.unwrap_or(10_000),
                    seed,
                ),
            ]
        }
        Preset::Counterexample => {
            let g = GraphSpec::Counterexample {
                params: REFERENCE_PARAMS,
                n: REFERENCE_N,
                mode: ConstructionMode::Regular,
                seed: None,
                allow_invalid: false,
            };
            let adv = AdversarySpec::new(
                AdversaryKind::Strong,
                REFERENCE_PARAMS.mu,
                REFERENCE_PARAMS.delta,
                Some(Strategy::BlocksIO),
            );
            [Iterative, NonIterative]
                .into_iter()
                .map(|m| config("counterexample", &g, adv.clone(), m, trials.unwrap_or(1000), seed))
                .collect()
        }
        Preset::StarExpander => {
            let g = GraphSpec::Union {
                parts: vec![
                    GraphSpec::Star { leaves: STAR_LEAVES },
                    GraphSpec::Regular {
                        n: EXPANDER_N,
                        deg: EXPANDER_DEG,
                        seed: None,
                    },
                ],
            };
            let mu = STAR_EXPANDER_EXPERTS / (STAR_LEAVES + 1 + EXPANDER_N) as f64;
            let mut out = Vec::new();
            for (name, kind, s) in [
                ("star_expander_weak", AdversaryKind::Weak, Strategy::StarCenterFirst),
                ("star_expander_strong", AdversaryKind::Strong, Strategy::OnesOnStar),
            ] {
                for m in [Iterative, NonIterative] {
                    let adv = AdversarySpec::new(kind, mu, 0.25, Some(s.clone()));
                    out.push(config(name, &g, adv, m, trials.unwrap_or(1000), seed));
                }
            }
            out
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub summary: Summary,
    pub adversary: AdversaryKind,
    pub strategy: String,
    /// Exact One-majority probability, when the assignment is fixed.
    pub exact_one_majority: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchRow {
    pub mode: DisseminationMode,
    pub min_one_majority: f64,
    pub worst: ExpertAssignment,
    pub evaluated: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationReport {
    pub preset: Preset,
    pub rows: Vec<ReportRow>,
    /// Worst strong placements over all assignments, for small graphs.
    pub search: Vec<SearchRow>,
}

impl ReplicationReport {
    pub fn table(&self) -> String {
        let mut s = format!(
            "{}\n{:<22} {:<7} {:<18} {:<13} {:>7} {:>8} {:>8} {:>8} {:>9}\n",
            self.preset,
            "scenario",
            "kind",
            "strategy",
            "mode",
            "trials",
            "P[1]",
            "P[0]",
            "exact",
            "rounds"
        );
        for r in &self.rows {
            let exact = r
                .exact_one_majority
                .map(|p| format!("{p:.5}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<22} {:<7} {:<18} {:<13} {:>7} {:>8.4} {:>8.4} {:>8} {:>9.3}",
                r.summary.scenario,
                r.adversary,
                r.strategy,
                r.summary.mode,
                r.summary.trials,
                r.summary.one_majority.frequency,
                r.summary.zero_majority.frequency,
                exact,
                r.summary.mean_rounds
            );
        }
        for row in &self.search {
            let _ = writeln!(
                s,
                "worst strong placement ({}): P[1] = {:.5} at E1 = {:?}, E0 = {:?} ({} assignments)",
                row.mode, row.min_one_majority, row.worst.e1, row.worst.e0, row.evaluated
            );
        }
        s
    }
}

/// Exact probability for configs whose graph and assignment do not vary.
fn exact_for(config: &ExperimentConfig) -> Result<Option<f64>, ExperimentError> {
    let adv = &config.adversary;
    if config.resamples_graph() || adv.kind != AdversaryKind::Strong || adv.is_randomized() {
        return Ok(None);
    }
    let graph = config.graph.build(config.graph.seed())?;
    let a = adv.assign(&graph, 0)?;
    Ok(Some(exact_one_majority_probability(&graph, &a, config.mode)?))
}

pub fn replicate(
    preset: Preset,
    seed: u64,
    trials: Option<usize>,
    options: RunOptions,
) -> Result<ReplicationReport, ExperimentError> {
    let mut rows = Vec::new();
    for c in preset_configs(preset, seed, trials) {
        let (_, summary) = run_experiment_with(&c, options)?;
        rows.push(ReportRow {
            summary,
            adversary: c.adversary.kind,
            strategy: c
                .adversary
                .strategy
                .as_ref()
                .map(|s| s.name().to_string())
                .unwrap_or_default(),
            exact_one_majority: exact_for(&c)?,
        });
    }
    let mut search = Vec::new();
    if preset == Preset::Path {
        let g = GraphSpec::Line { n: 13 }.build(None)?;
        for mode in [DisseminationMode::Iterative, DisseminationMode::NonIterative] {
            let r = exhaustive_strong_search(&g, 8.0 / 13.0, 0.25, mode)?;
            search.push(SearchRow {
                mode,
                min_one_majority: r.probability,
                worst: r.worst,
                evaluated: r.evaluated,
            });
        }
    }
    Ok(ReplicationReport {
        preset,
        rows,
        search,
    })
}
