//! Seeded Monte Carlo estimation of majority outcomes.
//!
//! Every trial draws its randomness from three streams derived from the root
//! seed: graph, adversary and tie coins. A stream seed is the first output of
//! ChaCha8 seeded with the root seed, on stream `4·trial + tag`. Results do not
//! depend on how trials are scheduled across threads.

use std::io::Write;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adversary::{AdversaryError, AdversaryKind, AdversarySpec};
use crate::concentration::{exact_binomial_tail, TailMode};
use crate::dynamics::{
    majority_outcome, DisseminationMode, Disseminator, DynamicsError, ExpertAssignment, Trace,
    VerdictKind,
};
use crate::graph::{Graph, GraphError, GraphSpec};

mod presets;

pub use presets::{preset_configs, replicate, Preset, ReplicationReport, ReportRow, SearchRow};

pub const CSV_HEADER: &str =
    "scenario,mode,trials,one_majority,zero_majority,no_strict,ci_low,ci_high,mean_rounds";

pub const CI_METHOD: &str = "clopper-pearson";
pub const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<ExperimentError>,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Graph = 0,
    Adversary = 1,
    Tie = 2,
}

pub fn derive_seed(root: u64, trial: u64, tag: StreamTag) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(trial.wrapping_mul(4).wrapping_add(tag as u64));
    rng.next_u64()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub graph: GraphSpec,
    pub adversary: AdversarySpec,
    pub mode: DisseminationMode,
    pub trials: usize,
    pub seed: u64,
    /// Redraw the graph every trial. Defaults to whether the graph is random.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resample_graph: Option<bool>,
    /// Record per-trial wall time. Off by default so record streams are reproducible.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn resamples_graph(&self) -> bool {
        self.resample_graph.unwrap_or_else(|| self.graph.is_random())
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::InvalidConfig("trials must be ≥ 1".into()));
        }
        self.adversary.validate()?;
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the config's JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub graph: u64,
    pub adversary: u64,
    pub tie: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seeds: TrialSeeds,
    pub verdict: VerdictKind,
    pub ones: usize,
    pub zeros: usize,
    pub rounds: usize,
    pub coins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictFrequency {
    pub count: usize,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl VerdictFrequency {
    fn new(count: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = clopper_pearson(count as u64, trials as u64, CI_LEVEL);
        Self {
            count,
            frequency: count as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub mode: DisseminationMode,
    pub trials: usize,
    pub one_majority: VerdictFrequency,
    pub zero_majority: VerdictFrequency,
    pub no_strict: VerdictFrequency,
    pub ci_method: String,
    pub ci_level: f64,
    pub mean_rounds: f64,
    pub config_digest: String,
}

impl Summary {
    pub fn from_records(config: &ExperimentConfig, records: &[TrialRecord]) -> Self {
        let trials = records.len();
        let count = |k| records.iter().filter(|r| r.verdict == k).count();
        let mean_rounds =
            records.iter().map(|r| r.rounds as f64).sum::<f64>() / trials.max(1) as f64;
        Self {
            scenario: config.scenario.clone(),
            mode: config.mode,
            trials,
            one_majority: VerdictFrequency::new(count(VerdictKind::OneMajority), trials),
            zero_majority: VerdictFrequency::new(count(VerdictKind::ZeroMajority), trials),
            no_strict: VerdictFrequency::new(count(VerdictKind::NoStrictMajority), trials),
            ci_method: CI_METHOD.to_string(),
            ci_level: CI_LEVEL,
            mean_rounds,
            config_digest: config.digest(),
        }
    }

    /// Row matching [`CSV_HEADER`]; the interval is the One-majority interval.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.mode,
            self.trials,
            self.one_majority.frequency,
            self.zero_majority.frequency,
            self.no_strict.frequency,
            self.one_majority.ci_low,
            self.one_majority.ci_high,
            self.mean_rounds
        )
    }
}

/// Exact two-sided binomial interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let alpha = (1.0 - level) / 2.0;
    // Both tails are monotone in p; bisect to well below display precision.
    let bisect = |f: &dyn Fn(f64) -> bool| {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let low = if successes == 0 {
        0.0
    } else {
        bisect(&|p| exact_binomial_tail(trials, p, TailMode::AtLeast(successes)) >= alpha)
    };
    let high = if successes == trials {
        1.0
    } else {
        bisect(&|p| exact_binomial_tail(trials, p, TailMode::AtMost(successes)) <= alpha)
    };
    (low, high)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

fn disseminate(d: &Disseminator<'_>, mode: DisseminationMode, tie: u64) -> Trace {
    match mode {
        DisseminationMode::Iterative => d.iterative(tie),
        DisseminationMode::NonIterative => d.noniterative(tie),
    }
}

fn record(trial: usize, seeds: TrialSeeds, trace: &Trace, started: Option<Instant>) -> Result<TrialRecord, ExperimentError> {
    let verdict = majority_outcome(&trace.final_labeling)?;
    Ok(TrialRecord {
        trial,
        seeds,
        verdict: verdict.kind,
        ones: verdict.ones,
        zeros: verdict.zeros,
        rounds: trace.round_count(),
        coins: trace.coins_used,
        wall_time_ms: started.map(|t| t.elapsed().as_secs_f64() * 1e3),
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<TrialRecord>, Summary), ExperimentError> {
    run_experiment_with(config, RunOptions::default())
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    options: RunOptions,
) -> Result<(Vec<TrialRecord>, Summary), ExperimentError> {
    config.validate()?;
    let records = match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()?
            .install(|| run_trials(config))?,
        None => run_trials(config)?,
    };
    let summary = Summary::from_records(config, &records);
    Ok((records, summary))
}

fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialRecord>, ExperimentError> {
    let root = config.seed;
    let seeds_for = |t: usize, graph_seed: u64| TrialSeeds {
        graph: graph_seed,
        adversary: derive_seed(root, t as u64, StreamTag::Adversary),
        tie: derive_seed(root, t as u64, StreamTag::Tie),
    };
    let timing = |_: ()| config.record_timing.then(Instant::now);
    let wrap = |trial: usize| move |e: ExperimentError| ExperimentError::Trial {
        trial,
        source: Box::new(e),
    };

    if config.resamples_graph() {
        return (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let started = timing(());
                let seeds = seeds_for(t, derive_seed(root, t as u64, StreamTag::Graph));
                let run = || -> Result<TrialRecord, ExperimentError> {
                    let graph = config.graph.build(Some(seeds.graph))?;
                    let a = config.adversary.assign(&graph, seeds.adversary)?;
                    let d = Disseminator::new(&graph, &a)?;
                    record(t, seeds, &disseminate(&d, config.mode, seeds.tie), started)
                };
                run().map_err(wrap(t))
            })
            .collect();
    }

    let graph_seed = config
        .graph
        .seed()
        .unwrap_or_else(|| derive_seed(root, 0, StreamTag::Graph));
    let graph = config.graph.build(Some(graph_seed))?;
    let fixed_assignment =
        config.adversary.kind == AdversaryKind::Strong && !config.adversary.is_randomized();
    if fixed_assignment {
        // Every trial sees the same experts: share the first-round tallies.
        let a = config.adversary.assign(&graph, 0).map_err(|e| wrap(0)(e.into()))?;
        let d = Disseminator::new(&graph, &a).map_err(|e| wrap(0)(e.into()))?;
        return (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let started = timing(());
                let seeds = seeds_for(t, graph_seed);
                record(t, seeds, &disseminate(&d, config.mode, seeds.tie), started).map_err(wrap(t))
            })
            .collect();
    }
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let started = timing(());
            let seeds = seeds_for(t, graph_seed);
            let run = || -> Result<TrialRecord, ExperimentError> {
                let a = config.adversary.assign(&graph, seeds.adversary)?;
                let d = Disseminator::new(&graph, &a)?;
                record(t, seeds, &disseminate(&d, config.mode, seeds.tie), started)
            };
            run().map_err(wrap(t))
        })
        .collect()
}

/// [`run_experiment`] without the per-trial records.
pub fn estimate_robustness(
    graph: &GraphSpec,
    adversary: &AdversarySpec,
    mode: DisseminationMode,
    trials: usize,
    seed: u64,
) -> Result<Summary, ExperimentError> {
    let config = ExperimentConfig {
        scenario: "estimate".into(),
        graph: graph.clone(),
        adversary: adversary.clone(),
        mode,
        trials,
        seed,
        resample_graph: None,
        record_timing: false,
    };
    Ok(run_experiment(&config)?.1)
}

/// One JSON object per line, in trial order.
pub fn write_records<W: Write>(records: &[TrialRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Assignment a trial of `config` would use, for inspection and exact oracles.
pub fn trial_assignment(
    config: &ExperimentConfig,
    graph: &Graph,
    trial: usize,
) -> Result<ExpertAssignment, ExperimentError> {
    Ok(config
        .adversary
        .assign(graph, derive_seed(config.seed, trial as u64, StreamTag::Adversary))?)
}
