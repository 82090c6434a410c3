//! The `opinion` command line. Structured output goes to stdout, tables and
//! diagnostics to stderr.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::adversary::{exhaustive_strong_search, AdversarySpec};
use crate::concentration::edge_distribution_audit;
use crate::dynamics::DisseminationMode;
use crate::experiments::{
    replicate, run_experiment_with, write_records, ExperimentConfig, Preset, RunOptions,
    CSV_HEADER,
};
use crate::graph::{
    resolve_sizes, validate_params, write_edge_list, CounterexampleParams, GraphSpec,
};
use crate::{exit, Error};

#[derive(Parser, Debug)]
#[command(name = "opinion", version, about = "Adversarial majority opinion forming on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Iterative,
    Noniterative,
}

impl From<ModeArg> for DisseminationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Iterative => DisseminationMode::Iterative,
            ModeArg::Noniterative => DisseminationMode::NonIterative,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphFormat {
    /// `n m` header and one `u v` line per edge.
    Edges,
    /// Size and degree summary as JSON.
    Summary,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the five-block graph parameters and print every violated constraint.
    Validate {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, allow_hyphen_values = true)]
        eps1: f64,
        #[arg(long, allow_hyphen_values = true)]
        eps2: f64,
        #[arg(long, allow_hyphen_values = true)]
        d: f64,
        /// Also resolve block sizes for this many vertices.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Build a graph from a JSON spec (file path or inline JSON).
    Gen {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "edges")]
        format: GraphFormat,
        #[arg(long, env = "OPINION_SEED")]
        seed: Option<u64>,
    },
    /// Monte Carlo trials; records go to --out (or stdout), then a summary line.
    Run {
        #[arg(long)]
        spec: String,
        /// Adversary JSON (file path or inline).
        #[arg(long)]
        adversary: String,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = "OPINION_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append the CSV summary (with header) to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value = "run")]
        scenario: String,
        /// Redraw the graph every trial (default: only for random graphs).
        #[arg(long)]
        resample: Option<bool>,
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Exact worst-case strong placement on a small deterministic graph.
    Search {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Count exception vertices of random large sets in one G(n, p).
    Audit {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        sets: usize,
        #[arg(long, env = "OPINION_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Run a canned iterative vs non-iterative comparison.
    Replicate {
        #[arg(value_parser = parse_preset)]
        preset: Preset,
        #[arg(long, env = "OPINION_SEED", default_value_t = 2021)]
        seed: u64,
        /// Override every scenario's trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: ReportFormat,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

/// Reads JSON from a file, or parses the argument itself if it looks like JSON.
fn load_json<T: DeserializeOwned>(arg: &str) -> Result<T, Error> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg))
            .map_err(|e| Error::Usage(format!("cannot read `{arg}`: {e}")))?
    };
    Ok(serde_json::from_str(&text)?)
}

/// Runs the command line in-process, writing to the given streams.
pub fn dispatch_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { exit::INVALID } else { exit::OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = dispatch_with(argv, &mut out, &mut err);
    let _ = out.flush();
    code
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    match command {
        Command::Validate {
            mu,
            delta,
            eps1,
            eps2,
            d,
            n,
        } => {
            let params = CounterexampleParams::new(mu, delta, eps1, eps2, d);
            let report = validate_params(&params);
            write!(err, "{report}")?;
            let sizes = match n {
                Some(n) => Some(resolve_sizes(&params, n)?),
                None => None,
            };
            let status = if report.is_ok() { "ok" } else { "invalid" };
            let record = json!({
                "status": status,
                "violations": report.violations,
                "sizes": sizes,
            });
            writeln!(out, "{record}")?;
            Ok(if report.is_ok() { exit::OK } else { exit::INVALID })
        }
        Command::Gen {
            spec,
            out: path,
            format,
            seed,
        } => {
            let spec: GraphSpec = load_json(&spec)?;
            let graph = spec.build(seed)?;
            graph.check_invariants()?;
            let summary = json!({
                "n": graph.n(),
                "edges": graph.edge_count(),
                "mode": graph.mode(),
                "sizes": graph.layout().map(|l| *l.sizes()),
                "max_degree": (0..graph.n()).map(|v| graph.degree(v)).max().unwrap_or(0),
            });
            let mut file = BufWriter::new(File::create(&path)?);
            match format {
                GraphFormat::Edges => write_edge_list(&graph, &mut file)?,
                GraphFormat::Summary => writeln!(file, "{summary}")?,
            }
            file.flush()?;
            writeln!(out, "{summary}")?;
            Ok(exit::OK)
        }
        Command::Run {
            spec,
            adversary,
            mode,
            trials,
            seed,
            out: records_path,
            csv,
            scenario,
            resample,
            timing,
            jobs,
        } => {
            let config = ExperimentConfig {
                scenario,
                graph: load_json(&spec)?,
                adversary: load_json::<AdversarySpec>(&adversary)?,
                mode: mode.into(),
                trials,
                seed,
                resample_graph: resample,
                record_timing: timing,
            };
            let (records, summary) = run_experiment_with(&config, RunOptions { jobs })?;
            match records_path {
                Some(p) => {
                    let mut f = BufWriter::new(File::create(p)?);
                    write_records(&records, &mut f)?;
                    f.flush()?;
                }
                None => write_records(&records, &mut *out)?,
            }
            writeln!(out, "{}", json!({ "summary": summary }))?;
            if let Some(p) = csv {
                let mut f = File::create(p)?;
                writeln!(f, "{CSV_HEADER}\n{}", summary.csv_row())?;
            }
            writeln!(err, "{CSV_HEADER}\n{}", summary.csv_row())?;
            Ok(exit::OK)
        }
        Command::Search {
            spec,
            mu,
            delta,
            mode,
        } => {
            let spec: GraphSpec = load_json(&spec)?;
            let graph = spec.build(None)?;
            let r = exhaustive_strong_search(&graph, mu, delta, mode.into())?;
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
            writeln!(
                err,
                "minimum P[One majority] = {} at E1 = {:?}, E0 = {:?}",
                r.probability, r.worst.e1, r.worst.e0
            )?;
            Ok(exit::OK)
        }
        Command::Audit {
            n,
            p,
            eps,
            sets,
            seed,
        } => {
            let report = edge_distribution_audit(n, p, eps, sets, seed)?;
            write!(err, "{}", report.table())?;
            writeln!(out, "{}", serde_json::to_string(&report)?)?;
            Ok(exit::OK)
        }
        Command::Replicate {
            preset,
            seed,
            trials,
            format,
            jobs,
        } => {
            let report = replicate(preset, seed, trials, RunOptions { jobs })?;
            write!(err, "{}", report.table())?;
            match format {
                ReportFormat::Csv => {
                    writeln!(out, "{CSV_HEADER}")?;
                    for r in &report.rows {
                        writeln!(out, "{}", r.summary.csv_row())?;
                    }
                }
                ReportFormat::Json => writeln!(out, "{}", serde_json::to_string(&report)?)?,
            }
            Ok(exit::OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("opinion").chain(args.iter().copied());
        let code = dispatch_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn validate_codes() {
        let ok = ["validate", "--mu", "0.4", "--delta", "0.45", "--eps1", "0.089", "--d", "0.004", "--eps2", "0.0005"];
        let (code, out, _) = run(&ok);
        assert_eq!(code, 0);
        assert!(out.contains(r#""status":"ok""#));
        let bad = ["validate", "--mu", "0.2", "--delta", "0.2", "--eps1", "0.01", "--d", "0.0001", "--eps2", "0.000001"];
        let (code, out, _) = run(&bad);
        assert_eq!(code, 2);
        assert!(out.contains("d < ε₁δμ/4"));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&["validate", "--bogus"]).0, 2);
        assert_eq!(run(&["frobnicate"]).0, 2);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn infeasible_sizes_exit_3() {
        let args = ["validate", "--mu", "0.4", "--delta", "0.45", "--eps1", "0.089", "--d", "0.004", "--eps2", "0.0005", "--n", "0"];
        assert_eq!(run(&args).0, 3);
    }

    #[test]
    fn search_on_inline_spec() {
        let (code, out, _) = run(&[
            "search", "--spec", r#"{"type":"complete","n":4}"#, "--mu", "0.5", "--delta", "0.5",
            "--mode", "iterative",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["probability"], 1.0);
        let (code, _, _) = run(&[
            "search", "--spec", r#"{"type":"line","n":20}"#, "--mu", "0.5", "--delta", "0.25",
            "--mode", "iterative",
        ]);
        assert_eq!(code, 3);
    }
}
