//! Command-line front end.
//!
//! Subcommands: `map` (exact MAP), `infer` (relaxed consensus inference),
//! `sample` (perturb-and-MAP, or Gumbel matching for matrix scores),
//! `train-toy` (synthetic rationalizer training), `eval` (mask scoring),
//! and `selfcheck` (the acceptance suites).
//!
//! Results go to stdout as compact single-line JSON (`sample` emits one JSON
//! line per sample); `--out` additionally writes pretty JSON. All emissions
//! are byte-stable for identical inputs, flags, and seed. Exit codes: 0 on
//! success, 1 on validation errors (bad flags, malformed files, dimension
//! mismatches), 2 when an iterative computation fails to converge (or a
//! `selfcheck` criterion fails).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    build_highlight_graph, build_matching_graph, AlignmentMatrix, Assignment, FactorGraph,
    MatchingVariant,
};
use crate::io::{self, ScoresInput};
use crate::metrics;
use crate::oracles::{factor_map, map_global_brute_force, MapResult};
use crate::rationalizer::{extract_highlight, synthetic, train_toy, PlantedRationale, ToyHyper};
use crate::sampling::{gumbel_matching, perturb_and_map_sample, GumbelMode};
use crate::selfcheck;
use crate::solver::{lp_sparsemap_solve, ConsensusConfig};

/// Parses `argv` and runs the selected subcommand, returning the process
/// exit code. Errors print to stderr with file/flag context.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonConvergence(_) | Error::Training(_) => 2,
                _ => 1,
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rationex",
    version,
    about = "Constrained rationale extraction: MAP oracles, relaxed structured inference, sampling, toy training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact MAP assignment for a factor graph and scores
    Map(MapCmd),
    /// Relaxed consensus inference: marginals or an alignment matrix
    Infer(InferCmd),
    /// Seeded sampling: perturb-and-MAP, or Gumbel matching on matrix scores
    Sample(SampleCmd),
    /// Train a toy rationalizer on planted synthetic data
    TrainToy(TrainToyCmd),
    /// Score predicted rationale masks against gold masks
    Eval(EvalCmd),
    /// Run the acceptance criteria suites
    Selfcheck(SelfcheckCmd),
}

/// Where the graph comes from: an explicit file, or construction around the
/// scores' shape (vector scores + `--budget-pct` build a highlight chain,
/// matrix scores + `--variant` build a matching graph).
#[derive(Args)]
struct GraphSpec {
    /// Factor graph JSON; omit to build one from the flags below
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Scores JSON: flat array, or row-major matrix (rows = premise)
    #[arg(long)]
    scores: PathBuf,
    /// Highlight budget as a percentage of the document length
    #[arg(long)]
    budget_pct: Option<f64>,
    /// Adjacent-selection bonus for a built highlight graph
    #[arg(long, default_value_t = 0.0)]
    transition: f64,
    /// Matching family for matrix scores: xor-at-most-one | at-most-one-2 | budget:<B>
    #[arg(long)]
    variant: Option<String>,
}

impl GraphSpec {
    fn resolve(&self) -> Result<(FactorGraph, ScoresInput)> {
        let input = io::load_scores(&self.scores)?;
        let graph = if let Some(path) = &self.graph {
            io::load_graph(path)?
        } else {
            match &input {
                ScoresInput::Matrix(m) => {
                    let variant =
                        parse_variant(self.variant.as_deref().unwrap_or("xor-at-most-one"))?;
                    build_matching_graph(m.rows(), m.cols(), variant)?
                }
                ScoresInput::Vector(v) => {
                    let pct = self.budget_pct.ok_or(Error::InvalidParameter {
                        name: "budget_pct",
                        reason: "required to build a highlight graph when --graph is omitted"
                            .into(),
                    })?;
                    build_highlight_graph(v.len(), pct, self.transition)?
                }
            }
        };
        if graph.num_variables() != input.len() {
            return Err(Error::Dimension {
                what: "scores file",
                expected: graph.num_variables(),
                got: input.len(),
            });
        }
        Ok((graph, input))
    }
}

fn parse_variant(text: &str) -> Result<MatchingVariant> {
    let lower = text.to_ascii_lowercase();
    match lower.as_str() {
        "xor-at-most-one" | "xor" => Ok(MatchingVariant::XorAtMostOne),
        "at-most-one-2" | "at-most-one" => Ok(MatchingVariant::AtMostOne2),
        other => other
            .strip_prefix("budget:")
            .and_then(|b| b.parse().ok())
            .map(|budget| MatchingVariant::Budget { budget })
            .ok_or_else(|| Error::InvalidParameter {
                name: "variant",
                reason: format!(
                    "expected xor-at-most-one, at-most-one-2, or budget:<B>, got {text}"
                ),
            }),
    }
}

/// Prints compact JSON to stdout and optionally pretty JSON to `out`.
fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    if let Some(path) = out {
        io::save_json(path, value)?;
    }
    Ok(())
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Map(cmd) => run_map(cmd),
        Command::Infer(cmd) => run_infer(cmd),
        Command::Sample(cmd) => run_sample(cmd),
        Command::TrainToy(cmd) => run_train_toy(cmd),
        Command::Eval(cmd) => run_eval(cmd),
        Command::Selfcheck(cmd) => run_selfcheck(cmd),
    }
}

#[derive(Args)]
struct MapCmd {
    #[command(flatten)]
    input: GraphSpec,
    /// Also write the result here as pretty JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MapOutput {
    assignment: Vec<u8>,
    score: f64,
}

fn run_map(cmd: MapCmd) -> Result<i32> {
    let (graph, input) = cmd.input.resolve()?;
    let scores = input.into_scores()?;
    let result = if graph.factors().len() == 1 {
        let factor = &graph.factors()[0];
        let local: Vec<f64> = factor.members.iter().map(|&m| scores.as_slice()[m]).collect();
        let solved = factor_map(&factor.kind, &local)?;
        let mut bits = vec![0u8; graph.num_variables()];
        for (j, &m) in factor.members.iter().enumerate() {
            bits[m] = solved.assignment.bits[j];
        }
        MapResult {
            assignment: Assignment::new(bits),
            score: solved.score,
        }
    } else {
        map_global_brute_force(&graph, &scores)?
    };
    emit(
        &MapOutput {
            assignment: result.assignment.bits,
            score: result.score,
        },
        cmd.out.as_ref(),
    )?;
    Ok(0)
}

#[derive(Args)]
struct InferCmd {
    #[command(flatten)]
    input: GraphSpec,
    /// Solver config JSON; inference defaults when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's annealing temperature
    #[arg(long)]
    temperature: Option<f64>,
    /// Override the config's iteration cap
    #[arg(long)]
    max_iters: Option<usize>,
    /// Override the config's consensus residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Also write the result here as pretty JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct InferOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alignment: Option<AlignmentMatrix>,
    converged: bool,
    iterations: usize,
    max_residual: f64,
}

fn run_infer(cmd: InferCmd) -> Result<i32> {
    let (graph, input) = cmd.input.resolve()?;
    let mut config = match &cmd.config {
        Some(path) => io::load_config(path)?,
        None => ConsensusConfig::inference(),
    };
    if let Some(t) = cmd.temperature {
        config.temperature = t;
    }
    if let Some(n) = cmd.max_iters {
        config.max_iters = n;
    }
    if let Some(tol) = cmd.tol {
        config.tol = tol;
    }
    config.validate()?;
    let shape = input.shape();
    let state = lp_sparsemap_solve(&graph, &input.into_scores()?, &config)?;
    let output = match shape {
        Some((rows, cols)) => InferOutput {
            z: None,
            alignment: Some(AlignmentMatrix::new(rows, cols, state.u.clone())?),
            converged: state.converged,
            iterations: state.iterations,
            max_residual: state.max_residual,
        },
        None => InferOutput {
            z: Some(state.u.clone()),
            alignment: None,
            converged: state.converged,
            iterations: state.iterations,
            max_residual: state.max_residual,
        },
    };
    emit(&output, cmd.out.as_ref())?;
    Ok(if state.converged { 0 } else { 2 })
}

#[derive(Args)]
struct SampleCmd {
    #[command(flatten)]
    input: GraphSpec,
    /// RNG seed, recorded in every emitted line
    #[arg(long)]
    seed: u64,
    /// Number of samples to draw
    #[arg(long, default_value_t = 1)]
    num_samples: usize,
    /// Gumbel matching mode for matrix scores: train | test
    #[arg(long)]
    mode: Option<String>,
    /// Softmax temperature for train-mode Gumbel matching
    #[arg(long)]
    temperature: Option<f64>,
    /// Also write the sample lines here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct AssignmentSample {
    seed: u64,
    index: usize,
    assignment: Vec<u8>,
}

#[derive(Serialize)]
struct MatchingSampleOutput {
    seed: u64,
    mode: &'static str,
    row_alignment: AlignmentMatrix,
    col_alignment: AlignmentMatrix,
}

fn run_sample(cmd: SampleCmd) -> Result<i32> {
    if cmd.num_samples == 0 {
        return Err(Error::InvalidParameter {
            name: "num_samples",
            reason: "must be at least 1".into(),
        });
    }
    let mut lines = Vec::with_capacity(cmd.num_samples);
    let matrix_input = cmd.graph_free_matrix()?;
    if let Some(matrix) = matrix_input {
        // Gumbel matching: perturbed scores, bidirectional extraction
        let (mode, label): (GumbelMode, &'static str) =
            match cmd.mode.as_deref().unwrap_or("test") {
                "test" => (GumbelMode::Test, "test"),
                "train" => (
                    GumbelMode::Train {
                        temperature: cmd.temperature.unwrap_or(0.1),
                    },
                    "train",
                ),
                other => {
                    return Err(Error::InvalidParameter {
                        name: "mode",
                        reason: format!("expected train or test, got {other}"),
                    })
                }
            };
        for k in 0..cmd.num_samples {
            let sample = gumbel_matching(&matrix, cmd.seed.wrapping_add(k as u64), mode)?;
            lines.push(serde_json::to_string(&MatchingSampleOutput {
                seed: sample.seed,
                mode: label,
                row_alignment: sample.row_alignment,
                col_alignment: sample.col_alignment,
            })?);
        }
    } else {
        let (graph, input) = cmd.input.resolve()?;
        let scores = input.into_scores()?;
        let samples = perturb_and_map_sample(&graph, &scores, cmd.seed, cmd.num_samples)?;
        for (index, sample) in samples.into_iter().enumerate() {
            lines.push(serde_json::to_string(&AssignmentSample {
                seed: cmd.seed,
                index,
                assignment: sample.bits,
            })?);
        }
    }
    let mut body = lines.join("\n");
    body.push('\n');
    print!("{body}");
    if let Some(path) = &cmd.out {
        std::fs::write(path, body)?;
    }
    Ok(0)
}

impl SampleCmd {
    /// Matrix scores with no explicit graph select the Gumbel matching path.
    fn graph_free_matrix(&self) -> Result<Option<AlignmentMatrix>> {
        if self.input.graph.is_some() {
            return Ok(None);
        }
        match io::load_scores(&self.input.scores)? {
            ScoresInput::Matrix(m) => Ok(Some(m)),
            ScoresInput::Vector(_) => Ok(None),
        }
    }
}

#[derive(Args)]
struct TrainToyCmd {
    /// Task family: highlight | matching
    #[arg(long, default_value = "highlight")]
    task: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    num_examples: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// Rationale budget as a percentage of document length
    #[arg(long, default_value_t = 20.0)]
    budget_pct: f64,
    /// Train-time solver temperature
    #[arg(long, default_value_t = 0.1)]
    temperature: f64,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    /// Adjacency bonus in the highlight graph
    #[arg(long, default_value_t = 0.005)]
    transition: f64,
    /// Where to write the trained checkpoint as pretty JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct TrainOutput {
    epoch_losses: Vec<f64>,
    /// Token F1 of test-config extractions against the planted masks
    /// (highlight task only).
    #[serde(skip_serializing_if = "Option::is_none")]
    token_f1: Option<f64>,
}

fn run_train_toy(cmd: TrainToyCmd) -> Result<i32> {
    let hyper = ToyHyper {
        learning_rate: cmd.learning_rate,
        temperature: cmd.temperature,
        budget_pct: cmd.budget_pct,
        transition: cmd.transition,
        seed: cmd.seed,
    };
    let model = synthetic::standard_model(hyper)?;
    let data = match cmd.task.as_str() {
        "highlight" => synthetic::highlight_examples(
            cmd.num_examples,
            20,
            cmd.budget_pct,
            cmd.seed.wrapping_add(1),
        )?,
        "matching" => {
            synthetic::matching_examples(cmd.num_examples, 4, 6, cmd.seed.wrapping_add(1))?
        }
        other => {
            return Err(Error::InvalidParameter {
                name: "task",
                reason: format!("expected highlight or matching, got {other}"),
            })
        }
    };
    let outcome = train_toy(&model, &data, cmd.epochs)?;
    let token_f1 = if cmd.task == "highlight" {
        let config = ConsensusConfig::inference();
        let mut preds = Vec::with_capacity(data.len());
        let mut golds = Vec::with_capacity(data.len());
        for ex in &data {
            preds.push(extract_highlight(&outcome.model, &ex.tokens, &config)?.z);
            if let PlantedRationale::Mask(mask) = &ex.planted_rationale {
                golds.push(mask.iter().map(|&b| b as f64).collect());
            }
        }
        Some(metrics::token_f1(&preds, &golds, 0.0)?.token_f1)
    } else {
        None
    };
    if let Some(path) = &cmd.out {
        io::save_json(path, &outcome)?;
    }
    emit(
        &TrainOutput {
            epoch_losses: outcome.epoch_losses,
            token_f1,
        },
        None,
    )?;
    Ok(0)
}

#[derive(Args)]
struct EvalCmd {
    /// Predicted masks JSON: array of per-document arrays
    #[arg(long)]
    pred: PathBuf,
    /// Gold binary masks JSON, same shape
    #[arg(long)]
    gold: PathBuf,
    /// Selection threshold on predicted mass
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    /// Also write the metrics here as pretty JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run_eval(cmd: EvalCmd) -> Result<i32> {
    let preds = io::load_masks(&cmd.pred)?;
    let golds = io::load_masks(&cmd.gold)?;
    let eval = metrics::token_f1(&preds, &golds, cmd.threshold)?;
    emit(&eval, cmd.out.as_ref())?;
    Ok(0)
}

#[derive(Args)]
struct SelfcheckCmd {
    /// Comma-separated criterion numbers to run (all 8 when omitted)
    #[arg(long)]
    only: Option<String>,
}

fn run_selfcheck(cmd: SelfcheckCmd) -> Result<i32> {
    let indices: Vec<usize> = match &cmd.only {
        None => (1..=selfcheck::CRITERIA_COUNT).collect(),
        Some(list) => list
            .split(',')
            .map(|part| {
                part.trim().parse().map_err(|_| Error::InvalidParameter {
                    name: "only",
                    reason: format!("expected comma-separated criterion numbers, got {part:?}"),
                })
            })
            .collect::<Result<_>>()?,
    };
    let mut all_passed = true;
    for index in indices {
        let report = selfcheck::run_criterion(index)?;
        println!("{}", report.line());
        all_passed &= report.passed;
    }
    Ok(if all_passed { 0 } else { 2 })
}
