//! `faircal` — fairness calibration from the command line.
//!
//! Subcommands: `check` (sample-size feasibility), `fit` (calibrate
//! thresholds), `predict`, `evaluate` (fairness report), `synth` (synthetic
//! data), and `bench` (repeated-split benchmark).
//!
//! Exit codes: 0 success, 2 usage/input error, 3 infeasible calibration
//! sample, 4 no admissible candidate.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use faircal::{
    build_candidates, fairness_metrics, fit, min_sample_size, predict, run_benchmark,
    synth_generate, BenchRow, BenchSource, CandidateEntry, CandidateMode, CellCounts,
    FairnessError, FairnessNotion, FairnessSpec, FittedClassifier, GroupedScores,
    SampleRequirements, SyntheticModelSpec,
};

#[derive(Parser)]
#[command(
    name = "faircal",
    version,
    about = "Distribution-free fairness calibration for score-based classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Fairness notion: eoo, eo, dp, pe, or ea.
    #[arg(long)]
    notion: FairnessNotion,
    /// Fairness tolerance α in (0,1).
    #[arg(long)]
    alpha: f64,
    /// Violation probability budget δ in (0,1).
    #[arg(long)]
    delta: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Print the minimum per-cell sample sizes for a spec, and optionally
    /// check realized counts against them.
    Check {
        #[command(flatten)]
        spec: SpecArgs,
        /// Realized cell counts as n00,n01,n10,n11.
        #[arg(long, value_name = "N00,N01,N10,N11")]
        counts: Option<String>,
        /// Estimated P(Y=1|A=0) (required for --notion ea).
        #[arg(long, value_name = "P")]
        p_y0: Option<f64>,
        /// Estimated P(Y=1|A=1) (required for --notion ea).
        #[arg(long, value_name = "P")]
        p_y1: Option<f64>,
    },
    /// Calibrate thresholds on a score CSV and write the model JSON.
    Fit {
        #[command(flatten)]
        spec: SpecArgs,
        /// Calibration CSV with header score,label,group.
        #[arg(long, value_name = "CSV")]
        scores: PathBuf,
        /// Candidate set: full or shrunk.
        #[arg(long, default_value = "full")]
        mode: CandidateMode,
        /// Monte Carlo samples per bound term.
        #[arg(long = "mc", default_value_t = 1000, value_name = "N")]
        mc_samples: u32,
        /// Seed for the bound-evaluation streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output model JSON path.
        #[arg(long, value_name = "JSON")]
        out: PathBuf,
        /// Also print the admissible candidate count to stderr.
        #[arg(long)]
        verbose: bool,
    },
    /// Apply a fitted model to a score CSV and write predictions.
    Predict {
        /// Model JSON produced by fit.
        #[arg(long, value_name = "JSON")]
        model: PathBuf,
        /// Score CSV with header score,label,group.
        #[arg(long, value_name = "CSV")]
        scores: PathBuf,
        /// Output CSV with header pred.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Compute a fairness report from predictions and ground truth.
    Evaluate {
        /// Predictions CSV with header pred.
        #[arg(long, value_name = "CSV")]
        preds: PathBuf,
        /// Ground-truth CSV with header score,label,group.
        #[arg(long, value_name = "CSV")]
        truth: PathBuf,
        /// Optional path to also write the report JSON to.
        #[arg(long, value_name = "JSON")]
        out: Option<PathBuf>,
    },
    /// Generate synthetic feature data from one of the built-in models.
    Synth {
        /// Model id: 1, 2, or 3.
        #[arg(long)]
        model: u8,
        /// Number of rows.
        #[arg(long)]
        n: usize,
        /// Generator seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV with headers x1..xd,y,a.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Run the repeated-split benchmark over a grid of specs.
    Bench {
        /// Synthetic model id (mutually exclusive with --data).
        #[arg(long, conflicts_with = "data")]
        model: Option<u8>,
        /// Pre-scored CSV with header score,label,group.
        #[arg(long, value_name = "CSV")]
        data: Option<PathBuf>,
        /// Sample size per repetition for model sources.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// JSON array of specs: [{"notion":"eoo","alpha":0.12,"delta":0.1}, ...].
        #[arg(long, value_name = "JSON")]
        grid: PathBuf,
        /// Repetitions.
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Split fractions train,calibration,test.
        #[arg(long, default_value = "0.4,0.4,0.2", value_name = "TR,CAL,TEST")]
        split: String,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        /// Also print a plaintext table to stdout.
        #[arg(long)]
        table: bool,
    },
}

/// Error carrying its process exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<FairnessError> for CliError {
    fn from(e: FairnessError) -> Self {
        let code = match e {
            FairnessError::Infeasible(_) | FairnessError::AssumptionViolated { .. } => 3,
            FairnessError::NoAdmissibleCandidate => 4,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::usage(format!("CSV error: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(format!("I/O error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::usage(format!("JSON error: {e}"))
    }
}

/// On-disk model format: the flat field set
/// (notion, alpha, delta, seed, mode, mc_samples, thresholds, chosen
/// indices, bound, estimated error, calibration sizes).
#[derive(Serialize, Deserialize)]
struct ModelFile {
    notion: FairnessNotion,
    alpha: f64,
    delta: f64,
    seed: u64,
    mode: CandidateMode,
    mc_samples: u32,
    t0: f64,
    t1: f64,
    k_10: usize,
    k_11: usize,
    k_00: usize,
    k_01: usize,
    bound: f64,
    est_error: Option<f64>,
    n_00: usize,
    n_01: usize,
    n_10: usize,
    n_11: usize,
}

impl From<&FittedClassifier> for ModelFile {
    fn from(m: &FittedClassifier) -> Self {
        Self {
            notion: m.spec.notion,
            alpha: m.spec.alpha,
            delta: m.spec.delta,
            seed: m.spec.seed,
            mode: m.spec.candidate_mode,
            mc_samples: m.spec.mc_samples,
            t0: m.t_0,
            t1: m.t_1,
            k_10: m.chosen.k_10,
            k_11: m.chosen.k_11,
            k_00: m.chosen.k_00,
            k_01: m.chosen.k_01,
            bound: m.chosen.bound,
            est_error: m.chosen.est_error,
            n_00: m.calibration_sizes.n_00,
            n_01: m.calibration_sizes.n_01,
            n_10: m.calibration_sizes.n_10,
            n_11: m.calibration_sizes.n_11,
        }
    }
}

impl From<ModelFile> for FittedClassifier {
    fn from(f: ModelFile) -> Self {
        FittedClassifier {
            t_0: f.t0,
            t_1: f.t1,
            spec: FairnessSpec {
                notion: f.notion,
                alpha: f.alpha,
                delta: f.delta,
                mc_samples: f.mc_samples,
                seed: f.seed,
                candidate_mode: f.mode,
            },
            chosen: CandidateEntry {
                k_10: f.k_10,
                k_11: f.k_11,
                k_00: f.k_00,
                k_01: f.k_01,
                bound: f.bound,
                est_error: f.est_error,
            },
            calibration_sizes: CellCounts {
                n_00: f.n_00,
                n_01: f.n_01,
                n_10: f.n_10,
                n_11: f.n_11,
            },
        }
    }
}

#[derive(Deserialize)]
struct ScoreRow {
    score: f64,
    label: u8,
    group: u8,
}

fn read_score_csv(path: &Path) -> Result<Vec<(f64, u8, u8)>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let expected = ["score", "label", "group"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(CliError::usage(format!(
            "{}: expected header score,label,group, got {}",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.deserialize::<ScoreRow>() {
        let row = record?;
        rows.push((row.score, row.label, row.group));
    }
    if rows.is_empty() {
        return Err(CliError::usage(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(rows)
}

fn read_pred_csv(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["pred"] {
        return Err(CliError::usage(format!(
            "{}: expected header pred, got {}",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut preds = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = record.get(0).unwrap_or("");
        let value: u8 = field
            .parse()
            .map_err(|_| CliError::usage(format!("{}: bad pred value {field:?}", path.display())))?;
        preds.push(value);
    }
    Ok(preds)
}

fn parse_counts(raw: &str) -> Result<CellCounts, CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::usage(format!(
            "--counts expects n00,n01,n10,n11, got {raw:?}"
        )));
    }
    let mut values = [0usize; 4];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("--counts: bad count {part:?}")))?;
    }
    Ok(CellCounts {
        n_00: values[0],
        n_01: values[1],
        n_10: values[2],
        n_11: values[3],
    })
}

fn parse_split(raw: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!(
            "--split expects three fractions tr,cal,test, got {raw:?}"
        )));
    }
    let mut values = [0.0f64; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("--split: bad fraction {part:?}")))?;
    }
    Ok((values[0], values[1], values[2]))
}

/// Render the minimum-size lines for `check`. Cells sharing the same
/// requirement collapse into one line with a pattern index (e.g. the EOO
/// requirement holds for both groups, printed as `n^{1,a}`).
fn requirement_lines(notion: FairnessNotion, req: &SampleRequirements) -> String {
    let mut out = String::new();
    if let Some(m) = req.pooled_per_group {
        let _ = writeln!(out, "minimum n^{{a}} = {m} (pooled per group)");
        return out;
    }
    let cells = req.per_cell;
    let uniform_y = |y: usize| cells[y][0] == cells[y][1];
    match notion {
        FairnessNotion::Eoo if uniform_y(1) => {
            let _ = writeln!(out, "minimum n^{{1,a}} = {}", cells[1][0]);
        }
        FairnessNotion::Pe if uniform_y(0) => {
            let _ = writeln!(out, "minimum n^{{0,a}} = {}", cells[0][0]);
        }
        FairnessNotion::Eo if uniform_y(0) && uniform_y(1) && cells[0][0] == cells[1][0] => {
            let _ = writeln!(out, "minimum n^{{y,a}} = {}", cells[0][0]);
        }
        _ => {
            for y in 0..2 {
                for a in 0..2 {
                    if cells[y][a] > 0 {
                        let _ = writeln!(out, "minimum n^{{{y},{a}}} = {}", cells[y][a]);
                    }
                }
            }
        }
    }
    out
}

fn cmd_check(
    spec: &SpecArgs,
    counts: Option<&str>,
    p_y0: Option<f64>,
    p_y1: Option<f64>,
) -> Result<(), CliError> {
    let p_y = match (spec.notion, p_y0, p_y1) {
        (FairnessNotion::Ea, Some(a), Some(b)) => Some((a, b)),
        (FairnessNotion::Ea, _, _) => {
            return Err(CliError::usage(
                "--notion ea requires --p-y0 and --p-y1 prevalence estimates",
            ))
        }
        _ => None,
    };
    let req = min_sample_size(spec.notion, spec.alpha, spec.delta, p_y)?;
    print!(
        "notion {} alpha {} delta {}\n{}",
        spec.notion,
        spec.alpha,
        spec.delta,
        requirement_lines(spec.notion, &req)
    );
    if let Some(raw) = counts {
        let counts = parse_counts(raw)?;
        match req.check(&counts) {
            Ok(()) => println!("feasible: counts meet the minimum sizes"),
            Err(e) => {
                println!("{e}");
                return Err(e.into());
            }
        }
    }
    Ok(())
}

fn cmd_fit(
    spec_args: &SpecArgs,
    scores: &Path,
    mode: CandidateMode,
    mc_samples: u32,
    seed: u64,
    out: &Path,
    verbose: bool,
) -> Result<(), CliError> {
    let rows = read_score_csv(scores)?;
    let grouped = GroupedScores::from_triples(rows.iter().copied())?;
    let spec = FairnessSpec {
        notion: spec_args.notion,
        alpha: spec_args.alpha,
        delta: spec_args.delta,
        mc_samples,
        seed,
        candidate_mode: mode,
    };
    let fitted = fit(&grouped, &spec)?;
    if verbose {
        let admissible = build_candidates(&grouped, &spec)?;
        eprintln!("admissible candidates: {}", admissible.len());
    }
    let file = ModelFile::from(&fitted);
    let mut json = serde_json::to_string_pretty(&file)?;
    json.push('\n');
    fs::write(out, json)?;
    if grouped.counts().get(0, 0) == 0 || grouped.counts().get(0, 1) == 0 {
        eprintln!(
            "warning: a negative-label cell is empty; the estimated error omits its term"
        );
    }
    println!(
        "fitted {} thresholds: t0 = {}, t1 = {} (bound {}, est_error {})",
        fitted.spec.notion,
        fitted.t_0,
        fitted.t_1,
        fitted.chosen.bound,
        fitted
            .chosen
            .est_error
            .map(|e| e.to_string())
            .unwrap_or_else(|| "n/a".into())
    );
    Ok(())
}

fn cmd_predict(model: &Path, scores: &Path, out: &Path) -> Result<(), CliError> {
    let raw = fs::read_to_string(model)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", model.display())))?;
    let file: ModelFile = serde_json::from_str(&raw)?;
    let fitted = FittedClassifier::from(file);
    let rows = read_score_csv(scores)?;
    let score_values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let groups: Vec<u8> = rows.iter().map(|r| r.2).collect();
    let preds = predict(&fitted, &score_values, &groups)?;
    let mut writer = csv::Writer::from_path(out)?;
    writer.write_record(["pred"])?;
    for p in preds {
        writer.write_record([p.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

fn cmd_evaluate(preds: &Path, truth: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let predictions = read_pred_csv(preds)?;
    let rows = read_score_csv(truth)?;
    let labels: Vec<u8> = rows.iter().map(|r| r.1).collect();
    let groups: Vec<u8> = rows.iter().map(|r| r.2).collect();
    let report = fairness_metrics(&predictions, &labels, &groups)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    if let Some(path) = out {
        fs::write(path, &json)?;
    }
    print!("{json}");
    Ok(())
}

fn cmd_synth(model_id: u8, n: usize, seed: u64, out: &Path) -> Result<(), CliError> {
    let model = SyntheticModelSpec::model(model_id)?;
    let data = synth_generate(&model, n, seed)?;
    let mut writer = csv::Writer::from_path(out)?;
    let mut header: Vec<String> = (1..=data.dimension).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    header.push("a".into());
    writer.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(data.dimension + 2);
    for i in 0..data.labels.len() {
        record.clear();
        record.extend(data.features[i].iter().map(|v| v.to_string()));
        record.push(data.labels[i].to_string());
        record.push(data.groups[i].to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

fn render_table(rows: &[BenchRow]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6} {:>6} {:>6} {:>7} {:>5} {:>10} {:>11} {:>10} {:>10} {:>10} {:>9}",
        "notion", "alpha", "delta", "mode", "reps", "infeasible", "mean|DEOO|", "|DEOO|q95",
        "mean|DPE|", "|DPE|q95", "mean acc"
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{:<6} {:>6} {:>6} {:>7} {:>5} {:>10} {:>11} {:>10} {:>10} {:>10} {:>9}",
            row.notion.to_string(),
            row.alpha,
            row.delta,
            row.mode.to_string(),
            row.repetitions,
            row.infeasible,
            fmt(row.mean_abs_deoo),
            fmt(row.q95_abs_deoo),
            fmt(row.mean_abs_dpe),
            fmt(row.q95_abs_dpe),
            fmt(row.mean_accuracy),
        );
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    model_id: Option<u8>,
    data: Option<&Path>,
    n: usize,
    grid_path: &Path,
    reps: usize,
    split_raw: &str,
    seed: u64,
    out: &Path,
    table: bool,
) -> Result<(), CliError> {
    let grid_raw = fs::read_to_string(grid_path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", grid_path.display())))?;
    let grid: Vec<FairnessSpec> = serde_json::from_str(&grid_raw)?;
    let split = parse_split(split_raw)?;
    let model_spec;
    let score_rows;
    let source = match (model_id, data) {
        (Some(id), None) => {
            model_spec = SyntheticModelSpec::model(id)?;
            BenchSource::Model {
                spec: &model_spec,
                n,
            }
        }
        (None, Some(path)) => {
            score_rows = read_score_csv(path)?;
            BenchSource::Scores(&score_rows)
        }
        _ => {
            return Err(CliError::usage(
                "bench requires exactly one of --model or --data",
            ))
        }
    };
    let rows = run_benchmark(&source, &grid, reps, split, seed)?;
    let mut writer = csv::Writer::from_path(out)?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    if table {
        print!("{}", render_table(&rows));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Check {
            spec,
            counts,
            p_y0,
            p_y1,
        } => cmd_check(spec, counts.as_deref(), *p_y0, *p_y1),
        Command::Fit {
            spec,
            scores,
            mode,
            mc_samples,
            seed,
            out,
            verbose,
        } => cmd_fit(spec, scores, *mode, *mc_samples, *seed, out, *verbose),
        Command::Predict { model, scores, out } => cmd_predict(model, scores, out),
        Command::Evaluate { preds, truth, out } => cmd_evaluate(preds, truth, out.as_deref()),
        Command::Synth {
            model,
            n,
            seed,
            out,
        } => cmd_synth(*model, *n, *seed, out),
        Command::Bench {
            model,
            data,
            n,
            grid,
            reps,
            split,
            seed,
            out,
            table,
        } => cmd_bench(
            *model,
            data.as_deref(),
            *n,
            grid,
            *reps,
            split,
            *seed,
            out,
            *table,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
