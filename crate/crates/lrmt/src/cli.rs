//! Argument parsing and dispatch for the `lrmt` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::commands::{
    BtRunArgs, Context, DedupArgs, EvalRunArgs, FilterLengthArgs, FixSwapArgs, FlipArgs, HumanevalReportArgs,
    IngestArgs, Outcome, QaAnalyzeArgs, QaFilterArgs, QaSampleArgs, QaScoreArgs, ReportArgs, SplitArgs, Stage,
    VerifyOverlapArgs,
};
use crate::error::{ExitKind, Failure};
use crate::recipe::run_recipe;

#[derive(Debug, Parser)]
#[command(name = "lrmt", version, about = "Low-resource MT corpus construction and evaluation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read TSV/JSONL files into a corpus.
    Ingest(IngestArgs),
    /// Drop exact duplicates.
    Dedup(DedupArgs),
    /// Keep pairs within a word-count range.
    FilterLength(FilterLengthArgs),
    /// Detect or repair swapped source/target columns.
    FixSwap(FixSwapArgs),
    /// Seeded held-out splits plus a train remainder.
    Split(SplitArgs),
    /// Check train/eval source overlap; exits 2 on collisions.
    VerifyOverlap(VerifyOverlapArgs),
    /// Append direction-reversed pairs.
    Flip(FlipArgs),
    /// Back-translation.
    #[command(subcommand)]
    Bt(BtCommand),
    /// Embedding-similarity quality analysis.
    #[command(subcommand)]
    Qa(QaCommand),
    /// Automatic metrics.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Human evaluation analytics.
    #[command(subcommand)]
    Humaneval(HumanevalCommand),
    /// Multi-stage runs.
    #[command(subcommand)]
    Recipe(RecipeCommand),
    /// Corpus statistics and results tables.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum BtCommand {
    Run(BtRunArgs),
}

#[derive(Debug, Subcommand)]
pub enum QaCommand {
    Score(QaScoreArgs),
    Analyze(QaAnalyzeArgs),
    Sample(QaSampleArgs),
    Filter(QaFilterArgs),
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    Run(EvalRunArgs),
}

#[derive(Debug, Subcommand)]
pub enum HumanevalCommand {
    Report(HumanevalReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum RecipeCommand {
    /// Runs the stages of a recipe file, skipping those whose inputs and outputs are unchanged
    Run(RecipeRunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RecipeRunArgs {
    #[arg(long)]
    pub recipe: PathBuf,
    /// Overrides the recipe's workspace.
    #[arg(long)]
    pub workspace: Option<PathBuf>,
    /// Defaults to `<workspace>/manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

fn emit(out: &mut dyn Write, outcome: &Outcome, json: bool) {
    let _ = if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&outcome.report).unwrap_or_default())
    } else if outcome.text.is_empty() {
        Ok(())
    } else {
        writeln!(out, "{}", outcome.text)
    };
}

fn run_stage(stage: &dyn Stage, json: bool, ctx: &Context, out: &mut dyn Write) -> Result<(), Failure> {
    let outcome = stage.run(ctx)?;
    emit(out, &outcome, json);
    match outcome.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn run_recipe_command(args: &RecipeRunArgs, ctx: &Context, out: &mut dyn Write) -> Result<(), Failure> {
    let result = run_recipe(&args.recipe, args.workspace.as_deref(), args.manifest.as_deref(), ctx);
    let (run, failure) = match result {
        Ok(run) => (Some(run), None),
        Err((f, run)) => (run, Some(f)),
    };
    if let Some(run) = &run {
        let m = &run.manifest;
        if args.json {
            let stages: Vec<_> = m
                .stages
                .iter()
                .map(|s| json!({ "id": s.id, "op": s.op, "status": s.status, "counts": s.counts, "wall_ms": s.wall_ms }))
                .collect();
            let summary = json!({
                "manifest": run.manifest_path.display().to_string(),
                "executed": m.executed(),
                "skipped": m.skipped(),
                "complete": m.complete,
                "stages": stages,
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
        } else {
            for s in &m.stages {
                let _ = writeln!(out, "{:>8}  {}  ({}, {} ms)", format!("{:?}", s.status).to_lowercase(), s.id, s.op, s.wall_ms);
            }
            let _ = writeln!(
                out,
                "{} stages executed, {} skipped; manifest {}",
                m.executed(),
                m.skipped(),
                run.manifest_path.display()
            );
        }
    }
    failure.map_or(Ok(()), Err)
}

/// Dispatches a parsed command.
pub fn execute(cli: &Cli, ctx: &Context, out: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Ingest(a) => run_stage(a, a.json, ctx, out),
        Command::Dedup(a) => run_stage(a, a.json, ctx, out),
        Command::FilterLength(a) => run_stage(a, a.json, ctx, out),
        Command::FixSwap(a) => run_stage(a, a.json, ctx, out),
        Command::Split(a) => run_stage(a, a.json, ctx, out),
        Command::VerifyOverlap(a) => run_stage(a, a.json, ctx, out),
        Command::Flip(a) => run_stage(a, a.json, ctx, out),
        Command::Bt(BtCommand::Run(a)) => run_stage(a, a.json, ctx, out),
        Command::Qa(QaCommand::Score(a)) => run_stage(a, a.json, ctx, out),
        Command::Qa(QaCommand::Analyze(a)) => run_stage(a, a.json, ctx, out),
        Command::Qa(QaCommand::Sample(a)) => run_stage(a, a.json, ctx, out),
        Command::Qa(QaCommand::Filter(a)) => run_stage(a, a.json, ctx, out),
        Command::Eval(EvalCommand::Run(a)) => run_stage(a, a.json, ctx, out),
        Command::Humaneval(HumanevalCommand::Report(a)) => run_stage(a, false, ctx, out),
        Command::Recipe(RecipeCommand::Run(a)) => run_recipe_command(a, ctx, out),
        Command::Report(a) => run_stage(a, a.json, ctx, out),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with<I, T>(args: I, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitKind::Usage as u8 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    match execute(&cli, ctx, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.exit_code()
        }
    }
}
