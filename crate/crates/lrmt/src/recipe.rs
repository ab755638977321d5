//! Declarative multi-stage runs with a hash-keyed manifest.
//!
//! A recipe is JSON:
//!
//! ```json
//! { "recipe_version": 1,
//!   "workspace": "work",
//!   "stages": [ { "id": "ingest-smol", "op": "ingest", "params": { "in": ["smol.tsv"], ... } } ] }
//! ```
//!
//! `params` holds exactly the flags of the matching subcommand (long names
//! with `-` replaced by `_`). Relative paths are resolved against the
//! workspace, which is itself relative to the recipe file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::{
    BtRunArgs, Context, CorpusSummary, DedupArgs, EvalRunArgs, FilterLengthArgs, FixSwapArgs, FlipArgs,
    HumanevalReportArgs, IngestArgs, QaAnalyzeArgs, QaFilterArgs, QaSampleArgs, QaScoreArgs, ReportArgs,
    SplitArgs, Stage, VerifyOverlapArgs,
};
use crate::error::Failure;
use crate::io::{sha256_file, sha256_hex, write_atomic};

pub const RECIPE_VERSION: u32 = 1;

/// Stage operations, named after the subcommands they mirror.
pub const OPS: &[&str] = &[
    "ingest",
    "dedup",
    "filter-length",
    "fix-swap",
    "split",
    "verify-overlap",
    "flip",
    "bt-run",
    "qa-score",
    "qa-analyze",
    "qa-sample",
    "qa-filter",
    "eval-run",
    "humaneval-report",
    "report",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeStage {
    #[serde(default)]
    pub id: Option<String>,
    pub op: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub recipe_version: u32,
    #[serde(default)]
    pub workspace: Option<PathBuf>,
    pub stages: Vec<RecipeStage>,
}

fn parse_params<T: Stage + serde::de::DeserializeOwned + 'static>(params: &Value) -> Result<Box<dyn Stage>, String> {
    let params = if params.is_null() { Value::Object(Default::default()) } else { params.clone() };
    serde_json::from_value::<T>(params)
        .map(|s| Box::new(s) as Box<dyn Stage>)
        .map_err(|e| e.to_string())
}

/// Builds the command for a stage.
pub fn build_stage(op: &str, params: &Value) -> Result<Box<dyn Stage>, String> {
    match op {
        "ingest" => parse_params::<IngestArgs>(params),
        "dedup" => parse_params::<DedupArgs>(params),
        "filter-length" => parse_params::<FilterLengthArgs>(params),
        "fix-swap" => parse_params::<FixSwapArgs>(params),
        "split" => parse_params::<SplitArgs>(params),
        "verify-overlap" => parse_params::<VerifyOverlapArgs>(params),
        "flip" => parse_params::<FlipArgs>(params),
        "bt-run" => parse_params::<BtRunArgs>(params),
        "qa-score" => parse_params::<QaScoreArgs>(params),
        "qa-analyze" => parse_params::<QaAnalyzeArgs>(params),
        "qa-sample" => parse_params::<QaSampleArgs>(params),
        "qa-filter" => parse_params::<QaFilterArgs>(params),
        "eval-run" => parse_params::<EvalRunArgs>(params),
        "humaneval-report" => parse_params::<HumanevalReportArgs>(params),
        "report" => parse_params::<ReportArgs>(params),
        other => Err(format!("unknown op {other:?}; expected one of {}", OPS.join(", "))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ran,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub index: usize,
    pub id: String,
    pub op: String,
    pub params_sha256: String,
    pub status: StageStatus,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub counts: BTreeMap<String, u64>,
    pub corpora: Vec<CorpusSummary>,
    pub report: Value,
    pub wall_ms: u64,
    pub finished_unix: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Record of a recipe run. Wall times and timestamps live only here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub recipe_version: u32,
    pub recipe_sha256: String,
    pub complete: bool,
    pub stages: Vec<StageEntry>,
}

impl Manifest {
    pub fn executed(&self) -> usize {
        self.stages.iter().filter(|s| s.status == StageStatus::Ran).count()
    }

    pub fn skipped(&self) -> usize {
        self.stages.iter().filter(|s| s.status == StageStatus::Skipped).count()
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

struct Planned {
    id: String,
    op: String,
    params_sha256: String,
    stage: Box<dyn Stage>,
}

fn relative(path: &Path, base: &Path) -> String {
    path.strip_prefix(base).unwrap_or(path).display().to_string()
}

fn hash_files(paths: &[PathBuf], base: &Path) -> Result<Vec<FileHash>, Failure> {
    paths
        .iter()
        .map(|p| {
            Ok(FileHash {
                path: relative(p, base),
                sha256: sha256_file(p).map_err(|e| Failure::external(format!("cannot hash {}: {e}", p.display())))?,
            })
        })
        .collect()
}

fn outputs_intact(entry: &StageEntry, base: &Path) -> bool {
    entry
        .outputs
        .iter()
        .all(|o| sha256_file(&base.join(&o.path)).is_ok_and(|h| h == o.sha256))
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Where a recipe file says its workspace is.
pub fn workspace_of(recipe_path: &Path, recipe: &Recipe) -> PathBuf {
    let dir = recipe_path.parent().unwrap_or(Path::new(""));
    match &recipe.workspace {
        Some(ws) => dir.join(ws),
        None => dir.to_path_buf(),
    }
}

pub fn load_recipe(path: &Path) -> Result<(Recipe, String), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::external(format!("cannot read {}: {e}", path.display())))?;
    let recipe: Recipe = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::validation(format!("{}: invalid recipe: {e}", path.display())))?;
    if recipe.recipe_version != RECIPE_VERSION {
        return Err(Failure::validation(format!(
            "unsupported recipe_version {} (expected {RECIPE_VERSION})",
            recipe.recipe_version
        )));
    }
    Ok((recipe, sha256_hex(&bytes)))
}

fn plan(recipe: &Recipe, workspace: &Path) -> Result<Vec<Planned>, Failure> {
    let mut ids = BTreeSet::new();
    let mut planned = Vec::new();
    for (i, s) in recipe.stages.iter().enumerate() {
        let id = s.id.clone().unwrap_or_else(|| format!("{i}-{}", s.op));
        if !ids.insert(id.clone()) {
            return Err(Failure::validation(format!("stage id {id:?} is used twice")));
        }
        let mut stage = build_stage(&s.op, &s.params)
            .map_err(|e| Failure::validation(format!("stage {id:?}: {e}")))?;
        stage.rebase(workspace);
        let canonical = serde_json::to_string(&serde_json::json!({ "op": s.op, "params": s.params }))
            .expect("JSON values serialise");
        planned.push(Planned {
            id,
            op: s.op.clone(),
            params_sha256: sha256_hex(canonical.as_bytes()),
            stage,
        });
    }

    let mut produced: BTreeSet<PathBuf> = BTreeSet::new();
    for p in &planned {
        for input in p.stage.inputs() {
            if !input.exists() && !produced.contains(&input) {
                return Err(Failure::validation(format!(
                    "stage {:?}: input {} neither exists nor is produced by an earlier stage",
                    p.id,
                    input.display()
                )));
            }
        }
        produced.extend(p.stage.declared_outputs());
    }
    Ok(planned)
}

fn write_manifest(path: &Path, manifest: &Manifest) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serialises");
    text.push('\n');
    write_atomic(path, text.as_bytes()).map_err(|e| Failure::external(format!("cannot write {}: {e}", path.display())))
}

pub struct RecipeRun {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub workspace: PathBuf,
}

/// Runs a recipe. Stages whose parameters, input hashes and recorded outputs
/// are unchanged since the previous run are skipped. The manifest is
/// rewritten after every stage, so a failed run can be resumed.
pub fn run_recipe(
    recipe_path: &Path,
    workspace_override: Option<&Path>,
    manifest_override: Option<&Path>,
    ctx: &Context,
) -> Result<RecipeRun, (Failure, Option<RecipeRun>)> {
    let (recipe, recipe_sha256) = load_recipe(recipe_path).map_err(|f| (f, None))?;
    let workspace = workspace_override.map_or_else(|| workspace_of(recipe_path, &recipe), Path::to_path_buf);
    fs::create_dir_all(&workspace)
        .map_err(|e| (Failure::external(format!("cannot create {}: {e}", workspace.display())), None))?;
    let manifest_path = manifest_override.map_or_else(|| workspace.join(MANIFEST_FILE), Path::to_path_buf);
    let planned = plan(&recipe, &workspace).map_err(|f| (f, None))?;

    let previous: Vec<StageEntry> = fs::read(&manifest_path)
        .ok()
        .and_then(|b| serde_json::from_slice::<Manifest>(&b).ok())
        .map(|m| m.stages)
        .unwrap_or_default();

    let mut manifest = Manifest {
        recipe_version: RECIPE_VERSION,
        recipe_sha256,
        complete: false,
        stages: Vec::new(),
    };
    let mut run = RecipeRun {
        manifest: manifest.clone(),
        manifest_path: manifest_path.clone(),
        workspace: workspace.clone(),
    };
    for (index, p) in planned.iter().enumerate() {
        let inputs = match hash_files(&p.stage.inputs(), &workspace) {
            Ok(h) => h,
            Err(f) => {
                run.manifest = manifest;
                return Err((f, Some(run)));
            }
        };
        let reusable = previous.get(index).filter(|prev| {
            prev.status != StageStatus::Failed
                && prev.id == p.id
                && prev.op == p.op
                && prev.params_sha256 == p.params_sha256
                && prev.inputs == inputs
                && outputs_intact(prev, &workspace)
        });
        if let Some(prev) = reusable {
            manifest.stages.push(StageEntry {
                status: StageStatus::Skipped,
                wall_ms: 0,
                ..prev.clone()
            });
            continue;
        }

        let started = Instant::now();
        let result = p.stage.run(ctx);
        let mut entry = StageEntry {
            index,
            id: p.id.clone(),
            op: p.op.clone(),
            params_sha256: p.params_sha256.clone(),
            status: StageStatus::Ran,
            inputs,
            outputs: Vec::new(),
            counts: BTreeMap::new(),
            corpora: Vec::new(),
            report: Value::Null,
            wall_ms: 0,
            finished_unix: 0,
            error: None,
        };
        let failure = match result {
            Ok(outcome) => {
                entry.outputs = hash_files(&outcome.outputs, &workspace).unwrap_or_default();
                entry.counts = outcome.counts;
                entry.corpora = outcome
                    .corpora
                    .into_iter()
                    .map(|mut c| {
                        c.path = relative(Path::new(&c.path), &workspace);
                        c
                    })
                    .collect();
                entry.report = outcome.report;
                outcome.failure
            }
            Err(f) => Some(f),
        };
        entry.wall_ms = u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX);
        entry.finished_unix = now_unix();
        if let Some(f) = &failure {
            entry.status = StageStatus::Failed;
            entry.error = Some(f.message.clone());
        }
        manifest.stages.push(entry);
        if let Err(f) = write_manifest(&manifest_path, &manifest) {
            run.manifest = manifest;
            return Err((f, Some(run)));
        }
        if let Some(f) = failure {
            run.manifest = manifest;
            let message = format!("stage {:?} failed: {}", p.id, f.message);
            return Err((Failure { kind: f.kind, message }, Some(run)));
        }
    }
    manifest.complete = true;
    if let Err(f) = write_manifest(&manifest_path, &manifest) {
        run.manifest = manifest;
        return Err((f, Some(run)));
    }
    run.manifest = manifest;
    Ok(run)
}
