use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use tm_core::dom::{serialize, DomError, ParseOptions};
use tm_core::pipeline::{analyze_page, PipelineError};
use tm_core::rendering::{render, RenderConfig};
use tm_core::scoring::{
    decompose_task, LexicalBackend, RecordingBackend, RemoteBackend, RemoteConfig, ReplayBackend, ScorerBackend,
    ScoringConfig, ScoringError,
};

use crate::report::{AuditReport, RowStatus, SiteRow, StatsDocument, SCHEMA};
use crate::{AuditArgs, ProcessArgs, ScorerArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;
pub const EXIT_PROTOCOL: i32 = 4;
pub const EXIT_ALL_SITES_FAILED: i32 = 5;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    fn output(path: &Path, e: std::io::Error) -> Self {
        Self { code: EXIT_OUTPUT, message: format!("{}: {e}", path.display()) }
    }
}

impl From<ScoringError> for Failure {
    fn from(e: ScoringError) -> Self {
        let code = match e {
            ScoringError::EmptyTask | ScoringError::InvalidConfig(_) => EXIT_INPUT,
            ScoringError::BackendUnavailable(_) | ScoringError::Unsupported(_) => EXIT_BACKEND,
            ScoringError::SchemaViolation(_)
            | ScoringError::BatchProtocolViolation { .. }
            | ScoringError::DuplicateScore(_)
            | ScoringError::ScoreOutOfRange(..) => EXIT_PROTOCOL,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<DomError> for Failure {
    fn from(e: DomError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Dom(e) => e.into(),
            PipelineError::Scoring(e) => e.into(),
        }
    }
}

fn remote_config_from_env() -> RemoteConfig {
    let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
    let mut c = RemoteConfig::default();
    if let Some(v) = var("TM_REMOTE_URL") {
        c.endpoint = v;
    }
    c.embedding_endpoint = var("TM_EMBEDDING_URL");
    c.api_key = var("TM_API_KEY");
    if let Some(v) = var("TM_MODEL") {
        c.model = v;
    }
    c
}

pub fn backend(args: &ScorerArgs) -> Result<Arc<dyn ScorerBackend>, Failure> {
    let kind = args.scorer.first().map(String::as_str).unwrap_or("lexical");
    let fixture = args.scorer.get(1);
    match (kind, fixture) {
        ("lexical", None) => Ok(Arc::new(LexicalBackend)),
        ("remote", None) => {
            RemoteBackend::new(remote_config_from_env()).map(|b| Arc::new(b) as _).map_err(|e| Failure {
                code: EXIT_BACKEND,
                message: e.to_string(),
            })
        }
        ("replay", Some(path)) => ReplayBackend::from_path(Path::new(path))
            .map(|b| Arc::new(b) as _)
            .map_err(Failure::input),
        ("replay", None) => Err(Failure::input("--scorer replay needs a fixture path")),
        (other, _) => Err(Failure::input(format!("unknown scorer {other:?}; use lexical, remote or replay FIXTURE"))),
    }
}

fn is_url(s: &str) -> bool {
    s.starts_with("http://") || s.starts_with("https://")
}

/// Reads a file, or fetches a URL with a plain GET (no scripts run).
pub fn load_input(input: &str) -> Result<Vec<u8>, Failure> {
    if is_url(input) {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("tm/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| Failure::input(e.to_string()))?;
        let resp = client.get(input).send().and_then(|r| r.error_for_status()).map_err(|e| Failure::input(format!("{input}: {e}")))?;
        resp.bytes().map(|b| b.to_vec()).map_err(|e| Failure::input(format!("{input}: {e}")))
    } else {
        fs::read(input).map_err(|e| Failure::input(format!("{input}: {e}")))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::output(path, e))
}

fn pretty_json(value: &impl serde::Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

fn save_recording(path: &Option<PathBuf>, recorder: &RecordingBackend<Arc<dyn ScorerBackend>>) -> Result<(), Failure> {
    if let Some(path) = path {
        let mut buf = Vec::new();
        recorder.write_jsonl(&mut buf).expect("writing to memory");
        write_file(path, &buf)?;
    }
    Ok(())
}

pub fn process(args: &ProcessArgs) -> Result<(), Failure> {
    let html = load_input(&args.input)?;
    let recorder = RecordingBackend::new(backend(&args.scorer)?);
    let scoring = ScoringConfig::default();
    let context = decompose_task(&args.task, &recorder, &scoring)?;
    let analysis = analyze_page(&html, &context, &recorder, &scoring, &ParseOptions::default())?;
    let config = RenderConfig { mode: args.mode, threshold: args.threshold, ..RenderConfig::default() };
    let annotations = render(&analysis.tree, &analysis.scores, &config).map_err(|e| Failure::input(e.to_string()))?;
    let rendered = serialize(&analysis.tree, &annotations)?;

    match &args.out {
        Some(path) => write_file(path, rendered.as_bytes())?,
        None => std::io::stdout()
            .write_all(rendered.as_bytes())
            .map_err(|e| Failure { code: EXIT_OUTPUT, message: e.to_string() })?,
    }
    if let Some(path) = &args.stats {
        let doc = StatsDocument { schema: SCHEMA.into(), row: SiteRow::ok(&args.input, &analysis.stats) };
        write_file(path, &pretty_json(&doc))?;
    }
    if let Some(path) = &args.score_dump {
        write_file(path, &pretty_json(&analysis.scores))?;
    }
    save_recording(&args.scorer.record, &recorder)
}

/// Corpus entries in a stable order: sorted `.html`/`.htm` files of a
/// directory, or the non-comment lines of a list file, relative paths
/// resolved against the list's directory.
pub fn list_sites(sites: &Path) -> Result<Vec<String>, Failure> {
    if sites.is_dir() {
        let mut out: Vec<String> = fs::read_dir(sites)
            .map_err(|e| Failure::input(format!("{}: {e}", sites.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "html" || x == "htm"))
            .map(|p| p.display().to_string())
            .collect();
        out.sort();
        return Ok(out);
    }
    let text = fs::read_to_string(sites).map_err(|e| Failure::input(format!("{}: {e}", sites.display())))?;
    let base = sites.parent().unwrap_or(Path::new("."));
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| if is_url(l) || Path::new(l).is_absolute() { l.to_string() } else { base.join(l).display().to_string() })
        .collect())
}

/// Scores every site; a failing site becomes an error row.
pub fn audit_report(args: &AuditArgs) -> Result<AuditReport, Failure> {
    let sites = list_sites(&args.sites)?;
    let recorder = RecordingBackend::new(backend(&args.scorer)?);
    let scoring = ScoringConfig::default();
    let context = decompose_task(&args.task, &recorder, &scoring)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| Failure::input(e.to_string()))?;
    let rows: Vec<SiteRow> = pool.install(|| {
        sites
            .par_iter()
            .map(|site| {
                let outcome = load_input(site).and_then(|html| {
                    analyze_page(&html, &context, &recorder, &scoring, &ParseOptions::default()).map_err(Failure::from)
                });
                match outcome {
                    Ok(a) => SiteRow::ok(site, &a.stats),
                    Err(f) => SiteRow::failed(site, f.message),
                }
            })
            .collect()
    });
    save_recording(&args.scorer.record, &recorder)?;
    Ok(AuditReport::new(&context.task, rows))
}

pub fn audit(args: &AuditArgs) -> Result<(), Failure> {
    let report = audit_report(args)?;
    write_file(&args.report, &pretty_json(&report))?;
    if report.rows.iter().all(|r| r.status == RowStatus::Error) {
        return Err(Failure { code: EXIT_ALL_SITES_FAILED, message: "no site could be processed".into() });
    }
    Ok(())
}

pub fn exit_code(result: Result<(), Failure>) -> i32 {
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("tm: {}", f.message);
            f.code
        }
    }
}
