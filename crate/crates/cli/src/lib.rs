//! `tm`: render one page offline, or audit a corpus of pages.

pub mod report;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use tm_core::rendering::{RenderMode, DEFAULT_THRESHOLD};

#[derive(Debug, Parser)]
#[command(name = "tm", version, about = "Score page elements against a task and render the result")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one page and write the rendered HTML.
    Process(ProcessArgs),
    /// Score every page of a corpus and write an aggregate report.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScorerArgs {
    /// `lexical`, `remote`, or `replay FIXTURE`. Remote settings come from
    /// TM_REMOTE_URL, TM_EMBEDDING_URL, TM_API_KEY and TM_MODEL.
    #[arg(long, num_args = 1..=2, value_names = ["KIND", "FIXTURE"], default_values_t = ["lexical".to_string()])]
    pub scorer: Vec<String>,
    /// Write every backend reply of this run as a replay fixture.
    #[arg(long, value_name = "FILE")]
    pub record: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProcessArgs {
    /// HTML file or http(s) URL.
    #[arg(long)]
    pub input: String,
    #[arg(long)]
    pub task: String,
    #[arg(long, value_parser = parse_mode)]
    pub mode: RenderMode,
    /// Filter threshold, 0 to 100.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD, value_parser = clap::value_parser!(u8).range(0..=100))]
    pub threshold: u8,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    /// Rendered HTML; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long)]
    pub score_dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    /// A directory of .html files, or a file listing one path or URL per line.
    #[arg(long)]
    pub sites: PathBuf,
    #[arg(long)]
    pub task: String,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[arg(long)]
    pub report: PathBuf,
    /// Sites processed at once.
    #[arg(long, default_value_t = 4)]
    pub jobs: usize,
}

fn parse_mode(s: &str) -> Result<RenderMode, String> {
    s.parse().map_err(|e: tm_core::rendering::RenderError| e.to_string())
}
