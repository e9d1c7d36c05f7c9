//! Command-line surface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use vbench2_core::{Constants, DimensionId};

use crate::align::{cmd_align, Correlation};
use crate::config::{RunConfig, OUTPUT_DIR_ENV};
use crate::error::{invalid, CliError};
use crate::evaluate::cmd_evaluate;
use crate::export::{cmd_export_prompts, registry_dump};
use crate::fixture::{
    published_row, write_mini_fixture, write_replay_fixture, write_published_fixture, write_alignment_fixture, MINI_MODELS,
};
use crate::report::{cmd_report, render_table};
use crate::Selection;

#[derive(Debug, Parser)]
#[command(name = "vbench2", version, about = "Intrinsic-faithfulness evaluation harness for generated video")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Restrict to these dimensions (repeatable).
    #[arg(long = "dimension", value_name = "DIMENSION")]
    pub dimensions: Vec<DimensionId>,
    /// Restrict to these model ids (repeatable).
    #[arg(long = "model", value_name = "MODEL")]
    pub models: Vec<String>,
    /// Mock script to use instead of the configured backend.
    #[arg(long)]
    pub mock_script: Option<PathBuf>,
}

impl Common {
    fn selection(&self) -> Selection {
        Selection {
            dimensions: self.dimensions.clone(),
            models: self.models.clone(),
        }
    }

    fn load(&self) -> Result<RunConfig, CliError> {
        RunConfig::load(&self.config, std::env::var(OUTPUT_DIR_ENV).ok().as_deref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    /// Built-in mini suite with a strict mock script.
    Mini,
    /// Results replaying the four published models.
    Published,
    /// Diversity results and human annotations for alignment.
    Alignment,
    /// One published row, reproduced end to end through `evaluate`.
    Replay,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write per-dimension prompt lists for video generation.
    ExportPrompts(Common),
    /// Score generated videos; resumes from existing results.
    Evaluate(Common),
    /// Correlate machine and human pairwise win ratios.
    Align {
        #[command(flatten)]
        common: Common,
        /// Annotations CSV; overrides the config.
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Rebuild report.json, table.md and radar.json from stored results.
    Report(Common),
    /// Print every dimension binding and the effective constants.
    DumpRegistry {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a self-contained fixture directory.
    Fixture {
        kind: FixtureKind,
        #[arg(long)]
        out: PathBuf,
        /// Models to script (mini, replay).
        #[arg(long = "model", value_name = "MODEL")]
        models: Vec<String>,
    },
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut out = std::io::stdout().lock();
    match execute(cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn say(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(CliError::io("writing to stdout"))
}

fn fmt_corr(c: &Correlation) -> String {
    match c {
        Correlation::Value(v) => format!("{v:.4}"),
        Correlation::Undefined(why) => format!("undefined ({why})"),
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::ExportPrompts(c) => {
            let (dir, index) = cmd_export_prompts(&c.load()?, &c.selection())?;
            let n: usize = index.dimensions.values().map(|d| d.prompts.len()).sum();
            say(out, &format!("wrote {n} prompt(s) over {} dimension(s) to {}", index.dimensions.len(), dir.display()))
        }
        Command::Evaluate(c) => {
            let config = c.load()?;
            let summary = cmd_evaluate(&config, &c.selection(), c.mock_script.as_deref())?;
            say(out, &format!("scored {} record(s), skipped {} already present", summary.scored, summary.skipped))?;
            say(out, &render_table(&summary.report))
        }
        Command::Align { common, annotations } => {
            let report = cmd_align(&common.load()?, &common.selection(), annotations.as_deref())?;
            for (dim, a) in &report.dimensions {
                say(out, &format!("{dim}: spearman {} pearson {}", fmt_corr(&a.spearman), fmt_corr(&a.pearson)))?;
                for (i, m) in a.models.iter().enumerate() {
                    say(out, &format!("  {m}: vbench {:.4} human {:.4}", a.vbench[i], a.human[i]))?;
                }
            }
            Ok(())
        }
        Command::Report(c) => {
            let report = cmd_report(&c.load()?, &c.selection(), c.mock_script.as_deref())?;
            say(out, &render_table(&report))
        }
        Command::DumpRegistry { config } => {
            let constants = match config {
                Some(p) => RunConfig::load(&p, None)?.constants,
                None => Constants::default(),
            };
            let json = serde_json::to_string_pretty(&registry_dump(&constants)).expect("registry serializes");
            say(out, &json)
        }
        Command::Fixture { kind, out: dir, models } => {
            let config = write_fixture(kind, &dir, &models)?;
            say(out, &format!("wrote {}", config.display()))
        }
    }
}

fn write_fixture(kind: FixtureKind, dir: &Path, models: &[String]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    match kind {
        FixtureKind::Mini => {
            let ids: Vec<&str> = if models.is_empty() {
                MINI_MODELS.to_vec()
            } else {
                models.iter().map(String::as_str).collect()
            };
            write_mini_fixture(dir, &ids)
        }
        FixtureKind::Published => write_published_fixture(dir),
        FixtureKind::Alignment => write_alignment_fixture(dir),
        FixtureKind::Replay => {
            let model = match models {
                [] => "HunyuanVideo",
                [m] => m.as_str(),
                _ => return Err(invalid("replay takes a single --model")),
            };
            let row = published_row(model).ok_or_else(|| invalid(format!("no published row for model `{model}`")))?;
            write_replay_fixture(dir, model, &row)
        }
    }
}
