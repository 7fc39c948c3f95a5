use std::fs::File;
use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use portal::api::{self, AppState};
use portal::config::Config;
use portal::harvest::{run_harvest, HarvestCursor, HarvestOptions, UreqTransport};
use portal::mentionlog::ingest_mentions;
use portal::state::{DataDir, Portal, PortalState};
use portal::thumbs::{PdfSource, RasterizerCommand, ThumbnailGenerator};
use portal::timefmt;
use portal_core::{ArxivId, ThumbnailStatus};

#[derive(Parser, Debug)]
#[command(
    name = "portal",
    version,
    about = "Self-hosted pre-print search portal"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Data directory; overrides `data_dir` from the config.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one incremental OAI-PMH harvest round.
    Harvest(HarvestArgs),
    /// Social-mention logs.
    #[command(subcommand)]
    Mentions(MentionsCommand),
    /// Serve the JSON API.
    Serve,
    /// Index maintenance.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Preview strips.
    #[command(subcommand)]
    Thumbs(ThumbsCommand),
}

#[derive(Args, Debug)]
struct HarvestArgs {
    /// OAI-PMH base URL; defaults to `harvest_endpoint` from the config.
    #[arg(long)]
    endpoint: Option<String>,
    /// Harvest records changed since this date instead of the stored cursor.
    #[arg(long, value_parser = parse_date)]
    from: Option<NaiveDate>,
    /// Stop after this many pages; the cursor keeps the continuation.
    #[arg(long)]
    max_pages: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum MentionsCommand {
    /// Ingest a line-delimited JSON mention log (`-` for stdin).
    Ingest { file: String },
}

#[derive(Subcommand, Debug)]
enum IndexCommand {
    /// Rebuild the index from the paper store.
    Rebuild,
}

#[derive(Subcommand, Debug)]
enum ThumbsCommand {
    /// Generate missing strips. PDFs come from `--pdf-dir/<id>.pdf` or the
    /// upstream PDF link.
    Generate {
        #[arg(long)]
        pdf_dir: Option<PathBuf>,
        /// Restrict to these papers.
        ids: Vec<String>,
    },
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    timefmt::parse_date(s).ok_or_else(|| format!("expected YYYY-MM-DD, got {s:?}"))
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_target(false)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(dir) = cli.data_dir {
        config.data_dir = dir;
    }
    let dir = DataDir::new(config.data_dir.clone());
    match cli.command {
        Command::Harvest(args) => harvest(&config, &dir, args),
        Command::Mentions(MentionsCommand::Ingest { file }) => ingest(&dir, &file),
        Command::Serve => serve(config, dir),
        Command::Index(IndexCommand::Rebuild) => {
            let mut state = PortalState::load_without_index(&dir)?;
            state.rebuild_index();
            state.save_index(&dir)?;
            println!("indexed {} papers", state.index.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Thumbs(ThumbsCommand::Generate { pdf_dir, ids }) => {
            thumbs(&config, &dir, pdf_dir, ids)
        }
    }
}

fn harvest(config: &Config, dir: &DataDir, args: HarvestArgs) -> Result<ExitCode> {
    let endpoint = args
        .endpoint
        .unwrap_or_else(|| config.harvest_endpoint.clone());
    let mut state = PortalState::load(dir)?;
    let stored = HarvestCursor::load(&dir.cursor_file())?;
    let mut cursor = match (stored, args.from) {
        (Some(c), Some(_)) if c.in_flight() => {
            eprintln!("warning: a round is in flight; ignoring --from");
            c
        }
        (Some(mut c), Some(from)) => {
            c.last_completed_datestamp = from;
            c
        }
        (Some(c), None) => c,
        (None, from) => HarvestCursor::starting_from(
            from.unwrap_or(NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()),
        ),
    };
    let options = HarvestOptions {
        max_pages: args.max_pages,
        ..HarvestOptions::default()
    };
    let today = chrono::Utc::now().date_naive();
    let transport = UreqTransport::default();
    let result = run_harvest(
        &mut state,
        &mut cursor,
        &transport,
        &endpoint,
        today,
        &options,
        &std::thread::sleep,
    );

    state.save_store(dir)?;
    state.save_index(dir)?;
    cursor.save(&dir.cursor_file())?;
    match result {
        Ok(summary) => {
            println!(
                "pages={} inserted={} merged={} unchanged={} rejected={} total_ingested={} completed={}",
                summary.pages,
                summary.inserted,
                summary.merged,
                summary.unchanged,
                summary.rejected,
                cursor.records_ingested,
                summary.completed
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!(
                "error: harvest stopped: {e}; cursor saved to {}",
                dir.cursor_file().display()
            );
            Ok(ExitCode::FAILURE)
        }
    }
}

fn ingest(dir: &DataDir, file: &str) -> Result<ExitCode> {
    let mut state = PortalState::load_without_index(dir)?;
    let result = if file == "-" {
        ingest_mentions(io::stdin().lock(), &mut state.mentions)
    } else {
        let f = File::open(file).with_context(|| format!("opening {file}"))?;
        ingest_mentions(BufReader::new(f), &mut state.mentions)
    };
    let report = match result {
        Ok(report) => report,
        Err(e) => {
            state.save_store(dir)?;
            bail!(e);
        }
    };
    state.save_store(dir)?;
    println!(
        "accepted={} duplicates={} rejected={}",
        report.accepted, report.duplicates, report.rejected
    );
    Ok(ExitCode::SUCCESS)
}

fn serve(config: Config, dir: DataDir) -> Result<ExitCode> {
    let state = PortalState::load(&dir)?;
    let app = Arc::new(AppState::new(
        Arc::new(Portal::new(state)),
        config,
        Some(dir),
    ));
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(api::serve(app))?;
    Ok(ExitCode::SUCCESS)
}

fn thumbs(
    config: &Config,
    dir: &DataDir,
    pdf_dir: Option<PathBuf>,
    ids: Vec<String>,
) -> Result<ExitCode> {
    let mut state = PortalState::load_without_index(dir)?;
    let wanted: Vec<ArxivId> = if ids.is_empty() {
        state.papers.iter().map(|p| p.arxiv_id.clone()).collect()
    } else {
        ids.iter()
            .map(|s| ArxivId::parse(s))
            .collect::<Result<_, _>>()
            .map_err(|e| anyhow::anyhow!("{e}"))?
    };
    let mut jobs = Vec::new();
    for id in wanted {
        let Some(record) = state.papers.get(&id) else {
            bail!("unknown paper {id}");
        };
        let current = state.thumbnail_status(&id);
        if current.is_done() {
            continue;
        }
        let source = match &pdf_dir {
            Some(d) => PdfSource::File(d.join(format!("{id}.pdf"))),
            None => PdfSource::Url(format!(
                "{}/{}v{}",
                config.pdf_base_url.trim_end_matches('/'),
                id,
                record.latest_version()
            )),
        };
        jobs.push((id, source, current));
    }
    let generator = ThumbnailGenerator::new(
        dir.clone(),
        RasterizerCommand::from_template(&config.rasterizer_command),
    );
    let results = generator.run_pool(jobs, config.thumbnail_workers, timefmt::now());
    let (mut done, mut failed) = (0, 0);
    for (id, status) in results {
        match &status {
            ThumbnailStatus::Done { .. } => done += 1,
            _ => failed += 1,
        }
        state.thumbnails.insert(id, status);
    }
    state.save_thumbnails(dir)?;
    println!("done={done} failed={failed}");
    Ok(ExitCode::SUCCESS)
}
