use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use sketchbug::protocol::config::AppConfig;
use sketchbug::protocol::log::{replay, StrokeLog};
use sketchbug::protocol::server::{serve, Preload, ServerConfig, DEFAULT_PORT};
use sketchbug::protocol::{encode, DriverConfig};
use sketchbug::recognizer::{load_templates, template_library, templates_to_json};
use sketchbug::stats::{bootstrap_ci_studentized, mean_difference, wilcoxon_signed_rank, MeanDiffCI, PairedSamples, WilcoxonResult};
use sketchbug::{Limits, Mode, Program};

#[derive(Parser)]
#[command(name = "sketchdbg", version, about = "Pen-gesture debugger service and offline tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the WebSocket service.
    Serve(ServeArgs),
    /// Re-run a stroke log headlessly and print the session report.
    Replay(ReplayArgs),
    /// Pre-execute a program and write its trace.
    Trace(TraceArgs),
    /// Paired sketch-vs-WIMP statistics from a CSV of measurements.
    Analyze(AnalyzeArgs),
    /// Write the built-in gesture templates.
    Templates {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EngineOpts {
    /// Gesture template file (JSON array of {kind, points}).
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Service config file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    spiral_degrees_per_step: Option<f64>,
    #[arg(long)]
    spiral_max_rate: Option<f64>,
}

impl EngineOpts {
    fn driver_config(&self) -> Result<DriverConfig> {
        let mut config = match &self.config {
            Some(p) => AppConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => AppConfig::default(),
        };
        if let Some(d) = self.spiral_degrees_per_step {
            config.spiral.degrees_per_step = d;
        }
        if let Some(r) = self.spiral_max_rate {
            config.spiral.max_steps_per_second = r;
        }
        config.validate()?;
        let templates = match &self.templates {
            Some(p) => load_templates(p).with_context(|| format!("loading {}", p.display()))?,
            None => template_library(),
        };
        Ok(config.driver_config(templates))
    }
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "SKETCHDBG_PORT", default_value_t = DEFAULT_PORT)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Program loaded into every new connection.
    #[arg(long)]
    program: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Sketch)]
    mode: ModeArg,
    /// Write one program copy and stroke log per loaded session here.
    #[arg(long)]
    record_dir: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineOpts,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    log: PathBuf,
    /// Defaults to the mode recorded in the log header.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every server reply as JSON Lines.
    #[arg(long)]
    messages: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineOpts,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TraceFormat::Full)]
    format: TraceFormat,
    #[arg(long)]
    max_events: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV with columns id,sketch,wimp.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    boot: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Label for the measure in the output.
    #[arg(long, default_value = "actions")]
    measure: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sketch,
    Wimp,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Sketch => Mode::Sketch,
            ModeArg::Wimp => Mode::Wimp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    /// Every event with locals, stack and console output.
    Full,
    /// Line events in the shape produced by the reference tracer.
    Oracle,
}

#[derive(Deserialize)]
struct PairRow {
    id: String,
    sketch: f64,
    wimp: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AnalysisReport {
    measure: String,
    n: usize,
    mean_diff: f64,
    ci: MeanDiffCI,
    #[serde(rename = "W")]
    w: f64,
    p: f64,
    wilcoxon: WilcoxonResult,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn program_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let driver = args.engine.driver_config()?;
    let preload = match &args.program {
        Some(p) => {
            let source = read(p)?;
            Program::parse(&source).map_err(|e| anyhow::anyhow!("{}: syntax error: {e}", p.display()))?;
            Some(Preload { name: program_name(p), source, mode: args.mode.into() })
        }
        None => None,
    };
    if let Some(dir) = &args.record_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let config = ServerConfig { driver, preload, record_dir: args.record_dir };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .with_context(|| format!("binding {}:{}", args.host, args.port))?;
        eprintln!("listening on ws://{}", listener.local_addr()?);
        serve(listener, config).await?;
        Ok(())
    })
}

fn cmd_replay(args: ReplayArgs) -> Result<()> {
    let source = read(&args.program)?;
    let log = StrokeLog::read(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
    let mode = args.mode.map_or(log.header.mode, Mode::from);
    let result = replay(&source, &log, mode, args.engine.driver_config()?)?;
    if let Some(path) = &args.messages {
        let mut text = String::new();
        for m in &result.messages {
            text.push_str(&encode(m));
            text.push('\n');
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut report = result.report;
    report.final_state = None;
    write_output(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)
}

fn cmd_trace(args: TraceArgs) -> Result<()> {
    let source = read(&args.program)?;
    let program = Program::parse(&source).map_err(|e| anyhow::anyhow!("{}: syntax error: {e}", args.program.display()))?;
    let defaults = Limits::default();
    let limits = Limits {
        max_events: args.max_events.unwrap_or(defaults.max_events),
        max_depth: args.max_depth.unwrap_or(defaults.max_depth),
    };
    let trace = program.trace(limits);
    let text = match args.format {
        TraceFormat::Full => trace.to_canonical_json(),
        TraceFormat::Oracle => serde_json::to_string_pretty(&trace.oracle_view(&program_name(&args.program)))?,
    };
    write_output(args.out.as_deref(), &text)
}

fn read_pairs(path: &Path) -> Result<PairedSamples> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let (mut ids, mut sketch, mut wimp) = (Vec::new(), Vec::new(), Vec::new());
    for (i, row) in reader.deserialize::<PairRow>().enumerate() {
        let row = row.with_context(|| format!("{}: record {}", path.display(), i + 1))?;
        ids.push(row.id);
        sketch.push(row.sketch);
        wimp.push(row.wimp);
    }
    Ok(PairedSamples::new(sketch, wimp)?.with_labels(ids))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let samples = read_pairs(&args.pairs)?;
    let ci = bootstrap_ci_studentized(&samples, args.boot, args.alpha, args.seed)?;
    let wilcoxon = wilcoxon_signed_rank(&samples)?;
    let report = AnalysisReport {
        measure: args.measure,
        n: samples.len(),
        mean_diff: mean_difference(&samples),
        w: wilcoxon.w,
        p: wilcoxon.p,
        ci,
        wilcoxon,
    };
    write_output(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Serve(a) => cmd_serve(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Templates { out } => write_output(out.as_deref(), &templates_to_json(&template_library())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

