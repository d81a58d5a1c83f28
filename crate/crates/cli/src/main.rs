use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stationsim_core::agents::{LlmEndpoint, LlmPlanner, PlannerBackend};
use stationsim_core::bench::{render_report, run_skill_suite, run_task_suite, BenchReport, ReportFormat, SkillBenchConfig};
use stationsim_core::cog::{run_episode, Episode, EpisodeConfig, EpisodeResult, ExecutionMode, HumanMode, MessageLog, NodeState};
use stationsim_core::gateway::{Gateway, GatewayError, GatewayOptions};
use stationsim_core::robots::RobotKind;
use stationsim_core::scenario::{builtin_scenario, load_scenario, ScenarioConfig, ScenarioError};

#[derive(Parser)]
#[command(name = "stationsim", version, about = "Microgravity station simulator with human/multi-robot collaboration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode headless and report the outcome.
    Run(RunArgs),
    /// Run the skill matrix or the long-horizon task suite.
    Bench(BenchArgs),
    /// Serve one episode over the gateway for a live human client.
    Serve(ServeArgs),
    /// Check a scenario file and exit.
    Validate {
        #[arg(long)]
        scenario: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlannerChoice {
    Rule,
    Llm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeChoice {
    Inline,
    Threaded,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario file, or the name of a built-in scenario.
    #[arg(long)]
    scenario: String,
    /// Instance seed; defaults to the scenario's own seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "rule")]
    planner: PlannerChoice,
    /// OpenAI-compatible base URL, e.g. http://localhost:8000/v1.
    #[arg(long)]
    llm_endpoint: Option<String>,
    #[arg(long, default_value = "default")]
    llm_model: String,
    /// Only print the final summary line.
    #[arg(long)]
    headless: bool,
    #[arg(long, value_enum, default_value = "inline")]
    mode: ModeChoice,
    /// Write a JSON episode report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the JSON-lines episode log here.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteChoice {
    Skills,
    Tasks,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindChoice {
    Dexterous,
    Rail,
    Flyer,
}

impl KindChoice {
    fn kind(self) -> RobotKind {
        match self {
            KindChoice::Dexterous => RobotKind::Dexterous,
            KindChoice::Rail => RobotKind::RailType,
            KindChoice::Flyer => RobotKind::FreeFlying,
        }
    }
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    suite: SuiteChoice,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Report path; the extension picks the format (.json, .csv, else text).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Robot kinds for the skill suite.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dexterous")]
    kinds: Vec<KindChoice>,
    /// Skill ranges override (JSON) for the skill suite.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenarios for the task suite; defaults to both built-ins.
    #[arg(long)]
    scenario: Vec<String>,
}

#[derive(clap::Args)]
struct ServeArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 8765)]
    port: u16,
    #[arg(long)]
    seed: Option<u64>,
    /// Drive the human avatar with the scripted controllers instead of a client.
    #[arg(long)]
    scripted_human: bool,
    /// Step as fast as possible instead of at wall-clock speed.
    #[arg(long)]
    no_pacing: bool,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    log: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Episode(String),
    Config(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Config(e.into())
    }
}

/// A path that exists, or a built-in name with or without `.json`.
fn resolve_scenario(arg: &str) -> Result<ScenarioConfig, ScenarioError> {
    let path = Path::new(arg);
    if path.exists() {
        return load_scenario(path);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    match builtin_scenario(stem) {
        Some(text) if path.parent().is_none_or(|p| p.as_os_str().is_empty()) => ScenarioConfig::from_json(text),
        _ => load_scenario(path),
    }
}

#[derive(Serialize)]
struct NodeSummary<'a> {
    id: &'a str,
    state: NodeState,
}

#[derive(Serialize)]
struct EpisodeReport<'a> {
    scenario: &'a str,
    seed: u64,
    planner: &'a str,
    interactive: bool,
    success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
    ticks: u64,
    messages: usize,
    nodes: Vec<NodeSummary<'a>>,
}

fn write_outputs(
    scenario: &ScenarioConfig,
    seed: u64,
    planner: &str,
    interactive: bool,
    result: &EpisodeResult,
    report: Option<&Path>,
    log: Option<&Path>,
) -> Result<()> {
    if let Some(path) = log {
        fs::write(path, result.log.to_jsonl()).with_context(|| format!("writing log {}", path.display()))?;
    }
    if let Some(path) = report {
        let r = EpisodeReport {
            scenario: &scenario.name,
            seed,
            planner,
            interactive,
            success: result.success,
            reason: result.reason.as_deref(),
            ticks: result.ticks,
            messages: result.log.len(),
            nodes: result.node_states.iter().map(|(id, state)| NodeSummary { id, state: *state }).collect(),
        };
        let text = serde_json::to_string_pretty(&r)? + "\n";
        fs::write(path, text).with_context(|| format!("writing report {}", path.display()))?;
    }
    Ok(())
}

fn print_log(log: &MessageLog) {
    for m in log.messages() {
        println!("[{:>6}] {:<10} {}", m.tick, m.sender, serde_json::to_string(&m.kind).unwrap_or_default());
    }
}

fn summary(name: &str, seed: u64, result: &EpisodeResult) -> Result<(), Failure> {
    let status = if result.success { "success" } else { "failure" };
    let reason = result.reason.as_deref().map(|r| format!(" ({r})")).unwrap_or_default();
    println!("{name} seed {seed}: {status} after {} ticks{reason}", result.ticks);
    if result.success {
        Ok(())
    } else {
        Err(Failure::Episode(result.reason.clone().unwrap_or_else(|| "episode failed".into())))
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let backend: Option<Box<dyn PlannerBackend>> = match args.planner {
        PlannerChoice::Rule => None,
        PlannerChoice::Llm => {
            let url = args.llm_endpoint.clone().ok_or_else(|| anyhow!("--planner llm requires --llm-endpoint <URL>"))?;
            Some(Box::new(LlmPlanner::new(LlmEndpoint::new(url, args.llm_model.clone()))))
        }
    };
    let scenario = resolve_scenario(&args.scenario)?;
    let seed = args.seed.unwrap_or(scenario.seed);
    let inst = scenario.instantiate(seed)?;
    let graph = scenario
        .plan_graph(&inst, backend.as_deref())
        .map_err(|e| Failure::Episode(format!("planning failed: {e}")))?;
    let mode = match args.mode {
        ModeChoice::Inline => ExecutionMode::Inline,
        ModeChoice::Threaded => ExecutionMode::Threaded,
    };
    let config = EpisodeConfig { timeout: scenario.episode_timeout, mode, ..EpisodeConfig::default() };
    let result = run_episode(inst.world, graph, &inst.roster, config).map_err(|e| anyhow!(e))?;
    if !args.headless {
        print_log(&result.log);
    }
    let planner = match args.planner {
        PlannerChoice::Rule => "rule",
        PlannerChoice::Llm => "llm",
    };
    write_outputs(&scenario, seed, planner, false, &result, args.report.as_deref(), args.log.as_deref())?;
    summary(scenario.display_name(), seed, &result)
}

fn emit(report: &BenchReport, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, render_report(report, ReportFormat::from_path(path)))
                .with_context(|| format!("writing report {}", path.display()))?;
            println!("{}", render_report(report, ReportFormat::Text).trim_end());
            println!("report written to {}", path.display());
        }
        None => print!("{}", render_report(report, ReportFormat::Text)),
    }
    Ok(())
}

/// Directory next to the report holding one log per episode.
fn logs_dir(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
    out.with_file_name(format!("{stem}_logs"))
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    match args.suite {
        SuiteChoice::Skills => {
            let cfg = match &args.config {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    SkillBenchConfig::from_json(&text).with_context(|| format!("parsing {}", p.display()))?
                }
                None => SkillBenchConfig::shipped(),
            };
            let kinds: Vec<RobotKind> = args.kinds.iter().map(|k| k.kind()).collect();
            let report = run_skill_suite(&cfg, &kinds, args.trials, args.seed);
            emit(&report, args.out.as_deref())?;
        }
        SuiteChoice::Tasks => {
            let names = if args.scenario.is_empty() {
                vec!["rearrangement".to_string(), "relay".to_string()]
            } else {
                args.scenario.clone()
            };
            let scenarios = names.iter().map(|n| resolve_scenario(n)).collect::<Result<Vec<_>, _>>()?;
            let (report, episodes) = run_task_suite(&scenarios, args.trials, args.seed);
            if let Some(out) = &args.out {
                let dir = logs_dir(out);
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                for e in &episodes {
                    let path = dir.join(format!("{}_{}.jsonl", e.scenario, e.seed));
                    fs::write(&path, e.log.to_jsonl()).with_context(|| format!("writing {}", path.display()))?;
                }
            }
            emit(&report, args.out.as_deref())?;
        }
    }
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<(), Failure> {
    let scenario = resolve_scenario(&args.scenario)?;
    let seed = args.seed.unwrap_or(scenario.seed);
    let inst = scenario.instantiate(seed)?;
    let graph = scenario.plan_graph(&inst, None).map_err(|e| Failure::Episode(format!("planning failed: {e}")))?;
    let human = if args.scripted_human { HumanMode::Scripted } else { HumanMode::Remote };
    let config = EpisodeConfig { timeout: scenario.episode_timeout, human, ..EpisodeConfig::default() };
    let episode = Episode::new(inst.world, graph, &inst.roster, config).map_err(|e| anyhow!(e))?;
    let gateway = Gateway::bind(args.port).map_err(|e| match e {
        GatewayError::PortInUse(p) => anyhow!("port {p} is already in use"),
        other => anyhow!(other),
    })?;
    eprintln!("serving {} on 127.0.0.1:{}", scenario.display_name(), gateway.port());
    let opts = GatewayOptions { realtime: !args.no_pacing, ..GatewayOptions::default() };
    let result = gateway.serve(episode, &opts).map_err(|e| anyhow!(e))?;
    write_outputs(&scenario, seed, "rule", !args.scripted_human, &result, args.report.as_deref(), args.log.as_deref())?;
    summary(scenario.display_name(), seed, &result)
}

fn cmd_validate(scenario: &str) -> Result<(), Failure> {
    let cfg = resolve_scenario(scenario)?;
    let inst = cfg.instantiate(cfg.seed)?;
    let graph = cfg.plan_graph(&inst, None).map_err(|e| anyhow!("scenario does not plan: {e}"))?;
    println!(
        "{}: ok ({} bodies, {} executors, {} plan nodes)",
        cfg.display_name(),
        inst.world.bodies().len(),
        inst.roster.len(),
        graph.nodes.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Serve(a) => cmd_serve(a),
        Command::Validate { scenario } => cmd_validate(&scenario),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Episode(reason)) => {
            log::info!("episode failed: {reason}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
