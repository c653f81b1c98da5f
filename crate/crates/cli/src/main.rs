//! Operator entry point: validate scenarios, execute ground truth, run
//! agent sessions, replay stored records, and render reports.
//!
//! Exit codes: 0 success, 1 validation/evaluation failure, 2
//! usage/config error.

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cockpit_core::devices::builtin_registry;
use cockpit_core::harness::agents::{Agent, NullAgent};
use cockpit_core::harness::client::{EndpointConfig, HttpEndpointAgent};
use cockpit_core::harness::{oracle_agent, run_session, Mode, SessionConfig, Strategy};
use cockpit_core::metrics::{aggregate, MetricReport, TurnReport};
use cockpit_core::registry::Registry;
use cockpit_core::scenario::{
    execute_truth, parse_scenario, replay_record, save_record, validate_scenario, Scenario,
};
use cockpit_core::world::World;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

const EXIT_OK: i32 = 0;
const EXIT_FAILURE: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(name = "cockpit", about = "Intelligent-cockpit simulation and agent evaluation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Fc,
    Sfc,
    Hybrid,
}

impl From<ModeArg> for Mode {
    fn from(value: ModeArg) -> Self {
        match value {
            ModeArg::Fc => Mode::Fc,
            ModeArg::Sfc => Mode::Sfc,
            ModeArg::Hybrid => Mode::Hybrid,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    React,
    Reflect,
    Noexamples,
}

impl From<StrategyArg> for Strategy {
    fn from(value: StrategyArg) -> Self {
        match value {
            StrategyArg::React => Strategy::React,
            StrategyArg::Reflect => Strategy::ReactReflection,
            StrategyArg::Noexamples => Strategy::ReactNoExamples,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AgentArg {
    Oracle,
    Null,
    Endpoint,
}

#[derive(Args)]
struct DeviceFiles {
    /// Extra device definition files (JSON) registered on top of the
    /// builtin set.
    #[arg(long = "device-file", value_name = "FILE")]
    device_files: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate, and truth-execute scenario files.
    Validate {
        /// Scenario files or directories containing *.scn files.
        paths: Vec<PathBuf>,
        /// Store executed records for passing scenarios under this
        /// directory.
        #[arg(long, value_name = "DIR")]
        store: Option<PathBuf>,
        #[command(flatten)]
        devices: DeviceFiles,
    },
    /// Run agent evaluation sessions and write reports.
    Run {
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "endpoint")]
        agent: AgentArg,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// Irrelevant device states added to the agent-visible snapshot.
        #[arg(long)]
        distractors: Option<usize>,
        /// Worker threads running sessions in parallel.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        /// TOML config file (endpoint settings, defaults).
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        #[command(flatten)]
        devices: DeviceFiles,
    },
    /// List devices, or show one device's API documentation.
    Devices {
        /// Show the full API specs of this device.
        #[arg(long, value_name = "DEVICE")]
        api: Option<String>,
        #[command(flatten)]
        devices: DeviceFiles,
    },
    /// Re-execute stored scenario records and report drift.
    Replay {
        /// Directory of record directories (as written by `validate --store`).
        records: PathBuf,
        #[command(flatten)]
        devices: DeviceFiles,
    },
    /// Render the table view of a stored run report.
    Report {
        /// Run output directory or report.json path.
        target: PathBuf,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    mode: Option<String>,
    strategy: Option<String>,
    distractors: Option<usize>,
    jobs: Option<usize>,
    temperature: Option<f64>,
    max_turns_per_query: Option<usize>,
    reflection_budget: Option<usize>,
    retry_budget: Option<usize>,
    plan_first: Option<bool>,
    endpoint: Option<EndpointConfig>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn build_registry(files: &DeviceFiles) -> Result<Arc<Registry>> {
    let mut registry = builtin_registry();
    for path in &files.device_files {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read device file {}", path.display()))?;
        registry
            .register_json(&text)
            .with_context(|| format!("invalid device definition {}", path.display()))?;
    }
    Ok(Arc::new(registry))
}

/// Expand files and directories into a sorted scenario file list.
fn collect_scenarios(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            for entry in std::fs::read_dir(path)
                .with_context(|| format!("cannot read {}", path.display()))?
            {
                let entry = entry?.path();
                if entry.extension().is_some_and(|e| e == "scn") {
                    files.push(entry);
                }
            }
        } else if path.exists() {
            files.push(path.clone());
        } else {
            return Err(anyhow!("no such file or directory: {}", path.display()));
        }
    }
    files.sort();
    files.dedup();
    if files.is_empty() {
        return Err(anyhow!("no scenario files matched"));
    }
    Ok(files)
}

fn load_scenario(path: &Path, registry: &Registry) -> Result<(String, Scenario)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let scenario = parse_scenario(&text, Some(registry))
        .map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok((text, scenario))
}

fn cmd_validate(paths: &[PathBuf], store: Option<&Path>, files: &DeviceFiles) -> Result<i32> {
    let registry = build_registry(files).map_err(usage_error)?;
    let scenario_files = collect_scenarios(paths).map_err(usage_error)?;

    let mut failures = 0usize;
    for path in &scenario_files {
        let loaded = match load_scenario(path, &registry) {
            Ok(loaded) => loaded,
            Err(e) => {
                println!("FAIL  {}  ({e})", path.display());
                failures += 1;
                continue;
            }
        };
        let (text, scenario) = loaded;
        let mut world = World::new(registry.clone());
        let report = validate_scenario(&scenario, &mut world);
        if !report.passed() {
            println!(
                "FAIL  {}  (executable={}, state_changing={}, resolvable={}; {})",
                path.display(),
                report.executable,
                report.state_changing,
                report.resolvable,
                report.diagnostics.join("; ")
            );
            failures += 1;
            continue;
        }
        let mut world = World::new(registry.clone());
        match execute_truth(&scenario, &mut world) {
            Ok(record) => {
                println!(
                    "PASS  {}  ({} turns, {} devices)",
                    path.display(),
                    record.turn_count(),
                    record.relevant_devices.len()
                );
                if let Some(store) = store {
                    let dir = store.join(&scenario.id);
                    save_record(&record, &text, &dir)
                        .with_context(|| format!("storing record for {}", scenario.id))?;
                }
            }
            Err(e) => {
                println!("FAIL  {}  ({e})", path.display());
                failures += 1;
            }
        }
    }

    println!(
        "{} of {} scenario files passed",
        scenario_files.len() - failures,
        scenario_files.len()
    );
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn make_agent(
    kind: AgentArg,
    record: &cockpit_core::scenario::ScenarioRecord,
    mode: Mode,
    endpoint: Option<&EndpointConfig>,
) -> Result<Box<dyn Agent>> {
    match kind {
        AgentArg::Oracle => Ok(Box::new(oracle_agent(record, mode))),
        AgentArg::Null => Ok(Box::new(NullAgent)),
        AgentArg::Endpoint => {
            let config = endpoint
                .cloned()
                .ok_or_else(|| anyhow!("--agent endpoint requires an [endpoint] section in --config"))?;
            Ok(Box::new(
                HttpEndpointAgent::new(config).map_err(|e| anyhow!(e.to_string()))?,
            ))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    paths: &[PathBuf],
    agent: AgentArg,
    mode: Option<ModeArg>,
    strategy: Option<StrategyArg>,
    distractors: Option<usize>,
    jobs: Option<usize>,
    out: &Path,
    config_path: Option<&Path>,
    files: &DeviceFiles,
) -> Result<i32> {
    let config = load_config(config_path).map_err(usage_error)?;
    let registry = build_registry(files).map_err(usage_error)?;
    let scenario_files = collect_scenarios(paths).map_err(usage_error)?;

    let mode: Mode = match (mode, config.mode.as_deref()) {
        (Some(flag), _) => flag.into(),
        (None, Some("fc")) => Mode::Fc,
        (None, Some("sfc")) => Mode::Sfc,
        (None, Some("hybrid")) => Mode::Hybrid,
        (None, Some(other)) => return Err(usage_error(anyhow!("unknown mode `{other}` in config"))),
        (None, None) => Mode::Fc,
    };
    let strategy: Strategy = match (strategy, config.strategy.as_deref()) {
        (Some(flag), _) => flag.into(),
        (None, Some("react")) => Strategy::React,
        (None, Some("reflect")) => Strategy::ReactReflection,
        (None, Some("noexamples")) => Strategy::ReactNoExamples,
        (None, Some(other)) => {
            return Err(usage_error(anyhow!("unknown strategy `{other}` in config")))
        }
        (None, None) => Strategy::React,
    };

    let mut session_config = SessionConfig::new(mode);
    session_config.strategy = strategy;
    if let Some(t) = config.temperature {
        session_config.temperature = t;
    }
    if let Some(n) = config.max_turns_per_query {
        session_config.max_turns_per_query = n;
    }
    if let Some(n) = config.reflection_budget {
        session_config.reflection_budget = n;
    }
    if let Some(n) = config.retry_budget {
        session_config.retry_budget = n;
    }
    if let Some(p) = config.plan_first {
        session_config.plan_first = p;
    }
    session_config.distractor_count = distractors.or(config.distractors).unwrap_or(0);
    session_config
        .validate()
        .map_err(|e| usage_error(anyhow!(e.to_string())))?;

    let mut endpoint = config.endpoint;
    if let Some(endpoint) = endpoint.as_mut() {
        endpoint.temperature = session_config.temperature;
    }
    if agent == AgentArg::Endpoint {
        // Fail fast on missing endpoint config or credentials.
        let Some(cfg) = &endpoint else {
            return Err(usage_error(anyhow!(
                "--agent endpoint requires an [endpoint] section in --config"
            )));
        };
        HttpEndpointAgent::new(cfg.clone()).map_err(|e| usage_error(anyhow!(e.to_string())))?;
    }

    // Truth-execute everything upfront; sessions then run in parallel.
    let mut records = Vec::new();
    for path in &scenario_files {
        let (_, scenario) = load_scenario(path, &registry)?;
        let mut world = World::new(registry.clone());
        let record = execute_truth(&scenario, &mut world)
            .map_err(|e| anyhow!("{}: {e}", path.display()))?;
        records.push(record);
    }

    std::fs::create_dir_all(out.join("scenarios"))?;
    std::fs::create_dir_all(out.join("transcripts"))?;

    let worker_count = jobs.or(config.jobs).unwrap_or(1).max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Mutex<Vec<(String, MetricReport, String)>> = Mutex::new(Vec::new());
    let errors: Mutex<Vec<String>> = Mutex::new(Vec::new());

    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let Some(record) = records.get(index) else {
                    break;
                };
                let outcome = make_agent(agent, record, mode, endpoint.as_ref())
                    .map_err(|e| e.to_string())
                    .and_then(|mut boxed| {
                        run_session(record, boxed.as_mut(), &session_config, &registry)
                            .map_err(|e| e.to_string())
                    });
                match outcome {
                    Ok(outcome) => results.lock().unwrap().push((
                        record.scenario.id.clone(),
                        outcome.report,
                        outcome.transcript.to_text(),
                    )),
                    Err(e) => errors
                        .lock()
                        .unwrap()
                        .push(format!("{}: {e}", record.scenario.id)),
                }
            });
        }
    });

    let errors = errors.into_inner().unwrap();
    for error in &errors {
        eprintln!("session failed: {error}");
    }

    let mut results = results.into_inner().unwrap();
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut all_turns: Vec<TurnReport> = Vec::new();
    for (id, report, transcript) in &results {
        std::fs::write(out.join("scenarios").join(format!("{id}.json")), report.to_json())?;
        std::fs::write(out.join("transcripts").join(format!("{id}.txt")), transcript)?;
        all_turns.extend(report.per_turn.iter().cloned());
    }
    if all_turns.is_empty() {
        return Err(anyhow!("no sessions produced reports"));
    }
    let aggregate_report = aggregate(all_turns)?;
    std::fs::write(out.join("report.json"), aggregate_report.to_json())?;
    std::fs::write(out.join("report.txt"), aggregate_report.to_table())?;
    print!("{}", aggregate_report.to_table());

    Ok(if errors.is_empty() { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_devices(api: Option<&str>, files: &DeviceFiles) -> Result<i32> {
    let registry = build_registry(files).map_err(usage_error)?;
    match api {
        None => {
            for (device_id, description) in registry.search_module() {
                println!("{device_id:16} {description}");
            }
            Ok(EXIT_OK)
        }
        Some(device_id) => match registry.search_api(device_id) {
            Ok(specs) => {
                println!("{} APIs for {device_id}:\n", specs.len());
                for spec in specs {
                    println!("{}", spec.render());
                }
                Ok(EXIT_OK)
            }
            Err(e) => Err(usage_error(anyhow!(e.to_string()))),
        },
    }
}

fn cmd_replay(records: &Path, files: &DeviceFiles) -> Result<i32> {
    let registry = build_registry(files).map_err(usage_error)?;
    if !records.is_dir() {
        return Err(usage_error(anyhow!(
            "{} is not a directory of records",
            records.display()
        )));
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(records)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("manifest.json").exists())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(usage_error(anyhow!(
            "no records found under {}",
            records.display()
        )));
    }

    let mut drifted = 0usize;
    for dir in &dirs {
        match replay_record(dir, &registry) {
            Ok(drift) if drift.is_empty() => println!("OK    {}", dir.display()),
            Ok(drift) => {
                drifted += 1;
                println!("DRIFT {}", dir.display());
                for line in drift {
                    println!("      {line}");
                }
            }
            Err(e) => {
                drifted += 1;
                println!("FAIL  {}  ({e})", dir.display());
            }
        }
    }
    println!("{} of {} records replay cleanly", dirs.len() - drifted, dirs.len());
    Ok(if drifted == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_report(target: &Path) -> Result<i32> {
    let path = if target.is_dir() {
        target.join("report.json")
    } else {
        target.to_path_buf()
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| usage_error(anyhow!("cannot read {}: {e}", path.display())))?;
    let report: MetricReport = serde_json::from_str(&text)
        .map_err(|e| usage_error(anyhow!("{} is not a report: {e}", path.display())))?;
    print!("{}", report.to_table());
    Ok(EXIT_OK)
}

/// Tag an error as a usage/config problem (exit 2).
fn usage_error(e: anyhow::Error) -> anyhow::Error {
    e.context("usage")
}

fn exit_code_for(e: &anyhow::Error) -> i32 {
    if e.chain().any(|cause| cause.to_string() == "usage") {
        EXIT_USAGE
    } else {
        EXIT_FAILURE
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate {
            paths,
            store,
            devices,
        } => cmd_validate(paths, store.as_deref(), devices),
        Command::Run {
            paths,
            agent,
            mode,
            strategy,
            distractors,
            jobs,
            out,
            config,
            devices,
        } => cmd_run(
            paths,
            *agent,
            *mode,
            *strategy,
            *distractors,
            *jobs,
            out,
            config.as_deref(),
            devices,
        ),
        Command::Devices { api, devices } => cmd_devices(api.as_deref(), devices),
        Command::Replay { records, devices } => cmd_replay(records, devices),
        Command::Report { target } => cmd_report(target),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            let code = exit_code_for(&e);
            // Drop the internal "usage" marker from the rendered chain.
            let rendered: Vec<String> = e
                .chain()
                .map(|c| c.to_string())
                .filter(|c| c != "usage")
                .collect();
            eprintln!("error: {}", rendered.join(": "));
            std::process::exit(code);
        }
    }
}
