//! Command-line runner: execute a scenario under one or all update
//! strategies, compare them, scale out to many vehicle worlds, and inject
//! provider-loss or ownership-transfer experiments.
//!
//! Exit codes: 0 success, 1 scenario parse/validation failure, 2 internal
//! invariant violation, 64 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use twinmesh_core::{
    compute_metrics, load_scenario, run_with, save_logs, save_scenario, scale_run, Bpn,
    ComparisonReport, Error, EventKind, LifecycleEvent, RunOptions, Scenario, StrategyKind,
};

/// Per-world log dumps are skipped for scale runs larger than this.
const SCALE_LOG_CAP: usize = 8;

#[derive(Debug, Parser)]
#[command(
    name = "twinmesh",
    about = "Deterministic digital twin lifecycle simulator comparing update strategies",
    disable_help_subcommand = true
)]
struct Cli {
    /// Scenario file path, or "builtin" for the shipped vehicle lifecycle.
    #[arg(long, default_value = "builtin")]
    scenario: String,

    /// Update strategy: 1 (one twin), 2 (several twins), 3 (licensing and
    /// notification), or "all" for a comparison run.
    #[arg(long, default_value = "all")]
    approach: String,

    /// Seed override; defaults to the scenario's own seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for all artifacts (falls back to $TWINMESH_OUT).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Run this many independent vehicle worlds and report aggregates.
    #[arg(long)]
    scale: Option<usize>,

    /// Inject a provider loss, e.g. BPNL-REPAIR-CERT@95.
    #[arg(long, value_name = "BPN@TICK")]
    lose_provider: Option<String>,

    /// Inject an ownership transfer, e.g. battery-1=BPNL-REPAIR-INDIE@210.
    #[arg(long, value_name = "ASSET=BPN@TICK")]
    transfer_owner: Option<String>,

    /// Report format printed to stdout: text, csv, or json. All three are
    /// always written to the output directory.
    #[arg(long, default_value = "text")]
    format: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(64);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(64)
        }
        Err(CliError::Scenario(message)) => {
            eprintln!("scenario error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(message)) => {
            eprintln!("internal invariant violation: {message}");
            ExitCode::from(2)
        }
    }
}

enum CliError {
    Usage(String),
    Scenario(String),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvariantViolation(_) => CliError::Internal(e.to_string()),
            _ => CliError::Scenario(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Scenario(format!("io: {e}"))
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("TWINMESH_OUT").map(PathBuf::from))
        .ok_or_else(|| {
            CliError::Usage("no output directory: pass --out or set TWINMESH_OUT".into())
        })?;
    let strategies = parse_approaches(&cli.approach)?;
    if !matches!(cli.format.as_str(), "text" | "csv" | "json") {
        return Err(CliError::Usage(format!(
            "unknown format '{}', expected text, csv, or json",
            cli.format
        )));
    }

    let mut scenario = if cli.scenario == "builtin" {
        Scenario::builtin()
    } else {
        load_scenario(Path::new(&cli.scenario))?
    };
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    if let Some(spec) = &cli.lose_provider {
        let (bpn, tick) = parse_bpn_at_tick(spec)?;
        insert_overlay(
            &mut scenario,
            tick,
            bpn.clone(),
            EventKind::ProviderLoss {
                provider: bpn,
                transfer_to: None,
            },
        );
    }
    if let Some(spec) = &cli.transfer_owner {
        let (asset, rest) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected ASSET=BPN@TICK, got '{spec}'")))?;
        let (bpn, tick) = parse_bpn_at_tick(rest)?;
        insert_overlay(
            &mut scenario,
            tick,
            bpn.clone(),
            EventKind::OwnershipTransfer {
                asset: asset.to_string(),
                new_owner: bpn,
            },
        );
    }
    scenario.validate()?;
    std::fs::create_dir_all(&out_dir)?;
    save_scenario(&scenario, &out_dir.join("scenario.json"))?;

    if let Some(n) = cli.scale {
        if n == 0 {
            return Err(CliError::Usage("--scale needs at least one world".into()));
        }
        return run_scaled(&scenario, n, &strategies, &out_dir);
    }

    let mut all_metrics = Vec::new();
    for strategy in &strategies {
        let result = run_with(&scenario, *strategy, &RunOptions::default())?;
        let strategy_dir = out_dir.join(strategy.slug());
        save_logs(&result, &strategy_dir)?;
        let metrics = compute_metrics(&result)?;
        std::fs::write(
            strategy_dir.join("metrics.json"),
            serde_json::to_string_pretty(&metrics).expect("metrics serialize"),
        )?;
        all_metrics.push(metrics);
    }
    let report = ComparisonReport::new(&scenario.name, all_metrics);
    std::fs::write(out_dir.join("report.csv"), report.to_csv())?;
    std::fs::write(out_dir.join("report.txt"), report.to_text())?;
    std::fs::write(out_dir.join("report.json"), report.to_json())?;
    match cli.format.as_str() {
        "csv" => print!("{}", report.to_csv()),
        "json" => println!("{}", report.to_json()),
        _ => print!("{}", report.to_text()),
    }
    Ok(())
}

fn run_scaled(
    scenario: &Scenario,
    n: usize,
    strategies: &[StrategyKind],
    out_dir: &Path,
) -> Result<(), CliError> {
    for strategy in strategies {
        let metrics = scale_run(scenario, n, *strategy)?;
        let strategy_dir = out_dir.join(strategy.slug());
        std::fs::create_dir_all(&strategy_dir)?;
        std::fs::write(
            strategy_dir.join("scale_metrics.json"),
            serde_json::to_string_pretty(&metrics).expect("metrics serialize"),
        )?;
        if n <= SCALE_LOG_CAP {
            for i in 0..n {
                let mut world_scenario = scenario.clone();
                world_scenario.seed = scenario.seed.wrapping_add(i as u64);
                let result = run_with(&world_scenario, *strategy, &RunOptions::default())?;
                save_logs(&result, &strategy_dir.join(format!("world-{i:03}")))?;
            }
        }
        println!(
            "{}: {} worlds, {} messages/world, {} total, linear fit exact, {} ms",
            strategy.slug(),
            metrics.n_worlds,
            metrics.messages_per_world,
            metrics.total_messages,
            metrics.elapsed_ms
        );
    }
    Ok(())
}

fn parse_approaches(value: &str) -> Result<Vec<StrategyKind>, CliError> {
    match value {
        "1" => Ok(vec![StrategyKind::OneTwin]),
        "2" => Ok(vec![StrategyKind::SeveralTwins]),
        "3" => Ok(vec![StrategyKind::LicensingNotification]),
        "all" => Ok(StrategyKind::ALL.to_vec()),
        other => Err(CliError::Usage(format!(
            "unknown approach '{other}', expected 1, 2, 3, or all"
        ))),
    }
}

fn parse_bpn_at_tick(spec: &str) -> Result<(Bpn, u64), CliError> {
    let (bpn, tick) = spec
        .split_once('@')
        .ok_or_else(|| CliError::Usage(format!("expected BPN@TICK, got '{spec}'")))?;
    let tick: u64 = tick
        .parse()
        .map_err(|_| CliError::Usage(format!("tick '{tick}' is not an integer")))?;
    if bpn.is_empty() {
        return Err(CliError::Usage("empty business partner number".into()));
    }
    Ok((Bpn::new(bpn), tick))
}

/// Append an experiment overlay, keeping the timeline ordered.
fn insert_overlay(scenario: &mut Scenario, tick: u64, actor: Bpn, kind: EventKind) {
    let position = scenario
        .events
        .iter()
        .position(|e| e.at > tick)
        .unwrap_or(scenario.events.len());
    scenario.events.insert(
        position,
        LifecycleEvent {
            at: tick,
            actor,
            kind,
        },
    );
}
