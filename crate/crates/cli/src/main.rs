//! `objcat`: run scenarios, sweep parameters, sort cards and serve the teaching API.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O), 2 invalid configuration or usage,
//! 3 card sorting not completed within the cap.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use objcat::harness::{
    default_delta_aw_grid, default_theta_mc_grid, linspace, run_example, run_wcst, sweep, wcst_default_parameters,
    write_event_log, PresentationOrder, RuleChange, ScenarioConfig, ScenarioKind, WcstConfig, WcstStats,
    DEFAULT_MAX_STEPS, DEFAULT_WCST_CAP,
};
use objcat::knowledge::{EventRecord, FitOrder, OrderedWeights, Parameters};
use objcat::scenarios::{example_schema, Variant};
use serde::Serialize;

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;

#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl From<objcat::Error> for CliError {
    fn from(e: objcat::Error) -> Self {
        match e {
            objcat::Error::Io { .. } | objcat::Error::Csv(_) => CliError::Runtime(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "objcat", version, about = "Object category learning harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and print its result as JSON.
    Run(RunArgs),
    /// Run the example scenario over a (theta_mc, delta_aw) grid.
    Sweep(SweepArgs),
    /// Run the card sorting test.
    Wcst(WcstArgs),
    /// Start the HTTP teaching service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Example,
    Wcst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Exact,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FitOrderArg {
    Oldest,
    Newest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    RoundRobin,
    Shuffled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    Csv,
    #[default]
    Jsonl,
}

#[derive(Debug, Clone, Args)]
struct ConfigArgs {
    /// JSON scenario config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    theta_mc: Option<f64>,
    #[arg(long)]
    theta_mf: Option<f64>,
    #[arg(long)]
    delta_aw: Option<f64>,
    #[arg(long)]
    rho_ra: Option<f64>,
    /// Which fitting category wins when several fit.
    #[arg(long, value_enum)]
    fit_order: Option<FitOrderArg>,
    /// Presentation order of the example objects.
    #[arg(long, value_enum)]
    order: Option<OrderArg>,
    /// Steps per run; for card sorting, the presentation cap.
    #[arg(long, alias = "cap")]
    max_steps: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Event log destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Final graph document destination.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// theta_mc values: `start:end:count` or a comma list. Default 0 to M+1 in 15 steps.
    #[arg(long, allow_hyphen_values = true)]
    theta_mc_grid: Option<String>,
    /// delta_aw values: `start:end:count` or a comma list. Default 0 to 0.5 in 10 steps.
    #[arg(long)]
    delta_aw_grid: Option<String>,
    /// Grid destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct WcstArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Number of consecutive seeds to run, starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    /// Per-presentation weight log destination (single run only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Final graph document destination (single run only).
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory with the built teaching UI, served for non-API paths.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn base(&self) -> CliResult<(ScenarioConfig, bool)> {
        match &self.config {
            Some(path) => Ok((
                ScenarioConfig::load(path).map_err(|e| CliError::Config(e.to_string()))?,
                true,
            )),
            None => Ok((ScenarioConfig::default(), false)),
        }
    }

    fn apply(&self, params: &mut Parameters) {
        if let Some(v) = self.theta_mc {
            params.theta_mc = v;
        }
        if let Some(v) = self.theta_mf {
            params.theta_mf = v;
        }
        if let Some(v) = self.delta_aw {
            params.delta_aw = v;
        }
        if let Some(v) = self.rho_ra {
            params.rho_ra = v;
        }
        if let Some(v) = self.fit_order {
            params.fit_order = match v {
                FitOrderArg::Oldest => FitOrder::Oldest,
                FitOrderArg::Newest => FitOrder::Newest,
            };
        }
    }

    fn scenario_config(&self) -> CliResult<ScenarioConfig> {
        let (mut config, _) = self.base()?;
        if let Some(s) = self.scenario {
            config.scenario = match s {
                ScenarioArg::Example => ScenarioKind::Example,
                ScenarioArg::Wcst => ScenarioKind::Wcst,
            };
        }
        if let Some(v) = self.variant {
            config.variant = match v {
                VariantArg::Exact => Variant::Exact,
                VariantArg::Noisy => Variant::Noisy,
            };
        }
        if let Some(o) = self.order {
            config.order = match o {
                OrderArg::RoundRobin => PresentationOrder::RoundRobin,
                OrderArg::Shuffled => PresentationOrder::Shuffled,
            };
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(n) = self.max_steps {
            config.max_steps = n;
        }
        self.apply(&mut config.parameters);
        config.validate()?;
        Ok(config)
    }

    fn wcst_config(&self) -> CliResult<WcstConfig> {
        let (file, from_file) = self.base()?;
        if from_file && file.scenario != ScenarioKind::Wcst {
            return Err(CliError::Config("config file is not a wcst scenario".into()));
        }
        if self.scenario == Some(ScenarioArg::Example) {
            return Err(CliError::Config("`wcst` runs the wcst scenario only".into()));
        }
        if self.variant.is_some() || self.order.is_some() {
            return Err(CliError::Config(
                "--variant and --order apply to the example scenario".into(),
            ));
        }
        let mut parameters = if from_file {
            file.parameters
        } else {
            wcst_default_parameters()
        };
        self.apply(&mut parameters);
        parameters.validate()?;
        let cap = match (self.max_steps, from_file) {
            (Some(n), _) => n,
            (None, true) if file.max_steps != DEFAULT_MAX_STEPS => file.max_steps,
            _ => DEFAULT_WCST_CAP,
        };
        Ok(WcstConfig {
            seed: self.seed.unwrap_or(file.seed),
            cap,
            parameters,
        })
    }
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("invalid grid `{spec}`: use start:end:count or a comma list"));
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, end, n] = parts.as_slice() else {
            return Err(bad());
        };
        let start: f64 = start.trim().parse().map_err(|_| bad())?;
        let end: f64 = end.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        linspace(start, end, n)
    } else {
        spec.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<CliResult<Vec<f64>>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

fn create(path: &Path) -> CliResult<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn flush(mut w: impl Write, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| io_error(path, e))
}

fn print_line(text: &str) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}")
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::Runtime(format!("stdout: {e}")))
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    print_line(&serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?)
}

fn join_merges(event: &EventRecord) -> String {
    event
        .merges
        .iter()
        .map(|m| format!("{}+{}>{}", m.from[0].0, m.from[1].0, m.into.0))
        .collect::<Vec<_>>()
        .join(";")
}

fn join_splits(event: &EventRecord) -> String {
    event
        .splits
        .iter()
        .map(|s| format!("{}>{}", s.from.0, s.into.0))
        .collect::<Vec<_>>()
        .join(";")
}

fn write_events_csv<W: Write>(out: W, events: &[EventRecord]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Runtime(e.to_string());
    let weight_names: Vec<String> = events
        .first()
        .map(|e| e.weights_after.0.iter().map(|(n, _)| format!("w_{n}")).collect())
        .unwrap_or_default();
    let mut header: Vec<String> = [
        "step",
        "percept_id",
        "category_id",
        "action",
        "reward",
        "merges",
        "splits",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(weight_names);
    w.write_record(&header).map_err(csv_err)?;
    for e in events {
        let mut row = vec![
            e.step.to_string(),
            e.percept_id.clone(),
            e.category_id.0.to_string(),
            e.action.clone(),
            e.reward.to_string(),
            join_merges(e),
            join_splits(e),
        ];
        row.extend(e.weights_after.0.iter().map(|(_, v)| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

fn write_events(path: &Path, events: &[EventRecord], format: Format) -> CliResult<()> {
    let mut out = create(path)?;
    match format {
        Format::Jsonl => write_event_log(&mut out, events)?,
        Format::Csv => write_events_csv(&mut out, events)?,
    }
    flush(out, path)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct WeightLine<'a> {
    presentation: usize,
    weights: &'a OrderedWeights,
}

fn write_weight_log(path: &Path, weights: &[OrderedWeights], format: Format) -> CliResult<()> {
    let mut out = create(path)?;
    match format {
        Format::Jsonl => {
            for (i, w) in weights.iter().enumerate() {
                let line = serde_json::to_string(&WeightLine {
                    presentation: i + 1,
                    weights: w,
                })
                .map_err(|e| CliError::Runtime(e.to_string()))?;
                writeln!(out, "{line}").map_err(|e| io_error(path, e))?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            let csv_err = |e: csv::Error| CliError::Runtime(e.to_string());
            if let Some(first) = weights.first() {
                let mut header = vec!["presentation".to_string()];
                header.extend(first.0.iter().map(|(n, _)| format!("w_{n}")));
                w.write_record(&header).map_err(csv_err)?;
            }
            for (i, ws) in weights.iter().enumerate() {
                let mut row = vec![(i + 1).to_string()];
                row.extend(ws.0.iter().map(|(_, v)| v.to_string()));
                w.write_record(&row).map_err(csv_err)?;
            }
            w.flush().map_err(|e| io_error(path, e))?;
        }
    }
    flush(out, path)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct WcstSummary<'a> {
    completed: bool,
    cards_presented: u64,
    completed_runs: u32,
    rule_changes: &'a [RuleChange],
    rule_weight_max_fraction: Option<f64>,
    final_category_count: usize,
    seed: u64,
    parameters: &'a Parameters,
}

impl<'a> WcstSummary<'a> {
    fn of(stats: &'a WcstStats) -> Self {
        let n = stats.rule_changes.len();
        let hits = stats.rule_changes.iter().filter(|c| c.rule_weight_is_max()).count();
        Self {
            completed: stats.completed,
            cards_presented: stats.cards_presented,
            completed_runs: stats.completed_runs,
            rule_changes: &stats.rule_changes,
            rule_weight_max_fraction: (n > 0).then(|| hits as f64 / n as f64),
            final_category_count: stats.final_category_count,
            seed: stats.seed,
            parameters: &stats.parameters,
        }
    }
}

fn cmd_run(args: RunArgs) -> CliResult<u8> {
    let config = args.config.scenario_config()?;
    if config.scenario == ScenarioKind::Wcst {
        let wcst = WcstArgs {
            config: args.config,
            runs: 1,
            out: args.out,
            graph_out: args.graph_out,
            format: args.format,
        };
        return cmd_wcst(wcst);
    }
    let run = run_example(&config)?;
    let mut result = run.result;
    if let Some(path) = &args.out {
        write_events(path, &run.events, args.format)?;
        result.event_log_path = Some(path.clone());
    }
    if let Some(path) = &args.graph_out {
        run.graph.save(path)?;
    }
    print_json(&result)?;
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> CliResult<u8> {
    let config = args.config.scenario_config()?;
    if config.scenario != ScenarioKind::Example {
        return Err(CliError::Config("sweeps run the example scenario".into()));
    }
    let theta = match &args.theta_mc_grid {
        Some(spec) => parse_grid(spec)?,
        None => default_theta_mc_grid(example_schema().len()),
    };
    let delta = match &args.delta_aw_grid {
        Some(spec) => parse_grid(spec)?,
        None => default_delta_aw_grid(),
    };
    let result = sweep(&config, &theta, &delta)?;
    match &args.out {
        Some(path) => {
            let mut out = create(path)?;
            match args.format {
                Format::Csv => result.write_csv(&mut out)?,
                Format::Jsonl => result.write_jsonl(&mut out)?,
            }
            flush(out, path)?;
        }
        None => {
            let mut lock = std::io::stdout().lock();
            match args.format {
                Format::Csv => result.write_csv(&mut lock)?,
                Format::Jsonl => result.write_jsonl(&mut lock)?,
            }
        }
    }
    let successes = result.cells.iter().filter(|c| c.result.succeeded()).count();
    eprintln!(
        "{successes}/{} cells reached the desired partition; largest region {} cells",
        result.cells.len(),
        result.largest_success_region()
    );
    Ok(0)
}

fn cmd_wcst(args: WcstArgs) -> CliResult<u8> {
    let config = args.config.wcst_config()?;
    if args.runs == 0 {
        return Err(CliError::Config("--runs must be at least 1".into()));
    }
    if args.runs > 1 && (args.out.is_some() || args.graph_out.is_some()) {
        return Err(CliError::Config("--out and --graph-out need a single run".into()));
    }
    let mut completed = 0;
    for i in 0..args.runs {
        let run = run_wcst(&WcstConfig {
            seed: config.seed.wrapping_add(i),
            ..config.clone()
        })?;
        if let Some(path) = &args.out {
            write_weight_log(path, &run.stats.per_step_weights, args.format)?;
        }
        if let Some(path) = &args.graph_out {
            run.graph.save(path)?;
        }
        let summary = WcstSummary::of(&run.stats);
        if args.runs == 1 {
            print_json(&summary)?;
        } else {
            print_line(&serde_json::to_string(&summary).map_err(|e| CliError::Runtime(e.to_string()))?)?;
        }
        completed += u64::from(run.stats.completed);
    }
    if args.runs > 1 {
        eprintln!("{completed}/{} runs completed the test", args.runs);
    }
    Ok(if completed == args.runs { 0 } else { EXIT_INCOMPLETE })
}

fn cmd_serve(args: ServeArgs) -> CliResult<u8> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    let config = objcat_service::ServiceConfig {
        static_dir: args.static_dir,
    };
    eprintln!("listening on http://{}", args.addr);
    runtime
        .block_on(objcat_service::serve(args.addr, config))
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.addr)))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Wcst(a) => cmd_wcst(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
