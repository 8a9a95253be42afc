//! Command-line front end: run scenarios, verify graph identities, and
//! re-summarize trajectory CSV files.
//!
//! Exit codes: 0 success; 1 a verification check failed; 2 usage error;
//! 3 invalid scenario, graph, or data; 4 I/O error; 5 simulation aborted.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use edge_consensus::scenario::{
    bundled_scenario, load_scenario, parse_scenario_text, summary_json, OutputFormat,
    ScenarioDocument, ScenarioError, BUNDLED_SCENARIO_NAMES,
};
use edge_consensus::sim::{
    consensus_metrics, run, steady_state_max_edge_norm, to_csv, InitialSpec, Scenario,
    SimError, SimResult,
};
use edge_consensus::{report::verify_graph, Digraph};

const EXIT_OK: i32 = 0;
const EXIT_VERIFY_FAILED: i32 = 1;
const EXIT_VALIDATION: i32 = 3;
const EXIT_IO: i32 = 4;
const EXIT_ABORT: i32 = 5;

/// Disparity threshold behind the reported convergence time.
const CONVERGENCE_THRESHOLD: f64 = 0.05;

#[derive(Parser)]
#[command(
    name = "edge-consensus",
    version,
    about = "Edge-Laplacian consensus: simulate, verify, and summarize",
    after_help = "Exit codes: 0 ok, 1 verification failed, 2 usage, \
                  3 invalid input, 4 I/O error, 5 run aborted."
)]
struct Cli {
    /// Suppress informational output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write the trajectory or summary.
    Run(RunArgs),
    /// Recompute the structural identities of a digraph and grade them.
    Verify(VerifyArgs),
    /// Recompute consensus metrics from an existing trajectory CSV.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    /// Full trajectory as CSV.
    Csv,
    /// Structured summary as JSON.
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file path, or a bundled name (strong_6agent, quasi_6agent).
    scenario: String,
    /// Override the noise seed and any random initial-state seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Fan out this many runs with consecutive seeds across threads.
    #[arg(long, value_name = "K", value_parser = clap::value_parser!(u64).range(1..))]
    seeds: Option<u64>,
    /// Override the integrator step.
    #[arg(long)]
    dt: Option<f64>,
    /// Override the final time.
    #[arg(long)]
    t_final: Option<f64>,
    /// Output content: csv trajectory or json summary.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output path; multi-seed runs insert -seed<N> before the extension.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Graph text file: header "N L", then one "initial terminal" per line.
    graph: PathBuf,
    /// Force this spanning tree (comma-separated edge ids).
    #[arg(long, value_delimiter = ',')]
    tree: Option<Vec<usize>>,
}

#[derive(Args)]
struct ReportArgs {
    /// Trajectory CSV produced by run.
    csv: PathBuf,
    /// Summary format: json, or csv for a one-line key,value listing.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run_command(args, cli.quiet),
        Command::Verify(args) => verify_command(args, cli.quiet),
        Command::Report(args) => report_command(args, cli.quiet),
    };
    std::process::exit(code);
}

fn scenario_exit_code(err: &ScenarioError) -> i32 {
    match err {
        ScenarioError::Io { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn set_seed(scenario: &mut Scenario<f64>, seed: u64) {
    scenario.noise.seed = seed;
    if let InitialSpec::RandomBox { seed: s, .. } = &mut scenario.initial {
        *s = seed;
    }
}

/// Inserts `-seed<N>` before the extension for multi-seed output files.
fn seeded_path(path: &Path, seed: u64) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}-seed{seed}{ext}"))
}

fn load_document(spec: &str) -> Result<ScenarioDocument, ScenarioError> {
    let path = Path::new(spec);
    if path.exists() {
        return load_scenario(path);
    }
    match bundled_scenario(spec) {
        Some(text) => parse_scenario_text(text, None),
        None => Err(ScenarioError::Io {
            path: spec.to_string(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!(
                    "no such file, and not a bundled scenario ({})",
                    BUNDLED_SCENARIO_NAMES.join(", ")
                ),
            ),
        }),
    }
}

fn run_command(args: RunArgs, quiet: bool) -> i32 {
    let mut doc = match load_document(&args.scenario) {
        Ok(doc) => doc,
        Err(err) => {
            eprintln!("error: {err}");
            return scenario_exit_code(&err);
        }
    };
    if let Some(dt) = args.dt {
        doc.scenario.integrator.dt = dt;
    }
    if let Some(t_final) = args.t_final {
        doc.scenario.integrator.t_final = t_final;
    }
    if let Some(seed) = args.seed {
        set_seed(&mut doc.scenario, seed);
    }
    let format = match args.format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None => doc.output.format,
    };
    let output: Option<PathBuf> = args
        .output
        .or_else(|| doc.output.path.as_ref().map(PathBuf::from));

    // Fan the seeds out across worker threads; everything downstream of the
    // per-seed scenario is deterministic, so joining in seed order makes the
    // whole invocation deterministic.
    let fan_out = args.seeds.unwrap_or(1);
    let base_seed = args.seed.unwrap_or(doc.scenario.noise.seed);
    let mut documents: Vec<(u64, ScenarioDocument)> = Vec::new();
    for i in 0..fan_out {
        let mut d = doc.clone();
        if args.seeds.is_some() {
            set_seed(&mut d.scenario, base_seed + i);
        }
        documents.push((base_seed + i, d));
    }

    let results: Vec<Result<SimResult<f64>, SimError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = documents
            .iter()
            .map(|(_, d)| {
                let scenario = d.scenario.clone();
                scope.spawn(move || run(scenario))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation worker panicked"))
            .collect()
    });

    let mut aborted_any = false;
    for ((seed, d), outcome) in documents.iter().zip(results) {
        let result = match outcome {
            Ok(result) => result,
            Err(err) => {
                eprintln!("error: seed {seed}: {err}");
                return EXIT_VALIDATION;
            }
        };
        let metrics = consensus_metrics(&result, CONVERGENCE_THRESHOLD);
        let rendered = match format {
            OutputFormat::Csv => to_csv(&result),
            OutputFormat::Json => {
                let mut text = serde_json::to_string_pretty(&summary_json(
                    d,
                    &result,
                    &metrics,
                    CONVERGENCE_THRESHOLD,
                ))
                .expect("summary serializes");
                text.push('\n');
                text
            }
        };
        let target = output.as_ref().map(|p| {
            if fan_out > 1 {
                seeded_path(p, *seed)
            } else {
                p.clone()
            }
        });
        match &target {
            Some(path) => {
                if let Err(err) = std::fs::write(path, &rendered) {
                    eprintln!("error: cannot write {}: {err}", path.display());
                    return EXIT_IO;
                }
            }
            None => {
                // The payload itself is not informational chatter: without an
                // output path a JSON summary goes to stdout even under quiet.
                if format == OutputFormat::Json {
                    print!("{rendered}");
                }
            }
        }
        if !quiet {
            let convergence = match metrics.convergence_time {
                Some(t) => format!("below {CONVERGENCE_THRESHOLD} from t = {t}"),
                None => format!("never below {CONVERGENCE_THRESHOLD}"),
            };
            println!(
                "seed {seed}: {} samples, steady-state disparity {:.4e}, \
                 steady-state max edge norm {:.4e}, disparity {convergence}, \
                 max lift residual {:.3e}",
                result.times.len(),
                metrics.steady_state_disparity,
                steady_state_max_edge_norm(&result),
                result.max_lift_residual,
            );
            if let Some(path) = &target {
                println!("wrote {}", path.display());
            }
        }
        if let Some(abort) = &result.aborted {
            aborted_any = true;
            eprintln!(
                "seed {seed}: run aborted at t = {}: {}",
                abort.time, abort.reason
            );
        }
    }
    if aborted_any {
        EXIT_ABORT
    } else {
        EXIT_OK
    }
}

fn verify_command(args: VerifyArgs, quiet: bool) -> i32 {
    let text = match std::fs::read_to_string(&args.graph) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", args.graph.display());
            return EXIT_IO;
        }
    };
    let graph = match Digraph::from_text(&text) {
        Ok(graph) => graph,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_VALIDATION;
        }
    };
    let report = match verify_graph::<f64>(&graph, args.tree.as_deref()) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_VALIDATION;
        }
    };
    if !quiet {
        print!("{}", report.render());
    }
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

/// Rebuilds the parts of a [`SimResult`] that the trajectory CSV preserves:
/// times, node states, per-edge norms (as single-column edge states), and
/// disparity. Lift residual and abort state are not recorded in CSV.
fn parse_trajectory_csv(text: &str) -> Result<SimResult<f64>, String> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or("empty file")?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"t") || columns.last() != Some(&"disparity") {
        return Err("not a trajectory CSV: header must run t,...,disparity".to_string());
    }
    let mut agent_count = 0usize;
    let mut state_dim = 0usize;
    let mut edge_count = 0usize;
    for name in &columns[1..columns.len() - 1] {
        if let Some(rest) = name.strip_prefix("x_") {
            let (i, d) = rest
                .split_once('_')
                .ok_or_else(|| format!("malformed state column {name:?}"))?;
            let i: usize = i.parse().map_err(|_| format!("malformed state column {name:?}"))?;
            let d: usize = d.parse().map_err(|_| format!("malformed state column {name:?}"))?;
            agent_count = agent_count.max(i);
            state_dim = state_dim.max(d);
        } else if let Some(k) = name.strip_prefix("edge_norm_") {
            let k: usize = k.parse().map_err(|_| format!("malformed edge column {name:?}"))?;
            edge_count = edge_count.max(k);
        } else {
            return Err(format!("unknown column {name:?}"));
        }
    }
    let expected = 1 + agent_count * state_dim + edge_count + 1;
    if columns.len() != expected {
        return Err(format!(
            "header declares {} columns, expected {expected} from {agent_count} agents x {state_dim} dims + {edge_count} edges",
            columns.len()
        ));
    }
    let mut result = SimResult {
        times: Vec::new(),
        node_states: Vec::new(),
        edge_states: Vec::new(),
        edge_lyapunov: Vec::new(),
        tree_lyapunov: None,
        cotree_lyapunov: None,
        disparity: Vec::new(),
        max_lift_residual: 0.0,
        aborted: None,
        agent_count,
        state_dim,
        edge_count,
    };
    for (idx, line) in lines {
        let lineno = idx + 1;
        let values: Vec<f64> = line
            .split(',')
            .map(|tok| tok.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("line {lineno}: non-numeric value"))?;
        if values.len() != expected {
            return Err(format!(
                "line {lineno}: {} columns, expected {expected}",
                values.len()
            ));
        }
        result.times.push(values[0]);
        result.node_states.push(DMatrix::from_fn(
            agent_count,
            state_dim,
            |i, d| values[1 + i * state_dim + d],
        ));
        let edge_base = 1 + agent_count * state_dim;
        result.edge_states.push(DMatrix::from_fn(edge_count, 1, |k, _| {
            values[edge_base + k]
        }));
        result
            .edge_lyapunov
            .push((0..edge_count).map(|k| 0.5 * values[edge_base + k].powi(2)).collect());
        result.disparity.push(values[expected - 1]);
    }
    if result.times.is_empty() {
        return Err("no data rows".to_string());
    }
    Ok(result)
}

fn report_command(args: ReportArgs, quiet: bool) -> i32 {
    let text = match std::fs::read_to_string(&args.csv) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", args.csv.display());
            return EXIT_IO;
        }
    };
    let result = match parse_trajectory_csv(&text) {
        Ok(result) => result,
        Err(err) => {
            eprintln!("error: {}: {err}", args.csv.display());
            return EXIT_VALIDATION;
        }
    };
    let metrics = consensus_metrics(&result, CONVERGENCE_THRESHOLD);
    let steady_edge = steady_state_max_edge_norm(&result);
    let rendered = match args.format {
        Some(FormatArg::Json) => {
            let value = serde_json::json!({
                "samples": result.times.len(),
                "agent_count": result.agent_count,
                "state_dim": result.state_dim,
                "edge_count": result.edge_count,
                "t_final": result.times.last().copied().unwrap_or(0.0),
                "metrics": {
                    "max_disparity": metrics.max_disparity,
                    "steady_state_disparity": metrics.steady_state_disparity,
                    "final_disparity": metrics.final_disparity,
                    "convergence_threshold": CONVERGENCE_THRESHOLD,
                    "convergence_time": metrics.convergence_time,
                },
                "steady_state_max_edge_norm": steady_edge,
            });
            let mut text =
                serde_json::to_string_pretty(&value).expect("summary serializes");
            text.push('\n');
            text
        }
        _ => {
            let convergence = match metrics.convergence_time {
                Some(t) => format!("below {CONVERGENCE_THRESHOLD} from t = {t}"),
                None => format!("never below {CONVERGENCE_THRESHOLD}"),
            };
            format!(
                "samples: {}\nagents: {}, state dim: {}, edges: {}\n\
                 max disparity: {:.6e}\nsteady-state disparity: {:.6e}\n\
                 final disparity: {:.6e}\ndisparity {convergence}\n\
                 steady-state max edge norm: {:.6e}\n",
                result.times.len(),
                result.agent_count,
                result.state_dim,
                result.edge_count,
                metrics.max_disparity,
                metrics.steady_state_disparity,
                metrics.final_disparity,
                steady_edge,
            )
        }
    };
    match &args.output {
        Some(path) => {
            if let Err(err) = std::fs::write(path, &rendered) {
                eprintln!("error: cannot write {}: {err}", path.display());
                return EXIT_IO;
            }
            if !quiet {
                println!("wrote {}", path.display());
            }
        }
        None => {
            // The summary is the command's product, not chatter; quiet only
            // drops the "wrote" note of the file branch.
            print!("{rendered}");
        }
    }
    EXIT_OK
}
