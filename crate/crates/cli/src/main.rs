//! `netslice`: solve, verify, generate and benchmark slice placements.
//!
//! Exit codes: 0 success, 1 usage or validation error (including a failed
//! verification), 2 infeasible, 3 time limit reached.

use std::collections::VecDeque;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use netslice_core::experiment::{aggregate, by_series, load_plan, read_records, run_experiment, write_records, RunOptions};
use netslice_core::io::{load_solution, solution_to_json, Instance, RequestSequence};
use netslice_core::milp::{build_model, export_lp, BuildConfig};
use netslice_core::model::{validate, PairMode, RoutingConfig, SolveStatus};
use netslice_core::orchestrator::{events_to_jsonl, run_loop, OrchestratorConfig, OrchestratorMode, OrchestratorState};
use netslice_core::scenario::{gen_requests, gen_substrate, preset, InstanceSpec, Sweep};
use netslice_core::solver::{parse_solution_file, solve_exact, SolverLimits};
use netslice_core::verify::verify;
use netslice_core::PlacementSolution;

const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;

#[derive(Parser)]
#[command(name = "netslice", version, about = "Minimum-active-node placement of network slices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place every slice of an instance on as few nodes as possible.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        routing: RoutingArgs,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Also write the mixed-integer model in LP format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
        /// Solution output (JSON); stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a solution (JSON, or an external solver's `name value` dump).
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        #[command(flatten)]
        routing: RoutingArgs,
    },
    /// Generate an instance from generator parameters.
    Gen {
        params: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Replay a request sequence through the orchestrator; prints JSONL events.
    Orchestrate {
        sequence: PathBuf,
        /// `full` re-plans every slice on each request, `incremental` places
        /// only the new one on the residual substrate.
        #[arg(long, default_value = "full")]
        mode: OrchestratorMode,
        /// Hop routing, as `solve --mode`.
        #[arg(long, default_value = "direct")]
        routing: PairMode,
        #[arg(long)]
        pin_endpoints: bool,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a preset or a plan file and write one CSV row per instance.
    Experiment(ExperimentArgs),
    /// Summarize an experiment CSV.
    Stats {
        csv: PathBuf,
        /// Print the aggregate as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RoutingArgs {
    /// `direct` maps hops onto physical links, `mesh` onto shortest paths.
    #[arg(long, default_value = "direct")]
    mode: PairMode,
    /// Route chains from their ingress node and to their egress node.
    #[arg(long)]
    pin_endpoints: bool,
}

impl RoutingArgs {
    fn config(&self) -> RoutingConfig {
        RoutingConfig {
            mode: self.mode,
            pin_endpoints: self.pin_endpoints,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Preset name (VARY_SLICES, VARY_SFCS, VARY_NFS, SCALE_COMPARE) or a plan file.
    plan: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repetitions per configuration point; the plan's own count when omitted.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(short, long)]
    output: PathBuf,
    /// Drop configuration points whose swept value exceeds this.
    #[arg(long)]
    limit_x: Option<usize>,
    /// Per-instance limit in seconds.
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    routing: RoutingArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Solve {
            instance,
            routing,
            time_limit,
            export_lp: lp_path,
            output,
        } => solve(&instance, routing.config(), time_limit, lp_path.as_deref(), output.as_deref()),
        Command::Verify {
            instance,
            solution,
            routing,
        } => verify_cmd(&instance, &solution, routing.config()),
        Command::Gen { params, output } => generate(&params, &output),
        Command::Orchestrate {
            sequence,
            mode,
            routing,
            pin_endpoints,
            time_limit,
            output,
        } => {
            let routing = RoutingConfig {
                mode: routing,
                pin_endpoints,
            };
            orchestrate(&sequence, mode, routing, time_limit, output.as_deref())
        }
        Command::Experiment(args) => experiment(&args),
        Command::Stats { csv, json } => stats(&csv, json),
    }
}

fn limits(time_limit: Option<f64>) -> Result<SolverLimits> {
    match time_limit {
        Some(t) if !(t > 0.0 && t.is_finite()) => bail!("--time-limit must be a positive number of seconds"),
        Some(t) => Ok(SolverLimits::with_time_budget(t)),
        None => Ok(SolverLimits::default()),
    }
}

fn load_valid_instance(path: &Path) -> Result<Instance> {
    let inst = Instance::load(path).with_context(|| format!("reading {}", path.display()))?;
    let errors = validate(&inst.graph(), &inst.slices);
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("invalid: {e}");
        }
        bail!("{} validation error(s) in {}", errors.len(), path.display());
    }
    Ok(inst)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Timeout => EXIT_TIMEOUT,
    }
}

fn solve(
    path: &Path,
    routing: RoutingConfig,
    time_limit: Option<f64>,
    lp_path: Option<&Path>,
    output: Option<&Path>,
) -> Result<u8> {
    let limits = limits(time_limit)?;
    let inst = load_valid_instance(path)?;
    let graph = inst.graph();
    if let Some(lp_path) = lp_path {
        let (model, _) = build_model(&graph, &inst.slices, &BuildConfig::with_routing(routing))?;
        fs::write(lp_path, export_lp(&model)).with_context(|| format!("writing {}", lp_path.display()))?;
    }
    let sol = solve_exact(&graph, &inst.slices, &routing, &limits);
    eprintln!("status {} objective {}", sol.status, sol.objective);
    if let Some(d) = &sol.diagnostics {
        eprintln!("{d}");
    }
    write_output(output, &(solution_to_json(&sol) + "\n"))?;
    Ok(status_code(sol.status))
}

fn verify_cmd(instance: &Path, solution: &Path, routing: RoutingConfig) -> Result<u8> {
    let inst = load_valid_instance(instance)?;
    let graph = inst.graph();
    let text = fs::read_to_string(solution).with_context(|| format!("reading {}", solution.display()))?;
    let sol: PlacementSolution = if text.trim_start().starts_with('{') {
        load_solution(solution)?
    } else {
        let (_, index) = build_model(&graph, &inst.slices, &BuildConfig::with_routing(routing))?;
        parse_solution_file(&text, &index).with_context(|| format!("decoding {}", solution.display()))?
    };
    let report = verify(&graph, &inst.slices, &sol, &routing);
    println!("{report}");
    Ok(if report.overall { 0 } else { EXIT_ERROR })
}

fn generate(params: &Path, output: &Path) -> Result<u8> {
    let text = fs::read_to_string(params).with_context(|| format!("reading {}", params.display()))?;
    let spec: InstanceSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", params.display()))?;
    if spec.format != netslice_core::io::FORMAT_VERSION {
        bail!("unsupported format version {}", spec.format);
    }
    spec.params.check()?;
    let graph = gen_substrate(&spec.params)?;
    let slices = gen_requests(spec.slices, spec.sfcs, spec.nfs, &spec.params);
    Instance::new(graph, slices).save(output)?;
    Ok(0)
}

fn orchestrate(
    path: &Path,
    mode: OrchestratorMode,
    routing: RoutingConfig,
    time_limit: Option<f64>,
    output: Option<&Path>,
) -> Result<u8> {
    let limits = limits(time_limit)?;
    let seq = RequestSequence::load(path).with_context(|| format!("reading {}", path.display()))?;
    let base = seq.graph();
    let errors = validate(&base, &[]);
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("invalid: {e}");
        }
        bail!("base substrate is invalid");
    }
    let config = OrchestratorConfig { mode, routing, limits };
    let mut source: VecDeque<_> = seq.requests.into_iter().collect();
    let state = run_loop(OrchestratorState::new(base, config), &mut source, &AtomicBool::new(false));
    write_output(output, &events_to_jsonl(state.events()))?;
    eprintln!(
        "{} slice(s) placed on {} active node(s)",
        state.requests().len(),
        state.solution().objective
    );
    Ok(0)
}

fn experiment(args: &ExperimentArgs) -> Result<u8> {
    let mut plan = if Path::new(&args.plan).is_file() {
        load_plan(&args.plan)?
    } else {
        preset(&args.plan)?
    };
    if let Some(reps) = args.reps {
        plan.repetitions = reps;
    }
    if let Some(max) = args.limit_x {
        plan.truncate_sweep(max);
    }
    if plan.points.is_empty() || plan.repetitions == 0 {
        bail!("the plan has no instances to run");
    }
    let options = RunOptions {
        jobs: args.jobs,
        limits: limits(Some(args.time_limit))?,
        routing: args.routing.config(),
    };
    let records = run_experiment(&plan, args.seed, &options)?;
    let file = File::create(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    write_records(BufWriter::new(file), &records)?;

    for (label, series) in by_series(&records) {
        let stats = aggregate(&series, plan.sweep);
        let path = summary_path(&args.output, &label);
        fs::write(&path, stats.summary_csv()).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("{label}: summary in {}", path.display());
    }
    let timeouts = records.iter().filter(|r| r.status == SolveStatus::Timeout).count();
    eprintln!("{} instance(s), {timeouts} timeout(s)", records.len());
    Ok(0)
}

/// `out.csv` with label `L` becomes `out.L.summary.csv`.
fn summary_path(output: &Path, label: &str) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    output.with_file_name(format!("{stem}.{label}.summary.csv"))
}

fn stats(path: &Path, json: bool) -> Result<u8> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let records = read_records(file)?;
    if records.is_empty() {
        bail!("{} holds no records", path.display());
    }
    let mut out = io::stdout().lock();
    for (label, series) in by_series(&records) {
        let stats = aggregate(&series, Sweep::infer(&series));
        if json {
            writeln!(out, "{}", serde_json::json!({ "series": label, "stats": stats }))?;
            continue;
        }
        writeln!(out, "series {label} (swept: {:?})", stats.sweep)?;
        writeln!(out, "{:>6} {:>5} {:>8} {:>8} {:>8} {:>12} {:>12} {:>4}", "x", "n", "mean", "std", "ci", "time_mean", "time_median", "t/o")?;
        for p in &stats.points {
            let (mean, std, ci) = p.active.map_or((f64::NAN, f64::NAN, f64::NAN), |a| (a.mean, a.std, a.ci));
            let time = p.time.map_or(f64::NAN, |t| t.mean);
            let median = p.median_time.unwrap_or(f64::NAN);
            writeln!(
                out,
                "{:>6} {:>5} {mean:>8.3} {std:>8.3} {ci:>8.3} {time:>12.6} {median:>12.6} {:>4}",
                p.x, p.records, p.timeouts
            )?;
        }
        if let Some(a) = stats.active_overall {
            writeln!(out, "active nodes overall: mean {:.4} std {:.4} (n = {})", a.mean, a.std, a.n)?;
        }
        match stats.regression() {
            Ok(r) => writeln!(out, "time vs x: slope {:.6} intercept {:.6} r2 {:.4}", r.slope, r.intercept, r.r_squared)?,
            Err(e) => writeln!(out, "time vs x: {e}")?,
        }
        match stats.time_vs_active_regression() {
            Ok(r) => writeln!(
                out,
                "time vs active nodes: slope {:.6} intercept {:.6} r2 {:.4}",
                r.slope, r.intercept, r.r_squared
            )?,
            Err(e) => writeln!(out, "time vs active nodes: {e}")?,
        }
        if let Some(rho) = stats.trend() {
            writeln!(out, "spearman(x, mean active): {rho:.4}")?;
        }
        writeln!(out)?;
    }
    Ok(0)
}
