//! The `tbsp` command line.
//!
//! Exit codes: 0 on success, 1 on input errors (bad flags, unreadable or
//! invalid files, planner contract violations), 2 on numerical failures and
//! on invariant violations found by `verify`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rayon::ThreadPool;

use tbsp::bench;
use tbsp::bounds::evaluate_bounds;
use tbsp::fim::fim;
use tbsp::geometry::NoiseModel;
use tbsp::io::report::{self, ReportLevel, RunMetadata, VerifyRow};
use tbsp::io::scenario::GeneratorInfo;
use tbsp::io::{load_scenario, Scenario};
use tbsp::planner::{plan, PlanRequest};
use tbsp::signatures::SignatureKind;
use tbsp::synth::{self, SynthConfig, GENERATOR};
use tbsp::Error;

/// Environment variable for the default worker-thread count.
pub const THREADS_ENV: &str = "TBSP_THREADS";

/// Slack allowed by `verify` before a bound ordering counts as violated.
pub const VERIFY_SLACK: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "tbsp",
    version,
    about = "Topological belief-space planning for planar pose graphs"
)]
struct Cli {
    /// Write the CSV here instead of standard output; run metadata goes to
    /// `<out>.meta.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fill the per-stage timing columns (makes output non-reproducible).
    #[arg(long, global = true)]
    timings: bool,
    /// Worker threads for per-action evaluation [default: $TBSP_THREADS, else all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-action signature table.
    Signatures(ScenarioArg),
    /// Signatures plus entropy upper and lower bounds.
    Bounds(ScenarioArg),
    /// Bounds plus the exact posterior entropy.
    Oracle(ScenarioArg),
    /// Select an action, with a margin check or a performance certificate.
    Plan(PlanArgs),
    /// Generate a synthetic scenario.
    Synth(SynthArgs),
    /// Time signatures, bounds and the exact entropy.
    Bench(BenchArgs),
    /// Check the bound sandwich on every action.
    Verify(ScenarioArg),
}

#[derive(Debug, Args)]
struct ScenarioArg {
    scenario: PathBuf,
}

#[derive(Debug, Args)]
struct PlanArgs {
    scenario: PathBuf,
    /// Entropy margin γ; selects margin mode.
    #[arg(long, allow_negative_numbers = true)]
    margin: Option<f64>,
    /// Ranking signature [default: the scenario's, else st].
    #[arg(long, value_parser = parse_signature)]
    signature: Option<SignatureKind>,
    /// Use the exact lower bound in the certificate instead of the Hadamard one.
    #[arg(long)]
    exact_lb: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynthKind {
    /// `count` independent graphs.
    Graphs,
    /// One base graph and `count` actions extending it.
    Ensemble,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Where to write the generated scenario (JSON).
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    mean_degree_increment: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, value_enum, default_value_t = SynthKind::Graphs)]
    kind: SynthKind,
    #[arg(long, default_value_t = 0.1)]
    sigma_p: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma_theta: f64,
    #[arg(long, default_value_t = 1.0)]
    step_length: f64,
    /// [default: 3 × step length]
    #[arg(long)]
    loop_radius: Option<f64>,
    #[arg(long, default_value_t = 10)]
    future_min: usize,
    #[arg(long, default_value_t = 30)]
    future_max: usize,
}

#[derive(Debug, Args)]
struct BenchArgs {
    scenario: PathBuf,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(3..))]
    repetitions: u64,
    /// Benchmark actions concurrently (default: one at a time, one thread).
    #[arg(long)]
    parallel: bool,
}

fn parse_signature(s: &str) -> Result<SignatureKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let printable: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli, printable, stdout, stderr) {
        Ok(code) => code,
        Err(Failure::Input(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            1
        }
        Err(Failure::Numerical(m)) => {
            let _ = writeln!(stderr, "numerical failure: {m}");
            2
        }
    }
}

fn thread_count(cli_threads: Option<usize>) -> Result<usize, Failure> {
    if let Some(t) = cli_threads {
        return if t == 0 {
            Err(Failure::Input("--threads must be at least 1".into()))
        } else {
            Ok(t)
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(t),
            _ => Err(Failure::Input(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Where the CSV and the metadata go.
struct Output<'a> {
    path: Option<PathBuf>,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Output<'_> {
    fn csv(&mut self, f: impl FnOnce(&mut dyn Write) -> Result<(), Error>) -> Result<(), Failure> {
        match &self.path {
            Some(p) => {
                let file = File::create(p).map_err(|e| io_failure(p, e))?;
                let mut w = BufWriter::new(file);
                f(&mut w)?;
                w.flush().map_err(|e| io_failure(p, e))
            }
            None => Ok(f(&mut *self.stdout)?),
        }
    }

    fn metadata(&mut self, meta: &RunMetadata) -> Result<(), Failure> {
        let json = meta.to_json()?;
        match &self.path {
            Some(p) => {
                let mut name = p.as_os_str().to_owned();
                name.push(".meta.json");
                let side = PathBuf::from(name);
                std::fs::write(&side, json).map_err(|e| io_failure(&side, e))
            }
            None => self
                .stderr
                .write_all(json.as_bytes())
                .map_err(|e| Failure::Input(e.to_string())),
        }
    }
}

fn execute(
    cli: Cli,
    args: Vec<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Input(e.to_string()))?;
    let mut out = Output {
        path: cli.out,
        stdout,
        stderr,
    };
    let timings = cli.timings;
    let name = command_name(&cli.command);
    let mut meta = RunMetadata::new(name, args, threads);

    let code = match cli.command {
        Command::Signatures(a) => table(
            &pool,
            &a.scenario,
            ReportLevel::Signatures,
            timings,
            &mut out,
        )?,
        Command::Bounds(a) => table(&pool, &a.scenario, ReportLevel::Bounds, timings, &mut out)?,
        Command::Oracle(a) => table(&pool, &a.scenario, ReportLevel::Oracle, timings, &mut out)?,
        Command::Plan(a) => {
            if a.margin.is_none() {
                meta.lower_bound = Some(if a.exact_lb { "exact" } else { "hadamard" });
            }
            plan_cmd(&pool, a, &mut out)?
        }
        Command::Synth(a) => {
            meta.seed = Some(a.seed);
            meta.generator = Some(GENERATOR);
            synth_cmd(a, &mut out)?
        }
        Command::Bench(a) => {
            if !a.parallel {
                meta.threads = 1;
            }
            bench_cmd(&pool, a, &mut out)?
        }
        Command::Verify(a) => verify_cmd(&pool, &a.scenario, &mut out)?,
    };
    out.metadata(&meta)?;
    Ok(code)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Signatures(_) => "signatures",
        Command::Bounds(_) => "bounds",
        Command::Oracle(_) => "oracle",
        Command::Plan(_) => "plan",
        Command::Synth(_) => "synth",
        Command::Bench(_) => "bench",
        Command::Verify(_) => "verify",
    }
}

fn table(
    pool: &ThreadPool,
    path: &Path,
    level: ReportLevel,
    timings: bool,
    out: &mut Output,
) -> Result<i32, Failure> {
    let scenario = load_scenario(path)?;
    let rows = pool.install(|| {
        scenario
            .actions
            .par_iter()
            .map(|a| {
                report::evaluate_row(&a.id, &a.graph, level).map_err(|e| Error::Action {
                    id: a.id.clone(),
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    out.csv(|w| report::write_action_report(w, &rows, timings))?;
    Ok(0)
}

fn plan_cmd(pool: &ThreadPool, a: PlanArgs, out: &mut Output) -> Result<i32, Failure> {
    let scenario = load_scenario(&a.scenario)?;
    let signature = a.signature.unwrap_or(scenario.signature);
    let margin = a.margin.or(scenario.margin);
    let req = PlanRequest::new(scenario.actions, signature, margin)?;
    let result = pool.install(|| plan(&req, a.exact_lb))?;
    out.csv(|w| report::write_plan_report(w, signature, &result))?;
    Ok(0)
}

fn synth_cmd(a: SynthArgs, out: &mut Output) -> Result<i32, Failure> {
    let noise = NoiseModel::new(a.sigma_p, a.sigma_theta).map_err(Error::from)?;
    let mut cfg = SynthConfig::new(a.n, a.mean_degree_increment, noise, a.seed);
    cfg.step_length = a.step_length;
    cfg.loop_radius = a.loop_radius.unwrap_or(3.0 * a.step_length);
    cfg.future_len = (a.future_min, a.future_max);
    if a.count == 0 {
        return Err(Failure::Input("--count must be at least 1".into()));
    }

    let (actions, base_edges) = match a.kind {
        SynthKind::Graphs => {
            let mut actions = Vec::with_capacity(a.count);
            for k in 0..a.count {
                let mut c = cfg.clone();
                c.seed = a.seed.wrapping_add(k as u64);
                let g = synth::generate_pose_graph(&c)?;
                actions.push(tbsp::CandidateAction::new(format!("g{k:03}"), g));
            }
            let base = vec![a.n - 1; a.count];
            (actions, base)
        }
        SynthKind::Ensemble => {
            let base = synth::generate_pose_graph(&cfg)?;
            let actions = synth::generate_action_ensemble(&base, a.count, &cfg)?;
            // Loop closures counted beyond each action's odometry chain.
            let chain: Vec<usize> = actions.iter().map(|x| x.graph.node_count() - 1).collect();
            (actions, chain)
        }
    };

    let scenario = Scenario {
        noise,
        signature: SignatureKind::St,
        margin: None,
        generator: Some(GeneratorInfo {
            name: GENERATOR.to_string(),
            kind: match a.kind {
                SynthKind::Graphs => "graphs",
                SynthKind::Ensemble => "ensemble",
            }
            .to_string(),
            seed: a.seed,
            n: a.n,
            mean_degree_increment: a.mean_degree_increment,
            step_length: cfg.step_length,
            loop_radius: cfg.loop_radius,
            future_len: [cfg.future_len.0, cfg.future_len.1],
            count: a.count,
            loop_closure_sampling: "uniform over eligible pairs, without replacement".to_string(),
        }),
        actions,
    };
    let json = scenario.to_json()?;
    std::fs::write(&a.scenario, json).map_err(|e| io_failure(&a.scenario, e))?;
    out.csv(|w| report::write_synth_report(w, &scenario.actions, &base_edges))?;
    Ok(0)
}

fn bench_cmd(pool: &ThreadPool, a: BenchArgs, out: &mut Output) -> Result<i32, Failure> {
    let scenario = load_scenario(&a.scenario)?;
    let reps = a.repetitions as usize;
    let rows = if a.parallel {
        pool.install(|| bench::bench(&scenario.actions, reps, true))?
    } else {
        bench::bench(&scenario.actions, reps, false)?
    };
    out.csv(|w| report::write_bench_report(w, &rows))?;
    Ok(0)
}

fn verify_cmd(pool: &ThreadPool, path: &Path, out: &mut Output) -> Result<i32, Failure> {
    let scenario = load_scenario(path)?;
    let rows = pool.install(|| {
        scenario
            .actions
            .par_iter()
            .map(|a| -> Result<VerifyRow, Error> {
                let b = evaluate_bounds(&a.id, &a.graph, true)?;
                let j = fim(&a.graph)?.entropy_j;
                let lb_exact = b.lower_exact.expect("requested");
                let mut violations = Vec::new();
                if b.lower_hadamard > lb_exact + VERIFY_SLACK {
                    violations.push("lb_hadamard>lb_exact");
                }
                if lb_exact > j + VERIFY_SLACK {
                    violations.push("lb_exact>oracle_j");
                }
                if j > b.upper + VERIFY_SLACK {
                    violations.push("oracle_j>ub");
                }
                Ok(VerifyRow {
                    action_id: a.id.clone(),
                    lb_hadamard: b.lower_hadamard,
                    lb_exact,
                    oracle_j: j,
                    ub: b.upper,
                    violations,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    out.csv(|w| report::write_verify_report(w, &rows))?;
    let bad = rows.iter().filter(|r| !r.violations.is_empty()).count();
    if bad > 0 {
        let _ = writeln!(
            out.stderr,
            "{bad} of {} actions violate the bound sandwich",
            rows.len()
        );
        return Ok(2);
    }
    Ok(0)
}
