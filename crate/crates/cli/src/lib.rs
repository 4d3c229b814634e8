//! Command-line front end for `blmp`.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns the
//! process exit code: 0 on success, 1 on usage errors, 2 on data errors and 3
//! when a verification fails.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use blmp::engine::{
    Engine, Phase, RoundEvent, RunObserver, SelectionScript, SyncEvent, TrialEvent, Variant,
};
use blmp::fixtures::{example_params, example_probes, example_script};
use blmp::io::{
    format_placement, format_probes, read_placement_file, read_probes_file, write_placement_file,
};
use blmp::oracle::{brute_force_optimum_with, generate_probeset, verify_incremental};
use blmp::placement::neighbor_pair_count;
use blmp::report::{write_csv, Checkpoint, RunReport};
use blmp::{
    solve, total_cost, Algorithm, BlmpError, ProbeSet, RoundBudget, SearchParams, SolveOptions,
};
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "blmp",
    version,
    about = "Probe placement for border length minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random probe set.
    Gen(GenArgs),
    /// Run one algorithm on one instance and print a CSV row.
    Run(RunArgs),
    /// Score a placement file.
    Cost(CostArgs),
    /// Exhaustively find the optimal placement of a grid up to 3x3.
    Oracle(OracleArgs),
    /// Check incremental cost bookkeeping against full recomputation.
    Verify(VerifyArgs),
    /// Run several algorithms on one instance and print one CSV row each.
    Compare(CompareArgs),
    /// Replay a scripted run and print the step trace.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Master seed.
    #[arg(long, env = "BLMP_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 25)]
    probelength: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value_t = 8)]
    workers: usize,
    /// Wall-clock budget in seconds.
    #[arg(long, conflicts_with = "rounds")]
    time_limit: Option<f64>,
    /// Outer-round budget (iterations for ls); the default when no budget is given is 100000.
    #[arg(long)]
    rounds: Option<u64>,
    /// Uphill acceptance probability for ls and ls-par.
    #[arg(long, default_value_t = 0.001)]
    pr: f64,
    #[arg(long, default_value_t = 20)]
    max_trials1: u64,
    #[arg(long, default_value_t = 40_000)]
    max_trials2: u64,
    #[arg(long, default_value_t = 160)]
    max_cost: i64,
    #[arg(long, default_value_t = 10)]
    max_cost1: i64,
    #[arg(long, default_value_t = 10)]
    max_cost2: i64,
    #[arg(long, default_value_t = 1120)]
    winlength1: u64,
    #[arg(long, default_value_t = 320)]
    winlength2: u64,
    /// Record the best cost every N rounds, or every N seconds with --time-limit.
    #[arg(long)]
    checkpoint_every: Option<f64>,
    /// Run workers on OS threads instead of the sequential simulation.
    #[arg(long)]
    threads: bool,
    /// Assert replication and exact costs at every barrier.
    #[arg(long)]
    verify: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value = "alg2", value_parser = algorithm_parser())]
    algo: Algorithm,
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    /// Write the best placement here.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Write the full run report as JSON here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CostArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    placement: PathBuf,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Enumerate every placement instead of one per grid symmetry class.
    #[arg(long)]
    no_prune: bool,
    /// Write an optimal placement here.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Instance to fuzz; a random one is generated from --dim and --probelength otherwise.
    #[arg(long, conflicts_with_all = ["dim", "probelength"])]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    dim: usize,
    #[arg(long, default_value_t = 25)]
    probelength: usize,
    #[arg(long, default_value_t = 10_000)]
    swaps: usize,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Algorithms to run, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "epitaxial,ls,ls-par,alg1,alg2",
        value_parser = algorithm_parser()
    )]
    algo: Vec<Algorithm>,
    #[command(flatten)]
    search: SearchArgs,
    /// Directory receiving one `<instance>.<algo>.placement` file per run.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Write the run reports as a JSON array here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// Selection script (JSON); the built-in worked example when absent.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Probe file for a custom script; defaults to the 16 example probes.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "alg1", value_parser = PossibleValuesParser::new(["alg1", "alg2"]))]
    algo: String,
    #[arg(long, default_value_t = 2)]
    max_trials1: u64,
    #[arg(long, default_value_t = 1000)]
    max_trials2: u64,
    #[arg(long, default_value_t = 160)]
    max_cost: i64,
    #[arg(long, default_value_t = 10)]
    max_cost1: i64,
    #[arg(long, default_value_t = 10)]
    max_cost2: i64,
    #[arg(long, default_value_t = 70)]
    winlength1: u64,
    #[arg(long, default_value_t = 20)]
    winlength2: u64,
}

fn algorithm_parser() -> impl TypedValueParser<Value = Algorithm> {
    PossibleValuesParser::new(Algorithm::ALL.map(Algorithm::name))
        .map(|s| s.parse::<Algorithm>().expect("restricted to known names"))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(BlmpError),
    Verification(String),
    Output(std::io::Error),
}

impl From<BlmpError> for Failure {
    fn from(e: BlmpError) -> Self {
        if e.is_data_error() {
            Failure::Data(e)
        } else {
            Failure::Verification(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Output(e)
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a, out),
        Command::Run(a) => run_one(a, out, err),
        Command::Cost(a) => cost(a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Replay(a) => replay(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
        Err(Failure::Verification(msg)) => {
            let _ = writeln!(err, "verification failed: {msg}");
            EXIT_VERIFY
        }
        Err(Failure::Output(e)) => {
            let _ = writeln!(err, "error: cannot write output: {e}");
            EXIT_DATA
        }
    }
}

fn gen(a: GenArgs, out: &mut dyn Write) -> CliResult {
    if a.dim == 0 || a.probelength == 0 {
        return Err(Failure::Usage(
            "--dim and --probelength must be positive".into(),
        ));
    }
    let sp = generate_probeset(a.dim, a.probelength, a.seed.seed)?;
    emit(&format_probes(&sp), a.out.as_deref(), out)
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> CliResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| BlmpError::Io {
            path: p.to_path_buf(),
            source: e,
        })?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

impl SearchArgs {
    fn params(&self) -> std::result::Result<SearchParams, Failure> {
        let budget = match (self.time_limit, self.rounds) {
            (Some(s), _) => RoundBudget::WallClockSeconds(s),
            (None, Some(n)) => RoundBudget::OuterRounds(n),
            (None, None) => SearchParams::default().budget,
        };
        let params = SearchParams {
            workers: self.workers,
            budget,
            pr: self.pr,
            max_trials1: self.max_trials1,
            max_trials2: self.max_trials2,
            max_cost: self.max_cost,
            max_cost1: self.max_cost1,
            max_cost2: self.max_cost2,
            winlength1: self.winlength1,
            winlength2: self.winlength2,
            seed: self.seed.seed,
        };
        params
            .validate()
            .map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(params)
    }

    fn checkpoints(
        &self,
        budget: RoundBudget,
    ) -> std::result::Result<Option<Checkpoints>, Failure> {
        let Some(every) = self.checkpoint_every else {
            return Ok(None);
        };
        let interval = match budget {
            RoundBudget::WallClockSeconds(_) if every > 0.0 && every.is_finite() => {
                Interval::Seconds(every)
            }
            RoundBudget::OuterRounds(_) if every >= 1.0 && every.fract() == 0.0 => {
                Interval::Rounds(every as u64)
            }
            RoundBudget::WallClockSeconds(_) => {
                return Err(Failure::Usage(
                    "--checkpoint-every must be a positive number of seconds".into(),
                ))
            }
            RoundBudget::OuterRounds(_) => {
                return Err(Failure::Usage(
                    "--checkpoint-every must be a positive whole number of rounds".into(),
                ))
            }
        };
        Ok(Some(Checkpoints {
            interval,
            next: 1,
            points: Vec::new(),
        }))
    }

    fn options(&self) -> SolveOptions {
        SolveOptions {
            execution: if self.threads {
                blmp::engine::Execution::Threads
            } else {
                blmp::engine::Execution::Sequential
            },
            verify: self.verify,
        }
    }
}

enum Interval {
    Rounds(u64),
    Seconds(f64),
}

/// Samples the best cost at fixed round or wall-clock intervals.
struct Checkpoints {
    interval: Interval,
    next: u64,
    points: Vec<Checkpoint>,
}

impl RunObserver for Checkpoints {
    fn on_round(&mut self, e: &RoundEvent) {
        let due = match self.interval {
            Interval::Rounds(n) => e.round >= self.next * n,
            Interval::Seconds(s) => e.elapsed.as_secs_f64() >= self.next as f64 * s,
        };
        if due {
            self.points.push(Checkpoint {
                rounds: e.round,
                elapsed_ms: e.elapsed.as_millis() as u64,
                best_cost: e.best_cost,
            });
            self.next = match self.interval {
                Interval::Rounds(n) => e.round / n + 1,
                Interval::Seconds(s) => (e.elapsed.as_secs_f64() / s) as u64 + 1,
            };
        }
    }
}

fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn execute(
    sp: &ProbeSet,
    instance: &str,
    algo: Algorithm,
    search: &SearchArgs,
    params: &SearchParams,
) -> std::result::Result<(RunReport, blmp::Placement), Failure> {
    let mut checkpoints = search.checkpoints(params.budget)?;
    let outcome = match checkpoints.as_mut() {
        Some(c) => solve(sp, algo, params, &search.options(), c)?,
        None => solve(sp, algo, params, &search.options(), &mut ())?,
    };
    let report = RunReport {
        instance: instance.to_string(),
        algorithm: algo.name().to_string(),
        workers: if algo.is_parallel() {
            params.workers
        } else {
            1
        },
        seed: params.seed,
        budget: params.budget,
        rounds_executed: outcome.stats.rounds,
        best_cost: outcome.best_cost,
        final_cost: outcome.final_cost,
        elapsed_ms: outcome.stats.elapsed.as_millis() as u64,
        trajectory: checkpoints.map(|c| c.points),
    };
    Ok((report, outcome.best))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(BlmpError::from)?;
    emit(&(text + "\n"), Some(path), &mut std::io::sink())
}

fn run_one(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let params = a.search.params()?;
    let sp = read_probes_file(&a.instance)?;
    let (report, best) = execute(&sp, &instance_id(&a.instance), a.algo, &a.search, &params)?;
    if let Some(points) = &report.trajectory {
        for p in points {
            writeln!(
                err,
                "checkpoint rounds={} elapsed_ms={} best_cost={}",
                p.rounds, p.elapsed_ms, p.best_cost
            )?;
        }
    }
    if let Some(path) = &a.out {
        write_placement_file(&best, path)?;
    }
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    write_csv(out, std::slice::from_ref(&report))?;
    Ok(())
}

fn cost(a: CostArgs, out: &mut dyn Write) -> CliResult {
    let sp = read_probes_file(&a.instance)?;
    let pl = read_placement_file(&a.placement, &sp)?;
    writeln!(out, "{}", total_cost(&sp, &pl))?;
    Ok(())
}

fn oracle(a: OracleArgs, out: &mut dyn Write) -> CliResult {
    let sp = read_probes_file(&a.instance)?;
    let result = brute_force_optimum_with(&sp, !a.no_prune)?;
    writeln!(out, "{}", result.optimum_cost)?;
    match &a.out {
        Some(path) => write_placement_file(&result.witness, path)?,
        None => out.write_all(format_placement(&result.witness).as_bytes())?,
    }
    Ok(())
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> CliResult {
    let sp = match &a.instance {
        Some(path) => read_probes_file(path)?,
        None => {
            if a.dim < 2 || a.probelength == 0 {
                return Err(Failure::Usage(
                    "--dim must be at least 2 and --probelength positive".into(),
                ));
            }
            generate_probeset(a.dim, a.probelength, a.seed.seed)?
        }
    };
    let report = verify_incremental(&sp, a.seed.seed, a.swaps);
    match report.first_divergence {
        None if report.passed => {
            writeln!(
                out,
                "PASS swaps={} adjacent={} dim={}",
                report.swaps_checked,
                report.adjacent_swaps,
                sp.dim()
            )?;
            Ok(())
        }
        Some(d) => Err(Failure::Verification(format!(
            "swap {} of {} and {}: maintained cost {} but recomputed {}",
            d.step, d.a, d.b, d.maintained, d.recomputed
        ))),
        None => Err(Failure::Verification("cost bookkeeping diverged".into())),
    }
}

fn compare(a: CompareArgs, out: &mut dyn Write) -> CliResult {
    let params = a.search.params()?;
    let sp = read_probes_file(&a.instance)?;
    let id = instance_id(&a.instance);
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| BlmpError::Io {
            path: dir.clone(),
            source: e,
        })?;
    }
    let mut reports = Vec::new();
    for &algo in &a.algo {
        let (report, best) = execute(&sp, &id, algo, &a.search, &params)?;
        if let Some(dir) = &a.out {
            write_placement_file(&best, dir.join(format!("{id}.{}.placement", algo.name())))?;
        }
        reports.push(report);
    }
    if let Some(path) = &a.report {
        write_json(path, &reports)?;
    }
    write_csv(out, &reports)?;
    Ok(())
}

/// Prints every evaluated pair, barrier and round epilogue.
struct TracePrinter<'a> {
    out: &'a mut dyn Write,
    edges: i64,
    failed: Option<std::io::Error>,
}

impl TracePrinter<'_> {
    fn line(&mut self, text: std::fmt::Arguments<'_>) {
        if self.failed.is_none() {
            if let Err(e) = writeln!(self.out, "{text}") {
                self.failed = Some(e);
            }
        }
    }
}

/// `cost / edges` truncated to two decimals.
fn two_decimals(cost: i64, edges: i64) -> String {
    let hundredths = (100 * cost).div_euclid(edges);
    format!(
        "{}.{:02}",
        hundredths.div_euclid(100),
        hundredths.rem_euclid(100)
    )
}

impl RunObserver for TracePrinter<'_> {
    fn on_trial(&mut self, e: &TrialEvent) {
        if e.worker == 1 {
            self.line(format_args!("round {} trial {}", e.round, e.trial));
        }
        self.line(format_args!(
            "  P{} {} {} localcost={} newlocalcost={}",
            e.worker, e.a, e.b, e.local_cost, e.new_local_cost
        ));
    }

    fn on_sync(&mut self, e: &SyncEvent) {
        let phase = match e.phase {
            Phase::Improve => "improve",
            Phase::Uphill => "uphill",
        };
        match e.source {
            Some(src) => {
                let names: Vec<String> = e.candidates.iter().map(|c| format!("P{c}")).collect();
                self.line(format_args!(
                    "  {phase} barrier: candidates {} source P{src} COST={}",
                    names.join(","),
                    e.cost
                ))
            }
            None => self.line(format_args!("  {phase} barrier: no candidates")),
        }
    }

    fn on_round(&mut self, e: &RoundEvent) {
        // Printed unreduced, as COST over the edge count.
        let average = match e.average {
            Some(_) => format!(
                " average={} ({}/{})",
                two_decimals(e.cost, self.edges),
                e.cost,
                self.edges
            ),
            None => String::new(),
        };
        self.line(format_args!(
            "round {} done: COST={}{} bestCOST={} sa={} myub={}",
            e.round, e.cost, average, e.best_cost, e.sa, e.myub
        ));
    }
}

fn replay(a: ReplayArgs, out: &mut dyn Write) -> CliResult {
    let (sp, script): (ProbeSet, SelectionScript) = match (&a.script, &a.instance) {
        (None, None) => (example_probes(), example_script()),
        (Some(path), instance) => {
            let text = fs::read_to_string(path).map_err(|e| BlmpError::Io {
                path: path.clone(),
                source: e,
            })?;
            let script: SelectionScript =
                serde_json::from_str(&text).map_err(|e| BlmpError::Parse {
                    path: Some(path.clone()),
                    line: e.line(),
                    message: e.to_string(),
                })?;
            let sp = match instance {
                Some(p) => read_probes_file(p)?,
                None => example_probes(),
            };
            (sp, script)
        }
        (None, Some(_)) => return Err(Failure::Usage("--instance requires --script".into())),
    };
    if script.rounds.is_empty() {
        return Err(Failure::Data(BlmpError::InvalidInput(
            "script has no rounds".into(),
        )));
    }
    let params = SearchParams {
        workers: script.workers,
        budget: RoundBudget::OuterRounds(script.rounds.len() as u64),
        max_trials1: a.max_trials1,
        max_trials2: a.max_trials2,
        max_cost: a.max_cost,
        max_cost1: a.max_cost1,
        max_cost2: a.max_cost2,
        winlength1: a.winlength1,
        winlength2: a.winlength2,
        ..example_params()
    };
    params
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let variant = if a.algo == "alg2" {
        Variant::Alg2
    } else {
        Variant::Alg1
    };
    let edges = neighbor_pair_count(sp.dim()) as i64;

    if let Some(initial) = script.initial_placement(sp.dim())? {
        let c = total_cost(&sp, &initial);
        let average = if variant == Variant::Alg1 && edges > 0 {
            format!(" average={} ({c}/{edges})", two_decimals(c, edges))
        } else {
            String::new()
        };
        writeln!(out, "start: COST={c}{average}")?;
    }
    let mut printer = TracePrinter {
        out,
        edges,
        failed: None,
    };
    let outcome = Engine::new(&sp, params)
        .script(script)
        .verify(true)
        .run(variant, &mut printer)?;
    if let Some(e) = printer.failed {
        return Err(e.into());
    }
    writeln!(out, "bestCOST={}", outcome.best_cost)?;
    Ok(())
}
