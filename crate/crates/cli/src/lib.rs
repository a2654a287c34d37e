//! The `nlv` command line: argument parsing, dispatch and output.

pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlv_core::classical::{classical_lower_bound, classical_value, deterministic_count};
use nlv_core::game::{load_game, load_strategy, Game};
use nlv_core::linalg::{ComplexMatrix, MatrixData};
use nlv_core::moments::{cloud_to_csv, density_check, enumerate_monomials, moment_map, sample_moment_cloud};
use nlv_core::protocols::{epr_correlation_demo, superdense_decode, superdense_encode, SpinBasis, TwoBitMessage};
use nlv_core::quantum::{chsh_optimal_spec, quantum_correlation, SpecFile};
use nlv_core::seesaw::{entangled_lower_bound, SearchConfig};
use nlv_core::synchronous::sync_value_lower_bound;
use nlv_core::tm::{self, load_machine, load_ndtm, parse_input, RunOutcome, TuringMachine};
use serde::Serialize;

use output::*;

#[derive(Debug, Parser)]
#[command(name = "nlv", version, about = "Nonlocal game values and related quantum experiments")]
pub struct Cli {
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "NLV_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Winning probability of a strategy in a game.
    Value(ValueArgs),
    /// Classical value by enumerating deterministic strategies.
    Classical(ClassicalArgs),
    /// Lower bound on the entangled value via see-saw search.
    QuantumLb(QuantumLbArgs),
    /// Lower bound on the synchronous value over matrix algebras.
    SyncLb(SyncLbArgs),
    /// Superdense coding round trip.
    Superdense(SuperdenseArgs),
    /// EPR perfect-correlation experiment.
    Epr(EprArgs),
    /// Normalized-trace moment maps.
    #[command(subcommand)]
    Moments(MomentsCommand),
    /// Three-tape Turing machines.
    #[command(subcommand)]
    Tm(TmCommand),
    /// Classical and quantum CHSH values side by side.
    DemoChsh,
}

#[derive(Debug, Args, Serialize)]
pub struct ValueArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long)]
    pub strategy: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassicalArgs {
    #[arg(long)]
    pub game: PathBuf,
    /// Maximum number of deterministic strategies to enumerate.
    #[arg(long, default_value_t = 10_000_000)]
    pub cap: u64,
    /// Beyond the cap, run this many best-response restarts instead and
    /// report a lower bound.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Seed for --sample.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct QuantumLbArgs {
    #[arg(long)]
    pub game: PathBuf,
    /// Local dimension of each player.
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Alternation rounds per restart.
    #[arg(long, default_value_t = 40)]
    pub iters: usize,
    /// Where to write the best strategy found.
    #[arg(long, default_value = "quantum-lb-spec.json")]
    pub spec_out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SyncLbArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub iters: usize,
    /// Optionally write the best projection family found.
    #[arg(long)]
    pub family_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SuperdenseArgs {
    /// Two digits from {1,2}; all four messages when omitted.
    #[arg(long)]
    pub msg: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisArg {
    Vertical,
    Horizontal,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct EprArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = BasisArg::Both)]
    pub basis: BasisArg,
}

#[derive(Debug, Subcommand)]
pub enum MomentsCommand {
    /// Moment vector of the matrices in a file.
    Map(MomentsMapArgs),
    /// Empirical coverage of a large-dimension cloud by a small one.
    Density(DensityArgs),
    /// Sample a moment cloud and write it as CSV.
    Cloud(CloudArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsMapArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// JSON array of `{rows, cols, entries}` with interleaved re/im entries.
    #[arg(long)]
    pub matrices: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub p1: usize,
    #[arg(long)]
    pub p2: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points sampled at dimension p1.
    #[arg(long, default_value_t = 2000)]
    pub count1: usize,
    /// Points sampled at dimension p2.
    #[arg(long, default_value_t = 200)]
    pub count2: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CloudArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum TmCommand {
    /// Run a deterministic machine.
    Run(TmRunArgs),
    /// Decide acceptance for a nondeterministic machine.
    Accepts(TmAcceptsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Copier,
    Looper,
    Clamp,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["machine", "builtin"])))]
pub struct TmRunArgs {
    #[arg(long)]
    pub machine: Option<PathBuf>,
    /// One of the bundled machines.
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    #[arg(long, default_value = "")]
    pub input: String,
    #[arg(long)]
    pub budget: u64,
    /// Print every configuration.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TmAcceptsArgs {
    #[arg(long)]
    pub machine: PathBuf,
    #[arg(long, default_value = "")]
    pub input: String,
    /// Maximum branch depth.
    #[arg(long)]
    pub depth: u64,
}

#[derive(Debug)]
pub enum CliError {
    Core(nlv_core::Error),
    Hinted(nlv_core::Error, &'static str),
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Hinted(e, hint) => write!(f, "{e}\nhint: {hint}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<nlv_core::Error> for CliError {
    fn from(e: nlv_core::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_game(path: &Path) -> CliResult<Game> {
    Ok(load_game(&read(path)?)?)
}

fn params_of<T: Serialize>(args: &T) -> BTreeMap<String, serde_json::Value> {
    match serde_json::to_value(args).expect("arguments serialize") {
        serde_json::Value::Object(map) => map.into_iter().collect(),
        _ => BTreeMap::new(),
    }
}

struct Reporter {
    json: bool,
    started: Instant,
}

impl Reporter {
    fn emit<T: Serialize>(
        &self,
        command: &str,
        params: BTreeMap<String, serde_json::Value>,
        result: T,
        text: impl FnOnce(&T) -> String,
    ) {
        let manifest = RunManifest {
            command: command.to_string(),
            params,
            version: env!("CARGO_PKG_VERSION").to_string(),
            runtime_secs: self.started.elapsed().as_secs_f64(),
        };
        if self.json {
            let doc = Envelope { manifest, result };
            println!("{}", serde_json::to_string_pretty(&doc).expect("output serializes"));
        } else {
            print!("{}", text(&result));
            let params: Vec<String> = manifest
                .params
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            println!(
                "# nlv {} {} {} ({:.3}s)",
                manifest.version,
                manifest.command,
                params.join(" "),
                manifest.runtime_secs
            );
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be ≥ 1");
            return 2;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let reporter = Reporter {
        json: cli.json,
        started: Instant::now(),
    };
    match dispatch(cli.command, &reporter) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command, out: &Reporter) -> CliResult<()> {
    match command {
        Command::Value(args) => value(args, out),
        Command::Classical(args) => classical(args, out),
        Command::QuantumLb(args) => quantum_lb(args, out),
        Command::SyncLb(args) => sync_lb(args, out),
        Command::Superdense(args) => superdense(args, out),
        Command::Epr(args) => epr(args, out),
        Command::Moments(MomentsCommand::Map(args)) => moments_map(args, out),
        Command::Moments(MomentsCommand::Density(args)) => density(args, out),
        Command::Moments(MomentsCommand::Cloud(args)) => cloud(args, out),
        Command::Tm(TmCommand::Run(args)) => tm_run(args, out),
        Command::Tm(TmCommand::Accepts(args)) => tm_accepts(args, out),
        Command::DemoChsh => demo_chsh(out),
    }
}

fn value(args: ValueArgs, out: &Reporter) -> CliResult<()> {
    let g = read_game(&args.game)?;
    let s = load_strategy(&read(&args.strategy)?)?;
    let value = g.value(&s)?;
    out.emit("value", params_of(&args), ValueResult { value }, |r| {
        format!("value  {}\n", r.value)
    });
    Ok(())
}

fn classical(args: ClassicalArgs, out: &Reporter) -> CliResult<()> {
    let g = read_game(&args.game)?;
    let count = deterministic_count(g.k(), g.n());
    let (cv, bound) = match args.sample {
        Some(restarts) if count > args.cap as u128 => (classical_lower_bound(&g, restarts, args.seed)?, "lower"),
        _ => match classical_value(&g, args.cap as u128) {
            Err(e @ nlv_core::Error::CapExceeded { .. }) => {
                return Err(CliError::Hinted(e, "pass --sample N to run N best-response restarts"));
            }
            other => (other?, "exact"),
        },
    };
    let (alice, bob) = cv.argmax.one_based();
    let result = ClassicalResult {
        value: cv.value,
        bound: bound.into(),
        alice,
        bob,
        deterministic_strategies: u64::try_from(count).unwrap_or(u64::MAX),
    };
    out.emit("classical", params_of(&args), result, |r| {
        let label = if r.bound == "lower" { "  (sampled lower bound)" } else { "" };
        format!("classical value  {}{label}\nA  {:?}\nB  {:?}\n", r.value, r.alice, r.bob)
    });
    Ok(())
}

fn quantum_lb(args: QuantumLbArgs, out: &Reporter) -> CliResult<()> {
    let g = read_game(&args.game)?;
    let config = SearchConfig::new(args.dim, args.restarts, args.seed).with_rounds(args.iters);
    let bound = entangled_lower_bound(&g, &config)?;
    let spec_json = serde_json::to_string_pretty(&SpecFile::from_spec(&bound.spec)).expect("spec serializes");
    write(&args.spec_out, &(spec_json + "\n"))?;
    let result = QuantumLbResult {
        value: bound.value,
        dim: args.dim,
        spec_file: args.spec_out.display().to_string(),
        bound: "lower".into(),
        restart: bound.restart,
        classical_seeded: bound.deterministic_seeded,
    };
    out.emit("quantum-lb", params_of(&args), result, |r| {
        format!(
            "entangled value ≥ {}  (local dimension {}, lower bound)\nstrategy written to {}\n",
            r.value, r.dim, r.spec_file
        )
    });
    Ok(())
}

#[derive(Serialize)]
struct FamilyFile {
    d: usize,
    /// `[x][a]`.
    families: Vec<Vec<MatrixData>>,
}

fn sync_lb(args: SyncLbArgs, out: &Reporter) -> CliResult<()> {
    let g = read_game(&args.game)?;
    let config = SearchConfig::new(args.dim, args.restarts, args.seed).with_rounds(args.iters);
    let bound = sync_value_lower_bound(&g, &config)?;
    if let Some(path) = &args.family_out {
        let file = FamilyFile {
            d: bound.family.d,
            families: bound
                .family
                .families
                .iter()
                .map(|m| m.outcomes.iter().map(MatrixData::from).collect())
                .collect(),
        };
        write(path, &(serde_json::to_string_pretty(&file).expect("family serializes") + "\n"))?;
    }
    let result = SyncLbResult {
        value: bound.value,
        dim: args.dim,
        bound: "finite-dimensional lower bound".into(),
        restart: bound.restart,
        scalar_seeded: bound.scalar_seeded,
        family_file: args.family_out.as_ref().map(|p| p.display().to_string()),
    };
    out.emit("sync-lb", params_of(&args), result, |r| {
        format!(
            "synchronous value ≥ {}  (finite-dimensional lower bound, d = {})\n",
            r.value, r.dim
        )
    });
    Ok(())
}

fn superdense(args: SuperdenseArgs, out: &Reporter) -> CliResult<()> {
    let messages: Vec<TwoBitMessage> = match &args.msg {
        Some(m) => vec![m.parse()?],
        None => TwoBitMessage::all().to_vec(),
    };
    let mut rows = Vec::new();
    for m in messages {
        let state = superdense_encode(m);
        let decoded = superdense_decode(&state)?;
        rows.push(SuperdenseRow {
            message: m.to_string(),
            state: state.to_interleaved(),
            decoded: decoded.message.to_string(),
            probabilities: decoded.probabilities,
        });
    }
    out.emit("superdense", params_of(&args), SuperdenseResult { rows }, |r| {
        let mut s = String::from("sent  decoded  P(11)    P(12)    P(21)    P(22)\n");
        for row in &r.rows {
            let p = row.probabilities;
            s.push_str(&format!(
                "{:<5} {:<8} {:.6} {:.6} {:.6} {:.6}\n",
                row.message, row.decoded, p[0], p[1], p[2], p[3]
            ));
        }
        s
    });
    Ok(())
}

fn epr(args: EprArgs, out: &Reporter) -> CliResult<()> {
    let bases = match args.basis {
        BasisArg::Vertical => vec![SpinBasis::Vertical],
        BasisArg::Horizontal => vec![SpinBasis::Horizontal],
        BasisArg::Both => vec![SpinBasis::Vertical, SpinBasis::Horizontal],
    };
    let runs = bases
        .into_iter()
        .map(|b| epr_correlation_demo(args.trials, args.seed, b))
        .collect::<nlv_core::Result<Vec<_>>>()?;
    out.emit("epr", params_of(&args), EprResult { runs }, |r| {
        let mut s = String::from("basis       P(agree)  observed  Alice marginal\n");
        for run in &r.runs {
            s.push_str(&format!(
                "{:<11} {:<9.6} {:<9.6} ({:.4}, {:.4})\n",
                format!("{:?}", run.basis).to_lowercase(),
                run.agreement_probability,
                run.agreement_frequency,
                run.alice_marginal[0],
                run.alice_marginal[1]
            ));
        }
        s
    });
    Ok(())
}

fn moments_map(args: MomentsMapArgs, out: &Reporter) -> CliResult<()> {
    let data: Vec<MatrixData> = serde_json::from_str(&read(&args.matrices)?).map_err(nlv_core::Error::from)?;
    let matrices = data
        .iter()
        .map(ComplexMatrix::try_from)
        .collect::<nlv_core::Result<Vec<_>>>()?;
    if matrices.len() != args.n {
        return Err(nlv_core::Error::InvalidParameter(format!(
            "--n {} but the file holds {} matrices",
            args.n,
            matrices.len()
        ))
        .into());
    }
    let monomials = enumerate_monomials(args.n, args.d)?;
    let v = moment_map(&matrices, args.d)?;
    let result = MomentsMapResult {
        n: args.n,
        d: args.d,
        monomials: monomials.iter().map(|m| m.to_string()).collect(),
        values: v.values.iter().map(|z| [z.re, z.im]).collect(),
    };
    out.emit("moments map", params_of(&args), result, |r| {
        let mut s = String::new();
        for (m, [re, im]) in r.monomials.iter().zip(&r.values) {
            s.push_str(&format!("{m:<12} {re:+.9} {im:+.9}i\n"));
        }
        s
    });
    Ok(())
}

fn density(args: DensityArgs, out: &Reporter) -> CliResult<()> {
    let r = density_check(args.n, args.d, args.p1, args.p2, args.eps, (args.count1, args.count2), args.seed)?;
    let result = DensityResult {
        n: r.n,
        d: r.d,
        p_small: r.p_small,
        p_large: r.p_large,
        eps: r.eps,
        count_small: r.count_small,
        count_large: r.count_large,
        seed: r.seed,
        covered_fraction: r.covered_fraction,
        max_gap: r.max_gap,
        mean_gap: r.mean_gap,
    };
    out.emit("moments density", params_of(&args), result, |r| {
        format!(
            "{} of {} points at p = {} lie within {} of the {} points at p = {}\n\
             max gap {:.6}, mean gap {:.6} (empirical estimate)\n",
            (r.covered_fraction * r.count_large as f64).round(),
            r.count_large,
            r.p_large,
            r.eps,
            r.count_small,
            r.p_small,
            r.max_gap,
            r.mean_gap
        )
    });
    Ok(())
}

fn cloud(args: CloudArgs, out: &Reporter) -> CliResult<()> {
    let points = sample_moment_cloud(args.n, args.d, args.p, args.count, args.seed)?;
    write(&args.out, &cloud_to_csv(&points))?;
    let result = CloudResult {
        n: args.n,
        d: args.d,
        p: args.p,
        count: args.count,
        seed: args.seed,
        monomials: points.first().map_or(0, |v| v.len()),
        out: args.out.display().to_string(),
    };
    out.emit("moments cloud", params_of(&args), result, |r| {
        format!("{} moment vectors written to {}\n", r.count, r.out)
    });
    Ok(())
}

fn builtin_machine(b: Builtin) -> TuringMachine {
    match b {
        Builtin::Copier => tm::copier(),
        Builtin::Looper => tm::looper(),
        Builtin::Clamp => tm::clamp_probe(),
    }
}

fn tm_run(args: TmRunArgs, out: &Reporter) -> CliResult<()> {
    let machine = match (&args.machine, args.builtin) {
        (Some(path), _) => load_machine(&read(path)?)?,
        (None, Some(b)) => builtin_machine(b),
        (None, None) => unreachable!("clap requires a machine source"),
    };
    let input = parse_input(&args.input)?;
    let result = if args.trace {
        let (outcome, trace) = machine.run_traced(&input, args.budget)?;
        let text = machine.format_trace(&trace);
        TmRunResult {
            outcome,
            trace: Some(text.lines().map(str::to_string).collect()),
        }
    } else {
        TmRunResult {
            outcome: machine.run(&input, args.budget)?,
            trace: None,
        }
    };
    out.emit("tm run", params_of(&args), result, |r| {
        let mut s = String::new();
        for line in r.trace.iter().flatten() {
            s.push_str(line);
            s.push('\n');
        }
        match &r.outcome {
            RunOutcome::Halted { output, steps } => {
                s.push_str(&format!("halted after {steps} steps\noutput {output:?}\n"))
            }
            RunOutcome::BudgetExceeded { steps } => {
                s.push_str(&format!("budget exceeded after {steps} steps\n"))
            }
        }
        s
    });
    Ok(())
}

fn tm_accepts(args: TmAcceptsArgs, out: &Reporter) -> CliResult<()> {
    let machine = load_ndtm(&read(&args.machine)?)?;
    let outcome = machine.accepts(&parse_input(&args.input)?, args.depth)?;
    out.emit("tm accepts", params_of(&args), TmAcceptsResult { outcome }, |r| {
        format!("{:?}\n", r.outcome)
    });
    Ok(())
}

fn demo_chsh(out: &Reporter) -> CliResult<()> {
    let g = Game::chsh();
    let classical = classical_value(&g, nlv_core::classical::DEFAULT_ENUMERATION_CAP)?.value;
    let quantum = g.value(&quantum_correlation(&chsh_optimal_spec())?)?;
    let result = DemoChshResult {
        classical,
        quantum,
        gap: quantum - classical,
    };
    out.emit("demo-chsh", BTreeMap::new(), result, |r| {
        format!(
            "classical value  {:.6}\nquantum value    {:.6}\ngap              {:.6}\n",
            r.classical, r.quantum, r.gap
        )
    });
    Ok(())
}
