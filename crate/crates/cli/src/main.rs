use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use autgroup::ca::{CellularAutomaton, RunOutcome};
use autgroup::construction::{build_simulator, ConstructionError, PredictedOrder};
use autgroup::group::{
    ClosureLimits, EngelVerdict, ExponentSearch, Group, GroupError, OrderOptions, OrderVerdict, UnknownReason,
    DEFAULT_MAX_VISITED, DEFAULT_PROBE_DEPTH,
};
use autgroup::io::{self, FormatError};
use autgroup::mealy::{MealyError, MealyMachine};
use autgroup::random::{random_invertible, random_word};
use autgroup::tm::mealy::{element_for_tm_config, prune_unused_right_targets, tm_to_mealy, TmMealyError};
use autgroup::tm::{tm_run, tm_step, StepResult, TmError, TmRunOutcome, TuringMachine};

#[derive(Parser)]
#[command(
    name = "autgroup",
    version,
    about = "Mealy automata, automaton groups, and their compilers"
)]
struct Cli {
    /// Worker threads for closure exploration.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cellular automaton runs.
    #[command(subcommand)]
    Ca(CaCommand),
    /// Turing machine runs.
    #[command(subcommand)]
    Tm(TmCommand),
    /// Compile automata or Turing machines into Mealy machines.
    #[command(subcommand)]
    Build(BuildCommand),
    /// Apply a state word to an input.
    Act(ActArgs),
    /// Bounded order search with certificate.
    Order(OrderArgs),
    /// The group element encoding a configuration.
    Element(ElementArgs),
    /// Order predicted from the automaton's run, optionally certified.
    PredictOrder(PredictArgs),
    /// Smallest n with a trivial n-fold commutator [..[v, h].., h].
    Engel(EngelArgs),
    /// The witness input realizing the predicted order.
    Witness(WitnessArgs),
    /// Compare the word-problem solver with exhaustive action checks on
    /// random machines.
    Oracle(OracleArgs),
}

#[derive(Subcommand)]
enum CaCommand {
    Run(CaRunArgs),
}

#[derive(Args)]
struct CaRunArgs {
    #[arg(long)]
    ca: PathBuf,
    /// Configuration: a file or inline cell states.
    #[arg(long)]
    config: String,
    #[arg(long)]
    max_steps: usize,
    /// Print every configuration.
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum TmCommand {
    Run(TmRunArgs),
}

#[derive(Args)]
struct TmRunArgs {
    #[arg(long)]
    tm: PathBuf,
    /// Configuration: tape symbols with the control state left of the cell it reads.
    #[arg(long)]
    config: String,
    #[arg(long)]
    max_steps: usize,
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum BuildCommand {
    FromCa {
        #[arg(long)]
        ca: PathBuf,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    FromTm {
        #[arg(long)]
        tm: PathBuf,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Drop counting states for control states no rule enters moving right.
        #[arg(long)]
        prune: bool,
    },
}

#[derive(Args)]
struct ClosureArgs {
    /// Visited-word cap of a word-problem closure.
    #[arg(long, default_value_t = DEFAULT_MAX_VISITED)]
    max_visited: usize,
    /// Decide the word problem on minimal automata instead of residual words.
    #[arg(long)]
    minimize: bool,
}

#[derive(Args)]
struct ActArgs {
    #[arg(long)]
    mealy: PathBuf,
    /// State word: a file or inline labels, `p~` for inverses.
    #[arg(long, allow_hyphen_values = true)]
    word: String,
    /// Letters: a file or inline labels.
    #[arg(long)]
    input: String,
    /// Print the cross diagram.
    #[arg(long)]
    diagram: bool,
}

#[derive(Args)]
struct OrderArgs {
    #[arg(long)]
    mealy: PathBuf,
    #[arg(long)]
    word: String,
    /// Largest exponent tried, as `N` or `2^J`.
    #[arg(long, default_value = "2^12", value_parser = parse_exponent)]
    exp_cap: u64,
    #[arg(long, default_value_t = DEFAULT_PROBE_DEPTH)]
    probe_depth: usize,
    /// Inputs whose orbits seed the search; files or inline letters.
    #[arg(long)]
    hint: Vec<String>,
    /// Try lcm candidates even for generated machines.
    #[arg(long)]
    divisors: bool,
    #[command(flatten)]
    closure: ClosureArgs,
}

#[derive(Args)]
struct ElementArgs {
    #[arg(long, conflicts_with = "tm", required_unless_present = "tm")]
    ca: Option<PathBuf>,
    #[arg(long)]
    tm: Option<PathBuf>,
    #[arg(long)]
    config: String,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    ca: PathBuf,
    #[arg(long)]
    config: String,
    #[arg(long)]
    max_steps: usize,
    /// Certify the prediction with the order search.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value = "2^12", value_parser = parse_exponent)]
    exp_cap: u64,
    #[command(flatten)]
    closure: ClosureArgs,
}

#[derive(Args)]
struct EngelArgs {
    #[arg(long)]
    mealy: PathBuf,
    #[arg(long)]
    v: String,
    #[arg(long)]
    h: String,
    #[arg(long)]
    n_cap: u32,
    #[command(flatten)]
    closure: ClosureArgs,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    ca: PathBuf,
    #[arg(long)]
    config: String,
    /// Number of updates spelled out in the witness.
    #[arg(long)]
    k: usize,
    /// Tail symbol; defaults to the first admissible state.
    #[arg(long)]
    b: Option<String>,
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 50)]
    machines: usize,
    #[arg(long, default_value_t = 4)]
    depth: u32,
    #[arg(long, default_value_t = 6)]
    max_states: usize,
    #[arg(long, default_value_t = 6)]
    max_letters: usize,
    /// Words checked per machine.
    #[arg(long, default_value_t = 20)]
    words: usize,
}

fn parse_exponent(s: &str) -> Result<u64, String> {
    let value = match s.split_once('^') {
        Some(("2", j)) => {
            let j: u32 = j.parse().map_err(|_| format!("bad exponent `{j}`"))?;
            1u64.checked_shl(j).filter(|_| j < 64).ok_or("exponent too large")?
        }
        Some(_) => return Err("only powers of 2 may use `^`".into()),
        None => s.parse().map_err(|_| format!("not a number: `{s}`"))?,
    };
    if value == 0 {
        return Err("cap must be positive".into());
    }
    Ok(value)
}

/// Reads a file if the argument names one, else uses it as inline text.
fn text_arg(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if path.is_file() {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    } else {
        Ok(arg.to_string())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_ca(path: &Path) -> Result<CellularAutomaton> {
    io::parse_ca(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_tm(path: &Path) -> Result<TuringMachine> {
    io::parse_tm(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_mealy(path: &Path) -> Result<MealyMachine> {
    io::parse_mealy(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn group(m: &MealyMachine, threads: usize, closure: &ClosureArgs) -> Result<Group> {
    let limits = ClosureLimits {
        max_visited: closure.max_visited,
        threads,
        minimize: closure.minimize,
    };
    Ok(Group::with_limits(m, limits)?)
}

/// Resolves a word against the inverse closure when the machine is
/// invertible, else against the machine itself.
fn word_over(m: &MealyMachine, g: Option<&Group>, arg: &str) -> Result<Vec<u32>> {
    let target = g.map_or(m, Group::machine);
    Ok(io::parse_word(&text_arg(arg)?, target)?)
}

/// A failed certificate; reported like an error but kept apart for its kind.
#[derive(Debug)]
struct VerificationFailed(String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.max(1);
    match cli.command {
        Command::Ca(CaCommand::Run(a)) => ca_run(a),
        Command::Tm(TmCommand::Run(a)) => tm_run_cmd(a),
        Command::Build(BuildCommand::FromCa { ca, output }) => {
            let sim = build_simulator(&load_ca(&ca)?)?;
            let m = sim.machine();
            emit(&io::render_mealy(m), output.as_deref())?;
            eprintln!("{} letters, {} states", m.num_letters(), m.num_states());
            Ok(())
        }
        Command::Build(BuildCommand::FromTm { tm, output, prune }) => {
            let tm = load_tm(&tm)?;
            let mut compiled = tm_to_mealy(&tm)?;
            if prune {
                compiled = prune_unused_right_targets(&compiled, &tm)?;
            }
            let m = compiled.machine();
            emit(&io::render_mealy(m), output.as_deref())?;
            eprintln!("{} letters, {} states", m.num_letters(), m.num_states());
            Ok(())
        }
        Command::Act(a) => act(a),
        Command::Order(a) => order(a, threads),
        Command::Element(a) => element(a),
        Command::PredictOrder(a) => predict(a, threads),
        Command::Engel(a) => engel(a, threads),
        Command::Witness(a) => witness(a),
        Command::Oracle(a) => oracle(a, cli.seed, threads),
    }
}

fn ca_run(a: CaRunArgs) -> Result<()> {
    let ca = load_ca(&a.ca)?;
    let config = io::parse_labels(&text_arg(&a.config)?, ca.states(), "cell state")?;
    let verdict = ca.run(&config, a.max_steps);
    println!("verdict: {verdict:?}");
    if a.trace {
        let steps = match verdict {
            RunOutcome::HaltsAfter(k) => k,
            RunOutcome::NoHaltWithin(m) => m,
        };
        for (i, c) in ca.trajectory(&config, steps).iter().enumerate() {
            println!("{i}: {}", ca.config_labels(c).join(" "));
        }
    }
    Ok(())
}

fn tm_run_cmd(a: TmRunArgs) -> Result<()> {
    let tm = load_tm(&a.tm)?;
    let labels: Vec<String> = text_arg(&a.config)?.split_whitespace().map(str::to_string).collect();
    let cfg = tm.config_from_labels(&labels)?;
    let (outcome, last) = tm_run(&tm, &cfg, a.max_steps)?;
    match outcome {
        TmRunOutcome::HaltsAfter { steps, reason } => println!("verdict: HaltsAfter({steps}) {reason:?}"),
        TmRunOutcome::RunningAt(m) => println!("verdict: RunningAt({m})"),
    }
    if a.trace {
        let mut current = cfg;
        println!("0: {}", tm.config_labels(&current).join(" "));
        for i in 1.. {
            if current == last {
                break;
            }
            match tm_step(&tm, &current)? {
                StepResult::Next(next) => current = next,
                StepResult::Halted(_) => break,
            }
            println!("{i}: {}", tm.config_labels(&current).join(" "));
        }
    } else {
        println!("last: {}", tm.config_labels(&last).join(" "));
    }
    Ok(())
}

fn act(a: ActArgs) -> Result<()> {
    let m = load_mealy(&a.mealy)?;
    let g = if m.is_invertible() { Some(Group::new(&m)?) } else { None };
    let w = word_over(&m, g.as_ref(), &a.word)?;
    let target = g.as_ref().map_or(&m, Group::machine);
    let x = io::parse_letters(&text_arg(&a.input)?, target)?;
    if a.diagram {
        let trace = target.cross_diagram(&w, &x)?;
        print!("{}", trace.render(target));
    }
    print!("{}", io::render_letters(target, &target.act(&w, &x)));
    Ok(())
}

fn print_verdict(g: &Group, v: &OrderVerdict) {
    match v {
        OrderVerdict::Finite { order, certificate } => {
            println!("verdict: Finite({order})");
            let s = certificate.identity;
            println!("identity: w^{order} trivial, {} visited, depth {}", s.visited, s.depth);
            for w in &certificate.witnesses {
                let input = g.machine().letter_labels(&w.input).join(" ");
                println!("witness: w^{} moves [{input}] ({:?})", w.exponent, w.source);
            }
        }
        OrderVerdict::UnknownAbove { bound, probe } => {
            println!("verdict: UnknownAbove({bound})");
            let reason = match probe.reason {
                UnknownReason::ExponentCap => "exponent cap reached".to_string(),
                UnknownReason::OrbitExceedsCap => "an orbit is longer than the cap".to_string(),
                UnknownReason::ClosureCap { exponent } => format!("closure cap reached at exponent {exponent}"),
            };
            println!("reason: {reason}");
            println!("refuted: {:?}", probe.refuted);
            println!("multiple-of: {}", probe.multiple_of);
        }
    }
}

fn order(a: OrderArgs, threads: usize) -> Result<()> {
    let m = load_mealy(&a.mealy)?;
    let g = group(&m, threads, &a.closure)?;
    let w = word_over(&m, Some(&g), &a.word)?;
    let hints = a
        .hint
        .iter()
        .map(|h| Ok(io::parse_letters(&text_arg(h)?, g.machine())?))
        .collect::<Result<Vec<_>>>()?;
    let opts = OrderOptions {
        exponent_cap: a.exp_cap,
        probe_depth: a.probe_depth,
        hints,
        search: a.divisors.then_some(ExponentSearch::Divisors),
    };
    let v = g.order(&w, &opts)?;
    print_verdict(&g, &v);
    Ok(())
}

fn element(a: ElementArgs) -> Result<()> {
    let text = text_arg(&a.config)?;
    let rendered = if let Some(path) = &a.ca {
        let sim = build_simulator(&load_ca(path)?)?;
        let config = io::parse_labels(&text, sim.ca().states(), "cell state")?;
        io::render_word(sim.machine(), &sim.element_for_config(&config)?)
    } else {
        let tm = load_tm(a.tm.as_deref().expect("clap enforces one source"))?;
        let compiled = tm_to_mealy(&tm)?;
        let labels: Vec<&str> = text.split_whitespace().collect();
        let cfg = tm.config_from_labels(&labels)?;
        io::render_word(compiled.machine(), &element_for_tm_config(&compiled, &tm, &cfg)?)
    };
    emit(&rendered, a.output.as_deref())
}

fn predict(a: PredictArgs, threads: usize) -> Result<()> {
    let sim = build_simulator(&load_ca(&a.ca)?)?;
    let config = io::parse_labels(&text_arg(&a.config)?, sim.ca().states(), "cell state")?;
    let predicted = sim.predicted_order(&config, a.max_steps)?;
    println!("prediction: {predicted:?}");
    if !a.verify {
        return Ok(());
    }
    let g = group(sim.machine(), threads, &a.closure)?;
    let w = sim.element_for_config(&config)?;
    let hints = match sim.ca().run(&config, a.max_steps) {
        RunOutcome::HaltsAfter(j) if j >= 2 => vec![sim.witness_word(&config, j - 1, None)?],
        _ => Vec::new(),
    };
    let opts = OrderOptions {
        exponent_cap: a.exp_cap,
        hints,
        ..OrderOptions::default()
    };
    let v = g.order(&w, &opts)?;
    print_verdict(&g, &v);
    let ok = match (predicted, v.finite()) {
        (PredictedOrder::Exactly(n), Some(o)) => n == o,
        (PredictedOrder::ExactlyTwo, Some(o)) => o == 2,
        (PredictedOrder::AtLeast(n), Some(o)) => o >= n && o.is_power_of_two(),
        (PredictedOrder::InfiniteIfNeverHalts { .. }, None) => true,
        _ => false,
    };
    if !ok {
        return Err(VerificationFailed(format!("prediction {predicted:?} disagrees with the order search")).into());
    }
    println!("certified");
    Ok(())
}

fn engel(a: EngelArgs, threads: usize) -> Result<()> {
    let m = load_mealy(&a.mealy)?;
    let g = group(&m, threads, &a.closure)?;
    let v = word_over(&m, Some(&g), &a.v)?;
    let h = word_over(&m, Some(&g), &a.h)?;
    match g.is_engel_pair(&v, &h, a.n_cap)? {
        EngelVerdict::YesAt(n) => println!("verdict: YesAt({n})"),
        EngelVerdict::NoUpTo(n) => println!("verdict: NoUpTo({n})"),
    }
    Ok(())
}

fn witness(a: WitnessArgs) -> Result<()> {
    let sim = build_simulator(&load_ca(&a.ca)?)?;
    let config = io::parse_labels(&text_arg(&a.config)?, sim.ca().states(), "cell state")?;
    let b = a.b.as_deref().map(|b| sim.ca().state_id(b)).transpose()?;
    let x = sim.witness_word(&config, a.k, b)?;
    emit(&io::render_letters(sim.machine(), &x), a.output.as_deref())
}

fn oracle(a: OracleArgs, seed: u64, threads: usize) -> Result<()> {
    println!("seed: {seed}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disagreements = 0;
    for i in 0..a.machines {
        use rand::Rng;
        let n = rng.gen_range(1..=a.max_states);
        let k = rng.gen_range(1..=a.max_letters);
        let m = random_invertible(&mut rng, n, k);
        let limits = ClosureLimits {
            threads,
            ..ClosureLimits::default()
        };
        let g = Group::with_limits(&m, limits)?;
        for _ in 0..a.words {
            let len = rng.gen_range(0..=6);
            let w = random_word(&mut rng, 2 * n, len);
            let check = g.is_identity(&w)?;
            let brute = fixes_all(g.machine(), &w, a.depth);
            // witnesses are shortest, so brute force passes iff none fits the depth
            let consistent = match &check.witness {
                None => brute,
                Some(x) => g.machine().act(&w, x) != *x && brute == (x.len() > a.depth as usize),
            };
            if !consistent {
                disagreements += 1;
                println!("machine {i}: word {w:?}: solver {check:?}, brute force {brute}");
            }
        }
    }
    println!("machines: {}, disagreements: {disagreements}", a.machines);
    if disagreements > 0 {
        return Err(VerificationFailed(format!("{disagreements} disagreements")).into());
    }
    Ok(())
}

/// Whether `w` fixes every input of length at most `depth`.
fn fixes_all(m: &MealyMachine, w: &[u32], depth: u32) -> bool {
    let k = m.num_letters() as u64;
    (0..=depth).all(|d| {
        (0..k.pow(d)).all(|mut n| {
            let x: Vec<u32> = (0..d)
                .map(|_| {
                    let l = (n % k) as u32;
                    n /= k;
                    l
                })
                .collect();
            m.act(w, &x) == x
        })
    })
}

fn kind(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if cause.is::<VerificationFailed>() {
            return "verification";
        }
        if cause.is::<FormatError>() {
            return "format";
        }
        if let Some(g) = cause.downcast_ref::<GroupError>() {
            return match g {
                GroupError::Undecided { .. } => "undecided",
                _ => "group",
            };
        }
        if cause.is::<ConstructionError>() || cause.is::<TmMealyError>() {
            return "construction";
        }
        if cause.is::<MealyError>() || cause.is::<TmError>() {
            return "input";
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
    }
    "error"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {}: {message}", kind(&e));
            ExitCode::FAILURE
        }
    }
}
