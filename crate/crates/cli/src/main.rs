//! `wsynth`: command-line front end for weighted transducer synthesis.
//!
//! Exit codes: 0 yes/realizable/holds, 1 no/unrealizable/fails,
//! 2 unknown at the cap, 64 usage error, 65 input error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wsynth_core::domain::{make_domain_safe, unsafe_transitions, DomainSafeResult, TwoRunSafetyGame};
use wsynth_core::dsum::{exists_path_leq, exists_path_lt, MrgTable, PathCheck, WeightedGraph};
use wsynth_core::game::{arena_to_dot, emit_strategy, parse_arena, GameError};
use wsynth_core::prefix::{solve_prefix_threshold, PrefixError};
use wsynth_core::rational::{format_rational, is_discount, parse_rational};
use wsynth_core::spec::{
    emit_mealy, emit_wfa, mealy_to_dot, parse_mealy, parse_wfa, spec_to_dot, split_word, SpecError,
};
use wsynth_core::synth::{
    build_approx_game, gen_spec_from_mp_game, synth_approx, synth_best_value, synth_boolean, synth_threshold,
    verify_realizer, SynthError,
};
use wsynth_core::{
    Arena, BigRational, Cmp, Measure, MealyTransducer, Objective, Owner, PrefixObjective, SynthResult,
    ValueResult, Verdict, WeightedSpec,
};

#[derive(Parser)]
#[command(name = "wsynth", version, about = "Synthesis of Mealy transducers from weighted specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print a JSON summary on stdout instead of the text report.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock timings in the JSON summary.
    #[arg(long, global = true)]
    timings: bool,
    /// Dump intermediate tables, reductions and strategies.
    #[arg(long, global = true)]
    trace: bool,
    /// Emit the produced artifact as Graphviz DOT.
    #[arg(long, global = true)]
    dot: bool,
    /// Write the produced artifact to this file instead of stdout.
    #[arg(short = 'o', long = "output-file", global = true, value_name = "PATH")]
    output_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check domain-safety and write the domain-safe subspecification.
    DomainSafe { spec: PathBuf },
    /// Synthesize a realizer.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Check a transducer against a specification and objective.
    Verify(VerifyArgs),
    /// Value of an input/output pair.
    Eval {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        output: String,
    },
    /// Best value over the outputs for an input word.
    Bestval {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
    },
    /// Solve a critical prefix threshold game.
    SolvePrefix {
        arena: PathBuf,
        #[arg(long, value_enum)]
        measure: MeasureArg,
        #[arg(long, value_enum)]
        cmp: CmpArg,
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Is there a path from the initial to a critical vertex with discounted
    /// sum `<= nu` (or `< nu` with `--strict`)? Owners are ignored.
    DsumPath {
        arena: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        strict: bool,
    },
    /// Generators.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Any realizer with the specification's domain.
    Boolean { spec: PathBuf },
    /// Realizer ensuring `value cmp nu` on every input of the domain.
    Threshold {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "ge")]
        cmp: CmpArg,
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
    },
    /// Realizer producing a best output on every input.
    BestValue { spec: PathBuf },
    /// Realizer within `r` of the best value on every input.
    Approx {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        /// Require a gap strictly below `r`.
        #[arg(long)]
        strict: bool,
        /// Energy cap of the imperfect-information solver [default: |V|·w_max·4
        /// of the approximation game].
        #[arg(long)]
        cap: Option<u64>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    spec: PathBuf,
    mealy: PathBuf,
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    #[arg(long, value_enum, default_value = "ge")]
    cmp: CmpArg,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Sum specification encoding the mean-payoff game `MP >= 0`.
    MpToSpec { arena: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum CmpArg {
    Ge,
    Gt,
}

impl From<CmpArg> for Cmp {
    fn from(c: CmpArg) -> Cmp {
        match c {
            CmpArg::Ge => Cmp::Ge,
            CmpArg::Gt => Cmp::Gt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Sum,
    Avg,
    Dsum,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Measure {
        match m {
            MeasureArg::Sum => Measure::Sum,
            MeasureArg::Avg => Measure::Avg,
            MeasureArg::Dsum => Measure::Dsum,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Boolean,
    Threshold,
    BestValue,
    Approx,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Exit {
    Yes = 0,
    No = 1,
    Unknown = 2,
    Usage = 64,
    Input = 65,
}

#[derive(Debug)]
struct Failure {
    exit: Exit,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            exit: Exit::Usage,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Failure {
        Failure {
            exit: Exit::Input,
            message: message.into(),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Failure {
        match e {
            SynthError::Unsupported(_) | SynthError::NegativeBound(_) => Failure::usage(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<PrefixError> for Failure {
    fn from(e: PrefixError) -> Failure {
        match e {
            PrefixError::MissingDiscount => Failure::usage(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

/// The JSON summary. Every key except `timings` is always present.
#[derive(Serialize)]
struct Report {
    command: &'static str,
    answer: String,
    exit_code: u8,
    value: Option<String>,
    best_value: Option<String>,
    witness: Option<Vec<String>>,
    strategy_size: Option<usize>,
    cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<BTreeMap<&'static str, f64>>,
}

struct Outcome {
    exit: Exit,
    report: Report,
    /// Human-readable report lines.
    text: String,
    /// Produced file content, written to `-o` or printed.
    artifact: Option<String>,
    trace: String,
}

impl Outcome {
    fn new(command: &'static str, exit: Exit, answer: &str) -> Outcome {
        Outcome {
            exit,
            report: Report {
                command,
                answer: answer.to_string(),
                exit_code: exit as u8,
                value: None,
                best_value: None,
                witness: None,
                strategy_size: None,
                cap: None,
                timings: None,
            },
            text: format!("answer: {answer}\n"),
            artifact: None,
            trace: String::new(),
        }
    }

    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.text, "{key}: {value}").unwrap();
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<WeightedSpec, Failure> {
    parse_wfa(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_mealy(path: &Path) -> Result<MealyTransducer, Failure> {
    parse_mealy(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_arena(path: &Path) -> Result<Arena, Failure> {
    parse_arena(&read(path)?).map_err(|e: GameError| Failure::input(format!("{}: {e}", path.display())))
}

fn rational(flag: &str, text: &str) -> Result<BigRational, Failure> {
    parse_rational(text).ok_or_else(|| Failure::usage(format!("--{flag}: expected P/Q or an integer, got `{text}`")))
}

fn discount(text: &str) -> Result<BigRational, Failure> {
    let lambda = rational("lambda", text)?;
    if !is_discount(&lambda) {
        return Err(Failure::usage("--lambda must satisfy 0 < lambda < 1"));
    }
    Ok(lambda)
}

fn word(spec: &WeightedSpec, flag: &str, text: &str, output: bool) -> Result<Vec<usize>, Failure> {
    let alphabet = if output { spec.outputs() } else { spec.inputs() };
    split_word(alphabet, text).map_err(|e: SpecError| Failure::usage(format!("--{flag}: {e}")))
}

fn value_text(v: &ValueResult) -> String {
    v.value().map_or("-inf".to_string(), format_rational)
}

fn synth_outcome(result: SynthResult, cap: Option<u64>) -> Outcome {
    let exit = match &result {
        SynthResult::Realizable(_) => Exit::Yes,
        SynthResult::Unrealizable | SynthResult::NoBooleanRealizer => Exit::No,
        SynthResult::UnknownAtCap(_) => Exit::Unknown,
    };
    let mut out = Outcome::new("synth", exit, result.keyword());
    if let SynthResult::UnknownAtCap(c) = result {
        out.report.cap = Some(c);
        out.line("cap", c);
    } else {
        out.report.cap = cap;
    }
    if let SynthResult::Realizable(t) = result {
        out.report.strategy_size = Some(t.num_states());
        out.line("states", t.num_states());
        out.artifact = Some(emit_mealy(&t));
        out.trace = mealy_to_dot(&t);
    }
    out
}

fn run_synth(cli: &Cli, command: &SynthCommand) -> Result<Outcome, Failure> {
    let mut out = match command {
        SynthCommand::Boolean { spec } => synth_outcome(synth_boolean(&load_spec(spec)?)?, None),
        SynthCommand::Threshold { spec, cmp, nu } => {
            let nu = rational("nu", nu)?;
            synth_outcome(synth_threshold(&load_spec(spec)?, (*cmp).into(), &nu)?, None)
        }
        SynthCommand::BestValue { spec } => synth_outcome(synth_best_value(&load_spec(spec)?)?, None),
        SynthCommand::Approx { spec, r, strict, cap } => {
            let spec = load_spec(spec)?;
            let r = rational("r", r)?;
            let cap = match cap {
                Some(c) => *c,
                None => default_cap(&spec, *strict, &r)?,
            };
            synth_outcome(synth_approx(&spec, *strict, &r, cap)?, Some(cap))
        }
    };
    // The DOT rendering was stashed in `trace` by `synth_outcome`.
    let dot = std::mem::take(&mut out.trace);
    if cli.dot && out.artifact.is_some() {
        out.artifact = Some(dot);
    }
    Ok(out)
}

/// `|V| · w_max · 4` over the approximation game.
fn default_cap(spec: &WeightedSpec, strict: bool, r: &BigRational) -> Result<u64, Failure> {
    let game = build_approx_game(spec, strict, r)?;
    let w = game.arena.max_abs_weight().unsigned_abs();
    Ok((game.arena.num_vertices() as u64).saturating_mul(w).saturating_mul(4))
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    let spec = load_spec(&args.spec)?;
    let t = load_mealy(&args.mealy)?;
    let objective = match args.objective {
        ObjectiveArg::Boolean => Objective::Boolean,
        ObjectiveArg::Threshold => {
            let nu = args.nu.as_deref().ok_or_else(|| Failure::usage("--objective threshold needs --nu"))?;
            Objective::Threshold {
                cmp: args.cmp.into(),
                nu: rational("nu", nu)?,
            }
        }
        ObjectiveArg::BestValue => Objective::BestValue,
        ObjectiveArg::Approx => {
            let r = args.r.as_deref().ok_or_else(|| Failure::usage("--objective approx needs --r"))?;
            Objective::Approx {
                strict: args.strict,
                r: rational("r", r)?,
            }
        }
    };
    let out = match verify_realizer(&spec, &t, &objective)? {
        Verdict::Pass => {
            let mut out = Outcome::new("verify", Exit::Yes, "pass");
            out.line("objective", &objective);
            out
        }
        Verdict::Fail { input, reason } => {
            let mut out = Outcome::new("verify", Exit::No, "fail");
            out.line("objective", &objective);
            out.line("witness", render_word(&input));
            let ids: Vec<usize> = input.iter().filter_map(|a| spec.inputs().id(a)).collect();
            if ids.len() == input.len() {
                let best = spec.best_value(&ids).map_err(|e| Failure::input(e.to_string()))?;
                let value = match t.run_ids(&ids) {
                    Some(v) => {
                        let mapped: Option<Vec<usize>> = v.iter().map(|&b| spec.outputs().id(t.outputs().name(b))).collect();
                        match mapped {
                            Some(v) => spec.evaluate(&ids, &v).map_err(|e| Failure::input(e.to_string()))?,
                            None => ValueResult::NegInf,
                        }
                    }
                    None => ValueResult::NegInf,
                };
                out.line("value", value_text(&value));
                out.line("best value", value_text(&best));
                out.report.value = Some(value_text(&value));
                out.report.best_value = Some(value_text(&best));
            }
            out.line("reason", &reason);
            out.report.witness = Some(input);
            out
        }
    };
    Ok(out)
}

fn render_word(word: &[String]) -> String {
    if word.is_empty() {
        "ε".to_string()
    } else {
        word.join(" ")
    }
}

fn run_domain_safe(cli: &Cli, path: &Path) -> Result<Outcome, Failure> {
    let spec = load_spec(path)?;
    let bad = unsafe_transitions(&spec);
    let mut out = match make_domain_safe(&spec) {
        DomainSafeResult::Safe(safe) => {
            let mut out = Outcome::new("domain-safe", Exit::Yes, "boolean-realizer");
            out.report.strategy_size = Some(safe.num_states());
            out.artifact = Some(emit_wfa(&safe));
            out
        }
        DomainSafeResult::NoBooleanRealizer => Outcome::new("domain-safe", Exit::No, "no-boolean-realizer"),
    };
    out.line("domain-safe", if bad.is_empty() { "yes" } else { "no" });
    for &e in &bad {
        let t = spec.transition(e);
        out.line(
            "unsafe",
            format!("{} {} {} {}", spec.state_name(t.source), spec.symbol_name(t), t.weight, spec.state_name(t.target)),
        );
    }
    if cli.dot || cli.trace {
        let game = TwoRunSafetyGame::build(&spec);
        if cli.trace {
            let losing = game.solve().iter().filter(|&&w| !w).count();
            writeln!(out.trace, "two-run game: {} vertices, {losing} losing for Eve", game.arena.num_vertices()).unwrap();
        }
        if cli.dot {
            out.artifact = Some(game.to_dot());
        }
    }
    Ok(out)
}

fn run_eval(spec: &Path, input: &str, output: &str) -> Result<Outcome, Failure> {
    let spec = load_spec(spec)?;
    let u = word(&spec, "input", input, false)?;
    let v = word(&spec, "output", output, true)?;
    let value = spec.evaluate(&u, &v).map_err(|e| Failure::usage(e.to_string()))?;
    let exit = if value.is_neg_inf() { Exit::No } else { Exit::Yes };
    let mut out = Outcome::new("eval", exit, if value.is_neg_inf() { "undefined" } else { "defined" });
    out.line("value", value_text(&value));
    out.report.value = Some(value_text(&value));
    Ok(out)
}

fn run_bestval(spec: &Path, input: &str) -> Result<Outcome, Failure> {
    let spec = load_spec(spec)?;
    let u = word(&spec, "input", input, false)?;
    let best = spec.best_output(&u).map_err(|e| Failure::usage(e.to_string()))?;
    let out = match best {
        Some((value, v)) => {
            let mut out = Outcome::new("bestval", Exit::Yes, "defined");
            out.line("best value", format_rational(&value));
            let v: Vec<String> = v.iter().map(|&b| spec.outputs().name(b).to_string()).collect();
            out.line("best output", render_word(&v));
            out.report.best_value = Some(format_rational(&value));
            out.report.witness = Some(v);
            out
        }
        None => {
            let mut out = Outcome::new("bestval", Exit::No, "undefined");
            out.line("best value", "-inf");
            out.report.best_value = Some("-inf".into());
            out
        }
    };
    Ok(out)
}

fn run_solve_prefix(
    cli: &Cli,
    path: &Path,
    measure: MeasureArg,
    cmp: CmpArg,
    nu: &str,
    lambda: Option<&str>,
) -> Result<Outcome, Failure> {
    let arena = load_arena(path)?;
    let nu = rational("nu", nu)?;
    let obj = match (Measure::from(measure), lambda) {
        (Measure::Dsum, Some(l)) => PrefixObjective::dsum(cmp.into(), nu, discount(l)?),
        (Measure::Dsum, None) => return Err(Failure::usage("--measure dsum needs --lambda")),
        (_, Some(_)) => return Err(Failure::usage("--lambda only applies to --measure dsum")),
        (m, None) => PrefixObjective::new(m, cmp.into(), nu),
    };
    let solution = solve_prefix_threshold(&arena, &obj)?;
    let mut out = match solution.winner {
        Owner::Eve => Outcome::new("solve-prefix", Exit::Yes, "eve"),
        Owner::Adam => Outcome::new("solve-prefix", Exit::No, "adam"),
    };
    if let Some(v) = &solution.reduced_value {
        out.line("reduced value", format_rational(v));
        out.report.value = Some(format_rational(v));
    }
    if let Some(sigma) = &solution.strategy {
        out.report.strategy_size = Some(sigma.len());
        out.artifact = Some(emit_strategy(&arena, sigma));
    }
    if cli.trace {
        out.trace = solution.trace.clone();
    }
    if cli.dot {
        out.artifact = Some(arena_to_dot(&arena));
    }
    Ok(out)
}

fn run_dsum_path(cli: &Cli, path: &Path, nu: &str, lambda: &str, strict: bool) -> Result<Outcome, Failure> {
    let arena = load_arena(path)?;
    let nu = rational("nu", nu)?;
    let lambda = discount(lambda)?;
    let allowed = vec![true; arena.num_edges()];
    let g = WeightedGraph::from_arena(&arena, &allowed, arena.critical_set(), lambda);
    let check = if strict { exists_path_lt(&g, &nu) } else { exists_path_leq(&g, &nu) };
    let mut out = match &check {
        PathCheck::Yes(w) => {
            let mut out = Outcome::new("dsum-path", Exit::Yes, "yes");
            let mut vertices = vec![arena.name(g.source).to_string()];
            vertices.extend(w.edges.iter().map(|&e| arena.name(g.edges[e].target).to_string()));
            out.line("dsum", format_rational(&w.dsum));
            out.line("path", vertices.join(" "));
            if let Some(k) = w.pumped {
                out.line("pumped", k);
            }
            out.report.value = Some(format_rational(&w.dsum));
            out.report.witness = Some(vertices);
            out
        }
        PathCheck::No => Outcome::new("dsum-path", Exit::No, "no"),
    };
    if cli.trace {
        let table = MrgTable::compute(&g, &nu);
        out.trace = table.render(&g, &|v| arena.name(v).to_string());
    }
    if cli.dot {
        out.artifact = Some(arena_to_dot(&arena));
    }
    Ok(out)
}

fn run_gen(cli: &Cli, command: &GenCommand) -> Result<Outcome, Failure> {
    let GenCommand::MpToSpec { arena } = command;
    let arena = load_arena(arena)?;
    let spec = gen_spec_from_mp_game(&arena).map_err(|e| Failure::input(e.to_string()))?;
    let mut out = Outcome::new("gen", Exit::Yes, "generated");
    out.line("states", spec.num_states());
    out.report.strategy_size = None;
    out.artifact = Some(if cli.dot { spec_to_dot(&spec) } else { emit_wfa(&spec) });
    Ok(out)
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::DomainSafe { spec } => run_domain_safe(cli, spec),
        Command::Synth(s) => run_synth(cli, s),
        Command::Verify(args) => run_verify(args),
        Command::Eval { spec, input, output } => run_eval(spec, input, output),
        Command::Bestval { spec, input } => run_bestval(spec, input),
        Command::SolvePrefix {
            arena,
            measure,
            cmp,
            nu,
            lambda,
        } => run_solve_prefix(cli, arena, *measure, *cmp, nu, lambda.as_deref()),
        Command::DsumPath {
            arena,
            nu,
            lambda,
            strict,
        } => run_dsum_path(cli, arena, nu, lambda, *strict),
        Command::Gen(g) => run_gen(cli, g),
    }
}

fn finish(cli: &Cli, mut out: Outcome, elapsed: f64) -> Result<Exit, Failure> {
    if let Some(path) = &cli.output_file {
        let content = out.artifact.take().unwrap_or_default();
        fs::write(path, content).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        writeln!(out.text, "written: {}", path.display()).unwrap();
    }
    if cli.json {
        if cli.timings {
            out.report.timings = Some(BTreeMap::from([("total_ms", elapsed)]));
        }
        if !out.trace.is_empty() {
            eprint!("{}", out.trace);
        }
        println!("{}", serde_json::to_string_pretty(&out.report).expect("report serializes"));
    } else {
        print!("{}", out.text);
        if !out.trace.is_empty() {
            print!("{}", out.trace);
        }
        if let Some(artifact) = &out.artifact {
            print!("{artifact}");
        }
    }
    Ok(out.exit)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Usage } else { Exit::Yes };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let level = if cli.trace { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let start = Instant::now();
    let exit = run(&cli).and_then(|out| finish(&cli, out, start.elapsed().as_secs_f64() * 1000.0));
    match exit {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("wsynth: {}", f.message);
            ExitCode::from(f.exit as u8)
        }
    }
}
