//! `lingo`: evaluate lingos, check properties and run attack scenarios.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dialects_core::malleability::{commuting_recipe, nonzero_nat_sampler, xor_recipe, xor_sharp_recipe};
use dialects_core::selftest::selftest;
use dialects_core::{param_for, parse_lingo, verify_malleability, Lingo, Parameter, Recipe, SecretSeed, Value};
use dialects_sim::{attack_table, render, run_with_traces, Scenario};

const EXIT_CONFIG: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

#[derive(Parser)]
#[command(name = "lingo", version, about = "Protocol dialect lingos and attack simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply f or g of a lingo, or run its compliance check.
    Eval(EvalArgs),
    /// Compliance (and authentication) check of a wire value.
    Check(CheckArgs),
    /// Estimate whether a recipe forges genuine encodings.
    Malleability(MalleabilityArgs),
    /// Run a scenario file and write its report.
    Run(RunArgs),
    /// Run every scenario in a directory and tabulate attacker acceptance.
    Table(TableArgs),
    /// Sampled checks of the lingo laws over the shipped lingos.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    F,
    G,
    Check,
}

#[derive(Args)]
struct ParamArgs {
    /// Parameter literal, e.g. `5`, `[3,4]` or `2:7` for branch 2.
    #[arg(long, conflicts_with_all = ["n", "seed"])]
    a: Option<String>,
    /// Message number to derive the parameter for (needs --seed).
    #[arg(long, requires = "seed")]
    n: Option<u64>,
    /// Shared secret as hex, at least 16 bytes.
    #[arg(long, requires = "n")]
    seed: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Lingo spec, e.g. `dnc` or `hor(xorbseq,dnc;bias=1,5)`.
    #[arg(long)]
    spec: String,
    #[arg(long, value_enum)]
    op: Op,
    /// Input value for f: decimal, `width:value`, `[x,y]` or wire JSON.
    #[arg(long)]
    d1: Option<String>,
    /// Wire value for g and check.
    #[arg(long)]
    d2: Option<String>,
    #[command(flatten)]
    param: ParamArgs,
    /// Print results as wire JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    spec: String,
    #[arg(long)]
    d2: String,
    #[command(flatten)]
    param: ParamArgs,
}

#[derive(Args)]
struct MalleabilityArgs {
    #[arg(long)]
    spec: String,
    /// `xor`, `xor-sharp` or `commuting`.
    #[arg(long)]
    recipe: String,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Sampling seed (decimal).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-trial JSON-lines traces.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Overrides the scenario's trial count.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct TableArgs {
    /// Directory of scenario files (or a single file).
    #[arg(long)]
    scenario: PathBuf,
    /// JSON rows destination.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 2_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Failure {
    code: u8,
    message: String,
}

fn config(e: impl Display) -> Failure {
    Failure { code: EXIT_CONFIG, message: e.to_string() }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => eval(a),
        Command::Check(a) => check(a),
        Command::Malleability(a) => malleability(a),
        Command::Run(a) => run(a),
        Command::Table(a) => table(a),
        Command::Selftest(a) => run_selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn parameter(lingo: &Lingo, p: &ParamArgs) -> Result<Parameter, Failure> {
    match (&p.a, p.n, &p.seed) {
        (Some(text), _, _) => {
            let a = Parameter::parse_literal(text).map_err(config)?;
            if !lingo.param_domain().contains(&a) {
                return Err(config(format!("parameter {a} is not valid for {}", lingo.id())));
            }
            Ok(a)
        }
        (None, Some(n), Some(seed)) => Ok(param_for(lingo, &SecretSeed::from_hex(seed).map_err(config)?, n)),
        _ => Err(config("give a parameter with --a, or --n with --seed")),
    }
}

fn value_in(text: Option<&String>, flag: &str, domain: &dialects_core::Domain) -> Result<Value, Failure> {
    let text = text.ok_or_else(|| config(format!("--{flag} is required for this operation")))?;
    domain.coerce(Value::parse_literal(text).map_err(config)?).map_err(config)
}

fn compliant(lingo: &Lingo, d2: &Value, a: &Parameter) -> bool {
    let shape = lingo.d2().contains(d2);
    let checked = !lingo.is_f_checkable() || lingo.check_compliance(d2, a).unwrap_or(false);
    let authentic = lingo.as_auth().is_none_or(|auth| auth.auth_check(d2, a).unwrap_or(false));
    shape && checked && authentic
}

fn eval(args: EvalArgs) -> Outcome {
    let lingo = parse_lingo(&args.spec).map_err(config)?;
    let a = parameter(&lingo, &args.param)?;
    let show = |v: Value| {
        if args.json {
            println!("{}", v.to_json());
        } else {
            println!("{v}");
        }
    };
    match args.op {
        Op::F => show(lingo.apply_f(&value_in(args.d1.as_ref(), "d1", lingo.d1())?, &a).map_err(config)?),
        Op::G => show(lingo.apply_g(&value_in(args.d2.as_ref(), "d2", lingo.d2())?, &a).map_err(config)?),
        Op::Check => println!("{}", compliant(&lingo, &value_in(args.d2.as_ref(), "d2", lingo.d2())?, &a)),
    }
    Ok(())
}

fn check(args: CheckArgs) -> Outcome {
    let lingo = parse_lingo(&args.spec).map_err(config)?;
    let a = parameter(&lingo, &args.param)?;
    println!("{}", compliant(&lingo, &value_in(Some(&args.d2), "d2", lingo.d2())?, &a));
    Ok(())
}

fn recipe(name: &str, lingo: &Lingo) -> Result<Recipe, Failure> {
    let width = || -> Result<u32, Failure> {
        match lingo.d1() {
            dialects_core::Domain::BitVecs(w) => Ok(*w),
            d => Err(config(format!("recipe {name} needs a bit-vector lingo, not {d}"))),
        }
    };
    match name {
        "xor" => xor_recipe(width()?).map_err(config),
        "xor-sharp" => xor_sharp_recipe(width()?).map_err(config),
        "commuting" => commuting_recipe(lingo, nonzero_nat_sampler).map_err(config),
        other => Err(config(format!("unknown recipe {other:?}; expected xor, xor-sharp or commuting"))),
    }
}

fn malleability(args: MalleabilityArgs) -> Outcome {
    let lingo = parse_lingo(&args.spec).map_err(config)?;
    let r = recipe(&args.recipe, &lingo)?;
    let report = verify_malleability(&lingo, &r, args.samples, args.seed).map_err(config)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn load(path: &Path, trials: Option<u64>) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    let mut s = Scenario::from_json(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
    if let Some(t) = trials {
        s.trials = t;
        s.validate().map_err(config)?;
    }
    Ok(s)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| config(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(args: RunArgs) -> Outcome {
    let s = load(&args.scenario, args.trials)?;
    let report = run_with_traces(&s, args.trace.as_deref()).map_err(config)?;
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&report).expect("report serializes"))
}

fn table(args: TableArgs) -> Outcome {
    let paths = if args.scenario.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(&args.scenario)
            .map_err(|e| config(format!("{}: {e}", args.scenario.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        v.sort();
        v
    } else {
        vec![args.scenario.clone()]
    };
    if paths.is_empty() {
        return Err(config(format!("no scenario files in {}", args.scenario.display())));
    }
    let scenarios = paths.iter().map(|p| load(p, args.trials)).collect::<Result<Vec<_>, _>>()?;
    let rows = attack_table(&scenarios).map_err(config)?;
    print!("{}", render(&rows));
    if let Some(out) = &args.out {
        write_or_print(Some(out), &serde_json::to_string_pretty(&rows).expect("rows serialize"))?;
    }
    Ok(())
}

fn run_selftest(args: SelftestArgs) -> Outcome {
    let checks = selftest(args.samples, args.seed);
    let failed = checks.iter().filter(|c| !c.ok()).count();
    for c in &checks {
        println!("{} {}/{}  {}", if c.ok() { "ok  " } else { "FAIL" }, c.passed, c.total, c.name);
    }
    println!("{} checks, {failed} failed", checks.len());
    if failed > 0 {
        return Err(Failure { code: EXIT_SELFTEST, message: format!("{failed} checks failed") });
    }
    Ok(())
}
