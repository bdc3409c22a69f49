use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wres_core::axioms::AxiomOracle;
use wres_core::cnf::{Assignment, Clause, CnfFormula, Mode};
use wres_core::dimacs::{emit_dimacs, parse_dimacs};
use wres_core::families::{self, FamilySpec};
use wres_core::proof::check;
use wres_core::prover::{prove_with, ProveOutcome, ProverError, Strategy};
use wres_core::reduction::derive_reduction;
use wres_core::semantic::{self, Budget, GammaFamily, SemanticError, Verdict};
use wres_core::trace::{emit_proof, parse_proof};

const EXIT_REFUTED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "wres", version, about = "Parameterized Resolution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a formula family as DIMACS
    Gen(GenArgs),
    /// Check a proof trace against a formula
    Check(CheckArgs),
    /// Build a tree-like refutation or find a counterexample
    Prove(ProveArgs),
    /// Exhaustive semantic checks
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Emit the derivation of the substituted embedded formula from P_{n,k}
    Reduce(ReduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Theta,
    Theta3,
    Psi,
    Php,
    Pnk,
    EmbedW1,
    PsiEmbedded,
}

#[derive(Args)]
struct GenArgs {
    family: Family,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Source formula for embed-w1
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Plain,
    W1,
    W2,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long, value_enum, default_value = "plain")]
    mode: ModeArg,
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[arg(long)]
    proof: PathBuf,
    #[command(flatten)]
    system: SystemArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    #[value(alias = "positive-branching")]
    Positive,
    Theta3,
    Enumeration,
}

#[derive(Args)]
struct ProveArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum, default_value = "enumeration")]
    strategy: StrategyArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Cap on total assignments (default 2^22, or WRES_BUDGET)
    #[arg(long)]
    budget: Option<u64>,
    /// Cap on weighted combinations
    #[arg(long)]
    combinations: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        let mut b = Budget::from_env();
        if let Some(t) = self.budget {
            b.total = t;
        }
        if let Some(c) = self.combinations {
            b.combinations = c;
        }
        b.jobs = self.jobs.max(1);
        b
    }
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// No satisfying assignment of weight exactly k
    Wpcon {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// No satisfying assignment of weight at most k
    Pcon {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// No satisfying assignment at all
    Unsat {
        #[arg(long)]
        cnf: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Every clause of gamma is needed to make the formula unsatisfiable
    Necessity(NecessityArgs),
}

#[derive(Args)]
struct NecessityArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[arg(long)]
    k: usize,
    /// `theta`, `psi`, or a DIMACS file listing the clauses
    #[arg(long)]
    gamma: String,
    /// Context axioms; defaults to w2 for theta and w1 for psi, none for files
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Print the report as JSON
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

fn malformed(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, msg: msg.into() }
}

impl From<SemanticError> for Failure {
    fn from(e: SemanticError) -> Failure {
        usage(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn read_cnf(path: &Path) -> Result<CnfFormula, Failure> {
    parse_dimacs(&read(path)?).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

/// Writes to `out`, or to stdout when absent. Returns whether stdout was used.
fn write_out(out: Option<&Path>, text: &str) -> Result<bool, Failure> {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            Ok(false)
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| usage(e.to_string()))?;
            Ok(true)
        }
    }
}

/// Prints report lines to stdout, or stderr if stdout carries file output.
fn report(to_stderr: bool, lines: &[String]) {
    for l in lines {
        if to_stderr {
            eprintln!("{l}");
        } else {
            println!("{l}");
        }
    }
}

fn oracle_for(sys: &SystemArgs, f: &CnfFormula) -> Result<Option<AxiomOracle>, Failure> {
    let mode = match sys.mode {
        ModeArg::Plain => return Ok(None),
        ModeArg::W1 => Mode::W1,
        ModeArg::W2 => Mode::W2,
    };
    let k = sys.k.ok_or_else(|| usage(format!("--mode {mode} requires --k")))?;
    Ok(Some(AxiomOracle::new(f.num_vars(), k, mode)))
}

fn dimacs_line(a: &Assignment) -> String {
    a.to_dimacs().iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

fn need(v: Option<usize>, flag: &str, family: &str) -> Result<usize, Failure> {
    v.ok_or_else(|| usage(format!("{family} requires --{flag}")))
}

fn cmd_gen(a: &GenArgs) -> Outcome {
    let spec = match a.family {
        Family::Theta => FamilySpec::Theta { m: need(a.m, "m", "theta")?, k: need(a.k, "k", "theta")? },
        Family::Theta3 => FamilySpec::Theta3 { m: need(a.m, "m", "theta3")?, k: need(a.k, "k", "theta3")? },
        Family::Psi => FamilySpec::Psi { n: need(a.n, "n", "psi")?, k: a.k },
        Family::Php => FamilySpec::Php { n: need(a.n, "n", "php")? },
        Family::Pnk => FamilySpec::Pnk { n: need(a.n, "n", "pnk")?, k: need(a.k, "k", "pnk")? },
        Family::PsiEmbedded => {
            FamilySpec::PsiEmbedded { n: need(a.n, "n", "psi-embedded")?, k: need(a.k, "k", "psi-embedded")? }
        }
        Family::EmbedW1 => {
            let src = a.input.as_deref().ok_or_else(|| usage("embed-w1 requires --in"))?;
            let k = need(a.k, "k", "embed-w1")?;
            let f = families::embed_w1(&read_cnf(src)?, k).map_err(|e| usage(e.to_string()))?;
            return emit_formula(&f, a.out.as_deref());
        }
    };
    let f = spec.generate().map_err(|e| usage(e.to_string()))?;
    emit_formula(&f, a.out.as_deref())
}

fn emit_formula(f: &CnfFormula, out: Option<&Path>) -> Outcome {
    let stdout = write_out(out, &emit_dimacs(f))?;
    report(stdout, &[format!("RESULT gen vars={} clauses={}", f.num_vars(), f.len())]);
    Ok(0)
}

fn cmd_check(a: &CheckArgs) -> Outcome {
    let f = read_cnf(&a.cnf)?;
    let proof = parse_proof(&read(&a.proof)?).map_err(|e| malformed(format!("{}: {e}", a.proof.display())))?;
    let oracle = oracle_for(&a.system, &f)?;
    match check(&proof, &f, oracle.as_ref()) {
        Ok(r) => {
            println!("RESULT check valid size={} steps={}", r.size, r.total_steps);
            println!("OK size={}", r.size);
            Ok(0)
        }
        Err(e) => {
            println!("RESULT check invalid step={} reason={}", e.step, e.reason);
            println!("FAIL {e}");
            Ok(EXIT_REFUTED)
        }
    }
}

fn cmd_prove(a: &ProveArgs) -> Outcome {
    let f = read_cnf(&a.cnf)?;
    let oracle = oracle_for(&a.system, &f)?;
    let strategy = match a.strategy {
        StrategyArg::Positive => Strategy::PositiveBranching,
        StrategyArg::Theta3 => Strategy::Theta3,
        StrategyArg::Enumeration => Strategy::Enumeration,
    };
    match prove_with(&f, oracle.as_ref(), strategy) {
        Ok(ProveOutcome::Refuted(r)) => {
            let stdout = write_out(a.out.as_deref(), &emit_proof(&r.proof))?;
            report(
                stdout,
                &[
                    format!("RESULT prove refuted leaves={} nodes={} size={}", r.leaves, r.nodes, r.size),
                    format!("strategy {strategy}: {} leaves, {} tree nodes, proof size {}", r.leaves, r.nodes, r.size),
                ],
            );
            Ok(0)
        }
        Ok(ProveOutcome::Counterexample(w)) => {
            println!("RESULT prove counterexample weight={}", w.weight());
            println!("witness {}", dimacs_line(&w));
            Ok(EXIT_REFUTED)
        }
        Err(e @ ProverError::InvalidInput(_)) => Err(usage(e.to_string())),
        Err(e) => Err(Failure { code: EXIT_REFUTED, msg: e.to_string() }),
    }
}

fn print_verdict(kind: &str, v: &Verdict) -> u8 {
    match v {
        Verdict::Holds => {
            println!("RESULT {kind} holds");
            0
        }
        Verdict::Witness(w) => {
            println!("RESULT {kind} refuted weight={}", w.weight());
            println!("witness {}", dimacs_line(w));
            EXIT_REFUTED
        }
    }
}

fn gamma_family(name: &str, f: &CnfFormula, k: usize) -> Result<Option<GammaFamily>, Failure> {
    let n = f.num_vars() as usize;
    match name {
        "theta" => {
            if !n.is_multiple_of(k + 1) {
                return Err(usage(format!("{n} variables do not split into {} theta rows", k + 1)));
            }
            Ok(Some(GammaFamily::Theta { m: n / (k + 1), k }))
        }
        "psi" => Ok(Some(GammaFamily::Psi { n, k })),
        _ => Ok(None),
    }
}

fn cmd_necessity(a: &NecessityArgs) -> Outcome {
    let f = read_cnf(&a.cnf)?;
    let budget = a.budget.budget();
    let (gamma, default_ctx): (Vec<Clause>, Option<AxiomOracle>) = match gamma_family(&a.gamma, &f, a.k)? {
        Some(fam) => (semantic::gamma_for(fam)?, Some(fam.context())),
        None => (read_cnf(Path::new(&a.gamma))?.clauses().to_vec(), None),
    };
    let n = f.num_vars();
    let ctx = match a.mode {
        None => default_ctx,
        Some(ModeArg::Plain) => None,
        Some(ModeArg::W1) => Some(AxiomOracle::new(n, a.k as u32, Mode::W1)),
        Some(ModeArg::W2) => Some(AxiomOracle::new(n, a.k as u32, Mode::W2)),
    };
    let r = semantic::verify_necessity(&f, &gamma, ctx.as_ref(), &budget)?;
    let verdict = if r.all_necessary { "holds" } else { "refuted" };
    println!("RESULT necessity {verdict} necessary={} total={}", r.necessary_count(), r.entries.len());
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
    } else {
        println!("{}/{} necessary", r.necessary_count(), r.entries.len());
        for e in &r.entries {
            let clause = e.clause.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
            match &e.witness {
                Some(w) => {
                    let w = w.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
                    println!("gamma {} [{clause}] necessary witness {w}", e.index + 1);
                }
                None => println!("gamma {} [{clause}] redundant", e.index + 1),
            }
        }
    }
    Ok(if r.all_necessary { 0 } else { EXIT_REFUTED })
}

fn cmd_verify(v: &VerifyCommand) -> Outcome {
    match v {
        VerifyCommand::Wpcon { cnf, k, budget } => {
            let f = read_cnf(cnf)?;
            Ok(print_verdict("wpcon", &semantic::is_wpcon(&f, *k, &budget.budget())?))
        }
        VerifyCommand::Pcon { cnf, k, budget } => {
            let f = read_cnf(cnf)?;
            Ok(print_verdict("pcon", &semantic::is_pcon(&f, *k, &budget.budget())?))
        }
        VerifyCommand::Unsat { cnf, budget } => {
            let f = read_cnf(cnf)?;
            Ok(print_verdict("unsat", &semantic::is_unsat(&f, &budget.budget())?))
        }
        VerifyCommand::Necessity(a) => cmd_necessity(a),
    }
}

fn cmd_reduce(a: &ReduceArgs) -> Outcome {
    let r = derive_reduction(a.n, a.k).map_err(|e| usage(e.to_string()))?;
    let stdout = write_out(a.out.as_deref(), &emit_proof(&r.proof))?;
    let max = r.per_target_steps.iter().copied().max().unwrap_or(0);
    let mut lines = vec![
        format!(
            "RESULT reduce targets={} steps={} max-per-target={max}",
            r.per_target_steps.len(),
            r.proof.steps.len()
        ),
    ];
    let per: Vec<String> = r.per_target_steps.iter().map(usize::to_string).collect();
    lines.push(format!("per-target steps {}", per.join(" ")));
    report(stdout, &lines);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Check(a) => cmd_check(a),
        Command::Prove(a) => cmd_prove(a),
        Command::Verify(v) => cmd_verify(v),
        Command::Reduce(a) => cmd_reduce(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
