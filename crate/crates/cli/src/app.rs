//! Subcommands of the `zap` binary.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use zap_core::augmented::DEFAULT_INSTANCE_CAP;
use zap_core::dimacs::{parse_dimacs, write_dimacs, Cnf, DimacsError};
use zap_core::encoders::{
    encode_cardinality, encode_clique_coloring, encode_parity, encode_parity_theory, encode_pigeonhole, encode_qprop,
    random_parity_theory, EncodeError, Encoded, ParityConstraint, ParityForm, Theory,
};
use zap_core::group::DEFAULT_ENUM_THRESHOLD;
use zap_core::oracle::{dpll_solve_with_budget, OracleError, DEFAULT_DPLL_BUDGET};
use zap_core::resolution::resolve_augmented_with;
use zap_core::solver::{rbl_solve, Heuristic, Outcome, SolverConfig, SolverError, DEFAULT_RELEVANCE};
use zap_core::{AugmentedClause, AugmentedError, Perm, PermError, PermGroup, ResolutionError, ResolventWitness};

use crate::formula::{parse_formula, FormulaError};
use crate::zapfile::{parse_zap, write_zap, ZapError, ZapFile};

pub const EXIT_UNKNOWN: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Zap(#[from] ZapError),
    #[error(transparent)]
    Dimacs(#[from] DimacsError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("formula {0}")]
    Formula(#[from] FormulaError),
    #[error("generator {text:?}: {source}")]
    Generator { text: String, source: PermError },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    Augmented(#[from] AugmentedError),
    #[error("{0} (raise --oracle-budget to allow it)")]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(name = "zap", version, about = "Satisfiability over clauses augmented with permutation groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide satisfiability; exit 10 if SAT, 20 if UNSAT.
    Solve(SolveArgs),
    /// Write every ground instance as DIMACS CNF.
    Expand(ExpandArgs),
    /// Write a ZapFile for a benchmark family.
    Encode(EncodeArgs),
    /// Compare the solver against a ground DPLL oracle; exit 0 on agreement, 1 otherwise.
    Check(CheckArgs),
    /// Resolve the two clauses of a file, canonically and under optional witness groups.
    Resolve(ResolveArgs),
    /// Report order, generators and orbits of each clause's group.
    Group(GroupArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    PosUnsat,
    First,
}

#[derive(Args, Debug, Clone)]
pub struct SolverFlags {
    /// Learned clauses are kept while some instance has at most this many unvalued literals.
    #[arg(long, default_value_t = DEFAULT_RELEVANCE)]
    pub relevance: usize,
    #[arg(long, value_enum, default_value_t = Branch::PosUnsat)]
    pub branch: Branch,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Group intersections below this many candidates are done by enumeration.
    #[arg(long, default_value_t = DEFAULT_ENUM_THRESHOLD)]
    pub enum_threshold: u64,
    /// Give up (result UNKNOWN, exit 0) after this many branches.
    #[arg(long)]
    pub max_branches: Option<u64>,
}

impl SolverFlags {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            relevance: self.relevance,
            heuristic: match self.branch {
                Branch::PosUnsat => Heuristic::PosUnsat,
                Branch::First => Heuristic::FirstUnassigned,
            },
            seed: self.seed,
            enum_threshold: self.enum_threshold,
            max_branches: self.max_branches,
            trace: false,
        }
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// ZapFile or DIMACS CNF; `-` reads standard input.
    pub path: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Print key=value statistics after the verdict.
    #[arg(long)]
    pub stats: bool,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    pub path: PathBuf,
    /// Refuse clauses with more ground instances than this.
    #[arg(long, default_value_t = DEFAULT_INSTANCE_CAP)]
    pub expansion_cap: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[command(subcommand)]
    pub family: Family,
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Family {
    /// holes+1 pigeons in `holes` holes.
    Pigeonhole {
        #[arg(long)]
        holes: usize,
    },
    /// A graph on `nodes` nodes with an (colors+1)-clique and a `colors`-coloring.
    Clique {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        colors: usize,
    },
    /// x1 + ... + x_vars >= at_least.
    Cardinality {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        at_least: usize,
    },
    /// x1 + ... + x_vars = rhs (mod 2).
    Parity {
        #[arg(long)]
        vars: usize,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        rhs: u8,
        /// Three-generator form instead of the flip-pair generators.
        #[arg(long)]
        compact: bool,
    },
    /// A quantified clause such as "a(x,y) | -b(y,z)" grounded over {0..domain-1}.
    Qprop {
        #[arg(long)]
        domain: usize,
        formula: String,
    },
    /// `constraints` random parity constraints over `vars` variables.
    RandomParity {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        constraints: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub path: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long, default_value_t = DEFAULT_INSTANCE_CAP)]
    pub expansion_cap: usize,
    /// Largest variable count the DPLL oracle accepts.
    #[arg(long, default_value_t = DEFAULT_DPLL_BUDGET)]
    pub oracle_budget: usize,
}

#[derive(Args, Debug)]
pub struct ResolveArgs {
    /// A ZapFile with exactly two clauses.
    pub path: PathBuf,
    /// Generator of the witness subgroup of the first clause's group (repeatable).
    #[arg(long = "h1")]
    pub h1: Vec<String>,
    /// Generator of the witness subgroup of the second clause's group (repeatable).
    #[arg(long = "h2")]
    pub h2: Vec<String>,
    /// Also resolve with trivial witness groups when no --h1/--h2 is given.
    #[arg(long)]
    pub trivial_witness: bool,
    #[arg(long, default_value_t = DEFAULT_ENUM_THRESHOLD)]
    pub enum_threshold: u64,
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    pub path: PathBuf,
    /// Also count instances of clauses with at most this many.
    #[arg(long, default_value_t = 100_000)]
    pub instance_cap: usize,
}

fn read_input(path: &Path) -> Result<String, CliError> {
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io_err)
    }
}

/// DIMACS CNF when the first non-comment line is `p cnf`, a ZapFile otherwise.
pub fn load_theory(text: &str) -> Result<Theory, CliError> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('c'));
    if first.is_some_and(|l| l.split_whitespace().nth(1) == Some("cnf")) {
        let cnf = parse_dimacs(text)?;
        let clauses = cnf.clauses.into_iter().map(|c| AugmentedClause::ground(c, cnf.num_vars)).collect();
        Ok(Theory { num_vars: cnf.num_vars, clauses })
    } else {
        Ok(parse_zap(text)?.to_theory())
    }
}

fn emit(out: &mut dyn Write, dest: Option<&Path>, text: &str) -> Result<(), CliError> {
    match dest {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn verdict_name(o: &Outcome) -> &'static str {
    match o {
        Outcome::Sat(_) => "SAT",
        Outcome::Unsat => "UNSAT",
    }
}

/// Runs one command, writing its report to `out`, and returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Expand(a) => expand(a, out),
        Command::Encode(a) => encode(a, out),
        Command::Check(a) => check(a, out),
        Command::Resolve(a) => resolve(a, out),
        Command::Group(a) => group(a, out),
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let t = load_theory(&read_input(&a.path)?)?;
    let mut report = String::new();
    let code = match rbl_solve(t.num_vars, &t.clauses, a.solver.config()) {
        Ok((outcome, stats)) => {
            let code = match &outcome {
                Outcome::Sat(model) => {
                    report.push_str("s SATISFIABLE\nv");
                    for (i, &b) in model.iter().enumerate() {
                        let v = i as i64 + 1;
                        write!(report, " {}", if b { v } else { -v }).unwrap();
                    }
                    report.push_str(" 0\n");
                    EXIT_SAT
                }
                Outcome::Unsat => {
                    report.push_str("s UNSATISFIABLE\n");
                    EXIT_UNSAT
                }
            };
            if a.stats {
                writeln!(report, "{stats}").unwrap();
            }
            code
        }
        Err(SolverError::BranchBudget(max)) => {
            writeln!(report, "s UNKNOWN\nc branch budget of {max} exhausted").unwrap();
            EXIT_UNKNOWN
        }
        Err(e) => return Err(e.into()),
    };
    emit(out, None, &report)?;
    Ok(code)
}

fn expand(a: ExpandArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let t = load_theory(&read_input(&a.path)?)?;
    let clauses = t.expand(a.expansion_cap)?.into_iter().collect();
    emit(out, a.output.as_deref(), &write_dimacs(&Cnf { num_vars: t.num_vars, clauses }))?;
    Ok(0)
}

fn single(e: Encoded) -> Theory {
    Theory { num_vars: e.clause.n(), clauses: vec![e.clause] }
}

fn parity_comment(c: &ParityConstraint) -> String {
    let lhs: Vec<String> = c.vars.iter().map(|v| format!("x{v}")).collect();
    format!("{} = {} (mod 2)", lhs.join(" + "), u8::from(c.rhs))
}

fn encode(a: EncodeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (theory, comments) = match a.family {
        Family::Pigeonhole { holes } => (
            encode_pigeonhole(holes)?,
            vec![format!("pigeonhole: {} pigeons, {holes} holes; p_ij = (i-1)*{holes} + j", holes + 1)],
        ),
        Family::Clique { nodes, colors } => (
            encode_clique_coloring(nodes, colors)?,
            vec![format!("clique-coloring: {nodes} nodes, {colors} colors, clique of {}", colors + 1)],
        ),
        Family::Cardinality { vars, at_least } => {
            (single(encode_cardinality(vars, at_least)?), vec![format!("x1 + ... + x{vars} >= {at_least}")])
        }
        Family::Parity { vars, rhs, compact } => {
            let c = ParityConstraint::new((1..=vars).collect(), rhs == 1);
            let form = if compact { ParityForm::Compact } else { ParityForm::FlipPairs };
            (single(encode_parity(&c, vars, form)?), vec![parity_comment(&c)])
        }
        Family::Qprop { domain, formula } => {
            let q = parse_formula(&formula, domain)?;
            let mut comments = vec![format!("forall: {formula} over domain {{0..{}}}", domain.saturating_sub(1))];
            let mut first = 1;
            for (name, doms) in &q.relations {
                let count: usize = doms.iter().product();
                comments.push(format!("{name}: atoms {first}..{} in row-major argument order", first + count - 1));
                first += count;
            }
            (single(encode_qprop(&q)?), comments)
        }
        Family::RandomParity { vars, constraints, seed } => {
            let cs = random_parity_theory(vars, constraints, seed);
            let t = encode_parity_theory(&cs, vars, ParityForm::FlipPairs)?;
            (t, cs.iter().map(parity_comment).collect())
        }
    };
    let mut file = ZapFile::from_theory(&theory);
    file.comments = comments;
    emit(out, a.output.as_deref(), &write_zap(&file))?;
    Ok(0)
}

fn check(a: CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let t = load_theory(&read_input(&a.path)?)?;
    let ground = t.ground_theory(a.expansion_cap)?;
    let oracle = dpll_solve_with_budget(&ground, a.oracle_budget)?;
    let config = a.solver.config();
    let (augmented, _) = rbl_solve(t.num_vars, &t.clauses, config.clone())?;
    let expanded: Vec<AugmentedClause> =
        t.expand(a.expansion_cap)?.into_iter().map(|c| AugmentedClause::ground(c, t.num_vars)).collect();
    let (flat, _) = rbl_solve(t.num_vars, &expanded, config)?;
    let mut report = String::new();
    let mut ok = true;
    for (name, o) in [("augmented", &augmented), ("expanded", &flat)] {
        write!(report, "{name}={}", verdict_name(o)).unwrap();
        if let Outcome::Sat(model) = o {
            let valid = ground.satisfied_by(model);
            write!(report, " model={}", if valid { "valid" } else { "INVALID" }).unwrap();
            ok &= valid;
        }
        report.push('\n');
        ok &= o.is_sat() == oracle.is_sat();
    }
    writeln!(report, "oracle={}", if oracle.is_sat() { "SAT" } else { "UNSAT" }).unwrap();
    writeln!(report, "agree={}", if ok { "yes" } else { "no" }).unwrap();
    emit(out, None, &report)?;
    Ok(if ok { 0 } else { EXIT_MISMATCH })
}

fn witness_group(n: usize, gens: &[String]) -> Result<PermGroup, CliError> {
    let perms = gens
        .iter()
        .map(|s| Perm::parse(s, n).map_err(|source| CliError::Generator { text: s.clone(), source }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PermGroup::new(n, perms))
}

fn resolve(a: ResolveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let t = load_theory(&read_input(&a.path)?)?;
    let [c1, c2] = t.clauses.as_slice() else {
        return Err(CliError::Usage(format!("resolve needs exactly two clauses, found {}", t.clauses.len())));
    };
    let mut resolvents = vec![("canonical resolvent", resolve_augmented_with(c1, c2, None, a.enum_threshold)?)];
    if !a.h1.is_empty() || !a.h2.is_empty() || a.trivial_witness {
        let w = ResolventWitness::new(witness_group(t.num_vars, &a.h1)?, witness_group(t.num_vars, &a.h2)?);
        resolvents.push(("witness resolvent", resolve_augmented_with(c1, c2, Some(&w), a.enum_threshold)?));
    }
    let comments = resolvents
        .iter()
        .enumerate()
        .map(|(i, (label, r))| format!("clause {}: {label}, group order {}", i + 1, r.group().order()))
        .collect();
    let file = ZapFile::from_theory(&Theory {
        num_vars: t.num_vars,
        clauses: resolvents.into_iter().map(|(_, r)| r).collect(),
    });
    emit(out, None, &write_zap(&ZapFile { comments, ..file }))?;
    Ok(0)
}

fn group(a: GroupArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let t = load_theory(&read_input(&a.path)?)?;
    let mut report = String::new();
    for (i, c) in t.clauses.iter().enumerate() {
        let g = c.group();
        let base: Vec<String> = c.base().to_dimacs().iter().map(i32::to_string).collect();
        writeln!(report, "clause {}: {} 0", i + 1, base.join(" ")).unwrap();
        writeln!(report, "order={}", g.order()).unwrap();
        writeln!(report, "generators={}", g.generators().len()).unwrap();
        let orbits: Vec<String> = g
            .orbits()
            .iter()
            .map(|o| format!("{{{}}}", o.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")))
            .collect();
        writeln!(report, "orbits={}", orbits.join(" ")).unwrap();
        match c.instance_count(a.instance_cap) {
            Ok(k) => writeln!(report, "instances={k}").unwrap(),
            Err(_) => writeln!(report, "instances=>{}", a.instance_cap).unwrap(),
        }
    }
    emit(out, None, &report)?;
    Ok(0)
}
