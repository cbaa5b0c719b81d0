//! Command-line front end. [`run_command`] does all the work so that tests
//! can drive it without a process.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use kfam_core::fdlogic::{build_counterexample, derives, parse_fds, semantic_entails_oracle, OracleBounds, OracleVerdict};
use kfam_core::realisability::{
    build_opg, classify_chordless_cycle, decompose_cycles, has_edge_cycle_cover, realisable_lp, realise, recombine,
};
use kfam_core::{ContextualFamily, Fd, GlobalVerdict, MonoidKind, MonoidValue, RuleSet};

pub mod format;

use format::{parse_document, serialize_family, FamilyError};

#[derive(Debug, Parser)]
#[command(name = "kfam", version, about = "Consistency, realisability and FD entailment for contextual families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a family file is locally consistent
    Check { family: PathBuf },
    /// Decide global consistency and print a witness relation
    Global {
        family: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the overlap projection graph of a family over a chordless cycle
    Opg {
        family: PathBuf,
        /// Write the graph in DOT format (`-` for standard output)
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Decide whether the family is the support of an N- or Q-family
    Realisable {
        family: PathBuf,
        #[arg(long)]
        monoid: Numeric,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build an N- or Q-family with the given support
    Realise {
        family: PathBuf,
        #[arg(long)]
        monoid: Numeric,
        /// Weight of each lifted cycle (chordless cycles only)
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write an N- or Q-family over a chordless cycle as a sum of cycles
    Decompose { family: PathBuf },
    /// Derive an FD with a proof system
    Derive {
        fds: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value = "full")]
        rules: RuleSet,
        #[arg(long)]
        trace: bool,
    },
    /// Search small Boolean families for a counterexample
    Entail {
        fds: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 2)]
        domain: usize,
        #[arg(long, default_value_t = 4)]
        max_rows: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build a family satisfying the FDs and violating the query
    Counterexample {
        fds: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value = "B")]
        monoid: MonoidKind,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    /// Cycle cover on chordless cycles, linear programming otherwise
    Auto,
    Cycle,
    Lp,
}

#[derive(Debug, Clone, Copy)]
struct Numeric(MonoidKind);

impl std::str::FromStr for Numeric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.parse::<MonoidKind>()? {
            MonoidKind::B => Err("realisation needs N or Q".into()),
            k => Ok(Numeric(k)),
        }
    }
}

pub const HOLDS: i32 = 0;
pub const REFUTED: i32 = 1;
pub const INPUT_ERROR: i32 = 2;

/// An input problem, reported on the error stream with exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Outcome = Result<i32, InputError>;

/// Runs `kfam` with `args` (program name first). The verdict is the first
/// line written to `out`.
pub fn run_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => HOLDS,
                _ => INPUT_ERROR,
            };
            let target: &mut dyn Write = if code == HOLDS { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            INPUT_ERROR
        }
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_family(path: &Path) -> Result<ContextualFamily, InputError> {
    let text = read(path)?;
    let doc = parse_document(&text).map_err(|d| InputError(format!("{}: {d}", path.display())))?;
    doc.validate().map_err(|e| match e {
        FamilyError::Inconsistent(v) => InputError(format!(
            "{}: not locally consistent\n{}",
            path.display(),
            v.join("\n")
        )),
        other => InputError(format!("{}: {other}", path.display())),
    })
}

fn load_fds(path: &Path) -> Result<Vec<Fd>, InputError> {
    parse_fds(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn parse_query(q: &str) -> Result<Fd, InputError> {
    q.parse::<Fd>().map_err(|e| InputError(format!("query `{q}`: {e}")))
}

/// Writes a family to `output`, or to `out` after the report.
fn emit(f: &ContextualFamily, output: Option<&Path>, out: &mut dyn Write) -> Result<(), InputError> {
    let text = serialize_family(f);
    match output {
        Some(p) => {
            fs::write(p, text).map_err(|e| InputError(format!("{}: {e}", p.display())))?;
            writeln!(out, "written to {}", p.display())?;
        }
        None => write!(out, "{text}")?,
    }
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Check { family } => check(&family, out),
        Command::Global { family, output } => {
            let f = load_family(&family)?;
            match f.check_global_consistency() {
                GlobalVerdict::Consistent(w) => {
                    writeln!(out, "globally consistent")?;
                    let witness = ContextualFamily::check_local_consistency(f.kind(), vec![w])?;
                    emit(&witness, output.as_deref(), out)?;
                    Ok(HOLDS)
                }
                GlobalVerdict::Inconsistent => {
                    writeln!(out, "globally inconsistent")?;
                    writeln!(
                        out,
                        "no {} relation over {} has every context as a marginal",
                        f.kind(),
                        f.contexts().vars()
                    )?;
                    Ok(REFUTED)
                }
            }
        }
        Command::Opg { family, dot } => {
            let f = load_family(&family)?;
            let ord = classify_chordless_cycle(f.contexts())?;
            let g = build_opg(&f.support(), &ord)?;
            let report = has_edge_cycle_cover(&g);
            writeln!(out, "{}", if report.covered { "edge cycle cover" } else { "no edge cycle cover" })?;
            writeln!(out, "ordering: {ord}")?;
            writeln!(out, "vertices: {}", g.vertices().len())?;
            writeln!(out, "edges: {}", g.edges().len())?;
            for &e in &report.uncovered {
                writeln!(out, "uncovered: {}", g.describe_edge(e))?;
            }
            match dot.as_deref() {
                Some(p) if p == Path::new("-") => write!(out, "{}", g.to_dot())?,
                Some(p) => fs::write(p, g.to_dot()).map_err(|e| InputError(format!("{}: {e}", p.display())))?,
                None => {}
            }
            Ok(if report.covered { HOLDS } else { REFUTED })
        }
        Command::Realisable {
            family,
            monoid: Numeric(kind),
            method,
            output,
        } => {
            let f = load_family(&family)?;
            let chordless = classify_chordless_cycle(f.contexts());
            let use_cycle = match method {
                Method::Auto => chordless.is_ok(),
                Method::Cycle => true,
                Method::Lp => false,
            };
            if use_cycle {
                let g = build_opg(&f.support(), &chordless?)?;
                let report = has_edge_cycle_cover(&g);
                let verdict = if report.covered { "realisable" } else { "not realisable" };
                writeln!(out, "{verdict} over {kind}")?;
                writeln!(out, "method: edge cycle cover")?;
                for &e in &report.uncovered {
                    writeln!(out, "uncovered: {}", g.describe_edge(e))?;
                }
                return Ok(if report.covered { HOLDS } else { REFUTED });
            }
            match realisable_lp(&f, kind)? {
                Some(w) => {
                    writeln!(out, "realisable over {kind}")?;
                    writeln!(out, "method: linear programming")?;
                    if let Some(p) = output.as_deref() {
                        emit(&w, Some(p), out)?;
                    }
                    Ok(HOLDS)
                }
                None => {
                    writeln!(out, "not realisable over {kind}")?;
                    writeln!(out, "method: linear programming")?;
                    Ok(REFUTED)
                }
            }
        }
        Command::Realise {
            family,
            monoid: Numeric(kind),
            weight,
            output,
        } => {
            let f = load_family(&family)?;
            let result = if classify_chordless_cycle(f.contexts()).is_ok() {
                let w = match &weight {
                    Some(w) => MonoidValue::parse(kind, w)?,
                    None => MonoidValue::one(kind),
                };
                match realise(&f, kind, &w) {
                    Ok(r) => Some(r),
                    Err(kfam_core::Error::UncoveredEdge(e)) => {
                        writeln!(out, "not realisable over {kind}")?;
                        writeln!(out, "uncovered: {e}")?;
                        return Ok(REFUTED);
                    }
                    Err(e) => return Err(e.into()),
                }
            } else {
                if weight.is_some() {
                    return Err(InputError("--weight applies to chordless-cycle context sets only".into()));
                }
                realisable_lp(&f, kind)?
            };
            match result {
                Some(r) => {
                    writeln!(out, "realised over {kind}")?;
                    emit(&r, output.as_deref(), out)?;
                    Ok(HOLDS)
                }
                None => {
                    writeln!(out, "not realisable over {kind}")?;
                    Ok(REFUTED)
                }
            }
        }
        Command::Decompose { family } => {
            let f = load_family(&family)?;
            let parts = decompose_cycles(&f)?;
            writeln!(out, "{} cycles", parts.len())?;
            for p in &parts {
                let rows: Vec<String> = p
                    .family
                    .relations()
                    .iter()
                    .flat_map(|r| r.support().into_iter().map(|s| s.to_string()).collect::<Vec<_>>())
                    .collect();
                writeln!(out, "{} x [{}]", p.weight, rows.join("; "))?;
            }
            let back = recombine(f.contexts(), f.kind(), &parts)?;
            if back != f {
                return Err(InputError("internal error: decomposition does not add up".into()));
            }
            Ok(HOLDS)
        }
        Command::Derive {
            fds,
            query,
            rules,
            trace,
        } => {
            let sigma = load_fds(&fds)?;
            let goal = parse_query(&query)?;
            let d = derives(&sigma, &goal, rules)?;
            let verdict = if d.derivable { "derivable" } else { "not derivable" };
            writeln!(out, "{verdict}: {goal} under {rules}")?;
            if let (true, Some(t)) = (trace, &d.trace) {
                write!(out, "{t}")?;
            }
            Ok(if d.derivable { HOLDS } else { REFUTED })
        }
        Command::Entail {
            fds,
            query,
            domain,
            max_rows,
            output,
        } => {
            let sigma = load_fds(&fds)?;
            let goal = parse_query(&query)?;
            match semantic_entails_oracle(&sigma, &goal, OracleBounds { domain, max_rows })? {
                OracleVerdict::Holds { conclusive: true } => {
                    writeln!(out, "entailed: {goal}")?;
                    writeln!(out, "no counterexample with {domain} values and {max_rows} rows; conclusive")?;
                    Ok(HOLDS)
                }
                OracleVerdict::Holds { conclusive: false } => {
                    writeln!(out, "entailed within bounds: {goal}")?;
                    writeln!(out, "no counterexample with {domain} values and {max_rows} rows; bounded only")?;
                    Ok(HOLDS)
                }
                OracleVerdict::Counterexample(f) => {
                    writeln!(out, "not entailed: {goal}")?;
                    emit(&f, output.as_deref(), out)?;
                    Ok(REFUTED)
                }
            }
        }
        Command::Counterexample {
            fds,
            query,
            monoid,
            output,
        } => {
            let sigma = load_fds(&fds)?;
            let goal = parse_query(&query)?;
            match build_counterexample(&sigma, &goal, monoid) {
                Ok(f) => {
                    writeln!(out, "counterexample: satisfies all {} premises, violates {goal}", sigma.len())?;
                    emit(&f, output.as_deref(), out)?;
                    Ok(HOLDS)
                }
                Err(kfam_core::Error::Derivable(_)) => {
                    writeln!(out, "no counterexample: {goal} is derivable")?;
                    Ok(REFUTED)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn check(path: &Path, out: &mut dyn Write) -> Outcome {
    let text = read(path)?;
    let doc = parse_document(&text).map_err(|d| InputError(format!("{}: {d}", path.display())))?;
    match doc.validate() {
        Ok(f) => {
            writeln!(out, "locally consistent")?;
            writeln!(
                out,
                "monoid {}, {} contexts, {} assignments",
                f.kind(),
                f.contexts().len(),
                f.assignment_count()
            )?;
            Ok(HOLDS)
        }
        Err(FamilyError::Inconsistent(v)) => {
            writeln!(out, "locally inconsistent")?;
            for line in v {
                writeln!(out, "{line}")?;
            }
            Ok(REFUTED)
        }
        Err(e) => Err(InputError(format!("{}: {e}", path.display()))),
    }
}
