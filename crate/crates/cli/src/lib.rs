//! Command-line front end for the `zdist` library.
//!
//! Reports go to `stdout` as pretty JSON; diagnostics and trace lines go to
//! `stderr`. [`run`] returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | satisfiable, valid, found or plain success |
//! | 1 | unsatisfiable or refuted (invalid witness, not an endomorphism) |
//! | 2 | unknown, or nothing found within the search bounds |
//! | 3 | unreadable or invalid input |
//! | 4 | internal invariant violation |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use zdist::brute::{verify_assignment, Verification};
use zdist::endo::{
    classify_endomorphism, is_endomorphism, reduce_template, search_periodic_endomorphism, Drift,
    EndoSearch, PeriodicMapSpec,
};
use zdist::io::{
    parse_assignment, parse_instance, parse_template, serialize_report, serialize_template,
    template_to_document, DecompositionEntry, Diagnostic, EndoReport, PolymorphismReport,
    ReportDocument,
};
use zdist::polymorphism::{
    check_two_decomposable, default_d_max, default_decomposition_window, default_window,
    find_modular_median_with, preserves_relation_within, Decomposability, Preservation,
    SearchOptions,
};
use zdist::solver::{solve_traced, Mode, Schedule, SolveOptions, Verdict};
use zdist::{Error, Instance, Template};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "zdist", version, about = "Distance constraint satisfaction over the integers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gaifman distances, connectivity, path lengths and stretch bound.
    Analyze { template: PathBuf },
    /// Decide an instance.
    Solve {
        template: PathBuf,
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = ScheduleArg::Fifo)]
        schedule: ScheduleArg,
        /// Print one line per proper replacement to stderr.
        #[arg(long)]
        trace: bool,
        /// Include propagation statistics in the report.
        #[arg(long)]
        stats: bool,
    },
    /// Check an assignment against an instance.
    Verify {
        template: PathBuf,
        instance: PathBuf,
        assignment: PathBuf,
    },
    /// Search for a modular-median polymorphism.
    Poly {
        template: PathBuf,
        #[arg(long)]
        max_d: Option<u64>,
        /// Window half-width used for every relation instead of the per-modulus default.
        #[arg(long)]
        window: Option<i64>,
        /// Randomized falsification trials per relation after the window passes.
        #[arg(long, default_value_t = 0)]
        trials: usize,
    },
    /// Periodic endomorphisms.
    Endo {
        #[command(subcommand)]
        command: EndoCommand,
    },
}

#[derive(Subcommand, Debug)]
enum EndoCommand {
    /// Check and classify a periodic map given as `p=..; values=..; drift=..`.
    Check {
        template: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Search for a non-isometric periodic endomorphism.
    Search {
        template: PathBuf,
        #[arg(long)]
        max_period: Option<usize>,
        #[arg(long)]
        value_window: Option<i64>,
        /// Restrict the drift; repeatable. Defaults to +1, -1, 0.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_drift)]
        drift: Vec<Drift>,
    },
    /// Restrict to multiples of `q` and rescale.
    Reduce {
        template: PathBuf,
        #[arg(long)]
        q: u64,
        /// Also write the reduced template document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Auto,
    Consistency,
    Brute,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScheduleArg {
    Fifo,
    Lifo,
}

fn parse_drift(s: &str) -> Result<Drift, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Diagnostic> for Failure {
    fn from(d: Diagnostic) -> Self {
        Failure::Input(d.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(ReportDocument, i32), Failure>;

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, stderr) {
        Ok((report, code)) => {
            if stdout.write_all(serialize_report(&report).as_bytes()).is_err() {
                return EXIT_INPUT;
            }
            code
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Internal(msg)) => {
            let _ = writeln!(stderr, "internal error: {msg}");
            EXIT_INTERNAL
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_template(path: &Path) -> Result<Template, Failure> {
    parse_template(&read(path)?).map_err(|d| located(path, d))
}

fn load_instance(path: &Path, t: &Template) -> Result<Instance, Failure> {
    parse_instance(&read(path)?, t).map_err(|d| located(path, d))
}

fn located(path: &Path, d: Diagnostic) -> Failure {
    Failure::Input(format!("{}: {d}", path.display()))
}

fn dispatch(command: Command, stderr: &mut dyn Write) -> Outcome {
    match command {
        Command::Analyze { template } => {
            let t = load_template(&template)?;
            let report = ReportDocument {
                analysis: Some(zdist::analysis::analyze(&t)?),
                ..Default::default()
            };
            Ok((report, EXIT_OK))
        }
        Command::Solve {
            template,
            instance,
            mode,
            schedule,
            trace,
            stats,
        } => {
            let t = load_template(&template)?;
            let inst = load_instance(&instance, &t)?;
            let opts = SolveOptions {
                mode: match mode {
                    ModeArg::Auto => Mode::Auto,
                    ModeArg::Consistency => Mode::Consistency,
                    ModeArg::Brute => Mode::Brute,
                },
                schedule: match schedule {
                    ScheduleArg::Fifo => Schedule::Fifo,
                    ScheduleArg::Lifo => Schedule::Lifo,
                },
                ..Default::default()
            };
            let mut emit = |r: &zdist::solver::Replacement| {
                if trace {
                    let _ = writeln!(stderr, "{r}");
                }
            };
            let outcome = match solve_traced(&inst, &t, &opts, &mut emit) {
                Ok(o) => o,
                Err(Error::SearchCap { estimate, cap }) => {
                    let report = ReportDocument::from_verdict(&Verdict::Unknown(format!(
                        "brute force refused (estimate {estimate} > cap {cap})"
                    )));
                    return Ok((report, EXIT_UNKNOWN));
                }
                Err(e) => return Err(e.into()),
            };
            let mut report = ReportDocument::from_verdict(&outcome.verdict);
            if stats {
                report.stats = Some(outcome.stats);
            }
            let code = match outcome.verdict {
                Verdict::Sat(_) => EXIT_OK,
                Verdict::Unsat => EXIT_NEGATIVE,
                Verdict::Unknown(_) => EXIT_UNKNOWN,
            };
            Ok((report, code))
        }
        Command::Verify {
            template,
            instance,
            assignment,
        } => {
            let t = load_template(&template)?;
            let inst = load_instance(&instance, &t)?;
            let a = parse_assignment(&read(&assignment)?).map_err(|d| located(&assignment, d))?;
            match verify_assignment(&inst, &t, &a)? {
                Verification::Valid => Ok((
                    ReportDocument::from_verdict(&Verdict::Sat(a)),
                    EXIT_OK,
                )),
                Verification::Violated { constraint } => Ok((
                    ReportDocument {
                        failing_constraint: Some(constraint),
                        reason: Some(format!("assignment violates constraint {constraint}")),
                        ..Default::default()
                    },
                    EXIT_NEGATIVE,
                )),
            }
        }
        Command::Poly {
            template,
            max_d,
            window,
            trials,
        } => {
            let t = load_template(&template)?;
            poly(&t, max_d, window, trials)
        }
        Command::Endo { command } => endo(command),
    }
}

fn poly(t: &Template, max_d: Option<u64>, window: Option<i64>, trials: usize) -> Outcome {
    let d_max = max_d.unwrap_or_else(|| default_d_max(t));
    if window.is_some_and(|w| w < 0) {
        return Err(Failure::Input("--window must be non-negative".into()));
    }
    let mut opts = SearchOptions::new(d_max);
    opts.window = window;
    opts.randomized_trials = trials;
    let found = find_modular_median_with(t, &opts);
    let mut report = PolymorphismReport {
        d_max,
        found: found.clone(),
        status: if trials > 0 {
            "window-verified+randomized".into()
        } else {
            "window-verified".into()
        },
        two_decomposable: Vec::new(),
        rejected: Vec::new(),
    };
    let code = match &found {
        Some(_) => {
            for rel in t.relations().iter().filter(|r| r.arity() >= 3) {
                let w = default_decomposition_window(rel);
                let entry = match check_two_decomposable(rel, w)? {
                    Decomposability::Vacuous => DecompositionEntry {
                        relation: rel.name().to_string(),
                        holds: true,
                        window: None,
                        witness: None,
                    },
                    Decomposability::Holds { window } => DecompositionEntry {
                        relation: rel.name().to_string(),
                        holds: true,
                        window: Some(window),
                        witness: None,
                    },
                    Decomposability::Fails { witness } => DecompositionEntry {
                        relation: rel.name().to_string(),
                        holds: false,
                        window: Some(w),
                        witness: Some(witness),
                    },
                };
                report.two_decomposable.push(entry);
            }
            EXIT_OK
        }
        None => {
            for d in 1..=d_max.max(1) {
                let violation = t.relations().iter().find_map(|rel| {
                    let w = window.unwrap_or_else(|| default_window(d, rel));
                    match preserves_relation_within(d, rel, w) {
                        Preservation::Violated(c) => Some(c),
                        Preservation::Preserved { .. } => None,
                    }
                });
                report.rejected.extend(violation);
            }
            EXIT_UNKNOWN
        }
    };
    Ok((
        ReportDocument {
            polymorphism: Some(report),
            ..Default::default()
        },
        code,
    ))
}

fn endo(command: EndoCommand) -> Outcome {
    match command {
        EndoCommand::Check { template, spec } => {
            let t = load_template(&template)?;
            let spec: PeriodicMapSpec = read(&spec)?
                .parse()
                .map_err(|e: Error| Failure::Input(e.to_string()))?;
            let text = spec.to_string();
            if let Some(v) = is_endomorphism(&spec, &t) {
                return Ok((
                    ReportDocument {
                        endomorphism: Some(EndoReport {
                            spec: text,
                            is_endomorphism: false,
                            classification: None,
                            violation: Some(v),
                        }),
                        ..Default::default()
                    },
                    EXIT_NEGATIVE,
                ));
            }
            let classification = classify_endomorphism(&spec, &t)?;
            Ok((
                ReportDocument {
                    endomorphism: Some(EndoReport {
                        spec: text,
                        is_endomorphism: true,
                        classification: Some(classification),
                        violation: None,
                    }),
                    ..Default::default()
                },
                EXIT_OK,
            ))
        }
        EndoCommand::Search {
            template,
            max_period,
            value_window,
            drift,
        } => {
            let t = load_template(&template)?;
            let mut opts = EndoSearch::defaults_for(&t);
            if let Some(p) = max_period {
                opts.max_period = p;
            }
            if let Some(w) = value_window {
                opts.value_window = w;
            }
            if !drift.is_empty() {
                opts.drifts = drift;
            }
            match search_periodic_endomorphism(&t, &opts) {
                Some(spec) => {
                    let classification = classify_endomorphism(&spec, &t)?;
                    Ok((
                        ReportDocument {
                            endomorphism: Some(EndoReport {
                                spec: spec.to_string(),
                                is_endomorphism: true,
                                classification: Some(classification),
                                violation: None,
                            }),
                            ..Default::default()
                        },
                        EXIT_OK,
                    ))
                }
                None => {
                    let drifts: Vec<String> = opts.drifts.iter().map(Drift::to_string).collect();
                    Ok((
                        ReportDocument {
                            reason: Some(format!(
                                "no non-isometric periodic endomorphism with period <= {}, values in [-{w}, {w}], drift in {{{}}}",
                                opts.max_period,
                                drifts.join(","),
                                w = opts.value_window,
                            )),
                            ..Default::default()
                        },
                        EXIT_UNKNOWN,
                    ))
                }
            }
        }
        EndoCommand::Reduce { template, q, out } => {
            let t = load_template(&template)?;
            let reduced = reduce_template(&t, q)?;
            if let Some(path) = out {
                fs::write(&path, serialize_template(&reduced))
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
            Ok((
                ReportDocument {
                    template: Some(template_to_document(&reduced)),
                    ..Default::default()
                },
                EXIT_OK,
            ))
        }
    }
}
