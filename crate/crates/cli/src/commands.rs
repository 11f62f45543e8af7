use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use gmaxent_core::com::validate_povm;
use gmaxent_core::lattice::{includes, join, meet_counted};
use gmaxent_core::maxent::{oracle_maxent, solve, OracleOutcome};
use gmaxent_core::{Error as CoreError, State};

use crate::assemble::{self, Built};
use crate::error::{exit, CliError};
use crate::report::{Comparison, LeqReport, OracleReport, OracleStatus, RegionReport, SolutionReport};
use crate::schema::{parse_problem, to_json, ProblemFile};

#[derive(Debug, Parser)]
#[command(
    name = "gmaxent",
    version,
    about = "Maximum-entropy inference over convex operational models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Dual gradient tolerance, overriding the problem file.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Newton iteration budget, overriding the problem file.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Seed recorded in the report, overriding the problem file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every declared object and condition.
    Validate { path: PathBuf },
    /// Solve the MaxEnt problem and print a solution report.
    Solve { path: PathBuf },
    /// Meet, join or compare the regions of two problem files.
    Lattice {
        #[arg(value_enum)]
        op: LatticeOp,
        a: PathBuf,
        b: PathBuf,
    },
    /// Brute-force grid search for small instances.
    Oracle {
        path: PathBuf,
        /// Grid resolution, overriding the problem file.
        #[arg(long)]
        resolution: Option<f64>,
        /// Also run the solver and report the entropy difference.
        #[arg(long)]
        compare: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LatticeOp {
    Meet,
    Join,
    /// Whether the first region is contained in the second.
    Leq,
}

/// Text to emit and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

pub fn load(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Validate { path } => validate(&load(path)?),
        Command::Solve { path } => {
            let built = configured(cli, &load(path)?)?;
            let report = solve_report(&built)?;
            Ok(Output {
                code: report.status.exit_code(),
                text: to_json(&report),
            })
        }
        Command::Lattice { op, a, b } => lattice(*op, &load(a)?, &load(b)?),
        Command::Oracle {
            path,
            resolution,
            compare,
        } => {
            let mut built = configured(cli, &load(path)?)?;
            if let Some(r) = resolution {
                built.resolution = *r;
            }
            oracle(&built, *compare)
        }
    }
}

fn configured(cli: &Cli, file: &ProblemFile) -> Result<Built, CliError> {
    let mut built = assemble::build(file)?;
    if let Some(t) = cli.tolerance {
        built.tolerances.dual_gradient = t;
    }
    if let Some(n) = cli.max_iter {
        built.tolerances.dual_max_iter = n;
    }
    if cli.seed.is_some() {
        built.seed = cli.seed;
    }
    Ok(built)
}

pub fn solve_report(built: &Built) -> Result<SolutionReport, CliError> {
    let problem = built.problem()?;
    let start = Instant::now();
    let sol = solve(&problem)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    log::info!(
        "{:?} after {} iterations in {elapsed:.3} ms",
        sol.status,
        sol.iterations
    );
    SolutionReport::new(&sol, elapsed, built.seed)
}

fn lattice(op: LatticeOp, a: &ProblemFile, b: &ProblemFile) -> Result<Output, CliError> {
    let a = assemble::declare(a)?;
    let b = assemble::declare(b)?;
    let text = match op {
        LatticeOp::Meet => {
            let (region, dups) = meet_counted(&a.region, &b.region)?;
            to_json(&RegionReport::new(&region, dups)?)
        }
        LatticeOp::Join => to_json(&RegionReport::new(&join(&a.region, &b.region)?, 0)?),
        LatticeOp::Leq => to_json(&LeqReport {
            leq: includes(&b.region, &a.region)?,
        }),
    };
    Ok(Output { text, code: exit::OK })
}

fn oracle(built: &Built, compare: bool) -> Result<Output, CliError> {
    let problem = built.problem()?;
    let outcome = match oracle_maxent(&problem, built.resolution) {
        Err(CoreError::Unsupported(msg)) => return Err(CliError::OracleUnsupported(msg)),
        other => other?,
    };
    let (status, entropy, state) = match &outcome {
        OracleOutcome::Found { state, entropy } => (
            OracleStatus::Found,
            Some(*entropy),
            Some(crate::report::state_tensor(state)?),
        ),
        OracleOutcome::Infeasible => (OracleStatus::Infeasible, None, None),
    };
    let comparison = if compare {
        let sol = solve_report(built)?;
        Some(Comparison {
            solver_status: sol.status,
            solver_entropy: sol.entropy,
            delta: entropy.map(|e| sol.entropy - e),
        })
    } else {
        None
    };
    let code = match status {
        OracleStatus::Found => exit::OK,
        OracleStatus::Infeasible => exit::INFEASIBLE,
    };
    let report = OracleReport {
        status,
        resolution: built.resolution,
        entropy,
        state,
        comparison,
    };
    Ok(Output {
        text: to_json(&report),
        code,
    })
}

/// Human-readable per-object report. Parse errors are the caller's concern;
/// everything after parsing is reported line by line.
pub fn validate(file: &ProblemFile) -> Result<Output, CliError> {
    let mut lines = Lines::default();
    let mut line = |ok: bool, what: String, detail: String| lines.push(ok, &what, &detail);

    let model = match assemble::build_model(&file.model) {
        Ok(m) => {
            line(
                true,
                "model".into(),
                format!("{:?}, ambient dimension {}", m.kind(), m.ambient_dim()),
            );
            m
        }
        Err(e) => {
            line(false, "model".into(), e.to_string());
            return Ok(lines.finish());
        }
    };

    let mut observables = Vec::new();
    for spec in &file.observables {
        let what = format!("observable {}", spec.name);
        match assemble::build_observable(&model, spec) {
            Ok(obs) => {
                let report = validate_povm(&obs);
                if report.is_valid() {
                    let detail = format!("completeness residual {:.16e}", report.completeness_residual);
                    line(true, what, detail);
                    observables.push((spec.name.clone(), obs));
                } else {
                    line(false, what, report.to_string());
                }
            }
            Err(e) => line(false, what, e.to_string()),
        }
    }

    let mut effects = Vec::new();
    for spec in &file.effects {
        let what = format!("effect {}", spec.name);
        match assemble::build_effect(&model, spec) {
            Ok(e) => {
                let (lo, hi) = model.functional_range(e.functional())?;
                line(true, what, format!("range [{lo:.16e}, {hi:.16e}]"));
                effects.push((spec.name.clone(), e));
            }
            Err(e) => line(false, what, e.to_string()),
        }
    }

    for (i, c) in file.conditions.iter().enumerate() {
        let what = format!("condition {i} ({} {:?} {})", c.name, c.kind, c.target);
        match assemble::condition_region(&observables, &effects, c) {
            Ok(_) => line(true, what, String::new()),
            Err(e) => line(false, what, e.to_string()),
        }
    }

    for (i, g) in file.generators.iter().flatten().enumerate() {
        let what = format!("generator {i}");
        match assemble::build_state(&model, g) {
            Ok(s) => line(true, what, format!("unit residual {:.16e}", unit_residual(&s))),
            Err(e) => line(false, what, e.to_string()),
        }
    }

    if !lines.failed {
        // Exercise the remaining assembly (objective, region meets).
        if let Err(e) = assemble::build(file) {
            lines.push(false, "problem", &e.to_string());
        }
    }
    Ok(lines.finish())
}

#[derive(Default)]
struct Lines {
    text: String,
    failed: bool,
}

impl Lines {
    fn push(&mut self, ok: bool, what: &str, detail: &str) {
        self.failed |= !ok;
        let mark = if ok { "ok  " } else { "FAIL" };
        if detail.is_empty() {
            writeln!(self.text, "{mark} {what}").unwrap();
        } else {
            writeln!(self.text, "{mark} {what}: {detail}").unwrap();
        }
    }

    fn finish(self) -> Output {
        Output {
            code: if self.failed { exit::VALIDATION } else { exit::OK },
            text: self.text,
        }
    }
}

fn unit_residual(s: &State) -> f64 {
    let u = s.model().unit_functional();
    let v: f64 = u.iter().zip(s.coords()).map(|(a, b)| a * b).sum();
    (v - 1.0).abs()
}
