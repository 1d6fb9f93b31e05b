//! Command-line front end for `prefgame`.
//!
//! Every subcommand prints one report (JSON by default) and exits with 0 on
//! success, 1 when a requested check finds a violation, and 2 on bad input.

pub mod error;
pub mod input;
pub mod monte_carlo;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prefgame::generators::{self, GeneratorConfig};
use prefgame::mapping::{check_conditions, MappingSpec, DEFAULT_GRID_RESOLUTION, DEFAULT_MARGIN};
use prefgame::matching::{self, BtlModel, RatioFunction, RatioPayoffSpec, KKT_TOLERANCE};
use prefgame::model::{apply_mapping, PayoffMatrix, Policy, PreferenceMatrix, DEFAULT_SUPPORT_THRESHOLD};
use prefgame::social_choice::{condorcet_winner, consistency_verdict, smith_decomposition, ConsistencyVerdict, Decomposition};
use prefgame::solver::{
    enumerate_equilibria, solve_maximin, uniqueness_report, Equilibrium, NashReport, UniquenessReport,
    DEFAULT_MAX_ENUMERATION, SOLVER_TOLERANCE,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::monte_carlo::{dump_witnesses, monte_carlo_timed, MonteCarloConfig};
use crate::report::{render, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "prefgame", version, about = "Mapped zero-sum preference games")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Master seed for random generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Numerical tolerance (solver or KKT, per subcommand).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for violation witnesses (monte-carlo).
    #[arg(long, global = true)]
    pub witness_dir: Option<PathBuf>,
    /// Leave wall-clock timings out of reports.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// Preference matrix (JSON or CSV).
    #[arg(long, conflicts_with = "payoff")]
    pub pref: Option<PathBuf>,
    /// Mapping: builtin name, JSON file, or inline JSON.
    #[arg(long, default_value = "identity", conflicts_with = "payoff")]
    pub psi: String,
    /// Payoff matrix (JSON or CSV), instead of --pref/--psi.
    #[arg(long)]
    pub payoff: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Row {
    Condorcet,
    Mixed,
    Smith,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    One,
    Two,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that inputs parse and satisfy their invariants.
    Validate {
        #[arg(long)]
        pref: Option<PathBuf>,
        #[arg(long)]
        payoff: Option<PathBuf>,
        #[arg(long)]
        psi: Option<String>,
    },
    /// Solve the maximin problem of a game.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        /// Also certify uniqueness; exit 1 if the solution is not unique.
        #[arg(long)]
        check_unique: bool,
        /// Also list every equilibrium found by support enumeration.
        #[arg(long)]
        enumerate: bool,
    },
    /// Condorcet winner and ordered Smith decomposition.
    Decompose {
        #[arg(long)]
        pref: PathBuf,
    },
    /// Grid check of a mapping against the three consistency conditions.
    CheckPsi {
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
        resolution: usize,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        /// Exit 1 unless these rows hold (repeatable).
        #[arg(long, value_enum)]
        require: Vec<Row>,
    },
    /// Solve the mapped game and compare with the Condorcet winner and Smith set.
    Verdict {
        #[arg(long)]
        pref: PathBuf,
        #[arg(long, default_value = "identity")]
        psi: String,
    },
    /// BTL preferences and the softmax policy of a reward vector.
    Btl {
        /// Rewards: comma list, JSON array, or file.
        #[arg(long)]
        rewards: String,
    },
    /// Check whether a full-support target is optimal; exit 1 if not.
    Kkt {
        #[arg(long)]
        target: String,
        #[arg(long, conflicts_with = "construction")]
        payoff: Option<PathBuf>,
        #[arg(long, value_enum)]
        construction: Option<Construction>,
    },
    /// Solve a ratio-based payoff design and measure its distance to the target.
    PmProbe {
        #[arg(long)]
        target: String,
        /// `logistic`, `degenerate`, or a JSON ratio function.
        #[arg(long, default_value = "logistic")]
        f: String,
        /// Diagonal constant.
        #[arg(long, default_value_t = 0.5)]
        diagonal: f64,
        /// Scale of the degenerate design.
        #[arg(long, default_value_t = 1.0)]
        c2: f64,
        /// Size the degenerate design is matched to (defaults to the target size).
        #[arg(long)]
        matched_n: Option<usize>,
    },
    /// Generate preference matrices, or payoff matrices when --psi is given.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Randomized consistency checks over seeded tournaments.
    MonteCarlo {
        #[arg(long, default_value = "identity")]
        psi: String,
        #[arg(long, default_value_t = 500)]
        trials: u64,
        #[arg(long, default_value_t = 3)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Only tournaments without a Condorcet winner.
        #[arg(long)]
        no_winner: bool,
        #[arg(long, default_value_t = 0.55)]
        strength_low: f64,
        #[arg(long, default_value_t = 0.95)]
        strength_high: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        no_winner: bool,
        #[arg(long, default_value_t = 0.55)]
        strength_low: f64,
        #[arg(long, default_value_t = 0.95)]
        strength_high: f64,
        #[arg(long)]
        psi: Option<String>,
    },
    Table2 {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        psi: Option<String>,
    },
    Table4 {
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        t2: f64,
        #[arg(long)]
        psi: Option<String>,
    },
    Table6 {
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        t2: f64,
        #[arg(long)]
        psi: Option<String>,
    },
}

#[derive(Serialize)]
struct ValidateReport {
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    no_tie: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    psi: Option<MappingSpec>,
}

#[derive(Serialize)]
struct SolveReport {
    nash: NashReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    uniqueness: Option<UniquenessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equilibria: Option<Vec<Equilibrium>>,
}

#[derive(Serialize)]
struct DecomposeReport {
    condorcet_winner: Option<usize>,
    #[serde(flatten)]
    decomposition: Decomposition,
}

#[derive(Serialize)]
struct VerdictReport {
    #[serde(flatten)]
    verdict: ConsistencyVerdict,
    nash: NashReport,
}

#[derive(Serialize)]
struct BtlReport {
    preferences: PreferenceMatrix,
    pm_policy: Policy,
}

/// A rendered report plus whether it records a violation.
struct Outcome {
    text: String,
    violation: bool,
}

fn emit<T: Serialize>(report: &T, format: Format, violation: bool) -> CliResult<Outcome> {
    Ok(Outcome { text: render(report, format)?, violation })
}

fn load_game(game: &GameArgs) -> CliResult<PayoffMatrix> {
    match (&game.payoff, &game.pref) {
        (Some(path), _) => input::load_payoff(path),
        (None, Some(pref)) => {
            let prefs = input::load_preferences(pref)?;
            Ok(apply_mapping(&prefs, &input::load_mapping(&game.psi)?)?)
        }
        (None, None) => Err(CliError::Usage("give --pref (with --psi) or --payoff".into())),
    }
}

fn verdict_violation(v: &ConsistencyVerdict) -> bool {
    v.condorcet_consistent == Some(false)
        || !v.smith_consistent
        || (v.condorcet_winner.is_none() && !v.is_mixed)
}

fn ratio_function(arg: &str, diagonal: f64, c2: f64, n: usize) -> CliResult<RatioPayoffSpec> {
    match arg {
        "logistic" => Ok(RatioPayoffSpec { f: RatioFunction::Logistic, diagonal_c: diagonal }),
        "degenerate" => Ok(RatioPayoffSpec::degenerate(diagonal, c2, n)),
        json => {
            let f = serde_json::from_str(json)
                .map_err(|source| CliError::Json { what: "--f".into(), source })?;
            Ok(RatioPayoffSpec { f, diagonal_c: diagonal })
        }
    }
}

fn generate(kind: &GenKind, seed: u64, format: Format) -> CliResult<Outcome> {
    let (prefs, psi) = match kind {
        GenKind::Random { n, no_winner, strength_low, strength_high, psi } => {
            let cfg = GeneratorConfig {
                n: *n,
                seed,
                strength_low: *strength_low,
                strength_high: *strength_high,
                force_no_winner: *no_winner,
            };
            (generators::random_tournament(&cfg)?, psi)
        }
        GenKind::Table2 { t, psi } => (generators::table_two_preferences(*t)?, psi),
        GenKind::Table4 { t1, t2, psi } => (generators::table_four_preferences(*t1, *t2)?, psi),
        GenKind::Table6 { t1, t2, psi } => (generators::table_six_preferences(*t1, *t2)?, psi),
    };
    match psi {
        Some(psi) => emit(&apply_mapping(&prefs, &input::load_mapping(psi)?)?, format, false),
        None => emit(&prefs, format, false),
    }
}

fn execute(cli: &Cli) -> CliResult<Outcome> {
    let format = cli.format;
    let solver_tol = cli.tol.unwrap_or(SOLVER_TOLERANCE);
    match &cli.command {
        Command::Validate { pref, payoff, psi } => {
            let mut report = ValidateReport { valid: true, n: None, no_tie: None, psi: None };
            if pref.is_none() && payoff.is_none() && psi.is_none() {
                return Err(CliError::Usage("give --pref, --payoff or --psi".into()));
            }
            if let Some(path) = pref {
                let p = input::load_preferences(path)?;
                report.n = Some(p.n());
                report.no_tie = Some(p.no_tie());
            }
            if let Some(path) = payoff {
                report.n = Some(input::load_payoff(path)?.n());
            }
            if let Some(psi) = psi {
                report.psi = Some(input::load_mapping(psi)?);
            }
            emit(&report, format, false)
        }
        Command::Solve { game, check_unique, enumerate } => {
            let a = load_game(game)?;
            let nash = solve_maximin(&a, solver_tol)?;
            log::debug!("solved {}x{} game in {} pivots", a.n(), a.n(), nash.solver_iterations);
            if !check_unique && !enumerate {
                return emit(&nash, format, false);
            }
            let uniqueness = if *check_unique { Some(uniqueness_report(&a, &nash, solver_tol.max(1e-8))?) } else { None };
            let equilibria = if *enumerate { Some(enumerate_equilibria(&a, DEFAULT_MAX_ENUMERATION)?) } else { None };
            let violation = uniqueness.as_ref().is_some_and(|u| !u.unique);
            emit(&SolveReport { nash, uniqueness, equilibria }, format, violation)
        }
        Command::Decompose { pref } => {
            let p = input::load_preferences(pref)?;
            let report = DecomposeReport { condorcet_winner: condorcet_winner(&p), decomposition: smith_decomposition(&p)? };
            emit(&report, format, false)
        }
        Command::CheckPsi { psi, resolution, margin, require } => {
            let report = check_conditions(&input::load_mapping(psi)?, *resolution, *margin)?;
            let violation = require.iter().any(|row| match row {
                Row::Condorcet => !report.condorcet_ok,
                Row::Mixed => !report.mixed_ok,
                Row::Smith => !report.smith_ok,
            });
            emit(&report, format, violation)
        }
        Command::Verdict { pref, psi } => {
            let p = input::load_preferences(pref)?;
            let a = apply_mapping(&p, &input::load_mapping(psi)?)?;
            let nash = solve_maximin(&a, solver_tol)?;
            let verdict = consistency_verdict(&p, &nash, DEFAULT_SUPPORT_THRESHOLD)?;
            let violation = verdict_violation(&verdict);
            emit(&VerdictReport { verdict, nash }, format, violation)
        }
        Command::Btl { rewards } => {
            let model = BtlModel::new(input::load_vector(rewards, "--rewards")?)?;
            let report = BtlReport { preferences: matching::btl_preferences(&model)?, pm_policy: matching::pm_policy(&model)? };
            emit(&report, format, false)
        }
        Command::Kkt { target, payoff, construction } => {
            let target = input::load_policy(target, "--target")?;
            let a = match (payoff, construction) {
                (Some(path), _) => input::load_payoff(path)?,
                (None, Some(Construction::One)) => matching::construction_one(&target)?,
                (None, Some(Construction::Two)) => matching::construction_two(&target)?,
                (None, None) => return Err(CliError::Usage("give --payoff or --construction".into())),
            };
            let cert = matching::kkt_verify(&a, &target, cli.tol.unwrap_or(KKT_TOLERANCE))?;
            let violation = !cert.feasible;
            emit(&cert, format, violation)
        }
        Command::PmProbe { target, f, diagonal, c2, matched_n } => {
            let target = input::load_policy(target, "--target")?;
            let spec = ratio_function(f, *diagonal, *c2, matched_n.unwrap_or(target.n()))?;
            emit(&matching::pm_gap(&spec, &target)?, format, false)
        }
        Command::Gen { kind } => generate(kind, cli.seed, format),
        Command::MonteCarlo { psi, trials, n_min, n_max, no_winner, strength_low, strength_high } => {
            let cfg = MonteCarloConfig {
                psi: input::load_mapping(psi)?,
                trials: *trials,
                n_min: *n_min,
                n_max: *n_max,
                seed: cli.seed,
                force_no_winner: *no_winner,
                strength_low: *strength_low,
                strength_high: *strength_high,
                tolerance: solver_tol,
            };
            let (summary, witnesses) = monte_carlo_timed(&cfg, !cli.no_timing)?;
            if let Some(dir) = &cli.witness_dir {
                dump_witnesses(dir, &witnesses)?;
            }
            let violation = summary.violations() > 0;
            emit(&summary, format, violation)
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter("PREFGAME_LOG");
    // repeated calls (tests) keep the first logger
    let _ = env_logger::Builder::from_env(env).try_init();
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_INVALID
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    let outcome = match execute(&cli) {
        Ok(outcome) => outcome,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &outcome.text)
            .map_err(|source| CliError::Io { path: path.clone(), source }),
        None => out.write_all(outcome.text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_INVALID;
    }
    if outcome.violation {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}
