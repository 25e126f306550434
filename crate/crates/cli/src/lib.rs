//! Command-line front end for `lsvalue`.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or file error, 3 numerical
//! failure (non-definite weights, inconsistent constraints, failed verify check).

pub mod format;
pub mod gamefile;
pub mod verify;
pub mod weights;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsvalue::approx::{gram_is_positive_definite, ApproxError, LinearOffsetMap};
use lsvalue::game::{dual_game, mobius_transform};
use lsvalue::regular::uniform_pq;
use lsvalue::ruiz::{ruiz_value, RuizError, RuizWeights};
use lsvalue::{
    banzhaf_value, shapley_value, ApproximationProblem, ApproximationResult, Game, LinearConstraintMap,
    PlayerSet, SubspaceBasis, Tolerances, Value, MAX_PLAYERS,
};
use thiserror::Error;

use crate::format::{format_number, format_values, snap};
use crate::gamefile::{parse_game, serialize_game_with};
use crate::verify::{verify, Outcome, VerifyOptions, MAX_VERIFY_PLAYERS};
use crate::weights::WeightSpec;

/// Upper bound on `basis size × 2^n` table entries held in memory.
const MAX_BASIS_ENTRIES: usize = 1 << 25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ApproxError> for CliError {
    fn from(e: ApproxError) -> Self {
        match e {
            ApproxError::NotPositiveDefinite { .. } | ApproxError::Inconsistent | ApproxError::Numerical(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<RuizError> for CliError {
    fn from(e: RuizError) -> Self {
        match e {
            RuizError::Approx(inner) => inner.into(),
            RuizError::Qp(_) | RuizError::Regular(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lsvalue", version, about = "Least-square values of cooperative TU games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a value of a game
    Value(ValueArgs),
    /// Best weighted approximation of a game in a subspace
    Approx(ApproxArgs),
    /// Check whether weights induce a positive definite form
    CheckPd(CheckPdArgs),
    /// Transform a game
    Transform {
        #[command(subcommand)]
        kind: TransformKind,
    },
    /// Run the cross-verification suite on a game
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Shapley,
    Banzhaf,
    Lsq,
    Ruiz,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Shapley => "shapley",
            Method::Banzhaf => "banzhaf",
            Method::Lsq => "lsq",
            Method::Ruiz => "ruiz",
        }
    }
}

#[derive(Debug, Args)]
struct ConstraintFlags {
    /// Require u(N) = v(N)
    #[arg(long)]
    efficiency: bool,
    /// Require the sum over all coalitions to be preserved
    #[arg(long)]
    sum_preserving: bool,
    /// No constraints
    #[arg(long, conflicts_with_all = ["efficiency", "sum_preserving"])]
    unconstrained: bool,
}

impl ConstraintFlags {
    fn any(&self) -> bool {
        self.efficiency || self.sum_preserving || self.unconstrained
    }

    fn build(&self, basis: &SubspaceBasis, default_efficiency: bool) -> Result<LinearConstraintMap, CliError> {
        let efficiency = self.efficiency || (default_efficiency && !self.any());
        let mut map = LinearConstraintMap::unconstrained(basis);
        if efficiency {
            map = LinearConstraintMap::efficiency(basis);
        }
        if self.sum_preserving {
            let sum = LinearConstraintMap::sum_preservation(basis);
            map = if efficiency { map.and(&sum)? } else { sum };
        }
        Ok(map)
    }
}

#[derive(Debug, Args)]
struct ValueArgs {
    #[arg(long, value_enum, default_value = "shapley")]
    method: Method,
    /// charnes | uniform:a1,...,an | diagonal:@FILE | matrix:@FILE
    #[arg(long)]
    weights: Option<WeightSpec>,
    #[command(flatten)]
    constraints: ConstraintFlags,
    /// Approximate by k-additive games
    #[arg(long, value_name = "K")]
    k_additive: Option<usize>,
    #[arg(long)]
    json: bool,
    /// Positive-definiteness pivot tolerance
    #[arg(long)]
    tol: Option<f64>,
    game: PathBuf,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    /// Defaults to equal weights
    #[arg(long)]
    weights: Option<WeightSpec>,
    #[command(flatten)]
    constraints: ConstraintFlags,
    #[arg(long, value_name = "K", default_value_t = 1)]
    k_additive: usize,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    tol: Option<f64>,
    game: PathBuf,
}

#[derive(Debug, Args)]
struct CheckPdArgs {
    #[arg(long)]
    weights: WeightSpec,
    #[arg(long)]
    n: usize,
    #[arg(long, value_name = "K", default_value_t = 1)]
    k_additive: usize,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum TransformKind {
    /// Möbius coefficients, written as a game file
    Mobius { game: PathBuf },
    /// The dual game v*(S) = v(N) − v(N∖S)
    Dual { game: PathBuf },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Additional weights to push through the positive-definiteness gate
    #[arg(long)]
    weights: Option<WeightSpec>,
    /// Maximum accepted relative deviation
    #[arg(long)]
    tol: Option<f64>,
    game: PathBuf,
}

fn tolerances(tol: Option<f64>) -> Result<Tolerances, CliError> {
    let mut t = Tolerances::default();
    if let Some(tol) = tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
        }
        t.pivot = tol;
    }
    Ok(t)
}

fn load_game(path: &Path) -> Result<Game, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_game(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn player_set(n: usize) -> Result<PlayerSet, CliError> {
    PlayerSet::new(n).map_err(|_| CliError::Input(format!("n must be between 1 and {MAX_PLAYERS}, got {n}")))
}

fn basis_for(players: PlayerSet, k: usize) -> Result<SubspaceBasis, CliError> {
    if k == 1 {
        return Ok(SubspaceBasis::singletons(players));
    }
    if k == 0 || k > players.n() {
        return Err(CliError::Usage(format!("--k-additive must be between 1 and {}", players.n())));
    }
    let dim: usize = (1..=k).map(|s| binomial(players.n(), s)).sum();
    if dim.saturating_mul(players.num_coalitions()) > MAX_BASIS_ENTRIES {
        return Err(CliError::Input(format!(
            "a {k}-additive basis for {} players is too large",
            players.n()
        )));
    }
    Ok(SubspaceBasis::k_additive(players, k)?)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn write_value(out: &mut dyn Write, method: &str, value: &Value, json: bool) -> std::io::Result<()> {
    let formatted = format_values(value.payoffs());
    if json {
        writeln!(
            out,
            "{{\"players\":{},\"method\":{},\"value\":[{}]}}",
            value.players().n(),
            serde_json::to_string(method).expect("strings serialize"),
            formatted.join(",")
        )
    } else {
        writeln!(out, "player\tvalue")?;
        for (i, x) in formatted.iter().enumerate() {
            writeln!(out, "{}\t{x}", i + 1)?;
        }
        Ok(())
    }
}

fn solve_lsq(
    v: &Game,
    weights: &WeightSpec,
    constraints: &ConstraintFlags,
    k: usize,
    default_efficiency: bool,
    tol: Option<f64>,
) -> Result<ApproximationResult, CliError> {
    let players = v.players();
    let scheme = weights.scheme(players)?;
    let basis = basis_for(players, k)?;
    let map = constraints.build(&basis, default_efficiency)?;
    let problem = ApproximationProblem::with_tolerances(scheme, basis, map, LinearOffsetMap::Zero, tolerances(tol)?)?;
    Ok(problem.solve(v)?)
}

fn ruiz_weights(spec: Option<&WeightSpec>, players: PlayerSet) -> Result<RuizWeights, CliError> {
    let table = match spec {
        None => return Ok(RuizWeights::from_fn(players, |_| 1.0)?),
        Some(WeightSpec::Charnes) | Some(WeightSpec::Matrix(_)) => {
            return Err(CliError::Usage(
                "ruiz takes uniform:m1,...,mn or diagonal:@FILE weights".into(),
            ))
        }
        Some(spec) => spec.per_coalition(players)?.expect("per-coalition weights"),
    };
    Ok(RuizWeights::from_fn(players, |s| table[s.index()])?)
}

fn cmd_value(args: &ValueArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let v = load_game(&args.game)?;
    let lsq_only = args.constraints.any() || args.k_additive.is_some() || args.tol.is_some();
    let value = match args.method {
        Method::Shapley | Method::Banzhaf if lsq_only || args.weights.is_some() => {
            return Err(CliError::Usage(format!(
                "--method {} takes no weights, constraints or subspace options",
                args.method.name()
            )))
        }
        Method::Ruiz if lsq_only => {
            return Err(CliError::Usage("--method ruiz only accepts --weights".into()))
        }
        Method::Shapley => shapley_value(&v),
        Method::Banzhaf => banzhaf_value(&v),
        Method::Ruiz => ruiz_value(&v, &ruiz_weights(args.weights.as_ref(), v.players())?)?,
        Method::Lsq => {
            let weights = args.weights.clone().unwrap_or(WeightSpec::Charnes);
            solve_lsq(&v, &weights, &args.constraints, args.k_additive.unwrap_or(1), true, args.tol)?.value
        }
    };
    write_value(out, args.method.name(), &value, args.json).map_err(io_err)
}

fn cmd_approx(args: &ApproxArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let v = load_game(&args.game)?;
    let players = v.players();
    let weights = args
        .weights
        .clone()
        .unwrap_or_else(|| WeightSpec::Uniform(vec![1.0; players.n()]));
    let r = solve_lsq(&v, &weights, &args.constraints, args.k_additive, false, args.tol)?;
    let approx = format_values(r.u_star.table());
    let coefficients = format_values(&r.x_star);
    if args.json {
        let entries: Vec<String> = players
            .coalitions()
            .zip(&approx)
            .map(|(s, x)| format!("\"{}\":{x}", s.key()))
            .collect();
        writeln!(
            out,
            "{{\"players\":{},\"method\":\"approx\",\"value\":[{}],\"coefficients\":[{}],\"approximation\":{{{}}}}}",
            players.n(),
            format_values(r.value.payoffs()).join(","),
            coefficients.join(","),
            entries.join(",")
        )
        .map_err(io_err)
    } else {
        write_value(out, "approx", &r.value, false).map_err(io_err)?;
        writeln!(out, "coalition\tapproximation").map_err(io_err)?;
        for (s, x) in players.coalitions().zip(&approx) {
            writeln!(out, "{}\t{x}", s.key()).map_err(io_err)?;
        }
        Ok(())
    }
}

fn cmd_check_pd(args: &CheckPdArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let players = player_set(args.n)?;
    let tol = tolerances(args.tol)?;
    let by_size = args.weights.by_size(players)?;
    let line = match by_size {
        Some(alpha) if args.k_additive == 1 => {
            let form = uniform_pq(&alpha, players).map_err(|e| CliError::Input(e.to_string()))?;
            let pd = form.spectral_pd();
            let pq = snap(&[form.p, form.q]);
            if args.json {
                format!(
                    "{{\"pd\":{pd},\"p\":{},\"q\":{}}}",
                    format_number(pq[0]),
                    format_number(pq[1])
                )
            } else {
                format!("PD: {pd} (p={}, q={})", format_number(pq[0]), format_number(pq[1]))
            }
        }
        _ => {
            let scheme = args.weights.scheme(players)?;
            let basis = basis_for(players, args.k_additive)?;
            let result = gram_is_positive_definite(&scheme, &basis, &tol)?;
            match (result, args.json) {
                (Ok(()), false) => "PD: true".to_string(),
                (Err(pivot), false) => format!("PD: false (failing pivot {pivot})"),
                (Ok(()), true) => "{\"pd\":true}".to_string(),
                (Err(pivot), true) => format!("{{\"pd\":false,\"failing_pivot\":{pivot}}}"),
            }
        }
    };
    writeln!(out, "{line}").map_err(io_err)
}

fn round_to_printed(x: f64) -> f64 {
    format_number(x).parse().expect("formatted numbers parse")
}

fn cmd_transform(kind: &TransformKind, out: &mut dyn Write) -> Result<(), CliError> {
    let result = match kind {
        TransformKind::Mobius { game } => mobius_transform(&load_game(game)?).as_game(),
        TransformKind::Dual { game } => dual_game(&load_game(game)?),
    };
    let snapped = Game::new(result.players(), snap(result.table())).expect("same length");
    write!(out, "{}", serialize_game_with(&snapped, round_to_printed)).map_err(io_err)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let v = load_game(&args.game)?;
    if v.players().n() > MAX_VERIFY_PLAYERS {
        return Err(CliError::Input(format!(
            "verify is limited to {MAX_VERIFY_PLAYERS} players, got {}",
            v.players().n()
        )));
    }
    let mut opts = VerifyOptions {
        trials: args.trials,
        seed: args.seed,
        ..VerifyOptions::default()
    };
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
        }
        opts.tol = tol;
    }
    if let Some(spec) = &args.weights {
        opts.weights = Some(spec.scheme(v.players())?);
    }
    let report = verify(&v, &opts)?;
    writeln!(out, "check\tstatus\tmax_deviation").map_err(io_err)?;
    for c in &report.checks {
        let status = match &c.outcome {
            Outcome::Pass => "pass".to_string(),
            Outcome::Fail => "FAIL".to_string(),
            Outcome::Rejected(why) => format!("rejected as expected: {why}"),
        };
        writeln!(out, "{}\t{status}\t{:.3e}", c.name, c.max_deviation).map_err(io_err)?;
    }
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    if failed.is_empty() {
        writeln!(out, "all checks passed (max deviation {:.3e})", report.max_deviation()).map_err(io_err)?;
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "verify failed: {} exceeded tolerance {:e}",
            failed.join(", "),
            opts.tol
        )))
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Input(format!("write failed: {e}"))
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Value(a) => cmd_value(a, out),
        Command::Approx(a) => cmd_approx(a, out),
        Command::CheckPd(a) => cmd_check_pd(a, out),
        Command::Transform { kind } => cmd_transform(kind, out),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
