//! Cross-checks between closed forms, the generic solver and enumeration.

use lsvalue::approx::{gram_is_positive_definite, LinearOffsetMap};
use lsvalue::qp::solve_qp;
use lsvalue::regular::{theorem3_solve, RegularProblem};
use lsvalue::ruiz::{ruiz_value, ruiz_value_direct, RuizWeights};
use lsvalue::{
    banzhaf_value, charnes_weights, eq13_regular_value, shapley_value, ApproximationProblem, DenseMatrix, Game,
    LinearConstraintMap, RegularForm, SubspaceBasis, Tolerances, WeightScheme,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

pub const MAX_VERIFY_PLAYERS: usize = 8;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail,
    /// The engine refused the input, as it is supposed to.
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_deviation: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.outcome == Outcome::Fail)
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub weights: Option<WeightScheme>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 20,
            seed: 0,
            tol: DEFAULT_TOLERANCE,
            weights: None,
        }
    }
}

/// `max_i |a_i − b_i| / max(‖b‖∞, 1)`.
pub fn relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn engine_err(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn random_game(rng: &mut ChaCha8Rng, like: &Game) -> Game {
    Game::from_fn(like.players(), |_| rng.gen_range(-1.0..=1.0))
}

fn efficient_problem(weights: WeightScheme) -> Result<ApproximationProblem, CliError> {
    let basis = SubspaceBasis::singletons(weights.players());
    let eff = LinearConstraintMap::efficiency(&basis);
    ApproximationProblem::new(weights, basis, eff, LinearOffsetMap::Zero).map_err(engine_err)
}

fn linearity_deviation(
    problem: &ApproximationProblem,
    v: &Game,
    rng: &mut ChaCha8Rng,
    trials: usize,
) -> Result<f64, CliError> {
    let xv = problem.solve(v).map_err(engine_err)?.value;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let w = random_game(rng, v);
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let mix = v.combine(a, &w, b).map_err(engine_err)?;
        let lhs = problem.solve(&mix).map_err(engine_err)?.value;
        let xw = problem.solve(&w).map_err(engine_err)?.value;
        let rhs: Vec<f64> = xv.payoffs().iter().zip(xw.payoffs()).map(|(p, q)| a * p + b * q).collect();
        worst = worst.max(relative_deviation(lhs.payoffs(), &rhs));
    }
    Ok(worst)
}

/// Runs the suite on `v`; fails only on engine errors, not on deviations.
pub fn verify(v: &Game, opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let players = v.players();
    let n = players.n();
    if !(2..=MAX_VERIFY_PLAYERS).contains(&n) {
        return Err(CliError::Input(format!(
            "verify needs between 2 and {MAX_VERIFY_PLAYERS} players, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();
    let mut record = |name, dev: f64| {
        checks.push(CheckResult {
            name,
            max_deviation: dev,
            outcome: if dev <= opts.tol { Outcome::Pass } else { Outcome::Fail },
        })
    };

    let shapley = shapley_value(v);
    let alpha = charnes_weights(players).map_err(engine_err)?;
    let closed = eq13_regular_value(v, &alpha).map_err(engine_err)?;
    let charnes = efficient_problem(WeightScheme::uniform_by_size(players, alpha).map_err(engine_err)?)?;
    let engine = charnes.solve(v).map_err(engine_err)?;
    record(
        "charnes-lsq-vs-shapley",
        relative_deviation(closed.value.payoffs(), shapley.payoffs())
            .max(relative_deviation(engine.value.payoffs(), shapley.payoffs())),
    );
    let scale = v.grand_value().abs().max(1.0);
    record(
        "efficiency",
        (closed.value.total() - v.grand_value())
            .abs()
            .max((engine.value.total() - v.grand_value()).abs())
            / scale,
    );

    let basis = SubspaceBasis::singletons(players);
    let unconstrained = ApproximationProblem::new(
        WeightScheme::equal(players),
        basis.clone(),
        LinearConstraintMap::unconstrained(&basis),
        LinearOffsetMap::Zero,
    )
    .map_err(engine_err)?;
    let fit = unconstrained.solve(v).map_err(engine_err)?;
    record(
        "unconstrained-lsq-vs-banzhaf",
        relative_deviation(fit.value.payoffs(), banzhaf_value(v).payoffs()),
    );

    let mut worst = 0.0f64;
    for _ in 0..opts.trials {
        let p = rng.gen_range(0.0..1.0);
        let form = RegularForm::new(p + rng.gen_range(0.1..2.0), p, n);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g = rng.gen_range(-2.0..2.0);
        let closed = theorem3_solve(&RegularProblem::new(form, c.clone(), g).map_err(engine_err)?)
            .map_err(engine_err)?;
        let ones = DenseMatrix::from_fn(1, n, |_, _| 1.0);
        let kkt = solve_qp(&form.to_matrix().scaled(2.0), &c, &ones, &[g], &Tolerances::default())
            .map_err(engine_err)?;
        worst = worst.max(relative_deviation(&closed.x, &kkt.x));
    }
    record("theorem3-vs-kkt", worst);

    let mut worst = 0.0f64;
    for _ in 0..opts.trials.max(1) {
        let m = RuizWeights::from_fn(players, |_| rng.gen_range(0.1..2.0)).map_err(engine_err)?;
        let transformed = ruiz_value(v, &m).map_err(engine_err)?;
        let direct = ruiz_value_direct(v, &m).map_err(engine_err)?;
        worst = worst.max(relative_deviation(transformed.payoffs(), direct.payoffs()));
    }
    record("ruiz-transform-vs-direct", worst);

    record("linearity", linearity_deviation(&charnes, v, &mut rng, opts.trials)?);

    if let Some(weights) = &opts.weights {
        match gram_is_positive_definite(weights, &basis, &Tolerances::default()).map_err(engine_err)? {
            Err(pivot) => checks.push(CheckResult {
                name: "custom-weights-pd-gate",
                max_deviation: 0.0,
                outcome: Outcome::Rejected(format!("not positive definite (failing pivot {pivot})")),
            }),
            Ok(()) => {
                let problem = efficient_problem(weights.clone())?;
                let x = problem.solve(v).map_err(engine_err)?.value;
                let eff = (x.total() - v.grand_value()).abs() / scale;
                let lin = linearity_deviation(&problem, v, &mut rng, opts.trials)?;
                checks.push(CheckResult {
                    name: "custom-weights-lsq",
                    max_deviation: eff.max(lin),
                    outcome: if eff.max(lin) <= opts.tol { Outcome::Pass } else { Outcome::Fail },
                });
            }
        }
    }
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use lsvalue::{PlayerSet, Value};

    fn names(report: &VerifyReport) -> Vec<&'static str> {
        report.failures().map(|c| c.name).collect()
    }

    #[test]
    fn additive_games_pass_everything() {
        let players = PlayerSet::new(4).unwrap();
        let g = Value::new(players, vec![1.0, -0.5, 2.0, 0.25]).unwrap().additive_game();
        let report = verify(&g, &VerifyOptions::default()).unwrap();
        assert!(names(&report).is_empty(), "{report:?}");
        assert!(report.max_deviation() < 1e-8);
    }

    #[test]
    fn non_additive_games_break_the_banzhaf_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let players = PlayerSet::new(4).unwrap();
        let v = Game::from_fn(players, |_| rng.gen_range(-1.0..1.0));
        let report = verify(&v, &VerifyOptions::default()).unwrap();
        assert_eq!(names(&report), vec!["unconstrained-lsq-vs-banzhaf"]);
    }

    #[test]
    fn indefinite_custom_weights_are_rejected() {
        let players = PlayerSet::new(3).unwrap();
        let g = Value::new(players, vec![1.0, 2.0, 3.0]).unwrap().additive_game();
        let weights = WeightScheme::uniform_by_size(players, vec![1.0, -1.0, 0.0]).unwrap();
        let opts = VerifyOptions {
            weights: Some(weights),
            ..VerifyOptions::default()
        };
        let report = verify(&g, &opts).unwrap();
        let gate = report.checks.iter().find(|c| c.name == "custom-weights-pd-gate").unwrap();
        assert!(matches!(gate.outcome, Outcome::Rejected(_)));
        assert!(names(&report).is_empty());
    }

    #[test]
    fn player_range() {
        let one = Game::zero(PlayerSet::new(1).unwrap());
        assert!(verify(&one, &VerifyOptions::default()).is_err());
    }
}
