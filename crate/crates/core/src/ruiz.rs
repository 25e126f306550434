//! Least squares on average coalition excesses, reduced to weighted least squares.
//!
//! ```text
//! minimize Σ_{∅≠S⊊N} m_S d(x, S)²   subject to   x(N) = v(N)
//! d(x, S) = (v(S) − x(S)) / |S| − (v(N∖S) − x(N∖S)) / (n − |S|)
//! ```
//!
//! On the feasible set, `d(x, S) = n / (s(n−s)) · (v̄(S) − x(S))` with
//! `v̄(S) = ((n−s) v(S) + s v*(S)) / n`, so the problem is the weighted
//! approximation of `v̄` with `α_S = n² m_S / (s²(n−s)²)` under the same
//! efficiency constraint. The grand coalition carries no weight.

use thiserror::Error;

use crate::approx::{
    ApproxError, ApproximationProblem, LinearConstraintMap, LinearOffsetMap, SubspaceBasis,
    WeightScheme,
};
use crate::game::{dual_game, Coalition, Game, GameError, PlayerSet, Value};
use crate::qp::{solve_qp, DenseMatrix, QpError, Tolerances};
use crate::regular::{regular_value_with_level, RegularError, RegularValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuizError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Regular(#[from] RegularError),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("weight m_S must be positive, got {value} for {coalition}")]
    NonPositive { coalition: Coalition, value: f64 },
    #[error("the gap is only defined on proper coalitions")]
    GrandCoalition,
    #[error("at least two players are required")]
    TooFewPlayers,
    #[error("expected {expected} weights, got {actual}")]
    Length { expected: usize, actual: usize },
}

/// Positive weights `m_S` on the proper nonempty coalitions.
#[derive(Debug, Clone, PartialEq)]
pub struct RuizWeights {
    players: PlayerSet,
    // table order; the grand coalition slot is unused and holds 0
    m: Vec<f64>,
}

impl RuizWeights {
    pub fn from_fn(players: PlayerSet, mut f: impl FnMut(Coalition) -> f64) -> Result<Self, RuizError> {
        if players.n() < 2 {
            return Err(RuizError::TooFewPlayers);
        }
        let grand = players.grand_coalition();
        let mut m = vec![0.0; players.num_coalitions()];
        for s in players.coalitions().filter(|&s| s != grand) {
            let value = f(s);
            if !(value > 0.0) || !value.is_finite() {
                return Err(RuizError::NonPositive { coalition: s, value });
            }
            m[s.index()] = value;
        }
        Ok(Self { players, m })
    }

    /// `m_S = m(|S|)` for `|S| = 1..n−1`.
    pub fn uniform_by_size(players: PlayerSet, m_by_size: &[f64]) -> Result<Self, RuizError> {
        if players.n() < 2 {
            return Err(RuizError::TooFewPlayers);
        }
        if m_by_size.len() != players.n() - 1 {
            return Err(RuizError::Length {
                expected: players.n() - 1,
                actual: m_by_size.len(),
            });
        }
        Self::from_fn(players, |s| m_by_size[s.size() - 1])
    }

    /// Weights for the proper coalitions in table order (`2^n − 2` entries).
    pub fn from_proper_table(players: PlayerSet, table: &[f64]) -> Result<Self, RuizError> {
        if players.n() < 2 {
            return Err(RuizError::TooFewPlayers);
        }
        let expected = players.num_coalitions() - 1;
        if table.len() != expected {
            return Err(RuizError::Length {
                expected,
                actual: table.len(),
            });
        }
        Self::from_fn(players, |s| table[s.index()])
    }

    pub fn players(&self) -> PlayerSet {
        self.players
    }

    /// `m_S` for a proper coalition.
    pub fn weight(&self, s: Coalition) -> f64 {
        self.m[s.index()]
    }

    fn proper(&self) -> impl Iterator<Item = Coalition> {
        let grand = self.players.grand_coalition();
        self.players.coalitions().filter(move |&s| s != grand)
    }

    /// `Σ_S m_S d(x, S)²`.
    pub fn objective(&self, x: &Value, v: &Game) -> Result<f64, RuizError> {
        let mut total = 0.0;
        for s in self.proper() {
            let d = gap(x, s, v)?;
            total += self.weight(s) * d * d;
        }
        Ok(total)
    }
}

/// `d(x, S) = (v(S) − x(S)) / |S| − (v(N∖S) − x(N∖S)) / (n − |S|)`.
pub fn gap(x: &Value, s: Coalition, v: &Game) -> Result<f64, RuizError> {
    let players = v.players();
    if x.players() != players {
        return Err(GameError::PlayerMismatch(x.players().n(), players.n()).into());
    }
    let rest = s.complement(players).ok_or(RuizError::GrandCoalition)?;
    let size = s.size() as f64;
    let n = players.n() as f64;
    Ok((v.value(s) - x.coalition_sum(s)) / size - (v.value(rest) - x.coalition_sum(rest)) / (n - size))
}

/// The transformed least-squares data.
#[derive(Debug, Clone, PartialEq)]
pub struct RuizTransform {
    /// `v̄` on proper coalitions; the grand coalition entry is unused and 0.
    pub vbar: Game,
    /// Diagonal weights `α_S`, zero at the grand coalition.
    pub alpha: WeightScheme,
    /// Right-hand side of `x(N) = g`, equal to `v(N)`.
    pub g: f64,
}

pub fn transform(v: &Game, m: &RuizWeights) -> Result<RuizTransform, RuizError> {
    let players = v.players();
    if m.players() != players {
        return Err(GameError::PlayerMismatch(m.players().n(), players.n()).into());
    }
    let dual = dual_game(v);
    let n = players.n() as f64;
    let grand = players.grand_coalition();
    let mut vbar = Game::zero(players);
    let mut alpha = vec![0.0; players.num_coalitions()];
    for s in players.coalitions().filter(|&s| s != grand) {
        let size = s.size() as f64;
        vbar.set(s, ((n - size) * v.value(s) + size * dual.value(s)) / n);
        let denom = size * size * (n - size) * (n - size);
        alpha[s.index()] = n * n * m.weight(s) / denom;
    }
    Ok(RuizTransform {
        vbar,
        alpha: WeightScheme::diagonal(players, alpha)?,
        g: v.grand_value(),
    })
}

/// Solves the problem through the weighted-approximation engine.
pub fn ruiz_value(v: &Game, m: &RuizWeights) -> Result<Value, RuizError> {
    let t = transform(v, m)?;
    let basis = SubspaceBasis::singletons(v.players());
    let eff = LinearConstraintMap::efficiency(&basis);
    let problem = ApproximationProblem::new(t.alpha, basis, eff, LinearOffsetMap::Zero)?;
    Ok(problem.solve_parts(&t.vbar, &[t.g])?.value)
}

/// Solves the problem directly in `x`, without the transformation.
///
/// Writes `d(x, S) = a_S − ℓ_Sᵀx` with `ℓ_S,i = 1/s` on `S` and `−1/(n−s)`
/// off `S`. Every `ℓ_S` is orthogonal to the all-ones vector, so the form is
/// only definite on the constraint hyperplane; the penalty `λ(1ᵀx − g)²`,
/// which vanishes on feasible points, restores definiteness.
pub fn ruiz_value_direct(v: &Game, m: &RuizWeights) -> Result<Value, RuizError> {
    let players = v.players();
    if m.players() != players {
        return Err(GameError::PlayerMismatch(m.players().n(), players.n()).into());
    }
    let n = players.n();
    let nf = n as f64;
    let mut h = DenseMatrix::zeros(n, n);
    let mut c = vec![0.0; n];
    let mut ell = vec![0.0; n];
    for s in m.proper() {
        let rest = s.complement(players).expect("proper coalition");
        let size = s.size() as f64;
        for (i, e) in ell.iter_mut().enumerate() {
            *e = if s.contains(i + 1) { 1.0 / size } else { -1.0 / (nf - size) };
        }
        let a = v.value(s) / size - v.value(rest) / (nf - size);
        let w = m.weight(s);
        for i in 0..n {
            c[i] += 2.0 * w * a * ell[i];
            for j in 0..n {
                h[(i, j)] += 2.0 * w * ell[i] * ell[j];
            }
        }
    }
    let g = v.grand_value();
    let lambda = (0..n).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1.0);
    for i in 0..n {
        c[i] += 2.0 * lambda * g;
        for j in 0..n {
            h[(i, j)] += 2.0 * lambda;
        }
    }
    let ones = DenseMatrix::from_fn(1, n, |_, _| 1.0);
    let sol = solve_qp(&h, &c, &ones, &[g], &Tolerances::default())?;
    Ok(Value::new(players, sol.x)?)
}

/// Closed form for size-uniform `m`: the transformed weights are uniform too.
pub fn ruiz_uniform_closed_form(v: &Game, m_by_size: &[f64]) -> Result<RegularValue, RuizError> {
    let players = v.players();
    let weights = RuizWeights::uniform_by_size(players, m_by_size)?;
    let t = transform(v, &weights)?;
    let n = players.n() as f64;
    let alpha: Vec<f64> = (1..=players.n())
        .map(|s| {
            if s == players.n() {
                0.0
            } else {
                let sf = s as f64;
                n * n * m_by_size[s - 1] / (sf * sf * (n - sf) * (n - sf))
            }
        })
        .collect();
    Ok(regular_value_with_level(&t.vbar, &alpha, t.g)?)
}
