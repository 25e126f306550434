//! Probabilistic values: expected marginal contributions.
//!
//! Player `i` is evaluated against a probability distribution `p` on the
//! coalitions containing `i`:
//!
//! ```text
//! Φ_i(v) = Σ_{S∋i} p_S (v(S) − v(S∖i))
//! ```
//!
//! Semivalues use a [`SizeProfile`], where `p_S` depends only on `|S|`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::game::{Coalition, Game, GameError, PlayerSet, Value};

/// Allowed deviation of a floating-point distribution's total from 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("distribution belongs to player {dist}, not player {player}")]
    PlayerMismatch { player: usize, dist: usize },
    #[error("probabilities sum to {0}, expected 1")]
    Normalization(f64),
    #[error("probability {value} for {coalition} is negative or not finite")]
    Negative { coalition: Coalition, value: f64 },
    #[error("size weight {value} for size {size} is negative or not finite")]
    NegativeSize { size: usize, value: f64 },
    #[error("expected {expected} entries, got {actual}")]
    Length { expected: usize, actual: usize },
}

/// A probability distribution on the coalitions containing one player.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionDistribution {
    players: PlayerSet,
    player: usize,
    // table order; zero on coalitions without `player`
    p: Vec<f64>,
}

impl CoalitionDistribution {
    pub fn from_fn(
        players: PlayerSet,
        player: usize,
        mut f: impl FnMut(Coalition) -> f64,
    ) -> Result<Self, ProbError> {
        Coalition::singleton(player, players)?;
        let mut p = vec![0.0; players.num_coalitions()];
        let mut total = 0.0;
        for s in players.coalitions_containing(player) {
            let value = f(s);
            if !(value >= 0.0) || !value.is_finite() {
                return Err(ProbError::Negative { coalition: s, value });
            }
            p[s.index()] = value;
            total += value;
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::Normalization(total));
        }
        Ok(Self { players, player, p })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn players(&self) -> PlayerSet {
        self.players
    }

    pub fn probability(&self, s: Coalition) -> f64 {
        self.p[s.index()]
    }

    fn support(&self) -> impl Iterator<Item = (Coalition, f64)> + '_ {
        self.players
            .coalitions_containing(self.player)
            .map(move |s| (s, self.p[s.index()]))
    }

    fn check(&self, v: &Game, i: usize) -> Result<(), ProbError> {
        if v.players() != self.players {
            return Err(GameError::PlayerMismatch(v.players().n(), self.players.n()).into());
        }
        if i != self.player {
            return Err(ProbError::PlayerMismatch {
                player: i,
                dist: self.player,
            });
        }
        Ok(())
    }
}

/// Size weights `w_s`: every coalition of size `s` containing a player gets
/// probability `w_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeProfile {
    players: PlayerSet,
    w: Vec<f64>,
}

impl SizeProfile {
    /// Requires `w_s >= 0` and `Σ_s C(n−1, s−1) w_s = 1`.
    pub fn new(players: PlayerSet, w: Vec<f64>) -> Result<Self, ProbError> {
        let n = players.n();
        if w.len() != n {
            return Err(ProbError::Length {
                expected: n,
                actual: w.len(),
            });
        }
        if let Some((s, &value)) = w.iter().enumerate().find(|(_, x)| !(**x >= 0.0) || !x.is_finite()) {
            return Err(ProbError::NegativeSize { size: s + 1, value });
        }
        let total: f64 = (1..=n).map(|s| binomial_f64(n - 1, s - 1) * w[s - 1]).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::Normalization(total));
        }
        Ok(Self { players, w })
    }

    /// `w_s = (s−1)!(n−s)!/n!`.
    pub fn shapley(players: PlayerSet) -> Self {
        Self::from_exact(players, &shapley_weights_exact(players))
    }

    /// `w_s = 2^{1−n}`.
    pub fn banzhaf(players: PlayerSet) -> Self {
        Self::from_exact(players, &banzhaf_weights_exact(players))
    }

    fn from_exact(players: PlayerSet, exact: &[BigRational]) -> Self {
        Self {
            players,
            w: exact.iter().map(|r| r.to_f64().expect("finite rational")).collect(),
        }
    }

    pub fn players(&self) -> PlayerSet {
        self.players
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// The per-player distribution induced by the profile.
    pub fn distribution(&self, player: usize) -> Result<CoalitionDistribution, ProbError> {
        CoalitionDistribution::from_fn(self.players, player, |s| self.w[s.size() - 1])
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn binomial_exact(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    binomial_exact(n, k).to_f64().expect("binomial fits in f64")
}

/// Shapley size weights as exact rationals.
pub fn shapley_weights_exact(players: PlayerSet) -> Vec<BigRational> {
    let n = players.n();
    (1..=n)
        .map(|s| BigRational::new(factorial(s - 1) * factorial(n - s), factorial(n)))
        .collect()
}

/// Banzhaf size weights as exact rationals.
pub fn banzhaf_weights_exact(players: PlayerSet) -> Vec<BigRational> {
    let n = players.n();
    let denom = BigInt::one() << (n - 1);
    (1..=n)
        .map(|_| BigRational::new(BigInt::one(), denom.clone()))
        .collect()
}

/// `Σ_s C(n−1, s−1) w_s`, the total mass a size profile puts on one player's
/// coalitions.
pub fn exact_total_mass(players: PlayerSet, w: &[BigRational]) -> BigRational {
    let n = players.n();
    (1..=n).fold(BigRational::zero(), |acc, s| {
        acc + BigRational::from_integer(binomial_exact(n - 1, s - 1)) * &w[s - 1]
    })
}

/// `E(∂_i^v) = Σ_{S∋i} p_S (v(S) − v(S∖i))`.
pub fn expected_marginal(v: &Game, i: usize, dist: &CoalitionDistribution) -> Result<f64, ProbError> {
    dist.check(v, i)?;
    Ok(dist
        .support()
        .map(|(s, p)| p * (v.value(s) - v.value_bits(s.without_bits(i))))
        .sum())
}

/// `σ(μ) = sqrt(Σ_{S∋i} p_S (∂_i^v(S) − μ)²)`.
pub fn deviation(v: &Game, i: usize, dist: &CoalitionDistribution, mu: f64) -> Result<f64, ProbError> {
    dist.check(v, i)?;
    let var: f64 = dist
        .support()
        .map(|(s, p)| {
            let d = v.value(s) - v.value_bits(s.without_bits(i)) - mu;
            p * d * d
        })
        .sum();
    Ok(var.sqrt())
}

/// The semivalue of `v` for a size profile.
pub fn probabilistic_value(v: &Game, profile: &SizeProfile) -> Result<Value, ProbError> {
    let players = v.players();
    if profile.players() != players {
        return Err(GameError::PlayerMismatch(profile.players().n(), players.n()).into());
    }
    let mut phi = vec![0.0; players.n()];
    for s in players.coalitions() {
        let w = profile.w[s.size() - 1];
        let vs = v.value(s);
        for i in s.members() {
            phi[i - 1] += w * (vs - v.value_bits(s.without_bits(i)));
        }
    }
    Ok(Value::new(players, phi)?)
}

/// The probabilistic value for one distribution per player, in player order.
pub fn probabilistic_value_per_player(
    v: &Game,
    dists: &[CoalitionDistribution],
) -> Result<Value, ProbError> {
    let players = v.players();
    if dists.len() != players.n() {
        return Err(ProbError::Length {
            expected: players.n(),
            actual: dists.len(),
        });
    }
    let phi = dists
        .iter()
        .enumerate()
        .map(|(idx, d)| expected_marginal(v, idx + 1, d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Value::new(players, phi)?)
}

pub fn shapley_value(v: &Game) -> Value {
    probabilistic_value(v, &SizeProfile::shapley(v.players())).expect("matching players")
}

pub fn banzhaf_value(v: &Game) -> Value {
    probabilistic_value(v, &SizeProfile::banzhaf(v.players())).expect("matching players")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{additive_game, unanimity_game};
    use approx::assert_abs_diff_eq;

    fn ps(n: usize) -> PlayerSet {
        PlayerSet::new(n).unwrap()
    }

    fn u12(n: usize) -> Game {
        unanimity_game(Coalition::from_members(&[1, 2], ps(n)).unwrap(), ps(n))
    }

    #[test]
    fn shapley_profiles() {
        assert_eq!(SizeProfile::shapley(ps(3)).weights(), &[1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0]);
        assert_eq!(SizeProfile::shapley(ps(1)).weights(), &[1.0]);
        assert_eq!(SizeProfile::shapley(ps(2)).weights(), &[0.5, 0.5]);
    }

    #[test]
    fn banzhaf_profiles() {
        assert_eq!(SizeProfile::banzhaf(ps(3)).weights(), &[0.25; 3]);
        assert_eq!(SizeProfile::banzhaf(ps(1)).weights(), &[1.0]);
        assert_eq!(SizeProfile::banzhaf(ps(4)).weights(), &[0.125; 4]);
    }

    #[test]
    fn exact_normalization() {
        for n in 1..=20 {
            let players = ps(n);
            assert!(exact_total_mass(players, &shapley_weights_exact(players)).is_one());
            assert!(exact_total_mass(players, &banzhaf_weights_exact(players)).is_one());
        }
    }

    #[test]
    fn profile_validation() {
        assert!(matches!(SizeProfile::new(ps(3), vec![0.5; 3]), Err(ProbError::Normalization(_))));
        assert!(matches!(
            SizeProfile::new(ps(2), vec![1.5, -0.5]),
            Err(ProbError::NegativeSize { size: 2, .. })
        ));
        assert!(SizeProfile::new(ps(2), vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn expected_marginal_examples() {
        let players = ps(3);
        let x = Value::new(players, vec![2.0, -1.0, 0.5]).unwrap();
        let v = additive_game(&x);
        let d = SizeProfile::shapley(players).distribution(2).unwrap();
        assert_abs_diff_eq!(expected_marginal(&v, 2, &d).unwrap(), -1.0, epsilon = 1e-15);

        let d3 = SizeProfile::banzhaf(players).distribution(3).unwrap();
        assert_eq!(expected_marginal(&u12(3), 3, &d3).unwrap(), 0.0);

        let d1 = SizeProfile::banzhaf(players).distribution(1).unwrap();
        assert_eq!(expected_marginal(&u12(3), 1, &d1).unwrap(), 0.5);
        assert_eq!(
            expected_marginal(&u12(3), 2, &d1),
            Err(ProbError::PlayerMismatch { player: 2, dist: 1 })
        );
    }

    #[test]
    fn value_examples() {
        let v = u12(3);
        assert_eq!(probabilistic_value(&v, &SizeProfile::shapley(ps(3))).unwrap().payoffs(), &[0.5, 0.5, 0.0]);
        assert_eq!(probabilistic_value(&v, &SizeProfile::banzhaf(ps(3))).unwrap().payoffs(), &[0.5, 0.5, 0.0]);

        let x = Value::new(ps(4), vec![1.0, 2.0, 3.0, -4.0]).unwrap();
        let profile = SizeProfile::new(ps(4), vec![0.1, 0.1, 0.1, 0.3]).unwrap();
        let got = probabilistic_value(&additive_game(&x), &profile).unwrap();
        for (a, b) in got.payoffs().iter().zip(x.payoffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn per_player_matches_profile() {
        let players = ps(4);
        let v = Game::from_fn(players, |s| (s.bits() as f64).ln());
        let profile = SizeProfile::shapley(players);
        let dists: Vec<_> = (1..=4).map(|i| profile.distribution(i).unwrap()).collect();
        let a = probabilistic_value_per_player(&v, &dists).unwrap();
        let b = probabilistic_value(&v, &profile).unwrap();
        for (x, y) in a.payoffs().iter().zip(b.payoffs()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
        assert!(probabilistic_value_per_player(&v, &dists[..3]).is_err());
    }

    #[test]
    fn deviation_examples() {
        let players = ps(3);
        let d1 = SizeProfile::banzhaf(players).distribution(1).unwrap();
        assert_abs_diff_eq!(deviation(&u12(3), 1, &d1, 0.5).unwrap(), 0.5, epsilon = 1e-15);

        let x = Value::new(players, vec![2.0, -1.0, 0.5]).unwrap();
        assert_eq!(deviation(&additive_game(&x), 1, &d1, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn distribution_validation() {
        let players = ps(3);
        assert!(matches!(
            CoalitionDistribution::from_fn(players, 1, |_| 0.5),
            Err(ProbError::Normalization(_))
        ));
        assert!(matches!(
            CoalitionDistribution::from_fn(players, 1, |s| if s.size() == 1 { -1.0 } else { 1.0 }),
            Err(ProbError::Negative { .. })
        ));
        assert!(CoalitionDistribution::from_fn(players, 4, |_| 0.25).is_err());
        let d = CoalitionDistribution::from_fn(players, 1, |s| if s.size() == 3 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(d.probability(players.grand_coalition()), 1.0);
    }
}
