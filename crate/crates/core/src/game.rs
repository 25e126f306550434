//! Players, coalitions and TU games.
//!
//! A coalition is a bitmask over at most [`MAX_PLAYERS`] players: bit `i - 1`
//! stands for player `i`. Games are stored densely, one entry per nonempty
//! coalition, at index `bitmask - 1`. The empty coalition is never stored and
//! always evaluates to zero.

use std::fmt;

use thiserror::Error;

/// Hard cap on the number of players.
pub const MAX_PLAYERS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("number of players must be between 1 and {MAX_PLAYERS}, got {0}")]
    PlayerCount(usize),
    #[error("coalition must have at least one member")]
    EmptyCoalition,
    #[error("player {index} out of range 1..={n}")]
    PlayerOutOfRange { index: usize, n: usize },
    #[error("player {0} listed twice")]
    DuplicatePlayer(usize),
    #[error("player {player} is not a member of coalition {coalition}")]
    NotAMember { player: usize, coalition: Coalition },
    #[error("expected {expected} entries, got {actual}")]
    TableLength { expected: usize, actual: usize },
    #[error("games are defined on different player sets ({0} vs {1} players)")]
    PlayerMismatch(usize, usize),
    #[error("k must be between 1 and {n}, got {k}")]
    KOutOfRange { k: usize, n: usize },
}

/// The player set `N = {1, ..., n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlayerSet {
    n: usize,
}

impl PlayerSet {
    pub fn new(n: usize) -> Result<Self, GameError> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(GameError::PlayerCount(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nonempty coalitions, `2^n - 1`.
    #[inline]
    pub fn num_coalitions(&self) -> usize {
        (1usize << self.n) - 1
    }

    #[inline]
    pub fn grand_coalition(&self) -> Coalition {
        Coalition(((1u64 << self.n) - 1) as u32)
    }

    /// Iterates all nonempty coalitions in table order (increasing bitmask).
    pub fn coalitions(&self) -> impl Iterator<Item = Coalition> {
        (1..=self.num_coalitions() as u32).map(Coalition)
    }

    /// Iterates the coalitions containing player `i`.
    pub fn coalitions_containing(&self, i: usize) -> impl Iterator<Item = Coalition> {
        let bit = 1u32 << (i - 1);
        self.coalitions().filter(move |s| s.0 & bit != 0)
    }

    fn check_player(&self, i: usize) -> Result<(), GameError> {
        if i == 0 || i > self.n {
            Err(GameError::PlayerOutOfRange { index: i, n: self.n })
        } else {
            Ok(())
        }
    }
}

/// A nonempty set of players.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition(u32);

impl Coalition {
    /// Builds a coalition from 1-based player indices.
    pub fn from_members(indices: &[usize], players: PlayerSet) -> Result<Self, GameError> {
        if indices.is_empty() {
            return Err(GameError::EmptyCoalition);
        }
        let mut bits = 0u32;
        for &i in indices {
            players.check_player(i)?;
            let bit = 1u32 << (i - 1);
            if bits & bit != 0 {
                return Err(GameError::DuplicatePlayer(i));
            }
            bits |= bit;
        }
        Ok(Self(bits))
    }

    pub fn singleton(i: usize, players: PlayerSet) -> Result<Self, GameError> {
        Self::from_members(&[i], players)
    }

    /// Builds a coalition from a raw bitmask.
    pub fn from_bits(bits: u32, players: PlayerSet) -> Result<Self, GameError> {
        if bits == 0 {
            return Err(GameError::EmptyCoalition);
        }
        if bits > players.grand_coalition().0 {
            let top = 32 - bits.leading_zeros() as usize;
            return Err(GameError::PlayerOutOfRange { index: top, n: players.n });
        }
        Ok(Self(bits))
    }

    /// Builds a coalition from its position in a dense game table.
    #[inline]
    pub fn from_index(index: usize) -> Self {
        Self(index as u32 + 1)
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.0
    }

    /// Position in a dense game table.
    #[inline]
    pub fn index(&self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        (1..=32).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    #[inline]
    pub fn is_subset_of(&self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order, 1-based.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.0;
        (0..32).filter(move |b| bits & (1 << b) != 0).map(|b| b + 1)
    }

    /// `N \ S`, or `None` when `S = N`.
    pub fn complement(&self, players: PlayerSet) -> Option<Coalition> {
        let rest = players.grand_coalition().0 & !self.0;
        (rest != 0).then_some(Coalition(rest))
    }

    /// `S \ {i}` as a raw bitmask (0 for the empty set).
    #[inline]
    pub fn without_bits(&self, i: usize) -> u32 {
        self.0 & !(1 << (i - 1))
    }

    /// Comma-separated member list, e.g. `1,3`.
    pub fn key(&self) -> String {
        let parts: Vec<String> = self.members().map(|m| m.to_string()).collect();
        parts.join(",")
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A TU game: a real number for every nonempty coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    players: PlayerSet,
    table: Vec<f64>,
}

impl Game {
    pub fn new(players: PlayerSet, table: Vec<f64>) -> Result<Self, GameError> {
        if table.len() != players.num_coalitions() {
            return Err(GameError::TableLength {
                expected: players.num_coalitions(),
                actual: table.len(),
            });
        }
        Ok(Self { players, table })
    }

    pub fn zero(players: PlayerSet) -> Self {
        Self {
            players,
            table: vec![0.0; players.num_coalitions()],
        }
    }

    pub fn from_fn(players: PlayerSet, f: impl FnMut(Coalition) -> f64) -> Self {
        Self {
            players,
            table: players.coalitions().map(f).collect(),
        }
    }

    #[inline]
    pub fn players(&self) -> PlayerSet {
        self.players
    }

    #[inline]
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn into_table(self) -> Vec<f64> {
        self.table
    }

    #[inline]
    pub fn value(&self, s: Coalition) -> f64 {
        self.table[s.index()]
    }

    /// Evaluates at a raw bitmask; the empty set yields 0.
    #[inline]
    pub fn value_bits(&self, bits: u32) -> f64 {
        if bits == 0 {
            0.0
        } else {
            self.table[bits as usize - 1]
        }
    }

    #[inline]
    pub fn grand_value(&self) -> f64 {
        *self.table.last().expect("games have at least one coalition")
    }

    pub fn set(&mut self, s: Coalition, value: f64) {
        self.table[s.index()] = value;
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Game, b: f64) -> Result<Game, GameError> {
        if self.players != other.players {
            return Err(GameError::PlayerMismatch(self.players.n, other.players.n));
        }
        Ok(Game {
            players: self.players,
            table: self
                .table
                .iter()
                .zip(&other.table)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }
}

/// A payoff vector, one entry per player (index 0 is player 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Value {
    players: PlayerSet,
    payoffs: Vec<f64>,
}

impl Value {
    pub fn new(players: PlayerSet, payoffs: Vec<f64>) -> Result<Self, GameError> {
        if payoffs.len() != players.n() {
            return Err(GameError::TableLength {
                expected: players.n(),
                actual: payoffs.len(),
            });
        }
        Ok(Self { players, payoffs })
    }

    #[inline]
    pub fn players(&self) -> PlayerSet {
        self.players
    }

    #[inline]
    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    /// Payoff of player `i` (1-based).
    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.payoffs[i - 1]
    }

    pub fn total(&self) -> f64 {
        self.payoffs.iter().sum()
    }

    /// `x(S) = sum of x_i over i in S`.
    pub fn coalition_sum(&self, s: Coalition) -> f64 {
        s.members().map(|i| self.payoffs[i - 1]).sum()
    }

    pub fn additive_game(&self) -> Game {
        additive_game(self)
    }
}

/// The additive game `v(S) = x(S)`.
pub fn additive_game(x: &Value) -> Game {
    let players = x.players;
    let mut table = vec![0.0; players.num_coalitions()];
    // v(S) = v(S minus lowest member) + x_lowest
    for bits in 1..=players.num_coalitions() {
        let low = bits.trailing_zeros() as usize;
        let rest = bits & (bits - 1);
        let prev = if rest == 0 { 0.0 } else { table[rest - 1] };
        table[bits - 1] = prev + x.payoffs[low];
    }
    Game { players, table }
}

/// The unanimity game `u_T`: 1 on supersets of `T`, 0 elsewhere.
pub fn unanimity_game(t: Coalition, players: PlayerSet) -> Game {
    Game::from_fn(players, |s| if t.is_subset_of(s) { 1.0 } else { 0.0 })
}

/// The dual game `v*(S) = v(N) - v(N \ S)`.
pub fn dual_game(v: &Game) -> Game {
    let players = v.players;
    let grand = players.grand_coalition().bits();
    let vn = v.grand_value();
    Game::from_fn(players, |s| vn - v.value_bits(grand & !s.bits()))
}

/// `v(S) - v(S \ {i})`, defined only for `i` in `S`.
pub fn marginal_contribution(v: &Game, i: usize, s: Coalition) -> Result<f64, GameError> {
    v.players.check_player(i)?;
    if !s.contains(i) {
        return Err(GameError::NotAMember { player: i, coalition: s });
    }
    Ok(v.value(s) - v.value_bits(s.without_bits(i)))
}

/// Möbius coefficients `m(S)` of a game, with `v(S) = sum of m(T) over nonempty T ⊆ S`.
#[derive(Debug, Clone, PartialEq)]
pub struct MobiusCoefficients {
    players: PlayerSet,
    table: Vec<f64>,
}

impl MobiusCoefficients {
    #[inline]
    pub fn players(&self) -> PlayerSet {
        self.players
    }

    #[inline]
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    #[inline]
    pub fn coefficient(&self, s: Coalition) -> f64 {
        self.table[s.index()]
    }

    /// Rebuilds the game by summing coefficients over subsets.
    pub fn to_game(&self) -> Game {
        let mut full = with_empty(&self.table);
        for bit in 0..self.players.n {
            let mask = 1usize << bit;
            for s in 0..full.len() {
                if s & mask != 0 {
                    full[s] += full[s ^ mask];
                }
            }
        }
        Game {
            players: self.players,
            table: full.split_off(1),
        }
    }

    /// View the coefficients as a game table (used by the CLI).
    pub fn as_game(&self) -> Game {
        Game {
            players: self.players,
            table: self.table.clone(),
        }
    }
}

fn with_empty(table: &[f64]) -> Vec<f64> {
    let mut full = Vec::with_capacity(table.len() + 1);
    full.push(0.0);
    full.extend_from_slice(table);
    full
}

/// Inclusion-exclusion `m(S) = sum over T ⊆ S of (-1)^{|S \ T|} v(T)`,
/// evaluated one player at a time in `O(n 2^n)`.
pub fn mobius_transform(v: &Game) -> MobiusCoefficients {
    let mut full = with_empty(&v.table);
    for bit in 0..v.players.n {
        let mask = 1usize << bit;
        for s in 0..full.len() {
            if s & mask != 0 {
                full[s] -= full[s ^ mask];
            }
        }
    }
    MobiusCoefficients {
        players: v.players,
        table: full.split_off(1),
    }
}

/// The coalitions of size 1..=k in basis order: by size, then by bitmask.
pub fn kadditive_coalitions(players: PlayerSet, k: usize) -> Result<Vec<Coalition>, GameError> {
    if k == 0 || k > players.n {
        return Err(GameError::KOutOfRange { k, n: players.n });
    }
    let mut out: Vec<Coalition> = players.coalitions().filter(|t| t.size() <= k).collect();
    out.sort_by_key(|t| (t.size(), t.bits()));
    Ok(out)
}

/// Unanimity games `u_T` for `1 <= |T| <= k`; for `k = 1` these are `ζ_1, ..., ζ_n`.
pub fn kadditive_basis(players: PlayerSet, k: usize) -> Result<Vec<Game>, GameError> {
    Ok(kadditive_coalitions(players, k)?
        .into_iter()
        .map(|t| unanimity_game(t, players))
        .collect())
}
