//! Weighted least-squares approximation of games by members of a subspace.
//!
//! For a game `v`, a weight matrix `W`, a linear offset `c(v)` and a subspace
//! spanned by basis games `b_1, ..., b_k`, the engine minimizes
//!
//! ```text
//! (v − u)ᵀ W (v − u) + c(v)ᵀ(v − u),   u = Σ x_i b_i,   subject to A x = b(v)
//! ```
//!
//! Up to a constant this is `xᵀQx − c̄ᵀx` with
//!
//! ```text
//! q_ij = Σ_S Σ_T w_ST b_i(S) b_j(T)
//! c̃_S  = c_S + 2 Σ_T w_ST v_T
//! c̄_i  = Σ_S c̃_S b_i(S)
//! ```
//!
//! and is handed to the kernel as `½ xᵀ(2Q)x − c̄ᵀx`. The value of the game is
//! read off the optimal `u*` at the singletons: `v̂_j = u*({j})`.
//!
//! Positive definiteness is checked on the projected `k x k` matrix `Q`, never
//! on `W`; weights may be negative as long as `Q` is definite.

use thiserror::Error;

use crate::game::{kadditive_basis, Coalition, Game, GameError, PlayerSet, Value};
use crate::qp::{
    cholesky_pd_check, rank, solve_qp_certified, DenseMatrix, InnerProduct, QpError, Tolerances,
};

/// Largest player count for which `(2^n − 1)²` matrices are accepted.
pub const MAX_PLAYERS_DENSE: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproxError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(
        "weights do not induce a positive definite form: no unique least-square value \
         (failing pivot {pivot})"
    )]
    NotPositiveDefinite { pivot: usize },
    #[error("constraints are inconsistent for this game")]
    Inconsistent,
    #[error("numerical failure: {0}")]
    Numerical(QpError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("basis is empty")]
    EmptyBasis,
    #[error("basis games are linearly dependent (rank {rank} < {k})")]
    DependentBasis { rank: usize, k: usize },
    #[error("full coalition matrices are limited to n <= {MAX_PLAYERS_DENSE}, got n = {0}")]
    TooManyPlayers(usize),
}

impl From<QpError> for ApproxError {
    fn from(e: QpError) -> Self {
        match e {
            QpError::NotPositiveDefinite { pivot } => ApproxError::NotPositiveDefinite { pivot },
            QpError::Inconsistent => ApproxError::Inconsistent,
            QpError::Dimension(msg) => ApproxError::Dimension(msg),
            other => ApproxError::Numerical(other),
        }
    }
}

/// How the squared residuals `v(S) − u(S)` are weighted.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// Full symmetric matrix `w_ST` over coalition pairs.
    FullMatrix(DenseMatrix),
    /// One weight `α_S` per coalition, in table order.
    Diagonal(Vec<f64>),
    /// One weight `α(s)` per coalition size `s = 1..n`.
    UniformBySize(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    players: PlayerSet,
    kind: WeightKind,
}

impl WeightScheme {
    /// Full weight matrix; stored as `(W + Wᵀ) / 2`, which leaves the
    /// objective unchanged.
    pub fn full_matrix(players: PlayerSet, w: DenseMatrix) -> Result<Self, ApproxError> {
        if players.n() > MAX_PLAYERS_DENSE {
            return Err(ApproxError::TooManyPlayers(players.n()));
        }
        let nc = players.num_coalitions();
        if w.rows() != nc || w.cols() != nc {
            return Err(ApproxError::Dimension(format!(
                "weight matrix is {}x{}, expected {nc}x{nc}",
                w.rows(),
                w.cols()
            )));
        }
        let sym = DenseMatrix::from_fn(nc, nc, |i, j| 0.5 * (w[(i, j)] + w[(j, i)]));
        Ok(Self {
            players,
            kind: WeightKind::FullMatrix(sym),
        })
    }

    pub fn diagonal(players: PlayerSet, alpha: Vec<f64>) -> Result<Self, ApproxError> {
        if alpha.len() != players.num_coalitions() {
            return Err(ApproxError::Dimension(format!(
                "{} coalition weights, expected {}",
                alpha.len(),
                players.num_coalitions()
            )));
        }
        Ok(Self {
            players,
            kind: WeightKind::Diagonal(alpha),
        })
    }

    pub fn uniform_by_size(players: PlayerSet, alpha: Vec<f64>) -> Result<Self, ApproxError> {
        if alpha.len() != players.n() {
            return Err(ApproxError::Dimension(format!(
                "{} size weights, expected {}",
                alpha.len(),
                players.n()
            )));
        }
        Ok(Self {
            players,
            kind: WeightKind::UniformBySize(alpha),
        })
    }

    /// `α_S = 1` for every coalition.
    pub fn equal(players: PlayerSet) -> Self {
        Self {
            players,
            kind: WeightKind::UniformBySize(vec![1.0; players.n()]),
        }
    }

    pub fn players(&self) -> PlayerSet {
        self.players
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Per-coalition weights for the diagonal variants, `None` for a full matrix.
    pub fn diagonal_weights(&self) -> Option<Vec<f64>> {
        match &self.kind {
            WeightKind::FullMatrix(_) => None,
            WeightKind::Diagonal(a) => Some(a.clone()),
            WeightKind::UniformBySize(a) => {
                Some(self.players.coalitions().map(|s| a[s.size() - 1]).collect())
            }
        }
    }

    /// `W v` for a coalition-indexed vector.
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match &self.kind {
            WeightKind::FullMatrix(w) => w.mul_vec(v),
            WeightKind::Diagonal(a) => a.iter().zip(v).map(|(a, x)| a * x).collect(),
            WeightKind::UniformBySize(a) => v
                .iter()
                .enumerate()
                .map(|(idx, x)| a[Coalition::from_index(idx).size() - 1] * x)
                .collect(),
        }
    }
}

/// A linearly independent family of games spanning the approximation space.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    players: PlayerSet,
    games: Vec<Game>,
}

impl SubspaceBasis {
    /// Checks that all games share a player set and have full rank.
    pub fn new(games: Vec<Game>) -> Result<Self, ApproxError> {
        let players = games.first().ok_or(ApproxError::EmptyBasis)?.players();
        if let Some(g) = games.iter().find(|g| g.players() != players) {
            return Err(GameError::PlayerMismatch(players.n(), g.players().n()).into());
        }
        let k = games.len();
        let nc = players.num_coalitions();
        let mut data = Vec::with_capacity(k * nc);
        for g in &games {
            data.extend_from_slice(g.table());
        }
        let m = DenseMatrix::from_row_major(k, nc, data)?;
        let r = rank(&m, &Tolerances::default());
        if r < k {
            return Err(ApproxError::DependentBasis { rank: r, k });
        }
        Ok(Self { players, games })
    }

    /// `ζ_1, ..., ζ_n`, spanning the additive games.
    pub fn singletons(players: PlayerSet) -> Self {
        Self {
            players,
            games: kadditive_basis(players, 1).expect("k = 1 is always in range"),
        }
    }

    /// Unanimity games of all coalitions of size at most `k`.
    pub fn k_additive(players: PlayerSet, k: usize) -> Result<Self, ApproxError> {
        Ok(Self {
            players,
            games: kadditive_basis(players, k)?,
        })
    }

    pub fn players(&self) -> PlayerSet {
        self.players
    }

    pub fn games(&self) -> &[Game] {
        &self.games
    }

    pub fn dim(&self) -> usize {
        self.games.len()
    }

    /// `Σ x_i b_i`.
    pub fn combine(&self, x: &[f64]) -> Game {
        let mut table = vec![0.0; self.players.num_coalitions()];
        for (xi, g) in x.iter().zip(&self.games) {
            for (t, b) in table.iter_mut().zip(g.table()) {
                *t += xi * b;
            }
        }
        Game::new(self.players, table).expect("basis tables have the right length")
    }
}

/// Linear constraints `A x = b(v)` in basis coordinates; `b` is stored as an
/// `m x (2^n − 1)` matrix applied to the game table.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraintMap {
    a: DenseMatrix,
    b_map: DenseMatrix,
}

impl LinearConstraintMap {
    pub fn new(a: DenseMatrix, b_map: DenseMatrix) -> Result<Self, ApproxError> {
        if a.rows() != b_map.rows() {
            return Err(ApproxError::Dimension(format!(
                "{} constraint rows but {} right-hand-side rows",
                a.rows(),
                b_map.rows()
            )));
        }
        Ok(Self { a, b_map })
    }

    /// No constraints (`m = 0`).
    pub fn unconstrained(basis: &SubspaceBasis) -> Self {
        Self {
            a: DenseMatrix::zeros(0, basis.dim()),
            b_map: DenseMatrix::zeros(0, basis.players().num_coalitions()),
        }
    }

    /// `u(N) = v(N)`: one row with `A_1i = b_i(N)`.
    pub fn efficiency(basis: &SubspaceBasis) -> Self {
        let players = basis.players();
        let grand = players.grand_coalition();
        let a = DenseMatrix::from_fn(1, basis.dim(), |_, i| basis.games()[i].value(grand));
        let nc = players.num_coalitions();
        let b_map = DenseMatrix::from_fn(1, nc, |_, j| if j + 1 == nc { 1.0 } else { 0.0 });
        Self { a, b_map }
    }

    /// `Σ_S u(S) = Σ_S v(S)`.
    pub fn sum_preservation(basis: &SubspaceBasis) -> Self {
        let a = DenseMatrix::from_fn(1, basis.dim(), |_, i| basis.games()[i].table().iter().sum());
        let b_map = DenseMatrix::from_fn(1, basis.players().num_coalitions(), |_, _| 1.0);
        Self { a, b_map }
    }

    /// Both constraint sets together.
    pub fn and(&self, other: &LinearConstraintMap) -> Result<Self, ApproxError> {
        Ok(Self {
            a: self.a.vstack(&other.a)?,
            b_map: self.b_map.vstack(&other.b_map)?,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    /// `b(v)`.
    pub fn rhs(&self, v: &Game) -> Vec<f64> {
        self.b_map.mul_vec(v.table())
    }
}

/// The linear offset `c(v)`, zero unless given as a `(2^n − 1)²` matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOffsetMap {
    Zero,
    Matrix(DenseMatrix),
}

impl LinearOffsetMap {
    pub fn from_matrix(players: PlayerSet, c: DenseMatrix) -> Result<Self, ApproxError> {
        if players.n() > MAX_PLAYERS_DENSE {
            return Err(ApproxError::TooManyPlayers(players.n()));
        }
        let nc = players.num_coalitions();
        if c.rows() != nc || c.cols() != nc {
            return Err(ApproxError::Dimension(format!(
                "offset matrix is {}x{}, expected {nc}x{nc}",
                c.rows(),
                c.cols()
            )));
        }
        Ok(Self::Matrix(c))
    }

    pub fn apply(&self, v: &Game) -> Vec<f64> {
        match self {
            Self::Zero => vec![0.0; v.table().len()],
            Self::Matrix(c) => c.mul_vec(v.table()),
        }
    }
}

fn check_players(weights: &WeightScheme, basis: &SubspaceBasis) -> Result<(), ApproxError> {
    if weights.players() != basis.players() {
        return Err(GameError::PlayerMismatch(weights.players().n(), basis.players().n()).into());
    }
    Ok(())
}

/// The projected quadratic form `q_ij = Σ_S Σ_T w_ST b_i(S) b_j(T)`.
pub fn build_gram(weights: &WeightScheme, basis: &SubspaceBasis) -> Result<DenseMatrix, ApproxError> {
    check_players(weights, basis)?;
    let k = basis.dim();
    let games = basis.games();
    let weighted: Vec<Vec<f64>> = games.iter().map(|g| weights.apply(g.table())).collect();
    let mut q = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let s = crate::qp::dot(&weighted[i], games[j].table());
            q[(i, j)] = s;
            q[(j, i)] = s;
        }
    }
    Ok(q)
}

/// `c̄_i = Σ_S (c_S + 2 Σ_T w_ST v_T) b_i(S)`.
pub fn build_linear_term(
    weights: &WeightScheme,
    offset: &LinearOffsetMap,
    v: &Game,
    basis: &SubspaceBasis,
) -> Result<Vec<f64>, ApproxError> {
    check_players(weights, basis)?;
    if v.players() != basis.players() {
        return Err(GameError::PlayerMismatch(v.players().n(), basis.players().n()).into());
    }
    Ok(linear_term(weights, &offset.apply(v), v, basis))
}

fn linear_term(weights: &WeightScheme, c: &[f64], target: &Game, basis: &SubspaceBasis) -> Vec<f64> {
    let wv = weights.apply(target.table());
    let c_tilde: Vec<f64> = c.iter().zip(&wv).map(|(c, w)| c + 2.0 * w).collect();
    basis
        .games()
        .iter()
        .map(|b| crate::qp::dot(&c_tilde, b.table()))
        .collect()
}

/// Optimal coefficients, the approximating game and the induced value.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationResult {
    pub x_star: Vec<f64>,
    pub u_star: Game,
    pub value: Value,
}

/// A fully specified approximation problem with its quadratic form
/// certified positive definite; solving it for many games reuses the form.
#[derive(Debug, Clone)]
pub struct ApproximationProblem {
    weights: WeightScheme,
    basis: SubspaceBasis,
    constraints: LinearConstraintMap,
    offset: LinearOffsetMap,
    gram: DenseMatrix,
    // 2Q, for the kernel's ½ convention
    form: InnerProduct,
    tol: Tolerances,
}

impl ApproximationProblem {
    pub fn new(
        weights: WeightScheme,
        basis: SubspaceBasis,
        constraints: LinearConstraintMap,
        offset: LinearOffsetMap,
    ) -> Result<Self, ApproxError> {
        Self::with_tolerances(weights, basis, constraints, offset, Tolerances::default())
    }

    pub fn with_tolerances(
        weights: WeightScheme,
        basis: SubspaceBasis,
        constraints: LinearConstraintMap,
        offset: LinearOffsetMap,
        tol: Tolerances,
    ) -> Result<Self, ApproxError> {
        let gram = build_gram(&weights, &basis)?;
        if constraints.rows() > 0 && constraints.matrix().cols() != basis.dim() {
            return Err(ApproxError::Dimension(format!(
                "constraint matrix has {} columns, basis has {} games",
                constraints.matrix().cols(),
                basis.dim()
            )));
        }
        if constraints.b_map.rows() > 0 && constraints.b_map.cols() != basis.players().num_coalitions() {
            return Err(ApproxError::Dimension("right-hand-side map has the wrong width".into()));
        }
        if let LinearOffsetMap::Matrix(c) = &offset {
            if c.rows() != basis.players().num_coalitions() {
                return Err(ApproxError::Dimension("offset map has the wrong size".into()));
            }
        }
        let form = InnerProduct::new(&gram.scaled(2.0), &tol)?;
        Ok(Self {
            weights,
            basis,
            constraints,
            offset,
            gram,
            form,
            tol,
        })
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    pub fn basis(&self) -> &SubspaceBasis {
        &self.basis
    }

    pub fn weights(&self) -> &WeightScheme {
        &self.weights
    }

    pub fn constraints(&self) -> &LinearConstraintMap {
        &self.constraints
    }

    pub fn solve(&self, v: &Game) -> Result<ApproximationResult, ApproxError> {
        if v.players() != self.basis.players() {
            return Err(GameError::PlayerMismatch(v.players().n(), self.basis.players().n()).into());
        }
        self.solve_parts(v, &self.constraints.rhs(v))
    }

    /// Approximates `target` with an explicitly supplied constraint
    /// right-hand side. Used when the target is itself a linear image of the
    /// game whose data fixes the constraints.
    pub fn solve_parts(&self, target: &Game, rhs: &[f64]) -> Result<ApproximationResult, ApproxError> {
        let c_bar = linear_term(&self.weights, &self.offset.apply(target), target, &self.basis);
        let sol = solve_qp_certified(&self.form, &c_bar, self.constraints.matrix(), rhs, &self.tol)?;
        let u_star = self.basis.combine(&sol.x);
        let players = self.basis.players();
        let payoffs = (1..=players.n())
            .map(|j| u_star.value(Coalition::singleton(j, players).expect("valid player")))
            .collect();
        Ok(ApproximationResult {
            x_star: sol.x,
            u_star,
            value: Value::new(players, payoffs)?,
        })
    }
}

/// One-shot form of [`ApproximationProblem::solve`].
pub fn solve_approximation(
    v: &Game,
    weights: &WeightScheme,
    basis: &SubspaceBasis,
    constraints: &LinearConstraintMap,
    offset: &LinearOffsetMap,
) -> Result<ApproximationResult, ApproxError> {
    ApproximationProblem::new(weights.clone(), basis.clone(), constraints.clone(), offset.clone())?
        .solve(v)
}

/// Checks whether a weight scheme yields a positive definite form on a basis.
pub fn gram_is_positive_definite(
    weights: &WeightScheme,
    basis: &SubspaceBasis,
    tol: &Tolerances,
) -> Result<Result<(), usize>, ApproxError> {
    let q = build_gram(weights, basis)?;
    match cholesky_pd_check(&q, tol) {
        Ok(_) => Ok(Ok(())),
        Err(QpError::NotPositiveDefinite { pivot }) => Ok(Err(pivot)),
        Err(e) => Err(e.into()),
    }
}

/// A linear value given by its matrix `L` (`n x (2^n − 1)`), `Φ(v) = L v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearValueMap {
    players: PlayerSet,
    matrix: DenseMatrix,
}

impl LinearValueMap {
    pub fn new(players: PlayerSet, matrix: DenseMatrix) -> Result<Self, ApproxError> {
        if matrix.rows() != players.n() || matrix.cols() != players.num_coalitions() {
            return Err(ApproxError::Dimension(format!(
                "value matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                players.n(),
                players.num_coalitions()
            )));
        }
        Ok(Self { players, matrix })
    }

    pub fn apply(&self, v: &Game) -> Value {
        Value::new(self.players, self.matrix.mul_vec(v.table())).expect("n rows")
    }

    /// An unconstrained least-squares problem whose value is exactly `L v`.
    ///
    /// Only singletons carry weight (`Q = I` on the singleton basis), and the
    /// offset is chosen so that `c̄ = 2 L v`.
    pub fn as_least_squares(&self) -> Result<ApproximationProblem, ApproxError> {
        let players = self.players;
        let nc = players.num_coalitions();
        let alpha: Vec<f64> = players
            .coalitions()
            .map(|s| if s.size() == 1 { 1.0 } else { 0.0 })
            .collect();
        let mut c = DenseMatrix::zeros(nc, nc);
        for i in 1..=players.n() {
            let row = Coalition::singleton(i, players)?.index();
            for col in 0..nc {
                c[(row, col)] = 2.0 * self.matrix[(i - 1, col)];
            }
            c[(row, row)] -= 2.0;
        }
        let basis = SubspaceBasis::singletons(players);
        let constraints = LinearConstraintMap::unconstrained(&basis);
        ApproximationProblem::new(
            WeightScheme::diagonal(players, alpha)?,
            basis,
            constraints,
            LinearOffsetMap::from_matrix(players, c)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{additive_game, unanimity_game};
    use approx::assert_abs_diff_eq;

    fn ps(n: usize) -> PlayerSet {
        PlayerSet::new(n).unwrap()
    }

    fn coal(m: &[usize], n: usize) -> Coalition {
        Coalition::from_members(m, ps(n)).unwrap()
    }

    #[test]
    fn gram_of_equal_weights_on_singletons() {
        let q = build_gram(&WeightScheme::equal(ps(3)), &SubspaceBasis::singletons(ps(3))).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(q[(i, j)], if i == j { 4.0 } else { 2.0 });
            }
        }
    }

    #[test]
    fn gram_diagonal_is_superset_sum() {
        let players = ps(4);
        let alpha: Vec<f64> = (0..players.num_coalitions()).map(|i| (i as f64 * 0.7).cos()).collect();
        let w = WeightScheme::diagonal(players, alpha.clone()).unwrap();
        let q = build_gram(&w, &SubspaceBasis::singletons(players)).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                let expected: f64 = players
                    .coalitions()
                    .filter(|s| s.contains(i) && s.contains(j))
                    .map(|s| alpha[s.index()])
                    .sum();
                assert_abs_diff_eq!(q[(i - 1, j - 1)], expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gram_full_basis_identity_weights() {
        let players = ps(2);
        let basis = SubspaceBasis::k_additive(players, 2).unwrap();
        let q = build_gram(&WeightScheme::equal(players), &basis).unwrap();
        // basis ζ1, ζ2, u12 over coalitions {1},{2},{12}
        let b = [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                let expected: f64 = (0..3).map(|s| b[i][s] * b[j][s]).sum();
                assert_eq!(q[(i, j)], expected);
            }
        }
    }

    #[test]
    fn linear_term_examples() {
        let players = ps(3);
        let basis = SubspaceBasis::singletons(players);
        let w = WeightScheme::equal(players);
        let zero = build_linear_term(&w, &LinearOffsetMap::Zero, &Game::zero(players), &basis).unwrap();
        assert_eq!(zero, vec![0.0; 3]);

        let v = Game::from_fn(players, |s| s.bits() as f64);
        let c = build_linear_term(&w, &LinearOffsetMap::Zero, &v, &basis).unwrap();
        for i in 1..=3 {
            let expected: f64 = 2.0 * players.coalitions_containing(i).map(|s| v.value(s)).sum::<f64>();
            assert_eq!(c[i - 1], expected);
        }
    }

    #[test]
    fn efficiency_rows() {
        let players = ps(3);
        let eff = LinearConstraintMap::efficiency(&SubspaceBasis::singletons(players));
        assert_eq!(eff.matrix().row(0), &[1.0, 1.0, 1.0]);
        let v = Game::from_fn(players, |s| s.bits() as f64);
        assert_eq!(eff.rhs(&v), vec![7.0]);
        assert_eq!(eff.rhs(&Game::zero(players)), vec![0.0]);

        let eff2 = LinearConstraintMap::efficiency(&SubspaceBasis::k_additive(players, 2).unwrap());
        assert_eq!(eff2.matrix().row(0), &[1.0; 6]);
    }

    #[test]
    fn sum_preservation_rows() {
        let players = ps(2);
        let sp = LinearConstraintMap::sum_preservation(&SubspaceBasis::singletons(players));
        assert_eq!(sp.matrix().row(0), &[2.0, 2.0]);
        assert_eq!(sp.rhs(&unanimity_game(coal(&[1, 2], 2), players)), vec![1.0]);
        let add = additive_game(&Value::new(players, vec![1.0, 1.0]).unwrap());
        assert_eq!(sp.rhs(&add), vec![4.0]);
    }

    #[test]
    fn additive_game_is_reproduced() {
        let players = ps(3);
        let x = Value::new(players, vec![0.25, -1.5, 2.0]).unwrap();
        let v = additive_game(&x);
        let basis = SubspaceBasis::singletons(players);
        let eff = LinearConstraintMap::efficiency(&basis);
        let r = solve_approximation(&v, &WeightScheme::equal(players), &basis, &eff, &LinearOffsetMap::Zero).unwrap();
        for (a, b) in r.value.payoffs().iter().zip(x.payoffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn charnes_weights_give_shapley_on_unanimity() {
        let players = ps(3);
        let v = unanimity_game(coal(&[1, 2], 3), players);
        let basis = SubspaceBasis::singletons(players);
        let eff = LinearConstraintMap::efficiency(&basis);
        let w = WeightScheme::uniform_by_size(players, vec![1.0, 1.0, 0.0]).unwrap();
        let r = solve_approximation(&v, &w, &basis, &eff, &LinearOffsetMap::Zero).unwrap();
        let expected = [0.5, 0.5, 0.0];
        for (a, b) in r.value.payoffs().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(r.u_star.grand_value(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unconstrained_equal_weight_fit_on_unanimity_game() {
        // Q = 2I + 2J, rhs_i = Σ_{S∋i} v(S) = (2, 2, 1); x = ½(rhs − Σrhs/4)
        let players = ps(3);
        let v = unanimity_game(coal(&[1, 2], 3), players);
        let basis = SubspaceBasis::singletons(players);
        let free = LinearConstraintMap::unconstrained(&basis);
        let r = solve_approximation(&v, &WeightScheme::equal(players), &basis, &free, &LinearOffsetMap::Zero).unwrap();
        let expected = [0.375, 0.375, -0.125];
        for (a, b) in r.value.payoffs().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn negative_weights_rejected_with_pivot() {
        let players = ps(3);
        let w = WeightScheme::uniform_by_size(players, vec![1.0, -1.0, 0.0]).unwrap();
        let basis = SubspaceBasis::singletons(players);
        let eff = LinearConstraintMap::efficiency(&basis);
        let err = solve_approximation(&Game::zero(players), &w, &basis, &eff, &LinearOffsetMap::Zero).unwrap_err();
        assert!(matches!(err, ApproxError::NotPositiveDefinite { .. }));
        assert!(err.to_string().contains("no unique least-square value"));
    }

    #[test]
    fn indefinite_weights_with_definite_gram_are_accepted() {
        // α = (0, 1, −1): p = 0, q = 1
        let players = ps(3);
        let w = WeightScheme::uniform_by_size(players, vec![0.0, 1.0, -1.0]).unwrap();
        let q = build_gram(&w, &SubspaceBasis::singletons(players)).unwrap();
        assert_eq!(q, DenseMatrix::identity(3));
        assert!(gram_is_positive_definite(&w, &SubspaceBasis::singletons(players), &Tolerances::default())
            .unwrap()
            .is_ok());
    }

    #[test]
    fn efficiency_with_sum_preservation_on_singletons_is_usually_inconsistent() {
        let players = ps(3);
        let basis = SubspaceBasis::singletons(players);
        let both = LinearConstraintMap::efficiency(&basis)
            .and(&LinearConstraintMap::sum_preservation(&basis))
            .unwrap();
        let p = ApproximationProblem::new(WeightScheme::equal(players), basis, both, LinearOffsetMap::Zero).unwrap();
        let v = unanimity_game(coal(&[1, 2], 3), players);
        assert_eq!(p.solve(&v).unwrap_err(), ApproxError::Inconsistent);
        // an additive game satisfies Σ_S v(S) = 2^{n-1} v(N): redundant rows, still solvable
        let x = Value::new(players, vec![1.0, 2.0, 3.0]).unwrap();
        let r = p.solve(&additive_game(&x)).unwrap();
        for (a, b) in r.value.payoffs().iter().zip(x.payoffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn two_additive_with_both_constraints() {
        let players = ps(3);
        let basis = SubspaceBasis::k_additive(players, 2).unwrap();
        let both = LinearConstraintMap::efficiency(&basis)
            .and(&LinearConstraintMap::sum_preservation(&basis))
            .unwrap();
        let v = Game::from_fn(players, |s| (s.bits() as f64).sqrt());
        let r = solve_approximation(&v, &WeightScheme::equal(players), &basis, &both, &LinearOffsetMap::Zero).unwrap();
        assert_abs_diff_eq!(r.u_star.grand_value(), v.grand_value(), epsilon = 1e-10);
        let total_u: f64 = r.u_star.table().iter().sum();
        let total_v: f64 = v.table().iter().sum();
        assert_abs_diff_eq!(total_u, total_v, epsilon = 1e-10);
    }

    #[test]
    fn dependent_basis_rejected() {
        let players = ps(2);
        let z = unanimity_game(coal(&[1], 2), players);
        let err = SubspaceBasis::new(vec![z.clone(), z.combine(2.0, &z, 0.0).unwrap()]).unwrap_err();
        assert_eq!(err, ApproxError::DependentBasis { rank: 1, k: 2 });
        assert_eq!(SubspaceBasis::new(vec![]).unwrap_err(), ApproxError::EmptyBasis);
    }

    #[test]
    fn full_matrix_gate_and_symmetrization() {
        assert_eq!(
            WeightScheme::full_matrix(ps(11), DenseMatrix::zeros(1, 1)).unwrap_err(),
            ApproxError::TooManyPlayers(11)
        );
        let w = DenseMatrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let s = WeightScheme::full_matrix(ps(2), w).unwrap();
        match s.kind() {
            WeightKind::FullMatrix(m) => assert_eq!((m[(0, 1)], m[(1, 0)]), (1.0, 1.0)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn linear_value_map_round_trip() {
        let players = ps(3);
        let l = DenseMatrix::from_fn(3, 7, |i, j| ((i * 7 + j) as f64 * 0.31).sin());
        let map = LinearValueMap::new(players, l).unwrap();
        let problem = map.as_least_squares().unwrap();
        let v = Game::from_fn(players, |s| (s.bits() as f64 * 1.3).cos());
        let got = problem.solve(&v).unwrap().value;
        for (a, b) in got.payoffs().iter().zip(map.apply(&v).payoffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
