//! Linear values of cooperative TU games as constrained least-squares
//! approximations.
//!
//! - [`game`]: players, coalitions, games and standard transforms.
//! - [`qp`]: dense kernel with the KKT solve for equality-constrained
//!   quadratic programs.
//! - [`approx`]: weighted approximation of a game by a subspace of games.
//! - [`regular`]: closed-form solutions for two-parameter (regular) forms.
//! - [`ruiz`]: least squares on average coalition excesses and its reduction to the engine.
//! - [`prob`]: probabilistic values and semivalues.

pub mod approx;
pub mod game;
pub mod prob;
pub mod qp;
pub mod regular;
pub mod ruiz;

pub use approx::{
    solve_approximation, ApproxError, ApproximationProblem, ApproximationResult, LinearConstraintMap,
    LinearOffsetMap, LinearValueMap, SubspaceBasis, WeightKind, WeightScheme,
};
pub use game::{Coalition, Game, GameError, PlayerSet, Value, MAX_PLAYERS};
pub use prob::{banzhaf_value, shapley_value, SizeProfile};
pub use qp::{DenseMatrix, QpError, Tolerances};
pub use regular::{charnes_weights, eq13_regular_value, RegularForm};
pub use ruiz::{ruiz_value, RuizWeights};
