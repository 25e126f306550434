//! Closed forms for regular quadratic forms.
//!
//! A form is regular when every diagonal entry equals `q` and every
//! off-diagonal entry equals `p`. Uniform-by-size coalition weights always
//! produce one on the singleton basis. For
//!
//! ```text
//! minimize xᵀQx − cᵀx   subject to   Σ x_i = g
//! ```
//!
//! the stationary pair is
//!
//! ```text
//! z* = (2(q + (n−1)p) g − Σ c_i) / n
//! x_i* = (c_i + z* − 2pg) / (2q − 2p)
//! ```
//!
//! satisfying `2Qx* − c = z*·1`. It is the optimum whenever `Q` is positive
//! definite, i.e. `q − p > 0` and `q + (n−1)p > 0`.

use thiserror::Error;

use crate::game::{Game, GameError, PlayerSet, Value};
use crate::qp::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegularError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("expected {expected} entries, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("q = p: the form is singular on the constraint hyperplane")]
    Degenerate,
    #[error("at least two players are required")]
    TooFewPlayers,
}

/// Binomial coefficient as `f64`; exact for every argument used here (`n <= 20`).
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k as u64 {
        acc = acc * (n as u64 - i) / (i + 1);
    }
    acc as f64
}

/// A `k x k` matrix with `q` on the diagonal and `p` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularForm {
    pub q: f64,
    pub p: f64,
    pub k: usize,
}

impl RegularForm {
    pub fn new(q: f64, p: f64, k: usize) -> Self {
        Self { q, p, k }
    }

    pub fn to_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.k, self.k, |i, j| if i == j { self.q } else { self.p })
    }

    /// The dimension-independent criterion `q > p >= 0`.
    pub fn lemma2_condition(&self) -> bool {
        self.q > self.p && self.p >= 0.0
    }

    /// Exact definiteness test from the eigenvalues `q − p` (multiplicity
    /// `k − 1`) and `q + (k−1)p`.
    pub fn spectral_pd(&self) -> bool {
        if self.k == 1 {
            return self.q > 0.0;
        }
        self.q - self.p > 0.0 && self.q + (self.k as f64 - 1.0) * self.p > 0.0
    }
}

/// `p = Σ_{s=2}^n C(n−2, s−2) α(s)`, `q = Σ_{s=1}^n C(n−1, s−1) α(s)`.
pub fn uniform_pq(alpha_by_size: &[f64], players: PlayerSet) -> Result<RegularForm, RegularError> {
    let n = players.n();
    if alpha_by_size.len() != n {
        return Err(RegularError::Length {
            expected: n,
            actual: alpha_by_size.len(),
        });
    }
    let q = (1..=n).map(|s| binomial(n - 1, s - 1) * alpha_by_size[s - 1]).sum();
    let p = if n >= 2 {
        (2..=n).map(|s| binomial(n - 2, s - 2) * alpha_by_size[s - 1]).sum()
    } else {
        0.0
    };
    Ok(RegularForm { q, p, k: n })
}

/// Problem data: regular form, linear term `c` and constraint level `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularProblem {
    pub form: RegularForm,
    pub c: Vec<f64>,
    pub g: f64,
}

impl RegularProblem {
    pub fn new(form: RegularForm, c: Vec<f64>, g: f64) -> Result<Self, RegularError> {
        if c.len() != form.k {
            return Err(RegularError::Length {
                expected: form.k,
                actual: c.len(),
            });
        }
        Ok(Self { form, c, g })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularSolution {
    pub x: Vec<f64>,
    pub z: f64,
}

/// Evaluates the closed form. Requires only `q != p`; optimality additionally
/// needs [`RegularForm::spectral_pd`].
pub fn theorem3_solve(problem: &RegularProblem) -> Result<RegularSolution, RegularError> {
    let RegularForm { q, p, k } = problem.form;
    if q == p {
        return Err(RegularError::Degenerate);
    }
    let n = k as f64;
    let g = problem.g;
    let total: f64 = problem.c.iter().sum();
    let z = (2.0 * (q + (n - 1.0) * p) * g - total) / n;
    let denom = 2.0 * q - 2.0 * p;
    let x = problem.c.iter().map(|ci| (ci + z - 2.0 * p * g) / denom).collect();
    Ok(RegularSolution { x, z })
}

/// Shapley-generating size weights `α(s) = (s−1)!(n−1−s)!/(n−2)! = 1/C(n−2, s−1)`
/// for `s < n`.
///
/// The grand coalition has formally infinite weight, i.e. its residual is
/// forced to zero. Under the efficiency constraint that residual vanishes
/// anyway, so `α(n)` is reported as 0.
pub fn charnes_weights(players: PlayerSet) -> Result<Vec<f64>, RegularError> {
    let n = players.n();
    if n < 2 {
        return Err(RegularError::TooFewPlayers);
    }
    Ok((1..=n)
        .map(|s| if s == n { 0.0 } else { 1.0 / binomial(n - 2, s - 1) })
        .collect())
}

/// Outcome of the closed-form path.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularValue {
    pub value: Value,
    pub z: f64,
    pub form: RegularForm,
    /// `false` when the form is not positive definite: the returned point is
    /// stationary but not certified optimal.
    pub certified: bool,
}

/// Efficient least-square value for uniform weights `α(|S|)`, via the closed form.
pub fn eq13_regular_value(v: &Game, alpha_by_size: &[f64]) -> Result<RegularValue, RegularError> {
    regular_value_with_level(v, alpha_by_size, v.grand_value())
}

/// Approximates `target` by an additive game with total `g`, weighting
/// residuals by `α(|S|)`. `c_i = 2 Σ_{S∋i} α(|S|) target(S)`.
pub fn regular_value_with_level(
    target: &Game,
    alpha_by_size: &[f64],
    g: f64,
) -> Result<RegularValue, RegularError> {
    let players = target.players();
    let form = uniform_pq(alpha_by_size, players)?;
    let mut c = vec![0.0; players.n()];
    for s in players.coalitions() {
        let w = 2.0 * alpha_by_size[s.size() - 1] * target.value(s);
        if w != 0.0 {
            for i in s.members() {
                c[i - 1] += w;
            }
        }
    }
    let sol = theorem3_solve(&RegularProblem::new(form, c, g)?)?;
    Ok(RegularValue {
        value: Value::new(players, sol.x)?,
        z: sol.z,
        form,
        certified: form.spectral_pd(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{additive_game, unanimity_game, Coalition};
    use approx::assert_abs_diff_eq;

    fn ps(n: usize) -> PlayerSet {
        PlayerSet::new(n).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(20, 10), 184756.0);
        assert_eq!(binomial(1, 2), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
    }

    #[test]
    fn uniform_pq_examples() {
        assert_eq!(uniform_pq(&[1.0, 1.0, 1.0], ps(3)).unwrap(), RegularForm::new(4.0, 2.0, 3));
        let a = 0.7;
        let f = uniform_pq(&[0.0, a, 0.0], ps(3)).unwrap();
        assert_eq!((f.p, f.q), (a, 2.0 * a));
        let f = uniform_pq(&[0.0, a, -a], ps(3)).unwrap();
        assert_eq!((f.p, f.q), (0.0, a));
        assert!(uniform_pq(&[1.0], ps(3)).is_err());
    }

    #[test]
    fn pd_criteria() {
        let a = 1.5;
        assert!(RegularForm::new(2.0 * a, a, 3).lemma2_condition());
        assert!(!RegularForm::new(1.0, 1.0, 3).lemma2_condition());
        let f = RegularForm::new(1.0, -0.5, 2);
        assert!(!f.lemma2_condition());
        assert!(f.spectral_pd());
        assert!(RegularForm::new(4.0, 2.0, 3).spectral_pd());
        assert!(!RegularForm::new(1.0, -0.5, 4).spectral_pd());
    }

    #[test]
    fn closed_form_examples() {
        let s = theorem3_solve(&RegularProblem::new(RegularForm::new(1.0, 0.0, 2), vec![0.0, 0.0], 1.0).unwrap()).unwrap();
        assert_eq!(s.z, 1.0);
        assert_eq!(s.x, vec![0.5, 0.5]);
        let s = theorem3_solve(&RegularProblem::new(RegularForm::new(4.0, 2.0, 3), vec![0.0; 3], 0.0).unwrap()).unwrap();
        assert_eq!(s.z, 0.0);
        assert_eq!(s.x, vec![0.0; 3]);
        assert_eq!(
            theorem3_solve(&RegularProblem::new(RegularForm::new(1.0, 1.0, 2), vec![0.0; 2], 0.0).unwrap()),
            Err(RegularError::Degenerate)
        );
    }

    #[test]
    fn stationarity_identity() {
        let form = RegularForm::new(3.0, 0.75, 4);
        let c = vec![1.0, -2.0, 0.5, 4.0];
        let s = theorem3_solve(&RegularProblem::new(form, c.clone(), 1.25).unwrap()).unwrap();
        let qx = form.to_matrix().mul_vec(&s.x);
        for i in 0..4 {
            assert_abs_diff_eq!(2.0 * qx[i] - c[i], s.z, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.x.iter().sum::<f64>(), 1.25, epsilon = 1e-12);
    }

    #[test]
    fn charnes_examples() {
        assert_eq!(charnes_weights(ps(3)).unwrap(), vec![1.0, 1.0, 0.0]);
        assert_eq!(charnes_weights(ps(4)).unwrap(), vec![1.0, 0.5, 1.0, 0.0]);
        assert_eq!(charnes_weights(ps(5)).unwrap(), vec![1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0, 0.0]);
        assert_eq!(charnes_weights(ps(2)).unwrap(), vec![1.0, 0.0]);
        assert_eq!(charnes_weights(ps(1)), Err(RegularError::TooFewPlayers));
    }

    #[test]
    fn charnes_forms_are_definite() {
        for n in 2..=20 {
            let f = uniform_pq(&charnes_weights(ps(n)).unwrap(), ps(n)).unwrap();
            assert!(f.spectral_pd(), "n = {n}");
        }
    }

    #[test]
    fn regular_value_examples() {
        let players = ps(3);
        let x = Value::new(players, vec![1.0, -0.5, 2.0]).unwrap();
        let r = eq13_regular_value(&additive_game(&x), &[1.0, 1.0, 1.0]).unwrap();
        for (a, b) in r.value.payoffs().iter().zip(x.payoffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(r.certified);

        let u = unanimity_game(Coalition::from_members(&[1, 2], players).unwrap(), players);
        let r = eq13_regular_value(&u, &charnes_weights(players).unwrap()).unwrap();
        assert_eq!(r.value.payoffs(), &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn uncertified_when_form_indefinite() {
        let players = ps(3);
        let r = eq13_regular_value(&Game::zero(players), &[2.0, -1.0, 0.0]).unwrap();
        assert!(!r.certified);
    }
}
