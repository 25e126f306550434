#![allow(dead_code)]

use lsvalue::{Coalition, Game, PlayerSet};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn players(n: usize) -> PlayerSet {
    PlayerSet::new(n).unwrap()
}

pub fn random_game(rng: &mut ChaCha8Rng, n: usize) -> Game {
    Game::from_fn(players(n), |_| rng.gen_range(-1.0..=1.0))
}

/// Average marginal contribution over all `n!` arrival orders.
pub fn shapley_by_permutations(v: &Game) -> Vec<f64> {
    let n = v.players().n();
    let mut order: Vec<usize> = (0..n).collect();
    let mut totals = vec![0.0; n];
    let mut count = 0u64;
    permute(&mut order, 0, &mut |perm| {
        let mut bits = 0u32;
        for &p in perm {
            let before = v.value_bits(bits);
            bits |= 1 << p;
            totals[p] += v.value_bits(bits) - before;
        }
        count += 1;
    });
    totals.into_iter().map(|t| t / count as f64).collect()
}

fn permute(a: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == a.len() {
        f(a);
        return;
    }
    for i in k..a.len() {
        a.swap(k, i);
        permute(a, k + 1, f);
        a.swap(k, i);
    }
}

/// Average swing of player `i` over the `2^(n−1)` coalitions not containing it.
pub fn banzhaf_by_swings(v: &Game) -> Vec<f64> {
    let n = v.players().n();
    (0..n)
        .map(|i| {
            let mut total = 0.0;
            for bits in 0..(1u32 << n) {
                if bits & (1 << i) == 0 {
                    total += v.value_bits(bits | (1 << i)) - v.value_bits(bits);
                }
            }
            total / (1u64 << (n - 1)) as f64
        })
        .collect()
}

/// Solves `min ½xᵀQx − cᵀx s.t. Ax = b` by a null-space method using an SVD.
pub fn nalgebra_qp(q: &DMatrix<f64>, c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = q.nrows();
    if a.nrows() == 0 {
        return q.clone().lu().solve(c).unwrap();
    }
    let x0 = a.clone().svd(true, true).solve(b, 1e-12).unwrap();
    let svd = a.clone().svd(true, true);
    let rank = svd.rank(1e-10);
    let full = a.transpose() * a;
    let eig = full.symmetric_eigen();
    let mut null_cols = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].abs().partial_cmp(&eig.eigenvalues[j].abs()).unwrap());
    for &i in idx.iter().take(k - rank) {
        null_cols.push(eig.eigenvectors.column(i).into_owned());
    }
    if null_cols.is_empty() {
        return x0;
    }
    let z = DMatrix::from_columns(&null_cols);
    let reduced = z.transpose() * q * &z;
    let rhs = z.transpose() * (c - q * &x0);
    let t = reduced.lu().solve(&rhs).unwrap();
    x0 + z * t
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn coalition(members: &[usize], n: usize) -> Coalition {
    Coalition::from_members(members, players(n)).unwrap()
}
