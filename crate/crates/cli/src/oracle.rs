//! Brute-force oracles, written independently of the solvers they check.

use detmax_core::gridtiling::Pair;
use detmax_core::{GridTilingInstance, Rat, RatMatrix};
use itertools::Itertools;

/// Laplace expansion along the first row.
pub fn cofactor_det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    if n == 0 {
        return Rat::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut total = Rat::zero();
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rat>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][c] * &cofactor_det(&minor);
        if c % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn submatrix(m: &RatMatrix, subset: &[usize]) -> Vec<Vec<Rat>> {
    subset
        .iter()
        .map(|&i| subset.iter().map(|&j| m.get(i, j).clone()).collect())
        .collect()
}

/// Principal minor of the Gram matrix of `vs`, by cofactors.
pub fn gram_minor(vs: &[Vec<Rat>], subset: &[usize]) -> Rat {
    let m: Vec<Vec<Rat>> = subset
        .iter()
        .map(|&i| subset.iter().map(|&j| dot(&vs[i], &vs[j])).collect())
        .collect();
    cofactor_det(&m)
}

/// Largest principal `k`-minor and the lexicographically first subset that
/// attains it. Minors up to order 5 use cofactors, larger ones the supplied
/// `det`.
pub fn maxdet_oracle<F>(m: &RatMatrix, k: usize, det: F) -> (Vec<usize>, Rat)
where
    F: Fn(&[Vec<Rat>]) -> Rat,
{
    let mut best: Option<(Vec<usize>, Rat)> = None;
    for s in (0..m.order()).combinations(k) {
        let sub = submatrix(m, &s);
        let v = if k <= 5 { cofactor_det(&sub) } else { det(&sub) };
        if best.as_ref().map_or(true, |(_, b)| v > *b) {
            best = Some((s, v));
        }
    }
    best.expect("k <= n")
}

/// Consistent adjacent pairs counted cell by cell on the torus.
pub fn scan_consistency(k: usize, values: &[Pair]) -> usize {
    let at = |i: usize, j: usize| values[(i % k) * k + (j % k)];
    let mut count = 0;
    for i in 0..k {
        for j in 0..k {
            count += (at(i, j).0 == at(i, j + 1).0) as usize;
            count += (at(i, j).1 == at(i + 1, j).1) as usize;
        }
    }
    count
}

/// Optimum over every total assignment.
pub fn gt_opt_oracle(inst: &GridTilingInstance) -> usize {
    inst.cells()
        .iter()
        .map(|c| c.iter().copied())
        .multi_cartesian_product()
        .map(|vals| scan_consistency(inst.k(), &vals))
        .max()
        .expect("cells are nonempty")
}

/// Whether some `k` of the integers sum to `t`.
pub fn ksum_oracle(values: &[i64], t: i64, k: usize) -> bool {
    values.iter().combinations(k).any(|s| s.into_iter().sum::<i64>() == t)
}

pub fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}
