//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use detmax_core::gridtiling::Pair;
use detmax_core::{GridTilingInstance, GtAssignment, Rat, RatMatrix, RatVectorSet};
use itertools::Itertools;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sample_vectors() -> RatVectorSet {
    RatVectorSet::from_ints(&[&[5, 0, 0], &[2, 3, 0], &[1, 1, 3], &[3, 1, 1]]).unwrap()
}

pub fn sample_gram() -> Vec<Vec<i64>> {
    vec![
        vec![25, 10, 5, 15],
        vec![10, 13, 5, 9],
        vec![5, 5, 11, 7],
        vec![15, 9, 7, 11],
    ]
}

/// Cells in `(i, j)` order with `i` the first grid index.
pub fn sample_grid() -> GridTilingInstance {
    let s = |v: &[(u32, u32)]| v.to_vec();
    GridTilingInstance::new(
        3,
        4,
        vec![
            s(&[(1, 1), (3, 2)]),
            s(&[(3, 4), (4, 3)]),
            s(&[(3, 2), (4, 1)]),
            s(&[(1, 2), (2, 2)]),
            s(&[(1, 4), (3, 1)]),
            s(&[(1, 2), (1, 3)]),
            s(&[(1, 2), (4, 2)]),
            s(&[(2, 1), (4, 4)]),
            s(&[(3, 3), (4, 2)]),
        ],
    )
    .unwrap()
}

pub fn sample_grid_solution() -> Vec<Pair> {
    vec![(3, 2), (3, 4), (3, 2), (1, 2), (1, 4), (1, 2), (4, 2), (4, 4), (4, 2)]
}

/// The sample grid with its first cell replaced by `{(2, 3)}`.
pub fn sample_grid_broken() -> GridTilingInstance {
    let mut cells = sample_grid().cells().to_vec();
    cells[0] = vec![(2, 3)];
    GridTilingInstance::new(3, 4, cells).unwrap()
}

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

/// Principal minor of the Gram matrix of `vs` on `subset`, by cofactors.
pub fn gram_minor(vs: &[Vec<Rat>], subset: &[usize]) -> Rat {
    let m: Vec<Vec<Rat>> = subset
        .iter()
        .map(|&i| subset.iter().map(|&j| dot(&vs[i], &vs[j])).collect())
        .collect();
    cofactor_det(&m)
}

pub fn submatrix(m: &RatMatrix, subset: &[usize]) -> Vec<Vec<Rat>> {
    subset
        .iter()
        .map(|&i| subset.iter().map(|&j| m.get(i, j).clone()).collect())
        .collect()
}

/// Maximum principal minor and the first subset (in lexicographic order)
/// achieving it, by cofactor expansion over every subset.
pub fn maxdet_oracle(vs: &[Vec<Rat>], k: usize) -> (Vec<usize>, Rat) {
    let mut best: Option<(Vec<usize>, Rat)> = None;
    for s in (0..vs.len()).combinations(k) {
        let v = gram_minor(vs, &s);
        if best.as_ref().map_or(true, |(_, b)| v > *b) {
            best = Some((s, v));
        }
    }
    best.unwrap()
}

/// Consistent adjacent pairs counted cell by cell.
pub fn scan_consistency(inst: &GridTilingInstance, values: &[Pair]) -> usize {
    let k = inst.k();
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

pub fn gt_opt_oracle(inst: &GridTilingInstance) -> usize {
    inst.cells()
        .iter()
        .map(|c| c.iter().copied())
        .multi_cartesian_product()
        .map(|vals| scan_consistency(inst, &vals))
        .max()
        .unwrap()
}

pub fn assignment_pairs(sigma: &GtAssignment) -> Vec<Pair> {
    sigma.to_pairs().expect("total assignment")
}

/// Rational in `[-bound, bound]` with denominator at most `den`.
pub fn rand_rat(rng: &mut ChaCha8Rng, bound: i64, den: i64) -> Rat {
    let q = rng.gen_range(1..=den);
    let p = rng.gen_range(-bound * q..=bound * q);
    Rat::ratio(p, q)
}

pub fn rand_vectors(rng: &mut ChaCha8Rng, n: usize, d: usize, bound: i64, den: i64) -> Vec<Vec<Rat>> {
    (0..n)
        .map(|_| (0..d).map(|_| rand_rat(rng, bound, den)).collect())
        .collect()
}

pub fn rand_grid(rng: &mut ChaCha8Rng, k: usize, n: u32, max_cell: usize) -> GridTilingInstance {
    let cells = (0..k * k)
        .map(|_| {
            let size = rng.gen_range(1..=max_cell);
            let mut all: Vec<Pair> = (1..=n).flat_map(|a| (1..=n).map(move |b| (a, b))).collect();
            let mut cell = Vec::with_capacity(size);
            for _ in 0..size {
                let idx = rng.gen_range(0..all.len());
                cell.push(all.swap_remove(idx));
            }
            cell
        })
        .collect();
    GridTilingInstance::new(k, n, cells).unwrap()
}

pub fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}
