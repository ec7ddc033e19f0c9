//! Subset-selection solvers.
//!
//! All exact solvers break ties towards the lexicographically smallest index
//! set, so results do not depend on how enumeration is split across workers.

use std::cmp::Ordering;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    gram, inner, norm_squared, principal_minor, IndexSet, RatMatrix, RatVectorSet,
};
use crate::rational::Rat;
use crate::Limits;

/// A size-`k` index set and the exact principal minor it achieves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetMaxSolution {
    pub subset: IndexSet,
    pub value: Rat,
}

impl DetMaxSolution {
    /// Larger value wins; equal values prefer the lexicographically smaller set.
    fn beats(&self, other: &DetMaxSolution) -> bool {
        match self.value.cmp(&other.value) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.subset < other.subset,
        }
    }
}

/// `C(n, k)`, or `None` on `u64` overflow.
pub fn binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc.to_u64()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("k = {k} must lie in [1, {n}]")));
    }
    Ok(())
}

fn check_subset_budget(n: usize, k: usize, limits: &Limits) -> Result<u64> {
    match binomial(n, k) {
        Some(c) if c <= limits.max_subsets => Ok(c),
        other => Err(Error::Resource(format!(
            "C({n},{k}) = {} subsets exceeds the limit of {}",
            other.map_or_else(|| "overflow".to_string(), |c| c.to_string()),
            limits.max_subsets
        ))),
    }
}

/// Exact `maxdet(A, k)` by enumerating every size-`k` principal minor.
pub fn maxdet_bruteforce<M: AsRef<RatMatrix>>(
    a: &M,
    k: usize,
    limits: &Limits,
) -> Result<DetMaxSolution> {
    let a = a.as_ref();
    let n = a.order();
    check_k(k, n)?;
    check_subset_budget(n, k, limits)?;
    // One chunk per smallest element; chunks are themselves lex-ordered.
    let best = (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut best: Option<DetMaxSolution> = None;
            for rest in (first + 1..n).combinations(k - 1) {
                let mut idx = Vec::with_capacity(k);
                idx.push(first);
                idx.extend(rest);
                let subset = IndexSet::new(idx).expect("combinations are increasing");
                let value = principal_minor(a, &subset).expect("in range");
                let cand = DetMaxSolution { subset, value };
                if best.as_ref().map_or(true, |b| cand.beats(b)) {
                    best = Some(cand);
                }
            }
            best
        })
        .reduce(
            || None,
            |x, y| match (x, y) {
                (Some(x), Some(y)) => Some(if y.beats(&x) { y } else { x }),
                (x, None) => x,
                (None, y) => y,
            },
        );
    Ok(best.expect("at least one subset"))
}

/// Greedy volume sampling: repeatedly take the vector farthest from the span
/// of those already chosen (the first pick is the longest vector); ties go to
/// the smallest index. The value is the exact squared volume of the picks.
pub fn maxdet_greedy(vectors: &RatVectorSet, k: usize) -> Result<DetMaxSolution> {
    let n = vectors.len();
    check_k(k, n)?;
    let mut residuals: Vec<Vec<Rat>> = vectors.vectors().to_vec();
    let mut dist: Vec<Rat> = residuals.iter().map(|r| norm_squared(r)).collect();
    let mut chosen = vec![false; n];
    let mut value = Rat::one();
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k {
        let pick = (0..n)
            .filter(|&i| !chosen[i])
            .fold(None::<usize>, |best, i| match best {
                Some(b) if dist[b] >= dist[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n");
        chosen[pick] = true;
        picks.push(pick);
        value *= &dist[pick];
        if dist[pick].is_zero() {
            continue;
        }
        let u = residuals[pick].clone();
        let uu = dist[pick].clone();
        for j in (0..n).filter(|&j| !chosen[j]) {
            let c = inner(&residuals[j], &u) / &uu;
            if c.is_zero() {
                continue;
            }
            for (rj, ui) in residuals[j].iter_mut().zip(&u) {
                if !ui.is_zero() {
                    *rj -= &c * ui;
                }
            }
            dist[j] = norm_squared(&residuals[j]);
        }
    }
    Ok(DetMaxSolution {
        subset: IndexSet::from_unsorted(picks),
        value,
    })
}

/// Grid spacing `1 / (ceil(1/eps) * 6 d^(2d+1))` used by the additive
/// approximation; its reciprocal is always an integer.
pub fn additive_grid_step(dim: usize, eps: &Rat) -> Result<Rat> {
    if !eps.is_positive() {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let inv = eps.recip()?.ceil();
    let d = BigInt::from(dim);
    let denom = inv * BigInt::from(6) * num_traits::pow(d, 2 * dim + 1);
    Rat::new(1, denom)
}

/// Round every coordinate to the nearest multiple of `step` (ties toward
/// negative infinity). `step` must be the reciprocal of a positive integer.
pub fn round_to_grid(vectors: &RatVectorSet, step: &Rat) -> Result<RatVectorSet> {
    if !step.is_positive() || !step.numer().is_one() {
        return Err(Error::Domain(format!(
            "grid step must be 1/N for a positive integer N, got {step}"
        )));
    }
    let scale = Rat::from_int(step.denom().clone());
    let half = Rat::ratio(1, 2);
    let rounded = vectors
        .vectors()
        .iter()
        .map(|v| {
            v.iter()
                .map(|x| Rat::from_int((&(x * &scale) - &half).ceil()) * step)
                .collect()
        })
        .collect();
    RatVectorSet::new(rounded)
}

/// Upper bound `3 d^(2d+1) step` on `|det(A_S) - det(B_S)|` after rounding.
pub fn rounding_error_bound(dim: usize, step: &Rat) -> Rat {
    let d = BigInt::from(dim);
    Rat::from_int(BigInt::from(3) * num_traits::pow(d, 2 * dim + 1)) * step
}

/// Additive approximation for vectors with entries in `[-1, 1]` and `k <= d`:
/// round to a fine grid, solve exactly over the distinct rounded vectors,
/// and report the original minor of the winning index set, which is at least
/// `maxdet(A, k) - eps`.
pub fn maxdet_additive_approx(
    vectors: &RatVectorSet,
    k: usize,
    eps: &Rat,
    limits: &Limits,
) -> Result<DetMaxSolution> {
    let n = vectors.len();
    let d = vectors.dim();
    check_k(k, n)?;
    if k > d {
        return Err(Error::Invalid(format!("k = {k} exceeds dimension {d}")));
    }
    let one = Rat::one();
    let minus_one = -&one;
    for (i, v) in vectors.vectors().iter().enumerate() {
        if v.iter().any(|x| *x > one || *x < minus_one) {
            return Err(Error::Invalid(format!(
                "vector {i} has an entry outside [-1, 1]"
            )));
        }
    }
    let step = additive_grid_step(d, eps)?;
    let rounded = round_to_grid(vectors, &step)?;

    // First occurrence of each distinct rounded vector, in index order.
    let mut reps: Vec<usize> = Vec::new();
    for (i, w) in rounded.vectors().iter().enumerate() {
        if !reps.iter().any(|&r| rounded.vector(r) == w.as_slice()) {
            reps.push(i);
        }
    }
    let original = gram(vectors);
    let subset = if reps.len() < k {
        IndexSet::full(k)
    } else {
        let distinct = RatVectorSet::new(
            reps.iter().map(|&r| rounded.vector(r).to_vec()).collect(),
        )?;
        let best = maxdet_bruteforce(&gram(&distinct), k, limits)?;
        IndexSet::new(best.subset.iter().map(|c| reps[c]).collect())?
    };
    let value = principal_minor(original.matrix(), &subset)?;
    Ok(DetMaxSolution { subset, value })
}

/// Lexicographically smallest set of `k` pairwise orthogonal vectors, by
/// exhaustive depth-first search.
pub fn find_orthogonal_set(
    vectors: &RatVectorSet,
    k: usize,
    limits: &Limits,
) -> Result<Option<IndexSet>> {
    let n = vectors.len();
    check_k(k, n)?;
    let mut ortho = vec![Bits::new(n); n];
    for i in 0..n {
        for j in i + 1..n {
            if inner(vectors.vector(i), vectors.vector(j)).is_zero() {
                ortho[i].set(j);
                ortho[j].set(i);
            }
        }
    }
    let mut budget = limits.max_subsets;
    let mut stack = Vec::with_capacity(k);
    let all = Bits::full(n);
    if search_cliques(&ortho, &all, 0, k, &mut stack, &mut budget)? {
        Ok(Some(IndexSet::new(stack)?))
    } else {
        Ok(None)
    }
}

/// Extend `stack` with increasing indices from `candidates` (all `>= from`)
/// until it holds `k` mutually compatible elements.
fn search_cliques(
    compat: &[Bits],
    candidates: &Bits,
    from: usize,
    k: usize,
    stack: &mut Vec<usize>,
    budget: &mut u64,
) -> Result<bool> {
    if stack.len() == k {
        return Ok(true);
    }
    let need = k - stack.len();
    if candidates.count_from(from) < need {
        return Ok(false);
    }
    for i in candidates.iter_from(from) {
        if *budget == 0 {
            return Err(Error::Resource(
                "orthogonal-set search exceeded the state budget".into(),
            ));
        }
        *budget -= 1;
        stack.push(i);
        let next = candidates.and(&compat[i]);
        if search_cliques(compat, &next, i + 1, k, stack, budget)? {
            return Ok(true);
        }
        stack.pop();
    }
    Ok(false)
}

/// Orthogonal-set search for entry-wise nonnegative vectors, which is set
/// packing over the supports `{e : v(e) > 0}`. Duplicate supports collapse to
/// their first index; zero vectors are orthogonal to everything (including
/// each other) and are used first.
pub fn find_orthogonal_set_nonneg(
    vectors: &RatVectorSet,
    k: usize,
    limits: &Limits,
) -> Result<Option<IndexSet>> {
    let n = vectors.len();
    let d = vectors.dim();
    check_k(k, n)?;
    let mut zeros = Vec::new();
    let mut supports: Vec<(Bits, usize)> = Vec::new();
    for (i, v) in vectors.vectors().iter().enumerate() {
        if v.iter().any(Rat::is_negative) {
            return Err(Error::Invalid(format!("vector {i} has a negative entry")));
        }
        let mut s = Bits::new(d);
        for (e, x) in v.iter().enumerate() {
            if x.is_positive() {
                s.set(e);
            }
        }
        if s.is_empty() {
            zeros.push(i);
        } else if !supports.iter().any(|(t, _)| *t == s) {
            supports.push((s, i));
        }
    }
    let from_zeros = zeros.len().min(k);
    let need = k - from_zeros;
    if need > d {
        return Ok(None);
    }
    let m = supports.len();
    let mut disjoint = vec![Bits::new(m); m];
    for a in 0..m {
        for b in a + 1..m {
            if supports[a].0.and(&supports[b].0).is_empty() {
                disjoint[a].set(b);
                disjoint[b].set(a);
            }
        }
    }
    let mut stack = Vec::with_capacity(need);
    let mut budget = limits.max_subsets;
    if !search_cliques(&disjoint, &Bits::full(m), 0, need, &mut stack, &mut budget)? {
        return Ok(None);
    }
    let mut idx: Vec<usize> = zeros[..from_zeros].to_vec();
    idx.extend(stack.iter().map(|&s| supports[s].1));
    Ok(Some(IndexSet::from_unsorted(idx)))
}

/// Small fixed-size bitset.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    fn new(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    fn full(len: usize) -> Self {
        let mut b = Bits::new(len);
        for i in 0..len {
            b.set(i);
        }
        b
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn iter_from(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        (from..self.len).filter(move |&i| self.get(i))
    }

    fn count_from(&self, from: usize) -> usize {
        self.iter_from(from).count()
    }
}
