//! Grid Tiling on a toroidal `k x k` grid and binary constraint satisfaction.
//!
//! Cell `(i, j)` is 0-based here; its vertical neighbour is `(i, j+1 mod k)`
//! (the pair must agree in the first coordinate) and its horizontal
//! neighbour is `(i+1 mod k, j)` (agreement in the second coordinate). With
//! `k >= 3` the wrap-around never duplicates a pair, so there are exactly
//! `2k^2` adjacent pairs. Alphabet values are 1-based labels in `[1, n]`.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::Limits;

/// Alphabet pair `(x, y)` with `x, y` in `[1, n]`.
pub type Pair = (u32, u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

impl Cell {
    pub fn new(i: usize, j: usize) -> Self {
        Cell { i, j }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// `(i, j)` to `(i, j+1)`: first coordinates must agree.
    Vertical,
    /// `(i, j)` to `(i+1, j)`: second coordinates must agree.
    Horizontal,
}

/// One unordered adjacent pair, stored once in canonical orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Adjacency {
    pub from: Cell,
    pub to: Cell,
    pub direction: Direction,
}

impl Adjacency {
    pub fn consistent(&self, a: Pair, b: Pair) -> bool {
        pairs_consistent(self.direction, a, b)
    }
}

pub fn pairs_consistent(direction: Direction, a: Pair, b: Pair) -> bool {
    match direction {
        Direction::Vertical => a.0 == b.0,
        Direction::Horizontal => a.1 == b.1,
    }
}

/// All `2k^2` adjacent pairs, ordered by the pre-wrap tuple
/// `(i1, j1, i2, j2)`: for each cell its vertical pair precedes its
/// horizontal pair.
pub fn adjacencies(k: usize) -> Vec<Adjacency> {
    let mut out = Vec::with_capacity(2 * k * k);
    for i in 0..k {
        for j in 0..k {
            out.push(Adjacency {
                from: Cell::new(i, j),
                to: Cell::new(i, (j + 1) % k),
                direction: Direction::Vertical,
            });
            out.push(Adjacency {
                from: Cell::new(i, j),
                to: Cell::new((i + 1) % k, j),
                direction: Direction::Horizontal,
            });
        }
    }
    out
}

/// `k^2` nonempty cell sets over `[1, n]^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridTilingInstance {
    k: usize,
    n: u32,
    cells: Vec<Vec<Pair>>,
}

impl GridTilingInstance {
    /// `cells[i * k + j]` is the set for cell `(i, j)`; its order defines the
    /// option indices used for tie-breaking.
    pub fn new(k: usize, n: u32, cells: Vec<Vec<Pair>>) -> Result<Self> {
        if k < 3 {
            return Err(Error::Invalid(format!(
                "grid side k = {k} must be at least 3 on the torus"
            )));
        }
        if n == 0 {
            return Err(Error::Invalid("alphabet size n must be positive".into()));
        }
        if cells.len() != k * k {
            return Err(Error::Invalid(format!(
                "expected {} cells, got {}",
                k * k,
                cells.len()
            )));
        }
        for (idx, set) in cells.iter().enumerate() {
            let (i, j) = (idx / k, idx % k);
            if set.is_empty() {
                return Err(Error::Invalid(format!("cell ({i},{j}) is empty")));
            }
            let mut seen = HashSet::new();
            for &(x, y) in set {
                if x == 0 || y == 0 || x > n || y > n {
                    return Err(Error::Invalid(format!(
                        "pair ({x},{y}) in cell ({i},{j}) is outside [1,{n}]^2"
                    )));
                }
                if !seen.insert((x, y)) {
                    return Err(Error::Invalid(format!(
                        "pair ({x},{y}) repeated in cell ({i},{j})"
                    )));
                }
            }
        }
        Ok(GridTilingInstance { k, n, cells })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn cell(&self, c: Cell) -> &[Pair] {
        &self.cells[c.i * self.k + c.j]
    }

    pub fn cells(&self) -> &[Vec<Pair>] {
        &self.cells
    }

    pub fn all_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.k).flat_map(move |i| (0..self.k).map(move |j| Cell::new(i, j)))
    }

    /// Total number of (cell, pair) options.
    pub fn option_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }
}

/// Possibly partial assignment of pairs to cells; `None` marks an undefined
/// cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtAssignment {
    k: usize,
    values: Vec<Option<Pair>>,
}

impl GtAssignment {
    pub fn total(k: usize, values: Vec<Pair>) -> Result<Self> {
        if values.len() != k * k {
            return Err(Error::Invalid(format!(
                "assignment has {} values for {} cells",
                values.len(),
                k * k
            )));
        }
        Ok(GtAssignment {
            k,
            values: values.into_iter().map(Some).collect(),
        })
    }

    pub fn partial(k: usize, values: Vec<Option<Pair>>) -> Result<Self> {
        if values.len() != k * k {
            return Err(Error::Invalid("assignment size mismatch".into()));
        }
        Ok(GtAssignment { k, values })
    }

    pub fn undefined(k: usize) -> Self {
        GtAssignment {
            k,
            values: vec![None; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, c: Cell) -> Option<Pair> {
        self.values[c.i * self.k + c.j]
    }

    pub fn set(&mut self, c: Cell, p: Option<Pair>) {
        self.values[c.i * self.k + c.j] = p;
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn values(&self) -> &[Option<Pair>] {
        &self.values
    }

    /// Values of a total assignment in cell order.
    pub fn to_pairs(&self) -> Option<Vec<Pair>> {
        self.values.iter().copied().collect()
    }
}

fn check_assignment(inst: &GridTilingInstance, sigma: &GtAssignment) -> Result<()> {
    if sigma.k != inst.k {
        return Err(Error::Invalid("assignment grid size differs from instance".into()));
    }
    for c in inst.all_cells() {
        if let Some(p) = sigma.get(c) {
            if !inst.cell(c).contains(&p) {
                return Err(Error::Invalid(format!(
                    "pair {p:?} is not in the set of cell ({},{})",
                    c.i, c.j
                )));
            }
        }
    }
    Ok(())
}

/// Number of consistent adjacent pairs of a total assignment.
pub fn consistency(inst: &GridTilingInstance, sigma: &GtAssignment) -> Result<usize> {
    check_assignment(inst, sigma)?;
    if !sigma.is_total() {
        return Err(Error::Invalid("consistency needs a total assignment".into()));
    }
    Ok(adjacencies(inst.k)
        .iter()
        .filter(|a| a.consistent(sigma.get(a.from).unwrap(), sigma.get(a.to).unwrap()))
        .count())
}

/// Inconsistent adjacent pairs with both endpoints defined; for a total
/// assignment this is `2k^2 - consistency`.
pub fn inconsistency(inst: &GridTilingInstance, sigma: &GtAssignment) -> Result<usize> {
    check_assignment(inst, sigma)?;
    Ok(adjacencies(inst.k)
        .iter()
        .filter(|a| match (sigma.get(a.from), sigma.get(a.to)) {
            (Some(p), Some(q)) => !a.consistent(p, q),
            _ => false,
        })
        .count())
}

/// Rectangular set of cells solved exactly; a dimension covering the whole
/// side also counts its wrap-around pairs.
#[derive(Clone, Debug)]
struct Region {
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
}

impl Region {
    fn whole(k: usize) -> Self {
        Region { rows: 0..k, cols: 0..k }
    }
}

struct RowSpace<'a> {
    inst: &'a GridTilingInstance,
    row: usize,
    cols: std::ops::Range<usize>,
    radices: Vec<usize>,
    size: usize,
}

impl<'a> RowSpace<'a> {
    fn new(inst: &'a GridTilingInstance, row: usize, cols: std::ops::Range<usize>, cap: u64) -> Result<Self> {
        let radices: Vec<usize> = cols.clone().map(|j| inst.cell(Cell::new(row, j)).len()).collect();
        let mut size: u64 = 1;
        for &r in &radices {
            size = size.saturating_mul(r as u64);
            if size > cap {
                return Err(Error::Resource(format!(
                    "grid row {row} has more than {cap} joint states"
                )));
            }
        }
        Ok(RowSpace {
            inst,
            row,
            cols,
            radices,
            size: size as usize,
        })
    }

    /// Option index per column; the first column is the most significant digit.
    fn decode(&self, mut s: usize) -> Vec<usize> {
        let mut digits = vec![0; self.radices.len()];
        for t in (0..self.radices.len()).rev() {
            digits[t] = s % self.radices[t];
            s /= self.radices[t];
        }
        digits
    }

    fn pairs(&self, s: usize) -> Vec<Pair> {
        self.decode(s)
            .into_iter()
            .zip(self.cols.clone())
            .map(|(d, j)| self.inst.cell(Cell::new(self.row, j))[d])
            .collect()
    }
}

/// Lexicographically smallest optimal assignment of a region, counting only
/// adjacent pairs with both cells inside it. Rows are swept by dynamic
/// programming over joint row states; when the rows wrap, the first row is
/// fixed in turn to close the cycle.
fn solve_region(
    inst: &GridTilingInstance,
    region: &Region,
    limits: &Limits,
) -> Result<(Vec<Pair>, usize)> {
    let k = inst.k;
    let wrap_rows = region.rows.len() == k;
    let wrap_cols = region.cols.len() == k;
    let spaces: Vec<RowSpace> = region
        .rows
        .clone()
        .map(|i| RowSpace::new(inst, i, region.cols.clone(), limits.max_subsets))
        .collect::<Result<_>>()?;
    let r = spaces.len();
    let mut work: u64 = 0;
    for m in 0..r {
        let next = if m + 1 < r { spaces[m + 1].size } else if wrap_rows { spaces[0].size } else { 0 };
        work = work.saturating_add(spaces[m].size as u64 * next.max(1) as u64);
    }
    if wrap_rows {
        work = work.saturating_mul(spaces[0].size as u64);
    }
    if work > limits.max_subsets {
        return Err(Error::Resource(format!(
            "exact grid search needs about {work} steps, above the limit of {}",
            limits.max_subsets
        )));
    }

    let decoded: Vec<Vec<Vec<Pair>>> = spaces
        .iter()
        .map(|sp| (0..sp.size).map(|s| sp.pairs(s)).collect())
        .collect();
    let within: Vec<Vec<u32>> = decoded
        .iter()
        .map(|row| {
            row.iter()
                .map(|pairs| {
                    let c = pairs.len();
                    let mut score = pairs.windows(2).filter(|w| w[0].0 == w[1].0).count();
                    if wrap_cols && pairs[c - 1].0 == pairs[0].0 {
                        score += 1;
                    }
                    score as u32
                })
                .collect()
        })
        .collect();
    let across = |a: &[Pair], b: &[Pair]| -> u32 {
        a.iter().zip(b).filter(|(p, q)| p.1 == q.1).count() as u32
    };
    // links[m][s][t]: horizontal agreements between row m (state s) and the
    // following row (state t); the last entry closes the cycle when wrapping.
    let link_count = if wrap_rows { r } else { r - 1 };
    let links: Vec<Vec<Vec<u32>>> = (0..link_count)
        .map(|m| {
            let next = (m + 1) % r;
            decoded[m]
                .iter()
                .map(|a| decoded[next].iter().map(|b| across(a, b)).collect())
                .collect()
        })
        .collect();

    // values[m][s]: best score of rows m.. given row m in state s.
    let backward = |first: Option<usize>| -> Vec<Vec<u32>> {
        let mut values: Vec<Vec<u32>> = vec![Vec::new(); r];
        for m in (0..r).rev() {
            values[m] = (0..spaces[m].size)
                .map(|s| {
                    let tail = if m + 1 < r {
                        (0..spaces[m + 1].size)
                            .map(|t| links[m][s][t] + values[m + 1][t])
                            .max()
                            .unwrap()
                    } else if let Some(f) = first {
                        links[m][s][f]
                    } else {
                        0
                    };
                    within[m][s] + tail
                })
                .collect();
        }
        values
    };

    let (first, values) = if wrap_rows {
        let mut best: Option<(u32, usize)> = None;
        for f in 0..spaces[0].size {
            let v = backward(Some(f))[0][f];
            if best.map_or(true, |(b, _)| v > b) {
                best = Some((v, f));
            }
        }
        let f = best.unwrap().1;
        (f, backward(Some(f)))
    } else {
        let values = backward(None);
        let top = *values[0].iter().max().unwrap();
        let f = values[0].iter().position(|&v| v == top).unwrap();
        (f, values)
    };

    let score = values[0][first] as usize;
    let mut states = vec![first];
    for m in 1..r {
        let prev = states[m - 1];
        let target = values[m - 1][prev] - within[m - 1][prev];
        let s = (0..spaces[m].size)
            .find(|&t| links[m - 1][prev][t] + values[m][t] == target)
            .expect("optimal continuation exists");
        states.push(s);
    }
    let pairs = states
        .iter()
        .zip(&decoded)
        .flat_map(|(&s, row)| row[s].clone())
        .collect();
    Ok((pairs, score))
}

/// Optimal total assignment and `opt` consistency, exactly; ties resolve to
/// the lexicographically smallest vector of per-cell option indices.
pub fn gt_bruteforce(inst: &GridTilingInstance, limits: &Limits) -> Result<(GtAssignment, usize)> {
    let (pairs, score) = solve_region(inst, &Region::whole(inst.k), limits)?;
    Ok((GtAssignment::total(inst.k, pairs)?, score))
}

/// Number of blocks per side and block side length used by
/// [`gt_block_approx`], or `None` when `eps * k < 4` (exact search instead).
pub fn block_layout(k: usize, eps: &Rat) -> Option<(usize, usize)> {
    let ek = eps * &Rat::from_int(k as i64);
    if ek < Rat::from_int(4) {
        return None;
    }
    let ell = (&(&ek / &Rat::from_int(2)) - &Rat::one()).floor();
    let ell: usize = ell.try_into().expect("ell fits usize");
    let side = k.div_ceil(ell);
    Some((ell, side))
}

/// Additive approximation with consistency at least `opt - eps k^2`: split
/// the grid into `ell^2` blocks of side at most `B`, solve each block exactly
/// on its internal pairs and concatenate.
pub fn gt_block_approx(inst: &GridTilingInstance, eps: &Rat, limits: &Limits) -> Result<GtAssignment> {
    if !eps.is_positive() {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let k = inst.k;
    let Some((ell, side)) = block_layout(k, eps) else {
        return Ok(gt_bruteforce(inst, limits)?.0);
    };
    let span = |b: usize| (side * b).min(k)..(side * (b + 1)).min(k);
    let regions: Vec<Region> = (0..ell)
        .flat_map(|bi| (0..ell).map(move |bj| (bi, bj)))
        .map(|(bi, bj)| Region {
            rows: span(bi),
            cols: span(bj),
        })
        .filter(|reg| !reg.rows.is_empty() && !reg.cols.is_empty())
        .collect();
    let solved: Vec<(Region, Vec<Pair>)> = regions
        .into_par_iter()
        .map(|reg| solve_region(inst, &reg, limits).map(|(p, _)| (reg, p)))
        .collect::<Result<_>>()?;
    let mut sigma = GtAssignment::undefined(k);
    for (reg, pairs) in solved {
        let mut it = pairs.into_iter();
        for i in reg.rows.clone() {
            for j in reg.cols.clone() {
                sigma.set(Cell::new(i, j), it.next());
            }
        }
    }
    debug_assert!(sigma.is_total());
    Ok(sigma)
}

/// Binary CSP on variables `0..k` over alphabet `[1, n]`. Constraints live on
/// unordered pairs keyed `(i, j)` with `i < j`; a stored pair `(a, b)` means
/// variable `i` takes `a` and variable `j` takes `b`. Absent pairs allow
/// everything.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BcspInstance {
    k: usize,
    n: u32,
    constraints: BTreeMap<(usize, usize), Vec<Pair>>,
}

impl BcspInstance {
    /// Each entry is `(i, j, pairs)`; entries with `i > j` are flipped.
    pub fn new(k: usize, n: u32, constraints: Vec<(usize, usize, Vec<Pair>)>) -> Result<Self> {
        if k < 2 {
            return Err(Error::Invalid(format!("need at least 2 variables, got {k}")));
        }
        if n == 0 {
            return Err(Error::Invalid("alphabet size n must be positive".into()));
        }
        let mut map = BTreeMap::new();
        for (i, j, pairs) in constraints {
            if i == j || i >= k || j >= k {
                return Err(Error::Invalid(format!(
                    "constraint on ({i},{j}) is not a pair of distinct variables in [0,{k})"
                )));
            }
            let (key, mut pairs) = if i < j {
                ((i, j), pairs)
            } else {
                ((j, i), pairs.into_iter().map(|(a, b)| (b, a)).collect())
            };
            if pairs.iter().any(|&(a, b)| a == 0 || b == 0 || a > n || b > n) {
                return Err(Error::Invalid(format!(
                    "constraint ({i},{j}) uses a value outside [1,{n}]"
                )));
            }
            pairs.sort_unstable();
            pairs.dedup();
            if pairs.is_empty() {
                return Err(Error::Invalid(format!("constraint ({i},{j}) is empty")));
            }
            if map.insert(key, pairs).is_some() {
                return Err(Error::Invalid(format!("constraint ({i},{j}) given twice")));
            }
        }
        Ok(BcspInstance {
            k,
            n,
            constraints: map,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn constraints(&self) -> &BTreeMap<(usize, usize), Vec<Pair>> {
        &self.constraints
    }

    /// Explicit relation for `(i, j)` oriented from `i` to `j`; the full
    /// relation is materialised for absent pairs.
    pub fn relation(&self, i: usize, j: usize) -> Vec<Pair> {
        let full = || {
            (1..=self.n)
                .flat_map(|a| (1..=self.n).map(move |b| (a, b)))
                .collect()
        };
        if i < j {
            self.constraints.get(&(i, j)).cloned().unwrap_or_else(full)
        } else {
            self.constraints
                .get(&(j, i))
                .map(|ps| ps.iter().map(|&(a, b)| (b, a)).collect())
                .unwrap_or_else(full)
        }
    }

    pub fn allows(&self, i: usize, j: usize, a: u32, b: u32) -> bool {
        let (key, val) = if i < j { ((i, j), (a, b)) } else { ((j, i), (b, a)) };
        self.constraints
            .get(&key)
            .map_or(true, |ps| ps.binary_search(&val).is_ok())
    }
}

fn check_psi(inst: &BcspInstance, psi: &[u32]) -> Result<()> {
    if psi.len() != inst.k {
        return Err(Error::Invalid(format!(
            "assignment has {} values for {} variables",
            psi.len(),
            inst.k
        )));
    }
    if psi.iter().any(|&v| v == 0 || v > inst.n) {
        return Err(Error::Invalid("assignment value outside the alphabet".into()));
    }
    Ok(())
}

/// Number of unordered variable pairs whose constraint `psi` satisfies.
pub fn bcsp_satisfied(inst: &BcspInstance, psi: &[u32]) -> Result<usize> {
    check_psi(inst, psi)?;
    let k = inst.k;
    Ok((0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .filter(|&(i, j)| inst.allows(i, j, psi[i], psi[j]))
        .count())
}

/// Fraction of the `C(k, 2)` constraints satisfied by `psi`.
pub fn bcsp_eval(inst: &BcspInstance, psi: &[u32]) -> Result<Rat> {
    let sat = bcsp_satisfied(inst, psi)?;
    let k = inst.k as i64;
    Rat::new(sat as i64, k * (k - 1) / 2)
}

/// Best assignment by enumeration of all `n^k` assignments (lexicographically
/// smallest among optima).
pub fn bcsp_bruteforce(inst: &BcspInstance, limits: &Limits) -> Result<(Vec<u32>, Rat)> {
    let total = (inst.n as u64).checked_pow(inst.k as u32);
    if total.map_or(true, |t| t > limits.max_subsets) {
        return Err(Error::Resource(format!(
            "{}^{} assignments exceed the limit of {}",
            inst.n, inst.k, limits.max_subsets
        )));
    }
    let mut psi = vec![1u32; inst.k];
    let mut best = (psi.clone(), bcsp_satisfied(inst, &psi)?);
    loop {
        let mut t = inst.k;
        loop {
            if t == 0 {
                let k = inst.k as i64;
                return Ok((best.0, Rat::new(best.1 as i64, k * (k - 1) / 2)?));
            }
            t -= 1;
            if psi[t] < inst.n {
                psi[t] += 1;
                break;
            }
            psi[t] = 1;
        }
        let sat = bcsp_satisfied(inst, &psi)?;
        if sat > best.1 {
            best = (psi.clone(), sat);
        }
    }
}

/// Contents of the diagonal cells `(i, i)` produced by [`bcsp_to_gridtiling`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DiagonalCells {
    /// `{(z, z) : z in [n]}`; forces the row and column value of each
    /// variable to coincide, which the soundness direction relies on.
    #[default]
    Equality,
    /// All of `[n]^2`. Complete, but an unsatisfiable CSP can still yield a
    /// fully consistent tiling (see the tests).
    Unrestricted,
}

/// Grid Tiling instance with cell `(i, j)` holding the constraint between
/// variables `i` and `j` (oriented from `i`) and diagonal cells per `mode`.
pub fn bcsp_to_gridtiling_with(inst: &BcspInstance, mode: DiagonalCells) -> Result<GridTilingInstance> {
    let k = inst.k;
    let n = inst.n;
    let mut cells = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let set = if i == j {
                match mode {
                    DiagonalCells::Equality => (1..=n).map(|z| (z, z)).collect(),
                    DiagonalCells::Unrestricted => inst.relation(0, 0).into_iter().collect(),
                }
            } else {
                inst.relation(i, j)
            };
            cells.push(set);
        }
    }
    GridTilingInstance::new(k, n, cells)
}

pub fn bcsp_to_gridtiling(inst: &BcspInstance) -> Result<GridTilingInstance> {
    bcsp_to_gridtiling_with(inst, DiagonalCells::Equality)
}

/// `sigma(i, j) = (psi(i), psi(j))`.
pub fn lift_assignment(psi: &[u32]) -> GtAssignment {
    let k = psi.len();
    let values = (0..k)
        .flat_map(|i| (0..k).map(move |j| (psi[i], psi[j])))
        .collect();
    GtAssignment::total(k, values).expect("k^2 values")
}

/// `psi(i)` = first coordinate of `sigma(i, i)`.
pub fn project_assignment(sigma: &GtAssignment) -> Result<Vec<u32>> {
    (0..sigma.k)
        .map(|i| {
            sigma
                .get(Cell::new(i, i))
                .map(|p| p.0)
                .ok_or_else(|| Error::Invalid(format!("diagonal cell ({i},{i}) undefined")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    /// The 3x3, n = 4 example; `cells[i*3+j]` with `i` the column.
    pub(crate) fn sample_grid() -> GridTilingInstance {
        let s = |v: &[(u32, u32)]| v.to_vec();
        GridTilingInstance::new(
            3,
            4,
            vec![
                s(&[(1, 1), (3, 2)]), // S_{1,1}
                s(&[(3, 4), (4, 3)]), // S_{1,2}
                s(&[(3, 2), (4, 1)]), // S_{1,3}
                s(&[(1, 2), (2, 2)]), // S_{2,1}
                s(&[(1, 4), (3, 1)]), // S_{2,2}
                s(&[(1, 2), (1, 3)]), // S_{2,3}
                s(&[(1, 2), (4, 2)]), // S_{3,1}
                s(&[(2, 1), (4, 4)]), // S_{3,2}
                s(&[(3, 3), (4, 2)]), // S_{3,3}
            ],
        )
        .unwrap()
    }

    fn sample_grid_solution() -> GtAssignment {
        GtAssignment::total(
            3,
            vec![(3, 2), (3, 4), (3, 2), (1, 2), (1, 4), (1, 2), (4, 2), (4, 4), (4, 2)],
        )
        .unwrap()
    }

    /// Independent count straight from the neighbour definitions.
    fn scan_consistency(inst: &GridTilingInstance, sigma: &GtAssignment) -> usize {
        let k = inst.k();
        let mut count = 0;
        for i in 0..k {
            for j in 0..k {
                let here = sigma.get(Cell::new(i, j)).unwrap();
                let down = sigma.get(Cell::new(i, (j + 1) % k)).unwrap();
                let right = sigma.get(Cell::new((i + 1) % k, j)).unwrap();
                count += (here.0 == down.0) as usize + (here.1 == right.1) as usize;
            }
        }
        count
    }

    /// Full product-space enumeration.
    fn enumerate_opt(inst: &GridTilingInstance) -> usize {
        inst.cells()
            .iter()
            .map(|c| c.iter().copied())
            .multi_cartesian_product()
            .map(|vals| scan_consistency(inst, &GtAssignment::total(inst.k(), vals).unwrap()))
            .max()
            .unwrap()
    }

    #[test]
    fn adjacency_count_and_order() {
        for k in 3..7 {
            let adj = adjacencies(k);
            assert_eq!(adj.len(), 2 * k * k);
            let unique: HashSet<_> = adj
                .iter()
                .map(|a| {
                    let (x, y) = if a.from < a.to { (a.from, a.to) } else { (a.to, a.from) };
                    (x, y)
                })
                .collect();
            assert_eq!(unique.len(), 2 * k * k);
        }
        let adj = adjacencies(3);
        assert_eq!(adj[0].direction, Direction::Vertical);
        assert_eq!(adj[1].direction, Direction::Horizontal);
        assert_eq!(adj[0].to, Cell::new(0, 1));
    }

    #[test]
    fn sample_solution_is_fully_consistent() {
        let inst = sample_grid();
        let sigma = sample_grid_solution();
        assert_eq!(consistency(&inst, &sigma).unwrap(), 18);
        assert_eq!(inconsistency(&inst, &sigma).unwrap(), 0);
        let (best, opt) = gt_bruteforce(&inst, &Limits::default()).unwrap();
        assert_eq!(opt, 18);
        assert_eq!(enumerate_opt(&inst), 18);
        assert_eq!(consistency(&inst, &best).unwrap(), 18);
    }

    #[test]
    fn singleton_and_full_cells() {
        let inst = GridTilingInstance::new(3, 2, vec![vec![(2, 1)]; 9]).unwrap();
        let (sigma, opt) = gt_bruteforce(&inst, &Limits::default()).unwrap();
        assert_eq!(opt, 18);
        assert_eq!(consistency(&inst, &sigma).unwrap(), 18);
        for eps in [Rat::ratio(1, 10), Rat::from_int(2)] {
            let approx = gt_block_approx(&inst, &eps, &Limits::default()).unwrap();
            assert_eq!(consistency(&inst, &approx).unwrap(), 18);
        }
        let full: Vec<Pair> = (1..=2).flat_map(|a| (1..=2).map(move |b| (a, b))).collect();
        let inst = GridTilingInstance::new(3, 2, vec![full; 9]).unwrap();
        let (sigma, opt) = gt_bruteforce(&inst, &Limits::default()).unwrap();
        assert_eq!(opt, 18);
        // Lexicographically smallest optimum takes option 0 everywhere.
        assert!(sigma.values().iter().all(|p| *p == Some((1, 1))));
    }

    #[test]
    fn instance_validation() {
        assert!(GridTilingInstance::new(2, 2, vec![vec![(1, 1)]; 4]).is_err());
        let mut cells = vec![vec![(1, 1)]; 9];
        cells[4].clear();
        assert!(GridTilingInstance::new(3, 2, cells).is_err());
        assert!(GridTilingInstance::new(3, 2, vec![vec![(1, 3)]; 9]).is_err());
        assert!(GridTilingInstance::new(3, 2, vec![vec![(1, 1), (1, 1)]; 9]).is_err());
        let inst = sample_grid();
        let bad = GtAssignment::total(3, vec![(1, 1); 9]).unwrap();
        assert!(consistency(&inst, &bad).is_err());
        assert!(consistency(&inst, &GtAssignment::undefined(3)).is_err());
    }

    #[test]
    fn torus_never_has_exactly_one_violation() {
        // A cycle of equalities cannot fail in exactly one place.
        let mut inst_cells = sample_grid().cells().to_vec();
        inst_cells[0] = vec![(2, 3)];
        let inst = GridTilingInstance::new(3, 4, inst_cells).unwrap();
        let (_, opt) = gt_bruteforce(&inst, &Limits::default()).unwrap();
        assert_eq!(opt, enumerate_opt(&inst));
        assert!(opt <= 16);
    }

    #[test]
    fn block_layout_constants() {
        assert_eq!(block_layout(4, &Rat::from_int(1)), Some((1, 4)));
        assert_eq!(block_layout(4, &Rat::from_int(2)), Some((3, 2)));
        assert_eq!(block_layout(4, &Rat::ratio(1, 2)), None);
        assert_eq!(block_layout(10, &Rat::one()), Some((4, 3)));
    }

    #[test]
    fn partial_inconsistency_ignores_undefined_cells() {
        let inst = sample_grid();
        let mut sigma = sample_grid_solution();
        sigma.set(Cell::new(0, 0), Some((1, 1)));
        let full = inconsistency(&inst, &sigma).unwrap();
        assert_eq!(full, 18 - consistency(&inst, &sigma).unwrap());
        sigma.set(Cell::new(0, 0), None);
        assert_eq!(inconsistency(&inst, &sigma).unwrap(), 0);
    }

    fn triangle_coloring(colors: u32) -> BcspInstance {
        let neq: Vec<Pair> = (1..=colors)
            .flat_map(|a| (1..=colors).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        BcspInstance::new(
            3,
            colors,
            vec![(0, 1, neq.clone()), (1, 2, neq.clone()), (0, 2, neq)],
        )
        .unwrap()
    }

    #[test]
    fn bcsp_eval_cases() {
        let free = BcspInstance::new(3, 2, vec![]).unwrap();
        assert_eq!(bcsp_eval(&free, &[1, 2, 1]).unwrap(), 1);
        let tri = triangle_coloring(3);
        assert_eq!(bcsp_eval(&tri, &[1, 2, 3]).unwrap(), 1);
        assert_eq!(bcsp_eval(&tri, &[1, 1, 3]).unwrap(), Rat::ratio(2, 3));
        assert!(bcsp_eval(&tri, &[1, 2]).is_err());
        assert!(bcsp_eval(&tri, &[1, 2, 4]).is_err());
    }

    #[test]
    fn bcsp_orientation_is_normalised() {
        let a = BcspInstance::new(3, 3, vec![(2, 0, vec![(1, 3)])]).unwrap();
        assert!(a.allows(0, 2, 3, 1));
        assert!(a.allows(2, 0, 1, 3));
        assert!(!a.allows(0, 2, 1, 3));
        assert!(BcspInstance::new(3, 3, vec![(0, 1, vec![])]).is_err());
        assert!(BcspInstance::new(3, 3, vec![(0, 0, vec![(1, 1)])]).is_err());
        assert!(BcspInstance::new(3, 3, vec![(0, 1, vec![(1, 1)]), (1, 0, vec![(1, 1)])]).is_err());
    }

    #[test]
    fn bcsp_reduction_completeness() {
        let tri = triangle_coloring(3);
        let gt = bcsp_to_gridtiling(&tri).unwrap();
        let sigma = lift_assignment(&[1, 2, 3]);
        assert_eq!(consistency(&gt, &sigma).unwrap(), 18);
        assert_eq!(gt_bruteforce(&gt, &Limits::default()).unwrap().1, 18);
        assert_eq!(project_assignment(&sigma).unwrap(), vec![1, 2, 3]);

        let free = BcspInstance::new(3, 2, vec![]).unwrap();
        let gt = bcsp_to_gridtiling_with(&free, DiagonalCells::Unrestricted).unwrap();
        assert!(gt.cells().iter().all(|c| c.len() == 4));
        assert_eq!(gt_bruteforce(&gt, &Limits::default()).unwrap().1, 18);
    }

    #[test]
    fn unsatisfiable_bcsp_loses_consistency() {
        let tri = triangle_coloring(2);
        assert!(bcsp_bruteforce(&tri, &Limits::default()).unwrap().1 < Rat::one());
        let gt = bcsp_to_gridtiling(&tri).unwrap();
        assert!(gt_bruteforce(&gt, &Limits::default()).unwrap().1 < 18);
    }

    #[test]
    fn unrestricted_diagonal_breaks_soundness() {
        // Two-colouring a triangle is impossible, yet with free diagonal cells
        // the tiling sigma(i,j) = (1, 2) is fully consistent.
        let tri = triangle_coloring(2);
        let gt = bcsp_to_gridtiling_with(&tri, DiagonalCells::Unrestricted).unwrap();
        assert_eq!(gt_bruteforce(&gt, &Limits::default()).unwrap().1, 18);
    }

    fn arb_grid(k: usize, n: u32, max_cell: usize) -> impl Strategy<Value = GridTilingInstance> {
        let pair = (1..=n, 1..=n);
        proptest::collection::vec(proptest::collection::btree_set(pair, 1..=max_cell), k * k)
            .prop_map(move |cells| {
                GridTilingInstance::new(k, n, cells.into_iter().map(|s| s.into_iter().collect()).collect())
                    .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dp_matches_enumeration(inst in arb_grid(3, 3, 2)) {
            let (sigma, opt) = gt_bruteforce(&inst, &Limits::default()).unwrap();
            prop_assert_eq!(opt, enumerate_opt(&inst));
            prop_assert_eq!(consistency(&inst, &sigma).unwrap(), opt);
            prop_assert_eq!(scan_consistency(&inst, &sigma), opt);
            prop_assert_eq!(consistency(&inst, &sigma).unwrap() + inconsistency(&inst, &sigma).unwrap(), 18);
        }

        #[test]
        fn dp_returns_lex_smallest_optimum(inst in arb_grid(3, 2, 2)) {
            let (sigma, opt) = gt_bruteforce(&inst, &Limits::default()).unwrap();
            let first = inst.cells()
                .iter()
                .map(|c| c.iter().copied())
                .multi_cartesian_product()
                .find(|vals| scan_consistency(&inst, &GtAssignment::total(3, vals.clone()).unwrap()) == opt)
                .unwrap();
            prop_assert_eq!(sigma.to_pairs().unwrap(), first);
        }

        #[test]
        fn block_approx_guarantee(inst in arb_grid(4, 3, 3), e in 1i64..=2) {
            let eps = Rat::from_int(e);
            let (_, opt) = gt_bruteforce(&inst, &Limits::default()).unwrap();
            let sigma = gt_block_approx(&inst, &eps, &Limits::default()).unwrap();
            let cons = consistency(&inst, &sigma).unwrap() as i64;
            prop_assert!(cons >= opt as i64 - 16 * e);
        }

        #[test]
        fn planted_bcsp_tiles_perfectly(psi in proptest::collection::vec(1u32..=3, 3..=4), extra in 0u32..3) {
            let k = psi.len();
            let mut cons = Vec::new();
            for i in 0..k {
                for j in i + 1..k {
                    let mut pairs = vec![(psi[i], psi[j])];
                    pairs.push(((psi[i] + extra) % 3 + 1, psi[j]));
                    cons.push((i, j, pairs));
                }
            }
            let inst = BcspInstance::new(k, 3, cons).unwrap();
            prop_assert_eq!(bcsp_eval(&inst, &psi).unwrap(), Rat::one());
            let gt = bcsp_to_gridtiling(&inst).unwrap();
            let sigma = lift_assignment(&psi);
            prop_assert_eq!(consistency(&gt, &sigma).unwrap(), 2 * k * k);
            prop_assert_eq!(gt_bruteforce(&gt, &Limits::default()).unwrap().1, 2 * k * k);
        }
    }
}
