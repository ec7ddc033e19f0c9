//! Executable reductions into determinant maximization and orthogonality.
//!
//! * k-Sum to arrowhead DetMax, with a certified rational threshold.
//! * Grid Tiling to pairwise-orthogonal vector selection.
//! * The Hadamard-based unit-vector gadget and the Grid Tiling gap
//!   reduction built on it.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridtiling::{adjacencies, Cell, Direction, GridTilingInstance, Pair};
use crate::linalg::{gram, GramMatrix, IndexSet, RatVectorSet};
use crate::rational::{approx_exp, approx_sqrt, exp_enclosure, Rat};
use crate::solvers::maxdet_bruteforce;
use crate::Limits;

/// Primitive triples `(2x+1, 2x^2+2x, 2x^2+2x+1)` for `x = 1..=n`.
pub fn pythagorean_triples(n: u32) -> Vec<(u64, u64, u64)> {
    (1..=n as u64)
        .map(|x| (2 * x + 1, 2 * x * x + 2 * x, 2 * x * x + 2 * x + 1))
        .collect()
}

/// Normalized k-Sum: values in `(0, 1)` summing to 1, target `t` in `(0, 1)`,
/// all integer multiples of `granularity`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSumInstance {
    x: Vec<Rat>,
    t: Rat,
    k: usize,
    granularity: Rat,
}

impl KSumInstance {
    pub fn new(x: Vec<Rat>, t: Rat, k: usize, granularity: Rat) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::Invalid("k-Sum needs at least one value".into()));
        }
        if k == 0 || k > n {
            return Err(Error::Invalid(format!("k = {k} must lie in [1, {n}]")));
        }
        if !granularity.is_positive() {
            return Err(Error::Invalid("granularity must be positive".into()));
        }
        let one = Rat::one();
        for v in x.iter().chain(std::iter::once(&t)) {
            if !v.is_positive() || *v >= one {
                return Err(Error::Invalid(format!("value {v} is not in (0,1)")));
            }
            if !(v / &granularity).is_integer() {
                return Err(Error::Invalid(format!(
                    "value {v} is not a multiple of the granularity {granularity}"
                )));
            }
        }
        let total: Rat = x.iter().cloned().sum();
        if total != one {
            return Err(Error::Invalid(format!("values sum to {total}, not 1")));
        }
        Ok(KSumInstance { x, t, k, granularity })
    }

    pub fn x(&self) -> &[Rat] {
        &self.x
    }

    pub fn t(&self) -> &Rat {
        &self.t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn granularity(&self) -> &Rat {
        &self.granularity
    }

    /// Lexicographically first `k`-subset summing to `t`, by enumeration.
    pub fn solution(&self) -> Option<IndexSet> {
        (0..self.n())
            .combinations(self.k)
            .find(|s| s.iter().map(|&i| self.x[i].clone()).sum::<Rat>() == self.t)
            .map(|s| IndexSet::new(s).expect("combinations are increasing"))
    }

    /// Minimum gap between distinct subset sums: the smaller of the
    /// granularity and `1/n^(2k+1)`.
    pub fn delta(&self) -> Rat {
        let n = Rat::from_int(self.n() as i64);
        let generic = n.pow(-(2 * self.k as i32 + 1));
        generic.min(self.granularity.clone())
    }
}

/// Divide positive integers by their total; `g = 1/total`.
pub fn ksum_normalize(x_int: &[i64], t_int: i64, k: usize) -> Result<KSumInstance> {
    if let Some(bad) = x_int.iter().find(|&&v| v <= 0) {
        return Err(Error::Invalid(format!("k-Sum values must be positive, got {bad}")));
    }
    let total: i64 = x_int.iter().sum();
    if t_int <= 0 || t_int >= total {
        return Err(Error::Invalid(format!(
            "target {t_int} must lie strictly between 0 and {total}"
        )));
    }
    let x = x_int.iter().map(|&v| Rat::ratio(v, total)).collect();
    KSumInstance::new(x, Rat::ratio(t_int, total), k, Rat::ratio(1, total))
}

/// Construction constants of the k-Sum reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArrowheadParams {
    pub alpha: Rat,
    pub beta: Rat,
    pub gamma: Rat,
    pub delta: Rat,
    pub eps: Rat,
}

/// Rational bounds separating the two sides of the decision: every
/// non-solution minor is at most `soundness_hi`, every solution minor at
/// least `completeness_lo`, and `soundness_hi < theta < completeness_lo`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaCertificate {
    pub opt_lo: Rat,
    pub opt_hi: Rat,
    pub rho_lo: Rat,
    pub rho_hi: Rat,
    pub soundness_hi: Rat,
    pub completeness_lo: Rat,
}

#[derive(Clone, Debug)]
pub struct ArrowheadReduction {
    pub vectors: RatVectorSet,
    pub gram: GramMatrix,
    /// Size of the principal minor to maximize, `k + 1`.
    pub target: usize,
    pub theta: Rat,
    pub params: ArrowheadParams,
    pub certificate: ThetaCertificate,
}

impl ArrowheadReduction {
    /// `maxdet(B, k+1) >= theta`, computed exhaustively.
    pub fn decide(&self, limits: &Limits) -> Result<bool> {
        Ok(maxdet_bruteforce(&self.gram, self.target, limits)?.value >= self.theta)
    }

    pub fn meta(&self) -> BTreeMap<String, String> {
        let p = &self.params;
        let c = &self.certificate;
        [
            ("alpha", &p.alpha),
            ("beta", &p.beta),
            ("gamma", &p.gamma),
            ("delta", &p.delta),
            ("eps", &p.eps),
            ("theta", &self.theta),
            ("soundness_hi", &c.soundness_hi),
            ("completeness_lo", &c.completeness_lo),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .chain([("target".to_string(), self.target.to_string())])
        .collect()
    }
}

/// Perturbation budget `(100000 k)^-k (delta^2/2 - delta^3/3)`.
pub fn arrowhead_eps(k: usize, delta: &Rat) -> Rat {
    let base = Rat::from_int(100_000 * k as i64).pow(-(k as i32));
    let d2 = delta * delta;
    let d3 = &d2 * delta;
    base * (d2 / Rat::from_int(2) - d3 / Rat::from_int(3))
}

fn theta_certificate(inst: &KSumInstance, delta: &Rat) -> Result<ThetaCertificate> {
    let one = Rat::one();
    let k = inst.k() as i32;
    let gamma_sq = Rat::from_int(25);
    let poly = (&one + inst.t()).pow(k - 1) * gamma_sq;
    let mut eta = delta * delta / Rat::from_int(100);
    loop {
        let (et_lo, et_hi) = exp_enclosure(inst.t(), &eta)?;
        let (ed_lo, ed_hi) = exp_enclosure(delta, &eta)?;
        let opt_lo = &poly * &et_lo;
        let opt_hi = &poly * &et_hi;
        let rho_lo = (&one + delta) / ed_hi;
        let rho_hi = (&one + delta) / ed_lo;
        let third = Rat::ratio(1, 3);
        let two_thirds = Rat::ratio(2, 3);
        let soundness_hi = (&third + &two_thirds * &rho_hi) * &opt_hi;
        let completeness_lo = (&two_thirds + &third * &rho_lo) * &opt_lo;
        if soundness_hi < completeness_lo {
            return Ok(ThetaCertificate {
                opt_lo,
                opt_hi,
                rho_lo,
                rho_hi,
                soundness_hi,
                completeness_lo,
            });
        }
        eta = eta / Rat::from_int(100);
    }
}

/// Arrowhead Gram matrix whose `(k+1)`-minor maximum decides the k-Sum
/// instance against `theta`.
///
/// Vector 0 carries `5 sqrt(x_j)` in coordinate `j`; vector `i` carries
/// `sqrt(e^{x_i})` in coordinate `i` and `sqrt(t e^{x_i})` in coordinate
/// `i + n`. Nonzero entries are rational `(1 ± eps)` approximations; zeros
/// stay exact. Fails with a resource error when `eps` needs more than
/// `limits.max_bits` bits.
pub fn ksum_to_arrowhead(inst: &KSumInstance, limits: &Limits) -> Result<ArrowheadReduction> {
    let n = inst.n();
    let k = inst.k();
    let delta = inst.delta();
    let eps = arrowhead_eps(k, &delta);
    if eps.bits() > limits.max_bits {
        return Err(Error::Resource(format!(
            "precision eps needs {} bits, above the limit of {}",
            eps.bits(),
            limits.max_bits
        )));
    }
    let half = &eps / &Rat::from_int(2);
    let gamma = Rat::from_int(5);
    let t = inst.t().clone();

    let mut vectors = vec![vec![Rat::zero(); 2 * n]; n + 1];
    for (j, xj) in inst.x().iter().enumerate() {
        vectors[0][j] = &gamma * &approx_sqrt(xj, &half)?;
    }
    for (i, xi) in inst.x().iter().enumerate() {
        let e = approx_exp(xi, &half)?;
        vectors[i + 1][i] = approx_sqrt(&e, &half)?;
        vectors[i + 1][i + n] = approx_sqrt(&(&t * &e), &half)?;
    }
    let vectors = RatVectorSet::new(vectors)?;
    let gram = gram(&vectors);
    let certificate = theta_certificate(inst, &delta)?;
    let theta = (&certificate.soundness_hi + &certificate.completeness_lo) / Rat::from_int(2);
    Ok(ArrowheadReduction {
        vectors,
        gram,
        target: k + 1,
        theta,
        params: ArrowheadParams {
            alpha: Rat::one(),
            beta: t,
            gamma,
            delta,
            eps,
        },
        certificate,
    })
}

/// Closed form of the `S`-minor of the unrounded construction with `x` and
/// `t` given exactly and `exp(sum)` supplied by the caller:
/// `(1+t)^(|S|-1) 25 e^X (1 - X/(1+t))` when `0` is in `S`, else
/// `(1+t)^|S| e^X`, where `X` sums `x_i` over the nonzero members.
pub fn arrowhead_closed_form(t: &Rat, subset_len: usize, contains_zero: bool, sum: &Rat, exp_sum: &Rat) -> Rat {
    let one = Rat::one();
    let ab = &one + t;
    if contains_zero {
        ab.pow(subset_len as i32 - 1) * Rat::from_int(25) * exp_sum * (&one - sum / &ab)
    } else {
        ab.pow(subset_len as i32) * exp_sum
    }
}

/// Where each reduction vector came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VectorOrigin {
    pub cell: Cell,
    pub pair: Pair,
}

fn origins(inst: &GridTilingInstance) -> Vec<VectorOrigin> {
    inst.all_cells()
        .flat_map(|cell| inst.cell(cell).iter().map(move |&pair| VectorOrigin { cell, pair }))
        .collect()
}

/// The four two-coordinate blocks touched by a cell, as
/// `(block index, role)` with role `Incoming`/`Outgoing` and direction.
fn incident_blocks(k: usize) -> BTreeMap<Cell, Vec<(usize, Direction, bool)>> {
    let mut map: BTreeMap<Cell, Vec<(usize, Direction, bool)>> = BTreeMap::new();
    for (e, adj) in adjacencies(k).iter().enumerate() {
        map.entry(adj.from).or_default().push((e, adj.direction, true));
        map.entry(adj.to).or_default().push((e, adj.direction, false));
    }
    map
}

#[derive(Clone, Debug)]
pub struct OrthoReduction {
    pub vectors: RatVectorSet,
    /// Size of the orthogonal set to find, `k^2`.
    pub target: usize,
    pub origins: Vec<VectorOrigin>,
}

/// One `4k^2`-dimensional vector per (cell, pair). On the block of each
/// adjacency the outgoing cell writes the unit point `(a, b)/c` of the
/// triple for its shared coordinate and the incoming cell writes
/// `(-b, a)/c`; these are orthogonal exactly when the coordinates agree.
pub fn gridtiling_to_orthovectors(inst: &GridTilingInstance) -> Result<OrthoReduction> {
    let k = inst.k();
    let triples = pythagorean_triples(inst.n());
    let unit = |v: u32| {
        let (a, b, c) = triples[v as usize - 1];
        let c = c as i64;
        (Rat::ratio(a as i64, c), Rat::ratio(b as i64, c))
    };
    let blocks = incident_blocks(k);
    let dim = 4 * k * k;
    let origins = origins(inst);
    let vectors = origins
        .iter()
        .map(|o| {
            let mut v = vec![Rat::zero(); dim];
            for &(e, dir, outgoing) in &blocks[&o.cell] {
                let value = match dir {
                    Direction::Vertical => o.pair.0,
                    Direction::Horizontal => o.pair.1,
                };
                let (a, b) = unit(value);
                let (p, q) = if outgoing { (a, b) } else { (-b, a) };
                v[2 * e] = p;
                v[2 * e + 1] = q;
            }
            v
        })
        .collect();
    Ok(OrthoReduction {
        vectors: RatVectorSet::new(vectors)?,
        target: k * k,
        origins,
    })
}

/// `2^ell` unit vectors of dimension `2^(ell+1)` with entries in
/// `{0, 2^(-ell/2)}`, pairwise inner products `1/2`, and complements
/// `scale * 1 - b` that meet every other member at `1/2` and their own
/// vector at `0`.
#[derive(Clone, Debug)]
pub struct GadgetFamily {
    ell: u32,
    scale: Rat,
    vectors: RatVectorSet,
}

impl GadgetFamily {
    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// `2^(-ell/2)`.
    pub fn scale(&self) -> &Rat {
        &self.scale
    }

    pub fn vectors(&self) -> &RatVectorSet {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn member(&self, j: usize) -> &[Rat] {
        self.vectors.vector(j)
    }

    pub fn complement(&self, j: usize) -> Vec<Rat> {
        self.vectors.vector(j).iter().map(|v| &self.scale - v).collect()
    }
}

/// Sylvester Hadamard rows with `+1 -> (s, 0)` and `-1 -> (0, s)`,
/// `s = 2^(-ell/2)`. The `4^ell` entries are charged to `limits.max_subsets`.
pub fn hadamard_gadget(ell: u32, limits: &Limits) -> Result<GadgetFamily> {
    if ell == 0 || ell % 2 == 1 {
        return Err(Error::Invalid(format!("gadget order ell = {ell} must be even and positive")));
    }
    if ell > 30 || 1u64 << (2 * ell) > limits.max_subsets {
        return Err(Error::Resource(format!("gadget of order {ell} is too large")));
    }
    let size = 1usize << ell;
    let scale = Rat::ratio(1, 1i64 << (ell / 2));
    let vectors = (0..size)
        .map(|r| {
            let mut v = vec![Rat::zero(); 2 * size];
            for c in 0..size {
                let positive = (r & c).count_ones() % 2 == 0;
                v[2 * c + usize::from(!positive)] = scale.clone();
            }
            v
        })
        .collect();
    Ok(GadgetFamily {
        ell,
        scale,
        vectors: RatVectorSet::new(vectors)?,
    })
}

/// Gadget order used by the gap reduction: `2 ceil(log2 n)`, at least 2.
pub fn gap_gadget_order(n: u32) -> u32 {
    let log = if n <= 1 { 0 } else { 32 - (n - 1).leading_zeros() };
    (2 * log).max(2)
}

#[derive(Clone, Debug)]
pub struct GapReduction {
    /// Unnormalized vectors; every squared norm is 4.
    pub vectors: RatVectorSet,
    /// `gram(vectors) / 4`, unit diagonal.
    pub normalized: GramMatrix,
    /// Minor size `k^2`.
    pub target: usize,
    pub ell: u32,
    pub origins: Vec<VectorOrigin>,
}

impl GapReduction {
    /// `(cov, dup)`: cells hit by at least one selected vector, and cells
    /// with none. `cov + dup = k^2`.
    pub fn coverage(&self, subset: &IndexSet) -> Result<(usize, usize)> {
        subset.check_bound(self.origins.len())?;
        let cells: std::collections::BTreeSet<Cell> =
            subset.iter().map(|i| self.origins[i].cell).collect();
        Ok((cells.len(), self.target - cells.len()))
    }
}

/// One vector per (cell, pair) made of `2k^2` gadget blocks: on each
/// adjacency the outgoing cell writes `b_v` and the incoming cell writes the
/// complement of `b_v`, where `v` is the coordinate the adjacency compares.
pub fn gridtiling_to_detmax(inst: &GridTilingInstance, limits: &Limits) -> Result<GapReduction> {
    let k = inst.k();
    let ell = gap_gadget_order(inst.n());
    let gadget = hadamard_gadget(ell, limits)?;
    let width = 2 * gadget.len();
    let blocks = incident_blocks(k);
    let origins = origins(inst);
    let dim = 2 * k * k * width;
    let members: Vec<Vec<Rat>> = (0..gadget.len()).map(|j| gadget.member(j).to_vec()).collect();
    let complements: Vec<Vec<Rat>> = (0..gadget.len()).map(|j| gadget.complement(j)).collect();
    let vectors = origins
        .iter()
        .map(|o| {
            let mut v = vec![Rat::zero(); dim];
            for &(e, dir, outgoing) in &blocks[&o.cell] {
                let value = match dir {
                    Direction::Vertical => o.pair.0,
                    Direction::Horizontal => o.pair.1,
                } as usize
                    - 1;
                let src = if outgoing { &members[value] } else { &complements[value] };
                v[e * width..(e + 1) * width].clone_from_slice(src);
            }
            v
        })
        .collect();
    let vectors = RatVectorSet::new(vectors)?;
    let normalized = gram(&vectors).scaled(&Rat::ratio(1, 4))?;
    Ok(GapReduction {
        vectors,
        normalized,
        target: k * k,
        ell,
        origins,
    })
}

/// `gcd` check used by callers that verify primitivity.
pub fn pairwise_coprime(a: u64, b: u64, c: u64) -> bool {
    a.gcd(&b) == 1 && b.gcd(&c) == 1 && a.gcd(&c) == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridtiling::{consistency, gt_bruteforce, GtAssignment};
    use crate::linalg::{inner, is_arrowhead, norm_squared, vol_squared};
    use crate::solvers::find_orthogonal_set;

    fn sample_grid() -> GridTilingInstance {
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

    #[test]
    fn triples() {
        let t = pythagorean_triples(50);
        assert_eq!(t[0], (3, 4, 5));
        assert_eq!(t[1], (5, 12, 13));
        for &(a, b, c) in &t {
            assert_eq!(a * a + b * b, c * c);
            assert!(pairwise_coprime(a, b, c));
        }
    }

    #[test]
    fn normalize_examples() {
        let inst = ksum_normalize(&[1, 2, 3], 3, 2).unwrap();
        assert_eq!(inst.x(), &[Rat::ratio(1, 6), Rat::ratio(1, 3), Rat::ratio(1, 2)]);
        assert_eq!(inst.t(), &Rat::ratio(1, 2));
        assert_eq!(inst.granularity(), &Rat::ratio(1, 6));
        let inst = ksum_normalize(&[5, 5], 5, 1).unwrap();
        assert_eq!(inst.x(), &[Rat::ratio(1, 2), Rat::ratio(1, 2)]);
        assert!(ksum_normalize(&[0, 2], 1, 1).is_err());
        assert!(ksum_normalize(&[1, 2], 3, 1).is_err());
        assert!(ksum_normalize(&[1, 2], 1, 3).is_err());
    }

    #[test]
    fn ksum_validation() {
        let g = Rat::ratio(1, 4);
        assert!(KSumInstance::new(vec![Rat::ratio(1, 2), Rat::ratio(1, 2)], Rat::ratio(1, 2), 1, g.clone()).is_ok());
        assert!(KSumInstance::new(vec![Rat::ratio(1, 2), Rat::ratio(1, 3)], Rat::ratio(1, 2), 1, g.clone()).is_err());
        assert!(KSumInstance::new(vec![Rat::one()], Rat::ratio(1, 2), 1, g.clone()).is_err());
        assert!(KSumInstance::new(vec![Rat::ratio(1, 2), Rat::ratio(1, 2)], Rat::ratio(1, 3), 1, g).is_err());
    }

    #[test]
    fn arrowhead_examples() {
        let limits = Limits::default();
        let yes = ksum_normalize(&[1, 2, 3], 3, 2).unwrap();
        let red = ksum_to_arrowhead(&yes, &limits).unwrap();
        let b = red.gram.matrix();
        assert!(is_arrowhead(b));
        assert!((0..4).all(|i| b.get(i, i).is_positive()));
        assert_eq!(red.target, 3);
        let c = &red.certificate;
        assert!(c.soundness_hi < red.theta && red.theta < c.completeness_lo);
        assert!(red.decide(&limits).unwrap());

        let no = KSumInstance::new(
            yes.x().to_vec(),
            Rat::ratio(5, 12),
            2,
            Rat::ratio(1, 12),
        )
        .unwrap();
        assert!(no.solution().is_none());
        assert!(!ksum_to_arrowhead(&no, &limits).unwrap().decide(&limits).unwrap());
    }

    #[test]
    fn arrowhead_bit_guard() {
        let inst = ksum_normalize(&[1, 2, 3], 3, 2).unwrap();
        let tight = Limits { max_bits: 8, ..Limits::default() };
        assert!(ksum_to_arrowhead(&inst, &tight).unwrap_err().is_resource());
    }

    #[test]
    fn closed_form_at_optimum() {
        // With X = t and 0 in S the closed form equals (1+t)^(k-1) 25 e^t.
        let t = Rat::ratio(1, 2);
        let e = Rat::ratio(33, 20);
        let v = arrowhead_closed_form(&t, 3, true, &t, &e);
        assert_eq!(v, Rat::ratio(3, 2) * Rat::from_int(25) * e.clone());
        assert_eq!(arrowhead_closed_form(&t, 2, false, &t, &e), Rat::ratio(9, 4) * e);
    }

    #[test]
    fn gadget_order_two() {
        let g = hadamard_gadget(2, &Limits::default()).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.vectors().dim(), 8);
        let half = Rat::ratio(1, 2);
        for i in 0..4 {
            assert!(g.member(i).iter().all(|v| v.is_zero() || *v == half));
            assert_eq!(norm_squared(g.member(i)), 1);
            assert_eq!(inner(g.member(i), &g.complement(i)), 0);
            for j in 0..4 {
                if i != j {
                    assert_eq!(inner(g.member(i), g.member(j)), half);
                    assert_eq!(inner(g.member(i), &g.complement(j)), half);
                }
            }
        }
        assert!(hadamard_gadget(3, &Limits::default()).is_err());
        assert!(hadamard_gadget(0, &Limits::default()).is_err());
    }

    #[test]
    fn gadget_orders() {
        assert_eq!(gap_gadget_order(1), 2);
        assert_eq!(gap_gadget_order(2), 2);
        assert_eq!(gap_gadget_order(3), 4);
        assert_eq!(gap_gadget_order(4), 4);
        assert_eq!(gap_gadget_order(5), 6);
    }

    #[test]
    fn orthovectors_sample_grid() {
        let inst = sample_grid();
        let red = gridtiling_to_orthovectors(&inst).unwrap();
        assert_eq!(red.vectors.len(), 18);
        assert_eq!(red.vectors.dim(), 36);
        for v in red.vectors.vectors() {
            assert_eq!(norm_squared(v), 4);
            assert_eq!(v.chunks(2).filter(|b| b.iter().any(|x| !x.is_zero())).count(), 4);
        }
        let found = find_orthogonal_set(&red.vectors, 9, &Limits::default()).unwrap().unwrap();
        let sigma = GtAssignment::total(3, found.iter().map(|i| red.origins[i].pair).collect()).unwrap();
        assert_eq!(consistency(&inst, &sigma).unwrap(), 18);
    }

    #[test]
    fn orthovectors_track_consistency() {
        let inst = sample_grid();
        let red = gridtiling_to_orthovectors(&inst).unwrap();
        for adj in adjacencies(3) {
            for (a, oa) in red.origins.iter().enumerate().filter(|(_, o)| o.cell == adj.from) {
                for (b, ob) in red.origins.iter().enumerate().filter(|(_, o)| o.cell == adj.to) {
                    let ip = inner(red.vectors.vector(a), red.vectors.vector(b));
                    assert_eq!(ip.is_zero(), adj.consistent(oa.pair, ob.pair));
                }
            }
        }
    }

    #[test]
    fn broken_sample_grid_has_no_orthogonal_solution() {
        let mut cells = sample_grid().cells().to_vec();
        cells[0] = vec![(2, 3)];
        let inst = GridTilingInstance::new(3, 4, cells).unwrap();
        let opt = gt_bruteforce(&inst, &Limits::default()).unwrap().1;
        let red = gridtiling_to_orthovectors(&inst).unwrap();
        let found = find_orthogonal_set(&red.vectors, 9, &Limits::default()).unwrap();
        assert_eq!(found.is_some(), opt == 18);
        assert!(found.is_none());
    }

    #[test]
    fn gap_reduction_products() {
        let inst = sample_grid();
        let red = gridtiling_to_detmax(&inst, &Limits::default()).unwrap();
        assert_eq!(red.ell, 4);
        assert_eq!(red.vectors.dim(), 18 * 32);
        let a = red.normalized.matrix();
        let blocks = incident_blocks(3);
        let adjacent = |c: Cell, d: Cell| blocks[&c].iter().any(|x| blocks[&d].iter().any(|y| x.0 == y.0));
        for i in 0..18 {
            assert_eq!(*a.get(i, i), 1);
            for j in 0..18 {
                if i == j {
                    continue;
                }
                let (ci, cj) = (red.origins[i].cell, red.origins[j].cell);
                let v = a.get(i, j);
                if ci == cj {
                    assert!(*v == Rat::ratio(1, 2) || *v == Rat::ratio(3, 4));
                } else if adjacent(ci, cj) {
                    assert!(v.is_zero() || *v == Rat::ratio(1, 8));
                } else {
                    assert!(v.is_zero());
                }
            }
        }
    }

    #[test]
    fn gap_coverage_and_volume() {
        let red = gridtiling_to_detmax(&sample_grid(), &Limits::default()).unwrap();
        let one_per_cell = IndexSet::new((0..9).map(|c| 2 * c).collect()).unwrap();
        assert_eq!(red.coverage(&one_per_cell).unwrap(), (9, 0));
        let doubled = IndexSet::new(vec![0, 1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        let (cov, dup) = red.coverage(&doubled).unwrap();
        assert_eq!((cov, dup), (5, 4));
        let vol = vol_squared(&red.vectors, &doubled).unwrap();
        assert!(vol <= Rat::from_int(4).pow(9) * Rat::ratio(3, 4).pow(dup as i32));
    }
}
