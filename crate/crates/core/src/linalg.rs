//! Exact dense linear algebra over [`Rat`]: Gram matrices, fraction-free
//! determinants, principal minors, volumes and structural predicates.
//!
//! Indices are 0-based throughout. For arrowhead matrices index 0 is the
//! dense row/column and `1..=n` the diagonal part, which matches the usual
//! `[0..n]` convention for those matrices directly.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{denominator_lcm, Rat};

/// Ordered collection of `n >= 1` rational vectors sharing dimension `d >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatVectorSet {
    dim: usize,
    vectors: Vec<Vec<Rat>>,
}

impl RatVectorSet {
    pub fn new(vectors: Vec<Vec<Rat>>) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Invalid("vector set must be nonempty".into()))?;
        if dim == 0 {
            return Err(Error::Invalid("vector dimension must be at least 1".into()));
        }
        if let Some(pos) = vectors.iter().position(|v| v.len() != dim) {
            return Err(Error::Invalid(format!(
                "vector {pos} has dimension {} but expected {dim}",
                vectors[pos].len()
            )));
        }
        Ok(RatVectorSet { dim, vectors })
    }

    /// Convenience constructor from integer coordinates.
    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rat::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[Rat] {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Vec<Rat>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<Vec<Rat>> {
        self.vectors
    }

    /// Sub-collection in the order given by `subset`.
    pub fn select(&self, subset: &IndexSet) -> Result<Vec<&[Rat]>> {
        subset.check_bound(self.len())?;
        Ok(subset.iter().map(|i| self.vector(i)).collect())
    }
}

pub fn inner(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

pub fn norm_squared(a: &[Rat]) -> Rat {
    inner(a, a)
}

/// Dense square matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    order: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn empty() -> Self {
        RatMatrix {
            order: 0,
            entries: Vec::new(),
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let order = rows.len();
        if let Some(pos) = rows.iter().position(|r| r.len() != order) {
            return Err(Error::Invalid(format!(
                "row {pos} has {} entries, matrix is not square ({order} rows)",
                rows[pos].len()
            )));
        }
        Ok(RatMatrix {
            order,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rat::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn zeros(order: usize) -> Self {
        RatMatrix {
            order,
            entries: vec![Rat::zero(); order * order],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.order + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.entries[i * self.order + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rat]> {
        (0..self.order).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        self.rows().map(<[Rat]>::to_vec).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|i| (i + 1..self.order).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Every entry multiplied by `c`.
    pub fn scaled(&self, c: &Rat) -> RatMatrix {
        RatMatrix {
            order: self.order,
            entries: self.entries.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_abs(&self) -> Rat {
        self.entries
            .iter()
            .map(Rat::abs)
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// How a [`GramMatrix`] was obtained; positive semi-definiteness is only
/// guaranteed for the constructed variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Constructed,
    Asserted,
}

/// Symmetric matrix with nonnegative diagonal, tagged with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramMatrix {
    matrix: RatMatrix,
    provenance: Provenance,
}

impl GramMatrix {
    /// Accept a caller-supplied matrix claimed to be PSD. Symmetry and the
    /// diagonal sign are checked; definiteness is not.
    pub fn asserted(matrix: RatMatrix) -> Result<Self> {
        if matrix.order() == 0 {
            return Err(Error::Invalid("gram matrix must have order >= 1".into()));
        }
        if !matrix.is_symmetric() {
            return Err(Error::Invalid("gram matrix is not symmetric".into()));
        }
        if let Some(i) = (0..matrix.order()).find(|&i| matrix.get(i, i).is_negative()) {
            return Err(Error::Invalid(format!("negative diagonal entry at {i}")));
        }
        Ok(GramMatrix {
            matrix,
            provenance: Provenance::Asserted,
        })
    }

    /// Re-tag a validated matrix, e.g. when reloading a document that
    /// records it was built from vectors.
    pub fn with_provenance(self, provenance: Provenance) -> Self {
        GramMatrix { provenance, ..self }
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> RatMatrix {
        self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    /// Scaling by a positive constant keeps a constructed Gram matrix PSD.
    pub fn scaled(&self, c: &Rat) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Domain("gram scale factor must be positive".into()));
        }
        Ok(GramMatrix {
            matrix: self.matrix.scaled(c),
            provenance: self.provenance,
        })
    }
}

impl AsRef<RatMatrix> for GramMatrix {
    fn as_ref(&self) -> &RatMatrix {
        &self.matrix
    }
}

impl AsRef<RatMatrix> for RatMatrix {
    fn as_ref(&self) -> &RatMatrix {
        self
    }
}

/// Strictly increasing sequence of 0-based indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(format!(
                "index set {indices:?} is not strictly increasing"
            )));
        }
        Ok(IndexSet(indices))
    }

    /// Sort and deduplicate.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet(indices)
    }

    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn check_bound(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n => Err(Error::IndexOutOfRange {
                index: last,
                bound: n,
            }),
            _ => Ok(()),
        }
    }

    /// Indices shifted to the 1-based external convention.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

/// Gram matrix `A[i][j] = <v_i, v_j>`.
pub fn gram(vectors: &RatVectorSet) -> GramMatrix {
    let n = vectors.len();
    let mut m = RatMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = inner(vectors.vector(i), vectors.vector(j));
            if i != j {
                m.set(j, i, v.clone());
            }
            m.set(i, j, v);
        }
    }
    GramMatrix {
        matrix: m,
        provenance: Provenance::Constructed,
    }
}

/// Exact determinant. Rows are scaled to integers by their denominator LCM,
/// the integer matrix is eliminated with Bareiss' fraction-free scheme, and
/// the scaling is divided back out. The empty matrix has determinant 1.
pub fn det(m: &RatMatrix) -> Rat {
    let n = m.order();
    if n == 0 {
        return Rat::one();
    }
    let mut scale = BigInt::one();
    let rows: Vec<Vec<BigInt>> = m
        .rows()
        .map(|row| {
            let l = denominator_lcm(row);
            let out = row
                .iter()
                .map(|v| v.numer() * (&l / v.denom()))
                .collect();
            scale *= &l;
            out
        })
        .collect();
    Rat::new(bareiss(rows), scale).expect("positive scale")
}

/// Determinant of an integer matrix by Bareiss elimination with row pivoting.
pub fn bareiss(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pivot = &pivot_row[k];
        for row in tail.iter_mut() {
            let lead = std::mem::take(&mut row[k]);
            for j in k + 1..n {
                let v = &row[j] * pivot - &lead * &pivot_row[j];
                row[j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// `A_S`: rows and columns restricted to `subset`, order preserved.
pub fn principal_submatrix(m: &RatMatrix, subset: &IndexSet) -> Result<RatMatrix> {
    subset.check_bound(m.order())?;
    let idx = subset.as_slice();
    let k = idx.len();
    let mut entries = Vec::with_capacity(k * k);
    for &i in idx {
        for &j in idx {
            entries.push(m.get(i, j).clone());
        }
    }
    Ok(RatMatrix { order: k, entries })
}

/// Principal minor `det(A_S)`.
pub fn principal_minor(m: &RatMatrix, subset: &IndexSet) -> Result<Rat> {
    Ok(det(&principal_submatrix(m, subset)?))
}

/// Squared volume of the parallelepiped spanned by the selected vectors,
/// as the product of squared distances of each vector to the span of its
/// predecessors (exact Gram-Schmidt). `vol^2` of the empty set is 1.
pub fn vol_squared(vectors: &RatVectorSet, subset: &IndexSet) -> Result<Rat> {
    let selected = vectors.select(subset)?;
    Ok(vol_squared_of(&selected))
}

pub fn vol_squared_of(selected: &[&[Rat]]) -> Rat {
    let mut basis: Vec<(Vec<Rat>, Rat)> = Vec::with_capacity(selected.len());
    let mut vol = Rat::one();
    for v in selected {
        let residual = residual_against(v, &basis);
        let dist = norm_squared(&residual);
        if dist.is_zero() {
            return Rat::zero();
        }
        vol *= &dist;
        basis.push((residual, dist));
    }
    vol
}

/// `v` minus its orthogonal projection onto the span of an orthogonal basis
/// (each entry carries its squared norm, which must be nonzero).
pub fn residual_against(v: &[Rat], basis: &[(Vec<Rat>, Rat)]) -> Vec<Rat> {
    let mut w = v.to_vec();
    for (u, uu) in basis {
        let c = inner(&w, u) / uu;
        if c.is_zero() {
            continue;
        }
        for (wi, ui) in w.iter_mut().zip(u) {
            if !ui.is_zero() {
                *wi -= &c * ui;
            }
        }
    }
    w
}

/// Edges `(i, j)`, `i < j`, where `A[i][j]` or `A[j][i]` is nonzero.
pub fn symmetrized_graph(m: &RatMatrix) -> Vec<(usize, usize)> {
    let n = m.order();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !m.get(i, j).is_zero() || !m.get(j, i).is_zero() {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Zero everywhere off the diagonal except row 0 and column 0.
pub fn is_arrowhead(m: &RatMatrix) -> bool {
    let n = m.order();
    (1..n).all(|i| (1..n).all(|j| i == j || m.get(i, j).is_zero()))
}

/// Zero wherever `|i - j| >= 2`.
pub fn is_tridiagonal(m: &RatMatrix) -> bool {
    let n = m.order();
    (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) < 2 || m.get(i, j).is_zero()))
}

/// Closed-form principal minor of an arrowhead matrix whose diagonal entries
/// `1..n` are all nonzero:
/// `prod_{i in S\0} A_ii * (A_00 - sum_{i in S\0} A_0i A_i0 / A_ii)` when
/// `0 in S`, and the plain diagonal product otherwise.
pub fn arrowhead_det(m: &RatMatrix, subset: &IndexSet) -> Result<Rat> {
    subset.check_bound(m.order())?;
    if !is_arrowhead(m) {
        return Err(Error::Invalid("matrix is not arrowhead".into()));
    }
    if let Some(i) = (1..m.order()).find(|&i| m.get(i, i).is_zero()) {
        return Err(Error::Invalid(format!(
            "arrowhead diagonal entry {i} is zero"
        )));
    }
    let rest: Vec<usize> = subset.iter().filter(|&i| i != 0).collect();
    let product: Rat = rest.iter().map(|&i| m.get(i, i).clone()).product();
    if !subset.contains(0) {
        return Ok(product);
    }
    let correction: Rat = rest
        .iter()
        .map(|&i| m.get(0, i) * m.get(i, 0) / m.get(i, i))
        .sum();
    Ok(product * (m.get(0, 0) - &correction))
}

/// Closed-form arrowhead determinant where it applies, generic determinant otherwise.
pub fn arrowhead_or_generic_det(m: &RatMatrix, subset: &IndexSet) -> Result<Rat> {
    match arrowhead_det(m, subset) {
        Ok(v) => Ok(v),
        Err(Error::Invalid(_)) => principal_minor(m, subset),
        Err(e) => Err(e),
    }
}
