//! Arbitrary-precision rationals in canonical form, plus certified
//! relative approximations of `exp` and `sqrt`.
//!
//! [`Rat`] wraps [`num_rational::BigRational`], which reduces after every
//! operation, so `gcd(|p|, q) = 1` and `q >= 1` always hold. The string form
//! `"p/q"` (or `"p"` when `q = 1`) is the only encoding used by the file
//! formats.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational scalar.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int<T: Into<BigInt>>(value: T) -> Self {
        Rat(BigRational::from_integer(value.into()))
    }

    /// `numer / denom`; fails on a zero denominator.
    pub fn new<N: Into<BigInt>, D: Into<BigInt>>(numer: N, denom: D) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Rat(BigRational::new(numer.into(), denom)))
    }

    /// Infallible constructor for literals; panics on a zero denominator.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Rat::new(numer, denom).expect("nonzero denominator")
    }

    pub fn from_big(value: BigRational) -> Self {
        Rat(value)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("reciprocal of zero".into()));
        }
        Ok(Rat(self.0.recip()))
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rat(self.0.pow(exp))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Combined bit length of numerator and denominator.
    pub fn bits(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }

    /// Lossy conversion, for display only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact square root if both numerator and denominator are perfect squares.
    pub fn exact_sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let p = self.numer().magnitude();
        let q = self.denom().magnitude();
        let rp = p.sqrt();
        let rq = q.sqrt();
        if &(&rp * &rp) == p && &(&rq * &rq) == q {
            Some(Rat(BigRational::new(
                BigInt::from_biguint(Sign::Plus, rp),
                BigInt::from_biguint(Sign::Plus, rq),
            )))
        } else {
            None
        }
    }

    /// Replace a positive value by a nearby dyadic rational whose relative
    /// distance from `self` is at most `rel`. Keeps operand sizes bounded in
    /// long approximation chains.
    pub fn compact(&self, rel: &Rat) -> Rat {
        if !self.is_positive() || !rel.is_positive() {
            return self.clone();
        }
        // Want 2^-m <= rel * self.
        let target = rel * self;
        let mut m: u64 = 0;
        let mut step = Rat::one();
        // Coarse jump using bit lengths, then refine.
        let approx_bits = target.denom().bits() as i64 - target.numer().bits() as i64;
        if approx_bits > 1 {
            m = (approx_bits - 1) as u64;
            step = Rat(BigRational::new(BigInt::one(), BigInt::one() << m));
        }
        while step > target {
            m += 1;
            step = Rat(BigRational::new(BigInt::one(), BigInt::one() << m));
        }
        let scale = BigInt::one() << m;
        let scaled = (&self.0 * BigRational::from_integer(scale.clone())).floor().to_integer();
        let candidate = Rat(BigRational::new(scaled, scale));
        if candidate.bits() < self.bits() {
            candidate
        } else {
            self.clone()
        }
    }
}

/// Certified `(1 ± eps)` approximation of `e^x` for `x` in `[0, 1]`.
///
/// Taylor partial sums are accumulated until the current term is at most
/// `eps/4` of the running sum (and at least four terms were taken). Because
/// `x <= 1`, the omitted tail is at most twice the last term, so the sum lies
/// in `[(1 - eps/2) e^x, e^x]`. The result is then compacted by at most
/// `eps/4` relative.
pub fn approx_exp(x: &Rat, eps: &Rat) -> Result<Rat> {
    if x.is_negative() || *x > Rat::one() {
        return Err(Error::Domain(format!("approx_exp needs 0 <= x <= 1, got {x}")));
    }
    check_eps(eps)?;
    if x.is_zero() {
        return Ok(Rat::one());
    }
    let quarter = eps / &Rat::from_int(4);
    let mut sum = Rat::one();
    let mut term = Rat::one();
    let mut m: u32 = 0;
    loop {
        m += 1;
        term = &term * x / Rat::from_int(m);
        sum += &term;
        if m >= 4 && term <= &quarter * &sum {
            break;
        }
    }
    Ok(sum.compact(&quarter))
}

/// Certified `(1 ± eps)` approximation of `sqrt(x)` for `x > 0`.
///
/// Returns the exact root when one exists. Otherwise bisects the bracket
/// `[min(x,1), max(x,1)]`, keeping `lo^2 <= x <= hi^2`, until
/// `hi - lo <= (eps/2) lo`, then compacts the midpoint by at most `eps/4`.
pub fn approx_sqrt(x: &Rat, eps: &Rat) -> Result<Rat> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("approx_sqrt needs x > 0, got {x}")));
    }
    check_eps(eps)?;
    if let Some(root) = x.exact_sqrt() {
        return Ok(root);
    }
    // Bisection points are A + (B - A) j / 2^s with A = min(x, 1) and
    // B = max(x, 1). Writing x = p/q they equal N / (q 2^s) with
    // N = min(p, q) 2^s + |p - q| j, so the test mid^2 <= x becomes the
    // integer comparison N^2 <= p q 4^s.
    let p = x.numer().clone();
    let q = x.denom().clone();
    let base = (&p).min(&q).clone();
    let width = (&p - &q).abs();
    let pq = &p * &q;
    let (eps_n, eps_d) = (eps.numer(), eps.denom());
    let stop = &width * eps_d * BigInt::from(2);
    let mut s: u64 = 0;
    let mut lo_n = base.clone();
    while stop > eps_n * &lo_n {
        s += 1;
        let cand = &lo_n * BigInt::from(2) + &width;
        if &cand * &cand <= &pq << (2 * s) {
            lo_n = cand;
        } else {
            lo_n <<= 1;
        }
    }
    let mid = Rat(BigRational::new(
        &lo_n * BigInt::from(2) + &width,
        q << (s + 1),
    ));
    Ok(mid.compact(&(eps / &Rat::from_int(4))))
}

fn check_eps(eps: &Rat) -> Result<()> {
    if !eps.is_positive() || *eps >= Rat::one() {
        return Err(Error::Domain(format!("precision must lie in (0,1), got {eps}")));
    }
    Ok(())
}

/// Interval `[lo, hi]` guaranteed to contain `e^x`, derived from a
/// `(1 ± eps)` approximation.
pub fn exp_enclosure(x: &Rat, eps: &Rat) -> Result<(Rat, Rat)> {
    let r = approx_exp(x, eps)?;
    let one = Rat::one();
    Ok((&r / &(&one + eps), &r / &(&one - eps)))
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Format(format!("malformed rational {s:?}"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                Rat::new(p, q)
            }
            None => Ok(Rat::from_int(s.parse::<BigInt>().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        // Accept both "p/q" strings and bare JSON integers.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Int(i64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(v) => Ok(Rat::from_int(v)),
        }
    }
}

impl From<i64> for Rat {
    fn from(v: i64) -> Self {
        Rat::from_int(v)
    }
}

impl From<BigInt> for Rat {
    fn from(v: BigInt) -> Self {
        Rat::from_int(v)
    }
}

impl From<BigUint> for Rat {
    fn from(v: BigUint) -> Self {
        Rat::from_int(BigInt::from_biguint(Sign::Plus, v))
    }
}

impl PartialEq<i64> for Rat {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && *self.0.numer() == BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rat {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Rat::from_int(*other)))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident) => {
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat($tr::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($tr::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                Rat($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $assign_tr<Rat> for Rat {
            fn $assign(&mut self, rhs: Rat) {
                $assign_tr::$assign(&mut self.0, rhs.0);
            }
        }
        impl<'a> $assign_tr<&'a Rat> for Rat {
            fn $assign(&mut self, rhs: &'a Rat) {
                $assign_tr::$assign(&mut self.0, &rhs.0);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);
// Division by zero panics, as for the underlying BigRational.
forward_binop!(Div, div, DivAssign, div_assign);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl<'a> Neg for &'a Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |acc, x| acc * x)
    }
}

impl<'a> Product<&'a Rat> for Rat {
    fn product<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |acc, x| acc * x)
    }
}

/// Least common multiple of the denominators of `values`.
pub fn denominator_lcm<'a, I: IntoIterator<Item = &'a Rat>>(values: I) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
