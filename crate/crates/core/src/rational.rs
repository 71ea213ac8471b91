//! Exact rational arithmetic for spectral computations.
//!
//! [`Rational`] is an arbitrary-precision signed fraction kept in reduced
//! form. [`RationalSet`] holds the finite, nonzero, deduplicated sets over
//! which least common multiples are taken: the inverse energy spacings that
//! determine the period of a cyclic state.
//!
//! Floating point values enter the exact engine only through [`rationalize`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RationalError {
    /// No spacings: the state is stationary.
    #[error("empty spacing set")]
    EmptySpacingSet,
    #[error("incommensurable input: {value} has no convergent with denominator <= {max_denominator} within {tolerance:e}")]
    Incommensurable {
        value: f64,
        max_denominator: u64,
        tolerance: f64,
    },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("rational sets may not contain zero")]
    ZeroElement,
    #[error("invalid rationalization parameters: {0}")]
    InvalidParameters(String),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// An exact rational number in canonical reduced form.
///
/// The denominator is always positive and coprime with the numerator; zero is
/// stored as `0/1`. Equality and hashing are therefore structural.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, RationalError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    /// Shorthand for small literals. Panics if `denom == 0`.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("zero denominator")
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Integer value, if this rational is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.0.to_integer())
    }

    pub fn to_f64(&self) -> f64 {
        // BigRational::to_f64 handles huge numerators/denominators without overflow.
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Reduce `self` into the half-open interval `(-m, m]` modulo `2m`.
    ///
    /// Used for canonical phase branches: with `m = 1` a phase in units of pi
    /// lands in `(-1, 1]`. Returns the reduced value and the integer `k` with
    /// `self = reduced + 2 m k`.
    pub fn reduce_symmetric(&self, m: &Rational) -> (Rational, BigInt) {
        let period = m * &Rational::from_integer(2);
        // k = ceil((self - m) / 2m)
        let shifted = &(self - m) / &period;
        let k = -(-&shifted).floor();
        let reduced = self - &(&period * &Rational::from_integer(k.clone()));
        (reduced, k)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(value: BigRational) -> Self {
        Rational(value)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rational({self})")
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Parses the canonical text form `p/q` or `p`. Non-canonical input such as
    /// `2/4` or `3/-6` is accepted and reduced.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_int = |t: &str| {
            let t = t.trim();
            let t = t.strip_prefix('+').unwrap_or(t);
            BigInt::from_str(t).map_err(|_| RationalError::Parse(s.to_string()))
        };
        match s.split_once('/') {
            Some((p, q)) => {
                let q = parse_int(q)?;
                if q.is_zero() {
                    return Err(RationalError::ZeroDenominator);
                }
                Rational::new(parse_int(p)?, q)
            }
            None => Ok(Rational::from_integer(parse_int(s)?)),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&Rational> for &Rational {
    type Output = Rational;
    /// Panics on division by zero, like integer division.
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Div<Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// A finite set of nonzero rationals, deduplicated, in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalSet {
    elements: Vec<Rational>,
}

impl RationalSet {
    pub fn new<I>(items: I) -> Result<Self, RationalError>
    where
        I: IntoIterator<Item = Rational>,
    {
        let mut set = RationalSet::default();
        for x in items {
            set.insert(x)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, x: Rational) -> Result<bool, RationalError> {
        if x.is_zero() {
            return Err(RationalError::ZeroElement);
        }
        if self.elements.contains(&x) {
            return Ok(false);
        }
        self.elements.push(x);
        Ok(true)
    }

    pub fn elements(&self) -> &[Rational] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.elements.iter()
    }
}

impl<'a> IntoIterator for &'a RationalSet {
    type Item = &'a Rational;
    type IntoIter = std::slice::Iter<'a, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

/// Least common multiple of a set of rationals.
///
/// The result is the smallest positive `L` such that `L / |x|` is a positive
/// integer for every `x` in the set. On reduced forms `|x| = a/b` this is
/// `lcm(a) / gcd(b)`. Signs are ignored.
pub fn lcm_rationals(set: &RationalSet) -> Result<Rational, RationalError> {
    let mut iter = set.iter();
    let first = iter.next().ok_or(RationalError::EmptySpacingSet)?;
    let mut numer_lcm = first.numer().abs();
    let mut denom_gcd = first.denom().clone();
    for x in iter {
        numer_lcm = numer_lcm.lcm(&x.numer().abs());
        denom_gcd = denom_gcd.gcd(x.denom());
    }
    Rational::new(numer_lcm, denom_gcd)
}

/// Every pair of rationals is commensurable, so this is always `true`.
///
/// Incommensurability of physical inputs is detected earlier, when a real
/// value fails to [`rationalize`]; a `RationalSet` can only be built from
/// values that already passed that gate.
pub fn are_commensurable(_set: &RationalSet) -> bool {
    true
}

/// Convert a real number to the first continued-fraction convergent `p/q`
/// with `q <= max_denominator` and `|x - p/q| <= tolerance`.
///
/// The expansion runs on the exact binary value of `x`, so a float that is the
/// correctly rounded image of a small fraction recovers that fraction even
/// with `tolerance == 0`.
pub fn rationalize(x: f64, max_denominator: u64, tolerance: f64) -> Result<Rational, RationalError> {
    if max_denominator == 0 {
        return Err(RationalError::InvalidParameters("max_denominator must be >= 1".into()));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(RationalError::InvalidParameters("tolerance must be >= 0".into()));
    }
    let incommensurable = || RationalError::Incommensurable {
        value: x,
        max_denominator,
        tolerance,
    };
    let exact = BigRational::from_float(x).ok_or_else(incommensurable)?;
    let max_q = BigInt::from(max_denominator);

    // Convergent recurrences h_n = a_n h_{n-1} + h_{n-2}, k_n likewise.
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut rest = exact;
    loop {
        let a = rest.floor().to_integer();
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        if k_next > max_q {
            return Err(incommensurable());
        }
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);

        let candidate = Rational(BigRational::new(h.clone(), k.clone()));
        if (candidate.to_f64() - x).abs() <= tolerance {
            return Ok(candidate);
        }
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return Err(incommensurable());
        }
        rest = frac.recip();
    }
}
