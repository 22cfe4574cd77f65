//! Exact elements `p + q√d` of a real quadratic field.
//!
//! Rational scalars carry no field tag (`d = 0` internally) and combine with
//! scalars of any field. Combining two irrational scalars from different
//! fields is a programming error and panics: a computation works inside one
//! field `Q(√d)` throughout.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadraticScalar {
    p: BigRational,
    q: BigRational,
    // 0 when q == 0
    d: u32,
}

pub fn is_squarefree(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut f = 2u32;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f * f) {
            return false;
        }
        if n.is_multiple_of(f) {
            n /= f;
        }
        f += 1;
    }
    true
}

fn join_field(a: u32, b: u32) -> u32 {
    match (a, b) {
        (0, x) | (x, 0) => x,
        (x, y) if x == y => x,
        (x, y) => panic!("mixed quadratic fields Q(√{x}) and Q(√{y})"),
    }
}

/// Parses `"7"`, `"-3/2"` or a finite decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let t = s.trim();
    let bad = || Error::Parse(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !int_digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_digits}{frac}");
        let mut n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
        if negative {
            n = -n;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(n, den));
    }
    BigInt::from_str(t).map(BigRational::from_integer).map_err(|_| bad())
}

impl QuadraticScalar {
    pub fn new(p: BigRational, q: BigRational, d: u32) -> Result<Self, Error> {
        if q.is_zero() {
            return Ok(Self::from_rational(p));
        }
        if !is_squarefree(d) {
            return Err(Error::BadField(d));
        }
        Ok(Self { p, q, d })
    }

    pub fn from_rational(p: BigRational) -> Self {
        Self { p, q: BigRational::zero(), d: 0 }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    /// `a + b√d` with integer coefficients.
    pub fn quadratic(a: i64, b: i64, d: u32) -> Result<Self, Error> {
        Self::new(BigRational::from_integer(a.into()), BigRational::from_integer(b.into()), d)
    }

    pub fn sqrt(d: u32) -> Result<Self, Error> {
        Self::quadratic(0, 1, d)
    }

    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.p
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.q
    }

    /// The field parameter `d`, or `None` for a rational scalar.
    pub fn field(&self) -> Option<u32> {
        (self.d != 0).then_some(self.d)
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.p)
    }

    /// Exact sign of the real number `p + q√d`.
    ///
    /// When `p` and `q` have opposite signs the larger of `p²` and `d·q²`
    /// decides.
    pub fn signum(&self) -> i8 {
        let sp = sign_of(&self.p);
        let sq = sign_of(&self.q);
        if sq == 0 {
            return sp;
        }
        if sp == 0 || sp == sq {
            return sq;
        }
        let p2 = &self.p * &self.p;
        let dq2 = &self.q * &self.q * BigRational::from_integer(self.d.into());
        match p2.cmp(&dq2) {
            Ordering::Greater => sp,
            Ordering::Less => sq,
            Ordering::Equal => 0,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Galois conjugation `p + q√d ↦ p − q√d`.
    pub fn conjugate(&self) -> Self {
        Self { p: self.p.clone(), q: -&self.q, d: self.d }
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.p * &self.p - &self.q * &self.q * BigRational::from_integer(self.d.into());
        Some(Self::normalized(&self.p / &norm, -&self.q / &norm, self.d))
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.p.to_f64().unwrap_or(f64::NAN);
        if self.q.is_zero() {
            return p;
        }
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        p + q * f64::from(self.d).sqrt()
    }

    /// Largest integer not exceeding the value, decided exactly.
    pub fn floor(&self) -> BigInt {
        let fp = self.p.floor().to_integer();
        if self.q.is_zero() {
            return fp;
        }
        // t = q√d, t² = d q²
        let t2 = &self.q * &self.q * BigRational::from_integer(self.d.into());
        let root = t2.floor().to_integer().sqrt();
        let ft = if self.q.is_positive() {
            root
        } else {
            let exact = BigRational::from_integer(&root * &root) == t2;
            if exact {
                -root
            } else {
                -root - BigInt::one()
            }
        };
        let mut n = fp + ft;
        loop {
            let next = Self::from_rational(BigRational::from_integer(&n + BigInt::one()));
            if next <= *self {
                n += BigInt::one();
            } else {
                break;
            }
        }
        n
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    fn normalized(p: BigRational, q: BigRational, d: u32) -> Self {
        if q.is_zero() {
            Self::from_rational(p)
        } else {
            Self { p, q, d }
        }
    }
}

fn sign_of(r: &BigRational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

impl PartialOrd for QuadraticScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.q.is_zero() && other.q.is_zero() {
            return self.p.cmp(&other.p);
        }
        (self - other).signum().cmp(&0)
    }
}

impl<'a> Add<&'a QuadraticScalar> for &QuadraticScalar {
    type Output = QuadraticScalar;
    fn add(self, rhs: &'a QuadraticScalar) -> QuadraticScalar {
        if self.d == 0 && rhs.d == 0 {
            return QuadraticScalar::from_rational(&self.p + &rhs.p);
        }
        let d = join_field(self.d, rhs.d);
        QuadraticScalar::normalized(&self.p + &rhs.p, &self.q + &rhs.q, d)
    }
}

impl<'a> Sub<&'a QuadraticScalar> for &QuadraticScalar {
    type Output = QuadraticScalar;
    fn sub(self, rhs: &'a QuadraticScalar) -> QuadraticScalar {
        if self.d == 0 && rhs.d == 0 {
            return QuadraticScalar::from_rational(&self.p - &rhs.p);
        }
        let d = join_field(self.d, rhs.d);
        QuadraticScalar::normalized(&self.p - &rhs.p, &self.q - &rhs.q, d)
    }
}

impl<'a> Mul<&'a QuadraticScalar> for &QuadraticScalar {
    type Output = QuadraticScalar;
    fn mul(self, rhs: &'a QuadraticScalar) -> QuadraticScalar {
        if self.q.is_zero() && rhs.q.is_zero() {
            return QuadraticScalar::from_rational(&self.p * &rhs.p);
        }
        let d = join_field(self.d, rhs.d);
        let dd = BigRational::from_integer(d.into());
        let p = &self.p * &rhs.p + &self.q * &rhs.q * dd;
        let q = &self.p * &rhs.q + &self.q * &rhs.p;
        QuadraticScalar::normalized(p, q, d)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<'a> Div<&'a QuadraticScalar> for &QuadraticScalar {
    type Output = QuadraticScalar;
    fn div(self, rhs: &'a QuadraticScalar) -> QuadraticScalar {
        let inv = rhs.recip().expect("division by zero scalar");
        self * &inv
    }
}

impl Neg for &QuadraticScalar {
    type Output = QuadraticScalar;
    fn neg(self) -> QuadraticScalar {
        QuadraticScalar { p: -&self.p, q: -&self.q, d: self.d }
    }
}

impl Neg for QuadraticScalar {
    type Output = QuadraticScalar;
    fn neg(self) -> QuadraticScalar {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<QuadraticScalar> for QuadraticScalar {
            type Output = QuadraticScalar;
            fn $m(self, rhs: QuadraticScalar) -> QuadraticScalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a QuadraticScalar> for QuadraticScalar {
            type Output = QuadraticScalar;
            fn $m(self, rhs: &'a QuadraticScalar) -> QuadraticScalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<QuadraticScalar> for &QuadraticScalar {
            type Output = QuadraticScalar;
            fn $m(self, rhs: QuadraticScalar) -> QuadraticScalar {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl From<i64> for QuadraticScalar {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigRational> for QuadraticScalar {
    fn from(r: BigRational) -> Self {
        Self::from_rational(r)
    }
}

impl fmt::Display for QuadraticScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            return write!(f, "{}", self.p);
        }
        if !self.p.is_zero() {
            write!(f, "{}", self.p)?;
            f.write_str(if self.q.is_negative() { "-" } else { "+" })?;
        } else if self.q.is_negative() {
            f.write_str("-")?;
        }
        let aq = self.q.abs();
        if aq.is_one() {
            write!(f, "√{}", self.d)
        } else {
            write!(f, "{}√{}", aq, self.d)
        }
    }
}

impl fmt::Debug for QuadraticScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Serialized as the exact pair `["p", "q"]`.
impl Serialize for QuadraticScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.p.to_string(), self.q.to_string()].serialize(s)
    }
}
