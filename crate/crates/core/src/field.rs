//! Base fields and their scalars.
//!
//! A presentation fixes its field at parse time, so scalars carry their
//! kind at runtime instead of through a type parameter. Mixing scalars of
//! different fields is an internal invariant violation and panics; the
//! public entry points validate fields before any arithmetic happens.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Pivot tolerance used whenever floating scalars are compared against zero
/// inside exact-style algorithms (elimination, spans).
pub const REAL_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    /// Exact rationals, never rounded.
    Rational,
    /// Integers modulo a prime below 2^31.
    Prime(u32),
    /// Double precision reals, admitted for numeric charts.
    Real,
}

impl Field {
    pub fn prime(p: u64) -> Result<Field> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(Error::NonPrimeModulus(p));
        }
        Ok(Field::Prime(p as u32))
    }

    pub fn zero(self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, n: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
            Field::Prime(p) => Scalar::Mod {
                value: n.rem_euclid(p as i64) as u32,
                modulus: p,
            },
            Field::Real => Scalar::Real(n as f64),
        }
    }

    /// Builds `num / den`; `None` when the denominator vanishes in the field.
    pub fn fraction(self, num: &BigInt, den: &BigInt) -> Option<Scalar> {
        match self {
            Field::Rational => {
                if den.is_zero() {
                    None
                } else {
                    Some(Scalar::Rat(BigRational::new(num.clone(), den.clone())))
                }
            }
            Field::Prime(p) => {
                let reduce = |n: &BigInt| {
                    let r = n % BigInt::from(p);
                    let r = if r.is_negative() { r + BigInt::from(p) } else { r };
                    r.to_u32().expect("residue fits in u32")
                };
                let d = Scalar::Mod { value: reduce(den), modulus: p };
                let n = Scalar::Mod { value: reduce(num), modulus: p };
                d.inv().map(|d| n * d)
            }
            Field::Real => {
                let d = den.to_f64()?;
                if d == 0.0 {
                    None
                } else {
                    Some(Scalar::Real(num.to_f64()? / d))
                }
            }
        }
    }

    /// Ordered fields admit positivity statements (metrics, definiteness).
    pub fn is_ordered(self) -> bool {
        !matches!(self, Field::Prime(_))
    }

    pub fn is_exact(self) -> bool {
        !matches!(self, Field::Real)
    }

    pub fn contains(self, s: &Scalar) -> bool {
        s.field() == self
    }

    pub fn name(self) -> String {
        match self {
            Field::Rational => "Q".to_string(),
            Field::Prime(p) => format!("F{p}"),
            Field::Real => "R".to_string(),
        }
    }

    /// Parses an unsigned literal: integer, `a/b`, or (reals only) a decimal.
    pub fn parse_scalar(self, text: &str) -> Option<Scalar> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix('-') {
            return self.parse_scalar(rest).map(|s| -s);
        }
        if let Some((n, d)) = text.split_once('/') {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            return self.fraction(&n, &d);
        }
        if let Ok(n) = text.parse::<BigInt>() {
            return self.fraction(&n, &BigInt::one());
        }
        match self {
            Field::Real => text.parse::<f64>().ok().filter(|x| x.is_finite()).map(Scalar::Real),
            Field::Rational => parse_decimal(text).map(Scalar::Rat),
            Field::Prime(_) => None,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let (int, frac) = text.split_once('.')?;
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(digits, scale))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Rat(BigRational),
    Mod { value: u32, modulus: u32 },
    Real(f64),
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rat(_) => Field::Rational,
            Scalar::Mod { modulus, .. } => Field::Prime(*modulus),
            Scalar::Real(_) => Field::Real,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Mod { value, .. } => *value == 0,
            Scalar::Real(x) => *x == 0.0,
        }
    }

    /// Zero test with the float tolerance applied to reals.
    pub fn is_negligible(&self) -> bool {
        match self {
            Scalar::Real(x) => x.abs() <= REAL_EPS,
            other => other.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Mod { value, .. } => *value == 1,
            Scalar::Real(x) => *x == 1.0,
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Rat(r) => Scalar::Rat(r.recip()),
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: pow_mod(*value as u64, *modulus as u64 - 2, *modulus as u64) as u32,
                modulus: *modulus,
            },
            Scalar::Real(x) => Scalar::Real(1.0 / x),
        })
    }

    pub fn pow(&self, mut e: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Sign in an ordered field; `None` for prime fields.
    pub fn signum(&self) -> Option<Ordering> {
        match self {
            Scalar::Rat(r) => Some(r.cmp(&BigRational::zero())),
            Scalar::Real(x) => x.partial_cmp(&0.0),
            Scalar::Mod { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Mod { value, .. } => *value as f64,
            Scalar::Real(x) => *x,
        }
    }

    /// Square root within the field, when one exists. Over Q only exact
    /// rational roots are returned; prime fields are not searched.
    pub fn sqrt(&self) -> Option<Scalar> {
        match self {
            Scalar::Rat(r) => {
                if r.is_negative() {
                    return None;
                }
                let (n, d) = (r.numer(), r.denom());
                let (sn, sd) = (n.sqrt(), d.sqrt());
                (&sn * &sn == *n && &sd * &sd == *d).then(|| Scalar::Rat(BigRational::new(sn, sd)))
            }
            Scalar::Real(x) => (*x >= 0.0).then(|| Scalar::Real(x.sqrt())),
            Scalar::Mod { .. } => None,
        }
    }

    pub fn as_mod(&self) -> Option<u32> {
        match self {
            Scalar::Mod { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// Splits off a sign for printing: F_p residues above p/2 print as negatives.
    pub fn split_sign(&self) -> (bool, Scalar) {
        match self {
            Scalar::Rat(r) if r.is_negative() => (true, Scalar::Rat(-r.clone())),
            Scalar::Real(x) if *x < 0.0 => (true, Scalar::Real(-x)),
            Scalar::Mod { value, modulus } if *value > modulus / 2 => (
                true,
                Scalar::Mod { value: modulus - value, modulus: *modulus },
            ),
            other => (false, other.clone()),
        }
    }

    fn same_field(&self, other: &Scalar) {
        assert_eq!(
            self.field(),
            other.field(),
            "scalar arithmetic across different fields"
        );
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::Mod { value, .. } => write!(f, "{value}"),
            Scalar::Real(x) => write!(f, "{x:?}"),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a == b,
            (Scalar::Mod { value: a, modulus: p }, Scalar::Mod { value: b, modulus: q }) => {
                a == b && p == q
            }
            (Scalar::Real(a), Scalar::Real(b)) => a == b,
            _ => false,
        }
    }
}

// Scalars never hold NaN: every constructor path rejects non-finite input.
impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order used for sorting point sets: by value within a field.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            (Scalar::Mod { value: a, .. }, Scalar::Mod { value: b, .. }) => a.cmp(b),
            (Scalar::Real(a), Scalar::Real(b)) => a.total_cmp(b),
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }
}

fn rank(s: &Scalar) -> u8 {
    match s {
        Scalar::Rat(_) => 0,
        Scalar::Mod { .. } => 1,
        Scalar::Real(_) => 2,
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        self.same_field(rhs);
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Mod { value: a, modulus }, Scalar::Mod { value: b, .. }) => Scalar::Mod {
                value: ((*a as u64 + *b as u64) % *modulus as u64) as u32,
                modulus: *modulus,
            },
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::Real(a + b),
            _ => unreachable!(),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'a Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        self.same_field(rhs);
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Mod { value: a, modulus }, Scalar::Mod { value: b, .. }) => Scalar::Mod {
                value: ((*a as u64 * *b as u64) % *modulus as u64) as u32,
                modulus: *modulus,
            },
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::Real(a * b),
            _ => unreachable!(),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
            Scalar::Real(a) => Scalar::Real(-a),
        }
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}
