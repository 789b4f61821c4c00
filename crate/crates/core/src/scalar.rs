//! Exact arithmetic in `Q` and in real quadratic fields `Q(sqrt(d))`.
//!
//! A [`QuadScalar`] is `a + b*sqrt(d)` with `a`, `b` arbitrary-precision
//! rationals. Rationals embed in every field, so a value with `b == 0` can be
//! combined with scalars of any `d`; two genuinely irrational operands must
//! share the same `d`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"p"`, `"-p"` or `"p/q"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let s = s.strip_prefix('+').unwrap_or(s);
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(Rational::new(num, den))
}

/// `"p/q"` or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_from_i64(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn is_squarefree(d: u64) -> bool {
    if d == 0 {
        return true;
    }
    let mut m = d;
    let mut f = 2u64;
    while f * f <= m {
        if m.is_multiple_of(f) {
            m /= f;
            if m.is_multiple_of(f) {
                return false;
            }
        }
        f += 1;
    }
    true
}

/// `a + b*sqrt(d)`, kept normalized: when `d` is 0 or 1 the value is folded
/// into `a` and `d` is reset to 0.
#[derive(Clone, Debug)]
pub struct QuadScalar {
    a: Rational,
    b: Rational,
    d: u64,
}

impl PartialEq for QuadScalar {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && (self.b.is_zero() || self.d == other.d)
    }
}

impl Eq for QuadScalar {}

impl QuadScalar {
    pub fn new(a: Rational, b: Rational, d: u64) -> Result<Self> {
        if !is_squarefree(d) {
            return Err(Error::NotSquarefree(d));
        }
        Ok(Self::normalized(a, b, d))
    }

    fn normalized(a: Rational, b: Rational, d: u64) -> Self {
        match d {
            0 => QuadScalar {
                a,
                b: Rational::zero(),
                d: 0,
            },
            1 => QuadScalar {
                a: a + b,
                b: Rational::zero(),
                d: 0,
            },
            _ => QuadScalar { a, b, d },
        }
    }

    pub fn from_rational(a: Rational) -> Self {
        QuadScalar {
            a,
            b: Rational::zero(),
            d: 0,
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_rational(rational_from_i64(v))
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    /// `sqrt(d)` itself.
    pub fn sqrt(d: u64) -> Result<Self> {
        Self::new(Rational::zero(), Rational::one(), d)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    /// Radicand; 0 for values built without a field context.
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    /// The field this value actually needs: `None` for rationals.
    pub fn field(&self) -> Option<u64> {
        (!self.is_rational()).then_some(self.d)
    }

    fn common_d(&self, other: &Self) -> Result<u64> {
        match (self.field(), other.field()) {
            (Some(x), Some(y)) if x != y => Err(Error::FieldMismatch(x, y)),
            (Some(x), _) | (_, Some(x)) => Ok(x),
            (None, None) => Ok(self.d.max(other.d)),
        }
    }

    pub fn conj(&self) -> Self {
        QuadScalar {
            a: self.a.clone(),
            b: -&self.b,
            d: self.d,
        }
    }

    /// Field norm `a^2 - d*b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(BigInt::from(self.d))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        Ok(Self::normalized(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        Ok(Self::normalized(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        if self.b.is_zero() {
            return Ok(Self::normalized(
                &self.a * &other.a,
                &self.a * &other.b,
                d,
            ));
        }
        if other.b.is_zero() {
            return Ok(Self::normalized(
                &self.a * &other.a,
                &self.b * &other.a,
                d,
            ));
        }
        let dd = Rational::from_integer(BigInt::from(d));
        let a = &self.a * &other.a + &self.b * &other.b * dd;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::normalized(a, b, d))
    }

    pub fn checked_recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.b.is_zero() {
            return Ok(Self::normalized(self.a.recip(), Rational::zero(), self.d));
        }
        // d is squarefree and > 1 here, so the norm of a nonzero value is nonzero.
        let n = self.norm();
        Ok(Self::normalized(&self.a / &n, -&self.b / &n, self.d))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.common_d(other)?;
        self.checked_mul(&other.checked_recip()?)
    }

    /// Exact sign, decided by comparing `a^2` with `d*b^2`.
    pub fn sign(&self) -> i8 {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        if sb == 0 || self.d == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let aa = &self.a * &self.a;
        let bbd = &self.b * &self.b * Rational::from_integer(BigInt::from(self.d));
        match aa.cmp(&bbd) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn abs(&self) -> Self {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact comparison of values.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        Ok(match self.checked_sub(other)?.sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }

    /// A rational within relative error `2^-bits` of the value.
    pub fn approx(&self, bits: u32) -> Rational {
        if self.b.is_zero() {
            return self.a.clone();
        }
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        if sa == 0 || sa == sb {
            &self.a + &self.b * sqrt_approx(self.d, bits)
        } else {
            // a + b*sqrt(d) = (a^2 - d*b^2) / (a - b*sqrt(d)), and the
            // denominator has no cancellation.
            let den = &self.a - &self.b * sqrt_approx(self.d, bits);
            self.norm() / den
        }
    }

    /// Rounded approximation. `precision_bits` controls the working precision
    /// of the radical; the result is an `f64`, so at most 53 bits survive.
    pub fn to_float(&self, precision_bits: u32) -> f64 {
        let bits = precision_bits.max(53) + 32;
        rational_to_f64(&self.approx(bits))
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(53)
    }
}

fn rational_sign(r: &Rational) -> i8 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// `floor(sqrt(d) * 2^bits) / 2^bits`, relative error below `2^-bits`.
fn sqrt_approx(d: u64, bits: u32) -> Rational {
    let scale = BigInt::one() << (2 * bits as usize);
    let root = (BigInt::from(d) * scale).sqrt();
    Rational::new(root, BigInt::one() << bits as usize)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
}

/// Dispatches one field operation; `Neg` ignores `y`.
pub fn arith(op: ArithOp, x: &QuadScalar, y: &QuadScalar) -> Result<QuadScalar> {
    match op {
        ArithOp::Add => x.checked_add(y),
        ArithOp::Sub => x.checked_sub(y),
        ArithOp::Mul => x.checked_mul(y),
        ArithOp::Div => x.checked_div(y),
        ArithOp::Neg => Ok(-x),
    }
}

impl Neg for &QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        QuadScalar {
            a: -&self.a,
            b: -&self.b,
            d: self.d,
        }
    }
}

impl Neg for QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        -&self
    }
}

// Operator forms panic on mismatched fields or division by zero; the
// `checked_*` methods are the fallible API.
macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&QuadScalar> for &QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: &QuadScalar) -> QuadScalar {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{}", e),
                }
            }
        }
        impl $tr<QuadScalar> for QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: QuadScalar) -> QuadScalar {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&QuadScalar> for QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: &QuadScalar) -> QuadScalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl From<Rational> for QuadScalar {
    fn from(r: Rational) -> Self {
        QuadScalar::from_rational(r)
    }
}

impl From<i64> for QuadScalar {
    fn from(v: i64) -> Self {
        QuadScalar::from_i64(v)
    }
}

impl fmt::Display for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&format_rational(&self.a));
        }
        if !self.a.is_zero() {
            write!(f, "{}", format_rational(&self.a))?;
            if self.b.is_positive() {
                f.write_str("+")?;
            }
        }
        if self.b == -Rational::one() {
            f.write_str("-")?;
        } else if !self.b.is_one() {
            write!(f, "{}*", format_rational(&self.b))?;
        }
        write!(f, "sqrt({})", self.d)
    }
}

impl FromStr for QuadScalar {
    type Err = Error;

    /// Accepts `p/q`, `p/q+r/s*sqrt(d)`, `sqrt(d)`, `-sqrt(d)`, `1-sqrt(2)`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(idx) = s.find("sqrt(") else {
            return Ok(QuadScalar::from_rational(parse_rational(&s)?));
        };
        let bad = || Error::Parse(format!("not a quadratic scalar: {s:?}"));
        let prefix = &s[..idx];
        let rest = &s[idx + 5..];
        let close = rest.find(')').ok_or_else(bad)?;
        let d: u64 = rest[..close].parse().map_err(|_| bad())?;
        let suffix = &rest[close + 1..];

        let split = prefix
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
            .map(|(i, _)| i)
            .next_back();
        let (a_str, coef_str) = match split {
            Some(i) => (&prefix[..i], &prefix[i..]),
            None => ("", prefix),
        };
        let coef_str = coef_str.strip_suffix('*').unwrap_or(coef_str);
        let b = match coef_str {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            c => parse_rational(c)?,
        };
        let mut a = if a_str.is_empty() {
            Rational::zero()
        } else {
            parse_rational(a_str)?
        };
        if !suffix.is_empty() {
            if !a_str.is_empty() || !(suffix.starts_with('+') || suffix.starts_with('-')) {
                return Err(bad());
            }
            a = parse_rational(suffix)?;
        }
        QuadScalar::new(a, b, d)
    }
}
