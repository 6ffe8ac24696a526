//! Exact scalars: arbitrary-precision rationals and elements of `Q(sqrt(q))`.
//!
//! `Rat` is kept in lowest terms with a positive denominator by construction
//! and serializes as `num/den` (the denominator is omitted when it is 1).
//! [`QuadExt`] represents `a + b*sqrt(q)` with rational `a`, `b`; it is the
//! scalar type for every quantity involving half powers of `q`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arbitrary-precision rational number.
pub type Rat = num_rational::BigRational;

/// Shorthand for a small integer as a `Rat`.
pub fn rat(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// `num/den` as a `Rat`; panics if `den == 0`.
pub fn rat_frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Exact `base^exp` for integer `base >= 1` and any integer exponent.
pub fn int_pow(base: i64, exp: i64) -> Rat {
    assert!(base >= 1, "int_pow expects a positive base, got {base}");
    let p = num_traits::pow(BigInt::from(base), exp.unsigned_abs() as usize);
    if exp >= 0 {
        Rat::from_integer(p)
    } else {
        Rat::new(BigInt::one(), p)
    }
}

/// `s(s-1)/2` as an `i64`.
pub fn choose2(s: i64) -> i64 {
    s * (s - 1) / 2
}

/// An element `a + b*sqrt(q)` of the quadratic extension `Q(sqrt(q))`.
///
/// Arithmetic is performed in the ring `Q[x]/(x^2 - q)`; two elements are
/// equal exactly when both coordinates agree, which is the right notion even
/// when `q` happens to be a perfect square (the square root stays symbolic).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadExt {
    a: Rat,
    b: Rat,
    q: i64,
}

impl QuadExt {
    pub fn new(a: Rat, b: Rat, q: i64) -> Self {
        assert!(q >= 2, "QuadExt base must satisfy q >= 2, got {q}");
        QuadExt { a, b, q }
    }

    pub fn from_rat(a: Rat, q: i64) -> Self {
        QuadExt::new(a, Rat::zero(), q)
    }

    pub fn zero(q: i64) -> Self {
        QuadExt::from_rat(Rat::zero(), q)
    }

    pub fn one(q: i64) -> Self {
        QuadExt::from_rat(Rat::one(), q)
    }

    /// `sqrt(q)` itself.
    pub fn sqrt_q(q: i64) -> Self {
        QuadExt::new(Rat::zero(), Rat::one(), q)
    }

    /// `q^(k/2)` for any integer `k` (possibly negative).
    ///
    /// Even `k` yields a rational element; odd `k` yields `q^((k-1)/2) sqrt(q)`.
    pub fn half_pow(q: i64, k: i64) -> Self {
        if k.rem_euclid(2) == 0 {
            QuadExt::from_rat(int_pow(q, k / 2), q)
        } else {
            // q^(k/2) = q^((k-1)/2) * sqrt(q); for negative odd k the integer
            // division below still makes (k-1)/2 exact.
            QuadExt::new(Rat::zero(), int_pow(q, (k - 1) / 2), q)
        }
    }

    pub fn base(&self) -> i64 {
        self.q
    }

    pub fn rational_part(&self) -> &Rat {
        &self.a
    }

    pub fn radical_part(&self) -> &Rat {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadExt::new(self.a.clone(), -self.b.clone(), self.q)
    }

    /// Field norm `a^2 - q b^2`.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a - rat(self.q) * &self.b * &self.b
    }

    /// Multiplicative inverse; `None` when the element is not invertible
    /// (zero, or a zero divisor when `q` is a perfect square).
    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        let c = self.conj();
        Some(QuadExt::new(&c.a / &n, &c.b / &n, self.q))
    }

    /// Lossless conversion to `Rat`; `None` if the `sqrt(q)` component is nonzero.
    pub fn to_rat(&self) -> Option<Rat> {
        if self.b.is_zero() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    fn check_base(&self, other: &Self) {
        assert_eq!(
            self.q, other.q,
            "mixed QuadExt bases: sqrt({}) vs sqrt({})",
            self.q, other.q
        );
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt({})", self.b, self.q);
        }
        if self.b.is_negative() {
            write!(f, "{} - {}*sqrt({})", self.a, -self.b.clone(), self.q)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.q)
        }
    }
}

impl Add for &QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &QuadExt) -> QuadExt {
        self.check_base(rhs);
        QuadExt::new(&self.a + &rhs.a, &self.b + &rhs.b, self.q)
    }
}

impl Sub for &QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &QuadExt) -> QuadExt {
        self.check_base(rhs);
        QuadExt::new(&self.a - &rhs.a, &self.b - &rhs.b, self.q)
    }
}

impl Mul for &QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &QuadExt) -> QuadExt {
        self.check_base(rhs);
        let a = &self.a * &rhs.a + rat(self.q) * &self.b * &rhs.b;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        QuadExt::new(a, b, self.q)
    }
}

impl Div for &QuadExt {
    type Output = QuadExt;
    fn div(self, rhs: &QuadExt) -> QuadExt {
        self.check_base(rhs);
        let inv = rhs.inv().expect("division by a non-invertible QuadExt");
        self * &inv
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(-self.a.clone(), -self.b.clone(), self.q)
    }
}

macro_rules! forward_owned_binop {
    ($($trait:ident, $method:ident);*) => {$(
        impl $trait for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: QuadExt) -> QuadExt {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $method(self, rhs: &QuadExt) -> QuadExt {
                (&self).$method(rhs)
            }
        }
    )*};
}

forward_owned_binop!(Add, add; Sub, sub; Mul, mul; Div, div);

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        -&self
    }
}

/// Formats a `Rat` the way every emitter in this workspace does: `num/den`,
/// with `/den` omitted when the denominator is one.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}
