//! Coefficient fields for the polynomial layer.
//!
//! Everything above the Gröbner engine works over [`Rational`](crate::Rational);
//! the engine itself only needs field arithmetic and an exact zero test, so it is
//! written against [`Field`] and also runs over small prime fields.

use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An exact field. Equality must be decidable and exact.
pub trait Field:
    Clone
    + Eq
    + Hash
    + Debug
    + Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_i64(v: i64) -> Self;

    /// Scalar `k` such that `k * c` for every `c` in `coeffs` is the canonical
    /// representative of the line they span: content-free integers with a
    /// positive leading entry over the rationals, monic elsewhere.
    fn normalizer(coeffs: &[Self]) -> Self {
        match coeffs.first() {
            Some(lead) if !lead.is_zero() => Self::one() / lead.clone(),
            _ => Self::one(),
        }
    }
}

impl Field for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn normalizer(coeffs: &[Self]) -> Self {
        let mut den = BigInt::one();
        let mut num = BigInt::zero();
        for c in coeffs {
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
        }
        if num.is_zero() {
            return BigRational::one();
        }
        let mut k = BigRational::new(den, num);
        if coeffs.first().is_some_and(|c| c.is_negative()) {
            k = -k;
        }
        k
    }
}

/// The prime field `Z/PZ`, `P` prime and below `2^32`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Zp<const P: u64>(u64);

impl<const P: u64> Zp<P> {
    pub fn new(v: i64) -> Self {
        Zp(v.rem_euclid(P as i64) as u64)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn inverse(self) -> Self {
        assert!(self.0 != 0, "division by zero in Z/{P}");
        let (mut base, mut exp, mut acc) = (self.0, P - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % P;
            }
            base = base * base % P;
            exp >>= 1;
        }
        Zp(acc)
    }
}

impl<const P: u64> Debug for Zp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.0, P)
    }
}

impl<const P: u64> Display for Zp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Add for Zp<P> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Zp((self.0 + o.0) % P)
    }
}

impl<const P: u64> Sub for Zp<P> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Zp((self.0 + P - o.0) % P)
    }
}

impl<const P: u64> Mul for Zp<P> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Zp(self.0 * o.0 % P)
    }
}

impl<const P: u64> Div for Zp<P> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.inverse()
    }
}

impl<const P: u64> Neg for Zp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Zp((P - self.0) % P)
    }
}

impl<const P: u64> Zero for Zp<P> {
    fn zero() -> Self {
        Zp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u64> One for Zp<P> {
    fn one() -> Self {
        Zp(1 % P)
    }
}

impl<const P: u64> Field for Zp<P> {
    fn from_i64(v: i64) -> Self {
        Zp::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_normalizer_clears_content() {
        let cs = [q(-2, 3), q(4, 9)];
        let k = BigRational::normalizer(&cs);
        let scaled: Vec<_> = cs.iter().map(|c| c * &k).collect();
        assert_eq!(scaled, vec![q(3, 1), q(-2, 1)]);
    }

    #[test]
    fn prime_field_inverse() {
        type F = Zp<101>;
        for v in 1..101 {
            let x = F::new(v);
            assert_eq!(x / x, F::one());
        }
        assert_eq!(F::new(-1).value(), 100);
    }
}
