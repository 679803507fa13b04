//! Exact rational scalars.
//!
//! All geometric and intersection-theoretic quantities in this crate are
//! `Rat` values: arbitrary-precision rationals kept in lowest terms with a
//! positive denominator (the representation `num_rational` guarantees).
//! Floating point appears only in asymptotics reporting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = num_rational::BigRational;

/// `n/d` as a `Rat`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as a `Rat`.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Largest integer `<= q`.
pub fn rat_floor(q: &Rat) -> BigInt {
    q.floor().to_integer()
}

/// Smallest integer `>= q`.
pub fn rat_ceil(q: &Rat) -> BigInt {
    q.ceil().to_integer()
}

pub fn is_integer(q: &Rat) -> bool {
    q.denom().is_one()
}

/// Ceiling of the integer quotient `a / b` for `b != 0`.
pub fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -(-a).div_floor(b)
}

/// The gcd of two nonnegative rationals: the largest `t` with both arguments
/// integer multiples of `t`. `gcd(q, 0) = q`.
pub fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    // Rewrite both over the lcm of the denominators and take the integer gcd.
    let denom_lcm = a.denom().lcm(b.denom());
    let an = a.numer().abs() * (&denom_lcm / a.denom());
    let bn = b.numer().abs() * (&denom_lcm / b.denom());
    Rat::new(an.gcd(&bn), denom_lcm)
}

/// Gcd of a sequence of rationals; `None` for an empty sequence (gcd is
/// conventionally infinite there).
pub fn rat_gcd_all<'a, I: IntoIterator<Item = &'a Rat>>(items: I) -> Option<Rat> {
    let mut acc: Option<Rat> = None;
    for q in items {
        acc = Some(match acc {
            None => q.abs(),
            Some(g) => rat_gcd(&g, q),
        });
    }
    acc
}

/// Lossy conversion for reporting; exact values should be kept alongside.
pub fn rat_to_f64(q: &Rat) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let scaled = q * Rat::from_integer(BigInt::from(1i64 << 53));
        scaled.to_integer().to_f64().unwrap_or(f64::NAN) / (1i64 << 53) as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_of_rationals() {
        assert_eq!(rat_gcd(&rat(3, 2), &rat(1, 2)), rat(1, 2));
        assert_eq!(rat_gcd(&rat_i(4), &rat_i(6)), rat_i(2));
        assert_eq!(rat_gcd(&rat(2, 3), &rat(1, 2)), rat(1, 6));
        assert_eq!(rat_gcd(&rat_i(0), &rat(5, 7)), rat(5, 7));
    }

    #[test]
    fn gcd_sequence() {
        let seq = [rat_i(2), rat_i(1), rat_i(1)];
        assert_eq!(rat_gcd_all(seq.iter()), Some(rat_i(1)));
        let seq = [rat(3, 2), rat(1, 2), rat(1, 2)];
        assert_eq!(rat_gcd_all(seq.iter()), Some(rat(1, 2)));
        assert_eq!(rat_gcd_all([].iter()), None);
    }

    #[test]
    fn ceil_division() {
        assert_eq!(ceil_div(&BigInt::from(-3), &BigInt::from(-1)), BigInt::from(3));
        assert_eq!(ceil_div(&BigInt::from(-3), &BigInt::from(-2)), BigInt::from(2));
        assert_eq!(ceil_div(&BigInt::from(5), &BigInt::from(2)), BigInt::from(3));
    }
}
