//! Exact rational arithmetic used for every probability in the crate.
//!
//! No floating point enters any decision: masses, expectations, inequality
//! bounds, and solver pivots are all [`Rational`] values in canonical reduced
//! form (positive denominator, coprime numerator and denominator).

use num_bigint::BigInt;

/// Arbitrary-precision rational number in canonical reduced form.
pub type Rational = num_rational::BigRational;

/// Shorthand for `n/d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// True iff `0 <= r <= 1`.
pub fn is_probability(r: &Rational) -> bool {
    !r.is_negative() && *r <= int(1)
}

use num_traits::Signed;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(1, -2), rat(-1, 2));
        assert_eq!(rat(-3, -6), rat(1, 2));
    }

    #[test]
    fn probability_range() {
        assert!(is_probability(&rat(0, 1)));
        assert!(is_probability(&rat(1, 1)));
        assert!(is_probability(&rat(17, 24)));
        assert!(!is_probability(&rat(-1, 64)));
        assert!(!is_probability(&rat(65, 64)));
    }
}
