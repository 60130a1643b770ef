//! Values and single-variable distributions.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Symbolic outcome label, e.g. `+1`, `-1`, `1`..`6`, `yes`.
///
/// Values carry no numeric meaning; operations that need the ±1 coding
/// (expectations) demand it explicitly.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(String);

impl Value {
    pub fn new(label: impl Into<String>) -> Self {
        Value(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Value({})", self.0)
    }
}

impl From<&str> for Value {
    fn from(label: &str) -> Self {
        Value(label.to_string())
    }
}

/// Why a list of `(value, mass)` pairs is not a distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistributionError {
    EmptySupport,
    DuplicateValue(Value),
    NegativeMass(Value),
    NotNormalized(Rational),
}

impl fmt::Display for DistributionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionError::EmptySupport => write!(f, "support is empty"),
            DistributionError::DuplicateValue(v) => {
                write!(f, "value {v} appears twice in the support")
            }
            DistributionError::NegativeMass(v) => write!(f, "value {v} has negative mass"),
            DistributionError::NotNormalized(total) => {
                write!(f, "masses sum to {total}, expected 1")
            }
        }
    }
}

impl core::error::Error for DistributionError {}

/// Distribution of one discrete random variable: an ordered finite support
/// and one exact nonnegative mass per value, summing to 1.
///
/// The event algebra is the power set of the support, so the distribution is
/// fully determined by its point masses. Zero masses are legal and kept: the
/// support is the *declared* value list, not the set of values seen with
/// positive probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    support: Vec<Value>,
    mass: Vec<Rational>,
}

impl Distribution {
    pub fn new(pairs: Vec<(Value, Rational)>) -> Result<Self, DistributionError> {
        if pairs.is_empty() {
            return Err(DistributionError::EmptySupport);
        }
        let mut total = Rational::zero();
        for (value, mass) in &pairs {
            if pairs.iter().filter(|(v, _)| v == value).count() > 1 {
                return Err(DistributionError::DuplicateValue(value.clone()));
            }
            if mass.is_negative() {
                return Err(DistributionError::NegativeMass(value.clone()));
            }
            total += mass;
        }
        if !total.is_one() {
            return Err(DistributionError::NotNormalized(total));
        }
        let (support, mass) = pairs.into_iter().unzip();
        Ok(Distribution { support, mass })
    }

    /// Uniform distribution over the given values.
    pub fn uniform(values: Vec<Value>) -> Result<Self, DistributionError> {
        let n = values.len();
        if n == 0 {
            return Err(DistributionError::EmptySupport);
        }
        let share = Rational::new(1.into(), (n as i64).into());
        Distribution::new(values.into_iter().map(|v| (v, share.clone())).collect())
    }

    /// All mass on a single value.
    pub fn point_mass(value: Value) -> Self {
        Distribution {
            support: alloc::vec![value],
            mass: alloc::vec![Rational::one()],
        }
    }

    pub fn support(&self) -> &[Value] {
        &self.support
    }

    pub fn masses(&self) -> &[Rational] {
        &self.mass
    }

    /// Mass of `value`; zero for values outside the support.
    pub fn mass_of(&self, value: &Value) -> Rational {
        match self.support.iter().position(|v| v == value) {
            Some(i) => self.mass[i].clone(),
            None => Rational::zero(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Value, &Rational)> {
        self.support.iter().zip(self.mass.iter())
    }

    /// Distributional equality: the same measure on the union of the two
    /// supports, regardless of support order or zero-mass padding.
    pub fn same_measure(&self, other: &Distribution) -> bool {
        self.support
            .iter()
            .chain(other.support.iter())
            .all(|v| self.mass_of(v) == other.mass_of(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn v(label: &str) -> Value {
        Value::from(label)
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            Distribution::new(alloc::vec![]),
            Err(DistributionError::EmptySupport)
        );
        assert_eq!(
            Distribution::new(alloc::vec![(v("a"), rat(1, 2)), (v("a"), rat(1, 2))]),
            Err(DistributionError::DuplicateValue(v("a")))
        );
        assert_eq!(
            Distribution::new(alloc::vec![(v("a"), rat(3, 2)), (v("b"), rat(-1, 2))]),
            Err(DistributionError::NegativeMass(v("b")))
        );
        assert_eq!(
            Distribution::new(alloc::vec![(v("a"), rat(1, 2)), (v("b"), rat(1, 3))]),
            Err(DistributionError::NotNormalized(rat(5, 6)))
        );
    }

    #[test]
    fn zero_mass_values_stay_in_support() {
        let d = Distribution::new(alloc::vec![(v("a"), rat(0, 1)), (v("b"), rat(1, 1))]).unwrap();
        assert_eq!(d.support().len(), 2);
        assert_eq!(d.mass_of(&v("a")), rat(0, 1));
        assert_eq!(d.mass_of(&v("missing")), rat(0, 1));
    }

    #[test]
    fn same_measure_ignores_order_and_padding() {
        let d1 = Distribution::new(alloc::vec![(v("a"), rat(1, 3)), (v("b"), rat(2, 3))]).unwrap();
        let d2 = Distribution::new(alloc::vec![(v("b"), rat(2, 3)), (v("a"), rat(1, 3))]).unwrap();
        let d3 = Distribution::new(alloc::vec![
            (v("a"), rat(1, 3)),
            (v("b"), rat(2, 3)),
            (v("c"), rat(0, 1)),
        ])
        .unwrap();
        assert!(d1.same_measure(&d2));
        assert!(d1.same_measure(&d3));
        assert_ne!(d1, d2); // structural equality is order-sensitive
        assert!(!d1.same_measure(&Distribution::point_mass(v("a"))));
    }

    #[test]
    fn uniform_die() {
        let die = Distribution::uniform((1..=6).map(|i| Value::new(i.to_string())).collect());
        let die = die.unwrap();
        assert_eq!(die.mass_of(&v("4")), rat(1, 6));
    }
}
