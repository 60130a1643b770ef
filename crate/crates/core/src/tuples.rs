//! Mixed-radix indexing of value tuples.
//!
//! Joint tables (bunches, coupling atoms) store one mass per tuple of the
//! cartesian product of the coordinate supports, in lexicographic order with
//! the first coordinate most significant. This fixes both atom enumeration
//! and printed output.

use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct MixedRadix {
    sizes: Vec<usize>,
    len: usize,
}

impl MixedRadix {
    pub fn new(sizes: &[usize]) -> Self {
        let len = sizes.iter().product();
        MixedRadix {
            sizes: sizes.to_vec(),
            len,
        }
    }

    /// Number of tuples in the product.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Coordinate digits of the tuple at `index`.
    pub fn decode(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.len);
        let mut digits = alloc::vec![0usize; self.sizes.len()];
        let mut rest = index;
        for (pos, &size) in self.sizes.iter().enumerate().rev() {
            digits[pos] = rest % size;
            rest /= size;
        }
        digits
    }

    /// Index of the tuple with the given coordinate digits.
    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.sizes.len());
        let mut index = 0usize;
        for (&digit, &size) in digits.iter().zip(&self.sizes) {
            debug_assert!(digit < size);
            index = index * size + digit;
        }
        index
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_all_indices() {
        let radix = MixedRadix::new(&[2, 3, 2]);
        assert_eq!(radix.len(), 12);
        for index in 0..radix.len() {
            assert_eq!(radix.encode(&radix.decode(index)), index);
        }
    }

    #[test]
    fn first_coordinate_most_significant() {
        let radix = MixedRadix::new(&[2, 2]);
        assert_eq!(radix.decode(0), alloc::vec![0, 0]);
        assert_eq!(radix.decode(1), alloc::vec![0, 1]);
        assert_eq!(radix.decode(2), alloc::vec![1, 0]);
        assert_eq!(radix.decode(3), alloc::vec![1, 1]);
    }

    #[test]
    fn empty_product_has_one_tuple() {
        let radix = MixedRadix::new(&[]);
        assert_eq!(radix.len(), 1);
        assert_eq!(radix.decode(0), Vec::<usize>::new());
    }
}
