//! Mixed-radix configuration indexing.
//!
//! The first digit is the most significant. CPT conditioner configurations,
//! joint tables and cluster values all use this layout.

/// Radices of a mixed-radix number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedRadix {
    radices: Vec<usize>,
    size: usize,
}

impl MixedRadix {
    pub fn new(radices: Vec<usize>) -> Self {
        let size = radices.iter().product();
        MixedRadix { radices, size }
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    /// Number of configurations, `1` for zero digits.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.radices.len());
        digits.iter().zip(&self.radices).fold(0, |acc, (&d, &r)| {
            debug_assert!(d < r);
            acc * r + d
        })
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.radices.len()];
        self.decode_into(&mut index, &mut digits);
        digits
    }

    pub fn decode_into(&self, index: &mut usize, digits: &mut [usize]) {
        for (d, &r) in digits.iter_mut().zip(&self.radices).rev() {
            *d = *index % r;
            *index /= r;
        }
    }

    /// Iterates all configurations in index order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size).map(move |i| self.decode(i))
    }
}
