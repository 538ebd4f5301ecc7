//! Sample spaces `E = {0, .., n-1}` and their nonempty subsets.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A finite sample space with elements labeled `0 .. n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleSpace {
    n: usize,
}

impl SampleSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if n > Subset::MAX_ELEMENTS {
            return Err(Error::SpaceTooLarge(n));
        }
        Ok(Self { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn full(&self) -> Subset {
        Subset(self.full_bits())
    }

    pub(crate) fn full_bits(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn contains(&self, set: &Subset) -> bool {
        set.0 & !self.full_bits() == 0
    }

    pub fn check(&self, set: &Subset) -> Result<()> {
        if self.contains(set) {
            Ok(())
        } else {
            Err(Error::InvalidSubset(format!("{set} is not a subset of a space with n = {}", self.n)))
        }
    }

    /// All `2^n - 1` nonempty subsets in canonical order.
    pub fn all_subsets(&self) -> Vec<Subset> {
        assert!(self.n < 32, "all_subsets is only meaningful for small spaces");
        let mut all: Vec<Subset> = (1..=self.full_bits()).map(Subset).collect();
        all.sort();
        all
    }
}

/// A nonempty set of element labels, stored as a bitmask.
///
/// Ordering is canonical: by cardinality, then lexicographically on the sorted
/// member list.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subset(u64);

impl Subset {
    pub const MAX_ELEMENTS: usize = 64;

    pub fn from_bits(bits: u64) -> Result<Self> {
        if bits == 0 {
            return Err(Error::InvalidSubset("subsets must be nonempty".into()));
        }
        Ok(Self(bits))
    }

    /// Builds a subset from labels in any order; duplicates are rejected.
    pub fn from_members(members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = 0u64;
        for x in members {
            if x >= Self::MAX_ELEMENTS {
                return Err(Error::InvalidSubset(format!("element {x} out of range")));
            }
            if bits & (1 << x) != 0 {
                return Err(Error::InvalidSubset(format!("duplicate element {x}")));
            }
            bits |= 1 << x;
        }
        Self::from_bits(bits)
    }

    /// Parses the wire form: a strictly increasing list of labels.
    pub fn from_sorted(members: &[usize]) -> Result<Self> {
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(format!("{members:?} is not strictly increasing")));
        }
        Self::from_members(members.iter().copied())
    }

    pub fn singleton(x: usize) -> Self {
        assert!(x < Self::MAX_ELEMENTS);
        Self(1 << x)
    }

    pub fn bits(&self) -> u64 {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: usize) -> bool {
        x < Self::MAX_ELEMENTS && self.0 & (1 << x) != 0
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn members(&self) -> Members {
        Members(self.0)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.members().collect()
    }

    pub fn max_element(&self) -> usize {
        63 - self.0.leading_zeros() as usize
    }

    pub fn min_element(&self) -> usize {
        self.0.trailing_zeros() as usize
    }
}

pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let x = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(x)
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            let diff = self.0 ^ other.0;
            if diff == 0 {
                Ordering::Equal
            } else if self.0 & (diff & diff.wrapping_neg()) != 0 {
                // equal cardinality: whoever owns the lowest differing element sorts first
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.members().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Shorthand used throughout tests: `set(&[0, 1])`.
pub fn set(members: &[usize]) -> Subset {
    Subset::from_members(members.iter().copied()).expect("valid subset literal")
}
