//! Coarsening mechanisms, CAR mechanisms and their mixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::subset::{SampleSpace, Subset};

/// General conditional probabilities `π_A^x`.
///
/// Construction only checks structure (labels in range, no duplicate cells);
/// the probabilistic constraints are reported by [`validate_coarsening`].
/// Zero entries are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseningMechanism {
    space: SampleSpace,
    entries: BTreeMap<(usize, Subset), Rational>,
}

impl CoarseningMechanism {
    pub fn new(space: SampleSpace, entries: impl IntoIterator<Item = (usize, Subset, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (x, set, prob) in entries {
            if x >= space.size() {
                return Err(Error::InvalidMechanism(format!("element {x} out of range")));
            }
            space.check(&set)?;
            if map.contains_key(&(x, set)) {
                return Err(Error::InvalidMechanism(format!("duplicate entry for x = {x}, A = {set}")));
            }
            if !prob.is_zero() {
                map.insert((x, set), prob);
            }
        }
        Ok(Self { space, entries: map })
    }

    pub fn space(&self) -> SampleSpace {
        self.space
    }

    /// Entries keyed by `(x, A)`, ordered by `x` then canonical subset order.
    pub fn entries(&self) -> &BTreeMap<(usize, Subset), Rational> {
        &self.entries
    }

    pub fn prob(&self, x: usize, set: &Subset) -> Rational {
        self.entries.get(&(x, *set)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Subsets with positive probability for some `x`.
    pub fn support(&self) -> BTreeSet<Subset> {
        self.entries.keys().map(|(_, a)| *a).collect()
    }

    pub fn row_sum(&self, x: usize) -> Rational {
        self.entries.range((x, Subset::singleton(0))..).take_while(|((y, _), _)| *y == x).map(|(_, p)| p).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoarseningViolation {
    /// `Σ_{A∋x} π_A^x ≠ 1`.
    RowSum {
        x: usize,
        sum: Rational,
    },
    /// An entry with `x ∉ A`.
    NotMember {
        x: usize,
        set: Subset,
    },
    NonPositive {
        x: usize,
        set: Subset,
        prob: Rational,
    },
}

impl fmt::Display for CoarseningViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RowSum { x, sum } => write!(f, "row sum at x = {x} is {sum}, expected 1"),
            Self::NotMember { x, set } => write!(f, "entry (x = {x}, A = {set}) has x outside A"),
            Self::NonPositive { x, set, prob } => {
                write!(f, "entry (x = {x}, A = {set}) has non-positive probability {prob}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<CoarseningViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_coarsening(mech: &CoarseningMechanism) -> ValidationReport {
    let mut violations = Vec::new();
    for ((x, set), prob) in &mech.entries {
        if !set.contains(*x) {
            violations.push(CoarseningViolation::NotMember { x: *x, set: *set });
        }
        if !prob.is_positive() {
            violations.push(CoarseningViolation::NonPositive { x: *x, set: *set, prob: prob.clone() });
        }
    }
    for x in 0..mech.space.size() {
        let sum = mech.row_sum(x);
        if !sum.is_one() {
            violations.push(CoarseningViolation::RowSum { x, sum });
        }
    }
    ValidationReport { violations }
}

/// A CAR mechanism: one probability `π_A` per subset, with
/// `Σ_{A∋x} π_A = 1` for every `x`. Only positive entries are stored, so the
/// key set is the support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarMechanism {
    space: SampleSpace,
    pi: BTreeMap<Subset, Rational>,
}

impl CarMechanism {
    pub fn new(space: SampleSpace, pi: impl IntoIterator<Item = (Subset, Rational)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (set, p) in pi {
            space.check(&set)?;
            if p.is_negative() {
                return Err(Error::InvalidMechanism(format!("negative probability {p} on {set}")));
            }
            if map.contains_key(&set) {
                return Err(Error::InvalidMechanism(format!("duplicate entry for {set}")));
            }
            if !p.is_zero() {
                map.insert(set, p);
            }
        }
        let car = Self { space, pi: map };
        let bad: Vec<String> = (0..space.size())
            .filter_map(|x| {
                let s = car.row_sum(x);
                (!s.is_one()).then(|| format!("x = {x} sums to {s}"))
            })
            .collect();
        if !bad.is_empty() {
            return Err(Error::InvalidMechanism(format!(
                "probabilities of sets containing each element must sum to 1 ({})",
                bad.join(", ")
            )));
        }
        Ok(car)
    }

    /// Caller guarantees the row-sum and positivity invariants.
    pub(crate) fn from_parts_unchecked(space: SampleSpace, pi: BTreeMap<Subset, Rational>) -> Self {
        debug_assert!(pi.values().all(Signed::is_positive));
        Self { space, pi }
    }

    pub fn space(&self) -> SampleSpace {
        self.space
    }

    pub fn pi(&self) -> &BTreeMap<Subset, Rational> {
        &self.pi
    }

    pub fn prob(&self, set: &Subset) -> Rational {
        self.pi.get(set).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> BTreeSet<Subset> {
        self.pi.keys().copied().collect()
    }

    pub fn row_sum(&self, x: usize) -> Rational {
        self.pi.iter().filter(|(a, _)| a.contains(x)).map(|(_, p)| p).sum()
    }

    /// The general mechanism with `π_A^x = π_A` for every `x ∈ A`.
    pub fn to_coarsening(&self) -> CoarseningMechanism {
        let entries = self.pi.iter().flat_map(|(a, p)| a.members().map(move |x| ((x, *a), p.clone()))).collect();
        CoarseningMechanism { space: self.space, entries }
    }
}

impl fmt::Display for CarMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n = {}:", self.space.size())?;
        for (a, p) in &self.pi {
            write!(f, " π{a} = {p}")?;
        }
        Ok(())
    }
}

/// A finite convex combination of CAR mechanisms over one space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mixture {
    weights: Vec<Rational>,
    components: Vec<CarMechanism>,
}

impl Mixture {
    pub fn new(weights: Vec<Rational>, components: Vec<CarMechanism>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMixture("a mixture needs at least one component".into()));
        }
        if weights.len() != components.len() {
            return Err(Error::InvalidMixture(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidMixture(format!("weight {w} is not positive")));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidMixture(format!("weights sum to {total}, expected 1")));
        }
        let space = components[0].space;
        if let Some(c) = components.iter().find(|c| c.space != space) {
            return Err(Error::SpaceMismatch { expected: space.size(), found: c.space.size() });
        }
        Ok(Self { weights, components })
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn components(&self) -> &[CarMechanism] {
        &self.components
    }

    pub fn space(&self) -> SampleSpace {
        self.components[0].space
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &CarMechanism)> {
        self.weights.iter().zip(&self.components)
    }
}

/// Anything with a support: the subsets carrying positive probability.
pub trait Supported {
    fn support_set(&self) -> BTreeSet<Subset>;
}

impl Supported for CoarseningMechanism {
    fn support_set(&self) -> BTreeSet<Subset> {
        self.support()
    }
}

impl Supported for CarMechanism {
    fn support_set(&self) -> BTreeSet<Subset> {
        self.support()
    }
}

/// Subsets with positive probability; a cover of the space for valid input.
pub fn support_of<M: Supported + ?Sized>(mech: &M) -> BTreeSet<Subset> {
    mech.support_set()
}

/// `Σ λ_i π_i`, computed exactly.
pub fn mix(mixture: &Mixture) -> CarMechanism {
    let mut pi: BTreeMap<Subset, Rational> = BTreeMap::new();
    for (w, c) in mixture.iter() {
        for (a, p) in &c.pi {
            *pi.entry(*a).or_insert_with(Rational::zero) += w * p;
        }
    }
    CarMechanism::from_parts_unchecked(mixture.space(), pi)
}

/// The unique CAR mechanism supported on a partition: `π_A = 1` per block.
pub fn partition_car(space: SampleSpace, blocks: &[Subset]) -> Result<CarMechanism> {
    let mut seen = 0u64;
    for b in blocks {
        space.check(b)?;
        if seen & b.bits() != 0 {
            return Err(Error::NotPartition(format!("block {b} overlaps an earlier block")));
        }
        seen |= b.bits();
    }
    if seen != space.full_bits() {
        return Err(Error::NotPartition("blocks do not cover every element".into()));
    }
    let pi = blocks.iter().map(|b| (*b, Rational::one())).collect();
    Ok(CarMechanism::from_parts_unchecked(space, pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::subset::set;

    fn space(n: usize) -> SampleSpace {
        SampleSpace::new(n).unwrap()
    }

    /// The triangle mechanism: every pair gets probability 1/2.
    pub(crate) fn triangle_coarsening() -> CoarseningMechanism {
        let half = ratio(1, 2);
        CoarseningMechanism::new(
            space(3),
            [
                (0, set(&[0, 1]), half.clone()),
                (1, set(&[0, 1]), half.clone()),
                (1, set(&[1, 2]), half.clone()),
                (2, set(&[1, 2]), half.clone()),
                (2, set(&[0, 2]), half.clone()),
                (0, set(&[0, 2]), half),
            ],
        )
        .unwrap()
    }

    fn triangle() -> CarMechanism {
        CarMechanism::new(space(3), [set(&[0, 1]), set(&[1, 2]), set(&[0, 2])].map(|a| (a, ratio(1, 2)))).unwrap()
    }

    #[test]
    fn support_of_examples() {
        let tri = triangle();
        let edges: BTreeSet<Subset> = [set(&[0, 1]), set(&[0, 2]), set(&[1, 2])].into();
        assert_eq!(support_of(&tri), edges);
        assert_eq!(support_of(&triangle_coarsening()), edges);
        let whole = partition_car(space(3), &[set(&[0, 1, 2])]).unwrap();
        assert_eq!(support_of(&whole), [set(&[0, 1, 2])].into());
        let m = mix(&Mixture::new(vec![ratio(1, 2), ratio(1, 2)], vec![tri, whole]).unwrap());
        let mut all = edges.clone();
        all.insert(set(&[0, 1, 2]));
        assert_eq!(support_of(&m), all);
    }

    #[test]
    fn triangle_is_valid() {
        assert!(validate_coarsening(&triangle_coarsening()).is_ok());
    }

    #[test]
    fn singleton_space_is_valid() {
        let m = CoarseningMechanism::new(space(1), [(0, set(&[0]), ratio(1, 1))]).unwrap();
        assert!(validate_coarsening(&m).is_ok());
    }

    #[test]
    fn broken_row_sum_is_reported() {
        let mut entries: Vec<_> = triangle_coarsening().entries().clone().into_iter().collect();
        entries[0].1 = ratio(1, 3); // (x = 0, {0,1})
        let m = CoarseningMechanism::new(space(3), entries.into_iter().map(|((x, a), p)| (x, a, p))).unwrap();
        let report = validate_coarsening(&m);
        assert_eq!(report.violations, vec![CoarseningViolation::RowSum { x: 0, sum: ratio(5, 6) }]);
    }

    #[test]
    fn non_member_entry_is_reported() {
        let m = CoarseningMechanism::new(space(2), [(0, set(&[1]), ratio(1, 1)), (1, set(&[1]), ratio(1, 1))]).unwrap();
        let report = validate_coarsening(&m);
        assert!(report.violations.contains(&CoarseningViolation::NotMember { x: 0, set: set(&[1]) }));
    }

    #[test]
    fn mix_identity() {
        let t = triangle();
        let m = Mixture::new(vec![ratio(1, 1)], vec![t.clone()]).unwrap();
        assert_eq!(mix(&m), t);
    }

    #[test]
    fn mix_of_two_partitions() {
        let whole = partition_car(space(3), &[set(&[0, 1, 2])]).unwrap();
        let singles = partition_car(space(3), &[set(&[0]), set(&[1]), set(&[2])]).unwrap();
        let m = Mixture::new(vec![ratio(1, 2), ratio(1, 2)], vec![whole, singles]).unwrap();
        let expected = CarMechanism::new(
            space(3),
            [
                (set(&[0, 1, 2]), ratio(1, 2)),
                (set(&[0]), ratio(1, 2)),
                (set(&[1]), ratio(1, 2)),
                (set(&[2]), ratio(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(mix(&m), expected);
    }

    #[test]
    fn mix_triangle_with_whole_space() {
        let whole = partition_car(space(3), &[set(&[0, 1, 2])]).unwrap();
        let m = Mixture::new(vec![ratio(1, 3), ratio(2, 3)], vec![triangle(), whole]).unwrap();
        let got = mix(&m);
        for a in [set(&[0, 1]), set(&[1, 2]), set(&[0, 2])] {
            assert_eq!(got.prob(&a), ratio(1, 6));
        }
        assert_eq!(got.prob(&set(&[0, 1, 2])), ratio(2, 3));
        for x in 0..3 {
            assert_eq!(got.row_sum(x), ratio(1, 1));
        }
        assert_eq!(got.support(), [set(&[0, 1]), set(&[1, 2]), set(&[0, 2]), set(&[0, 1, 2])].into_iter().collect());
    }

    #[test]
    fn mixture_rejects_bad_inputs() {
        let t = triangle();
        assert!(Mixture::new(vec![], vec![]).is_err());
        assert!(Mixture::new(vec![ratio(1, 2)], vec![t.clone()]).is_err());
        assert!(Mixture::new(vec![ratio(0, 1), ratio(1, 1)], vec![t.clone(), t.clone()]).is_err());
        let other = partition_car(space(2), &[set(&[0, 1])]).unwrap();
        assert!(matches!(
            Mixture::new(vec![ratio(1, 2), ratio(1, 2)], vec![t, other]),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn partitions() {
        let p = partition_car(space(3), &[set(&[0, 1]), set(&[2])]).unwrap();
        assert_eq!(p.support(), [set(&[0, 1]), set(&[2])].into_iter().collect());
        assert!(p.pi().values().all(|v| v.is_one()));
        assert!(partition_car(space(3), &[set(&[0, 1]), set(&[1, 2])]).is_err());
        assert!(partition_car(space(3), &[set(&[0, 1])]).is_err());
    }

    #[test]
    fn supports() {
        assert_eq!(triangle().support(), [set(&[0, 1]), set(&[1, 2]), set(&[0, 2])].into_iter().collect());
        assert_eq!(triangle_coarsening().support(), triangle().support());
        let whole = partition_car(space(3), &[set(&[0, 1, 2])]).unwrap();
        assert_eq!(whole.support(), [set(&[0, 1, 2])].into_iter().collect());
        let m = Mixture::new(vec![ratio(1, 2), ratio(1, 2)], vec![triangle(), whole]).unwrap();
        assert_eq!(mix(&m).support().len(), 4);
    }

    #[test]
    fn car_rejects_bad_row_sums() {
        assert!(CarMechanism::new(space(2), [(set(&[0, 1]), ratio(1, 2))]).is_err());
        assert!(CarMechanism::new(space(1), [(set(&[0]), ratio(-1, 1))]).is_err());
    }

    #[test]
    fn expansion_matches_coarsening() {
        assert_eq!(triangle().to_coarsening(), triangle_coarsening());
    }
}
