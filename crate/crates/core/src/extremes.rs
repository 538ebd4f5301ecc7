//! CAR decision, extremality and exhaustive vertex enumeration.
//!
//! A CAR mechanism is extreme when it is the only CAR mechanism with its
//! support, i.e. the incidence system of the support has a unique, strictly
//! positive solution of `Mz = 1`. Such supports have at most `n` sets, so all
//! vertices are found by testing every cover with at most `n` members.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Signed;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{column_rank, solve_unit, IncidenceSystem, SolveOutcome};
use crate::model::{validate_coarsening, CarMechanism, CoarseningMechanism};
use crate::rational::Rational;
use crate::subset::{SampleSpace, Subset};

/// Default largest `n` accepted by the enumerators.
pub const DEFAULT_MAX_N: usize = 5;
/// Absolute ceiling, override or not; the subset list alone is `2^n - 1` long.
pub const HARD_MAX_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimit {
    pub max_n: usize,
}

impl Default for EnumerationLimit {
    fn default() -> Self {
        Self { max_n: DEFAULT_MAX_N }
    }
}

impl EnumerationLimit {
    pub fn overridden() -> Self {
        Self { max_n: HARD_MAX_N }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let bound = self.max_n.min(HARD_MAX_N);
        if n > bound {
            return Err(Error::BoundExceeded { n, bound });
        }
        Ok(())
    }
}

/// A pair of elements of `A` assigned different probabilities of reporting `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarViolation {
    pub set: Subset,
    pub x: usize,
    pub x_prob: Rational,
    pub other: usize,
    pub other_prob: Rational,
}

impl fmt::Display for CarViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A = {}: x = {} has {} but x = {} has {}", self.set, self.x, self.x_prob, self.other, self.other_prob)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CarCheck {
    Car(CarMechanism),
    NotCar(Vec<CarViolation>),
}

/// Collapses a coarsening mechanism to its CAR form, or lists each set whose
/// members disagree. A member with no entry for a supported set counts as
/// probability zero and therefore disagrees.
pub fn check_car(mech: &CoarseningMechanism) -> Result<CarCheck> {
    let report = validate_coarsening(mech);
    if !report.is_ok() {
        let msgs: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidMechanism(msgs.join("; ")));
    }
    let mut violations = Vec::new();
    let mut pi = BTreeMap::new();
    for set in mech.support() {
        let reference = set.min_element();
        let ref_prob = mech.prob(reference, &set);
        for x in set.members().skip(1) {
            let p = mech.prob(x, &set);
            if p != ref_prob {
                violations.push(CarViolation { set, x: reference, x_prob: ref_prob.clone(), other: x, other_prob: p });
            }
        }
        pi.insert(set, ref_prob);
    }
    if !violations.is_empty() {
        return Ok(CarCheck::NotCar(violations));
    }
    CarMechanism::new(mech.space(), pi).map(CarCheck::Car)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtremeCertificate {
    /// The unique positive solution over the canonically ordered support.
    Solution(Vec<Rational>),
    RankDeficient {
        rank: usize,
        columns: usize,
    },
    Inconsistent,
    NonPositive(Vec<Rational>),
    /// Unique positive solution that differs from the stored probabilities.
    Mismatch(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremeReport {
    pub support: Vec<Subset>,
    pub certificate: ExtremeCertificate,
}

impl ExtremeReport {
    pub fn is_extreme(&self) -> bool {
        matches!(self.certificate, ExtremeCertificate::Solution(_))
    }
}

impl fmt::Display for ExtremeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |z: &[Rational]| z.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        match &self.certificate {
            ExtremeCertificate::Solution(z) => write!(f, "extreme: unique positive solution ({})", join(z)),
            ExtremeCertificate::RankDeficient { rank, columns } => {
                write!(f, "not extreme: support system has rank {rank} < {columns} columns")
            }
            ExtremeCertificate::Inconsistent => write!(f, "not extreme: support system has no solution"),
            ExtremeCertificate::NonPositive(z) => {
                write!(f, "not extreme: unique solution ({}) is not strictly positive", join(z))
            }
            ExtremeCertificate::Mismatch(z) => {
                write!(f, "not extreme: unique solution ({}) differs from the mechanism", join(z))
            }
        }
    }
}

fn classify(sys: &IncidenceSystem) -> ExtremeCertificate {
    match solve_unit(sys) {
        SolveOutcome::Unique(z) if z.iter().all(Signed::is_positive) => ExtremeCertificate::Solution(z),
        SolveOutcome::Unique(z) => ExtremeCertificate::NonPositive(z),
        SolveOutcome::NoSolution => ExtremeCertificate::Inconsistent,
        SolveOutcome::Underdetermined => {
            ExtremeCertificate::RankDeficient { rank: column_rank(sys), columns: sys.columns().len() }
        }
    }
}

pub fn is_extreme(car: &CarMechanism) -> ExtremeReport {
    let sys =
        IncidenceSystem::from_support(car.space(), car.support()).expect("support of a valid CAR mechanism is a cover");
    let mut certificate = classify(&sys);
    if let ExtremeCertificate::Solution(z) = &certificate {
        let stored: Vec<Rational> = car.pi().values().cloned().collect();
        if *z != stored {
            certificate = ExtremeCertificate::Mismatch(z.clone());
        }
    }
    ExtremeReport { support: sys.columns().to_vec(), certificate }
}

/// The extreme mechanism supported on `cover`, if the cover's system has a
/// unique strictly positive solution.
pub fn extreme_on_cover(space: SampleSpace, cover: &[Subset]) -> Option<CarMechanism> {
    let sys = IncidenceSystem::new(space, cover.to_vec()).ok()?;
    match classify(&sys) {
        ExtremeCertificate::Solution(z) => {
            let pi = cover.iter().copied().zip(z).collect();
            Some(CarMechanism::from_parts_unchecked(space, pi))
        }
        _ => None,
    }
}

/// Families of distinct sets drawn from a canonically ordered pool whose
/// union is a target mask. Families come by size, then lexicographically by
/// pool index.
///
/// Unions are tracked along the prefix; the last slot only considers sets that
/// complete the cover.
#[derive(Debug, Clone)]
pub struct Covers {
    pool: Vec<Subset>,
    target: u64,
    max_sets: usize,
    size: usize,
    /// Fixed first index, used to split the stream into independent slices.
    first: Option<usize>,
    idx: Vec<usize>,
    prefix: Vec<u64>,
    fresh: bool,
}

impl Covers {
    pub fn new(pool: Vec<Subset>, target: u64, max_sets: usize) -> Self {
        Self { pool, target, max_sets, size: 1, first: None, idx: Vec::new(), prefix: Vec::new(), fresh: true }
    }

    /// Only the families of exactly `size` sets whose first member is `pool[first]`.
    fn slice(pool: Vec<Subset>, target: u64, size: usize, first: usize) -> Self {
        Self {
            pool,
            target,
            max_sets: size,
            size,
            first: Some(first),
            idx: Vec::new(),
            prefix: Vec::new(),
            fresh: true,
        }
    }

    fn mask_through(&self, depth: usize) -> u64 {
        if depth == 0 {
            0
        } else {
            self.prefix[depth - 1]
        }
    }

    /// Smallest valid index `>= from` for slot `depth`, or `None`.
    fn candidate(&self, depth: usize, from: usize) -> Option<usize> {
        let remaining = self.size - depth - 1;
        let mut limit = self.pool.len().checked_sub(remaining)?;
        if let (0, Some(f)) = (depth, self.first) {
            limit = limit.min(f + 1);
        }
        if depth == self.size - 1 {
            let have = self.mask_through(depth);
            (from..limit).find(|&i| have | self.pool[i].bits() == self.target)
        } else {
            (from < limit).then_some(from)
        }
    }

    /// Fills slots `depth..` with the smallest completion, backtracking as needed.
    fn fill(&mut self, mut depth: usize, mut from: usize) -> bool {
        loop {
            if depth == 0 {
                if let Some(f) = self.first {
                    if from > f {
                        return false;
                    }
                    from = f;
                }
            }
            match self.candidate(depth, from) {
                Some(i) => {
                    self.idx.truncate(depth);
                    self.prefix.truncate(depth);
                    self.idx.push(i);
                    let mask = self.mask_through(depth) | self.pool[i].bits();
                    self.prefix.push(mask);
                    if depth + 1 == self.size {
                        return true;
                    }
                    depth += 1;
                    from = i + 1;
                }
                None => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                    from = self.idx[depth] + 1;
                }
            }
        }
    }
}

impl Iterator for Covers {
    type Item = Vec<Subset>;

    fn next(&mut self) -> Option<Vec<Subset>> {
        loop {
            if self.size > self.max_sets || self.size > self.pool.len() {
                return None;
            }
            let found = if self.fresh {
                self.fresh = false;
                self.idx.clear();
                self.prefix.clear();
                self.fill(0, 0)
            } else {
                let last = self.size - 1;
                let from = self.idx[last] + 1;
                self.fill(last, from)
            };
            if found {
                return Some(self.idx.iter().map(|&i| self.pool[i]).collect());
            }
            self.size += 1;
            self.fresh = true;
        }
    }
}

/// Every family of `1..=max_sets` distinct nonempty subsets whose union is
/// `E`, each exactly once, in canonical order.
pub fn enumerate_covers(n: usize, max_sets: usize, limit: EnumerationLimit) -> Result<Covers> {
    if max_sets == 0 {
        return Err(Error::InvalidArgument("max_sets must be at least 1".into()));
    }
    limit.check(n)?;
    let space = SampleSpace::new(n)?;
    Ok(Covers::new(space.all_subsets(), space.full_bits(), max_sets))
}

/// Runs the cover stream drawn from `pool` in parallel slices and keeps the
/// extreme mechanisms, in stream order.
pub(crate) fn extremes_from_pool(space: SampleSpace, pool: &[Subset], max_sets: usize) -> Vec<CarMechanism> {
    let slices: Vec<(usize, usize)> = (1..=max_sets.min(pool.len()))
        .flat_map(|size| (0..=pool.len() - size).map(move |first| (size, first)))
        .collect();
    slices
        .into_par_iter()
        .map(|(size, first)| {
            Covers::slice(pool.to_vec(), space.full_bits(), size, first)
                .filter_map(|cover| extreme_on_cover(space, &cover))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// All extreme CAR mechanisms over a space of size `n`, ordered as their
/// supports appear in [`enumerate_covers`].
pub fn enumerate_extremes(n: usize, limit: EnumerationLimit) -> Result<Vec<CarMechanism>> {
    limit.check(n)?;
    let space = SampleSpace::new(n)?;
    Ok(extremes_from_pool(space, &space.all_subsets(), n))
}

/// First extreme mechanism (in cover order) whose support lies in `pool`.
pub(crate) fn first_extreme_in(space: SampleSpace, pool: &[Subset]) -> Option<CarMechanism> {
    let max_sets = space.size().min(pool.len());
    Covers::new(pool.to_vec(), space.full_bits(), max_sets).find_map(|cover| extreme_on_cover(space, &cover))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::partition_car;
    use crate::rational::ratio;
    use crate::subset::set;

    fn space(n: usize) -> SampleSpace {
        SampleSpace::new(n).unwrap()
    }

    fn triangle_coarsening(x0: (Rational, Rational)) -> CoarseningMechanism {
        let half = ratio(1, 2);
        CoarseningMechanism::new(
            space(3),
            [
                (0, set(&[0, 1]), x0.0),
                (0, set(&[0, 2]), x0.1),
                (1, set(&[0, 1]), half.clone()),
                (1, set(&[1, 2]), half.clone()),
                (2, set(&[1, 2]), half.clone()),
                (2, set(&[0, 2]), half),
            ],
        )
        .unwrap()
    }

    #[test]
    fn triangle_collapses() {
        let CarCheck::Car(car) = check_car(&triangle_coarsening((ratio(1, 2), ratio(1, 2)))).unwrap() else {
            panic!("triangle is CAR");
        };
        assert_eq!(car.pi().len(), 3);
        assert!(car.pi().values().all(|p| *p == ratio(1, 2)));
    }

    #[test]
    fn singleton_collapses() {
        let m = CoarseningMechanism::new(space(1), [(0, set(&[0]), ratio(1, 1))]).unwrap();
        let CarCheck::Car(car) = check_car(&m).unwrap() else { panic!() };
        assert_eq!(car.prob(&set(&[0])), ratio(1, 1));
    }

    #[test]
    fn perturbed_triangle_violates() {
        let CarCheck::NotCar(v) = check_car(&triangle_coarsening((ratio(1, 3), ratio(2, 3)))).unwrap() else {
            panic!("perturbed triangle is not CAR");
        };
        assert_eq!(
            v,
            vec![
                CarViolation { set: set(&[0, 1]), x: 0, x_prob: ratio(1, 3), other: 1, other_prob: ratio(1, 2) },
                CarViolation { set: set(&[0, 2]), x: 0, x_prob: ratio(2, 3), other: 2, other_prob: ratio(1, 2) },
            ]
        );
    }

    #[test]
    fn missing_member_entry_violates() {
        // x=0 reports {0,1} always; x=1 splits between {0,1} and {1}
        let m = CoarseningMechanism::new(
            space(2),
            [(0, set(&[0, 1]), ratio(1, 1)), (1, set(&[0, 1]), ratio(1, 2)), (1, set(&[1]), ratio(1, 2))],
        )
        .unwrap();
        assert!(matches!(check_car(&m).unwrap(), CarCheck::NotCar(_)));
        // x=0 has no entry for {0,1} at all
        let m =
            CoarseningMechanism::new(space(2), [(0, set(&[0]), ratio(1, 1)), (1, set(&[0, 1]), ratio(1, 1))]).unwrap();
        let CarCheck::NotCar(v) = check_car(&m).unwrap() else { panic!() };
        assert_eq!(v[0].x_prob, ratio(0, 1));
    }

    #[test]
    fn invalid_input_is_an_error() {
        let m = CoarseningMechanism::new(space(1), [(0, set(&[0]), ratio(1, 2))]).unwrap();
        assert!(check_car(&m).is_err());
    }

    #[test]
    fn extremality_examples() {
        let t =
            CarMechanism::new(space(3), [set(&[0, 1]), set(&[1, 2]), set(&[0, 2])].map(|a| (a, ratio(1, 2)))).unwrap();
        let r = is_extreme(&t);
        assert_eq!(r.certificate, ExtremeCertificate::Solution(vec![ratio(1, 2); 3]));

        assert!(is_extreme(&partition_car(space(3), &[set(&[0, 1]), set(&[2])]).unwrap()).is_extreme());

        let mixed = CarMechanism::new(
            space(3),
            [
                (set(&[0, 1, 2]), ratio(1, 2)),
                (set(&[0]), ratio(1, 2)),
                (set(&[1]), ratio(1, 2)),
                (set(&[2]), ratio(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(is_extreme(&mixed).certificate, ExtremeCertificate::RankDeficient { rank: 3, columns: 4 });
    }

    #[test]
    fn covers_small() {
        let one: Vec<_> = enumerate_covers(1, 1, EnumerationLimit::default()).unwrap().collect();
        assert_eq!(one, vec![vec![set(&[0])]]);
        let two: Vec<_> = enumerate_covers(2, 2, EnumerationLimit::default()).unwrap().collect();
        assert_eq!(
            two,
            vec![
                vec![set(&[0, 1])],
                vec![set(&[0]), set(&[1])],
                vec![set(&[0]), set(&[0, 1])],
                vec![set(&[1]), set(&[0, 1])],
            ]
        );
    }

    #[test]
    fn covers_bound_and_arguments() {
        assert!(matches!(
            enumerate_covers(6, 2, EnumerationLimit::default()),
            Err(Error::BoundExceeded { n: 6, bound: 5 })
        ));
        assert!(enumerate_covers(6, 1, EnumerationLimit::overridden()).is_ok());
        assert!(enumerate_covers(3, 0, EnumerationLimit::default()).is_err());
        assert!(enumerate_extremes(17, EnumerationLimit::overridden()).is_err());
    }

    #[test]
    fn sliced_stream_matches_sequential() {
        let s = space(4);
        let pool = s.all_subsets();
        let seq: Vec<_> = Covers::new(pool.clone(), s.full_bits(), 3).collect();
        let mut sliced = Vec::new();
        for size in 1..=3 {
            for first in 0..=pool.len() - size {
                sliced.extend(Covers::slice(pool.clone(), s.full_bits(), size, first));
            }
        }
        assert_eq!(seq, sliced);
    }

    #[test]
    fn extremes_small() {
        assert_eq!(enumerate_extremes(1, EnumerationLimit::default()).unwrap().len(), 1);
        let two = enumerate_extremes(2, EnumerationLimit::default()).unwrap();
        assert_eq!(
            two,
            vec![
                partition_car(space(2), &[set(&[0, 1])]).unwrap(),
                partition_car(space(2), &[set(&[0]), set(&[1])]).unwrap(),
            ]
        );
        assert_eq!(enumerate_extremes(3, EnumerationLimit::default()).unwrap().len(), 6);
    }
}
