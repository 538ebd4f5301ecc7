//! Uniform multicovers (`k`-covers) and their correspondence with rational
//! CAR mechanisms via `π_A = n_A / k`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::extremes::is_extreme;
use crate::model::CarMechanism;
use crate::rational::{from_biguint_ratio, lcm_denominators, scale_to_integer};
use crate::subset::{SampleSpace, Subset};

/// A multiset of subsets stored as `(set, multiplicity)` pairs with a declared
/// height `k`. Whether every element is covered exactly `k` times is checked
/// by [`validate_multicover`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformMulticover {
    space: SampleSpace,
    height: BigUint,
    mults: BTreeMap<Subset, BigUint>,
}

impl UniformMulticover {
    pub fn new(
        space: SampleSpace,
        height: BigUint,
        mults: impl IntoIterator<Item = (Subset, BigUint)>,
    ) -> Result<Self> {
        if height.is_zero() {
            return Err(Error::InvalidMulticover("height must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for (set, m) in mults {
            space.check(&set)?;
            if map.contains_key(&set) {
                return Err(Error::InvalidMulticover(format!("{set} listed twice")));
            }
            if !m.is_zero() {
                map.insert(set, m);
            }
        }
        Ok(Self { space, height, mults: map })
    }

    pub fn space(&self) -> SampleSpace {
        self.space
    }

    pub fn height(&self) -> &BigUint {
        &self.height
    }

    pub fn mults(&self) -> &BTreeMap<Subset, BigUint> {
        &self.mults
    }

    pub fn mult(&self, set: &Subset) -> BigUint {
        self.mults.get(set).cloned().unwrap_or_else(BigUint::zero)
    }

    /// How many sets (with multiplicity) contain `x`.
    pub fn degree(&self, x: usize) -> BigUint {
        self.mults.iter().filter(|(a, _)| a.contains(x)).map(|(_, m)| m).sum()
    }

    pub fn is_canonical(&self) -> bool {
        self.common_factor().is_one()
    }

    fn common_factor(&self) -> BigUint {
        self.mults.values().fold(self.height.clone(), |g, m| g.gcd(m))
    }
}

impl fmt::Display for UniformMulticover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-cover of n = {}:", self.height, self.space.size())?;
        for (a, m) in &self.mults {
            write!(f, " {a}×{m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeViolation {
    pub x: usize,
    pub degree: BigUint,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MulticoverReport {
    pub violations: Vec<DegreeViolation>,
}

impl MulticoverReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_multicover(mc: &UniformMulticover) -> MulticoverReport {
    let violations = (0..mc.space.size())
        .filter_map(|x| {
            let degree = mc.degree(x);
            (degree != mc.height).then_some(DegreeViolation { x, degree })
        })
        .collect();
    MulticoverReport { violations }
}

fn ensure_valid(mc: &UniformMulticover) -> Result<()> {
    let report = validate_multicover(mc);
    if report.is_ok() {
        return Ok(());
    }
    let detail: Vec<String> =
        report.violations.iter().map(|v| format!("x = {} covered {} times", v.x, v.degree)).collect();
    Err(Error::InvalidMulticover(format!("height is {} but {}", mc.height, detail.join(", "))))
}

pub fn from_multicover(mc: &UniformMulticover) -> Result<CarMechanism> {
    ensure_valid(mc)?;
    let pi = mc.mults.iter().map(|(a, m)| (*a, from_biguint_ratio(m, &mc.height))).collect();
    Ok(CarMechanism::from_parts_unchecked(mc.space, pi))
}

/// The canonical multicover generating `car`: `k` is the lcm of the
/// denominators and `n_A = k · π_A`.
pub fn to_multicover(car: &CarMechanism) -> UniformMulticover {
    let height = lcm_denominators(car.pi().values());
    let mults = car
        .pi()
        .iter()
        .map(|(a, p)| (*a, scale_to_integer(p, &height).expect("lcm clears every denominator")))
        .collect();
    UniformMulticover { space: car.space(), height, mults }
}

/// Divides `k` and every multiplicity by their common factor.
pub fn canonicalize(mc: &UniformMulticover) -> UniformMulticover {
    let g = mc.common_factor();
    UniformMulticover {
        space: mc.space,
        height: &mc.height / &g,
        mults: mc.mults.iter().map(|(a, m)| (*a, m / &g)).collect(),
    }
}

/// Whether the multicover generates an extreme CAR mechanism.
pub fn is_extreme_multicover(mc: &UniformMulticover) -> Result<bool> {
    Ok(is_extreme(&from_multicover(mc)?).is_extreme())
}

/// Largest total search space [`contains_uniform_sub_multicover`] accepts.
pub const SUB_MULTICOVER_SEARCH_LIMIT: u64 = 1 << 24;

/// Direct search for a proper, nonempty sub-multiset `0 ≤ n'_A ≤ n_A` that is
/// itself a uniform multicover of some height `1 ≤ k' < k`.
///
/// Exponential: the search space is `Π (n_A + 1)`. Intended as a cross-check
/// of [`is_extreme_multicover`] at small sizes; larger inputs are rejected.
pub fn contains_uniform_sub_multicover(mc: &UniformMulticover) -> Result<bool> {
    ensure_valid(mc)?;
    let too_big = || Error::InvalidArgument("multicover too large for the exhaustive sub-multicover search".into());
    let sets: Vec<(u64, u64)> =
        mc.mults.iter().map(|(a, m)| m.to_u64().map(|m| (a.bits(), m)).ok_or_else(too_big)).collect::<Result<_>>()?;
    let space_size = sets.iter().try_fold(1u64, |acc, (_, m)| acc.checked_mul(m + 1)).ok_or_else(too_big)?;
    if space_size > SUB_MULTICOVER_SEARCH_LIMIT {
        return Err(too_big());
    }
    let k = mc.height.to_u64().ok_or_else(too_big)?;
    let n = mc.space.size();
    for target in 1..k {
        let mut load = vec![0u64; n];
        if search_sub(&sets, 0, target, &mut load, n) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn search_sub(sets: &[(u64, u64)], i: usize, target: u64, load: &mut [u64], n: usize) -> bool {
    if i == sets.len() {
        return load.iter().all(|&l| l == target);
    }
    let (bits, max) = sets[i];
    // every element must still be reachable by the remaining sets
    let headroom = (0..n).filter(|x| bits & (1 << x) != 0).map(|x| target - load[x]).min().unwrap_or(0);
    for c in 0..=max.min(headroom) {
        for x in (0..n).filter(|x| bits & (1 << x) != 0) {
            load[x] += c;
        }
        let feasible = (0..n).all(|x| load[x] == target || sets[i + 1..].iter().any(|(b, _)| b & (1 << x) != 0));
        let hit = feasible && search_sub(sets, i + 1, target, load, n);
        for x in (0..n).filter(|x| bits & (1 << x) != 0) {
            load[x] -= c;
        }
        if hit {
            return true;
        }
    }
    false
}
