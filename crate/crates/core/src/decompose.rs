//! Mixtures of extreme mechanisms, and rational approximation of
//! floating-point CAR vectors.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::extremes::{first_extreme_in, EnumerationLimit};
use crate::model::{mix, CarMechanism, Mixture};
use crate::multicover::{from_multicover, UniformMulticover};
use crate::rational::Rational;
use crate::subset::{SampleSpace, Subset};

/// Writes `car` as a convex combination of extreme mechanisms by Carathéodory
/// peeling.
///
/// Each round takes the first extreme `e` (in cover order) supported inside
/// the residual support, the largest step `t = min_A π_A / e_A`, and continues
/// with `(π - t·e) / (1 - t)`. The minimizing set leaves the support, so there
/// are at most `|supp π|` rounds.
pub fn decompose(car: &CarMechanism, limit: EnumerationLimit) -> Result<Mixture> {
    let space = car.space();
    limit.check(space.size())?;
    let mut residual: BTreeMap<Subset, Rational> = car.pi().clone();
    let mut remaining = Rational::one();
    let mut weights = Vec::new();
    let mut components = Vec::new();
    loop {
        let pool: Vec<Subset> = residual.keys().copied().collect();
        let extreme = first_extreme_in(space, &pool)
            .ok_or_else(|| Error::Internal(format!("no extreme mechanism supported within {pool:?}")))?;
        let step = extreme.pi().iter().map(|(a, e)| &residual[a] / e).min().expect("extreme support is nonempty");
        if step > Rational::one() {
            return Err(Error::Internal(format!("peeling step {step} exceeds 1")));
        }
        weights.push(&remaining * &step);
        components.push(extreme.clone());
        if step.is_one() {
            break;
        }
        let scale = Rational::one() - &step;
        for (a, e) in extreme.pi() {
            let v = residual.get_mut(a).expect("extreme support lies in residual");
            *v -= &step * e;
        }
        residual.retain(|_, v| !v.is_zero());
        for v in residual.values_mut() {
            *v /= &scale;
        }
        remaining *= scale;
    }
    Mixture::new(weights, components)
}

/// Exact convex combination of the mixture's (extreme) components.
pub fn recombine(mixture: &Mixture) -> CarMechanism {
    mix(mixture)
}

/// Recombines raw parts, validating the weights first.
pub fn recombine_parts(weights: Vec<Rational>, components: Vec<CarMechanism>) -> Result<CarMechanism> {
    Ok(mix(&Mixture::new(weights, components)?))
}

fn exact(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::InvalidArgument(format!("{v} is not finite")))
}

/// Largest `|π_A - π'_A|` over the union of both supports, exactly.
pub fn sup_distance(values: &BTreeMap<Subset, f64>, car: &CarMechanism) -> Result<Rational> {
    let mut worst = Rational::zero();
    for a in values.keys().chain(car.pi().keys()) {
        let v = exact(values.get(a).copied().unwrap_or(0.0))?;
        let d = (v - car.prob(a)).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

const MAX_DOUBLINGS: u32 = 64;

/// A rational CAR mechanism within sup-distance `epsilon` of `values`.
///
/// The input must satisfy each element's unit row sum to within
/// `epsilon / (4n)` and lie in `[0, 1]`. Probabilities are rounded onto the
/// grid `1/k` (`k` a power of two with `1/k < epsilon / (2n)`), each element's
/// rounding deficit is absorbed by its singleton, and `k` is doubled whenever
/// that repair or the final distance check fails.
pub fn approximate_rational(space: SampleSpace, values: &BTreeMap<Subset, f64>, epsilon: f64) -> Result<CarMechanism> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = space.size();
    for (a, v) in values {
        space.check(a)?;
        if !(0.0..=1.0).contains(v) {
            return Err(Error::InvalidArgument(format!("π{a} = {v} is outside [0, 1]")));
        }
    }
    let tolerance = exact(epsilon)? / Rational::from_integer(BigInt::from(4 * n));
    for x in 0..n {
        let sum: Rational =
            values.iter().filter(|(a, _)| a.contains(x)).map(|(_, v)| exact(*v)).sum::<Result<Rational>>()?;
        if (sum.clone() - Rational::one()).abs() > tolerance {
            return Err(Error::InvalidMechanism(format!(
                "row sum at x = {x} is {}, further than epsilon/(4n) from 1",
                sum.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }
    let eps = exact(epsilon)?;
    let grid = eps / Rational::from_integer(BigInt::from(2 * n));
    let mut k = BigInt::one();
    while Rational::new(BigInt::one(), k.clone()) >= grid {
        k *= 2;
    }
    for _ in 0..MAX_DOUBLINGS {
        if let Some(car) = round_and_repair(space, values, &k)? {
            if sup_distance(values, &car)? < exact(epsilon)? {
                return Ok(car);
            }
        }
        k *= 2;
    }
    Err(Error::Internal("rational approximation did not converge".into()))
}

fn round_and_repair(space: SampleSpace, values: &BTreeMap<Subset, f64>, k: &BigInt) -> Result<Option<CarMechanism>> {
    let kf = Rational::from_integer(k.clone());
    let mut mults: BTreeMap<Subset, BigInt> = BTreeMap::new();
    for (a, v) in values {
        let m = (exact(*v)? * &kf).round().to_integer();
        if !m.is_zero() {
            mults.insert(*a, m);
        }
    }
    let deficit = |mults: &BTreeMap<Subset, BigInt>, x: usize| -> BigInt {
        k - mults.iter().filter(|(a, _)| a.contains(x)).map(|(_, m)| m).sum::<BigInt>()
    };
    // each decrement removes one unit of total mass, so this bounds the loop
    let mut budget: BigInt = mults.values().sum::<BigInt>() + BigInt::from(space.size());
    let mut x = 0;
    while x < space.size() {
        let d = deficit(&mults, x);
        if d.is_zero() {
            x += 1;
            continue;
        }
        let single = Subset::singleton(x);
        let current = mults.get(&single).cloned().unwrap_or_else(BigInt::zero);
        if !(&current + &d).is_negative() {
            mults.insert(single, current + d);
            x += 1;
            continue;
        }
        if !budget.is_positive() {
            return Ok(None);
        }
        budget -= 1;
        let Some((&largest, _)) = mults
            .iter()
            .filter(|(a, m)| a.contains(x) && m.is_positive())
            .max_by(|l, r| l.1.cmp(r.1).then_with(|| r.0.cmp(l.0)))
        else {
            return Ok(None);
        };
        *mults.get_mut(&largest).expect("present") -= 1;
        // other members of the decremented set now need another pass
        x = 0;
    }
    mults.retain(|_, m| !m.is_zero());
    let height = k.to_biguint().expect("positive");
    let mc = UniformMulticover::new(
        space,
        height,
        mults.into_iter().map(|(a, m)| (a, m.to_biguint().expect("repair keeps multiplicities non-negative"))),
    )?;
    from_multicover(&mc).map(Some)
}

pub fn float_values(entries: impl IntoIterator<Item = (Subset, f64)>) -> BTreeMap<Subset, f64> {
    entries.into_iter().collect()
}
