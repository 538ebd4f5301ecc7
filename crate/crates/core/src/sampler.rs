//! The multicover sampling procedure: pick a multicover with probability
//! `λ_j` independently of `x`, then one of the `k_j` sets containing `x`
//! uniformly (counting multiplicity).
//!
//! Every draw is exact: rational weights are put on a common integer
//! denominator `D`, a uniform integer in `[0, D)` is drawn and matched against
//! cumulative integer weights. The generator is ChaCha8 (`rand_chacha`),
//! seeded with `seed_from_u64`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{validate_coarsening, CarMechanism, CoarseningMechanism, Mixture};
use crate::multicover::{to_multicover, validate_multicover, UniformMulticover};
use crate::rational::{lcm_denominators, scale_to_integer, Rational};
use crate::subset::{SampleSpace, Subset};

pub const DEFAULT_Z: f64 = 4.0;
pub const MIN_RECORDS_PER_ELEMENT: u64 = 1000;

pub type SamplerRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SamplerRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_weights(weights: &[Rational], what: &str) -> Result<()> {
    if weights.iter().any(Signed::is_negative) {
        return Err(Error::InvalidArgument(format!("{what} has a negative entry")));
    }
    let total: Rational = weights.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidArgument(format!("{what} sums to {total}, expected 1")));
    }
    Ok(())
}

/// Weights `λ` over uniform multicovers `C_1..C_p` of one space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProceduralModel {
    weights: Vec<Rational>,
    covers: Vec<UniformMulticover>,
}

impl ProceduralModel {
    pub fn new(weights: Vec<Rational>, covers: Vec<UniformMulticover>) -> Result<Self> {
        if covers.is_empty() || weights.len() != covers.len() {
            return Err(Error::InvalidArgument(format!(
                "model needs one weight per multicover (got {} weights, {} multicovers)",
                weights.len(),
                covers.len()
            )));
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidArgument("model weights must be positive".into()));
        }
        check_weights(&weights, "model weights")?;
        let space = covers[0].space();
        for c in &covers {
            if c.space() != space {
                return Err(Error::SpaceMismatch { expected: space.size(), found: c.space().size() });
            }
            let report = validate_multicover(c);
            if !report.is_ok() {
                return Err(Error::InvalidMulticover(format!("component is not a uniform {}-cover", c.height())));
            }
        }
        Ok(Self { weights, covers })
    }

    /// Each component replaced by its canonical multicover.
    pub fn from_mixture(mixture: &Mixture) -> Self {
        Self { weights: mixture.weights().to_vec(), covers: mixture.components().iter().map(to_multicover).collect() }
    }

    pub fn space(&self) -> SampleSpace {
        self.covers[0].space()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn covers(&self) -> &[UniformMulticover] {
        &self.covers
    }
}

/// Nature's law on `E`; elements may have probability zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatureDistribution {
    probs: Vec<Rational>,
}

impl NatureDistribution {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        SampleSpace::new(probs.len())?;
        check_weights(&probs, "nature distribution")?;
        Ok(Self { probs })
    }

    pub fn uniform(space: SampleSpace) -> Self {
        let p = Rational::new(BigInt::one(), BigInt::from(space.size()));
        Self { probs: vec![p; space.size()] }
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn space(&self) -> SampleSpace {
        SampleSpace::new(self.probs.len()).expect("validated on construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleRecord {
    pub x: usize,
    pub set: Subset,
    /// Index of the multicover that produced the observation.
    pub component: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub component: usize,
    pub set: Subset,
}

/// Finite distribution with integer weights, sampled by inverse CDF on a
/// uniform integer.
#[derive(Debug, Clone)]
struct IntegerDistribution<T> {
    outcomes: Vec<T>,
    weights: Vec<BigUint>,
    cumulative: Vec<BigUint>,
    total: BigUint,
}

impl<T: Copy> IntegerDistribution<T> {
    fn from_weights(items: impl IntoIterator<Item = (T, BigUint)>) -> Self {
        let mut outcomes = Vec::new();
        let mut weights = Vec::new();
        let mut cumulative = Vec::new();
        let mut total = BigUint::zero();
        for (t, w) in items {
            if w.is_zero() {
                continue;
            }
            total += &w;
            outcomes.push(t);
            weights.push(w);
            cumulative.push(total.clone());
        }
        assert!(!total.is_zero(), "distribution needs positive mass");
        Self { outcomes, weights, cumulative, total }
    }

    fn from_rationals(items: &[(T, Rational)]) -> Self {
        let denom = lcm_denominators(items.iter().map(|(_, r)| r));
        Self::from_weights(items.iter().map(|(t, r)| (*t, scale_to_integer(r, &denom).expect("non-negative weight"))))
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u = rng.gen_biguint_below(&self.total);
        let i = self.cumulative.partition_point(|c| *c <= u);
        self.outcomes[i]
    }

    fn probabilities(&self) -> impl Iterator<Item = (T, Rational)> + '_ {
        let total = BigInt::from(self.total.clone());
        self.outcomes
            .iter()
            .zip(&self.weights)
            .map(move |(t, w)| (*t, Rational::new(BigInt::from(w.clone()), total.clone())))
    }
}

/// Precomputed integer tables for repeated draws from one model.
#[derive(Debug, Clone)]
pub struct Sampler {
    space: SampleSpace,
    selector: IntegerDistribution<usize>,
    /// `within[j][x]`: sets of `C_j` containing `x`, weighted by multiplicity.
    within: Vec<Vec<IntegerDistribution<Subset>>>,
}

impl Sampler {
    pub fn new(model: &ProceduralModel) -> Self {
        let space = model.space();
        let selector =
            IntegerDistribution::from_rationals(&model.weights.iter().cloned().enumerate().collect::<Vec<_>>());
        let within = model
            .covers
            .iter()
            .map(|c| {
                (0..space.size())
                    .map(|x| {
                        IntegerDistribution::from_weights(
                            c.mults().iter().filter(|(a, _)| a.contains(x)).map(|(a, m)| (*a, m.clone())),
                        )
                    })
                    .collect()
            })
            .collect();
        Self { space, selector, within }
    }

    pub fn sample_observation<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Observation {
        let component = self.selector.sample(rng);
        let set = self.within[component][x].sample(rng);
        Observation { component, set }
    }

    /// `P(A | x) = Σ_j λ_j · n_A^{(j)} / k_j`, read off the sampling tables.
    pub fn observation_law(&self) -> CoarseningMechanism {
        let mut entries: BTreeMap<(usize, Subset), Rational> = BTreeMap::new();
        for (j, lambda) in self.selector.probabilities() {
            for (x, dist) in self.within[j].iter().enumerate() {
                for (a, p) in dist.probabilities() {
                    *entries.entry((x, a)).or_insert_with(Rational::zero) += &lambda * p;
                }
            }
        }
        CoarseningMechanism::new(self.space, entries.into_iter().map(|((x, a), p)| (x, a, p)))
            .expect("entries come from the model's own space")
    }
}

pub fn sample_observation<R: Rng + ?Sized>(model: &ProceduralModel, x: usize, rng: &mut R) -> Result<Observation> {
    if x >= model.space().size() {
        return Err(Error::InvalidArgument(format!("element {x} out of range")));
    }
    Ok(Sampler::new(model).sample_observation(x, rng))
}

pub fn observation_law(model: &ProceduralModel) -> CoarseningMechanism {
    Sampler::new(model).observation_law()
}

fn nature_sampler(nature: &NatureDistribution) -> IntegerDistribution<usize> {
    IntegerDistribution::from_rationals(&nature.probs.iter().cloned().enumerate().collect::<Vec<_>>())
}

/// `count` i.i.d. records; identical arguments give identical output.
pub fn simulate(
    model: &ProceduralModel,
    nature: &NatureDistribution,
    count: usize,
    seed: u64,
) -> Result<Vec<SampleRecord>> {
    let space = model.space();
    if nature.probs.len() != space.size() {
        return Err(Error::SpaceMismatch { expected: space.size(), found: nature.probs.len() });
    }
    let sampler = Sampler::new(model);
    let xs = nature_sampler(nature);
    let mut rng = rng_from_seed(seed);
    Ok((0..count)
        .map(|_| {
            let x = xs.sample(&mut rng);
            let obs = sampler.sample_observation(x, &mut rng);
            SampleRecord { x, set: obs.set, component: obs.component }
        })
        .collect())
}

/// Draws from an arbitrary (possibly non-CAR) coarsening mechanism; every
/// record has component 0.
pub fn simulate_coarsening(
    mech: &CoarseningMechanism,
    nature: &NatureDistribution,
    count: usize,
    seed: u64,
) -> Result<Vec<SampleRecord>> {
    let space = mech.space();
    if nature.probs.len() != space.size() {
        return Err(Error::SpaceMismatch { expected: space.size(), found: nature.probs.len() });
    }
    if !validate_coarsening(mech).is_ok() {
        return Err(Error::InvalidMechanism("coarsening mechanism does not validate".into()));
    }
    let rows: Vec<IntegerDistribution<Subset>> = (0..space.size())
        .map(|x| {
            let items: Vec<(Subset, Rational)> =
                mech.entries().iter().filter(|((y, _), _)| *y == x).map(|((_, a), p)| (*a, p.clone())).collect();
            IntegerDistribution::from_rationals(&items)
        })
        .collect();
    let xs = nature_sampler(nature);
    let mut rng = rng_from_seed(seed);
    Ok((0..count)
        .map(|_| {
            let x = xs.sample(&mut rng);
            SampleRecord { x, set: rows[x].sample(&mut rng), component: 0 }
        })
        .collect())
}

/// Counts of `(x, A)` pairs; frequencies are `count(x, A) / count(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalMechanism {
    space: SampleSpace,
    counts: Vec<u64>,
    cells: BTreeMap<(usize, Subset), u64>,
}

impl EmpiricalMechanism {
    pub fn from_cells(space: SampleSpace, cells: impl IntoIterator<Item = ((usize, Subset), u64)>) -> Result<Self> {
        let mut counts = vec![0u64; space.size()];
        let mut map = BTreeMap::new();
        for ((x, a), c) in cells {
            if x >= space.size() || !a.contains(x) {
                return Err(Error::InvalidArgument(format!("cell (x = {x}, A = {a}) is not a valid observation")));
            }
            space.check(&a)?;
            if c > 0 {
                counts[x] += c;
                *map.entry((x, a)).or_insert(0) += c;
            }
        }
        Ok(Self { space, counts, cells: map })
    }

    pub fn space(&self) -> SampleSpace {
        self.space
    }

    pub fn count(&self, x: usize) -> u64 {
        self.counts[x]
    }

    pub fn cell(&self, x: usize, set: &Subset) -> u64 {
        self.cells.get(&(x, *set)).copied().unwrap_or(0)
    }

    pub fn cells(&self) -> &BTreeMap<(usize, Subset), u64> {
        &self.cells
    }

    /// `π̂_A^x`, or `None` if `x` was never observed.
    pub fn frequency(&self, x: usize, set: &Subset) -> Option<f64> {
        let n = self.counts[x];
        (n > 0).then(|| self.cell(x, set) as f64 / n as f64)
    }

    /// Elements that never occurred; their rows are absent from [`Self::frequencies`].
    pub fn unobserved(&self) -> Vec<usize> {
        (0..self.space.size()).filter(|&x| self.counts[x] == 0).collect()
    }

    pub fn frequencies(&self) -> BTreeMap<(usize, Subset), f64> {
        self.cells.iter().map(|((x, a), c)| ((*x, *a), *c as f64 / self.counts[*x] as f64)).collect()
    }
}

pub fn estimate_empirical(space: SampleSpace, records: &[SampleRecord]) -> Result<EmpiricalMechanism> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records".into()));
    }
    let mut cells: BTreeMap<(usize, Subset), u64> = BTreeMap::new();
    for r in records {
        *cells.entry((r.x, r.set)).or_insert(0) += 1;
    }
    EmpiricalMechanism::from_cells(space, cells)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellCheck {
    pub x: usize,
    pub set: Subset,
    pub expected: f64,
    pub observed: f64,
    pub count: u64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Two members of one set compared against each other.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementCheck {
    pub set: Subset,
    pub x: usize,
    pub other: usize,
    pub observed_x: f64,
    pub observed_other: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformanceReport {
    pub z: f64,
    pub cells: Vec<CellCheck>,
    pub agreement: Vec<AgreementCheck>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass) && self.agreement.iter().all(|a| a.pass)
    }

    pub fn failed_cells(&self) -> Vec<(usize, Subset)> {
        self.cells.iter().filter(|c| !c.pass).map(|c| (c.x, c.set)).collect()
    }
}

impl fmt::Display for ConformanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |p: bool| if p { "PASS" } else { "FAIL" };
        for c in &self.cells {
            writeln!(
                f,
                "{} cell x={} A={}: observed {:.6} expected {:.6} (|diff| {:.6}, bound {:.6}, n={})",
                mark(c.pass),
                c.x,
                c.set,
                c.observed,
                c.expected,
                (c.observed - c.expected).abs(),
                c.tolerance,
                c.count
            )?;
        }
        for a in &self.agreement {
            writeln!(
                f,
                "{} agree A={} x={} vs x={}: {:.6} vs {:.6} (bound {:.6})",
                mark(a.pass),
                a.set,
                a.x,
                a.other,
                a.observed_x,
                a.observed_other,
                a.tolerance
            )?;
        }
        write!(f, "{}", if self.passed() { "conformance: PASS" } else { "conformance: FAIL" })
    }
}

/// Compares each cell `π̂_A^x` with `π_A` at `z` binomial standard errors,
/// and every pair of members of each set with a pooled two-proportion bound.
pub fn car_conformance_test(
    empirical: &EmpiricalMechanism,
    expected: &CarMechanism,
    z: f64,
) -> Result<ConformanceReport> {
    let space = empirical.space;
    if expected.space() != space {
        return Err(Error::SpaceMismatch { expected: expected.space().size(), found: space.size() });
    }
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::InvalidArgument(format!("z threshold must be positive, got {z}")));
    }
    for x in 0..space.size() {
        let count = empirical.counts[x];
        if count < MIN_RECORDS_PER_ELEMENT {
            return Err(Error::UndersizedSample { x, count, required: MIN_RECORDS_PER_ELEMENT });
        }
    }
    let mut sets: BTreeSet<Subset> = expected.support();
    sets.extend(empirical.cells.keys().map(|(_, a)| *a));

    let mut cells = Vec::new();
    for x in 0..space.size() {
        let count = empirical.counts[x];
        for a in sets.iter().filter(|a| a.contains(x)) {
            let p = expected.prob(a).to_f64().unwrap_or(f64::NAN);
            let observed = empirical.cell(x, a) as f64 / count as f64;
            let tolerance = z * (p * (1.0 - p) / count as f64).sqrt();
            let pass = (observed - p).abs() <= tolerance;
            cells.push(CellCheck { x, set: *a, expected: p, observed, count, tolerance, pass });
        }
    }

    let mut agreement = Vec::new();
    for a in sets.iter().filter(|a| a.len() >= 2) {
        let members = a.to_vec();
        for (i, &x) in members.iter().enumerate() {
            for &other in &members[i + 1..] {
                let (c1, n1) = (empirical.cell(x, a) as f64, empirical.counts[x] as f64);
                let (c2, n2) = (empirical.cell(other, a) as f64, empirical.counts[other] as f64);
                let pooled = (c1 + c2) / (n1 + n2);
                let tolerance = z * (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
                let (observed_x, observed_other) = (c1 / n1, c2 / n2);
                let pass = (observed_x - observed_other).abs() <= tolerance;
                agreement.push(AgreementCheck { set: *a, x, other, observed_x, observed_other, tolerance, pass });
            }
        }
    }
    Ok(ConformanceReport { z, cells, agreement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mix, partition_car};
    use crate::multicover::from_multicover;
    use crate::rational::ratio;
    use crate::subset::set;

    fn space(n: usize) -> SampleSpace {
        SampleSpace::new(n).unwrap()
    }

    fn triangle_model() -> ProceduralModel {
        let c = UniformMulticover::new(
            space(3),
            BigUint::from(2u32),
            [set(&[0, 1]), set(&[1, 2]), set(&[0, 2])].map(|a| (a, BigUint::one())),
        )
        .unwrap();
        ProceduralModel::new(vec![ratio(1, 1)], vec![c]).unwrap()
    }

    fn partition_model(blocks: &[Subset], n: usize) -> ProceduralModel {
        let c = to_multicover(&partition_car(space(n), blocks).unwrap());
        ProceduralModel::new(vec![ratio(1, 1)], vec![c]).unwrap()
    }

    #[test]
    fn triangle_observation_law() {
        let law = observation_law(&triangle_model());
        assert_eq!(law.prob(1, &set(&[0, 1])), ratio(1, 2));
        assert_eq!(law.prob(1, &set(&[1, 2])), ratio(1, 2));
        assert_eq!(law.prob(1, &set(&[0, 2])), ratio(0, 1));
        let mut rng = rng_from_seed(7);
        for _ in 0..200 {
            let obs = sample_observation(&triangle_model(), 1, &mut rng).unwrap();
            assert!(obs.set == set(&[0, 1]) || obs.set == set(&[1, 2]));
        }
    }

    #[test]
    fn partition_model_is_deterministic() {
        let model = partition_model(&[set(&[0, 1]), set(&[2])], 3);
        let mut rng = rng_from_seed(1);
        for x in 0..3 {
            for _ in 0..20 {
                let block = if x == 2 { set(&[2]) } else { set(&[0, 1]) };
                assert_eq!(sample_observation(&model, x, &mut rng).unwrap().set, block);
            }
        }
    }

    #[test]
    fn two_partition_law() {
        let whole = to_multicover(&partition_car(space(3), &[set(&[0, 1, 2])]).unwrap());
        let singles = to_multicover(&partition_car(space(3), &[set(&[0]), set(&[1]), set(&[2])]).unwrap());
        let model = ProceduralModel::new(vec![ratio(1, 2), ratio(1, 2)], vec![whole, singles]).unwrap();
        let law = observation_law(&model);
        assert_eq!(law.prob(0, &set(&[0, 1, 2])), ratio(1, 2));
        assert_eq!(law.prob(0, &set(&[0])), ratio(1, 2));
        assert_eq!(law.entries().len(), 6);
    }

    #[test]
    fn marginal_law_matches_mixture() {
        let model = triangle_model();
        let law = observation_law(&model);
        let mixture = Mixture::new(
            model.weights().to_vec(),
            model.covers().iter().map(|c| from_multicover(c).unwrap()).collect(),
        )
        .unwrap();
        assert_eq!(law, mix(&mixture).to_coarsening());
    }

    #[test]
    fn simulate_edge_cases() {
        let nature = NatureDistribution::uniform(space(3));
        assert!(simulate(&triangle_model(), &nature, 0, 1).unwrap().is_empty());
        let a = simulate(&triangle_model(), &nature, 500, 42).unwrap();
        let b = simulate(&triangle_model(), &nature, 500, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate(&triangle_model(), &nature, 500, 43).unwrap());
        assert!(a.iter().all(|r| r.set.contains(r.x)));
        let wrong = NatureDistribution::uniform(space(2));
        assert!(simulate(&triangle_model(), &wrong, 1, 1).is_err());
    }

    #[test]
    fn empirical_estimates() {
        let single = estimate_empirical(space(2), &[SampleRecord { x: 0, set: set(&[0, 1]), component: 0 }]).unwrap();
        assert_eq!(single.frequency(0, &set(&[0, 1])), Some(1.0));
        assert_eq!(single.unobserved(), vec![1]);
        assert_eq!(single.frequencies().len(), 1);
        assert!(estimate_empirical(space(2), &[]).is_err());

        let model = partition_model(&[set(&[0, 1]), set(&[2])], 3);
        let records = simulate(&model, &NatureDistribution::uniform(space(3)), 300, 5).unwrap();
        let emp = estimate_empirical(space(3), &records).unwrap();
        for ((x, _), f) in emp.frequencies() {
            assert_eq!(f, 1.0, "x = {x}");
        }
    }

    #[test]
    fn exact_empirical_passes() {
        let t = from_multicover(&triangle_model().covers()[0]).unwrap();
        let cells: Vec<((usize, Subset), u64)> = t.to_coarsening().entries().keys().map(|k| (*k, 1000u64)).collect();
        let emp = EmpiricalMechanism::from_cells(space(3), cells).unwrap();
        let report = car_conformance_test(&emp, &t, DEFAULT_Z).unwrap();
        assert!(report.passed());
        assert_eq!(report.cells.len(), 6);
    }

    #[test]
    fn undersized_sample_is_an_error() {
        let t = from_multicover(&triangle_model().covers()[0]).unwrap();
        let records = simulate(&triangle_model(), &NatureDistribution::uniform(space(3)), 600, 3).unwrap();
        let emp = estimate_empirical(space(3), &records).unwrap();
        assert!(matches!(car_conformance_test(&emp, &t, 4.0), Err(Error::UndersizedSample { .. })));
    }

    #[test]
    fn nature_validation() {
        assert!(NatureDistribution::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(NatureDistribution::new(vec![]).is_err());
        assert!(NatureDistribution::new(vec![ratio(3, 2), ratio(-1, 2)]).is_err());
        assert!(NatureDistribution::new(vec![ratio(1, 1), ratio(0, 1)]).is_ok());
    }
}
