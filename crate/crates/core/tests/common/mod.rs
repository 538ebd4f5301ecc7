#![allow(dead_code)]

use std::path::PathBuf;

use car_core::extremes::{enumerate_extremes, EnumerationLimit};
use car_core::model::mix;
use car_core::multicover::to_multicover;
use car_core::{CarMechanism, Mixture, Rational, UniformMulticover};
use num_bigint::{BigInt, BigUint};
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn extremes(n: usize) -> Vec<CarMechanism> {
    enumerate_extremes(n, EnumerationLimit::default()).unwrap()
}

/// `count` positive rationals with random numerators and denominators,
/// normalized to sum to one.
pub fn random_weights<R: Rng>(rng: &mut R, count: usize) -> Vec<Rational> {
    let raw: Vec<Rational> = (0..count)
        .map(|_| Rational::new(BigInt::from(rng.gen_range(1..=40)), BigInt::from(rng.gen_range(1..=12))))
        .collect();
    let total: Rational = raw.iter().sum();
    raw.into_iter().map(|w| w / &total).collect()
}

/// A mixture of 1 to `max_parts` extremes drawn with replacement from `pool`.
pub fn random_mixture<R: Rng>(rng: &mut R, pool: &[CarMechanism], max_parts: usize) -> Mixture {
    let parts = rng.gen_range(1..=max_parts);
    let components: Vec<CarMechanism> = (0..parts).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
    Mixture::new(random_weights(rng, parts), components).unwrap()
}

pub fn random_car<R: Rng>(rng: &mut R, pool: &[CarMechanism]) -> CarMechanism {
    mix(&random_mixture(rng, pool, 5))
}

/// A possibly non-canonical multicover: the canonical one scaled by 1..=4.
pub fn random_multicover<R: Rng>(rng: &mut R, pool: &[CarMechanism]) -> UniformMulticover {
    let mc = to_multicover(&random_car(rng, pool));
    let g = BigUint::from(rng.gen_range(1u32..=4));
    UniformMulticover::new(mc.space(), mc.height() * &g, mc.mults().iter().map(|(a, m)| (*a, m * &g))).unwrap()
}
