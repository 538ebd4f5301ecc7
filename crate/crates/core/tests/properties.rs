mod common;

use car_core::decompose::{decompose, recombine};
use car_core::extremes::{check_car, is_extreme, CarCheck, EnumerationLimit};
use car_core::json;
use car_core::model::mix;
use car_core::multicover::{canonicalize, from_multicover, to_multicover, validate_multicover};
use car_core::rational::{format_rational, parse_rational};
use car_core::{Rational, SampleSpace, Subset};
use common::*;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pool(n: usize) -> Vec<car_core::CarMechanism> {
    thread_local! {
        static POOLS: Vec<Vec<car_core::CarMechanism>> = (1..=4).map(extremes).collect();
    }
    POOLS.with(|p| p[n - 1].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_text_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = Rational::new(BigInt::from(p), BigInt::from(q));
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn mixtures_stay_car(seed: u64, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let car = random_car(&mut rng, &pool(n));
        let one = Rational::from_integer(1.into());
        for x in 0..n {
            prop_assert_eq!(car.row_sum(x), one.clone());
        }
        match check_car(&car.to_coarsening()).unwrap() {
            CarCheck::Car(back) => prop_assert_eq!(back, car),
            CarCheck::NotCar(v) => prop_assert!(false, "{:?}", v),
        }
    }

    #[test]
    fn decompose_recombines(seed: u64, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let car = random_car(&mut rng, &pool(n));
        let parts = decompose(&car, EnumerationLimit::default()).unwrap();
        prop_assert!(parts.len() <= car.support().len());
        prop_assert!(parts.components().iter().all(|c| is_extreme(c).is_extreme()));
        prop_assert_eq!(recombine(&parts), car.clone());
        prop_assert_eq!(parts.len() == 1, is_extreme(&car).is_extreme());
    }

    #[test]
    fn multicover_conversions(seed: u64, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mc = random_multicover(&mut rng, &pool(n));
        prop_assert!(validate_multicover(&mc).is_ok());
        let car = from_multicover(&mc).unwrap();
        prop_assert_eq!(to_multicover(&car), canonicalize(&mc));
        prop_assert!(canonicalize(&mc).is_canonical());
        prop_assert_eq!(from_multicover(&canonicalize(&mc)).unwrap(), car);
    }

    #[test]
    fn json_round_trips(seed: u64, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mixture = random_mixture(&mut rng, &pool(n), 4);
        let car = mix(&mixture);
        prop_assert_eq!(json::car_from_json(&json::car_to_json(&car)).unwrap(), car.clone());
        let coarse = car.to_coarsening();
        prop_assert_eq!(json::coarsening_from_json(&json::coarsening_to_json(&coarse)).unwrap(), coarse);
        let mc = random_multicover(&mut rng, &pool(n));
        prop_assert_eq!(json::multicover_from_json(&json::multicover_to_json(&mc)).unwrap(), mc);
        prop_assert_eq!(json::mixture_from_json(&json::mixture_to_json(&mixture)).unwrap(), mixture);
    }

    #[test]
    fn subsets_round_trip_through_members(bits in 1u64..(1 << 20)) {
        let s = Subset::from_bits(bits).unwrap();
        prop_assert_eq!(Subset::from_members(s.members()).unwrap(), s);
        prop_assert!(SampleSpace::new(20).unwrap().contains(&s));
    }
}
