//! Independent brute force for covers and extreme CAR mechanisms.
//!
//! Deliberately shares no code with the library beyond the public types used
//! to compare answers: covers come from scanning every family of nonempty
//! subsets as a bitmask, and extremality is decided by plain Gauss-Jordan
//! elimination over i128 fractions.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeSet;

use car_core::extremes::{enumerate_covers, enumerate_extremes, is_extreme, EnumerationLimit};
use car_core::Subset;

#[derive(Clone, Copy, PartialEq, Debug)]
struct Frac(i128, i128);

impl Frac {
    fn new(p: i128, q: i128) -> Self {
        let g = gcd(p.abs(), q.abs()).max(1);
        let s = if q < 0 { -1 } else { 1 };
        Frac(s * p / g, s * q / g)
    }
    fn is_zero(self) -> bool {
        self.0 == 0
    }
    fn sub(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 - o.0 * self.1, self.1 * o.1)
    }
    fn mul(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.0, self.1 * o.1)
    }
    fn div(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1, self.1 * o.0)
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Unique solution of M z = 1 for the given columns, if there is one.
fn unique_solution(n: usize, cols: &[u64]) -> Option<Vec<Frac>> {
    let m = cols.len();
    let mut a: Vec<Vec<Frac>> = (0..n)
        .map(|x| {
            let mut row: Vec<Frac> = cols.iter().map(|c| Frac::new((c >> x & 1) as i128, 1)).collect();
            row.push(Frac::new(1, 1));
            row
        })
        .collect();
    let mut r = 0;
    for c in 0..m {
        let p = (r..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(r, p);
        let piv = a[r][c];
        for j in 0..=m {
            a[r][j] = a[r][j].div(piv);
        }
        for i in 0..n {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c];
                for j in 0..=m {
                    a[i][j] = a[i][j].sub(f.mul(a[r][j]));
                }
            }
        }
        r += 1;
    }
    if (r..n).any(|i| !a[i][m].is_zero()) {
        return None;
    }
    Some((0..m).map(|i| a[i][m]).collect())
}

/// Every family of nonempty subsets of {0..n} whose union is everything.
fn brute_covers(n: usize) -> Vec<Vec<u64>> {
    let subsets: Vec<u64> = (1..1u64 << n).collect();
    let full = (1u64 << n) - 1;
    let mut out = Vec::new();
    for family in 1u64..1 << subsets.len() {
        let cols: Vec<u64> = (0..subsets.len()).filter(|i| family >> i & 1 == 1).map(|i| subsets[i]).collect();
        if cols.iter().fold(0, |u, c| u | c) == full {
            out.push(cols);
        }
    }
    out
}

fn brute_extremes(n: usize) -> BTreeSet<Vec<(u64, Frac)>> {
    let mut out = BTreeSet::new();
    for cols in brute_covers(n) {
        if let Some(z) = unique_solution(n, &cols) {
            if z.iter().all(|v| v.0 > 0) {
                let mut pi: Vec<(u64, Frac)> = cols.iter().copied().zip(z).collect();
                pi.sort_by_key(|(c, _)| *c);
                out.insert(pi);
            }
        }
    }
    out
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Eq for Frac {}
impl Ord for Frac {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (self.0 * o.1).cmp(&(o.0 * self.1))
    }
}

fn library_extremes(n: usize) -> BTreeSet<Vec<(u64, Frac)>> {
    let all = enumerate_extremes(n, EnumerationLimit::default()).unwrap();
    let mut out = BTreeSet::new();
    for car in &all {
        assert!(is_extreme(car).is_extreme());
        assert!(car.support().len() <= n);
        let mut pi: Vec<(u64, Frac)> = car
            .pi()
            .iter()
            .map(|(a, p)| {
                let num: i128 = p.numer().try_into().unwrap();
                let den: i128 = p.denom().try_into().unwrap();
                (a.bits(), Frac::new(num, den))
            })
            .collect();
        pi.sort_by_key(|(c, _)| *c);
        assert!(out.insert(pi), "duplicate vertex {car}");
    }
    out
}

#[test]
fn brute_force_counts() {
    let counts: Vec<usize> = (1..=4).map(|n| brute_extremes(n).len()).collect();
    assert_eq!(&counts[..3], &[1, 2, 6]);
    println!("brute-force extreme counts for n = 1..4: {counts:?}");
}

#[test]
fn library_matches_brute_force() {
    for n in 1..=4 {
        assert_eq!(library_extremes(n), brute_extremes(n), "n = {n}");
    }
}

#[test]
fn cover_enumeration_matches_brute_force() {
    for n in 1..=3 {
        let expected: BTreeSet<Vec<u64>> = brute_covers(n)
            .into_iter()
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        let found: Vec<Vec<u64>> = enumerate_covers(n, (1 << n) - 1, EnumerationLimit::default())
            .unwrap()
            .map(|c| {
                let mut v: Vec<u64> = c.iter().map(Subset::bits).collect();
                v.sort();
                v
            })
            .collect();
        assert_eq!(found.len(), expected.len(), "n = {n}");
        assert_eq!(found.into_iter().collect::<BTreeSet<_>>(), expected);
    }
}

#[test]
fn bounded_covers_never_exceed_n_sets_for_vertices() {
    // every brute-force vertex has at most n sets
    for n in 1..=4 {
        assert!(brute_extremes(n).iter().all(|pi| pi.len() <= n));
    }
}
