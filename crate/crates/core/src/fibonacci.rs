//! The matrices `S_n` whose unit systems have Fibonacci-valued solutions,
//! witnessing extreme multicovers of height `F_n`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::One;

use crate::error::{Error, Result};
use crate::extremes::is_extreme;
use crate::linalg::{solve_unit, IncidenceSystem, SolveOutcome};
use crate::model::CarMechanism;
use crate::multicover::to_multicover;
use crate::rational::Rational;
use crate::subset::{SampleSpace, Subset};

pub const DEFAULT_MAX_N: usize = 25;

/// Memoized Fibonacci numbers, `F_1 = F_2 = 1`.
#[derive(Debug, Clone, Default)]
pub struct FibSequence {
    memo: Vec<BigUint>,
}

impl FibSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, j: usize) -> Result<BigUint> {
        if j == 0 {
            return Err(Error::InvalidArgument("Fibonacci numbers are indexed from 1".into()));
        }
        while self.memo.len() < j {
            let next = match self.memo.len() {
                0 | 1 => BigUint::one(),
                l => &self.memo[l - 1] + &self.memo[l - 2],
            };
            self.memo.push(next);
        }
        Ok(self.memo[j - 1].clone())
    }
}

pub fn fib(j: usize) -> Result<BigUint> {
    FibSequence::new().get(j)
}

/// Square symmetric 0/1 matrix built by alternately prepending an isolated
/// `1` (after odd sizes) and a bordering row/column of ones with a `0`
/// corner (after even sizes). Row 0 is the outermost border.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnMatrix {
    rows: Vec<Vec<u8>>,
}

impl SnMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| self.rows[i][j] == self.rows[j][i]))
    }

    /// Column `j` as the subset `{x : S[x][j] = 1}`, columns in index order.
    pub fn to_incidence(&self) -> IncidenceSystem {
        let space = SampleSpace::new(self.n()).expect("n ≥ 1 and bounded at construction");
        let cols = (0..self.n())
            .map(|j| {
                Subset::from_members((0..self.n()).filter(|&x| self.rows[x][j] == 1))
                    .expect("every column of S_n is nonzero")
            })
            .collect();
        IncidenceSystem::new(space, cols).expect("S_n columns are distinct and cover every row")
    }
}

impl fmt::Display for SnMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            write!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

pub fn build_s(n: usize) -> Result<SnMatrix> {
    SampleSpace::new(n)?;
    let mut rows = vec![vec![1u8]];
    for size in 1..n {
        let (corner, border) = if size % 2 == 1 { (1, 0) } else { (0, 1) };
        let mut next = Vec::with_capacity(size + 1);
        next.push(std::iter::once(corner).chain(std::iter::repeat_n(border, size)).collect());
        for row in rows {
            next.push(std::iter::once(border).chain(row).collect());
        }
        rows = next;
    }
    Ok(SnMatrix { rows })
}

fn require_odd(n: usize) -> Result<()> {
    if n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("n must be odd, got {n}")));
    }
    Ok(())
}

/// `(F_{n-1}/F_n, ..., F_1/F_n, 1/F_n)` for odd `n`.
pub fn theorem3_solution(n: usize) -> Result<Vec<Rational>> {
    require_odd(n)?;
    let mut fibs = FibSequence::new();
    let top = BigInt::from(fibs.get(n)?);
    let mut z = Vec::with_capacity(n);
    for i in (1..n).rev() {
        z.push(Rational::new(BigInt::from(fibs.get(i)?), top.clone()));
    }
    z.push(Rational::new(BigInt::one(), top));
    Ok(z)
}

/// Multiplicities `(F_{n-1}, ..., F_1, 1)` of the height-`F_n` multicover.
fn expected_multiplicities(n: usize, fibs: &mut FibSequence) -> Result<Vec<BigUint>> {
    let mut m: Vec<BigUint> = (1..n).rev().map(|i| fibs.get(i)).collect::<Result<_>>()?;
    m.push(BigUint::one());
    Ok(m)
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem3Report {
    pub n: usize,
    pub matrix: SnMatrix,
    pub expected_solution: Vec<Rational>,
    pub outcome: SolveOutcome,
    pub fib_n: BigUint,
    pub height: Option<BigUint>,
    /// Multiplicity of each column, in column order.
    pub multiplicities: Vec<BigUint>,
    pub symmetric: bool,
    pub solution_matches: bool,
    pub extreme: bool,
    pub height_is_fib: bool,
    pub multiplicities_match: bool,
    /// `F_n = Σ_{i=1}^{n-2} F_i + 1`.
    pub partial_sum_identity: bool,
    /// `F_n > 2^{(n-2)/2}`, checked as `4·F_n² > 2^n`.
    pub above_exponential: bool,
    pub within_factorial: bool,
}

impl Theorem3Report {
    pub fn checks(&self) -> [(&'static str, bool); 8] {
        [
            ("S_n is symmetric 0/1", self.symmetric),
            ("unique solution equals the Fibonacci vector", self.solution_matches),
            ("solution is an extreme CAR mechanism", self.extreme),
            ("multicover height equals F_n", self.height_is_fib),
            ("multiplicities are (F_{n-1}, ..., F_1, 1)", self.multiplicities_match),
            ("F_n = F_1 + ... + F_{n-2} + 1", self.partial_sum_identity),
            ("F_n > 2^((n-2)/2)", self.above_exponential),
            ("F_n <= n!", self.within_factorial),
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|(_, ok)| *ok)
    }
}

/// Solves `S_n z = 1` and checks every claim about the result for odd `n`.
pub fn verify_theorem3(n: usize, max_n: usize) -> Result<Theorem3Report> {
    require_odd(n)?;
    if n > max_n {
        return Err(Error::BoundExceeded { n, bound: max_n });
    }
    let matrix = build_s(n)?;
    let sys = matrix.to_incidence();
    let expected_solution = theorem3_solution(n)?;
    let outcome = solve_unit(&sys);
    let mut fibs = FibSequence::new();
    let fib_n = fibs.get(n)?;

    let solution_matches = outcome == SolveOutcome::Unique(expected_solution.clone());
    let (mut extreme, mut height, mut multiplicities) = (false, None, Vec::new());
    if let SolveOutcome::Unique(z) = &outcome {
        let car = CarMechanism::new(sys.space(), sys.columns().iter().copied().zip(z.iter().cloned()));
        if let Ok(car) = car {
            extreme = is_extreme(&car).is_extreme();
            let mc = to_multicover(&car);
            multiplicities = sys.columns().iter().map(|c| mc.mult(c)).collect();
            height = Some(mc.height().clone());
        }
    }
    let height_is_fib = height.as_ref() == Some(&fib_n);
    let multiplicities_match = multiplicities == expected_multiplicities(n, &mut fibs)?;
    let partial: BigUint = (1..n.saturating_sub(1)).map(|i| fibs.get(i)).sum::<Result<BigUint>>()?;
    let partial_sum_identity = fib_n == partial + BigUint::one();
    let above_exponential = BigUint::from(4u32) * &fib_n * &fib_n > (BigUint::one() << n);
    let within_factorial = fib_n <= factorial(n);
    let symmetric = matrix.is_symmetric() && matrix.rows.iter().flatten().all(|v| *v <= 1);

    Ok(Theorem3Report {
        n,
        matrix,
        expected_solution,
        outcome,
        fib_n,
        height,
        multiplicities,
        symmetric,
        solution_matches,
        extreme,
        height_is_fib,
        multiplicities_match,
        partial_sum_identity,
        above_exponential,
        within_factorial,
    })
}
