//! Exact linear algebra on 0/1 incidence systems.
//!
//! Elimination is fraction-free (Bareiss): every intermediate entry is a minor
//! of the original integer matrix, so growth stays polynomial in the bit size
//! and each division is exact. Rationals only appear in back-substitution.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::subset::{SampleSpace, Subset};

/// Incidence matrix of a cover: rows are elements, columns are subsets, entry
/// `(x, j)` is `1{x ∈ A_j}`.
///
/// Column order is preserved as given so that solutions line up with the
/// caller's indexing; [`IncidenceSystem::from_support`] produces canonical
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceSystem {
    space: SampleSpace,
    cols: Vec<Subset>,
}

impl IncidenceSystem {
    pub fn new(space: SampleSpace, cols: Vec<Subset>) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::InvalidSystem("no columns".into()));
        }
        let mut union = 0u64;
        for (i, c) in cols.iter().enumerate() {
            space.check(c)?;
            if cols[..i].contains(c) {
                return Err(Error::InvalidSystem(format!("column {c} appears twice")));
            }
            union |= c.bits();
        }
        if union != space.full_bits() {
            return Err(Error::InvalidSystem("columns do not cover every element".into()));
        }
        Ok(Self { space, cols })
    }

    /// System over the given subsets, sorted canonically.
    pub fn from_support(space: SampleSpace, support: impl IntoIterator<Item = Subset>) -> Result<Self> {
        let mut cols: Vec<Subset> = support.into_iter().collect();
        cols.sort();
        Self::new(space, cols)
    }

    pub fn space(&self) -> SampleSpace {
        self.space
    }

    pub fn rows(&self) -> usize {
        self.space.size()
    }

    pub fn columns(&self) -> &[Subset] {
        &self.cols
    }

    pub fn entry(&self, x: usize, j: usize) -> bool {
        self.cols[j].contains(x)
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.rows()).map(|x| (0..self.cols.len()).map(|j| u8::from(self.entry(x, j))).collect()).collect()
    }

    /// `[M | 1]` as integers.
    fn augmented(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows())
            .map(|x| {
                self.cols
                    .iter()
                    .map(|c| if c.contains(x) { BigInt::one() } else { BigInt::zero() })
                    .chain(std::iter::once(BigInt::one()))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Full column rank and consistent; `Mz = 1` holds exactly.
    Unique(Vec<Rational>),
    NoSolution,
    Underdetermined,
}

struct Echelon {
    rows: Vec<Vec<BigInt>>,
    /// `(row, column)` of each pivot, in elimination order.
    pivots: Vec<(usize, usize)>,
}

/// Bareiss elimination over the first `ncols` columns (all of them if the
/// matrix is augmented and the caller wants the consistency pivot too).
/// Pivot: first nonzero row at or below the current one, columns in order.
fn eliminate(mut a: Vec<Vec<BigInt>>, ncols: usize) -> Echelon {
    let nrows = a.len();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let width = a[r].len();
        for i in r + 1..nrows {
            for j in c + 1..width {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push((r, c));
        r += 1;
    }
    Echelon { rows: a, pivots }
}

pub fn column_rank(sys: &IncidenceSystem) -> usize {
    let m = sys.cols.len();
    eliminate(sys.augmented(), m).pivots.len()
}

/// Solves `Mz = 1` exactly.
pub fn solve_unit(sys: &IncidenceSystem) -> SolveOutcome {
    let m = sys.cols.len();
    let ech = eliminate(sys.augmented(), m + 1);
    if ech.pivots.iter().any(|&(_, c)| c == m) {
        return SolveOutcome::NoSolution;
    }
    if ech.pivots.len() < m {
        return SolveOutcome::Underdetermined;
    }
    // Square upper-triangular in the first m pivot rows, pivot (i, i).
    let mut z = vec![Rational::zero(); m];
    for &(r, c) in ech.pivots.iter().rev() {
        let row = &ech.rows[r];
        let mut acc = Rational::from_integer(row[m].clone());
        for (j, zj) in z.iter().enumerate().skip(c + 1) {
            if !row[j].is_zero() {
                acc -= Rational::from_integer(row[j].clone()) * zj;
            }
        }
        z[c] = acc / Rational::from_integer(row[c].clone());
    }
    SolveOutcome::Unique(z)
}

/// `Mz` for a candidate vector, row by row.
pub fn apply(sys: &IncidenceSystem, z: &[Rational]) -> Vec<Rational> {
    (0..sys.rows()).map(|x| sys.cols.iter().zip(z).filter(|(c, _)| c.contains(x)).map(|(_, v)| v).sum()).collect()
}
