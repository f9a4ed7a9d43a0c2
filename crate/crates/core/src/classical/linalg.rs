//! Dense GF(2) matrices of exponent parities and their left null space.

use super::relations::Relation;
use super::SieveError;

/// Fixed-length bit vector packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut row = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                row.set(i);
            }
        }
        row
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

/// A set of relations (a vector over the matrix rows) whose exponent
/// vectors sum to an all-even vector.
pub type Selection = BitRow;

/// Rows are relations, columns are factor-base primes, entries are exponent
/// parities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<BitRow>,
}

impl Gf2Matrix {
    pub fn new(cols: usize, rows: Vec<BitRow>) -> Result<Self, SieveError> {
        if rows.is_empty() {
            return Err(SieveError::EmptyMatrix);
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(SieveError::InconsistentFactorBase);
        }
        Ok(Self { cols, rows })
    }

    /// Builds from 0/1 entries, odd entries map to 1.
    pub fn from_entries(entries: &[Vec<u8>]) -> Result<Self, SieveError> {
        let cols = entries.first().map_or(0, Vec::len);
        let rows = entries
            .iter()
            .map(|row| BitRow::from_bits(&row.iter().map(|&v| v & 1 == 1).collect::<Vec<_>>()))
            .collect();
        Self::new(cols, rows)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows.len(), self.cols)
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].get(col)
    }

    /// `s · M` over GF(2).
    pub fn left_multiply(&self, selection: &Selection) -> BitRow {
        assert_eq!(
            selection.len(),
            self.rows.len(),
            "selection length must match row count"
        );
        let mut acc = BitRow::zeros(self.cols);
        for i in selection.ones() {
            acc.xor_assign(&self.rows[i]);
        }
        acc
    }
}

/// Row `i` is the exponent vector of relation `i` reduced mod 2.
pub fn build_gf2_matrix(relations: &[Relation]) -> Result<Gf2Matrix, SieveError> {
    let cols = relations
        .first()
        .ok_or(SieveError::EmptyMatrix)?
        .exponents
        .len();
    let rows = relations
        .iter()
        .map(|r| {
            if r.exponents.len() != cols {
                return Err(SieveError::InconsistentFactorBase);
            }
            let mut row = BitRow::zeros(cols);
            for (j, &e) in r.exponents.iter().enumerate() {
                if e % 2 == 1 {
                    row.set(j);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Gf2Matrix::new(cols, rows)
}

/// Basis of `{ s != 0 : s · M = 0 }`.
///
/// Gaussian elimination on the rows, each augmented with its own identity
/// row. Columns are processed left to right and the pivot is the
/// lowest-index unused row with that bit set. Rows never used as a pivot end
/// with a zero matrix part; their identity parts are returned in ascending
/// row order.
pub fn gf2_nullspace(m: &Gf2Matrix) -> Vec<Selection> {
    let (nrows, ncols) = m.dims();
    let mut work: Vec<(BitRow, BitRow)> = m
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut id = BitRow::zeros(nrows);
            id.set(i);
            (r.clone(), id)
        })
        .collect();
    let mut pivoted = vec![false; nrows];
    for col in 0..ncols {
        let Some(pivot) = (0..nrows).find(|&i| !pivoted[i] && work[i].0.get(col)) else {
            continue;
        };
        pivoted[pivot] = true;
        let (prow, pid) = work[pivot].clone();
        for (i, (row, id)) in work.iter_mut().enumerate() {
            if i != pivot && row.get(col) {
                row.xor_assign(&prow);
                id.xor_assign(&pid);
            }
        }
    }
    work.into_iter()
        .zip(pivoted)
        .filter(|&(_, p)| !p)
        .map(|((row, id), _)| {
            debug_assert!(row.is_zero());
            id
        })
        .collect()
}
