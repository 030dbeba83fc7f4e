//! Exact integer linear algebra over `Z`.
//!
//! Everything here works on [`BigInt`] entries. Determinants use Bareiss
//! fraction-free elimination, and the Smith normal form is computed by
//! repeated pivoting on the smallest nonzero entry. Both stay exact at any
//! size, which matters because intermediate values of an elimination can
//! overflow machine words long before the inputs do.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column")]
    EmptyShape,
    #[error("expected {expected} entries for the given shape, got {actual}")]
    EntryCount { expected: usize, actual: usize },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("empty vector list")]
    EmptyList,
    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),
}

/// Convenience: lift a slice of machine integers into `Z^k`.
pub fn zvec(values: &[i64]) -> Vec<BigInt> {
    values.iter().map(|&x| BigInt::from(x)).collect()
}

/// Dense integer matrix stored in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyShape);
        }
        if entries.len() != rows * cols {
            return Err(LinalgError::EntryCount {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Stacks the given vectors as the rows of a matrix.
    pub fn from_rows(rows: &[Vec<BigInt>]) -> Result<Self, LinalgError> {
        let first = rows.first().ok_or(LinalgError::EmptyShape)?;
        let cols = first.len();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinalgError::LengthMismatch {
                    expected: cols,
                    actual: row.len(),
                });
            }
            entries.extend(row.iter().cloned());
        }
        Self::new(rows.len(), cols, entries)
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self, LinalgError> {
        let rows: Vec<Vec<BigInt>> = rows.iter().map(|r| zvec(r)).collect();
        Self::from_rows(&rows)
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![BigInt::zero(); size * size];
        for i in 0..size {
            entries[i * size + i] = BigInt::one();
        }
        Self {
            rows: size,
            cols: size,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.cols + col]
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn row(&self, row: usize) -> &[BigInt] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).clone());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::LengthMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = BigInt::zero();
                for t in 0..self.cols {
                    acc += self.get(r, t) * other.get(t, c);
                }
                entries.push(acc);
            }
        }
        IntMatrix::new(self.rows, other.cols, entries)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|r| self.row(r)))
            .finish()
    }
}

/// Exact determinant by Bareiss elimination.
pub fn determinant(m: &IntMatrix) -> Result<BigInt, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let mut a = m.to_rows();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    negate = !negate;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                // Bareiss: the division is exact.
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if negate { -det } else { det })
}

/// Invariant factors `d_1 | d_2 | ... | d_r` of `m`, with `r` its rank.
///
/// Pivoting always picks the smallest-magnitude nonzero entry of the active
/// submatrix, ties broken by row-major position, so intermediate states are
/// reproducible.
pub fn smith_normal_form(m: &IntMatrix) -> Vec<BigInt> {
    let rows = m.rows;
    let cols = m.cols;
    let mut a = m.to_rows();
    let mut factors = Vec::new();

    for t in 0..rows.min(cols) {
        loop {
            let Some((pr, pc)) = smallest_pivot(&a, t) else {
                return factors;
            };
            a.swap(t, pr);
            for row in a.iter_mut() {
                row.swap(t, pc);
            }

            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = &a[i][t] / &a[t][t];
                for j in t..cols {
                    let delta = &q * &a[t][j];
                    a[i][j] -= delta;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = &a[t][j] / &a[t][t];
                for row in a.iter_mut().skip(t) {
                    let delta = &q * &row[t];
                    row[j] -= delta;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }

            // Pivot must divide the rest of the active block.
            let offender =
                (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match offender {
                Some(i) => {
                    for j in t..cols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => {
                    factors.push(a[t][t].abs());
                    break;
                }
            }
        }
    }
    factors
}

fn smallest_pivot(a: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, x) in row.iter().enumerate().skip(t) {
            if x.is_zero() {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, bj)) => x.abs() < a[bi][bj].abs(),
            };
            if better {
                best = Some((i, j));
            }
        }
    }
    best
}

fn check_lengths(vectors: &[Vec<BigInt>], k: usize) -> Result<(), LinalgError> {
    for v in vectors {
        if v.len() != k {
            return Err(LinalgError::LengthMismatch {
                expected: k,
                actual: v.len(),
            });
        }
    }
    Ok(())
}

/// True iff `vectors` is a `Z`-basis of `Z^k`.
pub fn is_unimodular_basis(vectors: &[Vec<BigInt>], k: usize) -> Result<bool, LinalgError> {
    check_lengths(vectors, k)?;
    if vectors.len() != k || k == 0 {
        return Ok(false);
    }
    let det = determinant(&IntMatrix::from_rows(vectors)?)?;
    Ok(det.abs().is_one())
}

/// True iff the vectors span a direct summand of `Z^k` of rank equal to
/// their count, i.e. every invariant factor of the stacked matrix is 1.
pub fn is_direct_summand(vectors: &[Vec<BigInt>], k: usize) -> Result<bool, LinalgError> {
    if vectors.is_empty() {
        return Err(LinalgError::EmptyList);
    }
    check_lengths(vectors, k)?;
    if vectors.len() > k {
        return Ok(false);
    }
    let factors = smith_normal_form(&IntMatrix::from_rows(vectors)?);
    Ok(factors.len() == vectors.len() && factors.iter().all(|d| d.is_one()))
}

pub fn apply_matrix(m: &IntMatrix, v: &[BigInt]) -> Result<Vec<BigInt>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if v.len() != m.cols {
        return Err(LinalgError::LengthMismatch {
            expected: m.cols,
            actual: v.len(),
        });
    }
    Ok((0..m.rows)
        .map(|r| m.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect())
}

/// Inverse of a matrix with determinant ±1, from its adjugate.
/// Returns `None` when `|det| != 1`.
pub fn unimodular_inverse(m: &IntMatrix) -> Result<Option<IntMatrix>, LinalgError> {
    let det = determinant(m)?;
    if !det.abs().is_one() {
        return Ok(None);
    }
    let n = m.rows;
    if n == 1 {
        return Ok(Some(IntMatrix::new(1, 1, vec![det])?));
    }
    let mut entries = vec![BigInt::zero(); n * n];
    for r in 0..n {
        for c in 0..n {
            let minor: Vec<BigInt> = (0..n)
                .filter(|&i| i != r)
                .flat_map(|i| (0..n).filter(move |&j| j != c).map(move |j| (i, j)))
                .map(|(i, j)| m.get(i, j).clone())
                .collect();
            let cof = determinant(&IntMatrix::new(n - 1, n - 1, minor)?)?;
            let cof = if (r + c) % 2 == 1 { -cof } else { cof };
            // adj(m)[c][r] = cofactor(r, c); inverse = adj / det with det = ±1
            entries[c * n + r] = cof * &det;
        }
    }
    Ok(Some(IntMatrix::new(n, n, entries)?))
}

/// A bijection on `{0, ..., m}` given by its list of images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, LinalgError> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x >= images.len() || seen[x] {
                return Err(LinalgError::NotAPermutation(images));
            }
            seen[x] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(len: usize) -> Self {
        Self {
            images: (0..len).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, LinalgError> {
        if self.len() != other.len() {
            return Err(LinalgError::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Permutation { images }
    }
}

/// Parity of a permutation, via its cycle decomposition.
pub fn permutation_sign(p: &Permutation) -> i8 {
    let mut seen = vec![false; p.len()];
    let mut transpositions = 0usize;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p.apply(i);
            len += 1;
        }
        transpositions += len - 1;
    }
    if transpositions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}
