//! Exact linear algebra over the rationals.
//!
//! Every subspace is stored by the reduced row echelon form of a row basis,
//! which makes subspace equality a plain structural comparison.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(RationalMatrix { rows, cols, entries })
    }

    /// Builds a matrix from rows; `cols` fixes the width when there are no rows.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Ok(RationalMatrix {
            rows: n,
            cols,
            entries,
        })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>], cols: usize) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from(x)).collect())
                .collect(),
            cols,
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &RationalMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot stack {} columns on {} columns",
                other.cols, self.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(RationalMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(Rational::is_integer)
    }

    pub fn rank(&self) -> usize {
        rref(self).rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.row_vecs()).finish()
    }
}

/// Result of Gauss–Jordan elimination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: RationalMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Reduced row echelon form of `m`.
pub fn rref(m: &RationalMatrix) -> Rref {
    let mut r = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..r.cols {
        if row == r.rows {
            break;
        }
        let Some(p) = (row..r.rows).find(|&i| !r[(i, col)].is_zero()) else {
            continue;
        };
        r.swap_rows(row, p);
        let inv = r[(row, col)].recip();
        for j in col..r.cols {
            if !r[(row, j)].is_zero() {
                r[(row, j)] *= &inv;
            }
        }
        for i in 0..r.rows {
            if i == row || r[(i, col)].is_zero() {
                continue;
            }
            let factor = r[(i, col)].clone();
            for j in col..r.cols {
                if !r[(row, j)].is_zero() {
                    let delta = &factor * &r[(row, j)];
                    r[(i, j)] -= &delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    Rref {
        matrix: r,
        rank: row,
        pivots,
    }
}

/// A subspace of ℚ^n, held in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: RationalMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: RationalMatrix::zeros(0, ambient_dim),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: RationalMatrix::identity(ambient_dim),
        }
    }

    /// The row space of `rows`.
    pub fn row_space(rows: &RationalMatrix) -> Self {
        let Rref { matrix, rank, .. } = rref(rows);
        let basis = RationalMatrix {
            rows: rank,
            cols: matrix.cols,
            entries: matrix.entries[..rank * matrix.cols].to_vec(),
        };
        Subspace {
            ambient_dim: rows.cols(),
            basis,
        }
    }

    pub fn span(vectors: &[Vec<Rational>], ambient_dim: usize) -> Result<Self> {
        Ok(Self::row_space(&RationalMatrix::from_rows(
            vectors.to_vec(),
            ambient_dim,
        )?))
    }

    pub fn span_i64(vectors: &[Vec<i64>], ambient_dim: usize) -> Result<Self> {
        Ok(Self::row_space(&RationalMatrix::from_i64_rows(
            vectors,
            ambient_dim,
        )?))
    }

    /// Accepts a basis only if it is already canonical.
    pub fn from_canonical_basis(basis: RationalMatrix) -> Result<Self> {
        let s = Self::row_space(&basis);
        if s.basis != basis {
            return Err(Error::Precondition(
                "basis is not in reduced row echelon form without zero rows".into(),
            ));
        }
        Ok(s)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    /// Pivot column of each basis row.
    pub fn pivots(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|i| {
                self.basis
                    .row(i)
                    .iter()
                    .position(|x| !x.is_zero())
                    .expect("canonical basis has no zero rows")
            })
            .collect()
    }

    pub fn contains_vector(&self, v: &[Rational]) -> bool {
        if v.len() != self.ambient_dim {
            return false;
        }
        let mut residual = v.to_vec();
        for (i, p) in self.pivots().into_iter().enumerate() {
            let c = residual[p].clone();
            if c.is_zero() {
                continue;
            }
            for (r, b) in residual.iter_mut().zip(self.basis.row(i)) {
                if !b.is_zero() {
                    *r -= &(&c * b);
                }
            }
        }
        residual.iter().all(Rational::is_zero)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient_dim == other.ambient_dim
            && (0..self.dim()).all(|i| other.contains_vector(self.basis.row(i)))
    }

    /// Flattened basis entries, used for ordering.
    pub fn flat_basis(&self) -> &[Rational] {
        self.basis.entries()
    }

    /// Basis rows scaled to primitive integer vectors.
    pub fn integer_basis(&self) -> Vec<Vec<num_bigint::BigInt>> {
        use num_integer::Integer;
        use num_traits::{One, Signed, Zero};
        (0..self.dim())
            .map(|i| {
                let row = self.basis.row(i);
                let den = Rational::common_denominator(row);
                let ints: Vec<num_bigint::BigInt> = row
                    .iter()
                    .map(|x| x.numer() * (&den / x.denom()))
                    .collect();
                let g = ints
                    .iter()
                    .fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(x));
                if g.is_zero() || g.is_one() {
                    ints
                } else {
                    ints.into_iter().map(|x| x / g.abs()).collect()
                }
            })
            .collect()
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{:?} in Q^{}", self.basis, self.ambient_dim)
    }
}

/// Column space of `m`, a subspace of ℚ^rows.
pub fn image_subspace(m: &RationalMatrix) -> Subspace {
    Subspace::row_space(&m.transpose())
}

/// Null space `{x : m x = 0}`, a subspace of ℚ^cols.
pub fn kernel_subspace(m: &RationalMatrix) -> Subspace {
    let Rref {
        matrix,
        rank,
        pivots,
    } = rref(m);
    let n = m.cols();
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut vectors = Vec::new();
    for free in (0..n).filter(|&j| !is_pivot[j]) {
        let mut v = vec![Rational::zero(); n];
        v[free] = Rational::one();
        for (i, &p) in pivots.iter().enumerate().take(rank) {
            v[p] = -&matrix[(i, free)];
        }
        vectors.push(v);
    }
    Subspace::span(&vectors, n).expect("kernel vectors have the ambient width")
}

/// Sum and intersection of two subspaces of the same ambient space.
pub fn sum_and_intersection(a: &Subspace, b: &Subspace) -> Result<(Subspace, Subspace)> {
    if a.ambient_dim != b.ambient_dim {
        return Err(Error::AmbientMismatch {
            expected: a.ambient_dim,
            found: b.ambient_dim,
        });
    }
    let n = a.ambient_dim;
    let sum = Subspace::row_space(&a.basis.vstack(&b.basis)?);

    // x ∈ A ∩ B iff x = Aᵀ y = Bᵀ z; solve [Aᵀ | -Bᵀ] (y, z) = 0 and map y back.
    let (da, db) = (a.dim(), b.dim());
    let mut system = RationalMatrix::zeros(n, da + db);
    for i in 0..n {
        for k in 0..da {
            system[(i, k)] = a.basis[(k, i)].clone();
        }
        for k in 0..db {
            system[(i, da + k)] = -&b.basis[(k, i)];
        }
    }
    let null = kernel_subspace(&system);
    let vectors: Vec<Vec<Rational>> = (0..null.dim())
        .map(|r| {
            let coeffs = &null.basis.row(r)[..da];
            (0..n)
                .map(|i| {
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * &a.basis[(k, i)])
                        .sum()
                })
                .collect()
        })
        .collect();
    let cap = Subspace::span(&vectors, n)?;
    Ok((sum, cap))
}

/// Completes the canonical basis of `w` to a basis of the ambient space by
/// appending the standard vectors of the non-pivot columns in index order.
pub fn extend_to_full_basis(w: &Subspace) -> RationalMatrix {
    let n = w.ambient_dim;
    let pivots = w.pivots();
    let mut out = w.basis.clone();
    for j in (0..n).filter(|j| !pivots.contains(j)) {
        let mut e = RationalMatrix::zeros(1, n);
        e[(0, j)] = Rational::one();
        out = out.vstack(&e).expect("same width");
    }
    out
}

/// Indices of the standard vectors appended by [`extend_to_full_basis`].
pub fn complement_indices(w: &Subspace) -> Vec<usize> {
    let pivots = w.pivots();
    (0..w.ambient_dim)
        .filter(|j| !pivots.contains(j))
        .collect()
}

/// The unique solution of `a x = b`, or `None` when `a` is singular.
pub fn solve_square(a: &RationalMatrix, b: &[Rational]) -> Result<Option<Vec<Rational>>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape(format!(
            "solve_square needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut aug = RationalMatrix::zeros(n, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n)] = b[i].clone();
    }
    let r = rref(&aug);
    if r.pivots.len() < n || r.pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
        return Ok(None);
    }
    Ok(Some((0..n).map(|i| r.matrix[(i, n)].clone()).collect()))
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    ambient_dim: usize,
    basis: Vec<Vec<Rational>>,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceJson {
            ambient_dim: self.ambient_dim,
            basis: self.basis.row_vecs(),
        }
        .serialize(serializer)
    }
}

/// Any spanning set is accepted and canonicalized on input.
impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SubspaceJson::deserialize(deserializer)?;
        Subspace::span(&raw.basis, raw.ambient_dim).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>], cols: usize) -> RationalMatrix {
        RationalMatrix::from_i64_rows(rows, cols).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn rref_examples() {
        let r = rref(&RationalMatrix::identity(2));
        assert_eq!(r.matrix, RationalMatrix::identity(2));
        assert_eq!((r.rank, r.pivots), (2, vec![0, 1]));

        let r = rref(&m(&[vec![1, 2], vec![2, 4]], 2));
        assert_eq!(r.matrix, m(&[vec![1, 2], vec![0, 0]], 2));
        assert_eq!((r.rank, r.pivots), (1, vec![0]));

        let r = rref(&m(&[vec![0, 1], vec![1, 0]], 2));
        assert_eq!(r.matrix, RationalMatrix::identity(2));
        assert_eq!((r.rank, r.pivots), (2, vec![0, 1]));
    }

    #[test]
    fn image_examples() {
        assert_eq!(image_subspace(&RationalMatrix::zeros(3, 3)).dim(), 0);
        let s = image_subspace(&m(&[vec![1, 0], vec![0, 0]], 2));
        assert_eq!(s, Subspace::span_i64(&[vec![1, 0]], 2).unwrap());
        let s = image_subspace(&m(&[vec![1, 1], vec![1, 1]], 2));
        assert_eq!(s.basis(), &m(&[vec![1, 1]], 2));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_subspace(&RationalMatrix::identity(2)).dim(), 0);
        let k = kernel_subspace(&m(&[vec![1, 0]], 2));
        assert_eq!(k.basis(), &m(&[vec![0, 1]], 2));
        let k = kernel_subspace(&m(&[vec![1, 1, 1]], 3));
        assert_eq!(k.basis(), &m(&[vec![1, 0, -1], vec![0, 1, -1]], 3));
        assert_eq!(k.dim(), 2);
    }

    #[test]
    fn sum_and_intersection_examples() {
        let a = Subspace::span_i64(&[vec![1, 0]], 2).unwrap();
        let (s, c) = sum_and_intersection(&a, &a).unwrap();
        assert_eq!((s, c), (a.clone(), a.clone()));

        let b = Subspace::span_i64(&[vec![0, 1]], 2).unwrap();
        let (s, c) = sum_and_intersection(&a, &b).unwrap();
        assert_eq!(s, Subspace::full(2));
        assert_eq!(c, Subspace::zero(2));

        let a = Subspace::span_i64(&[vec![1, 0, 0], vec![0, 1, 0]], 3).unwrap();
        let b = Subspace::span_i64(&[vec![0, 1, 0], vec![0, 0, 1]], 3).unwrap();
        let (s, c) = sum_and_intersection(&a, &b).unwrap();
        assert_eq!(s, Subspace::full(3));
        assert_eq!(c, Subspace::span_i64(&[vec![0, 1, 0]], 3).unwrap());

        let err = sum_and_intersection(&a, &Subspace::zero(2));
        assert!(matches!(err, Err(Error::AmbientMismatch { .. })));
    }

    #[test]
    fn extend_examples() {
        assert_eq!(
            extend_to_full_basis(&Subspace::zero(2)),
            RationalMatrix::identity(2)
        );
        assert_eq!(
            extend_to_full_basis(&Subspace::full(2)),
            RationalMatrix::identity(2)
        );
        let w = Subspace::span_i64(&[vec![1, 0, 2]], 3).unwrap();
        assert_eq!(
            extend_to_full_basis(&w),
            m(&[vec![1, 0, 2], vec![0, 1, 0], vec![0, 0, 1]], 3)
        );
    }

    #[test]
    fn solve_examples() {
        let x = solve_square(&RationalMatrix::identity(2), &[q(3, 1), q(1, 2)]).unwrap();
        assert_eq!(x, Some(vec![q(3, 1), q(1, 2)]));
        let x = solve_square(&m(&[vec![1, 1], vec![1, 1]], 2), &[q(1, 1), q(2, 1)]).unwrap();
        assert_eq!(x, None);
        let x = solve_square(&m(&[vec![2, 0], vec![0, 4]], 2), &[q(1, 1), q(1, 1)]).unwrap();
        assert_eq!(x, Some(vec![q(1, 2), q(1, 4)]));
        assert!(solve_square(&RationalMatrix::zeros(2, 3), &[q(1, 1), q(1, 1)]).is_err());
    }

    #[test]
    fn subspace_json() {
        let w = Subspace::span_i64(&[vec![2, 0, 4]], 3).unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(text, r#"{"ambient_dim":3,"basis":[["1","0","2"]]}"#);
        let back: Subspace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn integer_basis_is_primitive() {
        let w = Subspace::span_i64(&[vec![2, 1, 0]], 3).unwrap();
        // canonical row is (1, 1/2, 0)
        let ints = w.integer_basis();
        assert_eq!(ints[0], vec![2.into(), 1.into(), 0.into()]);
    }
}
