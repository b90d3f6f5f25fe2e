//! Dense matrices over `F_p`.
//!
//! Storage is row-major; `vec`/`mat` use column-major order because bilinear
//! scheme coefficients are indexed that way.

use std::fmt;

use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op}: operands belong to different fields")]
    FieldMismatch { op: &'static str },
    #[error("cannot split {cols} columns into {k} blocks: {reason}")]
    Partition {
        cols: usize,
        k: usize,
        reason: &'static str,
    },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("matrix is singular")]
    Singular,
}

/// Running count of field multiplications.
///
/// `base_products` counts calls into [`matmul_naive`], which is how recursive
/// bilinear lifting reports its block-multiply count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MultCounter {
    pub scalar_mults: u64,
    pub base_products: u64,
}

impl MultCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add_scalar(&mut self, n: u64) {
        self.scalar_mults += n;
    }

    pub fn merge(&mut self, other: &MultCounter) {
        self.scalar_mults += other.scalar_mults;
        self.base_products += other.base_products;
    }
}

impl std::iter::Sum for MultCounter {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(MultCounter::new(), |mut acc, c| {
            acc.merge(&c);
            acc
        })
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    field: FieldSpec,
    data: Vec<u64>,
}

impl FieldMatrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            field,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.modulus();
        }
        m
    }

    /// Builds a matrix from row-major values, reducing each into the field.
    pub fn from_values(field: FieldSpec, rows: usize, cols: usize, values: Vec<u64>) -> Result<Self, LinalgError> {
        if values.len() != rows * cols {
            return Err(LinalgError::LengthMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        let p = field.modulus();
        let data = values.into_iter().map(|v| v % p).collect();
        Ok(Self {
            rows,
            cols,
            field,
            data,
        })
    }

    /// Builds a matrix from signed row literals. Panics on ragged input.
    pub fn from_rows(field: FieldSpec, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix literal");
            data.extend(row.iter().map(|&v| field.reduce_i64(v)));
        }
        Self {
            rows: r,
            cols: c,
            field,
            data,
        }
    }

    pub fn from_elements(
        field: FieldSpec,
        rows: usize,
        cols: usize,
        elements: &[FieldElement],
    ) -> Result<Self, LinalgError> {
        if elements.iter().any(|e| e.field() != field) {
            return Err(LinalgError::FieldMismatch { op: "from_elements" });
        }
        Self::from_values(field, rows, cols, elements.iter().map(|e| e.value()).collect())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Row-major canonical residues.
    pub fn values(&self) -> &[u64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.field.element(self.data[i * self.cols + j])
    }

    #[inline]
    pub(crate) fn raw(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: FieldElement) -> Result<(), LinalgError> {
        if value.field() != self.field {
            return Err(LinalgError::FieldMismatch { op: "set" });
        }
        self.data[i * self.cols + j] = value.value();
        Ok(())
    }

    #[inline]
    pub(crate) fn set_raw(&mut self, i: usize, j: usize, value: u64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut out = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    fn check_same(&self, other: &Self, op: &'static str) -> Result<(), LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch { op });
        }
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<FieldMatrix, LinalgError> {
        self.check_same(other, "add")?;
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add_raw(a, b))
            .collect();
        Ok(Self { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<FieldMatrix, LinalgError> {
        self.check_same(other, "sub")?;
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.sub_raw(a, b))
            .collect();
        Ok(Self { data, ..*self })
    }

    /// `self += coef * other`. Multiplications are counted unless the
    /// coefficient is `0` or `±1`.
    pub fn add_scaled_assign(
        &mut self,
        other: &Self,
        coef: FieldElement,
        counter: &mut MultCounter,
    ) -> Result<(), LinalgError> {
        self.check_same(other, "add_scaled_assign")?;
        if coef.field() != self.field {
            return Err(LinalgError::FieldMismatch {
                op: "add_scaled_assign",
            });
        }
        let f = self.field;
        let c = coef.value();
        if c == 0 {
            return Ok(());
        }
        if c == 1 {
            for (a, &b) in self.data.iter_mut().zip(&other.data) {
                *a = f.add_raw(*a, b);
            }
        } else if c == f.modulus() - 1 {
            for (a, &b) in self.data.iter_mut().zip(&other.data) {
                *a = f.sub_raw(*a, b);
            }
        } else {
            counter.add_scalar(other.data.len() as u64);
            for (a, &b) in self.data.iter_mut().zip(&other.data) {
                *a = f.add_raw(*a, f.mul_raw(c, b));
            }
        }
        Ok(())
    }

    /// `coef * self`, always counted as `rows * cols` multiplications.
    pub fn scale(&self, coef: FieldElement, counter: &mut MultCounter) -> FieldMatrix {
        let f = self.field;
        let c = coef.value() % f.modulus();
        counter.add_scalar(self.data.len() as u64);
        let data = self.data.iter().map(|&a| f.mul_raw(c, a)).collect();
        Self { data, ..*self }
    }

    /// Copies the `rows x cols` window whose top-left corner is `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> FieldMatrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "window out of bounds");
        let mut out = Self::zeros(self.field, rows, cols);
        for i in 0..rows {
            let src = (r0 + i) * self.cols + c0;
            out.data[i * cols..(i + 1) * cols].copy_from_slice(&self.data[src..src + cols]);
        }
        out
    }

    /// Splits into a `grid_rows x grid_cols` grid of equal blocks; the caller
    /// guarantees divisibility.
    pub(crate) fn split_grid(&self, grid_rows: usize, grid_cols: usize) -> Vec<Vec<FieldMatrix>> {
        let (br, bc) = (self.rows / grid_rows, self.cols / grid_cols);
        (0..grid_rows)
            .map(|i| (0..grid_cols).map(|j| self.submatrix(i * br, j * bc, br, bc)).collect())
            .collect()
    }

    /// Assembles a matrix from a rectangular grid of equally shaped blocks.
    pub fn from_block_grid(grid: &[Vec<FieldMatrix>]) -> Result<FieldMatrix, LinalgError> {
        let first = grid
            .first()
            .and_then(|row| row.first())
            .ok_or(LinalgError::LengthMismatch { expected: 1, got: 0 })?;
        let (br, bc) = first.shape();
        let field = first.field;
        let gc = grid[0].len();
        let mut out = Self::zeros(field, br * grid.len(), bc * gc);
        for (gi, row) in grid.iter().enumerate() {
            if row.len() != gc {
                return Err(LinalgError::LengthMismatch {
                    expected: gc,
                    got: row.len(),
                });
            }
            for (gj, block) in row.iter().enumerate() {
                first.check_same(block, "from_block_grid")?;
                for i in 0..br {
                    let dst = (gi * br + i) * out.cols + gj * bc;
                    out.data[dst..dst + bc].copy_from_slice(&block.data[i * bc..(i + 1) * bc]);
                }
            }
        }
        Ok(out)
    }

    /// Column-major flattening.
    pub fn vec(&self) -> Vec<FieldElement> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Inverse of [`FieldMatrix::vec`].
    pub fn mat(v: &[FieldElement], rows: usize, cols: usize) -> Result<FieldMatrix, LinalgError> {
        if v.len() != rows * cols {
            return Err(LinalgError::LengthMismatch {
                expected: rows * cols,
                got: v.len(),
            });
        }
        let field = match v.first() {
            Some(e) => e.field(),
            None => return Ok(Self::zeros(FieldSpec::default(), rows, cols)),
        };
        let mut out = Self::zeros(field, rows, cols);
        for (idx, e) in v.iter().enumerate() {
            if e.field() != field {
                return Err(LinalgError::FieldMismatch { op: "mat" });
            }
            out.data[(idx % rows) * cols + idx / rows] = e.value();
        }
        Ok(out)
    }

    /// Rank by Gaussian elimination on a copy.
    pub fn rank(&self) -> usize {
        self.independent_rows().len()
    }

    /// Indices of a maximal set of linearly independent rows, chosen greedily
    /// in order.
    pub fn independent_rows(&self) -> Vec<usize> {
        let f = self.field;
        // reduced basis rows with their pivot columns
        let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
        let mut picked = Vec::new();
        for r in 0..self.rows {
            let mut row = self.data[r * self.cols..(r + 1) * self.cols].to_vec();
            for (pc, b) in &basis {
                let c = row[*pc];
                if c != 0 {
                    for (x, &y) in row.iter_mut().zip(b) {
                        *x = f.sub_raw(*x, f.mul_raw(c, y));
                    }
                }
            }
            if let Some(pc) = row.iter().position(|&x| x != 0) {
                let inv = f.inv_raw(row[pc]).expect("nonzero pivot");
                for x in row.iter_mut() {
                    *x = f.mul_raw(*x, inv);
                }
                basis.push((pc, row));
                picked.push(r);
                if picked.len() == self.cols {
                    break;
                }
            }
        }
        picked
    }

    /// Gauss-Jordan inverse. Every field multiplication is counted.
    pub fn inverse(&self, counter: &mut MultCounter) -> Result<FieldMatrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch {
                op: "inverse",
                left: self.shape(),
                right: self.shape(),
            });
        }
        let n = self.rows;
        let f = self.field;
        let mut a = self.clone();
        let mut inv = Self::identity(f, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a.data[r * n + col] != 0)
                .ok_or(LinalgError::Singular)?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let pinv = f.inv_raw(a.data[col * n + col]).expect("nonzero pivot");
            for j in 0..n {
                a.data[col * n + j] = f.mul_raw(a.data[col * n + j], pinv);
                inv.data[col * n + j] = f.mul_raw(inv.data[col * n + j], pinv);
            }
            counter.add_scalar(2 * n as u64);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let c = a.data[r * n + col];
                if c == 0 {
                    continue;
                }
                for j in 0..n {
                    a.data[r * n + j] = f.sub_raw(a.data[r * n + j], f.mul_raw(c, a.data[col * n + j]));
                    inv.data[r * n + j] = f.sub_raw(inv.data[r * n + j], f.mul_raw(c, inv.data[col * n + j]));
                }
                counter.add_scalar(2 * n as u64);
            }
        }
        Ok(inv)
    }
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FieldMatrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        Ok(())
    }
}

/// Schoolbook product; the reference every other multiplication path is
/// checked against. Adds exactly `a.rows * a.cols * b.cols` to the counter.
pub fn matmul_naive(a: &FieldMatrix, b: &FieldMatrix, counter: &mut MultCounter) -> Result<FieldMatrix, LinalgError> {
    if a.field != b.field {
        return Err(LinalgError::FieldMismatch { op: "matmul" });
    }
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let f = a.field;
    let p = f.modulus() as u128;
    let mut out = FieldMatrix::zeros(f, a.rows, b.cols);
    let mut acc = vec![0u128; b.cols];
    for i in 0..a.rows {
        acc.iter_mut().for_each(|x| *x = 0);
        for l in 0..a.cols {
            let x = a.data[i * a.cols + l] as u128;
            let brow = &b.data[l * b.cols..(l + 1) * b.cols];
            for (s, &y) in acc.iter_mut().zip(brow) {
                *s += x * y as u128;
            }
            // terms are < 2^124, so 15 unreduced terms plus a residue fit in u128
            if l % 15 == 14 {
                acc.iter_mut().for_each(|s| *s %= p);
            }
        }
        for (j, s) in acc.iter().enumerate() {
            out.data[i * b.cols + j] = (*s % p) as u64;
        }
    }
    counter.add_scalar((a.rows * a.cols * b.cols) as u64);
    counter.base_products += 1;
    Ok(out)
}

/// Splits `a` into `k` column blocks, left to right.
pub fn partition_columns(a: &FieldMatrix, k: usize) -> Result<Vec<FieldMatrix>, LinalgError> {
    let err = |reason| LinalgError::Partition {
        cols: a.cols,
        k,
        reason,
    };
    if k == 0 || !a.cols.is_multiple_of(k) {
        return Err(err("k must divide the column count"));
    }
    if k > a.rows {
        return Err(err("k must not exceed the row count"));
    }
    let w = a.cols / k;
    Ok((0..k).map(|j| a.submatrix(0, j * w, a.rows, w)).collect())
}

/// Horizontal concatenation; inverse of [`partition_columns`].
pub fn concat_columns(blocks: &[FieldMatrix]) -> Result<FieldMatrix, LinalgError> {
    FieldMatrix::from_block_grid(&[blocks.to_vec()])
}

/// Matrix with i.i.d. uniform entries.
pub fn random_matrix(field: FieldSpec, rows: usize, cols: usize, rng: &mut RngStream) -> FieldMatrix {
    let data = (0..rows * cols).map(|_| field.sample_uniform(rng).value()).collect();
    FieldMatrix {
        rows,
        cols,
        field,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MERSENNE_31;
    use proptest::prelude::*;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    fn rand(field: FieldSpec, r: usize, c: usize, seed: u64) -> FieldMatrix {
        random_matrix(field, r, c, &mut RngStream::derive(seed, "test", 0))
    }

    #[test]
    fn identity_is_neutral() {
        let fp = f(101);
        let x = rand(fp, 5, 5, 1);
        let mut c = MultCounter::new();
        assert_eq!(matmul_naive(&FieldMatrix::identity(fp, 5), &x, &mut c).unwrap(), x);
        assert_eq!(matmul_naive(&x, &FieldMatrix::identity(fp, 5), &mut c).unwrap(), x);
    }

    #[test]
    fn column_swap_example() {
        let f7 = f(7);
        let a = FieldMatrix::from_rows(f7, &[&[1, 2], &[3, 4]]);
        let s = FieldMatrix::from_rows(f7, &[&[0, 1], &[1, 0]]);
        let mut c = MultCounter::new();
        let got = matmul_naive(&a, &s, &mut c).unwrap();
        assert_eq!(got, FieldMatrix::from_rows(f7, &[&[2, 1], &[4, 3]]));
        assert_eq!(c.scalar_mults, 8);
        assert_eq!(c.base_products, 1);
    }

    #[test]
    fn counter_counts_rows_inner_cols() {
        let fp = f(101);
        let mut c = MultCounter::new();
        matmul_naive(&rand(fp, 8, 16, 1), &rand(fp, 16, 8, 2), &mut c).unwrap();
        assert_eq!(c.scalar_mults, 1024);
    }

    #[test]
    fn matmul_rejects_bad_shapes_and_fields() {
        let mut c = MultCounter::new();
        let a = rand(f(101), 2, 3, 1);
        assert!(matches!(
            matmul_naive(&a, &a, &mut c),
            Err(LinalgError::DimensionMismatch { .. })
        ));
        let b = rand(f(7), 3, 2, 1);
        assert!(matches!(
            matmul_naive(&a, &b, &mut c),
            Err(LinalgError::FieldMismatch { .. })
        ));
        assert_eq!(c, MultCounter::new());
    }

    #[test]
    fn matmul_no_overflow_at_large_modulus() {
        let fp = FieldSpec::mersenne31();
        let n = 64;
        let a = FieldMatrix::from_values(fp, n, n, vec![MERSENNE_31 - 1; n * n]).unwrap();
        let mut c = MultCounter::new();
        let sq = matmul_naive(&a, &a, &mut c).unwrap();
        // (-1)(-1) summed n times
        assert!(sq.values().iter().all(|&v| v == n as u64));
    }

    #[test]
    fn transpose_examples() {
        let fp = f(101);
        let a = rand(fp, 3, 5, 4);
        assert_eq!(a.transpose().transpose(), a);
        let row = rand(fp, 1, 6, 5);
        assert_eq!(row.transpose().shape(), (6, 1));
        let b = rand(fp, 5, 2, 6);
        let mut c = MultCounter::new();
        let lhs = matmul_naive(&a, &b, &mut c).unwrap().transpose();
        let rhs = matmul_naive(&b.transpose(), &a.transpose(), &mut c).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn partition_examples() {
        let fp = f(101);
        let a = rand(fp, 4, 4, 7);
        let blocks = partition_columns(&a, 2).unwrap();
        assert_eq!(blocks.len(), 2);
        assert!(blocks.iter().all(|b| b.shape() == (4, 2)));
        assert_eq!(blocks[1].get(3, 0), a.get(3, 2));
        assert_eq!(partition_columns(&a, 1).unwrap(), vec![a.clone()]);
        assert!(matches!(partition_columns(&a, 3), Err(LinalgError::Partition { .. })));
        assert_eq!(partition_columns(&a, 4).unwrap().len(), 4);
        let short = rand(fp, 2, 4, 7);
        assert!(matches!(
            partition_columns(&short, 4),
            Err(LinalgError::Partition { .. })
        ));
        let wide = rand(fp, 8, 8, 8);
        for k in [2, 4] {
            assert_eq!(concat_columns(&partition_columns(&wide, k).unwrap()).unwrap(), wide);
        }
    }

    #[test]
    fn vec_is_column_major() {
        let f7 = f(7);
        let a = FieldMatrix::from_rows(f7, &[&[1, 2], &[3, 4]]);
        let v: Vec<u64> = a.vec().iter().map(|e| e.value()).collect();
        assert_eq!(v, vec![1, 3, 2, 4]);
        let back = FieldMatrix::mat(&a.vec(), 2, 2).unwrap();
        assert_eq!(back, a);
        let row = FieldMatrix::from_rows(f7, &[&[5, 6, 0]]);
        assert_eq!(row.vec(), vec![f7.element(5), f7.element(6), f7.element(0)]);
        let one = FieldMatrix::mat(&[f7.element(3)], 1, 1).unwrap();
        assert_eq!(one.shape(), (1, 1));
        assert!(matches!(
            FieldMatrix::mat(&a.vec(), 3, 1),
            Err(LinalgError::LengthMismatch { expected: 3, got: 4 })
        ));
    }

    #[test]
    fn random_matrix_determinism_and_separation() {
        let fp = FieldSpec::mersenne31();
        let draw = |label: &str| random_matrix(fp, 8, 8, &mut RngStream::derive(3, label, 0));
        assert_eq!(draw("x"), draw("x"));
        assert_ne!(draw("x"), draw("y"));
    }

    #[test]
    fn random_matrix_histogram_within_five_sigma() {
        let fp = f(5);
        let m = random_matrix(fp, 100, 1000, &mut RngStream::derive(11, "hist", 0));
        let mut counts = [0u64; 5];
        for &v in m.values() {
            counts[v as usize] += 1;
        }
        let n = 100_000f64;
        let sigma = (n * 0.2 * 0.8).sqrt();
        for c in counts {
            assert!((c as f64 - n * 0.2).abs() < 5.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn inverse_and_rank() {
        let fp = f(101);
        let a = rand(fp, 6, 6, 9);
        let mut c = MultCounter::new();
        let inv = a.inverse(&mut c).unwrap();
        assert_eq!(matmul_naive(&a, &inv, &mut c).unwrap(), FieldMatrix::identity(fp, 6));
        let singular = FieldMatrix::from_rows(fp, &[&[1, 2], &[2, 4]]);
        assert_eq!(singular.inverse(&mut c), Err(LinalgError::Singular));
        assert_eq!(singular.rank(), 1);
        let tall = FieldMatrix::from_rows(fp, &[&[1, 0], &[2, 0], &[0, 3], &[1, 1]]);
        assert_eq!(tall.independent_rows(), vec![0, 2]);
    }

    fn small_dims() -> impl Strategy<Value = (usize, usize, usize, usize)> {
        (1usize..=8, 1usize..=8, 1usize..=8, 1usize..=8)
    }

    proptest! {
        #[test]
        fn matmul_is_associative_and_bilinear((r, s, t, u) in small_dims(), seed in any::<u64>()) {
            let fp = f(101);
            let mut c = MultCounter::new();
            let a = rand(fp, r, s, seed);
            let a2 = rand(fp, r, s, seed ^ 1);
            let b = rand(fp, s, t, seed ^ 2);
            let d = rand(fp, t, u, seed ^ 3);
            let ab_d = matmul_naive(&matmul_naive(&a, &b, &mut c).unwrap(), &d, &mut c).unwrap();
            let a_bd = matmul_naive(&a, &matmul_naive(&b, &d, &mut c).unwrap(), &mut c).unwrap();
            prop_assert_eq!(ab_d, a_bd);
            let lhs = matmul_naive(&a.add(&a2).unwrap(), &b, &mut c).unwrap();
            let rhs = matmul_naive(&a, &b, &mut c).unwrap().add(&matmul_naive(&a2, &b, &mut c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            let three = fp.element(3);
            let scaled = matmul_naive(&a.scale(three, &mut c), &b, &mut c).unwrap();
            prop_assert_eq!(scaled, matmul_naive(&a, &b, &mut c).unwrap().scale(three, &mut c));
        }

        #[test]
        fn vec_mat_round_trip(r in 1usize..=9, cols in 1usize..=9, seed in any::<u64>()) {
            let x = rand(f(101), r, cols, seed);
            prop_assert_eq!(FieldMatrix::mat(&x.vec(), r, cols).unwrap(), x);
        }
    }
}
