//! Sparse masking-polynomial encoders.
//!
//! `A` and `B` are split into `k` column blocks. The data blocks of `A` sit at
//! exponents `0..k`, those of `B` at multiples of `k`, and both tails carry
//! `t - 1` uniform masks starting at exponent `k^2`. In the product
//! `g_A(x)^T g_B(x)` every `A_i^T B_j` then lands alone at exponent
//! `i + k*j` (0-based), below every mask-bearing exponent.

pub mod beaver;
pub mod support;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{FieldMatrix, LinalgError, MultCounter};

pub use beaver::{beaver_multiply, beaver_open, AdditiveShares, BeaverTriple};
pub use support::{
    bgw_threshold, struct_threshold, symbolic_product_support, threshold_closed_form, SupportSets, Symbol,
    SymbolicProduct, SymbolicTerm,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SharingError {
    #[error("invalid sharing parameters: {0}")]
    InvalidParams(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("s = {s} outside 1..={max}")]
    DofOutOfRange { s: usize, max: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `(m, k, t)`: matrix size, storage split, privacy threshold. The scheme
/// tolerates `t - 1` colluding agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SharingParams {
    m: usize,
    k: usize,
    t: usize,
}

impl SharingParams {
    pub fn new(m: usize, k: usize, t: usize) -> Result<Self, SharingError> {
        if k == 0 || t == 0 {
            return Err(SharingError::InvalidParams("k and t must be at least 1".into()));
        }
        if k > m {
            return Err(SharingError::InvalidParams(format!("k = {k} exceeds m = {m}")));
        }
        if !m.is_multiple_of(k) {
            return Err(SharingError::InvalidParams(format!("k = {k} does not divide m = {m}")));
        }
        Ok(Self { m, k, t })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Width of one column block, `m / k`.
    pub fn block_width(&self) -> usize {
        self.m / self.k
    }
}

/// Exponents carrying the data blocks of `g_A`, in block order.
pub fn a_data_exponents(k: usize) -> Vec<usize> {
    (0..k).collect()
}

/// Exponents carrying the data blocks of `g_B`, in block order.
pub fn b_data_exponents(k: usize) -> Vec<usize> {
    (0..k).map(|j| k * j).collect()
}

/// Exponents of the `t - 1` mask blocks shared by both encoders.
pub fn mask_exponents(k: usize, t: usize) -> Vec<usize> {
    (0..t.saturating_sub(1)).map(|l| k * k + l).collect()
}

/// A polynomial with matrix coefficients, stored sparsely by exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPolynomial {
    coeffs: BTreeMap<usize, FieldMatrix>,
    block_shape: (usize, usize),
    field: FieldSpec,
}

impl EncodedPolynomial {
    fn build(data_exps: Vec<usize>, blocks: &[FieldMatrix], masks: &[FieldMatrix]) -> Result<Self, SharingError> {
        let first = blocks
            .first()
            .ok_or_else(|| SharingError::Encoding("at least one data block is required".into()))?;
        let shape = first.shape();
        let field = first.field();
        for (idx, b) in blocks.iter().chain(masks).enumerate() {
            if b.shape() != shape || b.field() != field {
                return Err(SharingError::Encoding(format!(
                    "block {idx} has shape {:?} over {}, expected {shape:?} over {field}",
                    b.shape(),
                    b.field()
                )));
            }
        }
        let k = blocks.len();
        let mask_exps = mask_exponents(k, masks.len() + 1);
        let coeffs = data_exps
            .into_iter()
            .zip(blocks.iter().cloned())
            .chain(mask_exps.into_iter().zip(masks.iter().cloned()))
            .collect();
        Ok(Self {
            coeffs,
            block_shape: shape,
            field,
        })
    }

    pub fn coefficient(&self, exponent: usize) -> Option<&FieldMatrix> {
        self.coeffs.get(&exponent)
    }

    pub fn exponents(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn block_shape(&self) -> (usize, usize) {
        self.block_shape
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// `sum_nu coeff_nu * alpha^nu`.
    pub fn evaluate(&self, alpha: FieldElement) -> FieldMatrix {
        self.evaluate_counted(alpha, &mut MultCounter::new())
    }

    /// Like [`EncodedPolynomial::evaluate`], counting one multiplication per
    /// coefficient entry.
    pub fn evaluate_counted(&self, alpha: FieldElement, counter: &mut MultCounter) -> FieldMatrix {
        let f = self.field;
        let (r, c) = self.block_shape;
        let mut out = FieldMatrix::zeros(f, r, c);
        let a = alpha.value() % f.modulus();
        for (&nu, block) in &self.coeffs {
            let w = f.pow_raw(a, nu as u64);
            for i in 0..r {
                for j in 0..c {
                    let v = f.add_raw(out.raw(i, j), f.mul_raw(w, block.raw(i, j)));
                    out.set_raw(i, j, v);
                }
            }
            counter.add_scalar((r * c) as u64);
        }
        out
    }
}

/// `g_A(x) = sum_i A_i x^(i-1) + sum_l R_l x^(k^2 + l - 1)`.
pub fn encode_a(blocks: &[FieldMatrix], masks: &[FieldMatrix]) -> Result<EncodedPolynomial, SharingError> {
    EncodedPolynomial::build(a_data_exponents(blocks.len()), blocks, masks)
}

/// `g_B(x) = sum_j B_j x^(k(j-1)) + sum_l R_l x^(k^2 + l - 1)`.
pub fn encode_b(blocks: &[FieldMatrix], masks: &[FieldMatrix]) -> Result<EncodedPolynomial, SharingError> {
    EncodedPolynomial::build(b_data_exponents(blocks.len()), blocks, masks)
}
