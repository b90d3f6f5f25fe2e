//! Exponent bookkeeping for the product polynomial `M(x) = g_A(x)^T g_B(x)`.
//!
//! Two independent views are kept here: [`SymbolicProduct`] multiplies the
//! encoder layouts term by term with formal symbols, while
//! [`symbolic_product_support`] evaluates the closed-form exponent bands.
//! Tests hold them against each other.

use std::collections::{BTreeMap, BTreeSet};

use super::{a_data_exponents, b_data_exponents, mask_exponents, SharingError};

/// A formal coefficient of `g_A` or `g_B`. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    A(usize),
    B(usize),
    MaskA(usize),
    MaskB(usize),
}

impl Symbol {
    pub fn is_mask(&self) -> bool {
        matches!(self, Symbol::MaskA(_) | Symbol::MaskB(_))
    }
}

/// One formal product `left^T * right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolicTerm {
    pub left: Symbol,
    pub right: Symbol,
}

impl SymbolicTerm {
    pub fn involves_mask(&self) -> bool {
        self.left.is_mask() || self.right.is_mask()
    }
}

/// `g_A^T g_B` expanded over distinct indeterminates, so no two terms can
/// cancel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicProduct {
    k: usize,
    coeffs: BTreeMap<usize, Vec<SymbolicTerm>>,
}

impl SymbolicProduct {
    pub fn of_encoders(k: usize, t: usize) -> Self {
        let masks = mask_exponents(k, t);
        let left: Vec<(usize, Symbol)> = a_data_exponents(k)
            .into_iter()
            .enumerate()
            .map(|(i, e)| (e, Symbol::A(i + 1)))
            .chain(masks.iter().enumerate().map(|(l, &e)| (e, Symbol::MaskA(l + 1))))
            .collect();
        let right: Vec<(usize, Symbol)> = b_data_exponents(k)
            .into_iter()
            .enumerate()
            .map(|(j, e)| (e, Symbol::B(j + 1)))
            .chain(masks.iter().enumerate().map(|(l, &e)| (e, Symbol::MaskB(l + 1))))
            .collect();
        let mut coeffs: BTreeMap<usize, Vec<SymbolicTerm>> = BTreeMap::new();
        for &(ea, sa) in &left {
            for &(eb, sb) in &right {
                coeffs
                    .entry(ea + eb)
                    .or_default()
                    .push(SymbolicTerm { left: sa, right: sb });
            }
        }
        Self { k, coeffs }
    }

    /// Exponents with a nonzero formal coefficient, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn coefficient(&self, exponent: usize) -> &[SymbolicTerm] {
        self.coeffs.get(&exponent).map_or(&[], Vec::as_slice)
    }

    /// Exponent of the target block `A_i^T B_j` (1-based `i`, `j`).
    pub fn target_exponent(&self, i: usize, j: usize) -> usize {
        (i - 1) + self.k * (j - 1)
    }

    /// Support exponents whose coefficient mixes in at least one mask.
    pub fn masked_exponents(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .filter(|(_, terms)| terms.iter().any(SymbolicTerm::involves_mask))
            .map(|(&e, _)| e)
            .collect()
    }
}

/// The exponent bands of `M(x)`: `K1` holds the targets, `K2`/`K3` the
/// data-times-mask cross terms, `K4` the mask-times-mask band.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSets {
    pub k1: Vec<usize>,
    pub k2: Vec<usize>,
    pub k3: Vec<usize>,
    pub k4: Vec<usize>,
    pub union: Vec<usize>,
}

impl SupportSets {
    pub fn size(&self) -> usize {
        self.union.len()
    }

    /// `K2 ∪ K3 ∪ K4` without the target band.
    pub fn masked(&self) -> Vec<usize> {
        let k1: BTreeSet<_> = self.k1.iter().collect();
        self.union.iter().filter(|e| !k1.contains(e)).copied().collect()
    }
}

/// Closed-form exponent bands for `(k, t)`. With `t = 1` there are no masks,
/// so only `K1` is populated.
pub fn symbolic_product_support(k: usize, t: usize) -> SupportSets {
    let kk = k * k;
    let k1: Vec<usize> = (0..kk).collect();
    let (k2, k3, k4) = if t < 2 {
        (Vec::new(), Vec::new(), Vec::new())
    } else {
        let k2: Vec<usize> = (kk..=kk + k + t - 3).collect();
        let k3: BTreeSet<usize> = (0..k).flat_map(|i| (0..=t - 2).map(move |j| kk + i * k + j)).collect();
        let k4: Vec<usize> = (2 * kk..=2 * kk + 2 * t - 4).collect();
        (k2, k3.into_iter().collect(), k4)
    };
    let union: BTreeSet<usize> = k1.iter().chain(&k2).chain(&k3).chain(&k4).copied().collect();
    SupportSets {
        k1,
        k2,
        k3,
        k4,
        union: union.into_iter().collect(),
    }
}

/// `min{2k^2 + 2t - 3, k^2 + kt + t - 2}`.
pub fn threshold_closed_form(k: usize, t: usize) -> usize {
    let kk = k * k;
    (2 * kk + 2 * t - 3).min(kk + k * t + t - 2)
}

/// Agents needed by job-splitting plus BGW, `k^2 (2t - 1)`.
pub fn bgw_threshold(k: usize, t: usize) -> usize {
    k * k * (2 * t - 1)
}

/// `min{2s + 2t - 3, s + ks + t - 2}` for `1 <= s <= k^2`.
pub fn struct_threshold(k: usize, t: usize, s: usize) -> Result<usize, SharingError> {
    if s == 0 || s > k * k {
        return Err(SharingError::DofOutOfRange { s, max: k * k });
    }
    Ok((2 * s + 2 * t - 3).min(s + k * s + t - 2))
}
