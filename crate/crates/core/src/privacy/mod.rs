//! Exact privacy audits by exhaustive enumeration over small fields.
//!
//! Perfect secrecy is a combinatorial statement: for every secret, the
//! multiset of coalition views over all mask assignments must be the same.
//! The auditor enumerates every assignment and compares histograms directly,
//! so there is no statistical tolerance anywhere here.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{partition_columns, FieldMatrix, LinalgError};
use crate::protocol::{agent_compute, AgentEnv, AgentResult, AgentShare, LocalOperator, ProtocolError};
use crate::sharing::{beaver_open, encode_a, encode_b, AdditiveShares, SharingError, SharingParams};

/// Default cap on enumerated assignments.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrivacyError {
    #[error("enumeration needs {required} assignments, budget is {budget}; use a smaller prime or fewer masks")]
    Budget { required: u128, budget: u128 },
    #[error("invalid coalition: {0}")]
    Coalition(String),
    #[error("privacy violation: {0}")]
    Violation(String),
    #[error(transparent)]
    Sharing(#[from] SharingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Exact histogram of a coalition's view over all mask assignments.
///
/// A view is serialized as, per coalition member in agent-id order, `alpha`
/// followed by the row-major entries of `g_A(alpha)` and `g_B(alpha)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDistribution {
    pub histogram: BTreeMap<Vec<u64>, u64>,
    pub total: u64,
    /// Scalar entries in one view, excluding the points.
    pub view_scalars: usize,
    /// No masks were drawn (`t = 1`), so the view is a deterministic
    /// function of the secrets.
    pub vacuous: bool,
}

impl ViewDistribution {
    /// Every possible view in `F^view_scalars` occurs, each equally often.
    pub fn is_uniform(&self, field: FieldSpec) -> bool {
        let outcomes = (field.modulus() as u128).checked_pow(self.view_scalars as u32);
        let Some(outcomes) = outcomes else {
            return false;
        };
        if self.histogram.len() as u128 != outcomes || !(self.total as u128).is_multiple_of(outcomes) {
            return false;
        }
        let each = (self.total as u128 / outcomes) as u64;
        self.histogram.values().all(|&c| c == each)
    }
}

fn check_budget(field: FieldSpec, scalars: usize, budget: u128) -> Result<u64, PrivacyError> {
    let required = (field.modulus() as u128)
        .checked_pow(scalars as u32)
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(PrivacyError::Budget { required, budget });
    }
    Ok(required as u64)
}

/// Decodes `index` into base-`p` digits.
fn digits(mut index: u64, p: u64, n: usize) -> Vec<u64> {
    (0..n)
        .map(|_| {
            let d = index % p;
            index /= p;
            d
        })
        .collect()
}

fn check_coalition(coalition: &[usize], points: &[FieldElement]) -> Result<(), PrivacyError> {
    let mut seen = HashSet::new();
    for &id in coalition {
        if id >= points.len() {
            return Err(PrivacyError::Coalition(format!("agent {id} has no point")));
        }
        if !seen.insert(id) {
            return Err(PrivacyError::Coalition(format!("agent {id} listed twice")));
        }
    }
    Ok(())
}

/// Enumerates every assignment of the `2 (t-1) m (m/k)` mask scalars and
/// records the coalition's exact view.
pub fn enumerate_view_distribution(
    params: SharingParams,
    field: FieldSpec,
    a: &FieldMatrix,
    b: &FieldMatrix,
    coalition: &[usize],
    points: &[FieldElement],
    budget: u128,
) -> Result<ViewDistribution, PrivacyError> {
    check_coalition(coalition, points)?;
    let mut members = coalition.to_vec();
    members.sort_unstable();
    let (m, k, t) = (params.m(), params.k(), params.t());
    let w = params.block_width();
    let n_masks = t - 1;
    let block = m * w;
    let mask_scalars = 2 * n_masks * block;
    let total = check_budget(field, mask_scalars, budget)?;
    let a_blocks = partition_columns(a, k)?;
    let b_blocks = partition_columns(b, k)?;
    let p = field.modulus();

    let view_of = |index: u64| -> Result<Vec<u64>, PrivacyError> {
        let d = digits(index, p, mask_scalars);
        let mask = |off: usize| FieldMatrix::from_values(field, m, w, d[off..off + block].to_vec());
        let ra: Vec<FieldMatrix> = (0..n_masks).map(|l| mask(l * block)).collect::<Result<_, _>>()?;
        let rb: Vec<FieldMatrix> = (0..n_masks)
            .map(|l| mask((n_masks + l) * block))
            .collect::<Result<_, _>>()?;
        let ga = encode_a(&a_blocks, &ra)?;
        let gb = encode_b(&b_blocks, &rb)?;
        let mut view = Vec::with_capacity(members.len() * (1 + 2 * block));
        for &id in &members {
            let alpha = points[id];
            view.push(alpha.value());
            view.extend_from_slice(ga.evaluate(alpha).values());
            view.extend_from_slice(gb.evaluate(alpha).values());
        }
        Ok(view)
    };

    let histogram = (0..total)
        .into_par_iter()
        .try_fold(BTreeMap::new, |mut h: BTreeMap<Vec<u64>, u64>, i| {
            *h.entry(view_of(i)?).or_default() += 1;
            Ok::<_, PrivacyError>(h)
        })
        .try_reduce(BTreeMap::new, |mut x, y| {
            for (view, c) in y {
                *x.entry(view).or_default() += c;
            }
            Ok(x)
        })?;
    Ok(ViewDistribution {
        histogram,
        total,
        view_scalars: members.len() * 2 * block,
        vacuous: n_masks == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Independence {
    Independent,
    /// First view (in serialization order) whose counts differ.
    Dependent {
        view: Vec<u64>,
        left: u64,
        right: u64,
    },
}

/// Compares the exact view distributions induced by two secret pairs.
pub fn assert_secret_independence(
    params: SharingParams,
    field: FieldSpec,
    first: (&FieldMatrix, &FieldMatrix),
    second: (&FieldMatrix, &FieldMatrix),
    coalition: &[usize],
    points: &[FieldElement],
    budget: u128,
) -> Result<Independence, PrivacyError> {
    let d1 = enumerate_view_distribution(params, field, first.0, first.1, coalition, points, budget)?;
    let d2 = enumerate_view_distribution(params, field, second.0, second.1, coalition, points, budget)?;
    let views: std::collections::BTreeSet<&Vec<u64>> = d1.histogram.keys().chain(d2.histogram.keys()).collect();
    for view in views {
        let left = d1.histogram.get(view).copied().unwrap_or(0);
        let right = d2.histogram.get(view).copied().unwrap_or(0);
        if left != right {
            return Ok(Independence::Dependent {
                view: view.clone(),
                left,
                right,
            });
        }
    }
    Ok(Independence::Independent)
}

/// Checks that `g(x) = sum_l M_l x^(l-1)`, `l = 1..t-1`, evaluated at the
/// `t - 1` given points is injective over all coefficient tuples (hence a
/// bijection, both sides having `p^(r c (t-1))` elements).
pub fn masking_bijection_check(
    field: FieldSpec,
    t: usize,
    shape: (usize, usize),
    points: &[FieldElement],
    budget: u128,
) -> Result<bool, PrivacyError> {
    if t < 2 || points.len() != t - 1 {
        return Err(PrivacyError::Coalition(format!(
            "need t >= 2 and exactly t - 1 points, got t = {t} and {} points",
            points.len()
        )));
    }
    let per = shape.0 * shape.1;
    let scalars = per * (t - 1);
    let total = check_budget(field, scalars, budget)?;
    let p = field.modulus();
    let mut seen = HashSet::with_capacity(total as usize);
    for index in 0..total {
        let d = digits(index, p, scalars);
        let mut image = Vec::with_capacity(scalars);
        for alpha in points {
            let a = alpha.value();
            for e in 0..per {
                let mut acc = 0;
                for l in (0..t - 1).rev() {
                    acc = field.add_raw(field.mul_raw(acc, a), d[l * per + e]);
                }
                image.push(acc);
            }
        }
        if !seen.insert(image) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks, for every secret pair `(A, B)`, that the opened pair
/// `(D, E) = (A - R1, B - R2)` is a bijection of the triple masks
/// `(R1, R2)`. Shapes are `a x b` and `b x c`.
pub fn beaver_mask_bijection_check(
    field: FieldSpec,
    dims: (usize, usize, usize),
    budget: u128,
) -> Result<bool, PrivacyError> {
    let (ra, rb, rc) = dims;
    let n1 = ra * rb;
    let n = n1 + rb * rc;
    let per_secret = check_budget(field, n, budget)?;
    check_budget(field, 2 * n, budget)?;
    let p = field.modulus();
    let split = |d: &[u64]| -> Result<(FieldMatrix, FieldMatrix), LinalgError> {
        Ok((
            FieldMatrix::from_values(field, ra, rb, d[..n1].to_vec())?,
            FieldMatrix::from_values(field, rb, rc, d[n1..].to_vec())?,
        ))
    };
    for s in 0..per_secret {
        let (x, y) = split(&digits(s, p, n))?;
        let sx = AdditiveShares::from_parts(vec![x])?;
        let sy = AdditiveShares::from_parts(vec![y])?;
        let mut seen = HashSet::with_capacity(per_secret as usize);
        for r in 0..per_secret {
            let (r1, r2) = split(&digits(r, p, n))?;
            let d = beaver_open(&sx, &AdditiveShares::from_parts(vec![r1])?)?;
            let e = beaver_open(&sy, &AdditiveShares::from_parts(vec![r2])?)?;
            let mut key = d.values().to_vec();
            key.extend_from_slice(e.values());
            if !seen.insert(key) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Recomputes every agent output from its stored share alone and requires a
/// bit-exact match with no randomness consumed.
pub fn postprocessing_invariance(
    operator: &dyn LocalOperator,
    shares: &[AgentShare],
    results: &[AgentResult],
) -> Result<(), PrivacyError> {
    if shares.len() != results.len() {
        return Err(PrivacyError::Coalition(format!(
            "{} shares but {} results",
            shares.len(),
            results.len()
        )));
    }
    for (share, result) in shares.iter().zip(results) {
        let mut env = AgentEnv::new(0, share.agent_id);
        let again = match agent_compute(share, operator, &mut env) {
            Ok(r) => r,
            Err(ProtocolError::NondeterministicOperator { draws }) => {
                return Err(PrivacyError::Violation(format!(
                    "operator {} drew {draws} random words for agent {}",
                    operator.label(),
                    share.agent_id
                )))
            }
            Err(e) => return Err(e.into()),
        };
        if again.m_eval != result.m_eval {
            return Err(PrivacyError::Violation(format!(
                "operator {} output for agent {} is not reproducible from its share",
                operator.label(),
                share.agent_id
            )));
        }
    }
    Ok(())
}
