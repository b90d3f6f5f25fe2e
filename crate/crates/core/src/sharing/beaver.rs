//! Matrix Beaver triples over additive shares.
//!
//! Given shares of `A` (a x b), `B` (b x c) and a triple `R3 = R1 R2`, the
//! parties open `D = A - R1` and `E = B - R2`, then each computes
//! `R3_i + D R2_i + R1_i E`, with party 0 also adding `D E`. The local parts
//! sum to `A B`.

use crate::field::FieldSpec;
use crate::linalg::{matmul_naive, random_matrix, FieldMatrix, LinalgError, MultCounter};
use crate::rng::RngStream;

use super::SharingError;

/// Additive shares of one matrix: the parts sum to the secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveShares {
    parts: Vec<FieldMatrix>,
}

impl AdditiveShares {
    /// Splits `secret` into `n_parties` parts; the first `n - 1` are uniform.
    pub fn share(secret: &FieldMatrix, n_parties: usize, rng: &mut RngStream) -> Result<Self, SharingError> {
        if n_parties == 0 {
            return Err(SharingError::InvalidParams("at least one party is required".into()));
        }
        let (r, c) = secret.shape();
        let mut parts: Vec<FieldMatrix> = (1..n_parties)
            .map(|_| random_matrix(secret.field(), r, c, rng))
            .collect();
        let mut last = secret.clone();
        for p in &parts {
            last = last.sub(p)?;
        }
        parts.push(last);
        Ok(Self { parts })
    }

    pub fn from_parts(parts: Vec<FieldMatrix>) -> Result<Self, SharingError> {
        let first = parts
            .first()
            .ok_or_else(|| SharingError::InvalidParams("empty share vector".into()))?;
        for p in &parts {
            if p.shape() != first.shape() || p.field() != first.field() {
                return Err(LinalgError::DimensionMismatch {
                    op: "additive shares",
                    left: first.shape(),
                    right: p.shape(),
                }
                .into());
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[FieldMatrix] {
        &self.parts
    }

    pub fn n_parties(&self) -> usize {
        self.parts.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.parts[0].shape()
    }

    pub fn field(&self) -> FieldSpec {
        self.parts[0].field()
    }

    /// Reconstructs the secret. Only the dealer or a test harness calls this.
    pub fn open(&self) -> FieldMatrix {
        let mut acc = self.parts[0].clone();
        for p in &self.parts[1..] {
            acc = acc.add(p).expect("parts share a shape");
        }
        acc
    }
}

/// A dealer-generated triple `(R1, R2, R3 = R1 R2)`, each additively shared.
#[derive(Debug, Clone)]
pub struct BeaverTriple {
    pub r1: AdditiveShares,
    pub r2: AdditiveShares,
    pub r3: AdditiveShares,
}

impl BeaverTriple {
    /// Draws `R1` (a x b) and `R2` (b x c) uniformly and shares all three.
    pub fn deal(
        field: FieldSpec,
        dims: (usize, usize, usize),
        n_parties: usize,
        rng: &mut RngStream,
    ) -> Result<Self, SharingError> {
        let (a, b, c) = dims;
        let r1 = random_matrix(field, a, b, rng);
        let r2 = random_matrix(field, b, c, rng);
        let r3 = matmul_naive(&r1, &r2, &mut MultCounter::new())?;
        Self::from_matrices(&r1, &r2, &r3, n_parties, rng)
    }

    /// Shares caller-chosen triple components. `r3` must equal `r1 r2`.
    pub fn from_matrices(
        r1: &FieldMatrix,
        r2: &FieldMatrix,
        r3: &FieldMatrix,
        n_parties: usize,
        rng: &mut RngStream,
    ) -> Result<Self, SharingError> {
        Ok(Self {
            r1: AdditiveShares::share(r1, n_parties, rng)?,
            r2: AdditiveShares::share(r2, n_parties, rng)?,
            r3: AdditiveShares::share(r3, n_parties, rng)?,
        })
    }
}

fn check_parties(x: &AdditiveShares, y: &AdditiveShares) -> Result<(), SharingError> {
    if x.n_parties() != y.n_parties() {
        return Err(SharingError::InvalidParams(format!(
            "party counts differ: {} vs {}",
            x.n_parties(),
            y.n_parties()
        )));
    }
    Ok(())
}

/// Publicly opens `X - R` from the parties' local differences.
pub fn beaver_open(shares_x: &AdditiveShares, shares_r: &AdditiveShares) -> Result<FieldMatrix, SharingError> {
    check_parties(shares_x, shares_r)?;
    let mut opened: Option<FieldMatrix> = None;
    for (x, r) in shares_x.parts.iter().zip(&shares_r.parts) {
        let local = x.sub(r)?;
        opened = Some(match opened {
            None => local,
            Some(acc) => acc.add(&local)?,
        });
    }
    Ok(opened.expect("at least one party"))
}

/// Multiplies additively shared `A` and `B` with one triple.
pub fn beaver_multiply(
    shares_a: &AdditiveShares,
    shares_b: &AdditiveShares,
    triple: &BeaverTriple,
    counter: &mut MultCounter,
) -> Result<AdditiveShares, SharingError> {
    check_parties(shares_a, shares_b)?;
    check_parties(shares_a, &triple.r1)?;
    let (a, b) = shares_a.shape();
    let (b2, c) = shares_b.shape();
    if b != b2 || triple.r1.shape() != (a, b) || triple.r2.shape() != (b, c) || triple.r3.shape() != (a, c) {
        return Err(LinalgError::DimensionMismatch {
            op: "beaver_multiply",
            left: (a, b),
            right: (b2, c),
        }
        .into());
    }
    let d = beaver_open(shares_a, &triple.r1)?;
    let e = beaver_open(shares_b, &triple.r2)?;
    let de = matmul_naive(&d, &e, counter)?;
    let mut parts = Vec::with_capacity(shares_a.n_parties());
    for i in 0..shares_a.n_parties() {
        let mut local = triple.r3.parts[i].add(&matmul_naive(&d, &triple.r2.parts[i], counter)?)?;
        local = local.add(&matmul_naive(&triple.r1.parts[i], &e, counter)?)?;
        if i == 0 {
            local = local.add(&de)?;
        }
        parts.push(local);
    }
    Ok(AdditiveShares { parts })
}
