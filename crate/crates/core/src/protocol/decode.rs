use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{FieldMatrix, LinalgError, MultCounter};
use crate::sharing::SymbolicProduct;

use super::{AgentResult, DecoderContext, ProtocolError};

/// Linear structure on the targets: `Z_(i,j) = sum_l Gamma[(i-1) + k(j-1), l] Lambda_l`
/// for `s` unknown latent blocks `Lambda_l`.
///
/// `gamma` is `k^2 x s` with rows in target-exponent order and must have full
/// column rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofConstraint {
    gamma: FieldMatrix,
}

impl DofConstraint {
    pub fn new(gamma: FieldMatrix) -> Result<Self, ProtocolError> {
        let (rows, s) = gamma.shape();
        if s == 0 || s > rows {
            return Err(ProtocolError::Config(format!(
                "constraint matrix is {rows}x{s}; need 1 <= s <= k^2"
            )));
        }
        if gamma.transpose().rank() != s {
            return Err(ProtocolError::Config("constraint matrix lacks full column rank".into()));
        }
        Ok(Self { gamma })
    }

    /// Every target block equal (`s = 1`).
    pub fn all_equal(k: usize, field: FieldSpec) -> Self {
        let ones = vec![field.one(); k * k];
        Self::new(FieldMatrix::from_elements(field, k * k, 1, &ones).expect("k^2 x 1"))
            .expect("a nonzero column has rank 1")
    }

    /// No constraint at all (`s = k^2`).
    pub fn unconstrained(k: usize, field: FieldSpec) -> Self {
        Self::new(FieldMatrix::identity(field, k * k)).expect("identity has full rank")
    }

    pub fn s(&self) -> usize {
        self.gamma.cols()
    }

    pub fn gamma(&self) -> &FieldMatrix {
        &self.gamma
    }

    pub(crate) fn check_for(&self, k: usize, field: FieldSpec) -> Result<(), ProtocolError> {
        if self.gamma.rows() != k * k || self.gamma.field() != field {
            return Err(ProtocolError::Config(format!(
                "constraint matrix is {}x{} over {}, expected {} rows over {field}",
                self.gamma.rows(),
                self.s(),
                self.gamma.field(),
                k * k
            )));
        }
        Ok(())
    }

    /// Target blocks `Z_nu` for `nu = 0..k^2` from the latent blocks.
    pub fn expand(&self, latent: &[FieldMatrix], counter: &mut MultCounter) -> Result<Vec<FieldMatrix>, ProtocolError> {
        if latent.len() != self.s() {
            return Err(LinalgError::LengthMismatch {
                expected: self.s(),
                got: latent.len(),
            }
            .into());
        }
        let f = self.gamma.field();
        let (r, c) = latent[0].shape();
        let mut out = Vec::with_capacity(self.gamma.rows());
        for nu in 0..self.gamma.rows() {
            let mut z = FieldMatrix::zeros(f, r, c);
            for (l, lam) in latent.iter().enumerate() {
                z.add_scaled_assign(lam, self.gamma.get(nu, l), counter)?;
            }
            out.push(z);
        }
        Ok(out)
    }
}

/// Decoder output with the bookkeeping the experiments report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    pub product: FieldMatrix,
    /// Columns of the decoding system.
    pub unknowns: usize,
    /// Results supplied.
    pub equations: usize,
    pub rank: usize,
    /// `Some(false)` when equations beyond the solved square subsystem
    /// disagree with the solution; `None` when there were none to check.
    pub residual_consistent: Option<bool>,
    pub decode_mults: MultCounter,
}

/// The `N x U` matrix the decoder inverts.
///
/// Without a constraint, columns are the support exponents of `M(x)` and row
/// `n` is `alpha_n^nu`. With one, the first `s` columns carry
/// `sum_nu Gamma[nu, l] alpha_n^nu` over the target exponents and the rest
/// are the mask-bearing exponents.
pub fn decoding_system(
    k: usize,
    t: usize,
    field: FieldSpec,
    dof: Option<&DofConstraint>,
    alphas: &[FieldElement],
) -> FieldMatrix {
    let prod = SymbolicProduct::of_encoders(k, t);
    let p = field.modulus();
    let mut values = Vec::new();
    let (cols, n_cols) = match dof {
        None => {
            let sup = prod.support();
            let n = sup.len();
            (sup, n)
        }
        Some(d) => {
            let masked = prod.masked_exponents();
            let n = d.s() + masked.len();
            (masked, n)
        }
    };
    for a in alphas {
        let a = a.value() % p;
        if let Some(d) = dof {
            for l in 0..d.s() {
                let mut acc = 0;
                for nu in 0..k * k {
                    let g = d.gamma.get(nu, l).value();
                    acc = field.add_raw(acc, field.mul_raw(g, field.pow_raw(a, nu as u64)));
                }
                values.push(acc);
            }
        }
        values.extend(cols.iter().map(|&nu| field.pow_raw(a, nu as u64)));
    }
    FieldMatrix::from_values(field, alphas.len(), n_cols, values).expect("row-major fill")
}

struct Solved {
    unknowns: Vec<FieldMatrix>,
    rank: usize,
    residual_consistent: Option<bool>,
}

fn solve_blockwise(
    system: &FieldMatrix,
    evals: &[&FieldMatrix],
    counter: &mut MultCounter,
) -> Result<Solved, ProtocolError> {
    let u = system.cols();
    let picked = system.independent_rows();
    if picked.len() < u {
        return Err(ProtocolError::InsufficientShares {
            needed: u,
            got: picked.len(),
        });
    }
    let f = system.field();
    let mut square = FieldMatrix::zeros(f, u, u);
    for (r, &row) in picked.iter().enumerate() {
        for c in 0..u {
            square.set_raw(r, c, system.raw(row, c));
        }
    }
    let inv = square.inverse(counter).map_err(|e| match e {
        LinalgError::Singular => ProtocolError::SingularSystem,
        other => other.into(),
    })?;
    let (br, bc) = evals[0].shape();
    let mut unknowns = Vec::with_capacity(u);
    for x in 0..u {
        let mut acc = FieldMatrix::zeros(f, br, bc);
        for (r, &row) in picked.iter().enumerate() {
            acc.add_scaled_assign(evals[row], inv.get(x, r), counter)?;
        }
        unknowns.push(acc);
    }
    let mut residual_consistent = None;
    for row in (0..system.rows()).filter(|r| !picked.contains(r)) {
        let mut predicted = FieldMatrix::zeros(f, br, bc);
        for (c, unk) in unknowns.iter().enumerate() {
            predicted.add_scaled_assign(unk, system.get(row, c), counter)?;
        }
        let ok = &predicted == evals[row];
        residual_consistent = Some(residual_consistent.unwrap_or(true) && ok);
    }
    Ok(Solved {
        unknowns,
        rank: picked.len(),
        residual_consistent,
    })
}

fn check_results(results: &[AgentResult], ctx: &DecoderContext) -> Result<(), ProtocolError> {
    let w = ctx.params.block_width();
    for r in results {
        if r.m_eval.shape() != (w, w) || r.m_eval.field() != ctx.field {
            return Err(LinalgError::DimensionMismatch {
                op: "reconstruct",
                left: (w, w),
                right: r.m_eval.shape(),
            }
            .into());
        }
    }
    if results.is_empty() {
        return Err(ProtocolError::InsufficientShares { needed: 1, got: 0 });
    }
    Ok(())
}

fn stack_targets(k: usize, targets: &[FieldMatrix]) -> Result<FieldMatrix, ProtocolError> {
    // block (i, j) of A^T B is A_i^T B_j, stored at exponent i + k j
    let grid: Vec<Vec<FieldMatrix>> = (0..k)
        .map(|i| (0..k).map(|j| targets[i + k * j].clone()).collect())
        .collect();
    Ok(FieldMatrix::from_block_grid(&grid)?)
}

/// Recovers `A^T B` from agent results by solving for every support
/// coefficient of `M(x)` and keeping the `k^2` targets.
pub fn reconstruct(results: &[AgentResult], ctx: &DecoderContext) -> Result<Reconstruction, ProtocolError> {
    check_results(results, ctx)?;
    let (k, t) = (ctx.params.k(), ctx.params.t());
    let alphas: Vec<FieldElement> = results.iter().map(|r| r.alpha).collect();
    let system = decoding_system(k, t, ctx.field, None, &alphas);
    let evals: Vec<&FieldMatrix> = results.iter().map(|r| &r.m_eval).collect();
    let mut counter = MultCounter::new();
    let solved = solve_blockwise(&system, &evals, &mut counter)?;
    // support is ascending and always starts with 0..k^2
    let product = stack_targets(k, &solved.unknowns[..k * k])?;
    Ok(Reconstruction {
        product,
        unknowns: system.cols(),
        equations: results.len(),
        rank: solved.rank,
        residual_consistent: solved.residual_consistent,
        decode_mults: counter,
    })
}

/// Recovers `A^T B` under a DOF constraint, solving only for the `s` latent
/// blocks and the mask-bearing coefficients.
pub fn reconstruct_dof(
    results: &[AgentResult],
    ctx: &DecoderContext,
    dof: &DofConstraint,
) -> Result<Reconstruction, ProtocolError> {
    check_results(results, ctx)?;
    let (k, t) = (ctx.params.k(), ctx.params.t());
    dof.check_for(k, ctx.field)?;
    let alphas: Vec<FieldElement> = results.iter().map(|r| r.alpha).collect();
    let system = decoding_system(k, t, ctx.field, Some(dof), &alphas);
    let evals: Vec<&FieldMatrix> = results.iter().map(|r| &r.m_eval).collect();
    let mut counter = MultCounter::new();
    let solved = solve_blockwise(&system, &evals, &mut counter)?;
    let targets = dof.expand(&solved.unknowns[..dof.s()], &mut counter)?;
    let product = stack_targets(k, &targets)?;
    Ok(Reconstruction {
        product,
        unknowns: system.cols(),
        equations: results.len(),
        rank: solved.rank,
        residual_consistent: solved.residual_consistent,
        decode_mults: counter,
    })
}
