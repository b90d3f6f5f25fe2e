//! End-to-end simulation of the secure multiplication protocol.
//!
//! 1. [`deal_shares`]: partition, mask, encode, and pick public points.
//! 2. [`agent_compute`]: each agent forms `g_A(alpha)^T g_B(alpha)` with its
//!    configured [`LocalOperator`].
//! 3. [`reconstruct`] / [`reconstruct_dof`]: the controller solves the
//!    generalized Vandermonde system entrywise and stacks the target blocks
//!    into `A^T B`.
//!
//! Agents run in-process; "channels" are memory handoffs with byte
//! accounting in the [`Transcript`].

mod agent;
mod deal;
mod decode;
mod transcript;

use rayon::prelude::*;
use thiserror::Error;

use crate::bilinear::{BilinearError, OperatorChoice};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{FieldMatrix, LinalgError, MultCounter};
use crate::sharing::{SharingError, SharingParams, SymbolicProduct};

pub use agent::{agent_compute, AgentEnv, LocalOperator};
pub use deal::{deal_shares, DecoderContext, MAX_POINT_ATTEMPTS};
pub use decode::{decoding_system, reconstruct, reconstruct_dof, DofConstraint, Reconstruction};
pub use transcript::{AgentTraffic, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no invertible evaluation point set found after {attempts} attempts")]
    PointSelection { attempts: usize },
    #[error("insufficient shares: system needs rank {needed}, got rank {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("decoding system is singular")]
    SingularSystem,
    #[error("local operator drew {draws} random words; agent output must be a function of the shares")]
    NondeterministicOperator { draws: u64 },
    #[error(transparent)]
    Sharing(#[from] SharingError),
    #[error(transparent)]
    Bilinear(#[from] BilinearError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Run parameters for one multiplication.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub params: SharingParams,
    pub n_agents: usize,
    pub field: FieldSpec,
    pub seed: u64,
    pub operator: OperatorChoice,
    pub dof: Option<DofConstraint>,
}

impl ProtocolConfig {
    /// Dense operator, no DOF constraint, and the minimal agent count.
    pub fn new(params: SharingParams, field: FieldSpec, seed: u64) -> Self {
        Self {
            params,
            n_agents: min_agents_empirical(params.k(), params.t(), None),
            field,
            seed,
            operator: OperatorChoice::Dense,
            dof: None,
        }
    }

    pub fn with_agents(mut self, n: usize) -> Self {
        self.n_agents = n;
        self
    }

    pub fn with_operator(mut self, operator: OperatorChoice) -> Self {
        self.operator = operator;
        self
    }

    /// Sets the constraint and lowers `n_agents` to the reduced minimum.
    pub fn with_dof(mut self, dof: DofConstraint) -> Self {
        self.n_agents = min_agents_empirical(self.params.k(), self.params.t(), Some(dof.s()));
        self.dof = Some(dof);
        self
    }

    /// Number of unknown coefficient blocks the decoder solves for.
    pub fn unknowns(&self) -> usize {
        let (k, t) = (self.params.k(), self.params.t());
        min_agents_empirical(k, t, self.dof.as_ref().map(DofConstraint::s))
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let needed = self.unknowns();
        if self.n_agents < needed {
            return Err(ProtocolError::Config(format!(
                "{} agents cannot determine {needed} unknown coefficient blocks",
                self.n_agents
            )));
        }
        if self.n_agents as u64 > self.field.modulus() - 1 {
            return Err(ProtocolError::Config(format!(
                "{} needs {} distinct nonzero points but has only {}",
                self.field,
                self.n_agents,
                self.field.modulus() - 1
            )));
        }
        if let OperatorChoice::Scheme { scheme, .. } = &self.operator {
            if scheme.field() != self.field {
                return Err(ProtocolError::Config(format!(
                    "operator verified over {}, protocol runs over {}",
                    scheme.field(),
                    self.field
                )));
            }
        }
        if let Some(dof) = &self.dof {
            dof.check_for(self.params.k(), self.field)?;
        }
        Ok(())
    }
}

/// One agent's stored evaluations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentShare {
    pub agent_id: usize,
    pub alpha: FieldElement,
    pub share_a: FieldMatrix,
    pub share_b: FieldMatrix,
}

/// What an agent sends back, plus its accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentResult {
    pub agent_id: usize,
    pub alpha: FieldElement,
    pub m_eval: FieldMatrix,
    pub mults: MultCounter,
    pub upload_elements: u64,
    pub download_elements: u64,
}

/// Full output of [`run_protocol_detailed`].
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub shares: Vec<AgentShare>,
    pub results: Vec<AgentResult>,
    pub reconstruction: Reconstruction,
    pub transcript: Transcript,
}

/// Deal, compute every agent in parallel, and decode.
pub fn run_protocol_detailed(
    config: &ProtocolConfig,
    a: &FieldMatrix,
    b: &FieldMatrix,
) -> Result<ProtocolRun, ProtocolError> {
    let mut dealer = MultCounter::new();
    let (shares, ctx) = deal_shares(config, a, b, &mut dealer)?;
    let results: Vec<AgentResult> = shares
        .par_iter()
        .map(|share| {
            let mut env = AgentEnv::new(config.seed, share.agent_id);
            agent_compute(share, &config.operator, &mut env)
        })
        .collect::<Result<_, _>>()?;
    let reconstruction = match &config.dof {
        None => reconstruct(&results, &ctx)?,
        Some(dof) => reconstruct_dof(&results, &ctx, dof)?,
    };
    let transcript = Transcript::from_run(config.field, &dealer, &results, &reconstruction);
    Ok(ProtocolRun {
        shares,
        results,
        reconstruction,
        transcript,
    })
}

/// Runs the protocol and returns `A^T B` with its transcript.
pub fn run_protocol(
    config: &ProtocolConfig,
    a: &FieldMatrix,
    b: &FieldMatrix,
) -> Result<(FieldMatrix, Transcript), ProtocolError> {
    let run = run_protocol_detailed(config, a, b)?;
    Ok((run.reconstruction.product, run.transcript))
}

/// Number of unknown coefficient blocks in the entrywise system, which is
/// the minimal agent count for generic points. Without a DOF constraint this
/// is the support size of `M(x)`; with `s` latent blocks it is `s` plus the
/// number of mask-bearing exponents.
pub fn min_agents_empirical(k: usize, t: usize, dof_s: Option<usize>) -> usize {
    let prod = SymbolicProduct::of_encoders(k, t);
    match dof_s {
        None => prod.support().len(),
        Some(s) => s + prod.masked_exponents().len(),
    }
}
