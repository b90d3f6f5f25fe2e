use crate::bilinear::{lift_apply, OperatorChoice};
use crate::linalg::{matmul_naive, FieldMatrix, MultCounter};
use crate::rng::RngStream;

use super::{AgentResult, AgentShare, ProtocolError};

/// Per-agent execution environment.
///
/// The stream is handed to operators only so that audits can prove it went
/// unused: any draw during [`agent_compute`] is reported as an error.
#[derive(Debug, Clone)]
pub struct AgentEnv {
    pub counter: MultCounter,
    rng: RngStream,
}

impl AgentEnv {
    pub fn new(seed: u64, agent_id: usize) -> Self {
        Self {
            counter: MultCounter::new(),
            rng: RngStream::derive(seed, "agent-local", agent_id as u64),
        }
    }

    pub fn rng(&mut self) -> &mut RngStream {
        &mut self.rng
    }

    pub fn rng_draws(&self) -> u64 {
        self.rng.draws()
    }
}

/// A local multiplication routine an agent can run on its two shares.
pub trait LocalOperator: Send + Sync {
    fn label(&self) -> String;

    /// Returns `lhs * rhs`.
    fn multiply(&self, lhs: &FieldMatrix, rhs: &FieldMatrix, env: &mut AgentEnv) -> Result<FieldMatrix, ProtocolError>;
}

impl LocalOperator for OperatorChoice {
    fn label(&self) -> String {
        OperatorChoice::label(self)
    }

    fn multiply(&self, lhs: &FieldMatrix, rhs: &FieldMatrix, env: &mut AgentEnv) -> Result<FieldMatrix, ProtocolError> {
        match self {
            OperatorChoice::Dense => Ok(matmul_naive(lhs, rhs, &mut env.counter)?),
            OperatorChoice::Scheme { scheme, depth, .. } => Ok(lift_apply(scheme, lhs, rhs, *depth, &mut env.counter)?),
        }
    }
}

/// Computes `M(alpha) = g_A(alpha)^T g_B(alpha)` for one agent.
pub fn agent_compute(
    share: &AgentShare,
    operator: &dyn LocalOperator,
    env: &mut AgentEnv,
) -> Result<AgentResult, ProtocolError> {
    let before_counter = env.counter;
    let before_draws = env.rng_draws();
    let lhs = share.share_a.transpose();
    let m_eval = operator.multiply(&lhs, &share.share_b, env)?;
    let draws = env.rng_draws() - before_draws;
    if draws != 0 {
        return Err(ProtocolError::NondeterministicOperator { draws });
    }
    let expected = (share.share_a.cols(), share.share_b.cols());
    if m_eval.shape() != expected {
        return Err(ProtocolError::Config(format!(
            "operator {} returned shape {:?}, expected {expected:?}",
            operator.label(),
            m_eval.shape()
        )));
    }
    let mults = MultCounter {
        scalar_mults: env.counter.scalar_mults - before_counter.scalar_mults,
        base_products: env.counter.base_products - before_counter.base_products,
    };
    let (m, w) = share.share_a.shape();
    Ok(AgentResult {
        agent_id: share.agent_id,
        alpha: share.alpha,
        upload_elements: (2 * m * w) as u64,
        download_elements: (m_eval.rows() * m_eval.cols()) as u64,
        m_eval,
        mults,
    })
}
