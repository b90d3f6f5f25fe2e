use crate::field::FieldSpec;
use crate::linalg::MultCounter;

use super::{AgentResult, Reconstruction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentTraffic {
    pub agent_id: usize,
    /// Field elements received from the dealer (both shares).
    pub upload_elements: u64,
    /// Field elements returned to the controller.
    pub download_elements: u64,
    pub mults: MultCounter,
}

/// Communication and multiplication accounting for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub element_bits: u32,
    pub agents: Vec<AgentTraffic>,
    pub dealer_mults: MultCounter,
    pub decoder_mults: MultCounter,
}

impl Transcript {
    pub(crate) fn from_run(
        field: FieldSpec,
        dealer: &MultCounter,
        results: &[AgentResult],
        reconstruction: &Reconstruction,
    ) -> Self {
        Self {
            element_bits: field.element_bits(),
            agents: results
                .iter()
                .map(|r| AgentTraffic {
                    agent_id: r.agent_id,
                    upload_elements: r.upload_elements,
                    download_elements: r.download_elements,
                    mults: r.mults,
                })
                .collect(),
            dealer_mults: *dealer,
            decoder_mults: reconstruction.decode_mults,
        }
    }

    /// `ceil(elements * bits / 8)`.
    pub fn bytes(&self, elements: u64) -> u64 {
        (elements * u64::from(self.element_bits)).div_ceil(8)
    }

    /// Largest per-agent upload in bytes.
    pub fn upload_bytes_per_agent(&self) -> u64 {
        self.bytes(self.agents.iter().map(|a| a.upload_elements).max().unwrap_or(0))
    }

    pub fn download_bytes_per_agent(&self) -> u64 {
        self.bytes(self.agents.iter().map(|a| a.download_elements).max().unwrap_or(0))
    }

    pub fn agent_mults(&self) -> MultCounter {
        self.agents.iter().map(|a| a.mults).sum()
    }

    /// Dealer, agents and decoder together.
    pub fn total_mults(&self) -> u64 {
        self.dealer_mults.scalar_mults + self.agent_mults().scalar_mults + self.decoder_mults.scalar_mults
    }
}
