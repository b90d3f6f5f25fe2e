use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{partition_columns, random_matrix, FieldMatrix, LinalgError, MultCounter};
use crate::rng::RngStream;
use crate::sharing::{encode_a, encode_b, SharingParams};

use super::decode::decoding_system;
use super::{AgentShare, ProtocolConfig, ProtocolError};

/// Point sets tried before giving up: the default `1..=N`, then resamples.
pub const MAX_POINT_ATTEMPTS: usize = 64;

/// Public information the controller needs to decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderContext {
    pub params: SharingParams,
    pub field: FieldSpec,
    pub points: Vec<FieldElement>,
}

/// Partitions, masks and encodes `A`, `B`, then evaluates both encoders at
/// one point per agent.
///
/// Masks come from the labeled streams `mask-a` / `mask-b` of the config
/// seed. Points default to `1, ..., N`; if the resulting decoding system is
/// rank deficient, fresh distinct nonzero points are drawn from the `points`
/// stream.
pub fn deal_shares(
    config: &ProtocolConfig,
    a: &FieldMatrix,
    b: &FieldMatrix,
    counter: &mut MultCounter,
) -> Result<(Vec<AgentShare>, DecoderContext), ProtocolError> {
    config.validate()?;
    let m = config.params.m();
    for x in [a, b] {
        if x.shape() != (m, m) {
            return Err(LinalgError::DimensionMismatch {
                op: "deal_shares",
                left: (m, m),
                right: x.shape(),
            }
            .into());
        }
        if x.field() != config.field {
            return Err(LinalgError::FieldMismatch { op: "deal_shares" }.into());
        }
    }
    let (k, t) = (config.params.k(), config.params.t());
    let w = config.params.block_width();
    let a_blocks = partition_columns(a, k)?;
    let b_blocks = partition_columns(b, k)?;
    let masks = |label: &str| -> Vec<FieldMatrix> {
        (0..t - 1)
            .map(|l| random_matrix(config.field, m, w, &mut RngStream::derive(config.seed, label, l as u64)))
            .collect()
    };
    let ga = encode_a(&a_blocks, &masks("mask-a"))?;
    let gb = encode_b(&b_blocks, &masks("mask-b"))?;

    let points = select_points(config)?;
    let shares = points
        .iter()
        .enumerate()
        .map(|(id, &alpha)| AgentShare {
            agent_id: id,
            alpha,
            share_a: ga.evaluate_counted(alpha, counter),
            share_b: gb.evaluate_counted(alpha, counter),
        })
        .collect();
    let ctx = DecoderContext {
        params: config.params,
        field: config.field,
        points,
    };
    Ok((shares, ctx))
}

fn select_points(config: &ProtocolConfig) -> Result<Vec<FieldElement>, ProtocolError> {
    let f = config.field;
    let n = config.n_agents;
    let (k, t) = (config.params.k(), config.params.t());
    let full_rank = |pts: &[FieldElement]| {
        let sys = decoding_system(k, t, f, config.dof.as_ref(), pts);
        sys.rank() == sys.cols()
    };
    let default: Vec<FieldElement> = (1..=n as u64).map(|x| f.element(x)).collect();
    if full_rank(&default) {
        return Ok(default);
    }
    for attempt in 1..MAX_POINT_ATTEMPTS {
        let mut rng = RngStream::derive(config.seed, "points", attempt as u64);
        let mut pts: Vec<FieldElement> = Vec::with_capacity(n);
        while pts.len() < n {
            let x = f.sample_uniform(&mut rng);
            if !x.is_zero() && !pts.contains(&x) {
                pts.push(x);
            }
        }
        if full_rank(&pts) {
            tracing::debug!(attempt, "resampled evaluation points");
            return Ok(pts);
        }
    }
    Err(ProtocolError::PointSelection {
        attempts: MAX_POINT_ATTEMPTS,
    })
}
