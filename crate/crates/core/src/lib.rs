//! Perfectly secure distributed matrix multiplication over prime fields.
//!
//! A dealer splits `A` and `B` into `k` column blocks, hides them in sparse
//! masking polynomials and hands each of `N` agents one evaluation of each.
//! Agents multiply their shares locally (densely, or with any verified
//! bilinear scheme such as Strassen's) and a controller interpolates
//! `A^T B` from the returned evaluations. Any `t - 1` agents together see
//! uniformly random data.
//!
//! Modules:
//!
//! * [`field`] and [`linalg`]: exact arithmetic in `F_p` and dense matrices.
//! * [`sharing`]: the encoders, exponent-support calculus, thresholds and
//!   matrix Beaver triples.
//! * [`bilinear`]: rank-`T` multiplication schemes, their verification,
//!   recursive lifting and the scheme file format.
//! * [`protocol`]: dealing, agent computation, reconstruction (including the
//!   reduced-DOF decoder) and communication accounting.
//! * [`privacy`]: exhaustive view-distribution audits on tiny fields.

pub mod bilinear;
pub mod field;
pub mod linalg;
pub mod privacy;
pub mod protocol;
pub mod rng;
pub mod sharing;

pub use field::{FieldElement, FieldError, FieldSpec};
pub use linalg::{matmul_naive, FieldMatrix, LinalgError, MultCounter};
pub use rng::RngStream;
