//! Multi-copy discrimination of coherent and thermal light.
//!
//! The numerical modules are generic over the scalar type (`f32` or `f64`);
//! the aliases below fix it to `f64`, which is what the experiment pipeline
//! and the command line use.

// NaN inputs must fail the domain checks, hence `!(x >= lo)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod awgn;
pub mod chernoff;
pub mod decision;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod optimize;
pub mod photon;
pub mod receivers;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use photon::DetectorModel;
pub use receivers::ReceiverKind;

pub type DensityMatrix = fock::DensityMatrix<f64>;
pub type PhotonPmf = photon::PhotonPmf<f64>;
pub type SingleCopyStats = receivers::SingleCopyStats<f64>;
pub type ReceiverSpec = receivers::ReceiverSpec<f64>;
pub type ChernoffResult = chernoff::ChernoffResult<f64>;
pub type MultiCopyPlan = decision::MultiCopyPlan<f64>;
