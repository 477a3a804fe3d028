//! Two-terminal encryption of correlated sources under correlated keys.
//!
//! Each terminal one-time-pads its source block with its own key block and
//! then compresses the result with an affine map. The receiver, holding both
//! key blocks, strips the compressed keys and jointly decodes with a
//! minimum-entropy decoder. The crate provides the finite-field kernel, the
//! encoders and decoder, and exact computation of the reliability and
//! leakage figures of such systems, plus the rate regions they are measured
//! against.

pub mod codec;
pub mod crypto;
pub mod error;
pub mod gf;
pub mod metrics;
pub mod prob;
pub mod regions;

pub use codec::{build_decoder_table, AffineEncoderPair, DecoderTable, DecodingSet};
pub use crypto::{Cryptosystem, Encryptor, SystemDims};
pub use error::{Error, Result};
pub use gf::{Field, FieldMatrix, FieldVector, WordSpace};
pub use metrics::{build_report, SecurityReport, Thresholds};
pub use prob::{BlockDistribution, EntropySet, JointPmf};
pub use regions::{RatePoint, RateRegion, RegionKind};
