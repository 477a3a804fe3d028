use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("field modulus {0} is not a prime in 2..=251")]
    InvalidModulus(u32),

    #[error("residue {value} out of range for GF({q})")]
    ResidueOutOfRange { value: u32, q: u32 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("field mismatch: GF({left}) vs GF({right})")]
    FieldMismatch { left: u32, right: u32 },

    #[error("matrix is not surjective: rank {rank} < {cols} columns")]
    NotSurjective { rank: usize, cols: usize },

    #[error("invalid distribution: {0}")]
    InvalidPmf(String),

    #[error("divergence is infinite: support of p is not contained in support of r")]
    InfiniteDivergence,

    #[error("{what} needs {size} elements, exceeding the enumeration cap {cap}")]
    ResourceCap {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}

/// Fails with [`Error::ResourceCap`] when `size` exceeds `cap`.
pub(crate) fn ensure_cap(what: &'static str, size: u128, cap: u128) -> Result<()> {
    if size > cap {
        Err(Error::ResourceCap { what, size, cap })
    } else {
        Ok(())
    }
}
