use thiserror::Error;

use crate::scalar::BaseRing;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ring mismatch: {left:?} vs {right:?}")]
    RingMismatch { left: BaseRing, right: BaseRing },

    #[error("cyclotomic parameter mismatch: m={left} vs m={right}")]
    OrderMismatch { left: u32, right: u32 },

    #[error("unsupported cyclotomic order m={0} (need m >= 3)")]
    InvalidOrder(u32),

    #[error("automorphism exponent {k} is not coprime to m={m}")]
    NotCoprime { k: i64, m: i64 },

    #[error("element is not in the base field: coefficient {index} is nonzero")]
    NotInBaseField { index: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown code '{0}'")]
    UnknownCode(String),

    #[error("invalid code definition: {0}")]
    InvalidCode(String),

    #[error("unsupported constellation size M={0} (M must be 4^t)")]
    InvalidConstellation(u32),

    #[error("search space too large: {size} candidates exceeds limit {limit}")]
    TooLarge { size: f64, limit: f64 },

    #[error("rank-deficient lattice model (|r_kk| = {0:e})")]
    RankDeficient(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("trial {trial} at {snr_db} dB: {source}")]
    Trial {
        trial: u64,
        snr_db: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
