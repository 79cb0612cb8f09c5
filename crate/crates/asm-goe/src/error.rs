use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid array: {0}")]
    InvalidArray(String),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("enumeration cap exceeded: n = {n}, cap = {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("odd or non skew-symmetric matrix: {0}")]
    NotSkew(String),
    #[error("face parity violated at face {0}")]
    FaceParity(String),
    #[error("not an edge of the dimer graph: {0}")]
    NotAnEdge(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
