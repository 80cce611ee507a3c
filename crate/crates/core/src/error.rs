use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("degenerate sample: variance is zero")]
    DegenerateSample,

    #[error("sample too small: {statistic} needs N >= {min}, got N = {n}")]
    SampleTooSmall {
        statistic: &'static str,
        n: usize,
        min: usize,
    },

    #[error("ALM undefined for N < 4 (got N = {0})")]
    AlmUndefined(usize),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sample size below table range: N = {n}, smallest tabulated N = {min}")]
    BelowTableRange { n: usize, min: usize },

    #[error("quantile outside tabulated range: p = {p} not in [{lo}, {hi}]")]
    OutsideTabulatedRange { p: f64, lo: f64, hi: f64 },

    #[error("unsupported format: version {0}")]
    UnsupportedFormat(String),

    #[error("corrupt table: {0}")]
    CorruptTable(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ill-conditioned fit; reduce K (p = {p}, K = {order})")]
    IllConditioned { p: f64, order: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Process exit status for the command-line front end:
    /// 1 usage, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            Error::IllConditioned { .. } => 3,
            Error::Domain(_) | Error::OutsideTabulatedRange { .. } => 3,
            _ => 2,
        }
    }
}
