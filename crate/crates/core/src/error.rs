use thiserror::Error;

/// Errors produced by grid operations, symbol construction, the solver and I/O.
#[derive(Debug, Error)]
pub enum RbError {
    #[error("invalid grid: n = {n} (need a power of two >= 8)")]
    InvalidGrid { n: usize },

    #[error("non-finite value in {context} at grid index ({i}, {j})")]
    NonFinite { context: String, i: usize, j: usize },

    #[error(
        "Hermitian symmetry violated at mode ({k1}, {k2}): |c(-k) - conj(c(k))| = {deviation:.3e} (tol {tol:.3e})"
    )]
    SymmetryViolation {
        k1: i64,
        k2: i64,
        deviation: f64,
        tol: f64,
    },

    #[error("mean vorticity {mean:.3e} exceeds {tol:.3e}; periodic Biot-Savart needs a mean-free field")]
    NonzeroMean { mean: f64, tol: f64 },

    #[error("invalid norm exponent p = {p} (need p >= 1 or p = inf)")]
    InvalidLpExponent { p: f64 },

    #[error("symbol parameter out of range: {0}")]
    SymbolParam(String),

    #[error("dyadic partition needs j_max >= 2; n = {n} gives j_max = {j_max}")]
    PartitionTooCoarse { n: usize, j_max: i32 },

    #[error("block index j = {j} outside [{lo}, {hi}]")]
    BlockIndex { j: i32, lo: i32, hi: i32 },

    #[error("{0}")]
    InvalidInput(String),

    #[error("solution blew up at t = {t:.6}: non-finite coefficient detected")]
    BlowUp { t: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RbError>;
