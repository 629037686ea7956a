use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} lies beyond the explicit enumeration table (length {len})")]
    BeyondTable { index: u64, len: usize },

    #[error("multi-index {0:?} is not covered by the explicit enumeration table")]
    NotInTable(Vec<u32>),

    #[error("invalid enumeration table: {0}")]
    InvalidTable(String),

    #[error("unknown tag `{0}`")]
    UnknownTag(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("partial sum index {requested} beyond materialized prefix (through {through})")]
    BeyondMaterialized { requested: u64, through: u64 },

    #[error("block would overwrite frozen coefficient at index {index} (frozen through {frozen})")]
    FrozenPrefix { index: u64, frozen: u64 },

    #[error("sampling would produce {0} points (limit 10^7)")]
    TooManyPoints(u128),

    #[error("empty sample grid")]
    EmptyGrid,

    #[error("empty compact set: {0}")]
    EmptySet(String),

    #[error("pieces overlap: no factor separates the inner and outer blocks")]
    OverlappingPieces,

    #[error("degree budget exhausted: best sup error {best_error:e} >= tolerance {tolerance:e}")]
    BudgetExhausted { best_error: f64, tolerance: f64 },

    #[error("least-squares system too ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("index set exhausted: no admissible index >= {floor} within scan bound")]
    IndexSetExhausted { floor: u64 },

    #[error("enumeration `{0}` is not graded; the staged constructor requires a graded scheme")]
    NotGraded(String),

    #[error("target catalog index {0} is outside the supported range")]
    CatalogIndex(u64),

    #[error("slice axis {0} has no interior to host a test circle")]
    NoInterior(usize),

    #[error("certificate refused: {0}")]
    Refused(String),

    #[error("divisor vanishes on the outer compact (min |z - c| = {0:e})")]
    DivisorVanishes(f64),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
