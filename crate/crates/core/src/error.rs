use thiserror::Error;

pub type Result<T> = std::result::Result<T, SscError>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum SscError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed data: {0}")]
    Data(String),

    #[error("zero-norm vector under cosine distance")]
    ZeroNorm,

    #[error("index ({row}, {col}) out of range for {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("gram matrix would have {cols} columns, cap is {cap}")]
    ColumnCapExceeded { cols: usize, cap: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch} (learning rate {lr:e}): loss = {loss}")]
    Divergence { epoch: usize, lr: f64, loss: f64 },

    #[error("affinity row {row} has an all-zero kernel; try a larger bandwidth sigma")]
    KernelUnderflow { row: usize },

    #[error("rank deficiency: only {found} singular values above tolerance, {wanted} requested")]
    RankDeficient { found: usize, wanted: usize },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<SscError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SscError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            SscError::Config(_) | SscError::InvalidArgument(_) => ErrorKind::Config,
            SscError::Data(_)
            | SscError::DimensionMismatch(_)
            | SscError::ZeroNorm
            | SscError::IndexOutOfRange { .. }
            | SscError::DuplicateEntry { .. }
            | SscError::ColumnCapExceeded { .. } => ErrorKind::Data,
            SscError::NonFinite(_)
            | SscError::Divergence { .. }
            | SscError::KernelUnderflow { .. }
            | SscError::RankDeficient { .. } => ErrorKind::Numerical,
            SscError::Stage { source, .. } => source.kind(),
            SscError::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> SscError {
        match self {
            e @ SscError::Stage { .. } => e,
            e => SscError::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}
