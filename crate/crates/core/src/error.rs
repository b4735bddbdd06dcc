use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("degenerate null-form index pair ({0}, {0})")]
    DegenerateIndexPair(usize),

    #[error("expected a {expected}-dimensional grid, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid field data: {0}")]
    InvalidField(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("CFL condition violated: dt * |xi|_max = {product:.4} exceeds {limit}")]
    Cfl { product: f64, limit: f64 },

    #[error("light cone leaves the box: box length {box_length} <= 2 * {t_final} + {support}")]
    WrapAround {
        box_length: f64,
        t_final: f64,
        support: f64,
    },

    #[error("invalid integrator configuration: {0}")]
    Integrator(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
