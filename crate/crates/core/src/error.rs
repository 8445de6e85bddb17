use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}; expected 2 or 3")]
    UnsupportedDimension(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid of {cells} cells exceeds the budget of {budget} cells")]
    CellBudget { cells: usize, budget: usize },
    #[error("invalid mask: {0}")]
    InvalidMask(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no path from cell {from} to cell {to}")]
    NoPath { from: usize, to: usize },
    #[error("radius {radius} is below the discretization floor {floor}")]
    BelowResolution { radius: f64, floor: f64 },

    #[error("domain generation failed: {reason}")]
    GenerationFailed {
        reason: String,
        /// Coarsest cell size at which generation is expected to succeed.
        min_feasible_h: Option<f64>,
    },
    #[error("generated domain is disconnected: {0}")]
    ConnectivityFailed(String),
    #[error("level {level} is too deep for this resolution (max {max})")]
    LevelTooDeep { level: u32, max: u32 },

    #[error("measure has zero total mass")]
    DegenerateMeasure,

    #[error("no admissible center at radius {radius}")]
    EmptyCandidates { radius: f64 },
    #[error("seed cell {0} is not an admissible center")]
    SeedNotAdmissible(usize),
    #[error("no ball of the collection touches the boundary")]
    NoBoundaryTouching,
    #[error("depth {depth} unresolvable: eta^K r0 = {finest} < 4h = {floor}")]
    DepthUnresolvable { depth: usize, finest: f64, floor: f64 },
    #[error("eta = {eta} violates the bound eta < {bound}")]
    EtaOutOfRange { eta: f64, bound: f64 },
    #[error("tree has no complete root-to-leaf branch")]
    NoCompleteBranch,
    #[error("cell {0} is not a center of the collection")]
    NotInCollection(usize),
    #[error("node {0} has a halted or missing ancestor")]
    BrokenAncestry(usize),
    #[error("path vertex {0} lies outside the domain")]
    PathLeavesDomain(usize),
    #[error("eta = {eta} too large for the test function (need eta < {bound})")]
    EtaTooLarge { eta: f64, bound: f64 },

    #[error("operation supports 2D artifacts only")]
    Unsupported3D,
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
