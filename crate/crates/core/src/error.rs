use thiserror::Error;

use crate::gridmap::CellIndex;

/// Errors produced by the planning library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed map image: {0}")]
    MalformedImage(String),

    #[error("malformed map metadata: {0}")]
    MalformedMetadata(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("resolution must be positive, got {0}")]
    NonPositiveResolution(f64),

    #[error("free threshold {free} exceeds occupied threshold {occupied}")]
    ThresholdOrder { free: f64, occupied: f64 },

    #[error("world recipe `{recipe}` does not fit in {width}x{height} cells: {reason}")]
    WorldTooSmall {
        recipe: String,
        width: usize,
        height: usize,
        reason: String,
    },

    #[error("cell ({}, {}) is not free", .0.row, .0.col)]
    NotFree(CellIndex),

    #[error("cell ({}, {}) is outside the grid", .0.row, .0.col)]
    OutOfBounds(CellIndex),

    #[error("grid has no free cells")]
    NoFreeCells,

    #[error("empty cell set")]
    EmptySet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "tour leg ({}, {}) -> ({}, {}) has no detour in the visibility graph or the roadmap",
        .tail.row, .tail.col, .head.row, .head.col
    )]
    StrandedTour { tail: CellIndex, head: CellIndex },

    #[error(
        "tour leg {index} ({}, {}) -> ({}, {}) has no collision-free grid path",
        .from.row, .from.col, .to.row, .to.col
    )]
    DisconnectedLeg {
        index: usize,
        from: CellIndex,
        to: CellIndex,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
