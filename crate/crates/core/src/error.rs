use thiserror::Error;

use crate::group::MAX_ORDER;

#[derive(Debug, Error)]
pub enum Error {
    /// Tables with inconsistent dimensions or out-of-range entries.
    #[error("structural error: {0}")]
    Structural(String),
    #[error("group order {0} exceeds the supported limit of {MAX_ORDER} elements")]
    OrderTooLarge(usize),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("unbound set variable `{0}`")]
    UnboundVariable(String),
    #[error("sets belong to different groups")]
    MixedGroups,
    #[error("empty set has no Lipschitz data")]
    EmptyLipschitz,
    #[error("no cover exists: element {element} lies in no candidate ball")]
    NoCover { element: usize },
    #[error("search budget of {budget} nodes exceeded; value lies in [{lower}, {upper}]")]
    BudgetExceeded { budget: u64, lower: usize, upper: usize },
    #[error("invalid scale ladder: {0}")]
    InvalidLadder(String),
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid specification: {0}")]
    Spec(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Lie(#[from] crate::lie::LieError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
