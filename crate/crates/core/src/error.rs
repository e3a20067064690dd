use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain sizes differ: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("universe sizes differ: {0} vs {1}")]
    UniverseMismatch(usize, usize),

    #[error("sandwich element {0} is not idempotent")]
    NotIdempotent(String),

    #[error("element set is not closed: {0} escapes the list")]
    NotClosed(String),

    #[error("enumeration refused: {what} is {size}, above the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("not a congruence: ({x}, {y}) related but {side} translation by {s} is not")]
    NotCongruence { x: usize, y: usize, s: usize, side: Side },

    #[error("relation is not an equivalence")]
    NotEquivalence,

    #[error("not a group: {0}")]
    NotGroup(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("system is not coherent: restriction from {from} into {to} is not contained")]
    Incoherent { from: String, to: String },

    #[error("rank condition violated: rank(xi) = {xi} > rank(theta) = {theta}")]
    RankViolation { xi: usize, theta: usize },

    #[error("the universal congruence has no decomposition")]
    Universal,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}
