use thiserror::Error;

use crate::grid::CellIndex;

pub type Result<T> = std::result::Result<T, Error>;

/// One problem found while validating a configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// Path-like locator, e.g. `scaling[3].cell`.
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("map for cell {cell} is not a contraction (factor {factor})")]
    NotContraction { cell: CellIndex, factor: f64 },

    #[error("scaling field of cell {cell} reaches |s| = {value} at ({x}, {y})")]
    MagnitudeViolation {
        cell: CellIndex,
        value: f64,
        x: f64,
        y: f64,
    },

    #[error(
        "scaling field of cell {cell} does not vanish on its boundary: |s| = {value} at ({x}, {y})"
    )]
    BoundaryNonZero {
        cell: CellIndex,
        value: f64,
        x: f64,
        y: f64,
    },

    #[error("invalid scaling field for cell {cell}: {message}")]
    ScalingField { cell: CellIndex, message: String },

    #[error("boundary curve {curve}: {message}")]
    Curve { curve: String, message: String },

    #[error("cell {cell}: boundary curves disagree at corner ({x}, {y}) by {gap}")]
    Compatibility {
        cell: CellIndex,
        x: f64,
        y: f64,
        gap: f64,
    },

    #[error(
        "blend for cell {cell} violates the {edge} edge constraint: error {error} at ({x}, {y})"
    )]
    EdgeConstraint {
        cell: CellIndex,
        edge: &'static str,
        error: f64,
        x: f64,
        y: f64,
    },

    #[error("expression `{source_text}`: {message}")]
    Expression {
        source_text: String,
        message: String,
    },

    #[error("configuration has {} problem(s):\n{}", .0.len(), format_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("resolution: {0}")]
    Resolution(String),

    #[error(
        "fixed-point iteration did not converge in {iterations} iterations (last bound {bound:e})"
    )]
    NonConvergence { iterations: usize, bound: f64 },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("box counting: {0}")]
    BoxCounting(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}
