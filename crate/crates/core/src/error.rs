use thiserror::Error;

/// Errors raised by the toolkit. Every variant carries enough context to
/// locate the offending input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point ({x}, {y}) lies outside the unmasked domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("connection is not pure imaginary at ({x}, {y}): real part {real_part:e}")]
    NonPureConnection { x: f64, y: f64, real_part: f64 },

    #[error("imaginary part of alpha does not vanish: max violation {max:e}")]
    RealityViolation { max: f64 },

    #[error("singular configuration at node {node}: {what} = {value:e}")]
    SingularConfiguration {
        node: usize,
        what: &'static str,
        value: f64,
    },

    #[error("degenerate family: theta = {theta} is too close to 0 or pi/2")]
    DegenerateFamily { theta: f64 },

    #[error("quaternion is not unit: |L| = {norm}")]
    NonUnit { norm: f64 },

    #[error("unstable evolution at step {step}: norm grew by factor {factor:e}")]
    Unstable { step: usize, factor: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("holonomy did not converge: change {change:e} at refinement {refinement}")]
    NotConverged { change: f64, refinement: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
