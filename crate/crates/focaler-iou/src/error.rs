use thiserror::Error;

/// Errors produced by box construction, interval validation and the
/// simulation/check drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box (cx={cx}, cy={cy}, w={w}, h={h}): {reason}")]
    InvalidBox {
        cx: f64,
        cy: f64,
        w: f64,
        h: f64,
        reason: &'static str,
    },

    #[error("invalid corner box ({x1}, {y1}, {x2}, {y2}): {reason}")]
    InvalidCorners {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
        reason: &'static str,
    },

    #[error("invalid focaler interval (d={d}, u={u}): require 0 <= d < u <= 1")]
    InvalidInterval { d: f64, u: f64 },

    #[error("iou value {value} is not a finite number in [0, 1]")]
    IouOutOfRange { value: f64 },

    #[error("invalid siou params (theta={theta}, eps={eps}): require theta > 0 and eps > 0")]
    InvalidSiouParams { theta: f64, eps: f64 },

    #[error("unknown loss kind {token:?}; expected one of iou, giou, diou, ciou, eiou, siou")]
    UnknownLossKind { token: String },

    #[error("unknown focus mode {token:?}; expected focus_hard or focus_easy")]
    UnknownFocusMode { token: String },

    #[error("{what} must not be empty")]
    EmptyInput { what: &'static str },

    #[error("invalid scenario field {field}: {reason}")]
    InvalidScenario {
        field: &'static str,
        reason: &'static str,
    },

    #[error(
        "could not hit iou range ({lo}, {hi}) within {attempts} anchor perturbations; \
         the range is infeasible for the configured sizes"
    )]
    InfeasibleIouRange { lo: f64, hi: f64, attempts: u32 },

    #[error("finite-difference step on {param} produced an invalid box even after shrinking")]
    FdStepInvalid { param: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
