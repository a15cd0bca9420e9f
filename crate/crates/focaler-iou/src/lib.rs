//! Bounding-box regression loss toolkit.
//!
//! Implements the IoU metric family (IoU, GIoU, DIoU, CIoU, EIoU, SIoU), the
//! Focaler linear-interval remapping of the IoU term and its composition with
//! every family member, analytic gradients with a finite-difference checker,
//! a synthetic gradient-descent regression simulator, and sample-difficulty
//! analytics that recommend a focusing interval.

pub mod analysis;
mod error;
pub mod focaler;
pub mod geometry;
pub mod gradients;
pub mod metrics;
pub mod simulator;

pub use analysis::{
    iou_histogram, recommend_interval, AnalysisReport, FocusMode, IntervalRecommendation,
    IoUHistogram, Quantiles,
};
pub use error::{Error, Result};
pub use focaler::{focaler_iou_loss, focaler_loss, focaler_map, mapping_slope, FocalerEval, FocalerInterval};
pub use geometry::{BBox, CornerBox, EncloseInfo};
pub use gradients::{
    fd_grad, grad_check, grad_check_pairs, is_near_kink, loss_grad, sample_pairs, Grad4,
    GradCheckConfig, GradCheckReport, LossEval,
};
pub use metrics::{loss, metric, LossKind, MetricBreakdown, SiouParams};
pub use simulator::{
    compare, generate_scenarios, run, ComparisonRow, LossConfig, PairOutcome, RunResult,
    ScenarioSet, ScenarioSpec, StepRecord,
};
