//! Sample-difficulty analytics over a dataset of (anchor, GT) pairs: the IoU
//! distribution and a quantile-based recommendation for the Focaler interval.
//!
//! The recommendation is a stated heuristic, not a prescription: focusing on
//! hard samples maps to a low-`u` interval because the slope `1/(u - d)` then
//! amplifies gradients exactly on low-IoU samples, and vice versa. Callers
//! can always override the interval explicitly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::focaler::FocalerInterval;
use crate::geometry::BBox;

/// Interpolated quantiles of the per-pair IoU values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

/// Histogram of IoU values over uniform bins spanning [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IoUHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n: usize,
    pub mean: f64,
    pub quantiles: Quantiles,
}

/// Which sample population the recommended interval should concentrate
/// gradient on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FocusMode {
    FocusHard,
    FocusEasy,
}

impl FocusMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FocusMode::FocusHard => "focus_hard",
            FocusMode::FocusEasy => "focus_easy",
        }
    }
}

impl std::str::FromStr for FocusMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "focus_hard" => Ok(FocusMode::FocusHard),
            "focus_easy" => Ok(FocusMode::FocusEasy),
            _ => Err(Error::UnknownFocusMode { token: s.to_string() }),
        }
    }
}

impl std::fmt::Display for FocusMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A recommended focusing interval with the quantile rationale behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRecommendation {
    pub interval: FocalerInterval,
    pub mode: FocusMode,
    /// The quantile pair the interval was built from.
    pub rationale: String,
    /// Set when the quantiles collapsed and the fixed fallback was used.
    pub fallback: bool,
}

/// Linear-interpolation quantile of an ascending-sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Histogram of `iou(anchor, gt)` per pair over `bins` uniform bins, with
/// mean and interpolated quantiles.
pub fn iou_histogram(pairs: &[(BBox, BBox)], bins: usize) -> Result<IoUHistogram> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput { what: "analysis pairs" });
    }
    if bins < 2 {
        return Err(Error::InvalidScenario { field: "bins", reason: "must be >= 2" });
    }
    let mut values: Vec<f64> = pairs.iter().map(|(a, g)| a.iou(g)).collect();
    let mut counts = vec![0u64; bins];
    for &v in &values {
        let idx = ((v * bins as f64).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.sort_by(|a, b| a.partial_cmp(b).expect("iou values are never NaN"));
    let quantiles = Quantiles {
        q05: quantile(&values, 0.05),
        q25: quantile(&values, 0.25),
        q50: quantile(&values, 0.50),
        q75: quantile(&values, 0.75),
        q95: quantile(&values, 0.95),
    };
    Ok(IoUHistogram {
        edges: (0..=bins).map(|i| i as f64 / bins as f64).collect(),
        counts,
        n: pairs.len(),
        mean,
        quantiles,
    })
}

/// Builds the focusing interval from the distribution: `(0, q75)` to focus
/// on hard samples, `(q25, 1)` to focus on easy ones. Collapsed quantiles
/// (q75 = 0 or q25 = 1) fall back to `(0, 0.5)` / `(0.5, 1)` and are
/// flagged.
pub fn recommend_interval(h: &IoUHistogram, mode: FocusMode) -> IntervalRecommendation {
    match mode {
        FocusMode::FocusHard => match FocalerInterval::new(0.0, h.quantiles.q75) {
            Ok(interval) => IntervalRecommendation {
                interval,
                mode,
                rationale: format!("u = q75 = {}", h.quantiles.q75),
                fallback: false,
            },
            Err(_) => IntervalRecommendation {
                interval: FocalerInterval::new(0.0, 0.5).expect("fixed fallback interval"),
                mode,
                rationale: format!("q75 = {} collapsed; fixed fallback", h.quantiles.q75),
                fallback: true,
            },
        },
        FocusMode::FocusEasy => match FocalerInterval::new(h.quantiles.q25, 1.0) {
            Ok(interval) => IntervalRecommendation {
                interval,
                mode,
                rationale: format!("d = q25 = {}", h.quantiles.q25),
                fallback: false,
            },
            Err(_) => IntervalRecommendation {
                interval: FocalerInterval::new(0.5, 1.0).expect("fixed fallback interval"),
                mode,
                rationale: format!("q25 = {} collapsed; fixed fallback", h.quantiles.q25),
                fallback: true,
            },
        },
    }
}

/// The JSON document emitted by the CLI `analyze` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub mean: f64,
    pub quantiles: Quantiles,
    pub histogram: HistogramData,
    pub recommendation: RecommendationData,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramData {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationData {
    pub d: f64,
    pub u: f64,
    pub mode: FocusMode,
    pub fallback: bool,
}

impl AnalysisReport {
    pub fn new(h: &IoUHistogram, r: &IntervalRecommendation) -> Self {
        AnalysisReport {
            n: h.n,
            mean: h.mean,
            quantiles: h.quantiles,
            histogram: HistogramData { edges: h.edges.clone(), counts: h.counts.clone() },
            recommendation: RecommendationData {
                d: r.interval.d(),
                u: r.interval.u(),
                mode: r.mode,
                fallback: r.fallback,
            },
        }
    }
}
