//! The IoU metric family: GIoU, DIoU, CIoU, EIoU and SIoU.
//!
//! Every member is reported as a [`MetricBreakdown`] carrying the base IoU
//! and the named penalty terms of its formula, so callers can inspect how a
//! value decomposes. The shared loss convention is `L = 1 - metric`.
//!
//! Formulas:
//! - GIoU = IoU - (|C| - |A ∪ G|) / |C|
//! - DIoU = IoU - rho^2(b, b_gt) / c^2
//! - CIoU = DIoU - alpha * v,  v = 4/pi^2 (atan(w_gt/h_gt) - atan(w/h))^2,
//!   alpha = v / ((1 - IoU) + v)
//! - EIoU = IoU - rho^2/c^2 - (w - w_gt)^2/wc^2 - (h - h_gt)^2/hc^2
//! - SIoU = IoU - (delta + omega)/2, with the angle cost
//!   lambda = sin(2 asin(min(|dx|, |dy|) / (sigma + eps))) feeding
//!   gamma = 2 - lambda, delta = sum_t (1 - e^(-gamma rho_t)) over the
//!   normalized center offsets, and omega = sum_t (1 - e^(-omega_t))^theta
//!   over the relative size mismatches.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// Selects one member of the metric family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Iou,
    Giou,
    Diou,
    Ciou,
    Eiou,
    Siou,
}

impl LossKind {
    pub const ALL: [LossKind; 6] = [
        LossKind::Iou,
        LossKind::Giou,
        LossKind::Diou,
        LossKind::Ciou,
        LossKind::Eiou,
        LossKind::Siou,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LossKind::Iou => "iou",
            LossKind::Giou => "giou",
            LossKind::Diou => "diou",
            LossKind::Ciou => "ciou",
            LossKind::Eiou => "eiou",
            LossKind::Siou => "siou",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    /// Parses exactly the lowercase tokens `iou`, `giou`, `diou`, `ciou`,
    /// `eiou`, `siou`; anything else is rejected.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iou" => Ok(LossKind::Iou),
            "giou" => Ok(LossKind::Giou),
            "diou" => Ok(LossKind::Diou),
            "ciou" => Ok(LossKind::Ciou),
            "eiou" => Ok(LossKind::Eiou),
            "siou" => Ok(LossKind::Siou),
            _ => Err(Error::UnknownLossKind { token: s.to_string() }),
        }
    }
}

/// SIoU shape exponent and angle-term denominator guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiouParams {
    theta: f64,
    eps: f64,
}

impl SiouParams {
    pub fn new(theta: f64, eps: f64) -> Result<Self> {
        if !(theta.is_finite() && eps.is_finite()) || theta <= 0.0 || eps <= 0.0 {
            return Err(Error::InvalidSiouParams { theta, eps });
        }
        Ok(Self { theta, eps })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl Default for SiouParams {
    /// `theta = 4`, `eps = 1e-7`. The guard keeps the coincident-center
    /// angle term defined while leaving it unperturbed at typical scales.
    fn default() -> Self {
        Self { theta: 4.0, eps: 1e-7 }
    }
}

/// Map key marking inputs where a denominator collapsed and the affected
/// term was defined as zero instead of NaN.
pub const DEGENERATE: &str = "degenerate";

/// A metric value together with its base IoU and named penalty terms.
///
/// `metric` always reconstructs from `iou` and the penalty entries via the
/// selected variant's formula; see [`MetricBreakdown::reconstructed_metric`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetricBreakdown {
    pub kind: LossKind,
    pub metric: f64,
    pub iou: f64,
    pub penalty_terms: BTreeMap<&'static str, f64>,
}

impl MetricBreakdown {
    pub fn penalty(&self, name: &str) -> Option<f64> {
        self.penalty_terms.get(name).copied()
    }

    /// True when a degenerate input (collapsed denominator, zero-dimension
    /// box) forced some term to its zero convention.
    pub fn is_degenerate(&self) -> bool {
        self.penalty_terms.contains_key(DEGENERATE)
    }

    /// Recomposes the metric from `iou` and the penalty entries using the
    /// variant's formula. Agrees with `metric` to floating rounding.
    pub fn reconstructed_metric(&self) -> f64 {
        let term = |name: &str| self.penalty(name).unwrap_or(0.0);
        match self.kind {
            LossKind::Iou => self.iou,
            LossKind::Giou => self.iou - term("giou_term"),
            LossKind::Diou => self.iou - term("dist"),
            LossKind::Ciou => self.iou - term("dist") - term("alpha") * term("v"),
            LossKind::Eiou => {
                self.iou - term("dist") - term("shape_w") - term("shape_h")
            }
            LossKind::Siou => self.iou - (term("delta") + term("omega")) / 2.0,
        }
    }
}

/// GIoU: penalizes the hull area not covered by the union.
pub fn giou(a: &BBox, g: &BBox) -> MetricBreakdown {
    let iou = a.iou(g);
    let e = a.enclose_info(g);
    let mut terms = BTreeMap::new();
    let term = if e.enclose_area > 0.0 {
        (e.enclose_area - a.union_area(g)) / e.enclose_area
    } else {
        // hull collapsed: both boxes zero-area on a shared line/point
        terms.insert(DEGENERATE, 1.0);
        0.0
    };
    terms.insert("giou_term", term);
    MetricBreakdown {
        kind: LossKind::Giou,
        metric: iou - term,
        iou,
        penalty_terms: terms,
    }
}

/// DIoU: penalizes center distance normalized by the hull diagonal.
pub fn diou(a: &BBox, g: &BBox) -> MetricBreakdown {
    let iou = a.iou(g);
    let e = a.enclose_info(g);
    let mut terms = BTreeMap::new();
    let dist = if e.diag2 > 0.0 {
        a.center_dist2(g) / e.diag2
    } else {
        terms.insert(DEGENERATE, 1.0);
        0.0
    };
    terms.insert("dist", dist);
    MetricBreakdown {
        kind: LossKind::Diou,
        metric: iou - dist,
        iou,
        penalty_terms: terms,
    }
}

/// CIoU: DIoU plus the aspect-ratio penalty `alpha * v`.
///
/// `alpha = v / ((1 - IoU) + v)` with the convention `alpha = 0` when the
/// denominator vanishes (identical boxes), keeping `alpha * v` continuous.
/// A zero-dimension box suppresses the aspect term (arctan of infinity
/// avoided) and flags the result degenerate.
pub fn ciou(a: &BBox, g: &BBox) -> MetricBreakdown {
    let d = diou(a, g);
    let iou = d.iou;
    let dist = d.penalty("dist").unwrap_or(0.0);
    let mut terms = d.penalty_terms;

    let (v, alpha) = if a.w() > 0.0 && a.h() > 0.0 && g.w() > 0.0 && g.h() > 0.0 {
        let q = (g.w() / g.h()).atan() - (a.w() / a.h()).atan();
        let v = 4.0 / (PI * PI) * q * q;
        let s = (1.0 - iou) + v;
        let alpha = if s > 0.0 { v / s } else { 0.0 };
        (v, alpha)
    } else {
        terms.insert(DEGENERATE, 1.0);
        (0.0, 0.0)
    };
    terms.insert("v", v);
    terms.insert("alpha", alpha);
    MetricBreakdown {
        kind: LossKind::Ciou,
        metric: iou - dist - alpha * v,
        iou,
        penalty_terms: terms,
    }
}

/// EIoU: DIoU's distance term plus direct width and height mismatch terms
/// normalized by the hull dimensions.
pub fn eiou(a: &BBox, g: &BBox) -> MetricBreakdown {
    let iou = a.iou(g);
    let e = a.enclose_info(g);
    let mut terms = BTreeMap::new();
    let mut degenerate = false;
    let mut ratio = |num: f64, den: f64| {
        if den > 0.0 {
            num / den
        } else {
            degenerate = true;
            0.0
        }
    };
    let dist = ratio(a.center_dist2(g), e.diag2);
    let dw = a.w() - g.w();
    let dh = a.h() - g.h();
    let shape_w = ratio(dw * dw, e.wc * e.wc);
    let shape_h = ratio(dh * dh, e.hc * e.hc);
    terms.insert("dist", dist);
    terms.insert("shape_w", shape_w);
    terms.insert("shape_h", shape_h);
    if degenerate {
        terms.insert(DEGENERATE, 1.0);
    }
    MetricBreakdown {
        kind: LossKind::Eiou,
        metric: iou - dist - shape_w - shape_h,
        iou,
        penalty_terms: terms,
    }
}

/// SIoU: angle-aware distance cost plus shape cost, each averaged into the
/// penalty `(delta + omega) / 2`.
pub fn siou(a: &BBox, g: &BBox, p: &SiouParams) -> MetricBreakdown {
    let iou = a.iou(g);
    let e = a.enclose_info(g);
    let mut terms = BTreeMap::new();
    let mut degenerate = false;

    let dx = a.cx() - g.cx();
    let dy = a.cy() - g.cy();
    let sigma = (dx * dx + dy * dy).sqrt();

    // angle cost: sin(2 asin z) written as 2 z sqrt(1 - z^2); z <= 1/sqrt(2)
    let z = dx.abs().min(dy.abs()) / (sigma + p.eps);
    let lambda = 2.0 * z * (1.0 - z * z).sqrt();
    let gamma = 2.0 - lambda;

    // distance cost over the hull-normalized center offsets
    let mut norm_off = |off: f64, denom: f64| {
        if denom > 0.0 {
            (off / denom) * (off / denom)
        } else {
            degenerate = true;
            0.0
        }
    };
    let rho_x = norm_off(dx, e.wc);
    let rho_y = norm_off(dy, e.hc);
    let delta = (1.0 - (-gamma * rho_x).exp()) + (1.0 - (-gamma * rho_y).exp());

    // shape cost over the relative size mismatches
    let mut rel_mismatch = |wa: f64, wg: f64| {
        let m = wa.max(wg);
        if m > 0.0 {
            (wa - wg).abs() / m
        } else {
            degenerate = true;
            0.0
        }
    };
    let omega_w = rel_mismatch(a.w(), g.w());
    let omega_h = rel_mismatch(a.h(), g.h());
    let omega = (1.0 - (-omega_w).exp()).powf(p.theta) + (1.0 - (-omega_h).exp()).powf(p.theta);

    terms.insert("angle", lambda);
    terms.insert("gamma", gamma);
    terms.insert("rho_x", rho_x);
    terms.insert("rho_y", rho_y);
    terms.insert("delta", delta);
    terms.insert("omega_w", omega_w);
    terms.insert("omega_h", omega_h);
    terms.insert("omega", omega);
    if degenerate {
        terms.insert(DEGENERATE, 1.0);
    }
    MetricBreakdown {
        kind: LossKind::Siou,
        metric: iou - (delta + omega) / 2.0,
        iou,
        penalty_terms: terms,
    }
}

/// Evaluates the selected metric. `LossKind::Iou` returns the bare IoU with
/// no penalty entries.
pub fn metric(kind: LossKind, a: &BBox, g: &BBox, p: &SiouParams) -> MetricBreakdown {
    match kind {
        LossKind::Iou => {
            let iou = a.iou(g);
            MetricBreakdown {
                kind,
                metric: iou,
                iou,
                penalty_terms: BTreeMap::new(),
            }
        }
        LossKind::Giou => giou(a, g),
        LossKind::Diou => diou(a, g),
        LossKind::Ciou => ciou(a, g),
        LossKind::Eiou => eiou(a, g),
        LossKind::Siou => siou(a, g, p),
    }
}

/// `1 - metric`, the loss convention shared by the whole family.
pub fn loss(kind: LossKind, a: &BBox, g: &BBox, p: &SiouParams) -> f64 {
    1.0 - metric(kind, a, g, p).metric
}
