//! Focaler remapping: a linear interval map applied to the IoU term so the
//! loss concentrates its gradient on hard (low-IoU) or easy (high-IoU)
//! samples.
//!
//! The map sends IoU below `d` to 0, above `u` to 1, and interpolates
//! linearly in between with slope `1/(u - d)`. The remapped loss is
//! `1 - IoU_remapped`; composed with any family member X it becomes
//! `L_X + IoU - IoU_remapped`, i.e. only the IoU term is reshaped while the
//! penalty structure of X is untouched.

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::metrics::{self, LossKind, SiouParams};

/// The focusing interval `(d, u)` with `0 <= d < u <= 1`.
///
/// `d < u` is strict so the interior slope `1/(u - d)` is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalerInterval {
    d: f64,
    u: f64,
}

impl FocalerInterval {
    pub fn new(d: f64, u: f64) -> Result<Self> {
        if !(d.is_finite() && u.is_finite()) || d < 0.0 || u > 1.0 || d >= u {
            return Err(Error::InvalidInterval { d, u });
        }
        Ok(Self { d, u })
    }

    /// The identity interval `(0, 1)`: remapping is a no-op.
    pub fn identity() -> Self {
        Self { d: 0.0, u: 1.0 }
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn slope(&self) -> f64 {
        1.0 / (self.u - self.d)
    }
}

/// The linear interval map: 0 below `d`, 1 above `u`, linear in between.
/// Continuous and non-decreasing on [0, 1]; output in [0, 1].
///
/// Rejects inputs outside [0, 1] or non-finite.
pub fn focaler_map(iou: f64, iv: &FocalerInterval) -> Result<f64> {
    if !iou.is_finite() || !(0.0..=1.0).contains(&iou) {
        return Err(Error::IouOutOfRange { value: iou });
    }
    Ok(if iou < iv.d {
        0.0
    } else if iou > iv.u {
        1.0
    } else {
        (iou - iv.d) / (iv.u - iv.d)
    })
}

/// Derivative of [`focaler_map`] with respect to its IoU argument.
///
/// Zero on the flat branches; `1/(u - d)` inside. At the kinks `iou == d`
/// and `iou == u` this returns the interior one-sided value, a subgradient
/// choice that keeps descent steps nonzero at the kink.
pub fn mapping_slope(iou: f64, iv: &FocalerInterval) -> f64 {
    if iou < iv.d || iou > iv.u {
        0.0
    } else {
        iv.slope()
    }
}

/// `1 - focaler_map(iou)`: the remapped base loss. Non-increasing in IoU.
pub fn focaler_iou_loss(iou: f64, iv: &FocalerInterval) -> Result<f64> {
    Ok(1.0 - focaler_map(iou, iv)?)
}

/// A composed loss evaluation: the base variant loss plus the IoU-term
/// reshaping `iou - iou_focaler`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalerEval {
    pub kind: LossKind,
    pub iou: f64,
    pub iou_focaler: f64,
    pub base_loss: f64,
    pub focaler_loss: f64,
    /// Degeneracy flag propagated from the variant evaluation.
    pub degenerate: bool,
}

/// Composes the remapping with the selected variant:
/// `L = L_X + (IoU - IoU_remapped)`.
///
/// For `kind == Iou` this reduces exactly to `1 - IoU_remapped`.
pub fn focaler_loss(
    kind: LossKind,
    a: &BBox,
    g: &BBox,
    iv: &FocalerInterval,
    p: &SiouParams,
) -> FocalerEval {
    let b = metrics::metric(kind, a, g, p);
    let base_loss = 1.0 - b.metric;
    // metrics::metric clamps iou to [0, 1], so the map cannot reject it
    let iou_focaler = focaler_map(b.iou, iv).expect("iou from metrics is in [0, 1]");
    FocalerEval {
        kind,
        iou: b.iou,
        iou_focaler,
        base_loss,
        focaler_loss: base_loss + (b.iou - iou_focaler),
        degenerate: b.is_degenerate(),
    }
}
