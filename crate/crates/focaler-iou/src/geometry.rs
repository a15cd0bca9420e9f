//! Axis-aligned box arithmetic: areas, overlaps, enclosing hulls, center
//! distances, and the base IoU metric.
//!
//! Boxes are parameterized center-size `(cx, cy, w, h)` because every loss in
//! this crate differentiates naturally in center coordinates. The corner form
//! [`CornerBox`] exists as an interchange representation for file I/O.
//!
//! All operations here are pure functions on immutable values and are safe to
//! call concurrently.

use serde::Serialize;

use crate::error::{Error, Result};

/// Axis-aligned box in center-size form.
///
/// Invariants enforced at construction: `w >= 0`, `h >= 0`, all fields finite.
/// Zero-area boxes are accepted as degenerate inputs (real datasets contain
/// them); negative extents are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
}

impl BBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        if !(cx.is_finite() && cy.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidBox {
                cx,
                cy,
                w,
                h,
                reason: "non-finite field",
            });
        }
        if w < 0.0 || h < 0.0 {
            return Err(Error::InvalidBox {
                cx,
                cy,
                w,
                h,
                reason: "negative extent",
            });
        }
        Ok(Self { cx, cy, w, h })
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x1(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn x2(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn y1(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn y2(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Overlap area `|a ∩ b|`; zero when the boxes are disjoint. Commutative.
    pub fn intersect_area(&self, other: &BBox) -> f64 {
        let iw = (self.x2().min(other.x2()) - self.x1().max(other.x1())).max(0.0);
        let ih = (self.y2().min(other.y2()) - self.y1().max(other.y1())).max(0.0);
        iw * ih
    }

    /// `|a| + |b| - |a ∩ b|`.
    pub fn union_area(&self, other: &BBox) -> f64 {
        self.area() + other.area() - self.intersect_area(other)
    }

    /// Intersection over union, clamped to `[0, 1]`.
    ///
    /// Defined as 0 when the union is empty (two zero-area boxes), which
    /// avoids 0/0 and matches the "no overlap" semantics.
    pub fn iou(&self, other: &BBox) -> f64 {
        let union = self.union_area(other);
        if union <= 0.0 {
            return 0.0;
        }
        (self.intersect_area(other) / union).clamp(0.0, 1.0)
    }

    /// Squared Euclidean distance between the two box centers.
    pub fn center_dist2(&self, other: &BBox) -> f64 {
        let dx = self.cx - other.cx;
        let dy = self.cy - other.cy;
        dx * dx + dy * dy
    }

    /// Corner-wise min/max hull of the two boxes, with the derived area,
    /// squared diagonal, width and height used by the penalty terms.
    pub fn enclose_info(&self, other: &BBox) -> EncloseInfo {
        let x1 = self.x1().min(other.x1());
        let y1 = self.y1().min(other.y1());
        let x2 = self.x2().max(other.x2());
        let y2 = self.y2().max(other.y2());
        let wc = x2 - x1;
        let hc = y2 - y1;
        EncloseInfo {
            enclose: BBox {
                cx: (x1 + x2) / 2.0,
                cy: (y1 + y2) / 2.0,
                w: wc,
                h: hc,
            },
            enclose_area: wc * hc,
            diag2: wc * wc + hc * hc,
            wc,
            hc,
        }
    }

    pub fn to_corners(&self) -> CornerBox {
        CornerBox {
            x1: self.x1(),
            y1: self.y1(),
            x2: self.x2(),
            y2: self.y2(),
        }
    }
}

impl TryFrom<CornerBox> for BBox {
    type Error = Error;

    fn try_from(c: CornerBox) -> Result<Self> {
        BBox::new(
            (c.x1 + c.x2) / 2.0,
            (c.y1 + c.y2) / 2.0,
            c.x2 - c.x1,
            c.y2 - c.y1,
        )
    }
}

/// Min/max-corner representation, used by the CSV box-pair files.
///
/// Round-trips with [`BBox`] up to floating rounding for finite inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl CornerBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        if !(x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite()) {
            return Err(Error::InvalidCorners {
                x1,
                y1,
                x2,
                y2,
                reason: "non-finite field",
            });
        }
        if x1 > x2 || y1 > y2 {
            return Err(Error::InvalidCorners {
                x1,
                y1,
                x2,
                y2,
                reason: "corners out of order",
            });
        }
        Ok(Self { x1, y1, x2, y2 })
    }
}

/// Minimum enclosing box of two boxes plus the derived quantities the
/// GIoU/DIoU/EIoU/SIoU penalties consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncloseInfo {
    pub enclose: BBox,
    /// Hull area, `wc * hc`.
    pub enclose_area: f64,
    /// Squared hull diagonal, `wc^2 + hc^2`.
    pub diag2: f64,
    pub wc: f64,
    pub hc: f64,
}
