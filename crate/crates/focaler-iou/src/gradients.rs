//! Analytic gradients of every loss (plain and Focaler-composed) with respect
//! to the anchor box parameters `(cx, cy, w, h)`, plus a central
//! finite-difference oracle and a seeded bulk checker.
//!
//! Gradients are derived by hand via the chain rule per variant; no autodiff
//! dependency. That keeps the kernel self-contained and makes the
//! finite-difference comparison a meaningful independent check.
//!
//! The losses are piecewise smooth. At exact kinks (tied box edges, the
//! min/abs switches in the SIoU angle cost, the interval boundaries of the
//! Focaler map) evaluation returns a documented symmetric-subgradient
//! convention value and sets the `non_smooth` flag; at the optimum `a == g`
//! that convention yields an exactly zero gradient, which is what a descent
//! loop wants. The bulk checker skips sample points near those loci, since
//! central differences straddling a kink measure nothing.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::focaler::{self, FocalerInterval};
use crate::geometry::BBox;
use crate::metrics::{self, LossKind, SiouParams};

/// Partial derivatives of a scalar loss with respect to the anchor's
/// center-size parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grad4 {
    pub d_cx: f64,
    pub d_cy: f64,
    pub d_w: f64,
    pub d_h: f64,
}

impl Grad4 {
    pub const ZERO: Grad4 = Grad4 { d_cx: 0.0, d_cy: 0.0, d_w: 0.0, d_h: 0.0 };

    pub fn as_array(&self) -> [f64; 4] {
        [self.d_cx, self.d_cy, self.d_w, self.d_h]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    pub fn inf_norm(&self) -> f64 {
        self.as_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.as_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl From<[f64; 4]> for Grad4 {
    fn from(a: [f64; 4]) -> Self {
        Grad4 { d_cx: a[0], d_cy: a[1], d_w: a[2], d_h: a[3] }
    }
}

/// A loss value with its gradient and the IoU at the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEval {
    pub loss: f64,
    pub iou: f64,
    pub grad: Grad4,
    /// Set when the evaluation point sits exactly on a non-differentiable
    /// locus and the gradient is the documented convention value.
    pub non_smooth: bool,
}

// --- internal derivative accumulator, indexed (cx, cy, w, h) ---

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct D4([f64; 4]);

impl D4 {
    const ZERO: D4 = D4([0.0; 4]);
    const CX: D4 = D4([1.0, 0.0, 0.0, 0.0]);
    const CY: D4 = D4([0.0, 1.0, 0.0, 0.0]);
    const W: D4 = D4([0.0, 0.0, 1.0, 0.0]);
    const H: D4 = D4([0.0, 0.0, 0.0, 1.0]);
}

impl Add for D4 {
    type Output = D4;
    fn add(self, o: D4) -> D4 {
        D4([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2], self.0[3] + o.0[3]])
    }
}

impl Sub for D4 {
    type Output = D4;
    fn sub(self, o: D4) -> D4 {
        D4([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2], self.0[3] - o.0[3]])
    }
}

impl Mul<f64> for D4 {
    type Output = D4;
    fn mul(self, s: f64) -> D4 {
        D4([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }
}

impl Neg for D4 {
    type Output = D4;
    fn neg(self) -> D4 {
        self * -1.0
    }
}

/// d(min(a, b))/da with a symmetric 0.5 subgradient at the tie.
fn min_coeff(a: f64, b: f64) -> (f64, bool) {
    if a < b {
        (1.0, false)
    } else if a > b {
        (0.0, false)
    } else {
        (0.5, true)
    }
}

/// d(max(a, b))/da with a symmetric 0.5 subgradient at the tie.
fn max_coeff(a: f64, b: f64) -> (f64, bool) {
    if a > b {
        (1.0, false)
    } else if a < b {
        (0.0, false)
    } else {
        (0.5, true)
    }
}

/// d(max(t, 0))/dt: the overlap hinge.
fn hinge_coeff(t: f64) -> (f64, bool) {
    if t > 0.0 {
        (1.0, false)
    } else if t < 0.0 {
        (0.0, false)
    } else {
        (0.5, true)
    }
}

/// Shared geometric quantities and their anchor derivatives: intersection,
/// union, IoU, enclosing hull dimensions, center distance.
struct Geom {
    iou: f64,
    union: f64,
    wc: f64,
    hc: f64,
    c_area: f64,
    diag2: f64,
    rho2: f64,
    d_iou: D4,
    d_union: D4,
    d_wc: D4,
    d_hc: D4,
    d_c_area: D4,
    d_diag2: D4,
    d_rho2: D4,
    non_smooth: bool,
    degenerate: bool,
}

fn geom(a: &BBox, g: &BBox) -> Geom {
    let mut non_smooth = false;
    let mut tie = |c: (f64, bool)| {
        non_smooth |= c.1;
        c.0
    };

    // corner derivatives: ax1 = cx - w/2, ax2 = cx + w/2, same for y
    let d_ax1 = D4::CX - D4::W * 0.5;
    let d_ax2 = D4::CX + D4::W * 0.5;
    let d_ay1 = D4::CY - D4::H * 0.5;
    let d_ay2 = D4::CY + D4::H * 0.5;

    // overlap width/height through the min/max selections and the hinge
    let c_ix2 = tie(min_coeff(a.x2(), g.x2()));
    let c_ix1 = tie(max_coeff(a.x1(), g.x1()));
    let iw_raw = a.x2().min(g.x2()) - a.x1().max(g.x1());
    let d_iw_raw = d_ax2 * c_ix2 - d_ax1 * c_ix1;
    let aw = tie(hinge_coeff(iw_raw));
    let iw = iw_raw.max(0.0);
    let d_iw = d_iw_raw * aw;

    let c_iy2 = tie(min_coeff(a.y2(), g.y2()));
    let c_iy1 = tie(max_coeff(a.y1(), g.y1()));
    let ih_raw = a.y2().min(g.y2()) - a.y1().max(g.y1());
    let d_ih_raw = d_ay2 * c_iy2 - d_ay1 * c_iy1;
    let ah = tie(hinge_coeff(ih_raw));
    let ih = ih_raw.max(0.0);
    let d_ih = d_ih_raw * ah;

    let inter = iw * ih;
    let d_inter = d_iw * ih + d_ih * iw;

    let d_area_a = D4([0.0, 0.0, a.h(), a.w()]);
    let union = a.area() + g.area() - inter;
    let d_union = d_area_a - d_inter;

    let mut degenerate = false;
    let (iou, d_iou) = if union > 0.0 {
        let i = inter / union;
        (i, (d_inter * union - d_union * inter) * (1.0 / (union * union)))
    } else {
        degenerate = true;
        (0.0, D4::ZERO)
    };

    // enclosing hull
    let c_ex2 = tie(max_coeff(a.x2(), g.x2()));
    let c_ex1 = tie(min_coeff(a.x1(), g.x1()));
    let wc = a.x2().max(g.x2()) - a.x1().min(g.x1());
    let d_wc = d_ax2 * c_ex2 - d_ax1 * c_ex1;

    let c_ey2 = tie(max_coeff(a.y2(), g.y2()));
    let c_ey1 = tie(min_coeff(a.y1(), g.y1()));
    let hc = a.y2().max(g.y2()) - a.y1().min(g.y1());
    let d_hc = d_ay2 * c_ey2 - d_ay1 * c_ey1;

    let c_area = wc * hc;
    let d_c_area = d_wc * hc + d_hc * wc;
    let diag2 = wc * wc + hc * hc;
    let d_diag2 = d_wc * (2.0 * wc) + d_hc * (2.0 * hc);

    let dx = a.cx() - g.cx();
    let dy = a.cy() - g.cy();
    let rho2 = dx * dx + dy * dy;
    let d_rho2 = D4::CX * (2.0 * dx) + D4::CY * (2.0 * dy);

    Geom {
        iou,
        union,
        wc,
        hc,
        c_area,
        diag2,
        rho2,
        d_iou,
        d_union,
        d_wc,
        d_hc,
        d_c_area,
        d_diag2,
        d_rho2,
        non_smooth,
        degenerate,
    }
}

/// d(rho^2 / c^2): the hull-normalized center-distance penalty shared by
/// DIoU, CIoU and EIoU.
fn dist_term_grad(ge: &Geom) -> D4 {
    if ge.diag2 > 0.0 {
        (ge.d_rho2 * ge.diag2 - ge.d_diag2 * ge.rho2) * (1.0 / (ge.diag2 * ge.diag2))
    } else {
        D4::ZERO
    }
}

fn giou_metric_grad(ge: &Geom) -> D4 {
    if ge.c_area > 0.0 {
        // metric = iou - 1 + union/|C|
        let d_ratio =
            (ge.d_union * ge.c_area - ge.d_c_area * ge.union) * (1.0 / (ge.c_area * ge.c_area));
        ge.d_iou + d_ratio
    } else {
        ge.d_iou
    }
}

fn ciou_aspect_grad(ge: &Geom, a: &BBox, g: &BBox) -> (D4, bool) {
    if !(a.w() > 0.0 && a.h() > 0.0 && g.w() > 0.0 && g.h() > 0.0) {
        return (D4::ZERO, false); // aspect term suppressed, flagged degenerate upstream
    }
    let k = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let q = (g.w() / g.h()).atan() - (a.w() / a.h()).atan();
    let v = k * q * q;
    let ww = a.w();
    let hh = a.h();
    let denom = ww * ww + hh * hh;
    let d_q = D4::W * (-hh / denom) + D4::H * (ww / denom);
    let d_v = d_q * (2.0 * k * q);
    let s = (1.0 - ge.iou) + v;
    if s > 0.0 {
        // alpha*v = v^2/s differentiated through alpha as well
        let d_s = d_v - ge.d_iou;
        let d_av = (d_v * (2.0 * v * s) - d_s * (v * v)) * (1.0 / (s * s));
        (d_av, false)
    } else {
        // iou = 1 and v = 0: the 0/0 locus at the optimum
        (D4::ZERO, true)
    }
}

fn eiou_metric_grad(ge: &Geom, a: &BBox, g: &BBox) -> D4 {
    let mut d = ge.d_iou - dist_term_grad(ge);
    if ge.wc > 0.0 {
        let dw = a.w() - g.w();
        d = d - (D4::W * (2.0 * dw / (ge.wc * ge.wc)) - ge.d_wc * (2.0 * dw * dw / (ge.wc * ge.wc * ge.wc)));
    }
    if ge.hc > 0.0 {
        let dh = a.h() - g.h();
        d = d - (D4::H * (2.0 * dh / (ge.hc * ge.hc)) - ge.d_hc * (2.0 * dh * dh / (ge.hc * ge.hc * ge.hc)));
    }
    d
}

fn siou_metric_grad(ge: &Geom, a: &BBox, g: &BBox, p: &SiouParams) -> (D4, bool) {
    let mut non_smooth = false;
    let dx = a.cx() - g.cx();
    let dy = a.cy() - g.cy();
    let sigma = (dx * dx + dy * dy).sqrt();

    // distance cost Delta through the angle cost Lambda
    let d_delta = if sigma > 0.0 {
        let d_sigma = D4::CX * (dx / sigma) + D4::CY * (dy / sigma);
        let adx = dx.abs();
        let ady = dy.abs();
        // min(|dx|, |dy|) selection with symmetric tie; |.| kinks at zero
        let (cx_sel, cy_sel) = if adx < ady {
            (1.0, 0.0)
        } else if adx > ady {
            (0.0, 1.0)
        } else {
            non_smooth = true;
            (0.5, 0.5)
        };
        let mut sgn = |t: f64, active: f64| {
            if t == 0.0 {
                if active > 0.0 {
                    non_smooth = true;
                }
                0.0
            } else {
                t.signum()
            }
        };
        let d_m = D4::CX * (cx_sel * sgn(dx, cx_sel)) + D4::CY * (cy_sel * sgn(dy, cy_sel));
        let m = adx.min(ady);
        let den = sigma + p.eps();
        let z = m / den;
        let d_z = (d_m * den - d_sigma * m) * (1.0 / (den * den));
        // Lambda = 2 z sqrt(1 - z^2); z <= 1/sqrt(2) because min^2 <= sigma^2/2
        let root = (1.0 - z * z).sqrt();
        let d_lambda = d_z * (2.0 * (1.0 - 2.0 * z * z) / root);
        let d_gamma = -d_lambda;
        let lambda = 2.0 * z * root;
        let gamma = 2.0 - lambda;

        let axis = |off: f64, d_off: D4, denom: f64, d_denom: D4| -> (f64, D4) {
            if denom > 0.0 {
                let r = off / denom;
                let rho = r * r;
                let d_rho = (d_off * denom - d_denom * off) * (2.0 * r / (denom * denom));
                (rho, d_rho)
            } else {
                (0.0, D4::ZERO)
            }
        };
        let (rho_x, d_rho_x) = axis(dx, D4::CX, ge.wc, ge.d_wc);
        let (rho_y, d_rho_y) = axis(dy, D4::CY, ge.hc, ge.d_hc);
        let ex = (-gamma * rho_x).exp();
        let ey = (-gamma * rho_y).exp();
        (d_gamma * rho_x + d_rho_x * gamma) * ex + (d_gamma * rho_y + d_rho_y * gamma) * ey
    } else {
        // coincident centers: every distance-cost path sits on a kink;
        // the symmetric convention is a zero contribution
        non_smooth = true;
        D4::ZERO
    };

    // shape cost Omega; for theta > 1 the composition is differentiable even
    // at w == w_gt because (1 - e^-omega)^(theta-1) vanishes there
    let theta = p.theta();
    let mut shape_axis = |wa: f64, wg: f64, unit: D4| -> D4 {
        let m = wa.max(wg);
        if m <= 0.0 {
            return D4::ZERO;
        }
        if wa == wg {
            if theta <= 1.0 {
                non_smooth = true;
            }
            return D4::ZERO;
        }
        let (om, d_om) = if wa > wg {
            ((wa - wg) / wa, unit * (wg / (wa * wa)))
        } else {
            ((wg - wa) / wg, unit * (-1.0 / wg))
        };
        let t = 1.0 - (-om).exp();
        d_om * (theta * t.powf(theta - 1.0) * (-om).exp())
    };
    let d_omega = shape_axis(a.w(), g.w(), D4::W) + shape_axis(a.h(), g.h(), D4::H);

    (ge.d_iou - (d_delta + d_omega) * 0.5, non_smooth)
}

/// Loss value and analytic gradient with respect to the anchor, the GT box
/// held fixed. With `iv = None` this is the plain variant loss; with an
/// interval it is the Focaler-composed loss
/// `L_X + IoU - IoU_remapped`, whose gradient is
/// `dL_X + (1 - slope) * dIoU`.
pub fn loss_grad(
    kind: LossKind,
    a: &BBox,
    g: &BBox,
    iv: Option<FocalerInterval>,
    p: &SiouParams,
) -> LossEval {
    let ge = geom(a, g);
    let mut non_smooth = ge.non_smooth;

    let d_metric = match kind {
        LossKind::Iou => ge.d_iou,
        LossKind::Giou => giou_metric_grad(&ge),
        LossKind::Diou => ge.d_iou - dist_term_grad(&ge),
        LossKind::Ciou => {
            let (d_av, kinked) = ciou_aspect_grad(&ge, a, g);
            non_smooth |= kinked;
            ge.d_iou - dist_term_grad(&ge) - d_av
        }
        LossKind::Eiou => eiou_metric_grad(&ge, a, g),
        LossKind::Siou => {
            let (d, kinked) = siou_metric_grad(&ge, a, g, p);
            non_smooth |= kinked;
            d
        }
    };
    let mut d_loss = -d_metric;

    // value from the same path the rest of the crate evaluates, so the two
    // APIs agree bit for bit
    let (loss, iou) = match iv {
        None => (metrics::loss(kind, a, g, p), ge.iou),
        Some(interval) => {
            let e = focaler::focaler_loss(kind, a, g, &interval, p);
            if e.iou == interval.d() || e.iou == interval.u() {
                non_smooth = true;
            }
            let slope = focaler::mapping_slope(e.iou, &interval);
            d_loss = d_loss + ge.d_iou * (1.0 - slope);
            (e.focaler_loss, e.iou)
        }
    };
    non_smooth |= ge.degenerate;

    LossEval {
        loss,
        iou,
        grad: Grad4::from(d_loss.0),
        non_smooth,
    }
}

const PARAM_NAMES: [&str; 4] = ["cx", "cy", "w", "h"];

fn with_param(a: &BBox, idx: usize, value: f64) -> Result<BBox> {
    let mut f = [a.cx(), a.cy(), a.w(), a.h()];
    f[idx] = value;
    BBox::new(f[0], f[1], f[2], f[3])
}

/// Central finite differences `(f(x+h) - f(x-h)) / (2h)` per coordinate with
/// a relative step `h = step * max(1, |coordinate|)`.
///
/// If a perturbation produces an invalid box the step is halved once; a
/// second failure is an error.
pub fn fd_grad(
    kind: LossKind,
    a: &BBox,
    g: &BBox,
    iv: Option<FocalerInterval>,
    p: &SiouParams,
    step: f64,
) -> Result<Grad4> {
    let eval = |b: &BBox| -> f64 {
        match iv {
            None => metrics::loss(kind, b, g, p),
            Some(interval) => focaler::focaler_loss(kind, b, g, &interval, p).focaler_loss,
        }
    };
    let x = [a.cx(), a.cy(), a.w(), a.h()];
    let mut out = [0.0; 4];
    for i in 0..4 {
        let mut h = step * x[i].abs().max(1.0);
        let mut boxes = None;
        for _ in 0..2 {
            let xp = x[i] + h;
            let xm = x[i] - h;
            if let (Ok(bp), Ok(bm)) = (with_param(a, i, xp), with_param(a, i, xm)) {
                boxes = Some((bp, bm, xp - xm));
                break;
            }
            h /= 2.0;
        }
        let (bp, bm, denom) = boxes.ok_or(Error::FdStepInvalid { param: PARAM_NAMES[i] })?;
        out[i] = (eval(&bp) - eval(&bm)) / denom;
    }
    Ok(Grad4::from(out))
}

/// The sampling distribution used by [`grad_check`]: anchor and GT with
/// log-uniform sizes in [0.1, 10] and centers uniform in [0, 10]^2.
pub fn sample_pairs(n: usize, seed: u64) -> Vec<(BBox, BBox)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (sample_box(&mut rng), sample_box(&mut rng))).collect()
}

fn sample_box(rng: &mut ChaCha8Rng) -> BBox {
    let size = |r: &mut ChaCha8Rng| r.random_range(0.1f64.ln()..10f64.ln()).exp();
    BBox::new(
        rng.random_range(0.0..10.0),
        rng.random_range(0.0..10.0),
        size(rng),
        size(rng),
    )
    .expect("sampled box is valid")
}

/// True when the pair sits close enough to a non-differentiable locus that a
/// central difference with the given relative step would straddle it.
///
/// Detected loci: any pair of same-axis box edges within 10 effective steps
/// (the min/max selections of intersection and hull, including the touching
/// boundary), the SIoU min/abs switches in the center offsets, and the
/// Focaler interval boundaries (with a margin scaled by the IoU gradient so
/// the check stays valid for small boxes with steep IoU).
pub fn is_near_kink(
    kind: LossKind,
    a: &BBox,
    g: &BBox,
    iv: Option<FocalerInterval>,
    p: &SiouParams,
    step: f64,
) -> bool {
    let margin = |vals: &[f64]| {
        10.0 * step * vals.iter().fold(1.0f64, |m, v| m.max(v.abs()))
    };

    if a.union_area(g) <= 0.0 {
        return true;
    }

    let xs = [
        (a.x1(), g.x1()),
        (a.x2(), g.x2()),
        (a.x1(), g.x2()),
        (a.x2(), g.x1()),
        (a.y1(), g.y1()),
        (a.y2(), g.y2()),
        (a.y1(), g.y2()),
        (a.y2(), g.y1()),
    ];
    for (p1, p2) in xs {
        if (p1 - p2).abs() < margin(&[p1, p2]) {
            return true;
        }
    }

    if kind == LossKind::Siou {
        let dx = a.cx() - g.cx();
        let dy = a.cy() - g.cy();
        let mc = margin(&[a.cx(), a.cy(), g.cx(), g.cy()]);
        if dx.abs() < mc || dy.abs() < mc || (dx.abs() - dy.abs()).abs() < mc {
            return true;
        }
        if p.theta() <= 1.0 {
            let ms = margin(&[a.w(), g.w(), a.h(), g.h()]);
            if (a.w() - g.w()).abs() < ms || (a.h() - g.h()).abs() < ms {
                return true;
            }
        }
    }

    if [a.w(), a.h(), g.w(), g.h()].iter().any(|&s| s < 100.0 * step) {
        return true;
    }

    if let Some(interval) = iv {
        let e = loss_grad(LossKind::Iou, a, g, None, p);
        let h_eff = step
            * [a.cx(), a.cy(), a.w(), a.h()]
                .iter()
                .fold(1.0f64, |m, v| m.max(v.abs()));
        let m = 1e-4 + 20.0 * h_eff * e.grad.inf_norm();
        if (e.iou - interval.d()).abs() < m || (e.iou - interval.u()).abs() < m {
            return true;
        }
    }

    false
}

/// Configuration for [`grad_check`].
#[derive(Debug, Clone)]
pub struct GradCheckConfig {
    pub kinds: Vec<LossKind>,
    /// Sample pairs per kind.
    pub n: usize,
    pub seed: u64,
    pub interval: Option<FocalerInterval>,
    pub siou: SiouParams,
    /// Relative finite-difference step.
    pub step: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            kinds: LossKind::ALL.to_vec(),
            n: 1000,
            seed: 7,
            interval: None,
            siou: SiouParams::default(),
            step: 1e-6,
        }
    }
}

/// Worst offending sample of a gradient check run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstCase {
    pub anchor: BBox,
    pub gt: BBox,
    pub kind: LossKind,
}

/// Aggregate result of a gradient check: maximum errors over all checked
/// points, with kink-adjacent points counted separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    /// Total sampled points (checked + skipped).
    pub n_points: usize,
    /// Points excluded near non-smooth loci.
    pub n_skipped: usize,
    pub worst_case: Option<WorstCase>,
}

impl GradCheckReport {
    pub fn passes(&self, tol_rel: f64) -> bool {
        self.max_rel_err <= tol_rel
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_rel_err = {:e}", self.max_rel_err)?;
        writeln!(f, "max_abs_err = {:e}", self.max_abs_err)?;
        writeln!(f, "n_points = {}", self.n_points)?;
        writeln!(f, "n_skipped = {}", self.n_skipped)?;
        match &self.worst_case {
            Some(w) => writeln!(
                f,
                "worst_case = kind={} anchor=({}, {}, {}, {}) gt=({}, {}, {}, {})",
                w.kind,
                w.anchor.cx(),
                w.anchor.cy(),
                w.anchor.w(),
                w.anchor.h(),
                w.gt.cx(),
                w.gt.cy(),
                w.gt.w(),
                w.gt.h()
            ),
            None => writeln!(f, "worst_case = none"),
        }
    }
}

struct CheckAccum {
    report: GradCheckReport,
}

impl CheckAccum {
    fn new() -> Self {
        CheckAccum {
            report: GradCheckReport {
                max_rel_err: 0.0,
                max_abs_err: 0.0,
                n_points: 0,
                n_skipped: 0,
                worst_case: None,
            },
        }
    }

    fn add(
        &mut self,
        kind: LossKind,
        a: &BBox,
        g: &BBox,
        iv: Option<FocalerInterval>,
        p: &SiouParams,
        step: f64,
    ) -> Result<()> {
        self.report.n_points += 1;
        if is_near_kink(kind, a, g, iv, p, step) {
            self.report.n_skipped += 1;
            return Ok(());
        }
        let analytic = loss_grad(kind, a, g, iv, p).grad.as_array();
        let fd = fd_grad(kind, a, g, iv, p, step)?.as_array();
        for i in 0..4 {
            let abs = (analytic[i] - fd[i]).abs();
            // relative with a unit floor so near-zero components compare
            // absolutely instead of dividing by noise
            let rel = abs / analytic[i].abs().max(fd[i].abs()).max(1.0);
            self.report.max_abs_err = self.report.max_abs_err.max(abs);
            if rel > self.report.max_rel_err {
                self.report.max_rel_err = rel;
                self.report.worst_case = Some(WorstCase { anchor: *a, gt: *g, kind });
            }
        }
        Ok(())
    }
}

/// Checks analytic against central-difference gradients on an explicit pair
/// list, for every requested kind.
pub fn grad_check_pairs(
    pairs: &[(BBox, BBox)],
    kinds: &[LossKind],
    iv: Option<FocalerInterval>,
    p: &SiouParams,
    step: f64,
) -> Result<GradCheckReport> {
    let mut acc = CheckAccum::new();
    for &kind in kinds {
        for (a, g) in pairs {
            acc.add(kind, a, g, iv, p, step)?;
        }
    }
    Ok(acc.report)
}

/// Samples `n` fresh pairs per kind (one sequential seeded stream, so the
/// run is deterministic and thread-count independent) and compares analytic
/// gradients against the finite-difference oracle away from kinks.
pub fn grad_check(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut acc = CheckAccum::new();
    for &kind in &cfg.kinds {
        for _ in 0..cfg.n {
            let a = sample_box(&mut rng);
            let g = sample_box(&mut rng);
            acc.add(kind, &a, &g, cfg.interval, &cfg.siou, cfg.step)?;
        }
    }
    Ok(acc.report)
}
