//! Independent oracles for the acceptance suite.
//!
//! `mc_iou` estimates IoU by uniform sampling over the enclosing box. The
//! metric transcriptions below are written straight from the closed-form
//! definitions on corner coordinates, deliberately structured unlike the
//! kernel (no shared hull/intersection helpers, `sin(2 asin z)` instead of
//! the algebraic identity), so agreement is a genuine dual-route check.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `[x1, y1, x2, y2]`
pub type Corners = [f64; 4];

pub fn corners(cx: f64, cy: f64, w: f64, h: f64) -> Corners {
    [cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0]
}

fn area(b: Corners) -> f64 {
    (b[2] - b[0]) * (b[3] - b[1])
}

fn inter_area(a: Corners, g: Corners) -> f64 {
    let iw = (a[2].min(g[2]) - a[0].max(g[0])).max(0.0);
    let ih = (a[3].min(g[3]) - a[1].max(g[1])).max(0.0);
    iw * ih
}

fn union_area(a: Corners, g: Corners) -> f64 {
    area(a) + area(g) - inter_area(a, g)
}

fn hull(a: Corners, g: Corners) -> Corners {
    [a[0].min(g[0]), a[1].min(g[1]), a[2].max(g[2]), a[3].max(g[3])]
}

fn center(b: Corners) -> (f64, f64) {
    ((b[0] + b[2]) / 2.0, (b[1] + b[3]) / 2.0)
}

pub fn iou(a: Corners, g: Corners) -> f64 {
    let u = union_area(a, g);
    if u > 0.0 {
        inter_area(a, g) / u
    } else {
        0.0
    }
}

pub fn giou(a: Corners, g: Corners) -> f64 {
    let c = area(hull(a, g));
    iou(a, g) - (c - union_area(a, g)) / c
}

pub fn diou(a: Corners, g: Corners) -> f64 {
    let h = hull(a, g);
    let c2 = (h[2] - h[0]).powi(2) + (h[3] - h[1]).powi(2);
    let (ax, ay) = center(a);
    let (gx, gy) = center(g);
    iou(a, g) - ((ax - gx).powi(2) + (ay - gy).powi(2)) / c2
}

pub fn ciou(a: Corners, g: Corners) -> f64 {
    let w = a[2] - a[0];
    let h = a[3] - a[1];
    let wg = g[2] - g[0];
    let hg = g[3] - g[1];
    let v = 4.0 / (std::f64::consts::PI.powi(2)) * ((wg / hg).atan() - (w / h).atan()).powi(2);
    let i = iou(a, g);
    let alpha = v / ((1.0 - i) + v);
    diou(a, g) - alpha * v
}

pub fn eiou(a: Corners, g: Corners) -> f64 {
    let hb = hull(a, g);
    let wc = hb[2] - hb[0];
    let hc = hb[3] - hb[1];
    let (ax, ay) = center(a);
    let (gx, gy) = center(g);
    let rho2 = (ax - gx).powi(2) + (ay - gy).powi(2);
    let dw = (a[2] - a[0]) - (g[2] - g[0]);
    let dh = (a[3] - a[1]) - (g[3] - g[1]);
    iou(a, g) - rho2 / (wc * wc + hc * hc) - dw * dw / (wc * wc) - dh * dh / (hc * hc)
}

pub fn siou(a: Corners, g: Corners, theta: f64, eps: f64) -> f64 {
    let hb = hull(a, g);
    let wc = hb[2] - hb[0];
    let hc = hb[3] - hb[1];
    let (ax, ay) = center(a);
    let (gx, gy) = center(g);
    let dx = gx - ax;
    let dy = gy - ay;
    let sigma = (dx * dx + dy * dy).sqrt();
    let lambda = (2.0 * (dx.abs().min(dy.abs()) / (sigma + eps)).asin()).sin();
    let gamma = 2.0 - lambda;
    let rho_x = ((ax - gx) / wc).powi(2);
    let rho_y = ((ay - gy) / hc).powi(2);
    let delta = (1.0 - (-gamma * rho_x).exp()) + (1.0 - (-gamma * rho_y).exp());
    let w = a[2] - a[0];
    let h = a[3] - a[1];
    let wg = g[2] - g[0];
    let hg = g[3] - g[1];
    let omega_w = (w - wg).abs() / w.max(wg);
    let omega_h = (h - hg).abs() / h.max(hg);
    let omega = (1.0 - (-omega_w).exp()).powf(theta) + (1.0 - (-omega_h).exp()).powf(theta);
    iou(a, g) - (delta + omega) / 2.0
}

/// 53-bit uniform in [0, 1) from a raw 64-bit draw.
fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Monte Carlo IoU: `n` uniform samples over the enclosing box; the estimate
/// is (#hits in both) / (#hits in either).
pub fn mc_iou(a: Corners, g: Corners, n: usize, seed: u64) -> f64 {
    let hb = hull(a, g);
    let (hw, hh) = (hb[2] - hb[0], hb[3] - hb[1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inside = |b: Corners, x: f64, y: f64| x >= b[0] && x <= b[2] && y >= b[1] && y <= b[3];
    let mut both = 0u64;
    let mut either = 0u64;
    for _ in 0..n {
        let x = hb[0] + unit_f64(&mut rng) * hw;
        let y = hb[1] + unit_f64(&mut rng) * hh;
        let ina = inside(a, x, y);
        let ing = inside(g, x, y);
        both += (ina && ing) as u64;
        either += (ina || ing) as u64;
    }
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}
