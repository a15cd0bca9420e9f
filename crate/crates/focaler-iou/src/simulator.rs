//! Synthetic bounding-box regression: plain gradient descent drives anchors
//! toward fixed GT boxes under a selected loss, producing per-step traces and
//! final-error summaries.
//!
//! Scenario generation realizes "difficult" samples two ways, both
//! controllable: low initial IoU, and GT sizes drawn from the lower decile of
//! the configured size range. Generation uses one sequential seeded stream
//! and pairs evolve independently in index order, so results are bit-identical
//! across reruns regardless of threading.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::focaler::FocalerInterval;
use crate::geometry::BBox;
use crate::gradients::{loss_grad, Grad4};
use crate::metrics::{LossKind, SiouParams};

/// Width/height floor applied after every descent step.
pub const SIZE_FLOOR: f64 = 1e-6;

/// Maximum anchor perturbations tried per pair before the requested IoU
/// range is declared infeasible.
pub const MAX_ATTEMPTS: u32 = 10_000;

/// Recipe for a synthetic dataset of (anchor, GT) pairs split into easy and
/// hard populations by initial IoU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n_easy: usize,
    pub n_hard: usize,
    /// Open interval of admissible initial IoU for easy pairs.
    pub easy_iou_range: (f64, f64),
    /// Open interval of admissible initial IoU for hard pairs.
    pub hard_iou_range: (f64, f64),
    /// GT sizes are log-uniform in this range; hard pairs draw from its
    /// lower decile (small targets are hard to localize).
    pub gt_size_range: (f64, f64),
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let range_ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && (0.0..1.0).contains(&r.0) && r.1 <= 1.0 && r.0 < r.1;
        if !range_ok(self.easy_iou_range) {
            return Err(Error::InvalidScenario {
                field: "easy_iou_range",
                reason: "must be an ordered range within [0, 1)",
            });
        }
        if !range_ok(self.hard_iou_range) {
            return Err(Error::InvalidScenario {
                field: "hard_iou_range",
                reason: "must be an ordered range within [0, 1)",
            });
        }
        let (lo, hi) = self.gt_size_range;
        if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || lo > hi {
            return Err(Error::InvalidScenario {
                field: "gt_size_range",
                reason: "must be an ordered range of positive sizes",
            });
        }
        Ok(())
    }
}

/// One simulation run: the pair list plus optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub pairs: Vec<(BBox, BBox)>,
    pub lr: f64,
    pub steps: usize,
    pub kind: LossKind,
    pub interval: Option<FocalerInterval>,
    pub siou: SiouParams,
    pub seed: u64,
}

impl ScenarioSet {
    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::EmptyInput { what: "scenario pairs" });
        }
        if !self.lr.is_finite() || self.lr < 0.0 {
            return Err(Error::InvalidScenario {
                field: "lr",
                reason: "must be a finite non-negative step size",
            });
        }
        if self.steps == 0 {
            return Err(Error::InvalidScenario { field: "steps", reason: "must be > 0" });
        }
        Ok(())
    }
}

/// One descent step of one pair: the state the gradient was evaluated at,
/// its IoU and loss, and the gradient that was applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub state: BBox,
    pub iou: f64,
    pub loss: f64,
    pub grad: Grad4,
}

/// Trajectory and final errors of one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub final_iou: f64,
    /// Sum of |d cx| + |d cy| + |d w| + |d h| between final anchor and GT.
    pub final_l1: f64,
    pub steps: Vec<StepRecord>,
    pub diverged: bool,
    pub clamp_events: u32,
}

impl PairOutcome {
    pub fn iou_trace(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.iou).collect()
    }
}

/// All pair outcomes plus means over the non-diverged pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub per_pair: Vec<PairOutcome>,
    pub mean_final_iou: f64,
    pub mean_final_l1: f64,
    pub n_diverged: usize,
    pub clamp_events: u64,
}

/// Generates the pair list: for each pair a GT box is drawn once, then
/// anchor perturbations are rejection-sampled until the initial IoU lands in
/// the requested open range (cap [`MAX_ATTEMPTS`]).
pub fn generate_scenarios(spec: &ScenarioSpec) -> Result<Vec<(BBox, BBox)>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pairs = Vec::with_capacity(spec.n_easy + spec.n_hard);
    let (lo, hi) = spec.gt_size_range;
    let hard_sizes = (lo, lo + 0.1 * (hi - lo));
    for _ in 0..spec.n_easy {
        pairs.push(sample_pair(&mut rng, spec.easy_iou_range, spec.gt_size_range)?);
    }
    for _ in 0..spec.n_hard {
        pairs.push(sample_pair(&mut rng, spec.hard_iou_range, hard_sizes)?);
    }
    Ok(pairs)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn sample_pair(
    rng: &mut ChaCha8Rng,
    iou_range: (f64, f64),
    sizes: (f64, f64),
) -> Result<(BBox, BBox)> {
    let gw = log_uniform(rng, sizes.0, sizes.1);
    let gh = log_uniform(rng, sizes.0, sizes.1);
    let gt = BBox::new(
        rng.random_range(0.0..10.0),
        rng.random_range(0.0..10.0),
        gw,
        gh,
    )
    .expect("sampled GT box is valid");

    for _ in 0..MAX_ATTEMPTS {
        // difficulty scale t: t -> 0 keeps the anchor on top of the GT,
        // t -> 1 allows shifts of a full box size and 2x size mismatch
        let t: f64 = rng.random_range(0.0..1.0);
        let dx = t * rng.random_range(-1.0..1.0) * gt.w();
        let dy = t * rng.random_range(-1.0..1.0) * gt.h();
        let ln2 = std::f64::consts::LN_2;
        let sw = (t * rng.random_range(-ln2..ln2)).exp();
        let sh = (t * rng.random_range(-ln2..ln2)).exp();
        let anchor = BBox::new(gt.cx() + dx, gt.cy() + dy, gt.w() * sw, gt.h() * sh)
            .expect("perturbed anchor is valid");
        let iou = anchor.iou(&gt);
        if iou > iou_range.0 && iou < iou_range.1 {
            return Ok((anchor, gt));
        }
    }
    Err(Error::InfeasibleIouRange {
        lo: iou_range.0,
        hi: iou_range.1,
        attempts: MAX_ATTEMPTS,
    })
}

fn descend_pair(
    anchor: BBox,
    gt: BBox,
    set: &ScenarioSet,
) -> PairOutcome {
    let mut state = anchor;
    let mut records = Vec::with_capacity(set.steps);
    let mut diverged = false;
    let mut clamp_events = 0u32;

    for _ in 0..set.steps {
        let e = loss_grad(set.kind, &state, &gt, set.interval, &set.siou);
        if !e.loss.is_finite() || !e.grad.is_finite() {
            diverged = true;
            break;
        }
        records.push(StepRecord { state, iou: e.iou, loss: e.loss, grad: e.grad });

        let mut w = state.w() - set.lr * e.grad.d_w;
        let mut h = state.h() - set.lr * e.grad.d_h;
        if w < SIZE_FLOOR {
            w = SIZE_FLOOR;
            clamp_events += 1;
        }
        if h < SIZE_FLOOR {
            h = SIZE_FLOOR;
            clamp_events += 1;
        }
        let cx = state.cx() - set.lr * e.grad.d_cx;
        let cy = state.cy() - set.lr * e.grad.d_cy;
        match BBox::new(cx, cy, w, h) {
            Ok(next) => state = next,
            Err(_) => {
                diverged = true;
                break;
            }
        }
    }

    let final_l1 = (state.cx() - gt.cx()).abs()
        + (state.cy() - gt.cy()).abs()
        + (state.w() - gt.w()).abs()
        + (state.h() - gt.h()).abs();
    PairOutcome {
        final_iou: state.iou(&gt),
        final_l1,
        steps: records,
        diverged,
        clamp_events,
    }
}

/// Runs plain gradient descent `a <- a - lr * dL` on every pair
/// independently. Diverged pairs (non-finite loss, gradient or state) are
/// aborted, excluded from the means and counted.
pub fn run(set: &ScenarioSet) -> Result<RunResult> {
    set.validate()?;
    let per_pair: Vec<PairOutcome> = set
        .pairs
        .iter()
        .map(|(a, g)| descend_pair(*a, *g, set))
        .collect();

    let mut sum_iou = 0.0;
    let mut sum_l1 = 0.0;
    let mut n_ok = 0usize;
    let mut n_diverged = 0usize;
    let mut clamp_events = 0u64;
    for p in &per_pair {
        clamp_events += p.clamp_events as u64;
        if p.diverged {
            n_diverged += 1;
        } else {
            sum_iou += p.final_iou;
            sum_l1 += p.final_l1;
            n_ok += 1;
        }
    }
    let (mean_final_iou, mean_final_l1) = if n_ok > 0 {
        (sum_iou / n_ok as f64, sum_l1 / n_ok as f64)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(RunResult {
        per_pair,
        mean_final_iou,
        mean_final_l1,
        n_diverged,
        clamp_events,
    })
}

/// One entry of a comparison: a loss selection with an optional Focaler
/// interval, identified by a caller-chosen id.
#[derive(Debug, Clone, PartialEq)]
pub struct LossConfig {
    pub id: String,
    pub kind: LossKind,
    pub interval: Option<FocalerInterval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub config: LossConfig,
    pub result: RunResult,
}

/// Runs every configuration over the identical generated scenario list
/// (same seed, same pairs) and returns one row per configuration.
pub fn compare(
    configs: &[LossConfig],
    spec: &ScenarioSpec,
    lr: f64,
    steps: usize,
    siou: SiouParams,
) -> Result<Vec<ComparisonRow>> {
    if configs.is_empty() {
        return Err(Error::EmptyInput { what: "comparison configs" });
    }
    let pairs = generate_scenarios(spec)?;
    configs
        .iter()
        .map(|c| {
            let set = ScenarioSet {
                pairs: pairs.clone(),
                lr,
                steps,
                kind: c.kind,
                interval: c.interval,
                siou,
                seed: spec.seed,
            };
            Ok(ComparisonRow { config: c.clone(), result: run(&set)? })
        })
        .collect()
}
