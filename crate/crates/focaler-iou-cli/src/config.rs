//! JSON configuration for the `simulate` and `sweep` subcommands.
//!
//! Schema (see `configs/default.json` for a complete example):
//!
//! ```json
//! {
//!   "spec": {
//!     "n_easy": 60, "n_hard": 40,
//!     "easy_iou_range": [0.5, 0.9], "hard_iou_range": [0.15, 0.4],
//!     "gt_size_range": [1.0, 3.0], "seed": 42
//!   },
//!   "lr": 0.005,
//!   "steps": 400,
//!   "siou": { "theta": 4.0, "eps": 1e-7 },
//!   "configs": [
//!     { "id": "iou", "kind": "iou" },
//!     { "id": "focaler_iou", "kind": "iou", "focaler_d": 0.0, "focaler_u": 0.5 }
//!   ]
//! }
//! ```

use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context, Result};
use focaler_iou::{FocalerInterval, LossConfig, ScenarioSpec, SiouParams};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    spec: ScenarioSpec,
    lr: f64,
    steps: usize,
    #[serde(default)]
    siou: RawSiou,
    configs: Vec<RawEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSiou {
    #[serde(default = "default_theta")]
    theta: f64,
    #[serde(default = "default_eps")]
    eps: f64,
}

fn default_theta() -> f64 {
    4.0
}

fn default_eps() -> f64 {
    1e-7
}

impl Default for RawSiou {
    fn default() -> Self {
        RawSiou { theta: default_theta(), eps: default_eps() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    id: String,
    kind: String,
    #[serde(default)]
    focaler_d: Option<f64>,
    #[serde(default)]
    focaler_u: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: ScenarioSpec,
    pub lr: f64,
    pub steps: usize,
    pub siou: SiouParams,
    pub configs: Vec<LossConfig>,
}

/// Builds the optional interval from the paired `focaler_d`/`focaler_u`
/// fields; exactly one of the two present is an error.
pub fn interval_from_fields(
    d: Option<f64>,
    u: Option<f64>,
    what: &str,
) -> Result<Option<FocalerInterval>> {
    match (d, u) {
        (None, None) => Ok(None),
        (Some(d), Some(u)) => Ok(Some(
            FocalerInterval::new(d, u).with_context(|| format!("{what}: focaler_d/focaler_u"))?,
        )),
        _ => bail!("{what}: focaler_d and focaler_u must be given together"),
    }
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let raw: RawConfig = serde_json::from_reader(file)
        .with_context(|| format!("{}: invalid config", path.display()))?;

    raw.spec
        .validate()
        .with_context(|| format!("{}: field spec", path.display()))?;
    if !raw.lr.is_finite() || raw.lr <= 0.0 {
        bail!("{}: field lr: must be a positive step size", path.display());
    }
    if raw.steps == 0 {
        bail!("{}: field steps: must be > 0", path.display());
    }
    let siou = SiouParams::new(raw.siou.theta, raw.siou.eps)
        .with_context(|| format!("{}: field siou", path.display()))?;
    if raw.configs.is_empty() {
        bail!("{}: field configs: must not be empty", path.display());
    }

    let mut ids = HashSet::new();
    let mut configs = Vec::with_capacity(raw.configs.len());
    for (i, entry) in raw.configs.iter().enumerate() {
        let at = format!("{}: field configs[{i}]", path.display());
        if !ids.insert(entry.id.clone()) {
            bail!("{at}: duplicate id {:?}", entry.id);
        }
        let kind = entry.kind.parse().with_context(|| format!("{at}.kind"))?;
        let interval = interval_from_fields(entry.focaler_d, entry.focaler_u, &at)?;
        configs.push(LossConfig { id: entry.id.clone(), kind, interval });
    }

    Ok(SimConfig { spec: raw.spec, lr: raw.lr, steps: raw.steps, siou, configs })
}
