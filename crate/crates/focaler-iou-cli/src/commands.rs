//! Implementations of the CLI subcommands.
//!
//! Exit-code contract: 0 success, 1 validation/parse error (returned as
//! `Err` and mapped in `main`), 2 check failure (gradcheck over tolerance).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use focaler_iou::{
    compare, focaler_loss, grad_check, iou_histogram, metric, recommend_interval, AnalysisReport,
    FocalerInterval, FocusMode, GradCheckConfig, GradCheckReport, LossConfig, LossKind, RunResult,
    SiouParams,
};
use serde::Serialize;

use crate::config::{self, SimConfig};
use crate::fixtures;
use crate::records::{fmt_g9, read_pairs};

fn opt_fmt(v: Option<f64>) -> String {
    v.map(fmt_g9).unwrap_or_default()
}

pub fn parse_kinds(tokens: &str) -> Result<Vec<LossKind>> {
    if tokens == "all" {
        return Ok(LossKind::ALL.to_vec());
    }
    tokens
        .split(',')
        .map(|t| t.trim().parse::<LossKind>().map_err(Into::into))
        .collect()
}

pub struct EvalArgs {
    pub input: PathBuf,
    pub kind: LossKind,
    pub interval: Option<FocalerInterval>,
    pub siou: SiouParams,
    pub out: PathBuf,
}

pub fn eval(args: &EvalArgs) -> Result<u8> {
    let records = read_pairs(&args.input)?;
    let mut wtr = csv::Writer::from_path(&args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    wtr.write_record(["id", "iou", "metric", "loss", "focaler_iou", "focaler_loss"])?;
    for r in &records {
        let (a, g) = r.boxes()?;
        let b = metric(args.kind, &a, &g, &args.siou);
        let (fiou, floss) = match &args.interval {
            Some(iv) => {
                let e = focaler_loss(args.kind, &a, &g, iv, &args.siou);
                (fmt_g9(e.iou_focaler), fmt_g9(e.focaler_loss))
            }
            None => (String::new(), String::new()),
        };
        wtr.write_record([
            r.id.as_str(),
            &fmt_g9(b.iou),
            &fmt_g9(b.metric),
            &fmt_g9(1.0 - b.metric),
            &fiou,
            &floss,
        ])?;
    }
    wtr.flush()?;
    eprintln!("wrote {} rows to {}", records.len(), args.out.display());
    Ok(0)
}

pub struct GradcheckArgs {
    pub kinds: Vec<LossKind>,
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    pub step: f64,
    pub interval: Option<FocalerInterval>,
    pub siou: SiouParams,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct GradcheckOutput<'a> {
    #[serde(flatten)]
    report: &'a GradCheckReport,
    tol: f64,
    pass: bool,
}

pub fn gradcheck(args: &GradcheckArgs) -> Result<u8> {
    if args.n == 0 {
        bail!("n must be > 0");
    }
    if !args.tol.is_finite() || args.tol < 0.0 {
        bail!("tol must be a non-negative number");
    }
    let cfg = GradCheckConfig {
        kinds: args.kinds.clone(),
        n: args.n,
        seed: args.seed,
        interval: args.interval,
        siou: args.siou,
        step: args.step,
    };
    let report = grad_check(&cfg)?;
    let pass = report.passes(args.tol);
    print!("{report}");
    println!("tol = {:e}", args.tol);
    println!("result = {}", if pass { "PASS" } else { "FAIL" });
    if let Some(path) = &args.out {
        let file = fs::File::create(path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        serde_json::to_writer_pretty(file, &GradcheckOutput { report: &report, tol: args.tol, pass })?;
    }
    Ok(if pass { 0 } else { 2 })
}

const SUMMARY_HEADER: [&str; 7] = [
    "config_id",
    "kind",
    "focaler_d",
    "focaler_u",
    "mean_final_iou",
    "mean_final_l1",
    "diverged",
];

fn write_summary_row(
    wtr: &mut csv::Writer<fs::File>,
    cfg: &LossConfig,
    result: &RunResult,
) -> Result<()> {
    wtr.write_record([
        cfg.id.as_str(),
        cfg.kind.as_str(),
        &opt_fmt(cfg.interval.map(|iv| iv.d())),
        &opt_fmt(cfg.interval.map(|iv| iv.u())),
        &fmt_g9(result.mean_final_iou),
        &fmt_g9(result.mean_final_l1),
        &result.n_diverged.to_string(),
    ])?;
    Ok(())
}

fn write_trace(path: &Path, result: &RunResult) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    wtr.write_record(["pair_id", "step", "iou", "loss", "d_cx", "d_cy", "d_w", "d_h"])?;
    for (pair_id, pair) in result.per_pair.iter().enumerate() {
        for (k, rec) in pair.steps.iter().enumerate() {
            wtr.write_record([
                pair_id.to_string(),
                (k + 1).to_string(),
                fmt_g9(rec.iou),
                fmt_g9(rec.loss),
                fmt_g9(rec.grad.d_cx),
                fmt_g9(rec.grad.d_cy),
                fmt_g9(rec.grad.d_w),
                fmt_g9(rec.grad.d_h),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn simulate(config_path: &Path, out_dir: &Path) -> Result<u8> {
    let cfg: SimConfig = config::load_config(config_path)?;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let rows = compare(&cfg.configs, &cfg.spec, cfg.lr, cfg.steps, cfg.siou)?;

    let summary_path = out_dir.join("summary.csv");
    let mut wtr = csv::Writer::from_path(&summary_path)
        .with_context(|| format!("cannot write {}", summary_path.display()))?;
    wtr.write_record(SUMMARY_HEADER)?;
    for row in &rows {
        write_summary_row(&mut wtr, &row.config, &row.result)?;
        let trace_path = out_dir.join(format!("trace_{}.csv", row.config.id));
        write_trace(&trace_path, &row.result)?;
    }
    wtr.flush()?;
    eprintln!(
        "wrote {} and {} trace files to {}",
        summary_path.display(),
        rows.len(),
        out_dir.display()
    );
    Ok(0)
}

pub struct SweepArgs {
    pub config: PathBuf,
    pub kind: LossKind,
    pub d_grid: Vec<f64>,
    pub u_grid: Vec<f64>,
    pub out: PathBuf,
}

pub fn parse_grid(s: &str, name: &str) -> Result<Vec<f64>> {
    let mut vals = Vec::new();
    for tok in s.split(',') {
        let v: f64 = tok
            .trim()
            .parse()
            .with_context(|| format!("{name}: invalid number {tok:?}"))?;
        if !(0.0..=1.0).contains(&v) {
            bail!("{name}: value {v} outside [0, 1]");
        }
        vals.push(v);
    }
    if vals.is_empty() {
        bail!("{name}: empty grid");
    }
    vals.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    Ok(vals)
}

pub fn sweep(args: &SweepArgs) -> Result<u8> {
    let cfg = config::load_config(&args.config)?;
    let mut configs = Vec::new();
    let mut skipped = 0usize;
    for &d in &args.d_grid {
        for &u in &args.u_grid {
            match FocalerInterval::new(d, u) {
                Ok(iv) => configs.push(LossConfig {
                    id: format!("d{}_u{}", fmt_g9(d), fmt_g9(u)),
                    kind: args.kind,
                    interval: Some(iv),
                }),
                Err(_) => skipped += 1,
            }
        }
    }
    if configs.is_empty() {
        bail!(
            "no valid (d, u) pairs in the grid; all {skipped} combinations have d >= u"
        );
    }
    let rows = compare(&configs, &cfg.spec, cfg.lr, cfg.steps, cfg.siou)?;
    let mut wtr = csv::Writer::from_path(&args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    wtr.write_record(SUMMARY_HEADER)?;
    for row in &rows {
        write_summary_row(&mut wtr, &row.config, &row.result)?;
    }
    wtr.flush()?;
    eprintln!(
        "wrote {} rows to {} ({skipped} invalid grid pairs skipped)",
        rows.len(),
        args.out.display()
    );
    Ok(0)
}

pub fn analyze(input: &Path, mode: FocusMode, bins: usize, out: &Path) -> Result<u8> {
    let records = read_pairs(input)?;
    let mut pairs = Vec::with_capacity(records.len());
    for r in &records {
        pairs.push(r.boxes()?);
    }
    let hist = iou_histogram(&pairs, bins)?;
    let rec = recommend_interval(&hist, mode);
    let report = AnalysisReport::new(&hist, &rec);
    let file = fs::File::create(out).with_context(|| format!("cannot write {}", out.display()))?;
    serde_json::to_writer_pretty(file, &report)?;
    eprintln!(
        "analyzed {} pairs; recommended ({}, {}){}",
        hist.n,
        fmt_g9(rec.interval.d()),
        fmt_g9(rec.interval.u()),
        if rec.fallback { " [fallback]" } else { "" }
    );
    Ok(0)
}

pub fn report(out: Option<&Path>) -> Result<u8> {
    let text = fixtures::render(&fixtures::load()?);
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            file.write_all(text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(0)
}
