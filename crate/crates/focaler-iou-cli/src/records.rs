//! Box-pair CSV files and the shared numeric output format.
//!
//! Input schema: `id,x1,y1,x2,y2,gx1,gy1,gx2,gy2`, UTF-8, '.' decimal
//! separator, one record per (anchor, GT) pair. Trivially producible from
//! any detection toolchain's dump.

use std::collections::HashSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use focaler_iou::{BBox, CornerBox};

pub const PAIR_HEADER: [&str; 9] = ["id", "x1", "y1", "x2", "y2", "gx1", "gy1", "gx2", "gy2"];

#[derive(Debug, Clone, PartialEq)]
pub struct BoxPairRecord {
    pub id: String,
    pub anchor: CornerBox,
    pub gt: CornerBox,
}

impl BoxPairRecord {
    pub fn boxes(&self) -> Result<(BBox, BBox)> {
        let a = BBox::try_from(self.anchor).with_context(|| format!("record {:?}", self.id))?;
        let g = BBox::try_from(self.gt).with_context(|| format!("record {:?}", self.id))?;
        Ok((a, g))
    }
}

/// Formats with 9 significant digits, plain decimal for ordinary magnitudes.
/// Trailing zeros are trimmed so values diff cleanly.
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let trim = |s: &str| s.trim_end_matches('0').trim_end_matches('.').to_string();
    let exp = x.abs().log10().floor() as i32;
    if (-4..=14).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            trim(&s)
        } else {
            s
        }
    } else {
        let s = format!("{x:.8e}");
        match s.split_once('e') {
            Some((mantissa, e)) => format!("{}e{e}", trim(mantissa)),
            None => s,
        }
    }
}

pub fn read_pairs(path: &Path) -> Result<Vec<BoxPairRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;

    let headers = rdr
        .headers()
        .with_context(|| format!("{}: cannot read header", path.display()))?;
    if headers.iter().collect::<Vec<_>>() != PAIR_HEADER {
        bail!(
            "{}: invalid header {:?}; expected {}",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(","),
            PAIR_HEADER.join(",")
        );
    }

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record.with_context(|| format!("{}: malformed row", path.display()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != PAIR_HEADER.len() {
            bail!(
                "{}: line {}: expected {} fields, found {}",
                path.display(),
                line,
                PAIR_HEADER.len(),
                record.len()
            );
        }
        let field = |i: usize| -> Result<f64> {
            record[i].parse().with_context(|| {
                format!(
                    "{}: line {}: field {}: invalid number {:?}",
                    path.display(),
                    line,
                    PAIR_HEADER[i],
                    &record[i]
                )
            })
        };
        let id = record[0].to_string();
        if !seen.insert(id.clone()) {
            bail!("{}: line {}: duplicate id {:?}", path.display(), line, id);
        }
        let anchor = CornerBox::new(field(1)?, field(2)?, field(3)?, field(4)?)
            .with_context(|| format!("{}: line {}: anchor corners", path.display(), line))?;
        let gt = CornerBox::new(field(5)?, field(6)?, field(7)?, field(8)?)
            .with_context(|| format!("{}: line {}: gt corners", path.display(), line))?;
        out.push(BoxPairRecord { id, anchor, gt });
    }
    if out.is_empty() {
        bail!("{}: no records", path.display());
    }
    Ok(out)
}

pub fn write_pairs(path: &Path, records: &[BoxPairRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    wtr.write_record(PAIR_HEADER)?;
    for r in records {
        wtr.write_record([
            r.id.as_str(),
            &fmt_g9(r.anchor.x1),
            &fmt_g9(r.anchor.y1),
            &fmt_g9(r.anchor.x2),
            &fmt_g9(r.anchor.y2),
            &fmt_g9(r.gt.x1),
            &fmt_g9(r.gt.y1),
            &fmt_g9(r.gt.x2),
            &fmt_g9(r.gt.y2),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
