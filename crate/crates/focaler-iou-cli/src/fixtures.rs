//! Bundled detector-training reference numbers.
//!
//! These rows ship as data and are never computed by this tool; every
//! rendering labels them as paper-reported results.

use anyhow::{bail, Context, Result};

pub const LABEL: &str = "paper-reported detector results (not reproduced by this tool)";

const DATA: &str = include_str!("../data/paper_results.csv");

/// One reference row, kept as strings so the bundled values are emitted
/// verbatim, never reformatted.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureRow {
    pub detector: String,
    pub loss_name: String,
    pub ap50: String,
    pub map5095: String,
    pub delta_ap50: String,
    pub delta_map5095: String,
}

pub fn load() -> Result<Vec<FixtureRow>> {
    let mut rdr = csv::Reader::from_reader(DATA.as_bytes());
    let mut rows = Vec::new();
    for record in rdr.records() {
        let r = record.context("bundled fixture data is malformed")?;
        if r.len() != 6 {
            bail!("bundled fixture data has a row with {} fields, expected 6", r.len());
        }
        rows.push(FixtureRow {
            detector: r[0].to_string(),
            loss_name: r[1].to_string(),
            ap50: r[2].to_string(),
            map5095: r[3].to_string(),
            delta_ap50: r[4].to_string(),
            delta_map5095: r[5].to_string(),
        });
    }
    if rows.is_empty() {
        bail!("bundled fixture data is empty");
    }
    Ok(rows)
}

pub fn render(rows: &[FixtureRow]) -> String {
    let headers = ["detector", "loss", "AP50", "mAP50:95", "dAP50", "dmAP50:95"];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            let dash = |s: &str| if s.is_empty() { "-".to_string() } else { s.to_string() };
            [
                r.detector.clone(),
                r.loss_name.clone(),
                r.ap50.clone(),
                r.map5095.clone(),
                dash(&r.delta_ap50),
                dash(&r.delta_map5095),
            ]
        })
        .collect();

    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (i, c) in row.iter().enumerate() {
            widths[i] = widths[i].max(c.len());
        }
    }
    let fmt_row = |cols: &[String]| {
        cols.iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<w$}", w = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };

    let mut out = String::new();
    out.push_str(LABEL);
    out.push_str("\n\n");
    out.push_str(&fmt_row(&headers.map(String::from)));
    out.push('\n');
    for row in &cells {
        out.push_str(&fmt_row(row));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_rows_carry_the_reference_values() {
        let rows = load().unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].ap50, "69.5");
        assert_eq!(rows[0].map5095, "48.3");
        assert_eq!(rows[1].ap50, "69.8");
        assert_eq!(rows[1].map5095, "48.6");
        assert_eq!(rows[1].delta_ap50, "+0.3");
        assert_eq!(rows[2].ap50, "42.7");
        assert_eq!(rows[3].delta_ap50, "+1.9");
        assert_eq!(rows[3].delta_map5095, "+0.5");
    }

    #[test]
    fn rendering_is_labeled() {
        let text = render(&load().unwrap());
        assert!(text.starts_with(LABEL));
        assert!(text.contains("69.5"));
        assert!(text.contains("44.6"));
    }
}
