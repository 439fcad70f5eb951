use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};

use super::EvalRecord;
use crate::centrality::MeasureId;

/// Gain with two decimals; zero or undefined gains print as `--`.
pub fn format_gain(gain: Option<f64>) -> String {
    match gain {
        Some(g) if g != 0.0 => format!("{g:.2}"),
        _ => "--".to_string(),
    }
}

/// Fraction as a percentage, trailing zeros trimmed (`0.05` → `5`).
pub fn format_fraction(fraction: f64) -> String {
    let pct = format!("{:.2}", fraction * 100.0);
    pct.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Higher accuracy wins; ties go to the smaller fraction, then the smaller window.
fn better(a: &EvalRecord, b: &EvalRecord) -> Ordering {
    a.accuracy
        .total_cmp(&b.accuracy)
        .then_with(|| b.fraction.total_cmp(&a.fraction))
        .then_with(|| b.window.cmp(&a.window))
}

/// The best record for every `(embedding, measure)`, ordered by embedding
/// name then measure.
pub fn best_per_measure(records: &[EvalRecord]) -> Vec<EvalRecord> {
    let mut best: BTreeMap<(&str, MeasureId), &EvalRecord> = BTreeMap::new();
    for r in records {
        best.entry((r.embedding.as_str(), r.measure))
            .and_modify(|cur| {
                if better(r, cur) == Ordering::Greater {
                    *cur = r;
                }
            })
            .or_insert(r);
    }
    best.into_values().cloned().collect()
}

/// Renders the best configuration per measure as a text table, one column
/// group (`P  w  Γ1  Γ2  Acc.`) per embedding configuration. `P` is in percent.
pub fn render_table(records: &[EvalRecord]) -> String {
    let best = best_per_measure(records);
    let mut embeddings: Vec<&str> = best.iter().map(|r| r.embedding.as_str()).collect();
    embeddings.dedup();
    let mut measures: Vec<MeasureId> = best.iter().map(|r| r.measure).collect();
    measures.sort();
    measures.dedup();
    let cell: BTreeMap<(&str, MeasureId), &EvalRecord> = best
        .iter()
        .map(|r| ((r.embedding.as_str(), r.measure), r))
        .collect();

    const GROUP: usize = 32;
    let mut out = String::new();
    let _ = write!(out, "{:<6}", "Meas.");
    for e in &embeddings {
        let _ = write!(out, "| {:<w$}", e, w = GROUP - 2);
    }
    out.push('\n');
    let _ = write!(out, "{:<6}", "");
    for _ in &embeddings {
        let _ = write!(out, "| {:>5} {:>2} {:>6} {:>6} {:>7}", "P", "w", "Γ1", "Γ2", "Acc.");
    }
    out.push('\n');
    let _ = writeln!(out, "{}", "-".repeat(6 + GROUP * embeddings.len()));
    for m in measures {
        let _ = write!(out, "{:<6}", m.as_str());
        for e in &embeddings {
            match cell.get(&(*e, m)) {
                Some(r) => {
                    let _ = write!(
                        out,
                        "| {:>5} {:>2} {:>6} {:>6} {:>7.4}",
                        format_fraction(r.fraction),
                        r.window,
                        format_gain(r.gamma1),
                        format_gain(r.gamma2),
                        r.accuracy
                    );
                }
                None => {
                    let _ = write!(out, "| {:<w$}", "", w = GROUP - 2);
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Writes one JSON object per record.
pub fn write_results<W: Write>(mut out: W, records: &[EvalRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(measure: MeasureId, window: usize, fraction: f64, accuracy: f64) -> EvalRecord {
        EvalRecord {
            measure,
            window,
            fraction,
            embedding: "w2v-300".into(),
            accuracy,
            gamma1: Some(0.0),
            gamma2: None,
            documents: 10,
        }
    }

    #[test]
    fn gains_render_like_tables() {
        assert_eq!(format_gain(Some(0.0412)), "0.04");
        assert_eq!(format_gain(Some(-0.1)), "-0.10");
        assert_eq!(format_gain(Some(0.0)), "--");
        assert_eq!(format_gain(None), "--");
    }

    #[test]
    fn fractions_render_as_percent() {
        assert_eq!(format_fraction(0.0), "0");
        assert_eq!(format_fraction(0.05), "5");
        assert_eq!(format_fraction(0.35), "35");
        assert_eq!(format_fraction(0.125), "12.5");
        assert_eq!(format_fraction(1.0), "100");
    }

    #[test]
    fn best_prefers_smaller_p_then_w() {
        let rs = vec![
            record(MeasureId::Degree, 2, 0.1, 0.5),
            record(MeasureId::Degree, 2, 0.0, 0.5),
            record(MeasureId::Degree, 1, 0.0, 0.5),
            record(MeasureId::Degree, 3, 0.2, 0.4),
        ];
        let best = best_per_measure(&rs);
        assert_eq!(best.len(), 1);
        assert_eq!((best[0].window, best[0].fraction), (1, 0.0));
        assert_eq!(best_per_measure(&rs[3..]), vec![rs[3].clone()]);
    }

    #[test]
    fn best_agrees_with_linear_scan() {
        let rs: Vec<_> = (0..40)
            .map(|i| record(MeasureId::ALL[i % 3], 1 + i % 3, (i % 5) as f64 / 10.0, ((i * 37) % 11) as f64 / 10.0))
            .collect();
        for best in best_per_measure(&rs) {
            let mut oracle: Option<&EvalRecord> = None;
            for r in rs.iter().filter(|r| r.measure == best.measure) {
                oracle = match oracle {
                    None => Some(r),
                    Some(o) if r.accuracy > o.accuracy => Some(r),
                    Some(o) if r.accuracy == o.accuracy && (r.fraction, r.window) < (o.fraction, o.window) => Some(r),
                    keep => keep,
                };
            }
            assert_eq!(&best, oracle.unwrap());
        }
    }

    #[test]
    fn table_has_a_row_per_measure() {
        let rs = vec![record(MeasureId::Degree, 1, 0.0, 0.5), record(MeasureId::PageRank, 3, 0.02, 0.52)];
        let table = render_table(&rs);
        assert_eq!(table.lines().count(), 5);
        assert!(table.contains("w2v-300"));
        assert!(table.lines().any(|l| l.starts_with("pi ") && l.contains("0.5200") && l.contains(" 2 ")));
    }

    #[test]
    fn results_are_json_lines() {
        let mut buf = Vec::new();
        write_results(&mut buf, &[record(MeasureId::Degree, 1, 0.0, 0.5)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"measure\":\"k\",\"window\":1,\"P\":0.0,\"embedding\":\"w2v-300\",\"accuracy\":0.5,\"gamma1\":0.0,\"gamma2\":null,\"documents\":10}\n"
        );
    }
}
