use std::fmt::Write as _;

use super::{
    anticipation_average, anticipation_report, decile_cap, per_frame_map, DetectionMetrics,
    OffsetMetrics, ScoreTable,
};
use crate::error::Result;

/// Everything `eval` prints for one score table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub detection: DetectionMetrics,
    pub deciles: Option<Vec<Option<f64>>>,
    pub anticipation: Option<Vec<OffsetMetrics>>,
}

fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.10}"),
        None => "nan".into(),
    }
}

impl MetricReport {
    pub fn compute(table: &ScoreTable, deciles: bool, anticipation: bool) -> Result<Self> {
        Ok(Self {
            detection: per_frame_map(table)?,
            deciles: if deciles { Some(decile_cap(table)?) } else { None },
            anticipation: if anticipation {
                Some(anticipation_report(table)?)
            } else {
                None
            },
        })
    }

    /// `name value` lines, one metric per line, for machine consumption.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for m in &self.detection.classes {
            out.push((format!("ap.{}", m.class), fmt_value(m.ap)));
            out.push((format!("cap.{}", m.class), fmt_value(m.cap)));
        }
        out.push(("map.all".into(), fmt_value(Some(self.detection.map))));
        out.push(("mcap.all".into(), fmt_value(Some(self.detection.mcap))));
        if let Some(d) = &self.deciles {
            for (j, v) in d.iter().enumerate() {
                out.push((format!("decile_cap.{}", j + 1), fmt_value(*v)));
            }
        }
        if let Some(a) = &self.anticipation {
            for o in a {
                let m = o.metrics.as_ref();
                out.push((format!("anticipation_map.{}", o.offset), fmt_value(m.map(|m| m.map))));
                out.push((format!("anticipation_mcap.{}", o.offset), fmt_value(m.map(|m| m.mcap))));
            }
            let avg = anticipation_average(a);
            out.push(("anticipation_map.avg".into(), fmt_value(avg.map(|v| v.0))));
            out.push(("anticipation_mcap.avg".into(), fmt_value(avg.map(|v| v.1))));
        }
        out
    }

    pub fn key_value_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.key_values() {
            let _ = writeln!(s, "{k} {v}");
        }
        s
    }

    /// Aligned human-readable table.
    pub fn table_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<8} {:>10} {:>10}", "class", "AP", "cAP");
        for m in &self.detection.classes {
            let _ = writeln!(
                s,
                "{:<8} {:>10} {:>10}",
                m.class,
                pct(m.ap),
                pct(m.cap)
            );
        }
        let _ = writeln!(
            s,
            "{:<8} {:>10} {:>10}",
            "mean",
            pct(Some(self.detection.map)),
            pct(Some(self.detection.mcap))
        );
        if let Some(d) = &self.deciles {
            let _ = writeln!(s);
            let _ = writeln!(s, "{:<8} {:>10}", "decile", "mcAP");
            for (j, v) in d.iter().enumerate() {
                let _ = writeln!(s, "{:<8} {:>10}", format!("{}0%", j + 1), pct(*v));
            }
        }
        if let Some(a) = &self.anticipation {
            let _ = writeln!(s);
            let _ = writeln!(s, "{:<8} {:>10} {:>10}", "offset", "mAP", "mcAP");
            for o in a {
                let m = o.metrics.as_ref();
                let _ = writeln!(
                    s,
                    "{:<8} {:>10} {:>10}",
                    format!("+{}", o.offset),
                    pct(m.map(|m| m.map)),
                    pct(m.map(|m| m.mcap))
                );
            }
            let avg = anticipation_average(a);
            let _ = writeln!(
                s,
                "{:<8} {:>10} {:>10}",
                "avg",
                pct(avg.map(|v| v.0)),
                pct(avg.map(|v| v.1))
            );
        }
        s
    }
}

fn pct(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{:.2}", 100.0 * x),
        None => "n/a".into(),
    }
}
