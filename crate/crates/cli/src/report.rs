use std::fmt::Write;

use hidden_core::protocols::transcript::{RoundSummary, TranscriptLine};
use hidden_core::protocols::{aggp, eg};
use hidden_core::{Error, Result};

struct Row {
    party: &'static str,
    metric: &'static str,
    measured: u64,
    expected: Option<u64>,
}

fn row(party: &'static str, metric: &'static str, measured: u64, expected: Option<u64>) -> Row {
    Row {
        party,
        metric,
        measured,
        expected,
    }
}

/// Measured counts next to the cost model. Rejected rounds stop early, so
/// only accepted rounds are compared.
fn rows(summary: &RoundSummary) -> Vec<Row> {
    let c = &summary.counters;
    let accepted = summary.verdict.is_accepted();
    let exp = |v: u64| accepted.then_some(v);
    let (sensor, dc) = (c.sensor_max(), c.dc());
    match summary.protocol.as_str() {
        eg::NAME => vec![
            row("sensor", "complex_modexp", sensor.complex_modexp, exp(2)),
            row("sensor", "int_modexp", sensor.int_modexp, exp(0)),
            row("sensor", "equivalent_int_modexp", sensor.equivalent_int_modexp(), exp(8)),
            row("dc", "complex_modexp", dc.complex_modexp, exp(3)),
            row("dc", "int_modexp", dc.int_modexp, exp(1)),
            row("dc", "equivalent_int_modexp", dc.equivalent_int_modexp(), exp(13)),
            row("all", "messages_total", c.messages_total, exp(2)),
        ],
        aggp::NAME => vec![
            row("sensor", "modexp_n2", sensor.modexp_n2, exp(4)),
            row("dc", "modexp_n2", dc.modexp_n2, exp(2)),
            row("padding", "modexp_n2", c.modexp_n2_padding, None),
            row("all", "messages_total", c.messages_total, exp(2 * c.sensors as u64)),
        ],
        _ => vec![
            row("sensor", "equivalent_int_modexp", sensor.equivalent_int_modexp(), None),
            row("sensor", "modexp_n2", sensor.modexp_n2, None),
            row("dc", "equivalent_int_modexp", dc.equivalent_int_modexp(), None),
            row("dc", "modexp_n2", dc.modexp_n2, None),
            row("all", "messages_total", c.messages_total, None),
        ],
    }
}

pub fn counters_table(lines: &[TranscriptLine]) -> Result<String> {
    let summaries: Vec<&RoundSummary> = lines
        .iter()
        .filter_map(|l| match l {
            TranscriptLine::Summary(s) => Some(s),
            TranscriptLine::Message(_) => None,
        })
        .collect();
    if summaries.is_empty() {
        return Err(Error::Config("transcript has no round summaries".into()));
    }
    let mut out = String::new();
    writeln!(
        out,
        "{:>5}  {:<8} {:<8} {:<22} {:>9} {:>9}  status",
        "round", "protocol", "party", "metric", "measured", "expected"
    )
    .unwrap();
    for s in summaries {
        for r in rows(s) {
            let (expected, status) = match r.expected {
                Some(e) if e == r.measured => (e.to_string(), "ok"),
                Some(e) => (e.to_string(), "MISMATCH"),
                None if s.verdict.is_accepted() => ("-".into(), ""),
                None => ("-".into(), "rejected"),
            };
            writeln!(
                out,
                "{:>5}  {:<8} {:<8} {:<22} {:>9} {:>9}  {status}",
                s.round, s.protocol, r.party, r.metric, r.measured, expected
            )
            .unwrap();
        }
    }
    Ok(out)
}
