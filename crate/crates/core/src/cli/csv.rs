//! CSV output of experiment rows.

use std::io::Write;

use crate::harness::MetricsRecord;

pub const HEADER: [&str; 11] = [
    "snr_db",
    "ter",
    "mu",
    "n_est",
    "clip_mode",
    "block_index",
    "l_cl",
    "ber_measured",
    "ber_estimated",
    "avg_visited_nodes",
    "frames",
];

/// Locale-free float rendering with ten significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.9e}")
    }
}

pub fn row_fields(r: &MetricsRecord) -> [String; 11] {
    [
        format_float(r.snr_db),
        format_float(r.ter),
        format_float(r.mu),
        r.n_est.to_string(),
        r.clip_mode.to_string(),
        r.block_index.to_string(),
        format_float(r.l_cl),
        format_float(r.ber_measured),
        format_float(r.ber_estimated),
        format_float(r.avg_visited_nodes),
        r.frames.to_string(),
    ]
}

/// Writes the header and one line per record in the given order.
pub fn write_csv<W: Write>(mut w: W, records: &[MetricsRecord]) -> std::io::Result<()> {
    writeln!(w, "{}", HEADER.join(","))?;
    for r in records {
        writeln!(w, "{}", row_fields(r).join(","))?;
    }
    w.flush()
}
