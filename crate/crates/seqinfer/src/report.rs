//! Report data structures, rendering, and dataset loading.
//!
//! The Monte Carlo harness produces two report shapes: a [`CoverageReport`]
//! (one row per true-mean/method pair, with one-sided coverage errors) and
//! a [`QuantileTable`] (one row per true-mean/statistic pair, with
//! empirical quantiles at fixed levels). Both render to CSV and JSON with
//! every number shown to six significant digits; the JSON field names
//! mirror the CSV column names exactly.
//!
//! [`load_dataset`] reads scalar observations back in: one value per line,
//! or a single-column CSV with header `x`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::intervals::MethodTag;

/// Output format for [`write_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Render `x` with exactly six significant digits.
///
/// Finite values in a moderate range print as plain decimals
/// (`11.4700`, `0.0477000`); extreme magnitudes fall back to exponent
/// notation (`1.23456e12`), which is still a valid JSON number. Non-finite
/// values print as `inf`, `-inf`, or `nan` (quoted when embedded in JSON).
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0.00000".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 6);
    let body = if (0..=8).contains(&exp) {
        let point = (exp + 1) as usize;
        if point >= 6 {
            format!("{}{}", digits, "0".repeat(point - 6))
        } else {
            format!("{}.{}", &digits[..point], &digits[point..])
        }
    } else if (-4..0).contains(&exp) {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        format!("{}.{}e{}", &digits[..1], &digits[1..], exp)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// `fmt_sig` output as a JSON value: bare number when finite, quoted
/// string otherwise.
fn json_number(x: f64) -> String {
    if x.is_finite() {
        fmt_sig(x)
    } else {
        format!("\"{}\"", fmt_sig(x))
    }
}

// ---------------------------------------------------------------------------
// Coverage reports
// ---------------------------------------------------------------------------

/// One (true mean, method) cell of a coverage study.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub mu: f64,
    pub method: MethodTag,
    /// Percent of replicates whose lower limit excluded `mu` from below.
    pub l_pct: f64,
    /// Percent of replicates whose upper limit excluded `mu` from above.
    pub u_pct: f64,
    /// Monte Carlo standard errors of the two percentages, in percent.
    pub l_se: f64,
    pub u_se: f64,
    pub mean_length: f64,
    pub mean_t: f64,
}

/// Count of replicates where a method failed to produce an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureRecord {
    pub mu: f64,
    pub method: MethodTag,
    pub count: usize,
}

/// A full coverage study: errors per method per true mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    /// Nominal one-sided error the intervals targeted.
    pub alpha: f64,
    /// Replicates per cell.
    pub n_sims: usize,
    pub rows: Vec<CoverageRow>,
    /// Per-cell failure counts; empty when every replicate produced an
    /// interval. Failed replicates are excluded from that cell's averages.
    pub failures: Vec<FailureRecord>,
}

const COVERAGE_HEADER: &str = "mu,method,L_pct,U_pct,L_se,U_se,mean_length,mean_T";

impl CoverageReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(COVERAGE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_sig(r.mu),
                r.method.as_str(),
                fmt_sig(r.l_pct),
                fmt_sig(r.u_pct),
                fmt_sig(r.l_se),
                fmt_sig(r.u_se),
                fmt_sig(r.mean_length),
                fmt_sig(r.mean_t),
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"alpha\": {},", json_number(self.alpha));
        let _ = writeln!(out, "  \"n_sims\": {},", self.n_sims);
        out.push_str("  \"rows\": [\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(
                out,
                "    {{\"mu\": {}, \"method\": \"{}\", \"L_pct\": {}, \"U_pct\": {}, \
                 \"L_se\": {}, \"U_se\": {}, \"mean_length\": {}, \"mean_T\": {}}}",
                json_number(r.mu),
                r.method.as_str(),
                json_number(r.l_pct),
                json_number(r.u_pct),
                json_number(r.l_se),
                json_number(r.u_se),
                json_number(r.mean_length),
                json_number(r.mean_t),
            );
            out.push_str(if i + 1 < self.rows.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ],\n  \"failures\": [\n");
        for (i, f) in self.failures.iter().enumerate() {
            let _ = write!(
                out,
                "    {{\"mu\": {}, \"method\": \"{}\", \"count\": {}}}",
                json_number(f.mu),
                f.method.as_str(),
                f.count
            );
            out.push_str(if i + 1 < self.failures.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]\n}\n");
        out
    }
}

// ---------------------------------------------------------------------------
// Quantile tables
// ---------------------------------------------------------------------------

/// Which root statistic a quantile-table row tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileStatistic {
    Naive,
    BiasCorrected,
    Renormalized,
    /// The bias-corrected root with the plug-in standard deviation in
    /// place of the known one.
    BiasCorrectedStudentized,
}

impl QuantileStatistic {
    pub fn as_str(&self) -> &'static str {
        match self {
            QuantileStatistic::Naive => "naive",
            QuantileStatistic::BiasCorrected => "bias_corrected",
            QuantileStatistic::Renormalized => "renormalized",
            QuantileStatistic::BiasCorrectedStudentized => "bias_corrected_studentized",
        }
    }
}

/// The nine tabulated quantile levels, in percent.
pub const QUANTILE_LEVELS_PCT: [f64; 9] = [2.5, 5.0, 10.0, 20.0, 50.0, 80.0, 90.0, 95.0, 97.5];

/// One (true mean, statistic) row: empirical quantiles at
/// [`QUANTILE_LEVELS_PCT`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRow {
    pub mu: f64,
    pub statistic: QuantileStatistic,
    pub quantiles: [f64; 9],
}

/// Empirical quantiles of the roots over repeated simulated trials.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub n_sims: usize,
    pub rows: Vec<QuantileRow>,
}

fn level_label(pct: f64) -> String {
    if pct.fract() == 0.0 {
        format!("{pct:.0}")
    } else {
        format!("{pct}")
    }
}

impl QuantileTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,statistic");
        for l in QUANTILE_LEVELS_PCT {
            let _ = write!(out, ",q{}", level_label(l));
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{}", fmt_sig(r.mu), r.statistic.as_str());
            for q in r.quantiles {
                let _ = write!(out, ",{}", fmt_sig(q));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"n_sims\": {},", self.n_sims);
        out.push_str("  \"levels_pct\": [");
        for (i, l) in QUANTILE_LEVELS_PCT.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&level_label(*l));
        }
        out.push_str("],\n  \"rows\": [\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(
                out,
                "    {{\"mu\": {}, \"statistic\": \"{}\", \"quantiles\": [",
                json_number(r.mu),
                r.statistic.as_str()
            );
            for (j, q) in r.quantiles.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&json_number(*q));
            }
            out.push_str("]}");
            out.push_str(if i + 1 < self.rows.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]\n}\n");
        out
    }
}

// ---------------------------------------------------------------------------
// Writing and loading
// ---------------------------------------------------------------------------

/// Anything renderable as a report in both formats.
pub trait Report {
    fn to_csv(&self) -> String;
    fn to_json(&self) -> String;
}

impl Report for CoverageReport {
    fn to_csv(&self) -> String {
        CoverageReport::to_csv(self)
    }
    fn to_json(&self) -> String {
        CoverageReport::to_json(self)
    }
}

impl Report for QuantileTable {
    fn to_csv(&self) -> String {
        QuantileTable::to_csv(self)
    }
    fn to_json(&self) -> String {
        QuantileTable::to_json(self)
    }
}

/// Render `report` in `format` and write it to `path`.
pub fn write_report<R: Report>(report: &R, path: &Path, format: ReportFormat) -> Result<()> {
    let body = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json(),
    };
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Load scalar observations: one numeric value per line, or a
/// single-column CSV whose header line is exactly `x`. Blank lines are
/// skipped; parse failures name the 1-based line.
pub fn load_dataset(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let token = raw.trim();
        if token.is_empty() {
            continue;
        }
        if idx == 0 && token == "x" {
            continue;
        }
        match token.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) => {
                return Err(Error::DatasetParse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    token: token.to_string(),
                })
            }
        }
    }
    Ok(values)
}

// ---------------------------------------------------------------------------
