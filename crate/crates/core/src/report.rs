//! CSV artifacts.
//!
//! Every float is written with 10 significant digits, so output bytes do not
//! depend on summation noise below that precision. Undefined values are
//! written as `NA` with `defined = false`.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjust::{AdjustedValue, ReferenceSummary};
use crate::compare::{ComparisonReport, SampleGroup};
use crate::error::{Error, Result};
use crate::stats::StatisticKind;

/// `x` rounded to 10 significant digits in shortest decimal form.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    let rounded: f64 = format!("{x:.9e}").parse().unwrap();
    // avoid "-0"
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), fmt_float)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidParameter(format!("csv: {other:?}")),
    }
}

/// One row of `raw_stats.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawStatRow {
    pub dataset: String,
    pub graph_id: String,
    pub n: usize,
    pub statistic: StatisticKind,
    pub value: f64,
    pub defined: bool,
}

pub fn write_raw_stats<W: Write>(w: W, rows: &[RawStatRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["dataset", "graph_id", "n", "statistic", "value", "defined"])
        .map_err(csv_err)?;
    for r in rows {
        let value = if r.defined {
            fmt_float(r.value)
        } else {
            "NA".into()
        };
        out.write_record([
            r.dataset.as_str(),
            &r.graph_id,
            &r.n.to_string(),
            r.statistic.name(),
            &value,
            if r.defined { "true" } else { "false" },
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn field<'a>(
    rec: &'a csv::StringRecord,
    headers: &csv::StringRecord,
    name: &str,
    line: usize,
) -> Result<&'a str> {
    headers
        .iter()
        .position(|h| h == name)
        .and_then(|i| rec.get(i))
        .ok_or_else(|| Error::InvalidParameter(format!("line {line}: missing column `{name}`")))
}

/// Reads `raw_stats.csv`, or `adjusted.csv` with its `z` column taken as the
/// value. The `dataset` column is optional.
pub fn read_raw_stats<R: Read>(r: R) -> Result<Vec<RawStatRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let value_col = if headers.iter().any(|h| h == "z") && !headers.iter().any(|h| h == "value") {
        "z"
    } else {
        "value"
    };
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let bad = |what: &str, v: &str| {
            Error::InvalidParameter(format!("line {line}: invalid {what} `{v}`"))
        };
        let dataset = if headers.iter().any(|h| h == "dataset") {
            field(&rec, &headers, "dataset", line)?.to_string()
        } else {
            String::new()
        };
        let n_s = field(&rec, &headers, "n", line)?;
        let stat_s = field(&rec, &headers, "statistic", line)?;
        let value_s = field(&rec, &headers, value_col, line)?;
        let defined_s = field(&rec, &headers, "defined", line)?;
        let defined = bool::from_str(defined_s).map_err(|_| bad("defined flag", defined_s))?;
        let value = if defined {
            value_s.parse::<f64>().map_err(|_| bad("value", value_s))?
        } else {
            f64::NAN
        };
        rows.push(RawStatRow {
            dataset,
            graph_id: field(&rec, &headers, "graph_id", line)?.to_string(),
            n: n_s.parse().map_err(|_| bad("n", n_s))?,
            statistic: stat_s.parse().map_err(|_| bad("statistic", stat_s))?,
            value,
            defined,
        });
    }
    Ok(rows)
}

/// Groups one statistic's rows by `n`, ascending.
pub fn groups_by_size(rows: &[RawStatRow], statistic: StatisticKind) -> Vec<SampleGroup> {
    let mut by_n: std::collections::BTreeMap<usize, Vec<Option<f64>>> = Default::default();
    for r in rows.iter().filter(|r| r.statistic == statistic) {
        by_n.entry(r.n)
            .or_default()
            .push(r.defined.then_some(r.value));
    }
    by_n.into_iter()
        .map(|(n, v)| SampleGroup::from_optional(n, v))
        .collect()
}

/// Long-format comparison rows: one per ordered size pair, then one summary
/// row per statistic with empty size columns.
pub fn write_comparison_reports<W: Write>(w: W, reports: &[ComparisonReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "statistic",
        "n_i",
        "n_j",
        "ks",
        "ad_stat",
        "ad_raw",
        "pearson_r",
    ])
    .map_err(csv_err)?;
    for rep in reports {
        let name = rep.statistic.name();
        for (a, &ni) in rep.labels.iter().enumerate() {
            for (b, &nj) in rep.labels.iter().enumerate() {
                out.write_record([
                    name,
                    &ni.to_string(),
                    &nj.to_string(),
                    &fmt_float(rep.ks(a, b)),
                    "",
                    "",
                    "",
                ])
                .map_err(csv_err)?;
            }
        }
        out.write_record([
            name,
            "",
            "",
            "",
            &fmt_float(rep.ad.standardized),
            &fmt_float(rep.ad.raw),
            &fmt_opt(rep.pearson_r),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Pairwise KS matrix of one report as a square CSV with size headers.
pub fn write_ks_matrix<W: Write>(w: W, report: &ComparisonReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["n".to_string()];
    header.extend(report.labels.iter().map(usize::to_string));
    out.write_record(&header).map_err(csv_err)?;
    for (a, &ni) in report.labels.iter().enumerate() {
        let mut row = vec![ni.to_string()];
        row.extend((0..report.labels.len()).map(|b| fmt_float(report.ks(a, b))));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_reference<W: Write>(w: W, summaries: &[ReferenceSummary]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "size",
        "statistic",
        "mean",
        "sd",
        "simulated_count",
        "dropped_undefined",
    ])
    .map_err(csv_err)?;
    for s in summaries {
        out.write_record([
            s.size.to_string().as_str(),
            s.statistic.name(),
            &fmt_float(s.mean),
            &fmt_float(s.sd),
            &s.simulated_count.to_string(),
            &s.dropped_undefined.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_adjusted<W: Write>(w: W, dataset: &str, values: &[AdjustedValue]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["dataset", "graph_id", "n", "statistic", "z", "defined"])
        .map_err(csv_err)?;
    for v in values {
        out.write_record([
            dataset,
            &v.graph_id,
            &v.n.to_string(),
            v.statistic.name(),
            &(if v.defined {
                fmt_float(v.z)
            } else {
                "NA".into()
            }),
            if v.defined { "true" } else { "false" },
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a header and rows of already formatted cells.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for r in rows {
        out.write_record(r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(fmt_float(0.2), "0.2");
        assert_eq!(fmt_float(694.161_234_567_89), "694.1612346");
        assert_eq!(fmt_float(1.0 / 3.0), "0.3333333333");
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(f64::NAN), "NA");
        assert_eq!(fmt_float(2.0e-12), "0.000000000002");
        // summation noise below the tenth digit disappears
        assert_eq!(fmt_float(0.1 + 0.2), fmt_float(0.3));
    }

    #[test]
    fn raw_stats_round_trip() {
        let rows = vec![
            RawStatRow {
                dataset: "er".into(),
                graph_id: "g0".into(),
                n: 20,
                statistic: StatisticKind::Density,
                value: 0.25,
                defined: true,
            },
            RawStatRow {
                dataset: "er".into(),
                graph_id: "g0".into(),
                n: 20,
                statistic: StatisticKind::Transitivity,
                value: f64::NAN,
                defined: false,
            },
        ];
        let mut buf = Vec::new();
        write_raw_stats(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "dataset,graph_id,n,statistic,value,defined\ner,g0,20,density,0.25,true\ner,g0,20,transitivity,NA,false\n"
        );
        let back = read_raw_stats(buf.as_slice()).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(!back[1].defined);
        let g = groups_by_size(&back, StatisticKind::Transitivity);
        assert_eq!((g[0].values.len(), g[0].dropped), (0, 1));
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(read_raw_stats(
            "graph_id,n,statistic,value,defined\ng,x,density,1,true\n".as_bytes()
        )
        .is_err());
        assert!(read_raw_stats("graph_id,n,value,defined\ng,3,1,true\n".as_bytes()).is_err());
    }
}
