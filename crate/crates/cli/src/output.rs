use std::io::{BufRead, Write};

use cgm_select::BoundReport;
use serde::Serialize;

use crate::error::CliError;
use crate::runner::ResultRecord;
use crate::spec::Format;

/// Prefix of the metadata line carrying a bound report in CSV output.
pub const BOUND_REPORT_PREFIX: &str = "# bound_report ";

pub fn write_records<W: Write>(
    out: &mut W,
    records: &[ResultRecord],
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundReportLine<'a> {
    bound_report: &'a BoundReport,
}

pub fn write_bound_report<W: Write>(
    out: &mut W,
    report: &BoundReport,
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            out.write_all(BOUND_REPORT_PREFIX.as_bytes())?;
            serde_json::to_writer(&mut *out, report)?;
        }
        Format::Json => serde_json::to_writer(
            &mut *out,
            &BoundReportLine {
                bound_report: report,
            },
        )?,
    }
    out.write_all(b"\n")?;
    Ok(())
}

/// Parses CSV output back into records, skipping `#` metadata lines.
pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<ResultRecord>, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Parses newline-delimited JSON records, skipping non-record lines.
pub fn read_json<R: BufRead>(input: R) -> Result<Vec<ResultRecord>, CliError> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with("{\"bound_report\"") {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}
