use std::io::{Read, Write};

use chrono::{DateTime, Datelike};
use serde::Serialize;

use super::{RatingEvent, RatingScale};
use crate::{Error, Result};

/// Unit of the `year` column in a rating file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum TimeUnit {
    #[default]
    Year,
    /// Unix timestamps, reduced to their UTC calendar year.
    EpochSeconds,
}

impl std::str::FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "year" => Ok(TimeUnit::Year),
            "epoch-seconds" | "epoch" => Ok(TimeUnit::EpochSeconds),
            other => Err(Error::InvalidParameter(format!(
                "unknown time unit `{other}` (expected `year` or `epoch-seconds`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IngestOptions {
    pub scale: RatingScale,
    pub time_unit: TimeUnit,
}

pub fn epoch_seconds_to_year(secs: i64) -> Option<i32> {
    DateTime::from_timestamp(secs, 0).map(|t| t.year())
}

const RATING_HEADER: [&str; 4] = ["user", "item", "rating", "year"];
const CITATION_HEADER: [&str; 3] = ["citing", "cited", "year"];

/// Reads a `user,item,rating,year` file with integer years.
pub fn parse_ratings<R: Read>(source: R, scale: RatingScale) -> Result<Vec<RatingEvent>> {
    parse_ratings_with(
        source,
        IngestOptions {
            scale,
            time_unit: TimeUnit::Year,
        },
    )
}

pub fn parse_ratings_with<R: Read>(source: R, options: IngestOptions) -> Result<Vec<RatingEvent>> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &RATING_HEADER)?;
    let scale = options.scale;
    let mut events = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let rating: f64 = record[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("rating `{}` is not a number", &record[2]),
        })?;
        if !scale.contains(rating) {
            return Err(Error::RatingOutOfRange {
                line,
                rating,
                min: scale.min,
                max: scale.max,
            });
        }
        let year = parse_time(&record[3], options.time_unit, line)?;
        events.push(RatingEvent {
            user: non_empty(&record[0], "user", line)?,
            item: non_empty(&record[1], "item", line)?,
            rating,
            year,
        });
    }
    Ok(events)
}

/// Writes events in the rating CSV format.
pub fn write_ratings<W: Write>(sink: W, events: &[RatingEvent]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    writer.write_record(RATING_HEADER)?;
    for ev in events {
        writer.write_record([
            ev.user.as_str(),
            ev.item.as_str(),
            &ev.rating.to_string(),
            &ev.year.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// One citation: `citing` references `cited` in `year`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationEdge {
    pub citing: String,
    pub cited: String,
    pub year: i32,
}

/// Whether a paper citing itself is an error or an ordinary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfLoopPolicy {
    #[default]
    Reject,
    Keep,
}

/// Reads a `citing,cited,year` file.
pub fn parse_citations<R: Read>(source: R) -> Result<Vec<CitationEdge>> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &CITATION_HEADER)?;
    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        if record.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        edges.push(CitationEdge {
            citing: non_empty(&record[0], "citing", line)?,
            cited: non_empty(&record[1], "cited", line)?,
            year: parse_time(&record[2], TimeUnit::Year, line)?,
        });
    }
    Ok(edges)
}

/// Maps a monopartite citation list onto citing-paper → cited-paper ratings.
///
/// Every paper may appear on both sides: as a user when it cites, as an item
/// when it is cited.
pub fn citation_to_bipartite(
    edges: &[CitationEdge],
    default_rating: f64,
    self_loops: SelfLoopPolicy,
) -> Result<Vec<RatingEvent>> {
    let mut events = Vec::with_capacity(edges.len());
    for edge in edges {
        if edge.citing == edge.cited && self_loops == SelfLoopPolicy::Reject {
            return Err(Error::SelfCitation {
                paper: edge.citing.clone(),
                year: edge.year,
            });
        }
        events.push(RatingEvent::new(
            edge.citing.clone(),
            edge.cited.clone(),
            default_rating,
            edge.year,
        ));
    }
    Ok(events)
}

pub(crate) fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source)
}

pub(crate) fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(csv_error)?;
    let found: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if found != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", expected.join(","), found.join(",")),
        });
    }
    Ok(())
}

pub(crate) fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub(crate) fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.kind() {
        csv::ErrorKind::Utf8 { .. } => Error::Parse {
            line,
            message: "invalid UTF-8".into(),
        },
        _ => Error::Csv(err),
    }
}

fn non_empty(field: &str, name: &str, line: u64) -> Result<String> {
    if field.is_empty() {
        return Err(Error::Parse {
            line,
            message: format!("empty {name} identifier"),
        });
    }
    Ok(field.to_string())
}

fn parse_time(field: &str, unit: TimeUnit, line: u64) -> Result<i32> {
    let bad = || Error::Parse {
        line,
        message: format!("time `{field}` is not an integer"),
    };
    match unit {
        TimeUnit::Year => field.parse::<i32>().map_err(|_| bad()),
        TimeUnit::EpochSeconds => {
            let secs: i64 = field.parse().map_err(|_| bad())?;
            epoch_seconds_to_year(secs).ok_or_else(|| Error::Parse {
                line,
                message: format!("timestamp {secs} out of range"),
            })
        }
    }
}
