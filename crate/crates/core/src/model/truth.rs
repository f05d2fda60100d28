use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};

use serde::Serialize;

use super::io::{check_header, csv_error, csv_reader, line_of};
use super::TemporalBipartiteGraph;
use crate::{Error, Result};

/// What a ranking is judged against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GroundTruth {
    /// Target items such as award winners, each with an optional award year.
    TargetSet(BTreeMap<String, Option<i32>>),
    /// Known quality of every item of a synthetic network.
    TrueQualities(BTreeMap<String, f64>),
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        match self {
            GroundTruth::TargetSet(m) => m.len(),
            GroundTruth::TrueQualities(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_award_years(&self) -> bool {
        match self {
            GroundTruth::TargetSet(m) => m.values().any(Option::is_some),
            GroundTruth::TrueQualities(_) => false,
        }
    }

    /// The positive item set. For true qualities this is the top
    /// `⌈top_fraction · n⌉` items by quality, ties broken by identifier.
    pub fn targets(&self, top_fraction: f64) -> BTreeSet<String> {
        match self {
            GroundTruth::TargetSet(m) => m.keys().cloned().collect(),
            GroundTruth::TrueQualities(m) => {
                let mut items: Vec<(&String, f64)> = m.iter().map(|(k, &v)| (k, v)).collect();
                items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
                let take = ((top_fraction * items.len() as f64).ceil() as usize).min(items.len());
                items.into_iter().take(take).map(|(k, _)| k.clone()).collect()
            }
        }
    }

    /// Targets already awarded by `year`; items without an award year always count.
    pub fn targets_as_of(&self, year: i32, top_fraction: f64) -> BTreeSet<String> {
        match self {
            GroundTruth::TargetSet(m) => m
                .iter()
                .filter(|(_, y)| y.map_or(true, |y| y <= year))
                .map(|(k, _)| k.clone())
                .collect(),
            GroundTruth::TrueQualities(_) => self.targets(top_fraction),
        }
    }

    /// Drops items the graph does not contain; returns the number dropped.
    pub fn restrict_to(&self, graph: &TemporalBipartiteGraph) -> (GroundTruth, usize) {
        match self {
            GroundTruth::TargetSet(m) => {
                let kept: BTreeMap<_, _> = m
                    .iter()
                    .filter(|(k, _)| graph.item_index(k).is_some())
                    .map(|(k, v)| (k.clone(), *v))
                    .collect();
                let dropped = m.len() - kept.len();
                (GroundTruth::TargetSet(kept), dropped)
            }
            GroundTruth::TrueQualities(m) => {
                let kept: BTreeMap<_, _> = m
                    .iter()
                    .filter(|(k, _)| graph.item_index(k).is_some())
                    .map(|(k, v)| (k.clone(), *v))
                    .collect();
                let dropped = m.len() - kept.len();
                (GroundTruth::TrueQualities(kept), dropped)
            }
        }
    }
}

/// Reads newline-delimited item identifiers with an optional tab-separated
/// award year. Blank lines and `#` comments are ignored.
pub fn parse_target_set<R: Read>(source: R) -> Result<GroundTruth> {
    let mut items = BTreeMap::new();
    for (n, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let line_no = n as u64 + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let item = fields.next().unwrap_or_default().trim();
        if item.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty item identifier".into(),
            });
        }
        let year = match fields.next().map(str::trim) {
            None | Some("") => None,
            Some(y) => Some(y.parse::<i32>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("award year `{y}` is not an integer"),
            })?),
        };
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: "expected at most two tab-separated fields".into(),
            });
        }
        items.insert(item.to_string(), year);
    }
    Ok(GroundTruth::TargetSet(items))
}

/// Reads an `item,quality` file.
pub fn parse_qualities<R: Read>(source: R) -> Result<GroundTruth> {
    let mut reader = csv_reader(source);
    check_header(&mut reader, &["item", "quality"])?;
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let q: f64 = record[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("quality `{}` is not a number", &record[1]),
        })?;
        out.insert(record[0].to_string(), q);
    }
    Ok(GroundTruth::TrueQualities(out))
}

/// Reads either truth format; an `item,quality` header selects qualities.
pub fn read_ground_truth<R: Read>(mut source: R) -> Result<GroundTruth> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let first = text.lines().next().unwrap_or_default().trim();
    if first.trim_start_matches('\u{feff}') == "item,quality" {
        parse_qualities(text.as_bytes())
    } else {
        parse_target_set(text.as_bytes())
    }
}

pub fn write_qualities<W: Write>(sink: W, qualities: &[(String, f64)]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    writer.write_record(["item", "quality"])?;
    for (item, q) in qualities {
        writer.write_record([item.as_str(), &q.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}
