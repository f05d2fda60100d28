use std::io::{Read, Write};

use super::RankingResult;
use crate::model::io::{check_header, csv_error, csv_reader, line_of};
use crate::model::RatingScale;
use crate::metrics::rank_order;
use crate::{Error, Result};

/// Writes `kind,id,score` rows: items by descending quality, then users by
/// descending reputation, ties by identifier. `scaled` adds a column with
/// the item qualities min–max mapped onto that scale.
pub fn write_result_csv<W: Write>(sink: W, result: &RankingResult, scaled: Option<RatingScale>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    let rescaled = scaled.map(|s| result.rescaled_quality(s));
    match rescaled {
        Some(_) => w.write_record(["kind", "id", "score", "scaled"])?,
        None => w.write_record(["kind", "id", "score"])?,
    }
    for a in result.ranked_items() {
        let score = result.quality[a].to_string();
        match &rescaled {
            Some(r) => w.write_record(["item", &result.item_ids[a], &score, &r[a].to_string()])?,
            None => w.write_record(["item", &result.item_ids[a], &score])?,
        }
    }
    if let Some(rep) = &result.reputation {
        for i in rank_order(&result.user_ids, rep) {
            let score = rep[i].to_string();
            match rescaled {
                Some(_) => w.write_record(["user", &result.user_ids[i], &score, ""])?,
                None => w.write_record(["user", &result.user_ids[i], &score])?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Scores of one kind read back from a result file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreTable {
    pub items: Vec<(String, f64)>,
    pub users: Vec<(String, f64)>,
}

pub fn read_result_csv<R: Read>(source: R) -> Result<ScoreTable> {
    let mut reader = csv_reader(source);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.len() == 4 {
        check_header(&mut reader, &["kind", "id", "score", "scaled"])?;
    } else {
        check_header(&mut reader, &["kind", "id", "score"])?;
    }
    let mut table = ScoreTable::default();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        if record.len() < 3 {
            return Err(Error::Parse {
                line,
                message: "expected kind,id,score".into(),
            });
        }
        let score: f64 = record[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("score `{}` is not a number", &record[2]),
        })?;
        let entry = (record[1].to_string(), score);
        match &record[0] {
            "item" => table.items.push(entry),
            "user" => table.users.push(entry),
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("kind must be item or user, got `{other}`"),
                })
            }
        }
    }
    Ok(table)
}
