use std::collections::HashSet;
use std::path::Path;

use super::{BiasType, CounterfactualPair, Direction};
use crate::error::{Error, Result};

const REQUIRED: [&str; 4] = ["sent_more", "sent_less", "stereo_antistereo", "bias_type"];

/// Parses CrowS-Pairs style CSV content.
///
/// The id comes from an `id` column when present, otherwise from an unnamed
/// leading index column (as in the public release), otherwise from the data
/// row index. Extra columns are ignored.
pub fn parse_pairs(bytes: &[u8]) -> Result<Vec<CounterfactualPair>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let mut idx = [0usize; 4];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = col(name).ok_or_else(|| Error::MissingColumn {
            column: name.to_string(),
        })?;
    }
    let id_col = col("id").or_else(|| match headers.get(0) {
        Some(h) if h.trim().is_empty() => Some(0),
        _ => None,
    });

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Row {
            row,
            message: e.to_string(),
        })?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let row_err = |message: String| Error::Row { row, message };

        let sent_more = field(idx[0]);
        let sent_less = field(idx[1]);
        if sent_more.is_empty() {
            return Err(row_err("empty sent_more".into()));
        }
        if sent_less.is_empty() {
            return Err(row_err("empty sent_less".into()));
        }
        if sent_more == sent_less {
            return Err(row_err("sent_more equals sent_less".into()));
        }
        let direction = match field(idx[2]).to_ascii_lowercase().as_str() {
            "stereo" => Direction::Stereo,
            "antistereo" => Direction::Antistereo,
            other => return Err(row_err(format!("unknown stereo_antistereo value `{other}`"))),
        };
        let id = match id_col.map(field) {
            Some(s) if !s.is_empty() => s.to_string(),
            _ => row.to_string(),
        };
        if !seen.insert(id.clone()) {
            return Err(row_err(format!("duplicate id `{id}`")));
        }
        out.push(CounterfactualPair {
            id,
            sent_more: sent_more.to_string(),
            sent_less: sent_less.to_string(),
            bias_type: BiasType::from_label(field(idx[3])),
            direction,
        });
    }
    Ok(out)
}

pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<CounterfactualPair>> {
    let path = path.as_ref();
    let content = std::fs::read(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pairs(&content)
}

pub fn write_pairs(path: impl AsRef<Path>, pairs: &[CounterfactualPair]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "sent_more", "sent_less", "stereo_antistereo", "bias_type"])?;
    for p in pairs {
        let dir = match p.direction {
            Direction::Stereo => "stereo",
            Direction::Antistereo => "antistereo",
        };
        w.write_record([
            p.id.as_str(),
            &p.sent_more,
            &p.sent_less,
            dir,
            p.bias_type.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_maps_fields() {
        let csv = "sent_more,sent_less,stereo_antistereo,bias_type\n\
                   He is a doctor.,She is a doctor.,stereo,gender\n";
        let pairs = parse_pairs(csv.as_bytes()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].bias_type, BiasType::Gender);
        assert_eq!(pairs[0].direction, Direction::Stereo);
        assert_eq!(pairs[0].sent_more, "He is a doctor.");
        assert_eq!(pairs[0].id, "0");
    }

    #[test]
    fn header_only_is_empty() {
        let csv = "sent_more,sent_less,stereo_antistereo,bias_type\n";
        assert!(parse_pairs(csv.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn blank_sent_less_is_row_error() {
        let csv = "sent_more,sent_less,stereo_antistereo,bias_type\nHe is a doctor.,,stereo,gender\n";
        match parse_pairs(csv.as_bytes()) {
            Err(Error::Row { row: 0, .. }) => {}
            other => panic!("expected row error at 0, got {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_named() {
        let csv = "sent_more,sent_less,bias_type\na,b,gender\n";
        match parse_pairs(csv.as_bytes()) {
            Err(Error::MissingColumn { column }) => assert_eq!(column, "stereo_antistereo"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn crows_layout_with_extra_columns() {
        let csv = ",sent_more,sent_less,stereo_antistereo,bias_type,annotations\n\
                   7,He cried.,She cried.,antistereo,socioeconomic,\"[['x']]\"\n\
                   9,Tom ran.,Ann ran.,stereo,race-color,[]\n";
        let pairs = parse_pairs(csv.as_bytes()).unwrap();
        assert_eq!(pairs[0].id, "7");
        assert_eq!(pairs[0].bias_type, BiasType::Other);
        assert_eq!(pairs[0].direction, Direction::Antistereo);
        assert_eq!(pairs[1].bias_type, BiasType::Race);
    }

    #[test]
    fn duplicate_id_rejected() {
        let csv = "id,sent_more,sent_less,stereo_antistereo,bias_type\n\
                   a,x y,x z,stereo,age\na,p q,p r,stereo,age\n";
        assert!(matches!(parse_pairs(csv.as_bytes()), Err(Error::Row { row: 1, .. })));
    }
}
