//! Training CSV readers.
//!
//! Properties: `length,rate,skill_similarity,view_count,ranking_position_score,label`,
//! empty cells are missing values. Metadata: the eight presence flags
//! (`title,description,level,duration,subject,language,url,provider`) and `label`.
//! Columns may appear in any order. Labels accept `1/0`, `true/false`,
//! `fit/not_fit` and `controlled/uncontrolled`.

use std::io::Read;
use std::path::Path;

use super::metadata::{MetadataRecord, MetadataTable, METADATA_FIELDS};
use super::properties::{PropertyFeatures, PropertyTable, PROPERTY_FEATURES};
use crate::error::{Error, Result};

fn parse_label(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "fit" | "controlled" | "yes" => Some(true),
        "0" | "false" | "not_fit" | "uncontrolled" | "no" => Some(false),
        _ => None,
    }
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" | "" => Some(false),
        _ => None,
    }
}

fn column_index(headers: &csv::StringRecord, name: &str, src: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::validation("csv", format!("{src}: missing column `{name}`")))
}

fn csv_err(src: &str, e: csv::Error) -> Error {
    Error::Csv { path: src.to_string(), source: e }
}

pub fn read_property_csv<R: Read>(reader: R, src: &str) -> Result<PropertyTable<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(src, e))?.clone();
    let cols: Vec<usize> = PROPERTY_FEATURES.iter().map(|n| column_index(&headers, n, src)).collect::<Result<_>>()?;
    let label_col = column_index(&headers, "label", src)?;
    let mut table = PropertyTable::default();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(src, e))?;
        let row = line + 2;
        let mut vals = [None; 5];
        for (slot, (&c, name)) in vals.iter_mut().zip(cols.iter().zip(PROPERTY_FEATURES)) {
            let cell = rec.get(c).unwrap_or("").trim();
            if !cell.is_empty() {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::validation(name, format!("{src}:{row}: `{cell}` is not a number")))?;
                *slot = Some(v);
            }
        }
        let label = parse_label(rec.get(label_col).unwrap_or(""))
            .ok_or_else(|| Error::validation("label", format!("{src}:{row}: unrecognized label")))?;
        table.push(
            PropertyFeatures {
                length: vals[0],
                rate: vals[1],
                skill_similarity: vals[2],
                view_count: vals[3],
                ranking_position_score: vals[4],
            },
            label,
        );
    }
    Ok(table)
}

pub fn read_metadata_csv<R: Read>(reader: R, src: &str) -> Result<MetadataTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(src, e))?.clone();
    let cols: Vec<usize> = METADATA_FIELDS.iter().map(|n| column_index(&headers, n, src)).collect::<Result<_>>()?;
    let label_col = column_index(&headers, "label", src)?;
    let mut table = MetadataTable::default();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(src, e))?;
        let row = line + 2;
        let mut present = [false; 8];
        for (slot, (&c, name)) in present.iter_mut().zip(cols.iter().zip(METADATA_FIELDS)) {
            *slot = parse_flag(rec.get(c).unwrap_or(""))
                .ok_or_else(|| Error::validation(name, format!("{src}:{row}: flag must be 0/1/true/false")))?;
        }
        let label = parse_label(rec.get(label_col).unwrap_or(""))
            .ok_or_else(|| Error::validation("label", format!("{src}:{row}: unrecognized label")))?;
        table.push(MetadataRecord { present }, label);
    }
    Ok(table)
}

pub fn load_property_csv(path: &Path) -> Result<PropertyTable<f64>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_property_csv(f, &path.display().to_string())
}

pub fn load_metadata_csv(path: &Path) -> Result<MetadataTable> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_metadata_csv(f, &path.display().to_string())
}

/// Writers used by the synthetic data generator and the CLI.
pub fn write_property_csv(table: &PropertyTable<f64>) -> String {
    let mut out = String::from("length,rate,skill_similarity,view_count,ranking_position_score,label\n");
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (r, l) in table.rows.iter().zip(&table.labels) {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell(r.length),
            cell(r.rate),
            cell(r.skill_similarity),
            cell(r.view_count),
            cell(r.ranking_position_score),
            if *l { "fit" } else { "not_fit" }
        ));
    }
    out
}

pub fn write_metadata_csv(table: &MetadataTable) -> String {
    let mut out = METADATA_FIELDS.join(",");
    out.push_str(",label\n");
    for (r, l) in table.rows.iter().zip(&table.labels) {
        for p in r.present {
            out.push_str(if p { "1," } else { "0," });
        }
        out.push_str(if *l { "controlled\n" } else { "uncontrolled\n" });
    }
    out
}
