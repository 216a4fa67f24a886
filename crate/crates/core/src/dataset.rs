//! Labelled feature rows and their CSV encoding.

use std::io::{Read, Write};

use crate::features::{FeatureVector, N_FEATURES};
use crate::model::{normalize_batch, Row};
use crate::{Error, Result};

/// CSV header, exactly.
pub const HEADER: [&str; 3 + N_FEATURES] = [
    "design",
    "node_id",
    "root_fanout",
    "root_level",
    "cut_fanout",
    "cut_size",
    "n_reconv",
    "n_leaves",
    "label",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetRow {
    pub design: String,
    pub node_id: usize,
    pub features: FeatureVector,
    pub label: bool,
}

pub fn write_csv<W: Write>(out: W, rows: &[DatasetRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        let mut rec = vec![r.design.clone(), r.node_id.to_string()];
        rec.extend(r.features.to_array().iter().map(u32::to_string));
        rec.push(u8::from(r.label).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<DatasetRow>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?;
    if header.iter().ne(HEADER) {
        return Err(Error::BadDataset(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<u64> {
            rec[i]
                .trim()
                .parse()
                .map_err(|_| Error::BadDataset(format!("row {}: bad value {:?} in {}", line + 1, &rec[i], HEADER[i])))
        };
        let mut f = [0u32; N_FEATURES];
        for (k, slot) in f.iter_mut().enumerate() {
            *slot = u32::try_from(num(2 + k)?)
                .map_err(|_| Error::BadDataset(format!("row {}: {} out of range", line + 1, HEADER[2 + k])))?;
        }
        let features = FeatureVector::from_array(f);
        let label = match num(2 + N_FEATURES)? {
            0 => false,
            1 => true,
            v => return Err(Error::BadDataset(format!("row {}: label {v}", line + 1))),
        };
        rows.push(DatasetRow { design: rec[0].to_string(), node_id: num(1)? as usize, features, label });
    }
    Ok(rows)
}

/// Design names in order of first appearance.
pub fn designs(rows: &[DatasetRow]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in rows {
        if !out.contains(&r.design) {
            out.push(r.design.clone());
        }
    }
    out
}

/// Features normalised per design, with labels, for the selected designs.
/// Each design is standardised with its own statistics.
pub fn normalized_by_design(rows: &[DatasetRow], keep: impl Fn(&str) -> bool) -> (Vec<Row>, Vec<bool>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for d in designs(rows).into_iter().filter(|d| keep(d)) {
        let part: Vec<&DatasetRow> = rows.iter().filter(|r| r.design == d).collect();
        let raw: Vec<Row> = part.iter().map(|r| r.features.to_f64()).collect();
        x.extend(normalize_batch(&raw));
        y.extend(part.iter().map(|r| r.label));
    }
    (x, y)
}
