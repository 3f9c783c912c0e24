use std::io::{Read, Write};
use std::path::Path;

use super::{DataError, Dataset, Schema};

/// Optional column carrying per-row weights. Written only when some weight
/// differs from 1.
pub const WEIGHT_COLUMN: &str = "_weight";

/// Loads a CSV file (header required, any column order) against `schema`.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset, DataError> {
    read_csv(std::fs::File::open(path)?, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let mut positions = Vec::with_capacity(schema.len());
    for var in schema.vars() {
        let at = header
            .iter()
            .position(|h| h == var.name)
            .ok_or_else(|| DataError::MissingColumn(var.name.clone()))?;
        positions.push(at);
    }
    let weight_at = header.iter().position(|h| h == WEIGHT_COLUMN);

    let mut columns: Vec<Vec<Option<usize>>> = vec![Vec::new(); schema.len()];
    let mut weights = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != header.len() {
            return Err(DataError::RaggedRow(row));
        }
        for (c, var) in schema.vars().iter().enumerate() {
            let token = &record[positions[c]];
            let cell = if let Some(l) = var.level_index(token) {
                Some(l)
            } else if var.missing_tokens.iter().any(|m| m == token) {
                None
            } else {
                return Err(DataError::UnknownLevel {
                    row,
                    column: var.name.clone(),
                    token: token.to_string(),
                });
            };
            columns[c].push(cell);
        }
        let w = match weight_at {
            Some(at) => record[at]
                .trim()
                .parse::<f64>()
                .map_err(|_| DataError::Invalid(format!("row {row}: bad weight `{}`", &record[at])))?,
            None => 1.0,
        };
        weights.push(w);
    }
    Dataset::with_weights(schema.clone(), columns, weights)
}

/// Writes the dataset in schema column order; missing cells use each
/// variable's first missing token.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<(), DataError> {
    let schema = d.schema();
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let with_weights = !d.has_unit_weights();
    let mut header: Vec<&str> = schema.vars().iter().map(|v| v.name.as_str()).collect();
    if with_weights {
        header.push(WEIGHT_COLUMN);
    }
    wtr.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for r in 0..d.n_rows() {
        record.clear();
        for (c, var) in schema.vars().iter().enumerate() {
            match d.get(r, c) {
                Some(l) => record.push(var.levels[l].clone()),
                None => {
                    let tok = var.missing_tokens.first().ok_or_else(|| {
                        DataError::Invalid(format!("`{}` has a missing cell but no missing token", var.name))
                    })?;
                    record.push(tok.clone());
                }
            }
        }
        if with_weights {
            record.push(format!("{}", d.weight(r)));
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}
