use std::collections::HashMap;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::graph::NodeId;
use crate::model::{eliminate, Alignment, CausalNetwork, ModelError};
use crate::Real;

use super::DiscoveryError;

#[derive(Debug, Clone, PartialEq)]
pub struct Imputation {
    pub data: Dataset,
    pub imputed_cells: usize,
    /// Rows whose observed cells are impossible under the model; their gaps
    /// were filled from prior marginals.
    pub flagged_rows: Vec<usize>,
}

/// Fills each missing cell of a network column with the mode of its posterior
/// marginal given the row's observed network cells. Ties go to the level
/// listed first in the schema. Columns without a network node are untouched.
pub fn impute_mode<T: Real>(c: &CausalNetwork<T>, d: &Dataset) -> Result<Imputation, DiscoveryError> {
    let g = c.graph();
    let align = Alignment::new(c, d.schema())?;
    let with_column: Vec<NodeId> = g.node_ids().filter(|&v| align.col(v).is_some()).collect();

    let mut patterns: Vec<Vec<(NodeId, usize)>> = Vec::new();
    let mut index: HashMap<Vec<(NodeId, usize)>, usize> = HashMap::new();
    let mut row_pattern = Vec::with_capacity(d.n_rows());
    for r in 0..d.n_rows() {
        let ev = align.evidence(d, r, None);
        if ev.len() == with_column.len() {
            row_pattern.push(None);
            continue;
        }
        let next = patterns.len();
        let k = *index.entry(ev.clone()).or_insert_with(|| {
            patterns.push(ev);
            next
        });
        row_pattern.push(Some(k));
    }

    let fills: Vec<Result<(Vec<(usize, usize)>, bool), ModelError>> = patterns
        .par_iter()
        .map(|ev| {
            let mut out = Vec::new();
            let mut flagged = false;
            for &v in with_column.iter().filter(|v| !ev.iter().any(|e| e.0 == **v)) {
                let post = match eliminate(c, &[v], ev) {
                    Ok(f) => f,
                    Err(ModelError::InconsistentEvidence) => {
                        flagged = true;
                        eliminate(c, &[v], &[])?
                    }
                    Err(e) => return Err(e),
                };
                let col = align.col(v).expect("node has a column");
                let card = d.schema().var(col).cardinality();
                let mut best = 0;
                for l in 1..card {
                    if post.values()[align.net_level(v, l)] > post.values()[align.net_level(v, best)] {
                        best = l;
                    }
                }
                out.push((col, best));
            }
            Ok((out, flagged))
        })
        .collect();
    let fills = fills.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut data = d.clone();
    let mut imputed_cells = 0;
    let mut flagged_rows = Vec::new();
    for (r, k) in row_pattern.into_iter().enumerate() {
        let Some(k) = k else { continue };
        let (cells, flagged) = &fills[k];
        for &(col, level) in cells {
            data.set_cell(r, col, Some(level));
        }
        imputed_cells += cells.len();
        if *flagged {
            flagged_rows.push(r);
        }
    }
    Ok(Imputation {
        data,
        imputed_cells,
        flagged_rows,
    })
}
