//! Column-oriented categorical datasets with explicit missing cells.

mod csv_io;
mod split;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{MGraph, NodeRole};

pub use csv_io::{load_csv, read_csv, write_csv, WEIGHT_COLUMN};
pub use split::{split_indices, split_train_test};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("row {row}, column `{column}`: unknown level `{token}`")]
    UnknownLevel {
        row: usize,
        column: String,
        token: String,
    },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {0} has the wrong number of fields")]
    RaggedRow(usize),
    #[error("no cohort column designated")]
    NoCohortColumn,
    #[error("no train fraction given for cohort `{0}`")]
    MissingFraction(String),
    #[error("invalid fraction {0} (must lie in [0, 1])")]
    InvalidFraction(f64),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("schema line {line}: {message}")]
    SchemaParse { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const DEFAULT_MISSING_TOKENS: [&str; 2] = ["", "NA"];

/// Categorical variable: ordered levels and the tokens that denote a missing cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub levels: Vec<String>,
    pub missing_tokens: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Self {
        Variable {
            name: name.into(),
            levels: levels.into_iter().map(Into::into).collect(),
            missing_tokens: DEFAULT_MISSING_TOKENS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn with_missing_tokens<S: Into<String>>(mut self, tokens: impl IntoIterator<Item = S>) -> Self {
        self.missing_tokens = tokens.into_iter().map(Into::into).collect();
        self
    }

    /// Binary `0`/`1` variable used for missingness indicators.
    pub fn indicator(name: impl Into<String>) -> Self {
        Variable::new(name, ["0", "1"])
    }

    pub fn cardinality(&self) -> usize {
        self.levels.len()
    }

    pub fn level_index(&self, token: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == token)
    }

    fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::InvalidSchema(format!("`{}`: {m}", self.name)));
        if self.name.is_empty() {
            return Err(DataError::InvalidSchema("empty variable name".into()));
        }
        if self.levels.is_empty() {
            return bad("no levels".into());
        }
        if self.levels.len() > u16::MAX as usize {
            return bad("too many levels".into());
        }
        let mut seen = BTreeSet::new();
        for l in &self.levels {
            if !seen.insert(l) {
                return bad(format!("duplicate level `{l}`"));
            }
            if self.missing_tokens.contains(l) {
                return bad(format!("level `{l}` is also a missing token"));
            }
        }
        Ok(())
    }
}

/// Ordered list of variables with unique names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    vars: Vec<Variable>,
    index: HashMap<String, usize>,
}

impl Schema {
    pub fn new(vars: Vec<Variable>) -> Result<Self, DataError> {
        let mut index = HashMap::with_capacity(vars.len());
        for (i, v) in vars.iter().enumerate() {
            v.validate()?;
            if index.insert(v.name.clone(), i).is_some() {
                return Err(DataError::InvalidSchema(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(Schema { vars, index })
    }

    /// Parses lines of the form `name: level1,level2 [missing=tok1|tok2]`.
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut vars = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |m: &str| DataError::SchemaParse { line, message: m.to_string() };
            let (name, rest) = body.split_once(':').ok_or_else(|| err("expected `name: levels`"))?;
            let name = name.trim();
            let rest = rest.trim();
            let (levels, missing) = match rest.find('[') {
                Some(at) => {
                    let tail = rest[at..].trim();
                    let inner = tail
                        .strip_prefix("[missing=")
                        .and_then(|t| t.strip_suffix(']'))
                        .ok_or_else(|| err("expected `[missing=tok1|tok2]`"))?;
                    (rest[..at].trim(), Some(inner.split('|').map(str::to_string).collect::<Vec<_>>()))
                }
                None => (rest, None),
            };
            if levels.is_empty() {
                return Err(err("no levels"));
            }
            let mut var = Variable::new(name, levels.split(',').map(str::trim));
            if let Some(m) = missing {
                var.missing_tokens = m;
            }
            vars.push(var);
        }
        Schema::new(vars)
    }

    /// Text form accepted by [`Schema::parse`]; the missing clause is omitted
    /// when the tokens are the defaults.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vars {
            let _ = write!(out, "{}: {}", v.name, v.levels.join(","));
            if v.missing_tokens != DEFAULT_MISSING_TOKENS {
                let _ = write!(out, " [missing={}]", v.missing_tokens.join("|"));
            }
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, col: usize) -> &Variable {
        &self.vars[col]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn column(&self, name: &str) -> Result<usize, DataError> {
        self.index_of(name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    }
}

/// Categorical table. Cells are level indices into the schema, `None` when missing.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<Vec<Option<u16>>>,
    weights: Vec<f64>,
    cohort: Option<usize>,
}

impl Dataset {
    /// Builds a dataset from columns of level indices; all weights are 1.
    pub fn new(schema: Schema, columns: Vec<Vec<Option<usize>>>) -> Result<Self, DataError> {
        let n = columns.first().map_or(0, Vec::len);
        Self::with_weights(schema, columns, vec![1.0; n])
    }

    pub fn with_weights(
        schema: Schema,
        columns: Vec<Vec<Option<usize>>>,
        weights: Vec<f64>,
    ) -> Result<Self, DataError> {
        if columns.len() != schema.len() {
            return Err(DataError::Invalid(format!(
                "{} columns for {} variables",
                columns.len(),
                schema.len()
            )));
        }
        let n = weights.len();
        let mut packed = Vec::with_capacity(columns.len());
        for (c, col) in columns.into_iter().enumerate() {
            let var = schema.var(c);
            if col.len() != n {
                return Err(DataError::Invalid(format!("column `{}` has {} rows, expected {n}", var.name, col.len())));
            }
            let mut out = Vec::with_capacity(n);
            for (r, cell) in col.into_iter().enumerate() {
                out.push(match cell {
                    Some(l) if l < var.cardinality() => Some(l as u16),
                    Some(l) => {
                        return Err(DataError::UnknownLevel {
                            row: r + 1,
                            column: var.name.clone(),
                            token: format!("#{l}"),
                        })
                    }
                    None => None,
                });
            }
            packed.push(out);
        }
        validate_weights(&weights)?;
        Ok(Dataset {
            schema,
            columns: packed,
            weights,
            cohort: None,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.weights.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<usize> {
        self.columns[col][row].map(usize::from)
    }

    pub fn column_cells(&self, col: usize) -> impl ExactSizeIterator<Item = Option<usize>> + '_ {
        self.columns[col].iter().map(|c| c.map(usize::from))
    }

    pub fn weight(&self, row: usize) -> f64 {
        self.weights[row]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    pub fn cohort_column(&self) -> Option<usize> {
        self.cohort
    }

    /// Designates the column identifying the population each row comes from.
    pub fn with_cohort(mut self, name: &str) -> Result<Self, DataError> {
        self.cohort = Some(self.schema.column(name)?);
        Ok(self)
    }

    pub fn reweighted(mut self, weights: Vec<f64>) -> Result<Self, DataError> {
        if weights.len() != self.n_rows() {
            return Err(DataError::Invalid("weight vector length differs from row count".into()));
        }
        validate_weights(&weights)?;
        self.weights = weights;
        Ok(self)
    }

    /// Level name of a cell, `None` when missing.
    pub fn level_name(&self, row: usize, col: usize) -> Option<&str> {
        self.get(row, col).map(|l| self.schema.var(col).levels[l].as_str())
    }

    pub fn missing_count(&self, col: usize) -> usize {
        self.columns[col].iter().filter(|c| c.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.columns.iter().all(|c| c.iter().all(Option::is_some))
    }

    pub fn row_complete_on(&self, row: usize, cols: &[usize]) -> bool {
        cols.iter().all(|&c| self.columns[c][row].is_some())
    }

    /// New dataset with the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self
                .columns
                .iter()
                .map(|col| rows.iter().map(|&r| col[r]).collect())
                .collect(),
            weights: rows.iter().map(|&r| self.weights[r]).collect(),
            cohort: self.cohort,
        }
    }

    /// Rows observed on every listed column (listwise deletion).
    pub fn complete_cases(&self, cols: &[usize]) -> Dataset {
        let rows: Vec<usize> = (0..self.n_rows()).filter(|&r| self.row_complete_on(r, cols)).collect();
        self.select_rows(&rows)
    }

    /// Replaces a whole column; levels must be valid for that variable.
    pub fn set_column(&mut self, col: usize, cells: Vec<Option<usize>>) -> Result<(), DataError> {
        let var = self.schema.var(col);
        if cells.len() != self.n_rows() {
            return Err(DataError::Invalid(format!("column `{}` length mismatch", var.name)));
        }
        if cells.iter().flatten().any(|&l| l >= var.cardinality()) {
            return Err(DataError::Invalid(format!("level out of range in `{}`", var.name)));
        }
        self.columns[col] = cells.into_iter().map(|c| c.map(|l| l as u16)).collect();
        Ok(())
    }

    #[inline]
    pub(crate) fn set_cell(&mut self, row: usize, col: usize, level: Option<usize>) {
        debug_assert!(level.map_or(true, |l| l < self.schema.var(col).cardinality()));
        self.columns[col][row] = level.map(|l| l as u16);
    }

    /// Appends a column, or replaces the existing column of the same name.
    pub fn upsert_column(mut self, var: Variable, cells: Vec<Option<usize>>) -> Result<Self, DataError> {
        if let Some(col) = self.schema.index_of(&var.name) {
            let mut vars = self.schema.vars.clone();
            vars[col] = var;
            self.schema = Schema::new(vars)?;
            self.set_column(col, cells)?;
            Ok(self)
        } else {
            let mut vars = self.schema.vars.clone();
            vars.push(var);
            self.schema = Schema::new(vars)?;
            self.columns.push(Vec::new());
            let col = self.columns.len() - 1;
            self.set_column(col, cells)?;
            Ok(self)
        }
    }

    /// Adds, or recomputes, the binary indicator column `R_X` (0 = observed,
    /// 1 = missing) for every partially observed variable of `g`.
    ///
    /// The column takes the name of the indicator node of `X` when the graph
    /// declares one, `R_<X>` otherwise.
    pub fn derive_indicators(&self, g: &MGraph) -> Result<Dataset, DataError> {
        let mut out = self.clone();
        for x in g.nodes_with(|r| *r == NodeRole::PartiallyObserved) {
            let col = self.schema.column(g.name(x))?;
            let name = match g.indicator_of(x) {
                Some(r) => g.name(r).to_string(),
                None => format!("R_{}", g.name(x)),
            };
            let cells = self.columns[col]
                .iter()
                .map(|c| Some(usize::from(c.is_none())))
                .collect();
            out = out.upsert_column(Variable::indicator(name), cells)?;
        }
        Ok(out)
    }

    /// Maps each graph node to its data column.
    pub fn columns_for(&self, g: &MGraph) -> Result<Vec<usize>, DataError> {
        g.node_ids().map(|id| self.schema.column(g.name(id))).collect()
    }
}

fn validate_weights(weights: &[f64]) -> Result<(), DataError> {
    match weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        Some(w) => Err(DataError::Invalid(format!("invalid row weight {w}"))),
        None => Ok(()),
    }
}
