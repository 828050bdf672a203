//! The runtime value passed between algebra operators.

use std::fmt;

use crate::category::ElementId;

/// A named column: the variable it binds and the object (or range
/// expression) its elements are drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Column {
    pub var: String,
    pub object: String,
}

impl Column {
    pub fn new(var: impl Into<String>, object: impl Into<String>) -> Self {
        Self {
            var: var.into(),
            object: object.into(),
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.var, self.object)
    }
}

pub type Row = Box<[ElementId]>;

/// A finite set of rows over named columns.
///
/// Rows are kept sorted and duplicate-free, so two relations with the same
/// contents are equal and iterate identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    columns: Vec<Column>,
    rows: Vec<Row>,
}

impl Relation {
    pub fn empty(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    /// Builds a relation, sorting and deduplicating the rows.
    ///
    /// Panics if a row's arity differs from the column count.
    pub fn new(columns: Vec<Column>, rows: impl IntoIterator<Item = Row>) -> Self {
        let mut rows: Vec<Row> = rows.into_iter().collect();
        for r in &rows {
            assert_eq!(r.len(), columns.len(), "row arity does not match relation schema");
        }
        rows.sort_unstable();
        rows.dedup();
        Self { columns, rows }
    }

    /// One-column relation over the given elements.
    pub fn unary(var: impl Into<String>, object: impl Into<String>, ids: impl IntoIterator<Item = ElementId>) -> Self {
        Self::new(vec![Column::new(var, object)], ids.into_iter().map(|id| vec![id].into_boxed_slice()))
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Row> {
        self.rows
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, var: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.var == var)
    }

    pub fn contains(&self, row: &[ElementId]) -> bool {
        self.rows.binary_search_by(|r| (**r).cmp(row)).is_ok()
    }

    /// Same rows, relabelled columns.
    pub fn with_columns(self, columns: Vec<Column>) -> Self {
        assert_eq!(columns.len(), self.columns.len());
        Self {
            columns,
            rows: self.rows,
        }
    }

    /// Inserts rows, keeping set semantics.
    pub fn extend(&mut self, rows: impl IntoIterator<Item = Row>) {
        let columns = std::mem::take(&mut self.columns);
        let mut all = std::mem::take(&mut self.rows);
        all.extend(rows);
        *self = Relation::new(columns, all);
    }

    /// Same schema and rows, ignoring the object labels on columns.
    pub fn same_contents(&self, other: &Relation) -> bool {
        self.rows == other.rows
            && self.columns.len() == other.columns.len()
            && self.columns.iter().zip(&other.columns).all(|(a, b)| a.var == b.var)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header: Vec<String> = self.columns.iter().map(|c| c.to_string()).collect();
        writeln!(f, "({})", header.join(", "))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|e| e.to_string()).collect();
            writeln!(f, "  ({})", cells.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(rows: &[(u32, u32)]) -> Relation {
        Relation::new(
            vec![Column::new("x", "A"), Column::new("y", "B")],
            rows.iter()
                .map(|&(a, b)| vec![ElementId::new("A", a), ElementId::new("B", b)].into_boxed_slice()),
        )
    }

    #[test]
    fn duplicates_collapse() {
        let r = rel(&[(1, 2), (0, 0), (1, 2)]);
        assert_eq!(r.len(), 2);
        assert_eq!(r.rows()[0][0], ElementId::new("A", 0));
    }

    #[test]
    #[should_panic(expected = "row arity")]
    fn arity_is_checked() {
        Relation::new(vec![Column::new("x", "A")], [vec![].into_boxed_slice()]);
    }

    proptest! {
        #[test]
        fn reinserting_own_rows_is_identity(rows in proptest::collection::vec((0u32..5, 0u32..5), 0..20)) {
            let r = rel(&rows);
            let mut again = r.clone();
            again.extend(r.rows().to_vec());
            prop_assert_eq!(again, r.clone());
            for row in r.rows() {
                prop_assert!(r.contains(row));
            }
        }
    }
}
