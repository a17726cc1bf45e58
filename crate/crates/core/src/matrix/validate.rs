use super::InteractionMatrix;
use serde::Serialize;

/// Relative slack allowed on row and column sums.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub nonnegative: bool,
    pub negative_entries: Vec<(usize, usize)>,
    pub zero_diagonal: bool,
    pub nonzero_diagonal: Vec<usize>,
    pub rows_ok: bool,
    pub row_violations: Vec<usize>,
    /// `None` when the column check was not requested.
    pub cols_ok: Option<bool>,
    pub col_violations: Vec<usize>,
    pub max_row_sum: f64,
    pub max_col_sum: f64,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.nonnegative && self.zero_diagonal && self.rows_ok && self.cols_ok.unwrap_or(true)
    }
}

/// Checks sign, diagonal, row sums `<= 1` and optionally column sums `<= 1`.
pub fn validate(xi: &InteractionMatrix, check_columns: bool) -> ValidityReport {
    let negative_entries: Vec<_> =
        xi.triplets().filter(|t| t.2 < 0.0).map(|(i, j, _)| (i, j)).collect();
    let nonzero_diagonal: Vec<_> = xi.triplets().filter(|t| t.0 == t.1).map(|t| t.0).collect();
    let over = |sums: &[f64]| -> Vec<usize> {
        sums.iter()
            .enumerate()
            .filter(|(_, &s)| s > 1.0 + SUM_TOLERANCE)
            .map(|(i, _)| i)
            .collect()
    };
    let row_violations = over(xi.row_sums());
    let col_violations = if check_columns { over(xi.col_sums()) } else { Vec::new() };
    ValidityReport {
        nonnegative: negative_entries.is_empty(),
        negative_entries,
        zero_diagonal: nonzero_diagonal.is_empty(),
        nonzero_diagonal,
        rows_ok: row_violations.is_empty(),
        row_violations,
        cols_ok: check_columns.then_some(col_violations.is_empty()),
        col_violations,
        max_row_sum: xi.max_row_sum(),
        max_col_sum: xi.max_col_sum(),
    }
}
