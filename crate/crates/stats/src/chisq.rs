use serde::{Deserialize, Serialize};

use crate::special::chi2_survival;
use crate::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: u64,
    pub p: f64,
}

/// Pearson χ² test of independence on an r×c table of counts (rows × columns).
pub fn chi_square_contingency(table: &[Vec<u64>]) -> Result<ChiSquareResult, StatsError> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 {
        return Err(StatsError::InsufficientData(format!("need at least a 2x2 table, got {rows}x{cols}")));
    }
    if table.iter().any(|r| r.len() != cols) {
        return Err(StatsError::InvalidParameter("ragged contingency table".into()));
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols).map(|c| table.iter().map(|r| r[c]).sum::<u64>() as f64).collect();
    if row_sums.iter().chain(&col_sums).any(|&s| s == 0.0) {
        return Err(StatsError::DegenerateMargins);
    }
    let total: f64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (r, row) in table.iter().enumerate() {
        for (c, &observed) in row.iter().enumerate() {
            let expected = row_sums[r] * col_sums[c] / total;
            let diff = observed as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let df = ((rows - 1) * (cols - 1)) as u64;
    Ok(ChiSquareResult { statistic, df, p: chi2_survival(statistic, df as f64)? })
}

/// Retention test: one column per condition, rows completed and dropped.
pub fn retention_test(completed_dropped: &[(u64, u64)]) -> Result<ChiSquareResult, StatsError> {
    let table = vec![
        completed_dropped.iter().map(|c| c.0).collect(),
        completed_dropped.iter().map(|c| c.1).collect(),
    ];
    chi_square_contingency(&table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn proportional_table_is_zero() {
        let r = chi_square_contingency(&[vec![10, 20, 30], vec![1, 2, 3]]).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p - 1.0).abs() < 1e-12);
        assert_eq!(r.df, 2);
    }

    #[test]
    fn retention_counts() {
        let r = retention_test(&[(26, 4), (26, 4), (25, 5)]).unwrap();
        // E = 25.667 completed / 4.333 dropped per column:
        // 2·(1/3)²/25.667 + 2·(1/3)²/4.333 + (2/3)²/25.667 + (2/3)²/4.333
        let e1 = 77.0 / 3.0;
        let e2 = 13.0 / 3.0;
        let expect = (2.0 / 9.0 + 4.0 / 9.0) / e1 + (2.0 / 9.0 + 4.0 / 9.0) / e2;
        assert!((r.statistic - expect).abs() < 1e-12);
        assert!((r.statistic - 0.1798).abs() < 1e-3);
        assert_eq!(r.df, 2);
        assert!((r.p - (-r.statistic / 2.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn zero_margin_is_rejected() {
        assert!(matches!(chi_square_contingency(&[vec![0, 0], vec![1, 2]]), Err(StatsError::DegenerateMargins)));
        assert!(matches!(chi_square_contingency(&[vec![0, 3], vec![0, 2]]), Err(StatsError::DegenerateMargins)));
        assert!(chi_square_contingency(&[vec![1, 2]]).is_err());
    }

    proptest! {
        #[test]
        fn permutation_invariance(counts in prop::collection::vec(1u64..50, 6), perm in 0usize..6) {
            let table = vec![counts[..3].to_vec(), counts[3..].to_vec()];
            let base = chi_square_contingency(&table).unwrap();
            let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let o = orders[perm];
            let permuted: Vec<Vec<u64>> = table.iter().rev().map(|r| o.iter().map(|&c| r[c]).collect()).collect();
            let other = chi_square_contingency(&permuted).unwrap();
            prop_assert!((base.statistic - other.statistic).abs() < 1e-9 * (1.0 + base.statistic));
            prop_assert!((0.0..=1.0).contains(&base.p));
        }
    }
}
