use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::Entry;

#[derive(Clone, Debug, PartialEq)]
pub struct PresolveReport {
    /// Indices of retained rows, ascending.
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// Largest |b_d − b̂_d| over dropped rows, relative to 1+|b_d|.
    pub inconsistency: f64,
}

impl PresolveReport {
    pub fn consistent(&self) -> bool {
        self.inconsistency <= 1e-8
    }
}

/// Drops linearly dependent equality rows by greedy pivoted Cholesky on the Gram
/// matrix ⟨A_i, A_j⟩ (pivot threshold `tol` relative to the largest diagonal).
pub(crate) fn presolve(rows: &[Vec<Entry>], b: &[f64], tol: f64) -> PresolveReport {
    let m = rows.len();
    let mut by_key: HashMap<(usize, usize, usize), Vec<(usize, f64, f64)>> = HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        for e in row {
            by_key.entry((e.block, e.row, e.col)).or_default().push((i, e.value.re, e.value.im));
        }
    }
    let mut g = DMatrix::<f64>::zeros(m, m);
    for list in by_key.values() {
        for &(i, ar, ai) in list {
            for &(j, br, bi) in list {
                if j >= i {
                    g[(i, j)] += ar * br + ai * bi;
                }
            }
        }
    }
    for j in 0..m {
        for i in (j + 1)..m {
            g[(i, j)] = g[(j, i)];
        }
    }
    let max_diag = (0..m).map(|i| g[(i, i)]).fold(0.0f64, f64::max);
    let mut resid: Vec<f64> = (0..m).map(|i| g[(i, i)]).collect();
    let mut used = vec![false; m];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    loop {
        let p = (0..m).filter(|&i| !used[i]).max_by(|&a, &b| resid[a].total_cmp(&resid[b]));
        let Some(p) = p else { break };
        if resid[p] <= tol * max_diag.max(f64::MIN_POSITIVE) {
            break;
        }
        let piv = resid[p].sqrt();
        let mut col = vec![0.0; m];
        for i in 0..m {
            if used[i] || i == p {
                continue;
            }
            let mut s = g[(i, p)];
            for c in &cols {
                s -= c[i] * c[p];
            }
            col[i] = s / piv;
            resid[i] -= col[i] * col[i];
        }
        col[p] = piv;
        used[p] = true;
        order.push(p);
        cols.push(col);
    }
    let mut kept = order.clone();
    kept.sort_unstable();
    let dropped: Vec<usize> = (0..m).filter(|i| !used[*i]).collect();
    let mut inconsistency: f64 = 0.0;
    if !dropped.is_empty() && !kept.is_empty() {
        let gkk = DMatrix::from_fn(kept.len(), kept.len(), |a, c| g[(kept[a], kept[c])]);
        let bk = DVector::from_iterator(kept.len(), kept.iter().map(|&i| b[i]));
        if let Some(ch) = gkk.cholesky() {
            for &d in &dropped {
                let gd = DVector::from_iterator(kept.len(), kept.iter().map(|&i| g[(i, d)]));
                let coef = ch.solve(&gd);
                let pred = coef.dot(&bk);
                inconsistency = inconsistency.max((b[d] - pred).abs() / (1.0 + b[d].abs()));
            }
        }
    } else if !dropped.is_empty() {
        for &d in &dropped {
            inconsistency = inconsistency.max(b[d].abs() / (1.0 + b[d].abs()));
        }
    }
    PresolveReport { kept, dropped, inconsistency }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn e(row: usize, col: usize, v: f64) -> Entry {
        Entry { block: 0, row, col, value: c(v) }
    }

    #[test]
    fn drops_sum_row() {
        let rows = vec![vec![e(0, 0, 1.0)], vec![e(1, 1, 1.0)], vec![e(0, 0, 1.0), e(1, 1, 1.0)]];
        let r = presolve(&rows, &[0.3, 0.7, 1.0], 1e-10);
        assert_eq!(r.kept.len(), 2);
        assert!(r.consistent());
        let r = presolve(&rows, &[0.3, 0.7, 1.5], 1e-10);
        assert!(!r.consistent());
    }
}
