//! Minimum-cost rectangular assignment.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row; forbidden pairs are never returned.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of the costs of `pairs`.
    pub cost: f64,
}

/// Solves the assignment problem on a non-negative cost matrix.
///
/// Entries equal to `f64::INFINITY` are forbidden. The result first
/// maximizes the number of assigned pairs and then minimizes their total
/// cost. Rectangular inputs are padded with zero-cost dummy rows or columns.
/// Ties are resolved by the fixed scan order, so the result is a
/// deterministic function of the matrix.
pub fn hungarian(cost: &DMatrix<f64>) -> Assignment {
    let (n, m) = cost.shape();
    let max_finite = cost
        .iter()
        .copied()
        .filter(|c| c.is_finite())
        .fold(None, |a: Option<f64>, c| Some(a.map_or(c, |a| a.max(c))));
    let Some(max_finite) = max_finite else {
        return Assignment {
            pairs: vec![],
            cost: 0.0,
        };
    };
    let k = n.max(m);
    // larger than any sum of k finite entries
    let forbidden = k as f64 * max_finite + 1.0;
    let mut a = vec![0.0; k * k];
    for i in 0..n {
        for j in 0..m {
            let c = cost[(i, j)];
            debug_assert!(c >= 0.0, "negative cost {c}");
            a[i * k + j] = if c.is_finite() { c } else { forbidden };
        }
    }
    let row_to_col = solve_square(&a, k);
    let pairs: Vec<(usize, usize)> = row_to_col
        .into_iter()
        .enumerate()
        .filter(|&(i, j)| i < n && j < m && cost[(i, j)].is_finite())
        .collect();
    let total = pairs.iter().map(|&(i, j)| cost[(i, j)]).sum();
    Assignment { pairs, cost: total }
}

/// Shortest augmenting path with potentials; `a` is row-major `k x k`.
fn solve_square(a: &[f64], k: usize) -> Vec<usize> {
    // 1-based with column 0 as the virtual source
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut p = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = a[(i0 - 1) * k + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; k];
    for j in 1..=k {
        row_to_col[p[j] - 1] = j - 1;
    }
    row_to_col
}
