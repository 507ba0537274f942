//! Minimal dense linear solve, sized for qualification-grid systems.

use alloc::vec::Vec;

use crate::math;

/// Solves `A x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
#[allow(clippy::needless_range_loop)]
pub(crate) fn solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| math::abs(a[p][col]).total_cmp(&math::abs(a[q][col])))?;
        if math::abs(a[pivot_row][col]) < 1e-14 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
