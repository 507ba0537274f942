//! Shared fixtures for the integration suites: the worked three-level
//! example, its transition kernel, and seeded random instance generators.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fairgate_core::dynamics::DynamicsKernel;
use fairgate_core::{Penalty, PopulationState, QualificationGrid};

/// Example population: equal groups on the grid [-2, -1, 2].
pub fn example1_state() -> PopulationState {
    PopulationState::new(
        QualificationGrid::new(vec![-2.0, -1.0, 2.0]).unwrap(),
        0.5,
        0.5,
        vec![0.3, 0.1, 0.6],
        vec![0.5, 0.1, 0.4],
    )
    .unwrap()
}

/// The example's transition kernel: selection at level -1 raises the chance
/// of decline, rejection raises the chance of growth.
pub fn figure1_kernel() -> DynamicsKernel {
    DynamicsKernel::new(
        QualificationGrid::new(vec![-2.0, -1.0, 2.0]).unwrap(),
        vec![
            vec![0.8, 0.1, 0.1],
            vec![0.8, 0.1, 0.1],
            vec![0.1, 0.1, 0.8],
        ],
        vec![
            vec![0.8, 0.1, 0.1],
            vec![0.1, 0.1, 0.8],
            vec![0.1, 0.1, 0.8],
        ],
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random grid of `n` distinct levels in [-3, 3], bounded away from zero.
pub fn random_grid(rng: &mut ChaCha8Rng, n: usize) -> QualificationGrid {
    let mut values: Vec<f64> = Vec::with_capacity(n);
    while values.len() < n {
        let v: f64 = rng.gen_range(-3.0..3.0);
        if v.abs() < 0.05 {
            continue;
        }
        if values.iter().any(|&u| (u - v).abs() < 1e-3) {
            continue;
        }
        values.push(v);
    }
    values.sort_by(f64::total_cmp);
    QualificationGrid::new(values).unwrap()
}

/// Random distribution over `n` levels; roughly a quarter of the entries are
/// zeroed to exercise the zero-mass conventions.
pub fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut raw: Vec<f64> = (0..n).map(|_| -f64::ln(1.0 - rng.gen::<f64>())).collect();
        for x in &mut raw {
            if rng.gen_bool(0.25) {
                *x = 0.0;
            }
        }
        let sum: f64 = raw.iter().sum();
        if sum > 1e-9 {
            return raw.into_iter().map(|x| x / sum).collect();
        }
    }
}

/// Random population over 2..=`max_levels` levels with random group weights.
pub fn random_instance(rng: &mut ChaCha8Rng, max_levels: usize) -> PopulationState {
    let n = rng.gen_range(2..=max_levels);
    let grid = random_grid(rng, n);
    let weight_a = rng.gen_range(0.05..0.95);
    let dist_a = random_dist(rng, n);
    let dist_b = random_dist(rng, n);
    PopulationState::new(grid, weight_a, 1.0 - weight_a, dist_a, dist_b).unwrap()
}

/// One of the four penalty kinds used across the experiments.
pub fn random_penalty(rng: &mut ChaCha8Rng) -> Penalty {
    match rng.gen_range(0..4) {
        0 => Penalty::Linear,
        1 => Penalty::quadratic(),
        2 => Penalty::hinge(rng.gen_range(0.0..1.0)).unwrap(),
        _ => Penalty::Exponential,
    }
}

/// Kernel whose selected transitions never lower the expected qualification:
/// each selected row only redistributes mass to the same level or higher.
/// Rejected rows are unconstrained.
pub fn growth_kernel(rng: &mut ChaCha8Rng, grid: &QualificationGrid) -> DynamicsKernel {
    let n = grid.len();
    let selected: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let raw: Vec<f64> = (0..n - i).map(|_| rng.gen_range(0.1..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let mut row = vec![0.0; n];
            for (offset, x) in raw.into_iter().enumerate() {
                row[i + offset] = x / sum;
            }
            row
        })
        .collect();
    let rejected: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / sum).collect()
        })
        .collect();
    DynamicsKernel::new(grid.clone(), selected, rejected).unwrap()
}

/// Random irreducible birth-death chain with strictly positive band.
pub fn random_tridiagonal_chain(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let up = if i + 1 < n { rng.gen_range(0.05..0.45) } else { 0.0 };
            let down = if i > 0 { rng.gen_range(0.05..0.45) } else { 0.0 };
            let mut row = vec![0.0; n];
            if i + 1 < n {
                row[i + 1] = up;
            }
            if i > 0 {
                row[i - 1] = down;
            }
            row[i] = 1.0 - up - down;
            row
        })
        .collect()
}

/// Stationary distribution by a dense Gauss-Jordan solve, written
/// independently of the library's elimination: replaces the last balance
/// equation with normalization and reduces the augmented system.
#[allow(clippy::needless_range_loop)]
pub fn stationary_by_linear_solve(t: &[Vec<f64>]) -> Vec<f64> {
    let n = t.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for j in 0..n {
        for i in 0..n {
            a[j][i] = t[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for i in 0..n {
        a[n - 1][i] = 1.0;
    }
    a[n - 1][n] = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let lead = a[col][col];
        assert!(lead.abs() > 1e-13, "singular stationary system");
        for k in col..=n {
            a[col][k] /= lead;
        }
        for row in 0..n {
            if row != col && a[row][col] != 0.0 {
                let factor = a[row][col];
                for k in col..=n {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n]).collect()
}
