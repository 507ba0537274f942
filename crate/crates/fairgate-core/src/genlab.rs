//! Seeded generators for experiment dynamics: homogeneous band kernels,
//! dense random kernels, and Gaussian perturbations of existing kernels.
//!
//! Every generator is a pure function of its seed. Streams come from
//! ChaCha8, so identical seeds reproduce identical kernels bit for bit;
//! [`GENERATOR_VERSION`] names the algorithm so output files can record it.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dynamics::DynamicsKernel;
use crate::math;
use crate::population::QualificationGrid;

/// Identifier for the generator family and its RNG, recorded in manifests.
pub const GENERATOR_VERSION: &str = "genlab/1-chacha8";

/// Parameter constraint violation for the band-kernel family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GenError {
    /// A probability parameter falls outside [0, 1].
    ParamRange { name: &'static str, value: f64 },
    /// Up and down probabilities of one decision exceed one combined.
    RowOverflow { selected: bool, sum: f64 },
    /// Selection must not raise the down-move probability.
    DownMoveOrder { q1_down: f64, q0_down: f64 },
    /// Selection must not lower the up-move probability.
    UpMoveOrder { q1_up: f64, q0_up: f64 },
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GenError::ParamRange { name, value } => {
                write!(f, "parameter {name} = {value} is outside [0, 1]")
            }
            GenError::RowOverflow { selected, sum } => {
                let which = if selected { "selected" } else { "rejected" };
                write!(f, "{which} up + down probabilities sum to {sum} > 1")
            }
            GenError::DownMoveOrder { q1_down, q0_down } => {
                write!(f, "selected down-move {q1_down} exceeds rejected down-move {q0_down}")
            }
            GenError::UpMoveOrder { q1_up, q0_up } => {
                write!(f, "rejected up-move {q0_up} exceeds selected up-move {q1_up}")
            }
        }
    }
}

impl core::error::Error for GenError {}

/// Up/down move probabilities for the homogeneous band family, one pair per
/// decision. Selection weakly encourages up-moves and discourages down-moves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandKernelParams {
    pub q1_up: f64,
    pub q1_down: f64,
    pub q0_up: f64,
    pub q0_down: f64,
}

impl BandKernelParams {
    pub fn new(q1_up: f64, q1_down: f64, q0_up: f64, q0_down: f64) -> Result<Self, GenError> {
        for (name, value) in [
            ("q1_up", q1_up),
            ("q1_down", q1_down),
            ("q0_up", q0_up),
            ("q0_down", q0_down),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenError::ParamRange { name, value });
            }
        }
        if q1_up + q1_down > 1.0 {
            return Err(GenError::RowOverflow { selected: true, sum: q1_up + q1_down });
        }
        if q0_up + q0_down > 1.0 {
            return Err(GenError::RowOverflow { selected: false, sum: q0_up + q0_down });
        }
        if q0_down < q1_down {
            return Err(GenError::DownMoveOrder { q1_down, q0_down });
        }
        if q1_up < q0_up {
            return Err(GenError::UpMoveOrder { q1_up, q0_up });
        }
        Ok(BandKernelParams {
            q1_up,
            q1_down,
            q0_up,
            q0_down,
        })
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Draws band parameters by the chained-uniform scheme: `q1_up ~ U(0,1)`,
/// `q1_down ~ U(0, 1-q1_up)`, `q0_up ~ U(0, q1_up)`,
/// `q0_down ~ U(q1_down, 1-q0_up)`.
pub fn sample_band_params(seed: u64) -> BandKernelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q1_up = uniform(&mut rng, 0.0, 1.0);
    let q1_down = uniform(&mut rng, 0.0, 1.0 - q1_up);
    let q0_up = uniform(&mut rng, 0.0, q1_up);
    let q0_down = uniform(&mut rng, q1_down, 1.0 - q0_up);
    BandKernelParams::new(q1_up, q1_down, q0_up, q0_down)
        .expect("chained uniform draws satisfy the band constraints")
}

/// Builds the homogeneous band kernel: each level moves one step up or down
/// or stays, with level-independent probabilities. At the boundary rows the
/// impossible move's probability folds into the stay probability.
pub fn band_kernel(params: &BandKernelParams, grid: &QualificationGrid) -> DynamicsKernel {
    let n = grid.len();
    let build = |up: f64, down: f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                let up = if i + 1 < n { up } else { 0.0 };
                let down = if i > 0 { down } else { 0.0 };
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
    };
    DynamicsKernel::new(
        grid.clone(),
        build(params.q1_up, params.q1_down),
        build(params.q0_up, params.q0_down),
    )
    .expect("band rows are stochastic")
}

fn exponential_draw(rng: &mut ChaCha8Rng) -> f64 {
    let mut u: f64 = rng.gen();
    while u == 0.0 {
        u = rng.gen();
    }
    -math::ln(u)
}

/// Fully random kernel: every row is drawn uniformly from the interior of
/// the simplex (normalized exponential draws), so all entries are strictly
/// positive.
pub fn random_kernel(seed: u64, grid: &QualificationGrid) -> DynamicsKernel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let mut draw_matrix = || -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..n).map(|_| exponential_draw(&mut rng)).collect();
                let sum: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / sum).collect()
            })
            .collect()
    };
    let q_selected = draw_matrix();
    let q_rejected = draw_matrix();
    DynamicsKernel::new(grid.clone(), q_selected, q_rejected)
        .expect("normalized rows are stochastic")
}

/// Adds independent `N(0, sigma^2)` noise to every transition probability,
/// takes absolute values, and renormalizes each row. A row that sums to zero
/// after perturbation (possible only on a measure-zero event) has its noise
/// redrawn.
pub fn perturb_kernel(kernel: &DynamicsKernel, sigma: f64, seed: u64) -> DynamicsKernel {
    assert!(sigma >= 0.0, "noise level must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("finite nonnegative sigma");
    let mut perturb_matrix = |matrix: &[Vec<f64>]| -> Vec<Vec<f64>> {
        matrix
            .iter()
            .map(|row| loop {
                let perturbed: Vec<f64> = row
                    .iter()
                    .map(|&p| math::abs(p + noise.sample(&mut rng)))
                    .collect();
                let sum: f64 = perturbed.iter().sum();
                if sum > 0.0 {
                    break perturbed.into_iter().map(|x| x / sum).collect();
                }
            })
            .collect()
    };
    let q_selected = perturb_matrix(kernel.matrix(crate::dynamics::Decision::Selected));
    let q_rejected = perturb_matrix(kernel.matrix(crate::dynamics::Decision::Rejected));
    DynamicsKernel::new(kernel.grid().clone(), q_selected, q_rejected)
        .expect("renormalized rows are stochastic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{check_birth_death, Decision};

    fn grid(n: usize) -> QualificationGrid {
        let values: Vec<f64> = (0..n)
            .map(|i| i as f64 - (n as f64 - 1.0) / 2.0 - 0.25)
            .collect();
        QualificationGrid::new(values).unwrap()
    }

    #[test]
    fn sampled_params_satisfy_constraints() {
        for seed in 0..200 {
            let p = sample_band_params(seed);
            assert!(p.q1_up + p.q1_down <= 1.0);
            assert!(p.q0_up + p.q0_down <= 1.0);
            assert!(p.q0_down >= p.q1_down);
            assert!(p.q1_up >= p.q0_up);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_band_params(12345), sample_band_params(12345));
        let g = grid(4);
        assert_eq!(random_kernel(7, &g), random_kernel(7, &g));
        let base = random_kernel(7, &g);
        assert_eq!(perturb_kernel(&base, 0.3, 9), perturb_kernel(&base, 0.3, 9));
    }

    #[test]
    fn q1_up_mean_matches_uniform() {
        let mean: f64 =
            (0..10_000).map(|seed| sample_band_params(seed).q1_up).sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn band_kernel_rows() {
        let params = BandKernelParams::new(0.3, 0.1, 0.2, 0.4).unwrap();
        let kernel = band_kernel(&params, &grid(3));
        let sel = kernel.matrix(Decision::Selected);
        assert_eq!(sel[1], vec![0.1, 0.6, 0.3]);
        // Top boundary folds the up-move into the stay probability.
        assert_eq!(sel[2][1], 0.1);
        assert_eq!(sel[2][2], 0.9);
        // Bottom boundary folds the down-move.
        assert_eq!(sel[0][0], 0.7);
        assert_eq!(sel[0][1], 0.3);
        let rej = kernel.matrix(Decision::Rejected);
        assert_eq!(rej[1], vec![0.4, 1.0 - 0.2 - 0.4, 0.2]);
    }

    #[test]
    fn band_kernels_pass_birth_death_check() {
        for seed in 0..50 {
            let params = sample_band_params(seed);
            if [params.q1_up, params.q1_down, params.q0_up, params.q0_down].contains(&0.0) {
                continue;
            }
            let kernel = band_kernel(&params, &grid(5));
            let check = check_birth_death(&kernel);
            assert!(check.band_ok && check.monotone_ok && check.unique_stationary);
        }
    }

    #[test]
    fn random_kernel_rows_are_interior_points_of_the_simplex() {
        let kernel = random_kernel(42, &grid(5));
        for decision in [Decision::Selected, Decision::Rejected] {
            for row in kernel.matrix(decision) {
                assert!(row.iter().all(|&p| p > 0.0));
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_noise_perturbation_is_identity_up_to_normalization() {
        let g = grid(3);
        let base = random_kernel(3, &g);
        let same = perturb_kernel(&base, 0.0, 11);
        for decision in [Decision::Selected, Decision::Rejected] {
            for (row, orig) in same.matrix(decision).iter().zip(base.matrix(decision)) {
                for (&a, &b) in row.iter().zip(orig) {
                    assert!((a - b).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn perturbed_rows_are_normalized() {
        let g = grid(4);
        let base = random_kernel(5, &g);
        for seed in 0..10 {
            let perturbed = perturb_kernel(&base, 0.3162, seed);
            for decision in [Decision::Selected, Decision::Rejected] {
                for row in perturbed.matrix(decision) {
                    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    assert!(row.iter().all(|&p| p >= 0.0));
                }
            }
        }
    }

    #[test]
    fn rejects_inconsistent_params() {
        assert!(matches!(
            BandKernelParams::new(0.3, 0.5, 0.2, 0.4),
            Err(GenError::DownMoveOrder { .. })
        ));
        assert!(matches!(
            BandKernelParams::new(0.2, 0.1, 0.3, 0.4),
            Err(GenError::UpMoveOrder { .. })
        ));
        assert!(matches!(
            BandKernelParams::new(0.7, 0.4, 0.2, 0.5),
            Err(GenError::RowOverflow { selected: true, .. })
        ));
    }
}
