//! Population evolution under myopic re-optimization.
//!
//! Qualifications change between steps according to a time-homogeneous
//! kernel `q(y|y', d)` that depends on the current level and the selection
//! decision but not on group membership. At every step the institution
//! re-solves the penalized selection problem on the current state, so a
//! trajectory is fully determined by the initial state, the kernel, and the
//! penalty; the solver's deterministic tie-break resolves the freedom among
//! multiple maximizers.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg;
use crate::math;
use crate::penalty::Penalty;
use crate::population::{Group, PopulationState, QualificationGrid, SelectionPolicy};
use crate::solver;

/// Row-sum tolerance for kernel validation.
pub const KERNEL_TOL: f64 = 1e-12;

/// Which decision a transition matrix conditions on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Selected,
    Rejected,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Selected => f.write_str("selected"),
            Decision::Rejected => f.write_str("rejected"),
        }
    }
}

/// Invalid kernel, matrix, or operation input.
#[derive(Clone, Debug, PartialEq)]
pub enum DynamicsError {
    /// Kernel grid does not match the population grid.
    GridMismatch,
    /// A transition matrix is not `n x n` for the grid size `n`.
    MatrixShape { decision: Decision, expected: usize },
    /// A transition probability is negative or non-finite.
    BadEntry { decision: Decision, row: usize, col: usize, value: f64 },
    /// A row does not sum to one.
    RowSum { decision: Decision, row: usize, sum: f64 },
    /// The matrix has support outside the tridiagonal band.
    NotTridiagonal { row: usize, col: usize },
    /// A band transition needed by the closed-form stationary formula is zero.
    ZeroBandEntry { row: usize, col: usize },
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DynamicsError::GridMismatch => {
                f.write_str("kernel grid does not match the population grid")
            }
            DynamicsError::MatrixShape { decision, expected } => {
                write!(f, "{decision} matrix is not {expected} x {expected}")
            }
            DynamicsError::BadEntry { decision, row, col, value } => {
                write!(
                    f,
                    "{decision} matrix entry ({row}, {col}) = {value} is not a probability"
                )
            }
            DynamicsError::RowSum { decision, row, sum } => {
                write!(f, "{decision} matrix row {row} sums to {sum}, expected 1")
            }
            DynamicsError::NotTridiagonal { row, col } => {
                write!(f, "matrix has support outside the band at ({row}, {col})")
            }
            DynamicsError::ZeroBandEntry { row, col } => {
                write!(f, "band transition ({row}, {col}) is zero; formula undefined")
            }
        }
    }
}

impl core::error::Error for DynamicsError {}

/// Conditional transition law `q(y|y', d)` over the qualification grid, one
/// row-stochastic matrix per decision. Rows index the current level `y'`,
/// columns the next level `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsKernel {
    grid: QualificationGrid,
    q_selected: Vec<Vec<f64>>,
    q_rejected: Vec<Vec<f64>>,
}

impl DynamicsKernel {
    pub fn new(
        grid: QualificationGrid,
        q_selected: Vec<Vec<f64>>,
        q_rejected: Vec<Vec<f64>>,
    ) -> Result<Self, DynamicsError> {
        let n = grid.len();
        for (decision, matrix) in [
            (Decision::Selected, &q_selected),
            (Decision::Rejected, &q_rejected),
        ] {
            if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
                return Err(DynamicsError::MatrixShape { decision, expected: n });
            }
            for (i, row) in matrix.iter().enumerate() {
                for (j, &p) in row.iter().enumerate() {
                    if !p.is_finite() || p < 0.0 {
                        return Err(DynamicsError::BadEntry {
                            decision,
                            row: i,
                            col: j,
                            value: p,
                        });
                    }
                }
                let sum: f64 = row.iter().sum();
                if math::abs(sum - 1.0) > KERNEL_TOL {
                    return Err(DynamicsError::RowSum { decision, row: i, sum });
                }
            }
        }
        Ok(DynamicsKernel {
            grid,
            q_selected,
            q_rejected,
        })
    }

    pub fn grid(&self) -> &QualificationGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn matrix(&self, decision: Decision) -> &[Vec<f64>] {
        match decision {
            Decision::Selected => &self.q_selected,
            Decision::Rejected => &self.q_rejected,
        }
    }

    /// Smallest transition probability across both matrices.
    pub fn min_entry(&self) -> f64 {
        self.q_selected
            .iter()
            .chain(self.q_rejected.iter())
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    fn matches_grid(&self, grid: &QualificationGrid) -> bool {
        self.grid.values() == grid.values()
    }
}

/// Advances the population one step under `policy`.
pub fn step(
    state: &PopulationState,
    policy: &SelectionPolicy,
    kernel: &DynamicsKernel,
) -> Result<PopulationState, DynamicsError> {
    if !kernel.matches_grid(state.grid()) {
        return Err(DynamicsError::GridMismatch);
    }
    let n = kernel.len();
    let mut next = [vec![0.0; n], vec![0.0; n]];
    for (slot, group) in [Group::A, Group::B].into_iter().enumerate() {
        let dist = state.dist(group);
        let probs = policy.probs(group);
        assert_eq!(probs.len(), n, "policy length must match grid");
        for i in 0..n {
            let mass = dist[i];
            if mass == 0.0 {
                continue;
            }
            let pi = probs[i];
            for ((acc, &sel), &rej) in next[slot]
                .iter_mut()
                .zip(&kernel.q_selected[i])
                .zip(&kernel.q_rejected[i])
            {
                *acc += mass * (pi * sel + (1.0 - pi) * rej);
            }
        }
        // Guard against accumulated rounding from near-stochastic rows.
        let sum: f64 = next[slot].iter().sum();
        for p in &mut next[slot] {
            *p /= sum;
        }
    }
    let [dist_a, dist_b] = next;
    state
        .with_dists(dist_a, dist_b)
        .map_err(|_| DynamicsError::GridMismatch)
}

/// Sum-of-absolute-differences distance between two mass vectors (range
/// [0, 2] for probability vectors).
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "tv_distance requires equal lengths");
    a.iter().zip(b).map(|(&x, &y)| math::abs(x - y)).sum()
}

/// Metrics of one simulated step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    /// Disparity of the chosen maximizer at time `t`.
    pub delta: f64,
    /// Value of the maximized objective at time `t`.
    pub profit: f64,
    /// Utility component of the objective.
    pub utility: f64,
    /// Inter-group total variation of the qualification distributions.
    pub tv: f64,
}

/// A simulated trajectory: per-step metrics and policies, plus the state the
/// simulation stopped in.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub steps: Vec<StepRecord>,
    pub policies: Vec<SelectionPolicy>,
    pub final_state: PopulationState,
    /// Whether the stop was triggered by the convergence test rather than
    /// the horizon.
    pub converged: bool,
}

/// Runs the myopic dynamic for up to `t_max` steps, re-solving the penalized
/// problem at every step. Stops early once a step changes neither group's
/// distribution by `convergence_tol` or more in total variation.
pub fn simulate(
    initial: &PopulationState,
    kernel: &DynamicsKernel,
    penalty: &Penalty,
    lambda: f64,
    t_max: usize,
    convergence_tol: f64,
) -> Result<TrajectoryRecord, DynamicsError> {
    if !kernel.matches_grid(initial.grid()) {
        return Err(DynamicsError::GridMismatch);
    }
    let mut steps = Vec::new();
    let mut policies = Vec::new();
    let mut state = initial.clone();
    let mut converged = false;
    for t in 0..t_max {
        let solution = solver::solve_penalized(&state, penalty, lambda);
        steps.push(StepRecord {
            t,
            delta: solution.delta,
            profit: solution.objective,
            utility: state.utility(&solution.policy),
            tv: tv_distance(state.dist(Group::A), state.dist(Group::B)),
        });
        let next = step(&state, &solution.policy, kernel)?;
        policies.push(solution.policy);
        let change = tv_distance(next.dist(Group::A), state.dist(Group::A))
            .max(tv_distance(next.dist(Group::B), state.dist(Group::B)));
        state = next;
        if change < convergence_tol {
            converged = true;
            break;
        }
    }
    Ok(TrajectoryRecord {
        steps,
        policies,
        final_state: state,
        converged,
    })
}

/// Worst-case one-step shrink factor of the inter-group total variation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionDiagnostics {
    /// Smallest transition probability across both matrices.
    pub alpha: f64,
    /// `2 (1 - alpha n)`: pathwise bound on `tv_{t+1} / tv_t`.
    pub factor: f64,
    /// Whether the bound forces convergence (`alpha > 1 / (2n)`).
    pub guaranteed: bool,
}

pub fn contraction_factor(kernel: &DynamicsKernel) -> ContractionDiagnostics {
    let alpha = kernel.min_entry();
    let n = kernel.len() as f64;
    ContractionDiagnostics {
        alpha,
        factor: 2.0 * (1.0 - alpha * n),
        guaranteed: alpha > 1.0 / (2.0 * n),
    }
}

/// An equal-distribution fixed point of the dynamic.
#[derive(Clone, Debug)]
pub struct StationaryState {
    /// Qualification distribution shared by both groups.
    pub distribution: Vec<f64>,
    /// The maximizer at that state: select exactly the positive levels.
    pub policy: SelectionPolicy,
}

/// The single-group chain induced by the utility-maximizing policy: positive
/// levels transition via the selected matrix, negative ones via the rejected
/// matrix.
pub fn um_transition_matrix(kernel: &DynamicsKernel) -> Vec<Vec<f64>> {
    kernel
        .grid()
        .values()
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            if y > 0.0 {
                kernel.q_selected[i].clone()
            } else {
                kernel.q_rejected[i].clone()
            }
        })
        .collect()
}

/// All equal-distribution stationary states: one per recurrent class of the
/// utility-maximizing chain, each solving the stationary linear system within
/// its class.
pub fn stationary_candidates(kernel: &DynamicsKernel) -> Vec<StationaryState> {
    let t = um_transition_matrix(kernel);
    let policy = SelectionPolicy::utility_max(kernel.grid());
    recurrent_classes(&t)
        .into_iter()
        .map(|class| StationaryState {
            distribution: class_stationary(&t, &class, kernel.len()),
            policy: policy.clone(),
        })
        .collect()
}

/// Strongly connected components with no outgoing edges, each sorted, in
/// order of their smallest member.
fn recurrent_classes(t: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = t.len();
    let edge = |i: usize, j: usize| t[i][j] > 0.0;

    // Kosaraju: forward finish order, then reverse-graph sweeps.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // Iterative DFS recording finish times.
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(top) = stack.last_mut() {
            let node = top.0;
            let mut child = None;
            while top.1 < n {
                let j = top.1;
                top.1 += 1;
                if edge(node, j) && !seen[j] {
                    child = Some(j);
                    break;
                }
            }
            match child {
                Some(j) => {
                    seen[j] = true;
                    stack.push((j, 0));
                }
                None => {
                    order.push(node);
                    stack.pop();
                }
            }
        }
    }

    let mut component = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &start in order.iter().rev() {
        if component[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = vec![start];
        component[start] = id;
        let mut stack = vec![start];
        #[allow(clippy::needless_range_loop)]
        while let Some(node) = stack.pop() {
            for i in 0..n {
                if edge(i, node) && component[i] == usize::MAX {
                    component[i] = id;
                    members.push(i);
                    stack.push(i);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }

    let mut recurrent: Vec<Vec<usize>> = classes
        .into_iter()
        .filter(|members| {
            members
                .iter()
                .all(|&i| (0..n).all(|j| !edge(i, j) || component[j] == component[i]))
        })
        .collect();
    recurrent.sort_by_key(|members| members[0]);
    recurrent
}

/// Stationary distribution restricted to one recurrent class, embedded into
/// the full grid.
fn class_stationary(t: &[Vec<f64>], class: &[usize], n: usize) -> Vec<f64> {
    let m = class.len();
    // (T^t - I) pi = 0 with the last equation replaced by normalization.
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (row, &j) in class.iter().enumerate() {
        for (col, &i) in class.iter().enumerate() {
            a[row][col] = t[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for entry in &mut a[m - 1] {
        *entry = 1.0;
    }
    b[m - 1] = 1.0;
    let solved = linalg::solve(&mut a, &mut b)
        .expect("stationary system of a recurrent class is nonsingular");
    let mut pi = vec![0.0; n];
    for (&i, &p) in class.iter().zip(&solved) {
        pi[i] = if (-KERNEL_TOL..0.0).contains(&p) { 0.0 } else { p };
    }
    pi
}

/// Results of the slow-change structure check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BirthDeathCheck {
    /// Both matrices have support exactly on `|i - j| <= 1`.
    pub band_ok: bool,
    /// Selection weakly raises up-moves and weakly lowers down-moves.
    pub monotone_ok: bool,
    /// Both conditions together force a unique stationary state.
    pub unique_stationary: bool,
}

pub fn check_birth_death(kernel: &DynamicsKernel) -> BirthDeathCheck {
    let n = kernel.len();
    let band_ok = [Decision::Selected, Decision::Rejected]
        .into_iter()
        .all(|d| {
            let m = kernel.matrix(d);
            (0..n).all(|i| {
                (0..n).all(|j| {
                    if i.abs_diff(j) <= 1 {
                        m[i][j] > 0.0
                    } else {
                        m[i][j] == 0.0
                    }
                })
            })
        });
    let sel = kernel.matrix(Decision::Selected);
    let rej = kernel.matrix(Decision::Rejected);
    let up_ok = (0..n - 1).all(|i| sel[i][i + 1] >= rej[i][i + 1]);
    let down_ok = (1..n).all(|i| sel[i][i - 1] <= rej[i][i - 1]);
    let monotone_ok = up_ok && down_ok;
    BirthDeathCheck {
        band_ok,
        monotone_ok,
        unique_stationary: band_ok && monotone_ok,
    }
}

/// Closed-form stationary distribution of a tridiagonal row-stochastic
/// matrix: `pi(i)` proportional to the product of up/down transition ratios.
/// Must agree with the linear-system solution; the two routes cross-check
/// each other in tests.
pub fn birth_death_stationary(transition: &[Vec<f64>]) -> Result<Vec<f64>, DynamicsError> {
    let n = transition.len();
    for (i, row) in transition.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if i.abs_diff(j) > 1 && p != 0.0 {
                return Err(DynamicsError::NotTridiagonal { row: i, col: j });
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        if transition[i][i + 1] <= 0.0 {
            return Err(DynamicsError::ZeroBandEntry { row: i, col: i + 1 });
        }
        if transition[i + 1][i] <= 0.0 {
            return Err(DynamicsError::ZeroBandEntry { row: i + 1, col: i });
        }
    }
    let mut pi = vec![0.0; n];
    let mut weight = 1.0;
    let mut total = 0.0;
    for i in 0..n {
        if i > 0 {
            weight *= transition[i - 1][i] / transition[i][i - 1];
        }
        pi[i] = weight;
        total += weight;
    }
    for p in &mut pi {
        *p /= total;
    }
    Ok(pi)
}

/// Whether selection can only improve the average qualification:
/// `E[Y_{t+1} | D_t = 1, Y_t = y'] >= y'` for every level `y'`.
pub fn check_growth_condition(kernel: &DynamicsKernel) -> bool {
    let values = kernel.grid().values();
    kernel
        .q_selected
        .iter()
        .zip(values)
        .all(|(row, &y)| row.iter().zip(values).map(|(&q, &target)| q * target).sum::<f64>() >= y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_state() -> PopulationState {
        PopulationState::new(
            QualificationGrid::new(vec![-2.0, -1.0, 2.0]).unwrap(),
            0.5,
            0.5,
            vec![0.3, 0.1, 0.6],
            vec![0.5, 0.1, 0.4],
        )
        .unwrap()
    }

    fn figure_kernel() -> DynamicsKernel {
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

    fn identity_kernel(n: usize) -> DynamicsKernel {
        let values: Vec<f64> = (0..n).map(|i| i as f64 - n as f64 / 2.0 + 0.25).collect();
        let eye: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        DynamicsKernel::new(QualificationGrid::new(values).unwrap(), eye.clone(), eye).unwrap()
    }

    #[test]
    fn rejects_bad_rows() {
        let grid = QualificationGrid::new(vec![-1.0, 1.0]).unwrap();
        let good = vec![vec![0.5, 0.5], vec![0.2, 0.8]];
        let unnormalized = vec![vec![0.6, 0.5], vec![0.2, 0.8]];
        assert!(matches!(
            DynamicsKernel::new(grid.clone(), unnormalized, good.clone()),
            Err(DynamicsError::RowSum { decision: Decision::Selected, row: 0, .. })
        ));
        let negative = vec![vec![1.2, -0.2], vec![0.2, 0.8]];
        assert!(matches!(
            DynamicsKernel::new(grid, good, negative),
            Err(DynamicsError::BadEntry { decision: Decision::Rejected, .. })
        ));
    }

    #[test]
    fn step_matches_hand_computation() {
        let state = example_state();
        let policy = SelectionPolicy::new(vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]).unwrap();
        let next = step(&state, &policy, &figure_kernel()).unwrap();
        let a = next.dist(Group::A);
        assert!((a[0] - 0.31).abs() < 1e-12);
        assert!((a[1] - 0.10).abs() < 1e-12);
        assert!((a[2] - 0.59).abs() < 1e-12);
    }

    #[test]
    fn identity_kernel_keeps_state() {
        let state = example_state();
        let kernel = DynamicsKernel::new(
            state.grid().clone(),
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
        )
        .unwrap();
        let policy = SelectionPolicy::utility_max(state.grid());
        let next = step(&state, &policy, &kernel).unwrap();
        assert_eq!(next.dist(Group::A), state.dist(Group::A));
        assert_eq!(next.dist(Group::B), state.dist(Group::B));
    }

    #[test]
    fn stationary_state_is_fixed_point_of_step() {
        let state = example_state()
            .with_dists(
                vec![1.0 / 3.0, 0.1, 17.0 / 30.0],
                vec![17.0 / 30.0, 0.1, 1.0 / 3.0],
            )
            .unwrap();
        let policy = SelectionPolicy::new(vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]).unwrap();
        let next = step(&state, &policy, &figure_kernel()).unwrap();
        assert!(tv_distance(next.dist(Group::A), state.dist(Group::A)) < 1e-12);
        assert!(tv_distance(next.dist(Group::B), state.dist(Group::B)) < 1e-12);
    }

    #[test]
    fn step_rejects_grid_mismatch() {
        let state = example_state();
        let kernel = identity_kernel(4);
        let policy = SelectionPolicy::utility_max(state.grid());
        assert_eq!(
            step(&state, &policy, &kernel).unwrap_err(),
            DynamicsError::GridMismatch
        );
    }

    #[test]
    fn tv_distance_examples() {
        let state = example_state();
        assert!((tv_distance(state.dist(Group::A), state.dist(Group::B)) - 0.4).abs() < 1e-15);
        assert_eq!(tv_distance(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]), 2.0);
    }

    #[test]
    fn contraction_diagnostics() {
        let d = contraction_factor(&figure_kernel());
        assert_eq!(d.alpha, 0.1);
        assert!((d.factor - 1.4).abs() < 1e-15);
        assert!(!d.guaranteed);

        let uniform = DynamicsKernel::new(
            QualificationGrid::new(vec![-1.0, 1.0]).unwrap(),
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        let d = contraction_factor(&uniform);
        assert_eq!(d.factor, 0.0);
        assert!(d.guaranteed);

        let with_zero = identity_kernel(3);
        let d = contraction_factor(&with_zero);
        assert_eq!(d.alpha, 0.0);
        assert_eq!(d.factor, 2.0);
        assert!(!d.guaranteed);
    }

    #[test]
    fn stationary_candidate_of_figure_kernel() {
        let candidates = stationary_candidates(&figure_kernel());
        assert_eq!(candidates.len(), 1);
        let pi = &candidates[0].distribution;
        assert!((pi[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((pi[1] - 0.1).abs() < 1e-12);
        assert!((pi[2] - 17.0 / 30.0).abs() < 1e-12);
    }

    #[test]
    fn identity_kernel_has_point_mass_candidates() {
        let kernel = identity_kernel(3);
        let candidates = stationary_candidates(&kernel);
        assert_eq!(candidates.len(), 3);
        for (i, candidate) in candidates.iter().enumerate() {
            assert_eq!(candidate.distribution[i], 1.0);
        }
    }

    #[test]
    fn strictly_positive_chain_has_one_candidate() {
        let kernel = figure_kernel();
        assert!(kernel.min_entry() > 0.0);
        assert_eq!(stationary_candidates(&kernel).len(), 1);
    }

    #[test]
    fn birth_death_check_on_figure_kernel_fails_band() {
        let check = check_birth_death(&figure_kernel());
        assert!(!check.band_ok);
        assert!(!check.unique_stationary);
    }

    #[test]
    fn birth_death_stationary_formula() {
        // Symmetric walk: uniform.
        let symmetric = vec![
            vec![0.8, 0.2, 0.0],
            vec![0.2, 0.6, 0.2],
            vec![0.0, 0.2, 0.8],
        ];
        let pi = birth_death_stationary(&symmetric).unwrap();
        for &p in &pi {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }

        // Up-moves twice as likely as down-moves: pi proportional to 1, 2, 4.
        let drift = vec![
            vec![0.8, 0.2, 0.0],
            vec![0.1, 0.7, 0.2],
            vec![0.0, 0.1, 0.9],
        ];
        let pi = birth_death_stationary(&drift).unwrap();
        assert!((pi[0] - 1.0 / 7.0).abs() < 1e-12);
        assert!((pi[1] - 2.0 / 7.0).abs() < 1e-12);
        assert!((pi[2] - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn birth_death_stationary_rejects_bad_support() {
        let wide = vec![
            vec![0.8, 0.1, 0.1],
            vec![0.1, 0.8, 0.1],
            vec![0.1, 0.1, 0.8],
        ];
        assert!(matches!(
            birth_death_stationary(&wide),
            Err(DynamicsError::NotTridiagonal { .. })
        ));
        let stuck = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.1, 0.7, 0.2],
            vec![0.0, 0.1, 0.9],
        ];
        assert!(matches!(
            birth_death_stationary(&stuck),
            Err(DynamicsError::ZeroBandEntry { row: 0, col: 1 })
        ));
    }

    #[test]
    fn growth_condition_examples() {
        // Figure kernel: getting selected at -1 drags the average to -1.5.
        assert!(!check_growth_condition(&figure_kernel()));
        // Identity transitions keep the level exactly.
        assert!(check_growth_condition(&identity_kernel(3)));
        // Everything moves to the top level.
        let grid = QualificationGrid::new(vec![-1.0, 1.0]).unwrap();
        let to_top = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
        let anything = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let kernel = DynamicsKernel::new(grid, to_top, anything).unwrap();
        assert!(check_growth_condition(&kernel));
    }

    #[test]
    fn simulate_records_and_stops() {
        let record = simulate(
            &example_state(),
            &figure_kernel(),
            &Penalty::Linear,
            0.7,
            1000,
            1e-12,
        )
        .unwrap();
        assert!(record.converged);
        assert!(record.steps.len() < 1000);
        assert_eq!(record.steps[0].t, 0);
        assert!((record.steps[0].delta - 0.1).abs() < 1e-12);
        let last = record.steps.last().unwrap();
        assert!((last.delta - 4.0 / 30.0).abs() < 1e-9);
    }
}
