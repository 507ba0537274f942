//! Exact solution of the penalized selection problem.
//!
//! The problem is rewritten in terms of forgone selection mass: each unit of
//! mass moved off the utility-maximizing policy shrinks the disparity by one
//! unit and costs `p(c) * |y|` in utility, either by skipping a positively
//! qualified member of the advantaged group or by selecting a negatively
//! qualified member of the disadvantaged one. Greedily spending the cheapest
//! mass first yields a convex piecewise-linear cost curve, so the whole
//! problem collapses to maximizing a concave function of a single scalar:
//! the total reallocated mass `Z` in `[0, delta_um]`.
//!
//! The one-dimensional maximum is located exactly: the objective is evaluated
//! at every cost-curve breakpoint and, inside each linear segment, at the
//! stationarity crossing found by bisecting the one-sided derivatives. Ties
//! are resolved toward the largest `Z` (the most parity), which makes the
//! disparity-versus-lambda curve nonincreasing.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::penalty::Penalty;
use crate::population::{Group, PopulationState, SelectionPolicy};

/// Objective values within this window count as ties.
pub const TIE_TOL: f64 = 1e-12;
/// Absolute tolerance for the per-segment bisection on `Z`.
pub const BISECT_TOL: f64 = 1e-12;
/// Tolerance used by the policy structure checker.
pub const POLICY_TOL: f64 = 1e-9;

/// The requested quantity is undefined because the utility-maximizing policy
/// already has zero disparity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegenerateDisparity;

impl fmt::Display for DegenerateDisparity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("utility-maximizing disparity is zero; threshold undefined")
    }
}

impl core::error::Error for DegenerateDisparity {}

/// One unit-cost source of reallocatable selection mass.
///
/// Advantaged-group items carry positive qualifications (mass forgone),
/// disadvantaged-group items carry negative ones (mass added).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionItem {
    pub qualification: f64,
    pub group: Group,
    /// `p(c) * |y|`: utility lost per unit of reallocated mass.
    pub unit_cost: f64,
    /// `p(y|c)`: the most mass this item can absorb.
    pub capacity: f64,
    /// Index of `qualification` in the grid.
    pub grid_index: usize,
}

/// Convex piecewise-linear cumulative cost of greedily reallocating mass.
#[derive(Clone, Debug)]
pub struct CostCurve {
    breakpoints: Vec<(f64, f64)>,
    segment_slopes: Vec<f64>,
}

impl CostCurve {
    /// Accumulates items in their (sorted) order.
    pub fn from_items(items: &[ReductionItem]) -> CostCurve {
        let mut breakpoints = vec![(0.0, 0.0)];
        let mut segment_slopes = Vec::with_capacity(items.len());
        let mut mass = 0.0;
        let mut cost = 0.0;
        for item in items {
            mass += item.capacity;
            cost += item.capacity * item.unit_cost;
            breakpoints.push((mass, cost));
            segment_slopes.push(item.unit_cost);
        }
        CostCurve {
            breakpoints,
            segment_slopes,
        }
    }

    /// `(Z_k, C(Z_k))` pairs, starting at the origin.
    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// Nondecreasing per-segment unit costs.
    pub fn segment_slopes(&self) -> &[f64] {
        &self.segment_slopes
    }

    /// Total reallocatable mass.
    pub fn total_mass(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |&(m, _)| m)
    }

    /// `C(z)` by linear interpolation; `z` past the end clamps to the final
    /// cost (callers never exceed it by more than rounding).
    pub fn cost(&self, z: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&(m, _)| m <= z);
        if idx == 0 {
            return 0.0;
        }
        let k = idx - 1;
        let (m_k, c_k) = self.breakpoints[k];
        match self.segment_slopes.get(k) {
            Some(&slope) => c_k + slope * (z - m_k),
            None => c_k,
        }
    }
}

/// Result of the exact solve: the reallocation, its disparity, the objective,
/// and the reconstructed per-group policy.
#[derive(Clone, Debug)]
pub struct StaticSolution {
    /// Mass given to each reduction item, in deterministic item order, with
    /// group labels in the caller's original orientation.
    pub z_allocation: Vec<ZAllocation>,
    /// Total reallocated mass `Z`.
    pub total_mass: f64,
    /// Resulting disparity `delta_um - Z`.
    pub delta: f64,
    /// Objective value `u_um - C(Z) - lambda * g(delta)`.
    pub objective: f64,
    /// Optimal policy, in the caller's original orientation.
    pub policy: SelectionPolicy,
    /// Whether group labels were exchanged internally to put the advantaged
    /// group first.
    pub swapped: bool,
}

/// One entry of the reallocation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZAllocation {
    pub qualification: f64,
    pub group: Group,
    pub mass: f64,
    pub capacity: f64,
    pub unit_cost: f64,
}

/// Utility, disparity, and policy of the unpenalized optimum.
#[derive(Clone, Debug)]
pub struct UtilityMaxSolution {
    /// `u_um = E[Y_+]`.
    pub utility: f64,
    /// `delta_um = Pr(Y>0|A) - Pr(Y>0|B)`.
    pub delta: f64,
    /// Select exactly the positive levels.
    pub policy: SelectionPolicy,
}

/// Relabels groups so that group A has the larger positive-qualification
/// rate. Returns the reoriented state and whether a swap occurred; ties keep
/// the original orientation.
pub fn normalize_orientation(state: &PopulationState) -> (PopulationState, bool) {
    if state.positive_rate(Group::A) >= state.positive_rate(Group::B) {
        (state.clone(), false)
    } else {
        (state.swap_groups(), true)
    }
}

/// The lambda = 0 solution. Expects normalized orientation, under which the
/// returned disparity is nonnegative.
pub fn utility_max(state: &PopulationState) -> UtilityMaxSolution {
    let policy = SelectionPolicy::utility_max(state.grid());
    let utility = state.utility(&policy);
    let delta = state.positive_rate(Group::A) - state.positive_rate(Group::B);
    debug_assert!(delta >= 0.0, "utility_max expects normalized orientation");
    UtilityMaxSolution {
        utility,
        delta,
        policy,
    }
}

/// Enumerates the reallocatable items of a normalized state, sorted by unit
/// cost ascending with ties broken group A first, then by ascending
/// qualification. Requires `delta_um > 0`, which guarantees the set is
/// non-empty.
pub fn reduction_items(state: &PopulationState) -> Vec<ReductionItem> {
    let mut items = Vec::new();
    for (i, &y) in state.grid().values().iter().enumerate() {
        if y > 0.0 {
            let capacity = state.dist(Group::A)[i];
            if capacity > 0.0 {
                items.push(ReductionItem {
                    qualification: y,
                    group: Group::A,
                    unit_cost: state.weight(Group::A) * y,
                    capacity,
                    grid_index: i,
                });
            }
        } else {
            let capacity = state.dist(Group::B)[i];
            if capacity > 0.0 {
                items.push(ReductionItem {
                    qualification: y,
                    group: Group::B,
                    unit_cost: state.weight(Group::B) * -y,
                    capacity,
                    grid_index: i,
                });
            }
        }
    }
    items.sort_by(|p, q| {
        p.unit_cost
            .total_cmp(&q.unit_cost)
            .then(p.group.cmp(&q.group))
            .then(p.qualification.total_cmp(&q.qualification))
    });
    assert!(
        !items.is_empty(),
        "reduction set is empty; callers must ensure delta_um > 0"
    );
    items
}

/// Everything solve-time operations need, computed once per call.
struct Reduction {
    state: PopulationState,
    swapped: bool,
    u_um: f64,
    delta_um: f64,
    items: Vec<ReductionItem>,
    curve: CostCurve,
}

fn reduce(state: &PopulationState) -> Reduction {
    let (normalized, swapped) = normalize_orientation(state);
    let um = utility_max(&normalized);
    let items = if um.delta > 0.0 {
        reduction_items(&normalized)
    } else {
        Vec::new()
    };
    let curve = CostCurve::from_items(&items);
    Reduction {
        state: normalized,
        swapped,
        u_um: um.utility,
        delta_um: um.delta,
        items,
        curve,
    }
}

/// Smallest unit cost over the reduction set: the effectiveness threshold.
///
/// Errors when `delta_um = 0`: the threshold is undefined and any penalty is
/// irrelevant to effectiveness.
pub fn beta_e(state: &PopulationState) -> Result<f64, DegenerateDisparity> {
    let r = reduce(state);
    beta_e_of(&r)
}

fn beta_e_of(r: &Reduction) -> Result<f64, DegenerateDisparity> {
    if r.delta_um == 0.0 {
        return Err(DegenerateDisparity);
    }
    Ok(r.items
        .iter()
        .map(|it| it.unit_cost)
        .fold(f64::INFINITY, f64::min))
}

/// Whether `(penalty, lambda)` forces every optimal policy strictly below the
/// unpenalized disparity: `beta_e < lambda * g'_-(delta_um)`, strict.
pub fn is_effective(
    state: &PopulationState,
    penalty: &Penalty,
    lambda: f64,
) -> Result<bool, DegenerateDisparity> {
    let r = reduce(state);
    let beta = beta_e_of(&r)?;
    Ok(beta < lambda * penalty.left_derivative(r.delta_um))
}

/// Infimum of lambda values that are effective. The infimum itself is not
/// effective (the comparison is strict).
pub fn min_lambda_effective(
    state: &PopulationState,
    penalty: &Penalty,
) -> Result<f64, DegenerateDisparity> {
    let r = reduce(state);
    let beta = beta_e_of(&r)?;
    let slope = penalty.left_derivative(r.delta_um);
    if slope > 0.0 {
        Ok(beta / slope)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Best policy under the hard demographic-parity constraint: greedy-fills the
/// cheapest items to total mass exactly `delta_um`.
pub fn solve_dp_constrained(state: &PopulationState) -> StaticSolution {
    let r = reduce(state);
    let objective = r.u_um - r.curve.cost(r.delta_um);
    assemble(&r, r.delta_um, objective)
}

/// Largest unit cost carrying positive mass in the parity-constrained greedy
/// fill: the full-satisfaction threshold. The value does not depend on how equal-cost
/// items are ordered: the fill boundary cost is the same under any of them.
pub fn beta_s(state: &PopulationState) -> Result<f64, DegenerateDisparity> {
    let r = reduce(state);
    beta_s_of(&r)
}

fn beta_s_of(r: &Reduction) -> Result<f64, DegenerateDisparity> {
    if r.delta_um == 0.0 {
        return Err(DegenerateDisparity);
    }
    let mut remaining = r.delta_um;
    let mut max_cost = 0.0;
    for item in &r.items {
        if remaining <= 0.0 {
            break;
        }
        max_cost = item.unit_cost;
        remaining -= item.capacity.min(remaining);
    }
    Ok(max_cost)
}

/// Whether `(penalty, lambda)` admits an optimal policy with zero disparity:
/// `beta_s <= lambda * g'_+(0)`, non-strict. Vacuously true when
/// `delta_um = 0`.
pub fn is_fully_satisfactory(state: &PopulationState, penalty: &Penalty, lambda: f64) -> bool {
    let r = reduce(state);
    match beta_s_of(&r) {
        Err(DegenerateDisparity) => true,
        Ok(beta) => beta <= lambda * penalty.right_derivative(0.0),
    }
}

/// Smallest lambda that is fully satisfactory (this one is, the comparison
/// being non-strict), or infinity when `g'_+(0) = 0`.
pub fn min_lambda_satisfactory(
    state: &PopulationState,
    penalty: &Penalty,
) -> Result<f64, DegenerateDisparity> {
    let r = reduce(state);
    let beta = beta_s_of(&r)?;
    let slope = penalty.right_derivative(0.0);
    if slope > 0.0 {
        Ok(beta / slope)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Exactly maximizes `E[DY] - lambda * g(delta)` over all per-(group, level)
/// selection policies.
pub fn solve_penalized(state: &PopulationState, penalty: &Penalty, lambda: f64) -> StaticSolution {
    let r = reduce(state);
    if r.delta_um == 0.0 {
        let objective = r.u_um - lambda * penalty.eval(0.0);
        return assemble(&r, 0.0, objective);
    }

    let objective_at = |z: f64| r.u_um - r.curve.cost(z) - lambda * penalty.eval(r.delta_um - z);
    // The derivative of -lambda * g(delta_um - z) from the right in z uses
    // the left derivative of g, and vice versa.
    let rising_at = |z: f64, slope: f64| lambda * penalty.left_derivative(r.delta_um - z) > slope;

    let mut candidates = vec![0.0, r.delta_um];
    for &(mass, _) in r.curve.breakpoints() {
        if mass > 0.0 && mass < r.delta_um {
            candidates.push(mass);
        }
    }
    for (k, &slope) in r.curve.segment_slopes().iter().enumerate() {
        let lo = r.curve.breakpoints()[k].0;
        let hi = r.curve.breakpoints()[k + 1].0.min(r.delta_um);
        if lo >= hi {
            break;
        }
        // The objective is concave: if it still rises at the right end or
        // already falls at the left end, the segment max is an endpoint and
        // those are candidates already.
        let falls_at_hi = lambda * penalty.right_derivative(r.delta_um - hi) < slope;
        if !rising_at(lo, slope) || !falls_at_hi {
            continue;
        }
        let (mut a, mut b) = (lo, hi);
        while b - a > BISECT_TOL {
            let mid = 0.5 * (a + b);
            if rising_at(mid, slope) {
                a = mid;
            } else {
                b = mid;
            }
        }
        candidates.push(0.5 * (a + b));
    }

    let best_value = candidates
        .iter()
        .map(|&z| objective_at(z))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut best_z = f64::NEG_INFINITY;
    for &z in &candidates {
        if z > best_z && objective_at(z) >= best_value - TIE_TOL {
            best_z = z;
        }
    }

    let objective = objective_at(best_z);
    assemble(&r, best_z, objective)
}

/// Brute-force check of the one-dimensional search: evaluates the objective
/// on the grid `{0, step, 2 step, ...} ∪ {delta_um}` with greedy allocation
/// at each point and returns the best value found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSolution {
    pub objective: f64,
    pub delta: f64,
}

pub fn oracle_solve(
    state: &PopulationState,
    penalty: &Penalty,
    lambda: f64,
    step: f64,
) -> OracleSolution {
    assert!(step > 0.0, "oracle step must be positive");
    let r = reduce(state);
    if r.delta_um == 0.0 {
        return OracleSolution {
            objective: r.u_um,
            delta: 0.0,
        };
    }
    let breakpoints = r.curve.breakpoints();
    let slopes = r.curve.segment_slopes();
    let mut segment = 0;
    let mut best_value = f64::NEG_INFINITY;
    let mut best_z = 0.0;
    let mut k = 0u64;
    loop {
        let z = (k as f64 * step).min(r.delta_um);
        while segment + 1 < slopes.len() && breakpoints[segment + 1].0 <= z {
            segment += 1;
        }
        let (m, c) = breakpoints[segment];
        let cost = c + slopes[segment] * (z - m);
        let value = r.u_um - cost - lambda * penalty.eval(r.delta_um - z);
        if value > best_value || (value >= best_value - TIE_TOL && z > best_z) {
            if value > best_value {
                best_value = value;
            }
            best_z = z;
        }
        if z >= r.delta_um {
            break;
        }
        k += 1;
    }
    OracleSolution {
        objective: best_value,
        delta: r.delta_um - best_z,
    }
}

fn assemble(r: &Reduction, z_target: f64, objective: f64) -> StaticSolution {
    let grid = r.state.grid();
    let n = grid.len();

    let mut allocation = Vec::with_capacity(r.items.len());
    let mut z_a = vec![0.0; n];
    let mut z_b = vec![0.0; n];
    let mut remaining = z_target;
    for item in &r.items {
        let take = item.capacity.min(remaining);
        remaining -= take;
        allocation.push(ZAllocation {
            qualification: item.qualification,
            group: item.group,
            mass: take,
            capacity: item.capacity,
            unit_cost: item.unit_cost,
        });
        match item.group {
            Group::A => z_a[item.grid_index] = take,
            Group::B => z_b[item.grid_index] = take,
        }
    }

    // Policy reconstruction: group A forgoes mass on positive levels, group B
    // gains mass on negative ones. Zero-mass levels default to the
    // utility-maximizing choice.
    let mut prob_a = Vec::with_capacity(n);
    let mut prob_b = Vec::with_capacity(n);
    for (i, &y) in grid.values().iter().enumerate() {
        if y > 0.0 {
            let mass = r.state.dist(Group::A)[i];
            prob_a.push(if mass > 0.0 { 1.0 - z_a[i] / mass } else { 1.0 });
            prob_b.push(1.0);
        } else {
            let mass = r.state.dist(Group::B)[i];
            prob_a.push(0.0);
            prob_b.push(if mass > 0.0 { z_b[i] / mass } else { 0.0 });
        }
    }
    let mut policy =
        SelectionPolicy::new(prob_a, prob_b).expect("reconstructed policy is within [0, 1]");

    if r.swapped {
        policy = policy.swap_groups();
        for entry in &mut allocation {
            entry.group = entry.group.other();
        }
    }

    StaticSolution {
        z_allocation: allocation,
        total_mass: z_target,
        delta: r.delta_um - z_target,
        objective,
        policy,
        swapped: r.swapped,
    }
}

/// One structural defect of a policy relative to what optimal policies must
/// look like.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolicyViolation {
    /// Selection probability decreases with qualification inside a group.
    NotMonotone {
        group: Group,
        lower_index: usize,
        upper_index: usize,
    },
    /// More than one positive-mass level with a fractional probability.
    MultipleFractional {
        group: Group,
        first_index: usize,
        second_index: usize,
    },
    /// The advantaged group has the smaller selection rate.
    AdvantagedRateLower { rate_a: f64, rate_b: f64 },
    /// Group A selects a negatively qualified level with positive mass.
    NegativeLevelSelected { index: usize, probability: f64 },
    /// Group B rejects a positively qualified level with positive mass.
    PositiveLevelRejected { index: usize, probability: f64 },
}

impl fmt::Display for PolicyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PolicyViolation::NotMonotone {
                group,
                lower_index,
                upper_index,
            } => write!(
                f,
                "group {group} selection probability decreases from index {lower_index} to {upper_index}"
            ),
            PolicyViolation::MultipleFractional {
                group,
                first_index,
                second_index,
            } => write!(
                f,
                "group {group} has fractional probabilities at indices {first_index} and {second_index}"
            ),
            PolicyViolation::AdvantagedRateLower { rate_a, rate_b } => write!(
                f,
                "advantaged selection rate {rate_a} is below disadvantaged rate {rate_b}"
            ),
            PolicyViolation::NegativeLevelSelected { index, probability } => write!(
                f,
                "group A selects negative level {index} with probability {probability}"
            ),
            PolicyViolation::PositiveLevelRejected { index, probability } => write!(
                f,
                "group B rejects positive level {index} (probability {probability})"
            ),
        }
    }
}

/// Checks the structural facts every optimal policy satisfies, on a state in
/// normalized orientation. Zero-mass levels are ignored. Returns all
/// violations found (empty means structurally consistent).
pub fn check_policy_structure(
    state: &PopulationState,
    policy: &SelectionPolicy,
) -> Vec<PolicyViolation> {
    let tol = POLICY_TOL;
    let mut violations = Vec::new();

    for group in [Group::A, Group::B] {
        let probs = policy.probs(group);
        let massive: Vec<usize> = (0..state.grid().len())
            .filter(|&i| state.dist(group)[i] > 0.0)
            .collect();
        for pair in massive.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            if probs[hi] < probs[lo] - tol {
                violations.push(PolicyViolation::NotMonotone {
                    group,
                    lower_index: lo,
                    upper_index: hi,
                });
            }
        }
        let fractional: Vec<usize> = massive
            .iter()
            .copied()
            .filter(|&i| probs[i] > tol && probs[i] < 1.0 - tol)
            .collect();
        if fractional.len() > 1 {
            violations.push(PolicyViolation::MultipleFractional {
                group,
                first_index: fractional[0],
                second_index: fractional[1],
            });
        }
    }

    let rate_a = state.selection_rate(Group::A, policy);
    let rate_b = state.selection_rate(Group::B, policy);
    if rate_a < rate_b - tol {
        violations.push(PolicyViolation::AdvantagedRateLower { rate_a, rate_b });
    }

    for (i, &y) in state.grid().values().iter().enumerate() {
        if y < 0.0 && state.dist(Group::A)[i] > 0.0 && policy.probs(Group::A)[i] > tol {
            violations.push(PolicyViolation::NegativeLevelSelected {
                index: i,
                probability: policy.probs(Group::A)[i],
            });
        }
        if y > 0.0 && state.dist(Group::B)[i] > 0.0 && policy.probs(Group::B)[i] < 1.0 - tol {
            violations.push(PolicyViolation::PositiveLevelRejected {
                index: i,
                probability: policy.probs(Group::B)[i],
            });
        }
    }

    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::QualificationGrid;

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

    #[test]
    fn orientation_keeps_example_and_swaps_its_mirror() {
        let state = example_state();
        let (kept, swapped) = normalize_orientation(&state);
        assert!(!swapped);
        assert_eq!(kept, state);

        let mirrored = state.swap_groups();
        let (back, swapped) = normalize_orientation(&mirrored);
        assert!(swapped);
        assert_eq!(back, state);
    }

    #[test]
    fn orientation_tie_is_kept() {
        let state = example_state()
            .with_dists(vec![0.3, 0.1, 0.6], vec![0.3, 0.1, 0.6])
            .unwrap();
        let (_, swapped) = normalize_orientation(&state);
        assert!(!swapped);
    }

    #[test]
    fn utility_max_example_values() {
        let um = utility_max(&example_state());
        assert!((um.utility - 1.0).abs() < 1e-15);
        assert!((um.delta - 0.2).abs() < 1e-15);
        assert_eq!(um.policy.probs(Group::A), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn utility_max_identical_groups_has_zero_delta() {
        let state = example_state()
            .with_dists(vec![0.5, 0.1, 0.4], vec![0.5, 0.1, 0.4])
            .unwrap();
        assert_eq!(utility_max(&state).delta, 0.0);
    }

    #[test]
    fn reduction_items_sorted_with_group_a_tiebreak() {
        let items = reduction_items(&example_state());
        assert_eq!(items.len(), 3);
        assert_eq!(
            (items[0].qualification, items[0].group, items[0].unit_cost, items[0].capacity),
            (-1.0, Group::B, 0.5, 0.1)
        );
        assert_eq!((items[1].qualification, items[1].group), (2.0, Group::A));
        assert_eq!(items[1].unit_cost, 1.0);
        assert_eq!((items[2].qualification, items[2].group), (-2.0, Group::B));
        assert_eq!(items[2].unit_cost, 1.0);
    }

    #[test]
    fn reduction_items_two_level_instance() {
        let state = PopulationState::new(
            QualificationGrid::new(vec![-1.0, 1.0]).unwrap(),
            0.5,
            0.5,
            vec![0.4, 0.6],
            vec![0.6, 0.4],
        )
        .unwrap();
        let items = reduction_items(&state);
        assert_eq!(items.len(), 2);
        assert!(items.iter().all(|it| it.unit_cost == 0.5));
        assert_eq!(beta_e(&state).unwrap(), 0.5);
    }

    #[test]
    fn reduction_items_exclude_zero_mass_levels() {
        let state = PopulationState::new(
            QualificationGrid::new(vec![-2.0, -1.0, 1.0]).unwrap(),
            0.5,
            0.5,
            vec![0.1, 0.1, 0.8],
            vec![0.5, 0.0, 0.5],
        )
        .unwrap();
        let items = reduction_items(&state);
        // The zero-mass (-1, B) level is not a member.
        assert_eq!(items.len(), 2);
        assert!(items
            .iter()
            .all(|it| (it.qualification, it.group) != (-1.0, Group::B)));
    }

    #[test]
    fn beta_thresholds_on_example() {
        let state = example_state();
        assert_eq!(beta_e(&state).unwrap(), 0.5);
        assert_eq!(beta_s(&state).unwrap(), 1.0);
    }

    #[test]
    fn beta_e_with_lopsided_weights() {
        // The small group's unit costs scale with its weight.
        let state = PopulationState::new(
            QualificationGrid::new(vec![-1.0, 1.0, 2.0]).unwrap(),
            0.9,
            0.1,
            vec![0.2, 0.5, 0.3],
            vec![0.6, 0.3, 0.1],
        )
        .unwrap();
        assert!((beta_e(&state).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn beta_thresholds_error_on_zero_delta() {
        let state = example_state()
            .with_dists(vec![0.5, 0.1, 0.4], vec![0.5, 0.1, 0.4])
            .unwrap();
        assert_eq!(beta_e(&state), Err(DegenerateDisparity));
        assert_eq!(beta_s(&state), Err(DegenerateDisparity));
    }

    #[test]
    fn effectiveness_thresholds() {
        let state = example_state();
        assert!(!is_effective(&state, &Penalty::Linear, 0.5).unwrap());
        assert!(is_effective(&state, &Penalty::Linear, 0.7).unwrap());
        // Quadratic: the bias level enters the threshold.
        assert!(!is_effective(&state, &Penalty::quadratic(), 1.2).unwrap());
        assert!(is_effective(&state, &Penalty::quadratic(), 1.3).unwrap());
        assert!((min_lambda_effective(&state, &Penalty::Linear).unwrap() - 0.5).abs() < 1e-15);
        assert!((min_lambda_effective(&state, &Penalty::quadratic()).unwrap() - 1.25).abs() < 1e-12);
        assert_eq!(
            min_lambda_effective(&state, &Penalty::Hinge(0.25)).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn full_satisfaction_thresholds() {
        let state = example_state();
        assert!(is_fully_satisfactory(&state, &Penalty::Linear, 1.5));
        // Non-strict boundary.
        assert!(is_fully_satisfactory(&state, &Penalty::Linear, 1.0));
        assert!(!is_fully_satisfactory(&state, &Penalty::Linear, 0.99));
        // Quadratic can never reach parity at finite lambda.
        assert!(!is_fully_satisfactory(&state, &Penalty::quadratic(), 1e12));
        assert_eq!(
            min_lambda_satisfactory(&state, &Penalty::quadratic()).unwrap(),
            f64::INFINITY
        );
        assert_eq!(min_lambda_satisfactory(&state, &Penalty::Linear).unwrap(), 1.0);
        assert_eq!(
            min_lambda_satisfactory(&state, &Penalty::Exponential).unwrap(),
            1.0
        );
        // Degenerate case is vacuously satisfied.
        let flat = state
            .with_dists(vec![0.5, 0.1, 0.4], vec![0.5, 0.1, 0.4])
            .unwrap();
        assert!(is_fully_satisfactory(&flat, &Penalty::Linear, 0.0));
    }

    #[test]
    fn dp_constrained_example() {
        let solution = solve_dp_constrained(&example_state());
        assert!((solution.objective - 0.85).abs() < 1e-12);
        assert!(solution.delta.abs() < 1e-15);
        assert!((solution.total_mass - 0.2).abs() < 1e-15);
        // Fill order: all of the cost-0.5 item, then 0.1 of the cost-1.0
        // group A item.
        assert!((solution.z_allocation[0].mass - 0.1).abs() < 1e-15);
        assert!((solution.z_allocation[1].mass - 0.1).abs() < 1e-15);
        assert_eq!(solution.z_allocation[1].group, Group::A);
        assert_eq!(solution.z_allocation[2].mass, 0.0);
    }

    #[test]
    fn dp_constrained_identical_groups_is_utility_max() {
        let state = example_state()
            .with_dists(vec![0.5, 0.1, 0.4], vec![0.5, 0.1, 0.4])
            .unwrap();
        let solution = solve_dp_constrained(&state);
        assert!(solution.z_allocation.is_empty());
        assert_eq!(solution.delta, 0.0);
        assert!((solution.objective - utility_max(&state).utility).abs() < 1e-15);
    }

    #[test]
    fn solve_penalized_example_golden_values() {
        let state = example_state();

        let s = solve_penalized(&state, &Penalty::Linear, 0.7);
        assert!((s.delta - 0.1).abs() < 1e-12);
        assert!((s.objective - 0.88).abs() < 1e-12);
        assert_eq!(s.policy.probs(Group::A), &[0.0, 0.0, 1.0]);
        assert_eq!(s.policy.probs(Group::B), &[0.0, 1.0, 1.0]);

        let s = solve_penalized(&state, &Penalty::Linear, 1.5);
        assert!((s.delta).abs() < 1e-12);
        assert!((s.objective - 0.85).abs() < 1e-12);

        let s = solve_penalized(&state, &Penalty::Linear, 0.0);
        assert!((s.delta - 0.2).abs() < 1e-12);
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert_eq!(s.policy.probs(Group::A), &[0.0, 0.0, 1.0]);
        assert_eq!(s.policy.probs(Group::B), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn solve_penalized_swapped_input_maps_back() {
        let state = example_state().swap_groups();
        let s = solve_penalized(&state, &Penalty::Linear, 0.7);
        assert!(s.swapped);
        assert!((s.delta - 0.1).abs() < 1e-12);
        assert_eq!(s.policy.probs(Group::A), &[0.0, 1.0, 1.0]);
        assert_eq!(s.policy.probs(Group::B), &[0.0, 0.0, 1.0]);
        // The reported objective matches the profit of the reported policy.
        assert!(
            (state.profit(&s.policy, &Penalty::Linear, 0.7) - s.objective).abs() < 1e-12
        );
    }

    #[test]
    fn oracle_matches_on_example() {
        let state = example_state();
        let oracle = oracle_solve(&state, &Penalty::Linear, 0.7, 1e-4);
        assert!((oracle.objective - 0.88).abs() < 1e-4);
        // lambda = 0 hits the endpoint exactly.
        let oracle = oracle_solve(&state, &Penalty::Linear, 0.0, 0.03);
        assert_eq!(oracle.objective, 1.0);
        assert!((oracle.delta - 0.2).abs() < 1e-15);
    }

    #[test]
    fn policy_checker_accepts_example_optimum_and_flags_reversal() {
        let state = example_state();
        let good = SelectionPolicy::new(vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]).unwrap();
        assert!(check_policy_structure(&state, &good).is_empty());

        let bad = SelectionPolicy::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]).unwrap();
        let violations = check_policy_structure(&state, &bad);
        assert!(violations
            .iter()
            .any(|v| matches!(v, PolicyViolation::NotMonotone { group: Group::A, .. })));
        assert!(violations
            .iter()
            .any(|v| matches!(v, PolicyViolation::NegativeLevelSelected { .. })));
    }

    #[test]
    fn cost_curve_interpolates() {
        let items = reduction_items(&example_state());
        let curve = CostCurve::from_items(&items);
        assert_eq!(curve.cost(0.0), 0.0);
        assert!((curve.cost(0.05) - 0.025).abs() < 1e-15);
        assert!((curve.cost(0.1) - 0.05).abs() < 1e-15);
        assert!((curve.cost(0.2) - 0.15).abs() < 1e-15);
        assert!((curve.total_mass() - 1.2).abs() < 1e-15);
    }
}
