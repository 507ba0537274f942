//! Population-level domain types: the qualification grid, per-group
//! distributions, selection policies, and the profit decomposition.

use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::penalty::Penalty;

/// Tolerance on probability mass checks (weights and distribution sums).
pub const PROB_TOL: f64 = 1e-12;

/// One of the two protected groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    A,
    B,
}

impl Group {
    /// The opposite group label.
    pub fn other(self) -> Group {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::A => f.write_str("A"),
            Group::B => f.write_str("B"),
        }
    }
}

/// Invariant violation in a grid, population state, or policy.
#[derive(Clone, Debug, PartialEq)]
pub enum PopulationError {
    /// Grid has fewer than two levels.
    GridTooShort { len: usize },
    /// Grid values are not strictly increasing (also raised for NaN).
    GridNotIncreasing { index: usize },
    /// Grid contains a non-finite value.
    GridNotFinite { index: usize },
    /// Grid contains a zero qualification level.
    ZeroQualification { index: usize },
    /// A group weight is outside (0, 1).
    WeightOutOfRange { group: Group, value: f64 },
    /// Group weights do not sum to one.
    WeightSum { sum: f64 },
    /// A distribution's length does not match the grid.
    DistributionLength { group: Group, expected: usize, found: usize },
    /// A distribution entry is negative beyond tolerance.
    NegativeMass { group: Group, index: usize, value: f64 },
    /// A distribution does not sum to one.
    DistributionSum { group: Group, sum: f64 },
    /// A selection probability falls outside [0, 1].
    ProbabilityOutOfRange { group: Group, index: usize, value: f64 },
    /// Policy rows have different lengths.
    PolicyLengthMismatch { len_a: usize, len_b: usize },
}

impl fmt::Display for PopulationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PopulationError::GridTooShort { len } => {
                write!(f, "qualification grid needs at least 2 levels, got {len}")
            }
            PopulationError::GridNotIncreasing { index } => {
                write!(f, "qualification grid is not strictly increasing at index {index}")
            }
            PopulationError::GridNotFinite { index } => {
                write!(f, "qualification grid value at index {index} is not finite")
            }
            PopulationError::ZeroQualification { index } => {
                write!(f, "zero qualification at grid index {index}")
            }
            PopulationError::WeightOutOfRange { group, value } => {
                write!(f, "group {group} weight {value} is outside (0, 1)")
            }
            PopulationError::WeightSum { sum } => {
                write!(f, "group weights sum to {sum}, expected 1")
            }
            PopulationError::DistributionLength { group, expected, found } => {
                write!(
                    f,
                    "group {group} distribution has {found} entries, grid has {expected}"
                )
            }
            PopulationError::NegativeMass { group, index, value } => {
                write!(
                    f,
                    "group {group} distribution entry {index} is negative ({value})"
                )
            }
            PopulationError::DistributionSum { group, sum } => {
                write!(f, "group {group} distribution sum is {sum}, expected 1")
            }
            PopulationError::ProbabilityOutOfRange { group, index, value } => {
                write!(
                    f,
                    "group {group} selection probability {value} at index {index} is outside [0, 1]"
                )
            }
            PopulationError::PolicyLengthMismatch { len_a, len_b } => {
                write!(f, "policy rows have mismatched lengths {len_a} and {len_b}")
            }
        }
    }
}

impl core::error::Error for PopulationError {}

/// Ordered set of distinct, nonzero qualification levels.
#[derive(Clone, Debug, PartialEq)]
pub struct QualificationGrid {
    values: Vec<f64>,
}

impl QualificationGrid {
    /// Builds a grid, checking that values are finite, strictly increasing,
    /// nonzero, and at least two.
    pub fn new(values: Vec<f64>) -> Result<Self, PopulationError> {
        if values.len() < 2 {
            return Err(PopulationError::GridTooShort { len: values.len() });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(PopulationError::GridNotFinite { index: i });
            }
            if v == 0.0 {
                return Err(PopulationError::ZeroQualification { index: i });
            }
            if i > 0 && v <= values[i - 1] {
                return Err(PopulationError::GridNotIncreasing { index: i });
            }
        }
        Ok(QualificationGrid { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Qualification level at grid index `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// Group weights plus per-group qualification distributions: the solver's
/// entire input at one point in time.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationState {
    grid: QualificationGrid,
    weight_a: f64,
    weight_b: f64,
    dist_a: Vec<f64>,
    dist_b: Vec<f64>,
}

impl PopulationState {
    /// Builds a state and validates every invariant. Distribution entries in
    /// `[-1e-12, 0)` are clamped to zero to absorb rounding from ingestion.
    pub fn new(
        grid: QualificationGrid,
        weight_a: f64,
        weight_b: f64,
        mut dist_a: Vec<f64>,
        mut dist_b: Vec<f64>,
    ) -> Result<Self, PopulationError> {
        clamp_tiny_negatives(&mut dist_a);
        clamp_tiny_negatives(&mut dist_b);
        let state = PopulationState {
            grid,
            weight_a,
            weight_b,
            dist_a,
            dist_b,
        };
        state.validate()?;
        Ok(state)
    }

    /// Checks all invariants, reporting the first violation found.
    pub fn validate(&self) -> Result<(), PopulationError> {
        for (group, weight) in [(Group::A, self.weight_a), (Group::B, self.weight_b)] {
            if !(weight > 0.0 && weight < 1.0) {
                return Err(PopulationError::WeightOutOfRange { group, value: weight });
            }
        }
        let weight_sum = self.weight_a + self.weight_b;
        if math::abs(weight_sum - 1.0) > PROB_TOL {
            return Err(PopulationError::WeightSum { sum: weight_sum });
        }
        for (group, dist) in [(Group::A, &self.dist_a), (Group::B, &self.dist_b)] {
            if dist.len() != self.grid.len() {
                return Err(PopulationError::DistributionLength {
                    group,
                    expected: self.grid.len(),
                    found: dist.len(),
                });
            }
            for (i, &p) in dist.iter().enumerate() {
                if p.is_nan() || p < 0.0 {
                    return Err(PopulationError::NegativeMass { group, index: i, value: p });
                }
            }
            let sum: f64 = dist.iter().sum();
            if math::abs(sum - 1.0) > PROB_TOL {
                return Err(PopulationError::DistributionSum { group, sum });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &QualificationGrid {
        &self.grid
    }

    pub fn weight(&self, group: Group) -> f64 {
        match group {
            Group::A => self.weight_a,
            Group::B => self.weight_b,
        }
    }

    pub fn dist(&self, group: Group) -> &[f64] {
        match group {
            Group::A => &self.dist_a,
            Group::B => &self.dist_b,
        }
    }

    /// `Pr(Y > 0 | C = group)`.
    pub fn positive_rate(&self, group: Group) -> f64 {
        self.grid
            .values()
            .iter()
            .zip(self.dist(group))
            .filter(|(&y, _)| y > 0.0)
            .map(|(_, &p)| p)
            .sum()
    }

    /// `Pr(D = 1 | C = group)` under `policy`.
    pub fn selection_rate(&self, group: Group, policy: &SelectionPolicy) -> f64 {
        let probs = policy.probs(group);
        assert_eq!(probs.len(), self.grid.len(), "policy length must match grid");
        self.dist(group)
            .iter()
            .zip(probs)
            .map(|(&p, &pi)| p * pi)
            .sum()
    }

    /// Selection disparity `|Pr(D=1|A) - Pr(D=1|B)|`.
    pub fn disparity(&self, policy: &SelectionPolicy) -> f64 {
        math::abs(self.selection_rate(Group::A, policy) - self.selection_rate(Group::B, policy))
    }

    /// Expected qualification of the selected, `E[DY]`.
    pub fn utility(&self, policy: &SelectionPolicy) -> f64 {
        let mut total = 0.0;
        for group in [Group::A, Group::B] {
            let probs = policy.probs(group);
            assert_eq!(probs.len(), self.grid.len(), "policy length must match grid");
            let inner: f64 = self
                .grid
                .values()
                .iter()
                .zip(self.dist(group))
                .zip(probs)
                .map(|((&y, &p), &pi)| p * pi * y)
                .sum();
            total += self.weight(group) * inner;
        }
        total
    }

    /// Utility minus the discrimination penalty, `E[DY] - lambda * g(delta)`.
    pub fn profit(&self, policy: &SelectionPolicy, penalty: &Penalty, lambda: f64) -> f64 {
        self.utility(policy) - lambda * penalty.eval(self.disparity(policy))
    }

    /// The same population with the group labels exchanged.
    pub fn swap_groups(&self) -> PopulationState {
        PopulationState {
            grid: self.grid.clone(),
            weight_a: self.weight_b,
            weight_b: self.weight_a,
            dist_a: self.dist_b.clone(),
            dist_b: self.dist_a.clone(),
        }
    }

    /// Replaces both distributions, keeping grid and weights.
    pub fn with_dists(
        &self,
        dist_a: Vec<f64>,
        dist_b: Vec<f64>,
    ) -> Result<PopulationState, PopulationError> {
        PopulationState::new(
            self.grid.clone(),
            self.weight_a,
            self.weight_b,
            dist_a,
            dist_b,
        )
    }
}

fn clamp_tiny_negatives(dist: &mut [f64]) {
    for p in dist {
        if *p < 0.0 && *p >= -PROB_TOL {
            *p = 0.0;
        }
    }
}

/// Per-(group, qualification) selection probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionPolicy {
    select_prob_a: Vec<f64>,
    select_prob_b: Vec<f64>,
}

impl SelectionPolicy {
    /// Builds a policy, checking every entry lies in [0, 1].
    pub fn new(select_prob_a: Vec<f64>, select_prob_b: Vec<f64>) -> Result<Self, PopulationError> {
        if select_prob_a.len() != select_prob_b.len() {
            return Err(PopulationError::PolicyLengthMismatch {
                len_a: select_prob_a.len(),
                len_b: select_prob_b.len(),
            });
        }
        for (group, probs) in [(Group::A, &select_prob_a), (Group::B, &select_prob_b)] {
            for (i, &pi) in probs.iter().enumerate() {
                if !(0.0..=1.0).contains(&pi) {
                    return Err(PopulationError::ProbabilityOutOfRange {
                        group,
                        index: i,
                        value: pi,
                    });
                }
            }
        }
        Ok(SelectionPolicy {
            select_prob_a,
            select_prob_b,
        })
    }

    /// The utility-maximizing policy: select exactly the positive levels.
    pub fn utility_max(grid: &QualificationGrid) -> Self {
        let row: Vec<f64> = grid
            .values()
            .iter()
            .map(|&y| if y > 0.0 { 1.0 } else { 0.0 })
            .collect();
        SelectionPolicy {
            select_prob_a: row.clone(),
            select_prob_b: row,
        }
    }

    /// Selects everyone in both groups.
    pub fn select_all(n: usize) -> Self {
        SelectionPolicy {
            select_prob_a: alloc::vec![1.0; n],
            select_prob_b: alloc::vec![1.0; n],
        }
    }

    /// Selects no one in either group.
    pub fn select_none(n: usize) -> Self {
        SelectionPolicy {
            select_prob_a: alloc::vec![0.0; n],
            select_prob_b: alloc::vec![0.0; n],
        }
    }

    pub fn probs(&self, group: Group) -> &[f64] {
        match group {
            Group::A => &self.select_prob_a,
            Group::B => &self.select_prob_b,
        }
    }

    pub fn len(&self) -> usize {
        self.select_prob_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.select_prob_a.is_empty()
    }

    /// The same policy with the group rows exchanged.
    pub fn swap_groups(&self) -> SelectionPolicy {
        SelectionPolicy {
            select_prob_a: self.select_prob_b.clone(),
            select_prob_b: self.select_prob_a.clone(),
        }
    }
}
