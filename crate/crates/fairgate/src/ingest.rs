//! Builds population states from tabular data.
//!
//! [`load_population`] bins a raw value column (GPA-style) into qualification
//! levels: `y = round((raw - offset) / bin_width) * bin_width`, rounding
//! half-away-from-zero on the bin index so results do not depend on the
//! platform. The default offset 2.95 keeps 0.1-spaced values off zero.
//!
//! [`reduce_features`] collapses feature-level outcome data to qualification
//! distributions by replacing each (group, feature) cell with its mean
//! outcome, which leaves the institution's objective unchanged for policies
//! that depend only on group and mean.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use fairgate_core::population::PopulationError;
use fairgate_core::{Group, PopulationState, QualificationGrid};

/// What to do with a row whose qualification bins to exactly zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroPolicy {
    /// Reject the file.
    Error,
    /// Replace the zero with a small positive qualification.
    Nudge(f64),
}

impl FromStr for ZeroPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "error" {
            return Ok(ZeroPolicy::Error);
        }
        if let Some(eps) = s.strip_prefix("nudge:") {
            let eps: f64 = eps
                .parse()
                .map_err(|_| format!("bad nudge epsilon {eps:?}"))?;
            if eps > 0.0 {
                return Ok(ZeroPolicy::Nudge(eps));
            }
            return Err(format!("nudge epsilon must be positive, got {eps}"));
        }
        Err(format!("unknown zero policy {s:?}; use error or nudge:EPS"))
    }
}

/// Column names, binarization rule, and binning parameters for CSV loading.
#[derive(Clone, Debug)]
pub struct IngestConfig {
    pub group_column: String,
    /// Raw values mapped to group A.
    pub group_a_values: BTreeSet<String>,
    /// Raw values mapped to group B; `None` treats everything outside
    /// `group_a_values` as group B, `Some` rejects values in neither set.
    pub group_b_values: Option<BTreeSet<String>>,
    pub value_column: String,
    pub offset: f64,
    pub bin_width: f64,
    pub zero_policy: ZeroPolicy,
}

impl IngestConfig {
    /// Config with the default preprocessing: offset 2.95, bin width 0.1,
    /// zero rows rejected, non-A values forming group B.
    pub fn new(
        group_column: impl Into<String>,
        group_a_values: impl IntoIterator<Item = String>,
        value_column: impl Into<String>,
    ) -> IngestConfig {
        IngestConfig {
            group_column: group_column.into(),
            group_a_values: group_a_values.into_iter().collect(),
            group_b_values: None,
            value_column: value_column.into(),
            offset: 2.95,
            bin_width: 0.1,
            zero_policy: ZeroPolicy::Error,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column {name:?}")]
    MissingColumn { name: String },
    #[error("unparseable value {value:?} at line {line}")]
    BadValue { line: u64, value: String },
    #[error("zero qualification at line {line} (value equals the offset); use --zero-policy nudge:EPS to keep such rows")]
    ZeroQualification { line: u64 },
    #[error("unknown group values: {values:?}")]
    UnknownGroups { values: Vec<String> },
    #[error("no rows for group {group}")]
    EmptyGroup { group: Group },
    #[error("zero mean outcome in feature cell {key:?}")]
    ZeroCell { key: String },
    #[error(transparent)]
    Population(#[from] PopulationError),
}

/// Bin index plus the nudge bucket, ordered by numeric value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Bin(i64),
    Nudged,
}

impl Level {
    fn value(self, bin_width: f64, nudge: f64) -> f64 {
        match self {
            Level::Bin(idx) => idx as f64 * bin_width,
            Level::Nudged => nudge,
        }
    }

    fn sort_key(self, bin_width: f64, nudge: f64) -> f64 {
        self.value(bin_width, nudge)
    }
}

/// Reads a headered CSV and builds the empirical population state.
pub fn load_population(path: &Path, config: &IngestConfig) -> Result<PopulationState, IngestError> {
    let file = File::open(path)?;
    load_population_from_reader(file, config)
}

pub fn load_population_from_reader<R: Read>(
    reader: R,
    config: &IngestConfig,
) -> Result<PopulationState, IngestError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| -> Result<usize, IngestError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn { name: name.into() })
    };
    let group_idx = column(&config.group_column)?;
    let value_idx = column(&config.value_column)?;

    let nudge = match config.zero_policy {
        ZeroPolicy::Nudge(eps) => eps,
        ZeroPolicy::Error => f64::NAN,
    };
    let mut counts: BTreeMap<Level, [u64; 2]> = BTreeMap::new();
    let mut totals = [0u64; 2];
    let mut unknown: BTreeSet<String> = BTreeSet::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(row as u64 + 2);
        let group_raw = record.get(group_idx).unwrap_or("");
        let group = if config.group_a_values.contains(group_raw) {
            Group::A
        } else {
            match &config.group_b_values {
                Some(values) if !values.contains(group_raw) => {
                    unknown.insert(group_raw.to_string());
                    continue;
                }
                _ => Group::B,
            }
        };
        let value_raw = record.get(value_idx).unwrap_or("");
        let raw: f64 = value_raw.trim().parse().map_err(|_| IngestError::BadValue {
            line,
            value: value_raw.to_string(),
        })?;
        let bin = ((raw - config.offset) / config.bin_width).round() as i64;
        let level = if bin == 0 {
            match config.zero_policy {
                ZeroPolicy::Error => return Err(IngestError::ZeroQualification { line }),
                ZeroPolicy::Nudge(_) => Level::Nudged,
            }
        } else {
            Level::Bin(bin)
        };
        counts.entry(level).or_default()[group as usize] += 1;
        totals[group as usize] += 1;
    }
    if !unknown.is_empty() {
        return Err(IngestError::UnknownGroups {
            values: unknown.into_iter().collect(),
        });
    }
    for group in [Group::A, Group::B] {
        if totals[group as usize] == 0 {
            return Err(IngestError::EmptyGroup { group });
        }
    }

    let mut levels: Vec<Level> = counts.keys().copied().collect();
    levels.sort_by(|a, b| {
        a.sort_key(config.bin_width, nudge)
            .total_cmp(&b.sort_key(config.bin_width, nudge))
    });
    let values: Vec<f64> = levels
        .iter()
        .map(|l| l.value(config.bin_width, nudge))
        .collect();
    let dist = |group: Group| -> Vec<f64> {
        levels
            .iter()
            .map(|l| counts[l][group as usize] as f64 / totals[group as usize] as f64)
            .collect()
    };
    let total = (totals[0] + totals[1]) as f64;
    Ok(PopulationState::new(
        QualificationGrid::new(values)?,
        totals[0] as f64 / total,
        totals[1] as f64 / total,
        dist(Group::A),
        dist(Group::B),
    )?)
}

/// One observation of a feature-level outcome.
#[derive(Clone, Debug)]
pub struct FeatureRow {
    pub group: Group,
    pub feature_key: String,
    pub outcome: f64,
}

/// Options for the feature reduction. With `bin_width = None` the grid keeps
/// the exact cell means, which preserves the objective identity to machine
/// precision; binning trades that for a regular grid.
#[derive(Clone, Copy, Debug)]
pub struct ReduceOptions {
    pub bin_width: Option<f64>,
    pub zero_policy: ZeroPolicy,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            bin_width: None,
            zero_policy: ZeroPolicy::Error,
        }
    }
}

/// Collapses each (group, feature) cell to its mean outcome and builds the
/// population over the resulting qualification values.
pub fn reduce_features(
    rows: &[FeatureRow],
    options: &ReduceOptions,
) -> Result<PopulationState, IngestError> {
    let mut cells: BTreeMap<(u8, &str), (f64, u64)> = BTreeMap::new();
    let mut totals = [0u64; 2];
    for row in rows {
        let cell = cells.entry((row.group as u8, &row.feature_key)).or_default();
        cell.0 += row.outcome;
        cell.1 += 1;
        totals[row.group as usize] += 1;
    }
    for group in [Group::A, Group::B] {
        if totals[group as usize] == 0 {
            return Err(IngestError::EmptyGroup { group });
        }
    }

    let mut weighted: Vec<(f64, u8, u64)> = Vec::with_capacity(cells.len());
    for ((group, key), (sum, count)) in &cells {
        let mean = sum / *count as f64;
        let mut value = match options.bin_width {
            Some(width) => (mean / width).round() * width,
            None => mean,
        };
        if value == 0.0 {
            match options.zero_policy {
                ZeroPolicy::Error => {
                    return Err(IngestError::ZeroCell { key: (*key).to_string() })
                }
                ZeroPolicy::Nudge(eps) => value = eps,
            }
        }
        weighted.push((value, *group, *count));
    }
    weighted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut values: Vec<f64> = Vec::new();
    let mut masses: Vec<[u64; 2]> = Vec::new();
    for (value, group, count) in weighted {
        if values.last() != Some(&value) {
            values.push(value);
            masses.push([0, 0]);
        }
        masses.last_mut().unwrap()[group as usize] += count;
    }
    let dist = |group: Group| -> Vec<f64> {
        masses
            .iter()
            .map(|m| m[group as usize] as f64 / totals[group as usize] as f64)
            .collect()
    };
    let total = (totals[0] + totals[1]) as f64;
    Ok(PopulationState::new(
        QualificationGrid::new(values)?,
        totals[0] as f64 / total,
        totals[1] as f64 / total,
        dist(Group::A),
        dist(Group::B),
    )?)
}
