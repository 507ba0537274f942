//! JSON schemas and table writers for the toolkit's file formats.
//!
//! Populations: `{"grid": [...], "weight_a": w, "dist_a": [...],
//! "dist_b": [...]}` with the second weight implied as `1 - w`. Kernels:
//! the grid plus two row-major matrices. Tables are single-space separated
//! with a header row. All file writes go through a temp file and rename so
//! partially written output never lands under the target name.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use fairgate_core::dynamics::{Decision, DynamicsKernel, TrajectoryRecord};
use fairgate_core::solver::StaticSolution;
use fairgate_core::{Group, PopulationState, QualificationGrid};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PopulationJson {
    pub grid: Vec<f64>,
    pub weight_a: f64,
    pub dist_a: Vec<f64>,
    pub dist_b: Vec<f64>,
}

impl From<&PopulationState> for PopulationJson {
    fn from(state: &PopulationState) -> Self {
        PopulationJson {
            grid: state.grid().values().to_vec(),
            weight_a: state.weight(Group::A),
            dist_a: state.dist(Group::A).to_vec(),
            dist_b: state.dist(Group::B).to_vec(),
        }
    }
}

impl PopulationJson {
    pub fn into_state(self) -> Result<PopulationState, CliError> {
        let grid = QualificationGrid::new(self.grid)?;
        Ok(PopulationState::new(
            grid,
            self.weight_a,
            1.0 - self.weight_a,
            self.dist_a,
            self.dist_b,
        )?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelJson {
    pub grid: Vec<f64>,
    pub q_selected: Vec<Vec<f64>>,
    pub q_rejected: Vec<Vec<f64>>,
}

impl From<&DynamicsKernel> for KernelJson {
    fn from(kernel: &DynamicsKernel) -> Self {
        KernelJson {
            grid: kernel.grid().values().to_vec(),
            q_selected: kernel.matrix(Decision::Selected).to_vec(),
            q_rejected: kernel.matrix(Decision::Rejected).to_vec(),
        }
    }
}

impl KernelJson {
    pub fn into_kernel(self) -> Result<DynamicsKernel, CliError> {
        let grid = QualificationGrid::new(self.grid)?;
        Ok(DynamicsKernel::new(grid, self.q_selected, self.q_rejected)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZAllocationJson {
    pub qualification: f64,
    pub group: String,
    pub mass: f64,
    pub capacity: f64,
    pub unit_cost: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolicyJson {
    pub select_prob_a: Vec<f64>,
    pub select_prob_b: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionJson {
    pub z_allocation: Vec<ZAllocationJson>,
    pub total_mass: f64,
    pub delta: f64,
    pub objective: f64,
    pub policy: PolicyJson,
    pub swapped: bool,
}

impl From<&StaticSolution> for SolutionJson {
    fn from(solution: &StaticSolution) -> Self {
        SolutionJson {
            z_allocation: solution
                .z_allocation
                .iter()
                .map(|entry| ZAllocationJson {
                    qualification: entry.qualification,
                    group: entry.group.to_string(),
                    mass: entry.mass,
                    capacity: entry.capacity,
                    unit_cost: entry.unit_cost,
                })
                .collect(),
            total_mass: solution.total_mass,
            delta: solution.delta,
            objective: solution.objective,
            policy: PolicyJson {
                select_prob_a: solution.policy.probs(Group::A).to_vec(),
                select_prob_b: solution.policy.probs(Group::B).to_vec(),
            },
            swapped: solution.swapped,
        }
    }
}

/// Writes bytes atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut file = tempfile::NamedTempFile::new_in(dir.unwrap_or_else(|| Path::new(".")))
        .map_err(|e| CliError::io(format!("cannot create temp file near {}: {e}", path.display())))?;
    use std::io::Write;
    file.write_all(contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    file.persist(path)
        .map_err(|e| CliError::io(format!("cannot move output into {}: {e}", path.display())))?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let contents = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&contents)
        .map_err(|e| CliError::validation(format!("malformed {}: {e}", path.display())))
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_string_pretty(value).expect("serializable value");
    out.push('\n');
    out.into_bytes()
}

pub fn read_population(path: &Path) -> Result<PopulationState, CliError> {
    read_json::<PopulationJson>(path)?.into_state()
}

pub fn write_population(path: &Path, state: &PopulationState) -> Result<(), CliError> {
    write_atomic(path, &to_json_bytes(&PopulationJson::from(state)))
}

pub fn read_kernel(path: &Path) -> Result<DynamicsKernel, CliError> {
    read_json::<KernelJson>(path)?.into_kernel()
}

pub fn write_kernel(path: &Path, kernel: &DynamicsKernel) -> Result<(), CliError> {
    write_atomic(path, &to_json_bytes(&KernelJson::from(kernel)))
}

/// `lambda delta objective` rows, one per sweep point.
pub fn sweep_table(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("lambda delta objective\n");
    for &(lambda, delta, objective) in rows {
        out.push_str(&format!("{lambda} {delta} {objective}\n"));
    }
    out
}

/// `t delta profit utility tv` rows for a simulated trajectory.
pub fn trajectory_table(record: &TrajectoryRecord) -> String {
    let mut out = String::from("t delta profit utility tv\n");
    for step in &record.steps {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            step.t, step.delta, step.profit, step.utility, step.tv
        ));
    }
    out
}
