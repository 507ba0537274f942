//! Selection with a discrimination penalty over a finite qualification grid.
//!
//! An institution selects individuals to maximize the expected qualification
//! of its picks, minus a penalty `lambda * g(delta)` on the selection-rate gap
//! `delta` between two groups. This crate solves that problem exactly,
//! computes the penalty levels at which regulation starts to bite
//! ([`solver::beta_e`]) or achieves full parity ([`solver::beta_s`]), and
//! simulates how the population's qualifications evolve when the institution
//! re-optimizes myopically at every time step.
//!
//! The crate is `no_std` compatible (with `alloc`); disable default features
//! and enable `libm` for builds without the standard library.
//!
//! ```
//! use fairgate_core::{Penalty, PopulationState, QualificationGrid};
//!
//! let grid = QualificationGrid::new(vec![-2.0, -1.0, 2.0]).unwrap();
//! let state = PopulationState::new(
//!     grid,
//!     0.5,
//!     0.5,
//!     vec![0.3, 0.1, 0.6],
//!     vec![0.5, 0.1, 0.4],
//! )
//! .unwrap();
//! let solution = fairgate_core::solver::solve_penalized(&state, &Penalty::Linear, 0.7);
//! assert!((solution.delta - 0.1).abs() < 1e-9);
//! assert!((solution.objective - 0.88).abs() < 1e-9);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dynamics;
pub mod genlab;
mod linalg;
mod math;
pub mod penalty;
pub mod population;
pub mod solver;

pub use penalty::Penalty;
pub use population::{Group, PopulationState, QualificationGrid, SelectionPolicy};
pub use solver::{solve_penalized, StaticSolution};
