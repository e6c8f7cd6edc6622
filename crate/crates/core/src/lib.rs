//! Constrained multiobjective evolutionary optimization.
//!
//! The main algorithm, ATM-R, switches its survivor selection with the
//! feasibility of the population: reference-point selection in an objective
//! space extended by the constraint violation while nothing is feasible,
//! separate handling of feasible and infeasible solutions in mixed
//! populations, and NSGA-II once everything is feasible. An NSGA-II baseline
//! with the constrained dominance principle is included for comparison, along
//! with analytic test problems, IGD/hypervolume metrics and an experiment
//! harness.

pub mod algorithm;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod operators;
pub mod problems;
pub mod ranking;
pub mod refpoints;
pub mod selection;

pub use algorithm::{run_atmr, run_nsga2_cdp, run_rng, Algorithm, GenerationRecord, RunResult};
pub use error::{Error, Result};
pub use model::{
    constraint_violation, evaluate, transformed_objectives, AlgorithmConfig, Evaluation,
    ProblemDefinition, Solution,
};
pub use operators::Phase;
pub use problems::{get_problem, reference_front, ProblemParams, ProblemRegistry};
