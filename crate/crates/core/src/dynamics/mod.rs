//! Brownian couplings, Lindblad bath and trajectory evolution.

mod config;
pub mod couplings;
pub mod engine;
pub mod ensemble;
pub mod hamiltonian;
pub mod lindblad;
pub mod reference;
pub mod snapshot;
pub mod state;
pub mod steady;
pub mod superop;

pub use config::{SimConfig, STABILITY_LIMIT};
pub use couplings::{sample_couplings, trajectory_rng, CouplingSample};
pub use engine::{Engine, StepObserver, TrajectoryState};
pub use ensemble::{run_ensemble, EnsembleOptions, EnsembleRecord, SnapshotPolicy};
pub use hamiltonian::{build_hamiltonian, SectorHamiltonian};
pub use lindblad::{dissipator, JumpSet};
pub use reference::ReferenceEngine;
pub use state::{BlockDensity, DensityMatrix};
pub use steady::{analytic_steady_state, steady_state, SteadyState};
