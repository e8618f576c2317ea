//! American put pricing under Markov regime switching.
//!
//! The free boundary is removed with a logarithmic front-fixing transform and
//! the value, delta, gamma and speed fields are advanced together with a
//! fourth-order compact Crank–Nicolson scheme. Regimes are coupled through
//! Hermite interpolation between their moving frames, and each time step is
//! iterated to convergence with either Gauss–Seidel or Newton updates.

pub mod analysis;
pub mod banded;
pub mod error;
pub mod fixtures;
pub mod greeks;
pub mod interp;
pub mod model;
pub mod scheme;
pub mod solver;

pub use analysis::{
    amplification_spectrum, convergence_rate, manufactured_solution, manufactured_study, max_error, solver_study,
    AmplificationSpectrum, RefinementLevel, RefinementStudy,
};
pub use error::{Error, Result};
pub use fixtures::{
    fixture, fixtures, quantity_at, reference_table, reference_tables, CellOutcome, Fixture, Quantity, ReferenceCell,
    ReferenceTable,
};
pub use greeks::{greeks_at_asset, to_physical, update_time_greeks, GreeksField, PhysicalGreeks};
pub use interp::{hermite_at, sample_coupling, CouplingSample, InterpOrder};
pub use model::{
    exercise_region_values, omega, validate_generator, BoundaryHistory, GeneratorMatrix, GridSpec, RegimeModel,
    RegimeState,
};
pub use scheme::{thomas_solve, TridiagonalSystem};
pub use solver::{price_at_asset, solve, Method, SolveResult, SolverConfig, Stepper};
