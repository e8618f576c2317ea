//! Shared setup for the criterion benchmarks.

use amerput_core::{fixture, GridSpec, Method, RegimeModel, SolverConfig};

/// Fixture model with a solver config at grid size `h` and `k = h²`,
/// truncated to `steps` time steps.
pub fn setup(name: &str, h: f64, method: Method, steps: usize) -> (RegimeModel, SolverConfig) {
    let f = fixture(name).expect("known fixture");
    let mut model = f.model;
    let k = h * h;
    model.expiry = k * steps as f64;
    let grid = GridSpec::from_steps(f.x_max, h, model.expiry, Some(k)).expect("valid grid");
    let config = SolverConfig::new(grid).with_method(method).with_epsilon(f.epsilon);
    (model, config)
}
