//! Solution operators for `u_t + f(u)_x = 0`: characteristics for continuous solutions
//! before the first shock, and a Godunov finite-volume scheme for entropy solutions.

mod characteristics;
mod godunov;

pub use characteristics::{
    characteristic_flow, evolve_continuous, evolve_periodic, invert_flow, shock_time, CharacteristicFlow,
    EvolutionResult, Rule, Transition, INVERSION_MAX_ITER, INVERSION_TOL, MONOTONE_MARGIN,
};
pub use godunov::{godunov_run, godunov_solve, write_diagnostics_csv, Boundary, Frame, GodunovConfig, GodunovRun};
