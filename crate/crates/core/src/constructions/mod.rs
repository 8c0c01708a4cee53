//! Optimality constructions: a continuous solution of fractional bounded variation built
//! from an accumulating oscillator, and supercritical high-frequency (WKB) oscillations.

mod cheng;
mod oscillator;
mod sweep;
mod wkb;

pub use cheng::{cheng_grid, cheng_initial_data, select_delta, ChengData, DELTA_TIME_SAMPLES, MONOTONICITY_MARGIN};
pub use oscillator::{extrema_amplitudes, oscillator, oscillator_extrema, OscillatorParams};
pub use sweep::{sobolev_scaling_sweep, ScalingReport, ScalingRow, ScalingSlope};
pub use wkb::{
    powerlaw_oscillation, profile_evolve, profile_flux, wkb_initial, wkb_reconstruct, wkb_residual, WkbConfig,
    WkbResidual, WkbSolver,
};
