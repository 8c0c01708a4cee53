//! Numerics for one-dimensional scalar conservation laws `u_t + f(u)_x = 0`:
//! flux degeneracy analysis, fractional (s-)total variation, characteristic and Godunov
//! solvers, and the supercritical oscillation constructions built on them.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases at the crate root
//! name the double precision instantiations used by the command line tool.

// `!(x > 0)` guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constructions;
pub mod degeneracy;
pub mod error;
pub mod flux;
pub mod numerics;
pub mod sampled;
pub mod scalar;
pub mod transport;
pub mod variation;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Interval64 = flux::Interval<f64>;
pub type Flux64 = flux::Flux<f64>;
pub type Flux32 = flux::Flux<f32>;
pub type SampledFunction64 = sampled::SampledFunction<f64>;
pub type SampledFunction32 = sampled::SampledFunction<f32>;
pub type VariationResult64 = variation::VariationResult<f64>;
pub type GodunovConfig64 = transport::GodunovConfig<f64>;
pub type CharacteristicFlow64 = transport::CharacteristicFlow<f64>;
pub type OscillatorParams64 = constructions::OscillatorParams<f64>;
pub type ChengData64 = constructions::ChengData<f64>;
pub type WkbConfig64 = constructions::WkbConfig<f64>;
pub type ScalingReport64 = constructions::ScalingReport<f64>;
