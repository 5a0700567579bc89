//! Effective diffusivity of passive tracers in two-dimensional
//! incompressible flows by structure-preserving stochastic integration.

pub mod bea;
pub mod cell;
pub mod ensemble;
pub mod expcli;
pub mod flows;
pub mod noise;
pub mod schemes;

