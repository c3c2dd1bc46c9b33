//! Kinetic Monte Carlo simulation and numerical verification of the
//! long-time behaviour of a tagged particle in a Rayleigh gas under simple
//! shear, with collision rate `|w|^{-a}`.
//!
//! Modules:
//!
//! * [`kinematics`] — shear flight map, collision projection, rescalings;
//! * [`sampler`] — flight times, scattering directions, trajectories, ensembles;
//! * [`densities`] — closed-form flight, jump, transition and escape densities;
//! * [`specfun`] — the special functions `H`, `Φ`, `Z`, `R`, `K` of the asymptotics;
//! * [`profiles`] — asymptotic profiles of the rescaled distribution;
//! * [`charsolve`] — characteristics, delay equation, boundary fixed point,
//!   self-similarity test;
//! * [`harness`] — ensemble statistics, comparisons, export.
//!
//! Supporting numerics live in [`quad`], [`interp`], [`ode`], [`rng`] and [`stats`].

pub mod charsolve;
pub mod densities;
pub mod error;
pub mod harness;
pub mod interp;
pub mod kinematics;
pub mod ode;
pub mod profiles;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use kinematics::{KernelMode, ModelParams, RescaledState, UnitVector, Velocity};
