//! Twisted-vortex profiles of the two-component Ginzburg–Landau model.
//!
//! The radial reduction of the model is discretized with piecewise-linear
//! elements on a truncated mesh. The crate provides the discrete energy and
//! its exact derivatives, a descent minimizer, strong-form residual checks
//! with Newton refinement, and log-linear fits of the near-origin and
//! far-field decay laws.

pub mod asymptotics;
pub mod energy;
pub mod error;
pub mod fields;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod minimizer;
pub mod odecheck;
pub mod params;
pub mod potential;

pub use asymptotics::{DecayReport, FitEntry, FitWindows, Targets};
pub use energy::{EnergyReport, EnergyTerms};
pub use error::{Error, Result};
pub use fields::{BoundsCheck, Field, FieldConfiguration, PinSet};
pub use mesh::{Grading, RadialGrid};
pub use minimizer::{Method, MinimizeOptions, SolveResult};
pub use odecheck::{NewtonOptions, ResidualReport};
pub use params::{ParameterSet, ValidationReport};
pub use potential::{Classification, CriticalPointReport};
