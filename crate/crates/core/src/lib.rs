//! Floquet analysis of the linearised elliptic Lagrangian problem
//! `−ẍ − x + β x /(1 + e cos t)`: monodromy classification, Morse/Maslov
//! indices, degeneracy curves, trace-formula stability bounds and the
//! stability atlas over `(β, e) ∈ [0, 1] × [0, 1)`.

pub mod atlas;
pub mod curves;
pub mod error;
pub mod hamiltonian;
pub mod interp;
pub mod param;
pub mod quadrature;
pub mod spectral;
pub mod trace_formula;

pub use error::{Error, Result};
pub use param::ParamPoint;

/// Upper eccentricity for curve tracing and sweeps unless overridden.
pub const DEFAULT_E_MAX: f64 = 0.99;
