//! Fundamental solutions and monodromy of the linearised system
//! `ż = J B(t) z`, `z = (ẋ, x)`, plus their symplectic classification.

pub mod normal_form;
pub mod ode;

use std::f64::consts::TAU;

pub use normal_form::{
    classify, index_jump_check, kernel_dim, splitting_numbers, stability_verdict, NormalFormClass,
    StabilityVerdict, SymplecticMatrix2, DEFAULT_SYMPLECTIC_TOL, DEGENERACY_TOL,
};
pub use ode::{AdaptiveOptions, StepStats};

use crate::error::{Error, Result};
use crate::param::ParamPoint;

/// Default ODE tolerance for monodromy computations.
pub const DEFAULT_ODE_TOL: f64 = 1e-12;

fn check_interval(t_end: f64) -> Result<()> {
    if !(0.0..=TAU).contains(&t_end) {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} outside [0, 2π]"
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

// State is the row-major fundamental matrix Γ with Γ' = J B Γ, where
// J B = [[0, −(1 − V)], [1, 0]].
fn rhs(p: ParamPoint) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    move |t, y| {
        let k = 1.0 - p.potential(t);
        [-k * y[2], -k * y[3], y[0], y[1]]
    }
}

fn to_matrix(y: [f64; 4]) -> [[f64; 2]; 2] {
    [[y[0], y[1]], [y[2], y[3]]]
}

/// Fundamental solution `γ(t_end)` with `γ(0) = I`.
pub fn fundamental_solution(p: ParamPoint, t_end: f64, tol: f64) -> Result<SymplecticMatrix2> {
    check_interval(t_end)?;
    check_tol(tol)?;
    let (y, _) = ode::integrate_adaptive(
        rhs(p),
        0.0,
        t_end,
        [1.0, 0.0, 0.0, 1.0],
        &AdaptiveOptions::with_tol(tol),
    )?;
    let m = to_matrix(y);
    // rounding in det scales with the squared entries, so the check is relative
    let scale = m.iter().flatten().fold(1.0_f64, |a, x| a.max(x.abs())).powi(2);
    SymplecticMatrix2::with_tolerance(m, (10.0 * tol).max(DEFAULT_SYMPLECTIC_TOL) * scale)
}

/// Monodromy `γ(2π)`.
pub fn monodromy(p: ParamPoint, tol: f64) -> Result<SymplecticMatrix2> {
    fundamental_solution(p, TAU, tol)
}

/// Monodromy from a fixed-step RK4 Richardson extrapolation, independent of
/// the adaptive integrator.
pub fn monodromy_richardson(p: ParamPoint, steps: usize) -> SymplecticMatrix2 {
    let y = ode::integrate_richardson(rhs(p), 0.0, TAU, [1.0, 0.0, 0.0, 1.0], steps);
    SymplecticMatrix2::from_rows_unchecked(to_matrix(y))
}

/// Fundamental matrix `[[y₁, y₂], [y₁', y₂']]` of `ẍ + q(t) x = 0` on
/// `[t0, t1]` with `(y₁, y₁') = (1, 0)`, `(y₂, y₂') = (0, 1)` at `t0`.
pub fn hill_fundamental<Q: Fn(f64) -> f64>(q: Q, t0: f64, t1: f64, tol: f64) -> Result<[[f64; 2]; 2]> {
    check_tol(tol)?;
    // state [y₁, y₂, y₁', y₂']
    let f = |t: f64, y: &[f64; 4]| {
        let k = q(t);
        [y[2], y[3], -k * y[0], -k * y[1]]
    };
    let (y, _) = ode::integrate_adaptive(f, t0, t1, [1.0, 0.0, 0.0, 1.0], &AdaptiveOptions::with_tol(tol))?;
    Ok(to_matrix(y))
}
