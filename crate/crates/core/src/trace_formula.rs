//! Trace of the squared perturbation operator at `ω = −1` and the
//! eccentricity bounds for ellipticity it implies.
//!
//! With `θ = √(1−β)`, `C = cos(πθ)`, and integration over
//! `s, t ∈ [π/2, 3π/2]`:
//!
//! ```text
//! f  = β²/(2(1−β)C²) ∬_{s≤t} cos s cos t sin²(θ(π − (t−s)))
//! f₁ = β²/(4(1−β))   ∬_{s≤t} cos s cos t [1 − cos(2θ(t−s−π/2))/C]
//! f₂ = β²/(4(1−β))   ∬       cos s cos t [1 − cos²(θ(s−t))/C²]
//! f  = 2f₁ − f₂
//! ```
//!
//! `f` is checked against the truncated Fourier matrix of the operator
//! `cos^±(t)·diag(0, β)·(−J d/dt − νJ − B_{β,0})⁻¹` with `e^{2πν} = −1`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

pub const DEFAULT_QUAD_ORDER: usize = 64;
pub const SINGULARITY_GUARD: f64 = 1e-3;
pub const BETA_CUTOFF: f64 = 0.999;
pub const DEFAULT_ORACLE_MODES: usize = 256;
const QUAD_REL_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceValue {
    pub beta: f64,
    pub omega: Complex64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..=BETA_CUTOFF).contains(&beta) {
        return Err(Error::InvalidParameter(format!("β = {beta} outside [0, {BETA_CUTOFF}]")));
    }
    if (beta - 0.75).abs() < SINGULARITY_GUARD {
        return Err(Error::NearSingularity { beta, guard: SINGULARITY_GUARD });
    }
    Ok(())
}

/// `∬_{a≤s≤t≤b} g(s, t)` through `s = a + (t − a)u`, `u ∈ [0, 1]`.
fn triangle<G: Fn(f64, f64) -> f64>(rule: &GaussLegendre, a: f64, b: f64, g: G) -> f64 {
    rule.integrate(a, b, |t| (t - a) * rule.integrate(0.0, 1.0, |u| g(a + (t - a) * u, t)))
}

fn components(beta: f64, rule: &GaussLegendre) -> (f64, f64, f64) {
    let theta = (1.0 - beta).sqrt();
    let c = (PI * theta).cos();
    let (a, b) = (FRAC_PI_2, 3.0 * FRAC_PI_2);
    let pre = beta * beta / (4.0 * (1.0 - beta));

    let direct = triangle(rule, a, b, |s, t| {
        let w = (theta * (PI - (t - s))).sin();
        s.cos() * t.cos() * w * w
    });
    let f = 2.0 * pre * direct / (c * c);

    let f1 = pre * triangle(rule, a, b, |s, t| {
        s.cos() * t.cos() * (1.0 - (2.0 * theta * (t - s - FRAC_PI_2)).cos() / c)
    });
    let f2 = pre * rule.integrate_2d((a, b), (a, b), |s, t| {
        let q = (theta * (s - t)).cos() / c;
        s.cos() * t.cos() * (1.0 - q * q)
    });
    (f, f1, f2)
}

/// `f(β, −1)` with its two components, converged under doubling the order.
pub fn f_closed_form(beta: f64, quad_order: usize) -> Result<TraceValue> {
    check_beta(beta)?;
    if quad_order < 16 {
        return Err(Error::InvalidParameter(format!("quadrature order {quad_order} < 16")));
    }
    let (f, _, _) = components(beta, &GaussLegendre::new(quad_order));
    let (fd, f1d, f2d) = components(beta, &GaussLegendre::new(2 * quad_order));
    let change = (fd - f).abs() / fd.abs().max(f64::MIN_POSITIVE);
    if fd != 0.0 && change >= QUAD_REL_TOL {
        return Err(Error::QuadratureNotConverged { beta, change });
    }
    Ok(TraceValue {
        beta,
        omega: Complex64::new(-1.0, 0.0),
        f: fd,
        f1: f1d,
        f2: f2d,
    })
}

/// Which half of `cos t` multiplies the perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CosineHalf {
    /// `max(cos t, 0)`
    Plus,
    /// `min(cos t, 0)`
    Minus,
}

/// Fourier coefficient `n` of `cos^±`.
fn half_cosine_coeff(n: i64, half: CosineHalf) -> f64 {
    let sign = match half {
        CosineHalf::Plus => 1.0,
        CosineHalf::Minus => -1.0,
    };
    match n.abs() {
        0 => sign / PI,
        1 => 0.25,
        m if m % 2 == 1 => 0.0,
        m => {
            let h = (m / 2) as f64;
            let alt = if (m / 2) % 2 == 1 { 1.0 } else { -1.0 };
            sign * alt / (PI * (4.0 * h * h - 1.0))
        }
    }
}

fn oracle_trace(beta: f64, half: CosineHalf, n: usize) -> Result<f64> {
    let modes: Vec<f64> = (-(n as i64)..n as i64).map(|k| k as f64 + 0.5).collect();
    let dim = modes.len();
    // per-mode inverse of [[−1, iκ], [−iκ, −(1−β)]]
    let mut inverse = Vec::with_capacity(dim);
    for &kappa in &modes {
        let det = (1.0 - beta) - kappa * kappa;
        if det.abs() < 1e-12 {
            return Err(Error::NotInvertible { beta });
        }
        let i = Complex64::i();
        inverse.push([
            [Complex64::from(-(1.0 - beta) / det), -i * kappa / det],
            [i * kappa / det, Complex64::from(-1.0 / det)],
        ]);
    }
    // F = cos^± · diag(0, β) · L⁻¹, stored densely in (mode, component) order.
    let size = 2 * dim;
    let mut f = vec![Complex64::new(0.0, 0.0); size * size];
    for row in 0..dim {
        for col in 0..dim {
            let c = half_cosine_coeff(row as i64 - col as i64, half);
            if c == 0.0 {
                continue;
            }
            for b in 0..2 {
                f[(2 * row + 1) * size + 2 * col + b] = c * beta * inverse[col][1][b];
            }
        }
    }
    // rows in parallel, summed in a fixed order so the result is reproducible
    let rows: Vec<Complex64> = (0..size)
        .into_par_iter()
        .map(|i| (0..size).map(|j| f[i * size + j] * f[j * size + i]).sum::<Complex64>())
        .collect();
    let tr: Complex64 = rows.into_iter().sum();
    Ok(tr.re)
}

/// `Tr(F²)` from the truncated operator, checked under `N → 2N`.
pub fn f_operator_oracle(beta: f64, half: CosineHalf, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("β = {beta} outside [0, 1)")));
    }
    if n < 8 {
        return Err(Error::InvalidParameter(format!("mode count {n} < 8")));
    }
    let coarse = oracle_trace(beta, half, n)?;
    let fine = oracle_trace(beta, half, 2 * n)?;
    if (fine - coarse).abs() > ORACLE_TOL * fine.abs().max(1.0) {
        return Err(Error::NotConverged(format!(
            "operator trace at β = {beta}: {coarse} (N = {n}) vs {fine} (N = {})",
            2 * n
        )));
    }
    Ok(fine)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// `1/√f` on `[0, 3/4)`.
    Thm13Low,
    /// `1/(1+√f)` on `(3/4, 1)`.
    Thm13High,
    /// `1/(1+√f)` on `[0, 3/4)`.
    Thm33Low,
    /// `1/√f` on `(3/4, 1)`.
    Thm33High,
    /// Pointwise minimum of both assignments, i.e. `1/(1+√f)` on both sides.
    ConservativeMin,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 5] = [
        BoundVariant::Thm13Low,
        BoundVariant::Thm13High,
        BoundVariant::Thm33Low,
        BoundVariant::Thm33High,
        BoundVariant::ConservativeMin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Thm13Low => "thm13_low",
            Self::Thm13High => "thm13_high",
            Self::Thm33Low => "thm33_low",
            Self::Thm33High => "thm33_high",
            Self::ConservativeMin => "conservative_min",
        }
    }

    /// Whether `beta` lies in the variant's side of `3/4`.
    pub fn covers(&self, beta: f64) -> bool {
        match self {
            Self::Thm13Low | Self::Thm33Low => beta < 0.75,
            Self::Thm13High | Self::Thm33High => beta > 0.75,
            Self::ConservativeMin => true,
        }
    }
}

impl std::str::FromStr for BoundVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown bound variant {s:?}")))
    }
}

/// Largest eccentricity certified elliptic at `beta`, clamped to 1.
pub fn stability_bound(beta: f64, variant: BoundVariant) -> Result<f64> {
    check_beta(beta)?;
    if !variant.covers(beta) {
        return Err(Error::InvalidParameter(format!("β = {beta} outside the range of {}", variant.name())));
    }
    let f = f_closed_form(beta, DEFAULT_QUAD_ORDER)?.f;
    let root = f.max(0.0).sqrt();
    let inverse_root = |r: f64| if r == 0.0 { f64::INFINITY } else { 1.0 / r };
    let bound = match variant {
        BoundVariant::Thm13Low | BoundVariant::Thm33High => inverse_root(root),
        BoundVariant::Thm13High | BoundVariant::Thm33Low | BoundVariant::ConservativeMin => 1.0 / (1.0 + root),
    };
    Ok(bound.min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub variant: BoundVariant,
    /// `(β, e_max)` pairs.
    pub samples: Vec<(f64, f64)>,
}

pub fn bound_curve(beta_grid: &[f64], variant: BoundVariant) -> Result<BoundCurve> {
    let samples = beta_grid
        .par_iter()
        .map(|&beta| stability_bound(beta, variant).map(|e| (beta, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundCurve { variant, samples })
}
