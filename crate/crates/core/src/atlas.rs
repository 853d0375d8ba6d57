//! Stability atlas over `(β, e)`: region labels from the traced degeneracy
//! curves, cross-checked cell by cell against monodromy classes and the
//! spectral indices.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{self, find_degenerate_betas, CurveLabel, TracedCurves};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    self, classify, index_jump_check, kernel_dim, NormalFormClass, StabilityVerdict, SymplecticMatrix2,
    DEFAULT_ODE_TOL, DEGENERACY_TOL,
};
use crate::interp::Pchip;
use crate::param::ParamPoint;
use crate::spectral::{self, IndexPair};

/// Distance in β below which a point counts as lying on a curve.
pub const ON_CURVE_TOL: f64 = 1e-6;
/// Cells closer than this to a curve skip the region/index assertions.
pub const EXCLUSION_BAND: f64 = 1e-4;
pub const DEFAULT_RESOLUTION: (usize, usize) = (101, 50);
pub const DEFAULT_SWEEP_E_MAX: f64 = 0.9;
/// Relative singular-value threshold for `dim ker(M + I)`.
const RANK_TOL: f64 = 1e-7;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MINUS_ONE: Complex64 = Complex64::new(-1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    RegionI,
    RegionII,
    RegionIII,
    OnGammaL,
    OnGammaR,
    BoundaryBeta0,
    BoundaryBeta1,
}

impl RegionLabel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RegionI => "RegionI",
            Self::RegionII => "RegionII",
            Self::RegionIII => "RegionIII",
            Self::OnGammaL => "OnGammaL",
            Self::OnGammaR => "OnGammaR",
            Self::BoundaryBeta0 => "BoundaryBeta0",
            Self::BoundaryBeta1 => "BoundaryBeta1",
        }
    }

    /// `i_{−1}` required in the open regions.
    pub fn expected_minus_one_index(&self) -> Option<usize> {
        match self {
            Self::RegionI | Self::BoundaryBeta0 => Some(2),
            Self::RegionII => Some(1),
            Self::RegionIII | Self::BoundaryBeta1 => Some(0),
            Self::OnGammaL | Self::OnGammaR => None,
        }
    }
}

impl std::str::FromStr for RegionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use RegionLabel::*;
        [RegionI, RegionII, RegionIII, OnGammaL, OnGammaR, BoundaryBeta0, BoundaryBeta1]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown region {s:?}")))
    }
}

/// Traced curves with their interpolants.
#[derive(Debug, Clone)]
pub struct AtlasCurves {
    pub traced: TracedCurves,
    left: Pchip,
    right: Pchip,
}

impl AtlasCurves {
    pub fn trace(e_grid: &[f64]) -> Result<Self> {
        Self::from_traced(curves::trace_curves(e_grid, curves::DEFAULT_ROOT_TOL)?)
    }

    pub fn from_traced(traced: TracedCurves) -> Result<Self> {
        let left = traced.gamma_l.interpolant()?;
        let right = traced.gamma_r.interpolant()?;
        Ok(Self { traced, left, right })
    }

    pub fn ecc_max(&self) -> f64 {
        self.left.domain().1
    }

    /// `(β_l(e), β_r(e))`.
    pub fn betas_at(&self, ecc: f64) -> Result<(f64, f64)> {
        let max = self.ecc_max();
        match (self.left.eval(ecc), self.right.eval(ecc)) {
            (Some(l), Some(r)) => Ok((l.min(r), l.max(r))),
            _ => Err(Error::CurveRangeExceeded { ecc, max }),
        }
    }

    pub fn distance_to_curves(&self, p: ParamPoint) -> Result<f64> {
        let (l, r) = self.betas_at(p.ecc())?;
        Ok((p.beta() - l).abs().min((p.beta() - r).abs()))
    }
}

pub fn classify_region(p: ParamPoint, curves: &AtlasCurves) -> Result<RegionLabel> {
    let (l, r) = curves.betas_at(p.ecc())?;
    let beta = p.beta();
    Ok(if beta == 0.0 {
        RegionLabel::BoundaryBeta0
    } else if beta == 1.0 {
        RegionLabel::BoundaryBeta1
    } else if (beta - l).abs() <= ON_CURVE_TOL {
        RegionLabel::OnGammaL
    } else if (beta - r).abs() <= ON_CURVE_TOL {
        RegionLabel::OnGammaR
    } else if beta < l {
        RegionLabel::RegionI
    } else if beta < r {
        RegionLabel::RegionII
    } else {
        RegionLabel::RegionIII
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtlasCell {
    pub point: ParamPoint,
    pub region: RegionLabel,
    pub monodromy: SymplecticMatrix2,
    pub class: NormalFormClass,
    pub verdict: StabilityVerdict,
    pub i_1: usize,
    pub nu_1: usize,
    pub i_minus1: usize,
    pub nu_minus1: usize,
}

impl AtlasCell {
    pub fn trace(&self) -> f64 {
        self.monodromy.trace()
    }
}

fn violation(p: ParamPoint, what: &str, expected: impl ToString, found: impl ToString) -> Error {
    Error::ConsistencyViolation {
        beta: p.beta(),
        ecc: p.ecc(),
        what: what.to_string(),
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Evaluates one cell without checking it.
pub fn evaluate_cell(p: ParamPoint, curves: &AtlasCurves) -> Result<AtlasCell> {
    let region = classify_region(p, curves)?;
    let monodromy = hamiltonian::monodromy(p, DEFAULT_ODE_TOL)?;
    let class = classify(&monodromy, DEGENERACY_TOL)?;
    let IndexPair { index: i_1, nullity: nu_1 } = spectral::index_pair(p, ONE)?;
    let IndexPair { index: i_minus1, nullity: nu_minus1 } = spectral::index_pair(p, MINUS_ONE)?;
    Ok(AtlasCell {
        point: p,
        region,
        monodromy,
        class,
        verdict: StabilityVerdict::from_class(&class),
        i_1,
        nu_1,
        i_minus1,
        nu_minus1,
    })
}

/// Checks the region/index/class table and the cross-module identities.
pub fn verify_cell(cell: &AtlasCell, curves: &AtlasCurves) -> Result<()> {
    let p = cell.point;
    let beta = p.beta();
    if beta < 1.0 && cell.i_1 != 1 {
        return Err(violation(p, "i_1 for β < 1", 1, cell.i_1));
    }
    match cell.region {
        RegionLabel::BoundaryBeta0 if cell.nu_1 != 2 => return Err(violation(p, "ν_1 at β = 0", 2, cell.nu_1)),
        RegionLabel::BoundaryBeta1 if (cell.i_1, cell.nu_1) != (0, 1) => {
            return Err(violation(p, "(i_1, ν_1) at β = 1", "(0, 1)", format!("({}, {})", cell.i_1, cell.nu_1)))
        }
        _ => {}
    }
    if curves.distance_to_curves(p)? < EXCLUSION_BAND {
        return Ok(());
    }
    if let Some(expected) = cell.region.expected_minus_one_index() {
        if cell.i_minus1 != expected {
            return Err(violation(p, &format!("i_-1 in {}", cell.region.name()), expected, cell.i_minus1));
        }
    }
    let class_ok = match cell.region {
        RegionLabel::RegionI => {
            matches!(cell.class, NormalFormClass::EllipticNegative { .. }) && cell.monodromy.m21 < 0.0
        }
        RegionLabel::RegionII => {
            matches!(cell.class, NormalFormClass::HyperbolicNegative { .. }) && cell.trace() < -2.0
        }
        RegionLabel::RegionIII => {
            matches!(cell.class, NormalFormClass::EllipticPositive { .. }) && cell.monodromy.m21 > 0.0
        }
        RegionLabel::BoundaryBeta0 => cell.class == NormalFormClass::Identity,
        RegionLabel::BoundaryBeta1 => matches!(cell.class, NormalFormClass::ParabolicPositive { .. }),
        RegionLabel::OnGammaL | RegionLabel::OnGammaR => true,
    };
    if !class_ok {
        return Err(violation(p, &format!("normal form in {}", cell.region.name()), cell.region.name(), cell.class));
    }
    let predicted = index_jump_check(cell.i_1 as i64, &cell.monodromy);
    if predicted != cell.i_minus1 as i64 {
        return Err(violation(p, "i_-1 from splitting numbers vs spectral count", predicted, cell.i_minus1));
    }
    let scale = cell.monodromy.norm_inf().max(1.0);
    let kernel = kernel_dim(&cell.monodromy, MINUS_ONE, RANK_TOL * scale);
    if kernel != cell.nu_minus1 {
        return Err(violation(p, "ν_-1 vs dim ker(M + I)", kernel, cell.nu_minus1));
    }
    Ok(())
}

/// Evaluated and verified cell.
pub fn atlas_cell(p: ParamPoint, curves: &AtlasCurves) -> Result<AtlasCell> {
    let cell = evaluate_cell(p, curves)?;
    verify_cell(&cell, curves)?;
    Ok(cell)
}

/// `n` equally spaced values on `[0, max]`.
pub fn linspace(max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { max } else { max * i as f64 / (n - 1) as f64 }).collect()
}

/// Cells on the grid `eccs × betas`, e-major, evaluated in parallel.
pub fn sweep_cells(curves: &AtlasCurves, betas: &[f64], eccs: &[f64]) -> Result<Vec<AtlasCell>> {
    let points = eccs
        .iter()
        .flat_map(|&e| betas.iter().map(move |&b| (b, e)))
        .map(|(b, e)| ParamPoint::new(b, e))
        .collect::<Result<Vec<_>>>()?;
    points.par_iter().map(|&p| atlas_cell(p, curves)).collect()
}

#[derive(Debug, Clone)]
pub struct Atlas {
    pub curves: AtlasCurves,
    pub betas: Vec<f64>,
    pub eccs: Vec<f64>,
    pub cells: Vec<AtlasCell>,
}

/// Full sweep over `[0, 1] × [0, e_max]`; curves are traced at the sweep's
/// eccentricities so that interpolation is exact on the grid.
pub fn atlas_sweep(resolution: (usize, usize), e_max: f64) -> Result<Atlas> {
    let (nb, ne) = resolution;
    if nb < 2 || ne < 2 {
        return Err(Error::InvalidParameter(format!("resolution {nb}x{ne} below 2x2")));
    }
    if !(0.0..1.0).contains(&e_max) || e_max == 0.0 {
        return Err(Error::EccOutOfRange(e_max));
    }
    let betas = linspace(1.0, nb);
    let eccs = linspace(e_max, ne);
    let curves = AtlasCurves::trace(&eccs)?;
    let cells = sweep_cells(&curves, &betas, &eccs)?;
    Ok(Atlas { curves, betas, eccs, cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobeCell {
    pub mu: f64,
    pub cell: AtlasCell,
}

/// Atlas cell of the z-axis equation of the Robe problem, `β = 1 − μ`.
pub fn robe_stability(mu: f64, ecc: f64, curves: &AtlasCurves) -> Result<RobeCell> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!("μ = {mu} outside [0, 1]")));
    }
    let p = ParamPoint::new(1.0 - mu, ecc)?;
    Ok(RobeCell { mu, cell: atlas_cell(p, curves)? })
}

/// Classes and verdicts of the monodromy exactly on `Γ_l` and `Γ_r` at `ecc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveNormalForms {
    pub ecc: f64,
    pub beta_l: f64,
    pub beta_r: f64,
    pub class_l: NormalFormClass,
    pub class_r: NormalFormClass,
    pub verdict_l: StabilityVerdict,
    pub verdict_r: StabilityVerdict,
}

impl CurveNormalForms {
    pub fn class(&self, label: CurveLabel) -> NormalFormClass {
        match label {
            CurveLabel::GammaL => self.class_l,
            CurveLabel::GammaR => self.class_r,
        }
    }

    /// Whether the classes are `N₁(−1, 1)` on `Γ_l` and `N₁(−1, −1)` on `Γ_r`
    /// (`−I` on both where the curves meet).
    pub fn matches_expected(&self) -> bool {
        if (self.beta_r - self.beta_l).abs() <= curves::CROSSING_TOL {
            return self.class_l == NormalFormClass::MinusIdentity && self.class_r == NormalFormClass::MinusIdentity;
        }
        self.class_l == NormalFormClass::ParabolicNegative { a: 1 }
            && self.class_r == NormalFormClass::ParabolicNegative { a: -1 }
    }
}

pub fn curve_normal_forms(ecc: f64) -> Result<CurveNormalForms> {
    let r = find_degenerate_betas(ecc, curves::DEFAULT_ROOT_TOL)?;
    let (beta_l, beta_r) = (r.beta_e1.min(r.beta_e2), r.beta_e1.max(r.beta_e2));
    let class_at = |beta: f64| -> Result<NormalFormClass> {
        let m = hamiltonian::monodromy(ParamPoint::new(beta, ecc)?, DEFAULT_ODE_TOL)?;
        classify(&m, DEGENERACY_TOL)
    };
    let class_l = class_at(beta_l)?;
    let class_r = class_at(beta_r)?;
    Ok(CurveNormalForms {
        ecc,
        beta_l,
        beta_r,
        class_l,
        class_r,
        verdict_l: StabilityVerdict::from_class(&class_l),
        verdict_r: StabilityVerdict::from_class(&class_r),
    })
}
