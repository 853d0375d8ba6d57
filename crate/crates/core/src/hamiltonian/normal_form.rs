//! Real 2×2 symplectic matrices and their conjugacy-class normal forms.
//!
//! Normal forms follow the usual `Sp(2)` representatives:
//! `D(λ) = diag(λ, 1/λ)`, `R(θ)` the rotation by `θ`, and the Jordan blocks
//! `N₁(λ, a) = [[λ, a], [0, λ]]`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default admissible `|det − 1|` for a matrix to count as symplectic.
pub const DEFAULT_SYMPLECTIC_TOL: f64 = 1e-9;
/// Default `|trace ∓ 2|` below which a matrix is treated as parabolic.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Real 2×2 matrix with unit determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticMatrix2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl SymplecticMatrix2 {
    /// Builds a matrix from rows, checking `|det − 1| ≤ DEFAULT_SYMPLECTIC_TOL`.
    pub fn new(rows: [[f64; 2]; 2]) -> Result<Self> {
        Self::with_tolerance(rows, DEFAULT_SYMPLECTIC_TOL)
    }

    pub fn with_tolerance(rows: [[f64; 2]; 2], tol: f64) -> Result<Self> {
        let m = Self::from_rows_unchecked(rows);
        let defect = (m.det() - 1.0).abs();
        if defect > tol || !defect.is_finite() {
            return Err(Error::NotSymplectic { defect });
        }
        Ok(m)
    }

    pub(crate) fn from_rows_unchecked(rows: [[f64; 2]; 2]) -> Self {
        Self {
            m11: rows[0][0],
            m12: rows[0][1],
            m21: rows[1][0],
            m22: rows[1][1],
        }
    }

    pub fn identity() -> Self {
        Self::from_rows_unchecked([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn minus_identity() -> Self {
        Self::from_rows_unchecked([[-1.0, 0.0], [0.0, -1.0]])
    }

    /// `R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_rows_unchecked([[c, -s], [s, c]])
    }

    /// `D(λ) = diag(λ, 1/λ)`, `λ ≠ 0`.
    pub fn hyperbolic(lambda: f64) -> Self {
        Self::from_rows_unchecked([[lambda, 0.0], [0.0, 1.0 / lambda]])
    }

    /// `N₁(λ, a)` for `λ = ±1`.
    pub fn jordan(lambda: f64, a: f64) -> Self {
        Self::from_rows_unchecked([[lambda, a], [0.0, lambda]])
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m21, self.m22]]
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Inverse; for a symplectic matrix this is `−J Mᵀ J`.
    pub fn inverse(&self) -> Self {
        let d = self.det();
        Self::from_rows_unchecked([
            [self.m22 / d, -self.m12 / d],
            [-self.m21 / d, self.m11 / d],
        ])
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a = self.rows();
        let b = other.rows();
        Self::from_rows_unchecked(std::array::from_fn(|i| {
            std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j])
        }))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::identity();
        let mut base = *self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// Conjugation `P⁻¹ M P`.
    pub fn conjugate_by(&self, p: &Self) -> Self {
        p.inverse().mul(self).mul(p)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (self.m11.abs() + self.m12.abs()).max(self.m21.abs() + self.m22.abs())
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.m11 - other.m11,
            self.m12 - other.m12,
            self.m21 - other.m21,
            self.m22 - other.m22,
        ]
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Eigenvalues, as a pair with non-negative imaginary part first.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let half = 0.5 * self.trace();
        let disc = half * half - self.det();
        if disc >= 0.0 {
            let r = disc.sqrt();
            // avoid cancellation in the smaller root
            let big = half + half.signum() * r;
            let big = if big == 0.0 { r } else { big };
            let small = self.det() / big;
            (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
        } else {
            let im = (-disc).sqrt();
            (Complex64::new(half, im), Complex64::new(half, -im))
        }
    }

    /// Symplectic quadratic form `q(v) = ⟨J v, M v⟩` evaluated on the unit
    /// vectors: `(q(e₁), q(e₂)) = (m21, −m12)`.
    fn symplectic_form_samples(&self) -> (f64, f64) {
        (self.m21, -self.m12)
    }

    /// Sign of the (semi)definite form `q(v) = ⟨J v, M v⟩`, taken from the
    /// unit vector where it is largest in magnitude.
    fn symplectic_form_sign(&self) -> i8 {
        let (qa, qb) = self.symplectic_form_samples();
        let q = if qa.abs() >= qb.abs() { qa } else { qb };
        if q > 0.0 {
            1
        } else if q < 0.0 {
            -1
        } else {
            0
        }
    }
}

impl fmt::Display for SymplecticMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:.12}, {:.12}], [{:.12}, {:.12}]]",
            self.m11, self.m12, self.m21, self.m22
        )
    }
}

/// Conjugacy class of a 2×2 symplectic matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NormalFormClass {
    /// `≈ R(θ)`, `θ ∈ (0, π)`.
    EllipticPositive { theta: f64 },
    /// `≈ R(θ)`, `θ ∈ (π, 2π)`.
    EllipticNegative { theta: f64 },
    /// `≈ D(λ)` with eigenvalue `λ > 1`.
    HyperbolicPositive { lambda: f64 },
    /// `≈ D(−2)`; `lambda < −1` is the eigenvalue of larger modulus.
    HyperbolicNegative { lambda: f64 },
    /// `≈ N₁(1, b)`.
    ParabolicPositive { b: i8 },
    /// `≈ N₁(−1, a)`.
    ParabolicNegative { a: i8 },
    Identity,
    MinusIdentity,
}

impl NormalFormClass {
    /// Short tag without parameters (used in tabular output).
    pub fn tag(&self) -> String {
        match self {
            Self::EllipticPositive { .. } => "EllipticPositive".into(),
            Self::EllipticNegative { .. } => "EllipticNegative".into(),
            Self::HyperbolicPositive { .. } => "HyperbolicPositive".into(),
            Self::HyperbolicNegative { .. } => "HyperbolicNegative".into(),
            Self::ParabolicPositive { b } => format!("ParabolicPositive({b:+})"),
            Self::ParabolicNegative { a } => format!("ParabolicNegative({a:+})"),
            Self::Identity => "Identity".into(),
            Self::MinusIdentity => "MinusIdentity".into(),
        }
    }

    /// The normal-form matrix of this class.
    pub fn representative(&self) -> SymplecticMatrix2 {
        match *self {
            Self::EllipticPositive { theta } | Self::EllipticNegative { theta } => {
                SymplecticMatrix2::rotation(theta)
            }
            Self::HyperbolicPositive { .. } => SymplecticMatrix2::hyperbolic(2.0),
            Self::HyperbolicNegative { .. } => SymplecticMatrix2::hyperbolic(-2.0),
            Self::ParabolicPositive { b } => SymplecticMatrix2::jordan(1.0, b as f64),
            Self::ParabolicNegative { a } => SymplecticMatrix2::jordan(-1.0, a as f64),
            Self::Identity => SymplecticMatrix2::identity(),
            Self::MinusIdentity => SymplecticMatrix2::minus_identity(),
        }
    }

    pub fn is_elliptic(&self) -> bool {
        matches!(
            self,
            Self::EllipticPositive { .. } | Self::EllipticNegative { .. }
        )
    }
}

impl fmt::Display for NormalFormClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EllipticPositive { theta } | Self::EllipticNegative { theta } => {
                write!(f, "{}(theta={theta:.12})", self.tag())
            }
            Self::HyperbolicPositive { lambda } | Self::HyperbolicNegative { lambda } => {
                write!(f, "{}(lambda={lambda:.12})", self.tag())
            }
            _ => f.write_str(&self.tag()),
        }
    }
}

/// Spectral and linear stability of a monodromy matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub spectrally_stable: bool,
    pub linearly_stable: bool,
}

impl StabilityVerdict {
    pub fn from_class(class: &NormalFormClass) -> Self {
        use NormalFormClass::*;
        let linearly_stable = matches!(
            class,
            Identity | MinusIdentity | EllipticPositive { .. } | EllipticNegative { .. }
        );
        let spectrally_stable =
            !matches!(class, HyperbolicPositive { .. } | HyperbolicNegative { .. });
        Self {
            spectrally_stable,
            linearly_stable,
        }
    }
}

fn classify_unchecked(m: &SymplecticMatrix2, tol: f64) -> NormalFormClass {
    let tr = m.trace();
    if (tr + 2.0).abs() <= tol {
        if m.max_abs_diff(&SymplecticMatrix2::minus_identity()) <= tol {
            return NormalFormClass::MinusIdentity;
        }
        // On N₁(−1, a) the form is q(v) = −a·v₂².
        return NormalFormClass::ParabolicNegative {
            a: -m.symplectic_form_sign(),
        };
    }
    if (tr - 2.0).abs() <= tol {
        if m.max_abs_diff(&SymplecticMatrix2::identity()) <= tol {
            return NormalFormClass::Identity;
        }
        return NormalFormClass::ParabolicPositive {
            b: -m.symplectic_form_sign(),
        };
    }
    if tr.abs() < 2.0 {
        let half_gap = 0.5 * (m.m11 - m.m22);
        let sin_abs = (-m.m12 * m.m21 - half_gap * half_gap).max(0.0).sqrt();
        let sign = if m.symplectic_form_sign() >= 0 { 1.0 } else { -1.0 };
        let mut theta = (sign * sin_abs).atan2(0.5 * tr);
        if theta < 0.0 {
            theta += TAU;
        }
        return if sign > 0.0 {
            NormalFormClass::EllipticPositive { theta }
        } else {
            NormalFormClass::EllipticNegative { theta }
        };
    }
    let (l1, l2) = m.eigenvalues();
    let lambda = if l1.re.abs() >= l2.re.abs() { l1.re } else { l2.re };
    if tr > 0.0 {
        NormalFormClass::HyperbolicPositive { lambda }
    } else {
        NormalFormClass::HyperbolicNegative { lambda }
    }
}

/// Normal-form class of `m`; `tol` bounds both `|det − 1|` and the
/// parabolic band `|trace ∓ 2|`.
pub fn classify(m: &SymplecticMatrix2, tol: f64) -> Result<NormalFormClass> {
    let defect = (m.det() - 1.0).abs();
    if defect > tol || !defect.is_finite() {
        return Err(Error::NotSymplectic { defect });
    }
    Ok(classify_unchecked(m, tol))
}

/// Splitting numbers `(S⁺_M(ω), S⁻_M(ω))` of a 2×2 symplectic matrix.
pub fn splitting_numbers(m: &SymplecticMatrix2, omega: Complex64, tol: f64) -> Result<(u8, u8)> {
    let modulus = omega.norm();
    if (modulus - 1.0).abs() > tol.max(1e-12) {
        return Err(Error::NotOnUnitCircle { modulus });
    }
    let class = classify(m, tol)?;
    Ok(splitting_for_class(&class, m.trace(), omega, tol))
}

fn splitting_for_class(class: &NormalFormClass, trace: f64, omega: Complex64, tol: f64) -> (u8, u8) {
    use NormalFormClass::*;
    // ω ∈ σ(M) ⇔ D_ω(M) = 2 Re ω − tr M = 0 for |ω| = 1.
    let is_eigen = (trace - 2.0 * omega.re).abs() <= tol;
    if !is_eigen {
        return (0, 0);
    }
    match *class {
        EllipticPositive { theta } | EllipticNegative { theta } => {
            // ω = e^{iθ} gives (0,1); the conjugate eigenvalue gives (1,0).
            if omega.im * theta.sin() > 0.0 {
                (0, 1)
            } else {
                (1, 0)
            }
        }
        ParabolicPositive { b } if omega.re > 0.0 => {
            if b == -1 {
                (0, 0)
            } else {
                (1, 1)
            }
        }
        ParabolicNegative { a } if omega.re < 0.0 => {
            if a == 1 {
                (0, 0)
            } else {
                (1, 1)
            }
        }
        Identity if omega.re > 0.0 => (1, 1),
        MinusIdentity if omega.re < 0.0 => (1, 1),
        _ => (0, 0),
    }
}

/// Stability verdict of `m`.
pub fn stability_verdict(m: &SymplecticMatrix2, tol: f64) -> Result<StabilityVerdict> {
    Ok(StabilityVerdict::from_class(&classify(m, tol)?))
}

/// Predicted `i_{−1}` of a path ending at `m` with `1`-index `i1`:
/// `i₁ + S⁺(1) + Σ (S⁺(ω) − S⁻(ω)) − S⁻(−1)`, the sum running over the
/// eigenvalues on the open upper unit semicircle.
pub fn index_jump_check(i1: i64, m: &SymplecticMatrix2) -> i64 {
    let tol = DEGENERACY_TOL;
    let class = classify_unchecked(m, tol);
    let tr = m.trace();
    let one = Complex64::new(1.0, 0.0);
    let minus_one = Complex64::new(-1.0, 0.0);
    let (s_plus_one, _) = splitting_for_class(&class, tr, one, tol);
    let (_, s_minus_m1) = splitting_for_class(&class, tr, minus_one, tol);
    let mut sum = 0i64;
    if let NormalFormClass::EllipticPositive { theta } | NormalFormClass::EllipticNegative { theta } =
        class
    {
        let upper = if theta.sin() > 0.0 { theta } else { TAU - theta };
        let w = Complex64::from_polar(1.0, upper);
        let (sp, sm) = splitting_for_class(&class, tr, w, tol);
        sum += sp as i64 - sm as i64;
    }
    i1 + s_plus_one as i64 + sum - s_minus_m1 as i64
}

/// `dim_C ker(M − ωI)`, counting singular values of `M − ωI` at most `tol`.
pub fn kernel_dim(m: &SymplecticMatrix2, omega: Complex64, tol: f64) -> usize {
    let a = [
        Complex64::new(m.m11, 0.0) - omega,
        Complex64::new(m.m12, 0.0),
        Complex64::new(m.m21, 0.0),
        Complex64::new(m.m22, 0.0) - omega,
    ];
    let frob2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let det = (a[0] * a[3] - a[1] * a[2]).norm();
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    let s_max = (0.5 * (frob2 + disc)).sqrt();
    let s_min = if s_max > 0.0 { det / s_max } else { 0.0 };
    [s_max, s_min].iter().filter(|&&s| s <= tol).count()
}
