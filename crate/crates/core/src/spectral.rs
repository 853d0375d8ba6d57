//! ω-Morse index and nullity of `A(β, e)` from a Galerkin truncation in the
//! twisted Fourier basis `e^{i(k+σ)t}`, `ω = e^{2πiσ}`.
//!
//! Entries of the Hill matrix are real here: the potential is even, so its
//! Fourier coefficients are real and symmetric, and the Hermitian matrix of
//! the operator in this basis is real symmetric.
//!
//! Eigenvalue counts use Sylvester inertia. Modes with `|k+σ| ≥ 2` form a
//! positive definite block (the potential term is a positive multiplication
//! operator), which is factored by a banded Cholesky; the inertia of the
//! whole matrix is then that of the few-mode Schur complement.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::ParamPoint;

pub const DEFAULT_HALF_BANDWIDTH: usize = 128;
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Relative size below which Fourier coefficients are dropped from the band.
const COEFF_CUTOFF: f64 = 1e-17;

/// ω-index and ω-nullity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexPair {
    pub index: usize,
    pub nullity: usize,
}

/// Cosine coefficients `c_n` of `1/(1 + e cos t) = c₀ + 2 Σ c_n cos(nt)`:
/// `c_n = (−r)ⁿ / √(1−e²)` with `r = e / (1 + √(1−e²))`.
pub fn inverse_kepler_fourier_coeffs(ecc: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&ecc) {
        return Err(Error::EccOutOfRange(ecc));
    }
    let s = (1.0 - ecc * ecc).sqrt();
    let r = ecc / (1.0 + s);
    let mut c = Vec::with_capacity(n_max + 1);
    let mut v = 1.0 / s;
    for _ in 0..=n_max {
        c.push(v);
        v *= -r;
    }
    Ok(c)
}

/// `σ = arg(ω)/2π ∈ [0, 1)`.
pub fn sigma_of(omega: Complex64) -> Result<f64> {
    let modulus = omega.norm();
    if (modulus - 1.0).abs() > 1e-12 {
        return Err(Error::NotOnUnitCircle { modulus });
    }
    let mut s = omega.arg() / TAU;
    if s < 0.0 {
        s += 1.0;
    }
    if s >= 1.0 {
        s -= 1.0;
    }
    Ok(s)
}

/// Truncated matrix of `A(β, e)` on the ω-domain, modes `k = −N..=N`.
#[derive(Debug, Clone)]
pub struct HillMatrix {
    pub omega: Complex64,
    pub sigma: f64,
    pub half_bandwidth: usize,
    /// Row/column `j` is the mode `k = j − N`.
    pub entries: DMatrix<f64>,
}

impl HillMatrix {
    pub fn dim(&self) -> usize {
        2 * self.half_bandwidth + 1
    }

    pub fn mode(&self, j: usize) -> f64 {
        j as f64 - self.half_bandwidth as f64 + self.sigma
    }

    /// Dense eigenvalues, ascending. Intended for checks on small matrices.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.entries - self.entries.transpose()).amax()
    }
}

pub fn hill_matrix(p: ParamPoint, omega: Complex64, n: usize) -> Result<HillMatrix> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!("half bandwidth {n} < 8")));
    }
    let sigma = sigma_of(omega)?;
    let c = inverse_kepler_fourier_coeffs(p.ecc(), 2 * n)?;
    let dim = 2 * n + 1;
    let beta = p.beta();
    let entries = DMatrix::from_fn(dim, dim, |i, j| {
        let v = beta * c[i.abs_diff(j)];
        if i == j {
            let kappa = i as f64 - n as f64 + sigma;
            kappa * kappa - 1.0 + v
        } else {
            v
        }
    });
    Ok(HillMatrix {
        omega,
        sigma,
        half_bandwidth: n,
        entries,
    })
}

/// Number of eigenvalues of the truncated operator strictly below `shift`.
fn count_below(p: ParamPoint, sigma: f64, n: usize, shift: f64) -> Result<usize> {
    let c = inverse_kepler_fourier_coeffs(p.ecc(), 2 * n)?;
    let cut = COEFF_CUTOFF * c[0];
    let band = c.iter().position(|v| v.abs() < cut).unwrap_or(c.len()).max(1);
    let beta = p.beta();
    let modes: Vec<f64> = (0..=2 * n).map(|j| j as f64 - n as f64 + sigma).collect();
    let (low, high): (Vec<usize>, Vec<usize>) = (0..modes.len()).partition(|&j| modes[j].abs() < 2.0);

    let entry = |i: usize, j: usize| -> f64 {
        let d = i.abs_diff(j);
        let v = if d < band { beta * c[d] } else { 0.0 };
        if i == j {
            modes[i] * modes[i] - 1.0 + v - shift
        } else {
            v
        }
    };

    // Cholesky of the high block, restricted to its band.
    let m = high.len();
    let mut l = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        let lo = j.saturating_sub(band);
        let mut diag = entry(high[j], high[j]);
        for k in lo..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag.is_nan() || diag <= 0.0 {
            return Err(Error::NotConverged(format!(
                "high-mode block not positive definite at β = {}, e = {}",
                p.beta(),
                p.ecc()
            )));
        }
        let djj = diag.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..(j + band + 1).min(m) {
            let mut v = entry(high[i], high[j]);
            for k in i.saturating_sub(band).max(lo)..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / djj;
        }
    }

    // Schur complement S = H_LL − (L⁻¹ H_HL)ᵀ (L⁻¹ H_HL).
    let q = low.len();
    let mut x = DMatrix::<f64>::from_fn(m, q, |i, j| entry(high[i], low[j]));
    for col in 0..q {
        for i in 0..m {
            let mut v = x[(i, col)];
            for k in i.saturating_sub(band)..i {
                v -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = v / l[(i, i)];
        }
    }
    let s = DMatrix::from_fn(q, q, |i, j| entry(low[i], low[j])) - x.transpose() * &x;
    let neg = SymmetricEigen::new(s).eigenvalues.iter().filter(|&&v| v < 0.0).count();
    Ok(neg)
}

fn index_pair_at(p: ParamPoint, sigma: f64, n: usize, zero_tol: f64) -> Result<IndexPair> {
    let index = count_below(p, sigma, n, -zero_tol)?;
    let below = count_below(p, sigma, n, zero_tol)?;
    Ok(IndexPair {
        index,
        nullity: below - index,
    })
}

/// ω-index and nullity, checked for stability under `N → 2N`.
pub fn index_and_nullity(p: ParamPoint, omega: Complex64, n: usize, zero_tol: f64) -> Result<IndexPair> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!("half bandwidth {n} < 8")));
    }
    if zero_tol.is_nan() || zero_tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("zero tolerance {zero_tol} must be positive")));
    }
    let sigma = sigma_of(omega)?;
    let coarse = index_pair_at(p, sigma, n, zero_tol)?;
    let fine = index_pair_at(p, sigma, 2 * n, zero_tol)?;
    if coarse != fine {
        return Err(Error::NotConverged(format!(
            "index pair {coarse:?} at N = {n} but {fine:?} at N = {} (β = {}, e = {})",
            2 * n,
            p.beta(),
            p.ecc()
        )));
    }
    if fine.nullity > 2 {
        return Err(Error::NotConverged(format!(
            "nullity {} exceeds 2 at β = {}, e = {}; zero tolerance too loose",
            fine.nullity,
            p.beta(),
            p.ecc()
        )));
    }
    Ok(fine)
}

/// [`index_and_nullity`] with the default truncation and tolerance.
pub fn index_pair(p: ParamPoint, omega: Complex64) -> Result<IndexPair> {
    index_and_nullity(p, omega, DEFAULT_HALF_BANDWIDTH, DEFAULT_ZERO_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);
    const MINUS_ONE: Complex64 = Complex64::new(-1.0, 0.0);
    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn pt(beta: f64, ecc: f64) -> ParamPoint {
        ParamPoint::new(beta, ecc).unwrap()
    }

    /// Plain DFT of the sampled function, independent of the closed form.
    fn dft_cosine_coeffs(ecc: f64, samples: usize, n_max: usize) -> Vec<f64> {
        (0..=n_max)
            .map(|n| {
                (0..samples)
                    .map(|j| {
                        let t = TAU * j as f64 / samples as f64;
                        (n as f64 * t).cos() / (1.0 + ecc * t.cos())
                    })
                    .sum::<f64>()
                    / samples as f64
            })
            .collect()
    }

    #[test]
    fn fourier_coefficients_match_dft() {
        for ecc in [0.0, 0.1, 0.3, 0.6, 0.8, 0.9] {
            let closed = inverse_kepler_fourier_coeffs(ecc, 40).unwrap();
            let dft = dft_cosine_coeffs(ecc, 4096, 40);
            for (n, (a, b)) in closed.iter().zip(&dft).enumerate() {
                assert!((a - b).abs() < 1e-12, "e={ecc} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fourier_coefficient_examples() {
        let c = inverse_kepler_fourier_coeffs(0.6, 3).unwrap();
        assert!((c[0] - 1.25).abs() < 1e-15);
        assert!((c[1] + 1.25 / 3.0).abs() < 1e-15);
        let c0 = inverse_kepler_fourier_coeffs(0.0, 4).unwrap();
        assert_eq!(c0, [1.0, 0.0, 0.0, 0.0, 0.0].iter().map(|v: &f64| v.abs()).collect::<Vec<_>>());
        assert!(matches!(inverse_kepler_fourier_coeffs(1.0, 2), Err(Error::EccOutOfRange(_))));
    }

    #[test]
    fn hill_matrix_examples() {
        let h = hill_matrix(pt(0.0, 0.3), MINUS_ONE, 8).unwrap();
        for j in 0..h.dim() {
            let k = h.mode(j);
            assert!((h.entries[(j, j)] - (k * k - 1.0)).abs() < 1e-15);
        }
        assert!(h.entries.iter().enumerate().all(|(idx, v)| idx % (h.dim() + 1) == 0 || *v == 0.0));

        let h = hill_matrix(pt(0.75, 0.0), MINUS_ONE, 8).unwrap();
        let zeros = h.eigenvalues().iter().filter(|v| v.abs() < 1e-14).count();
        assert_eq!(zeros, 2);

        let h = hill_matrix(pt(1.0, 0.0), ONE, 8).unwrap();
        for j in 0..h.dim() {
            let k = h.mode(j);
            assert!((h.entries[(j, j)] - k * k).abs() < 1e-15);
        }
        let h = hill_matrix(pt(0.6, 0.7), I, 16).unwrap();
        assert!(h.symmetry_defect() < 1e-12);
        assert!(hill_matrix(pt(0.6, 0.7), I, 4).is_err());
    }

    #[test]
    fn index_examples() {
        let cases = [
            (0.5, 0.0, MINUS_ONE, 2, 0),
            (0.75, 0.0, MINUS_ONE, 0, 2),
            (0.3, 0.5, ONE, 1, 0),
            (0.0, 0.2, ONE, 1, 2),
            (1.0, 0.4, MINUS_ONE, 0, 0),
            (1.0, 0.4, ONE, 0, 1),
            (0.9, 0.0, MINUS_ONE, 0, 0),
        ];
        for (beta, ecc, w, index, nullity) in cases {
            let got = index_pair(pt(beta, ecc), w).unwrap();
            assert_eq!(got, IndexPair { index, nullity }, "β={beta} e={ecc} ω={w}");
        }
    }

    #[test]
    fn schur_inertia_matches_dense_eigenvalues() {
        for &(beta, ecc) in &[(0.2, 0.3), (0.55, 0.6), (0.8, 0.85), (0.95, 0.5), (0.4, 0.95)] {
            for w in [ONE, MINUS_ONE, I, Complex64::from_polar(1.0, 2.0)] {
                let p = pt(beta, ecc);
                let h = hill_matrix(p, w, 48).unwrap();
                let sigma = sigma_of(w).unwrap();
                for shift in [-0.3, 0.0, 0.7, 2.5] {
                    let dense = h.eigenvalues().iter().filter(|&&v| v < shift).count();
                    assert_eq!(count_below(p, sigma, 48, shift).unwrap(), dense, "β={beta} e={ecc} ω={w} shift={shift}");
                }
            }
        }
    }

    #[test]
    fn index_monotone_in_beta() {
        for ecc in [0.0, 0.3, 0.7] {
            for w in [ONE, MINUS_ONE, I] {
                let mut prev = usize::MAX;
                for j in 0..50 {
                    let beta = j as f64 / 49.0;
                    let idx = index_pair(pt(beta, ecc), w).unwrap().index;
                    assert!(idx <= prev, "e={ecc} ω={w} β={beta}: {idx} > {prev}");
                    prev = idx;
                }
            }
        }
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma_of(ONE).unwrap(), 0.0);
        assert_eq!(sigma_of(MINUS_ONE).unwrap(), 0.5);
        assert_eq!(sigma_of(I).unwrap(), 0.25);
        assert!((sigma_of(-I).unwrap() - 0.75).abs() < 1e-15);
        assert!(sigma_of(Complex64::new(0.5, 0.0)).is_err());
    }
}
