//! Parameter points of the operator family and the Hamiltonian coefficient matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(β, e)` of the parameter rectangle `[0, 1] × [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct ParamPoint {
    beta: f64,
    ecc: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    beta: f64,
    ecc: f64,
}

impl TryFrom<RawPoint> for ParamPoint {
    type Error = Error;

    fn try_from(raw: RawPoint) -> Result<Self> {
        Self::new(raw.beta, raw.ecc)
    }
}

impl ParamPoint {
    pub fn new(beta: f64, ecc: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta = {beta} outside [0, 1]")));
        }
        if !(0.0..1.0).contains(&ecc) {
            return Err(Error::EccOutOfRange(ecc));
        }
        Ok(Self { beta, ecc })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ecc(&self) -> f64 {
        self.ecc
    }

    /// Potential weight `β / (1 + e cos t)`.
    #[inline]
    pub fn potential(&self, t: f64) -> f64 {
        self.beta / (1.0 + self.ecc * t.cos())
    }
}

/// `B(t) = diag(1, 1 − β/(1 + e cos t))`, returned as a full 2×2 array.
pub fn system_matrix(p: &ParamPoint, t: f64) -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0 - p.potential(t)]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(ParamPoint::new(-0.1, 0.0).is_err());
        assert!(ParamPoint::new(1.1, 0.0).is_err());
        assert!(matches!(ParamPoint::new(0.5, 1.0), Err(Error::EccOutOfRange(_))));
        assert!(ParamPoint::new(0.5, -1e-3).is_err());
        assert!(ParamPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn deserialize_validates() {
        let p: ParamPoint = serde_json::from_str(r#"{"beta":0.5,"ecc":0.2}"#).unwrap();
        assert_eq!(p, ParamPoint::new(0.5, 0.2).unwrap());
        assert!(serde_json::from_str::<ParamPoint>(r#"{"beta":1.5,"ecc":0.2}"#).is_err());
        assert!(ParamPoint::new(1.0, 0.999).is_ok());
    }

    #[test]
    fn system_matrix_examples() {
        let b = system_matrix(&ParamPoint::new(0.0, 0.7).unwrap(), 1.234);
        assert_eq!(b, [[1.0, 0.0], [0.0, 1.0]]);
        for t in [0.0, 1.0, 3.0] {
            let b = system_matrix(&ParamPoint::new(0.75, 0.0).unwrap(), t);
            assert_eq!(b, [[1.0, 0.0], [0.0, 0.25]]);
        }
        let b = system_matrix(&ParamPoint::new(0.5, 0.5).unwrap(), std::f64::consts::PI);
        assert!(b[1][1].abs() < 1e-15);
        assert_eq!(b[0][0], 1.0);
    }

    #[test]
    fn system_matrix_even_and_periodic() {
        let p = ParamPoint::new(0.4, 0.6).unwrap();
        for t in [0.3, 1.7, 2.9] {
            let tau = std::f64::consts::TAU;
            assert!((system_matrix(&p, t)[1][1] - system_matrix(&p, -t)[1][1]).abs() < 1e-14);
            assert!((system_matrix(&p, t)[1][1] - system_matrix(&p, t + tau)[1][1]).abs() < 1e-13);
        }
    }
}
