//! Tabular datasets: CSV with 17 significant digits and JSON arrays of the
//! same records.

use std::fs;
use std::io::Write;
use std::path::Path;

use floquet_atlas::atlas::{AtlasCell, AtlasCurves, RegionLabel, EXCLUSION_BAND};
use floquet_atlas::curves::{Parity, TracedCurves};
use floquet_atlas::trace_formula::BoundCurve;
use floquet_atlas::ParamPoint;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Row of an atlas dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasRecord {
    pub beta: f64,
    pub e: f64,
    pub trace: f64,
    pub class: String,
    pub i1: usize,
    pub nu1: usize,
    pub im1: usize,
    pub num1: usize,
    pub region: String,
}

pub const ATLAS_HEADER: [&str; 9] = ["beta", "e", "trace", "class", "i1", "nu1", "im1", "num1", "region"];

impl From<&AtlasCell> for AtlasRecord {
    fn from(c: &AtlasCell) -> Self {
        Self {
            beta: c.point.beta(),
            e: c.point.ecc(),
            trace: c.trace(),
            class: c.class.tag(),
            i1: c.i_1,
            nu1: c.nu_1,
            im1: c.i_minus1,
            num1: c.nu_minus1,
            region: c.region.name().into(),
        }
    }
}

impl AtlasRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            float(self.beta),
            float(self.e),
            float(self.trace),
            self.class.clone(),
            self.i1.to_string(),
            self.nu1.to_string(),
            self.im1.to_string(),
            self.num1.to_string(),
            self.region.clone(),
        ]
    }

    /// Region/index/class table check on a stored row.
    pub fn verdict(&self, curves: &AtlasCurves) -> Result<bool, Failure> {
        let region: RegionLabel = self.region.parse().map_err(Failure::from)?;
        if self.beta < 1.0 && self.i1 != 1 {
            return Ok(false);
        }
        let p = ParamPoint::new(self.beta, self.e)?;
        if curves.distance_to_curves(p)? < EXCLUSION_BAND {
            return Ok(true);
        }
        if let Some(expected) = region.expected_minus_one_index() {
            if self.im1 != expected {
                return Ok(false);
            }
        }
        Ok(match region {
            RegionLabel::RegionI => self.class == "EllipticNegative" && self.trace.abs() < 2.0,
            RegionLabel::RegionII => self.class == "HyperbolicNegative" && self.trace < -2.0,
            RegionLabel::RegionIII => self.class == "EllipticPositive" && self.trace.abs() < 2.0,
            RegionLabel::BoundaryBeta0 => self.class == "Identity" && self.nu1 == 2,
            RegionLabel::BoundaryBeta1 => self.class.starts_with("ParabolicPositive") && (self.i1, self.nu1) == (0, 1),
            RegionLabel::OnGammaL | RegionLabel::OnGammaR => true,
        })
    }
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(Failure::io)?;
    for r in rows {
        w.write_record(&r).map_err(Failure::io)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

fn json_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, Failure> {
    let mut v = serde_json::to_vec_pretty(rows).map_err(Failure::io)?;
    v.push(b'\n');
    Ok(v)
}

pub fn atlas_bytes(records: &[AtlasRecord], format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => json_bytes(records),
        _ => csv_bytes(&ATLAS_HEADER, records.iter().map(AtlasRecord::fields)),
    }
}

pub fn read_atlas_csv(bytes: &[u8]) -> Result<Vec<AtlasRecord>, Failure> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r.headers().map_err(Failure::io)?.iter().map(String::from).collect();
    if header != ATLAS_HEADER {
        return Err(Failure::Io(format!("unexpected atlas header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Failure::io)).collect()
}

pub fn read_atlas_json(bytes: &[u8]) -> Result<Vec<AtlasRecord>, Failure> {
    serde_json::from_slice(bytes).map_err(Failure::io)
}

/// Re-reads emitted atlas bytes and checks that the rows and their
/// verdicts are unchanged.
pub fn round_trip_atlas(records: &[AtlasRecord], bytes: &[u8], format: Format, curves: &AtlasCurves) -> Result<(), Failure> {
    let back = match format {
        Format::Json => read_atlas_json(bytes)?,
        _ => read_atlas_csv(bytes)?,
    };
    if back != records {
        return Err(Failure::Consistency("atlas rows changed after re-reading".into()));
    }
    for (a, b) in records.iter().zip(&back) {
        let (va, vb) = (a.verdict(curves)?, b.verdict(curves)?);
        if va != vb {
            return Err(Failure::Consistency(format!("verdict changed after re-reading at β = {}, e = {}", a.beta, a.e)));
        }
        if !vb {
            return Err(Failure::Consistency(format!("stored row fails verification at β = {}, e = {}", a.beta, a.e)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub e: f64,
    pub beta_l: f64,
    pub beta_r: f64,
    pub parity_l: String,
    pub parity_r: String,
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::E1Odd => "E1_odd",
        Parity::E2Even => "E2_even",
    }
}

pub fn curve_records(curves: &TracedCurves) -> Vec<CurveRecord> {
    curves
        .gamma_l
        .samples
        .iter()
        .zip(&curves.gamma_r.samples)
        .map(|(l, r)| CurveRecord {
            e: l.ecc,
            beta_l: l.beta,
            beta_r: r.beta,
            parity_l: parity_name(l.parity).into(),
            parity_r: parity_name(r.parity).into(),
        })
        .collect()
}

pub fn curve_bytes(records: &[CurveRecord], format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => json_bytes(records),
        _ => csv_bytes(
            &["e", "beta_l", "beta_r", "parity_l", "parity_r"],
            records
                .iter()
                .map(|r| vec![float(r.e), float(r.beta_l), float(r.beta_r), r.parity_l.clone(), r.parity_r.clone()]),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub variant: String,
    pub beta: f64,
    pub e_max: f64,
}

pub fn bound_records(curves: &[BoundCurve]) -> Vec<BoundRecord> {
    curves
        .iter()
        .flat_map(|c| {
            c.samples.iter().map(move |&(beta, e_max)| BoundRecord {
                variant: c.variant.name().into(),
                beta,
                e_max,
            })
        })
        .collect()
}

pub fn bound_bytes(records: &[BoundRecord], format: Format) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => json_bytes(records),
        _ => csv_bytes(
            &["variant", "beta", "e_max"],
            records.iter().map(|r| vec![r.variant.clone(), float(r.beta), float(r.e_max)]),
        ),
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(Failure::io)?;
            }
            fs::write(p, bytes).map_err(Failure::io)
        }
        None => std::io::stdout().write_all(bytes).map_err(Failure::io),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for v in [0.1, 1.0 / 3.0, -2.0 * std::f64::consts::PI, 1e-300, 0.0] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(0.75), "7.5000000000000000e-1");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![AtlasRecord {
            beta: 0.1,
            e: 0.2,
            trace: -1.234_567_890_123_456_7,
            class: "ParabolicNegative(+1)".into(),
            i1: 1,
            nu1: 0,
            im1: 2,
            num1: 0,
            region: "RegionI".into(),
        }];
        let bytes = atlas_bytes(&rows, Format::Csv).unwrap();
        assert!(bytes.starts_with(b"beta,e,trace,class,i1,nu1,im1,num1,region\n"));
        assert_eq!(read_atlas_csv(&bytes).unwrap(), rows);
        let json = atlas_bytes(&rows, Format::Json).unwrap();
        assert_eq!(read_atlas_json(&json).unwrap(), rows);
    }
}
