use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use floquet_atlas::atlas::{self, AtlasCell, AtlasCurves, RegionLabel};
use floquet_atlas::curves::{self, TracedCurves, TANGENT_GRID};
use floquet_atlas::hamiltonian::{
    classify, index_jump_check, kernel_dim, monodromy as monodromy_of, NormalFormClass, StabilityVerdict, DEFAULT_ODE_TOL,
    DEGENERACY_TOL,
};
use floquet_atlas::spectral::index_and_nullity;
use floquet_atlas::trace_formula::{
    bound_curve, f_closed_form, f_operator_oracle, BoundCurve, BoundVariant, CosineHalf, BETA_CUTOFF,
    DEFAULT_QUAD_ORDER, SINGULARITY_GUARD,
};
use floquet_atlas::{ParamPoint, DEFAULT_E_MAX};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::output::{self, emit, float, AtlasRecord, Format};
use crate::svg::Plot;
use crate::{Cli, Failure};

const RANK_TOL: f64 = 1e-7;

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<(), Failure> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(Failure::io)?;
    bytes.push(b'\n');
    emit(path, &bytes)
}

fn fmt_complex(z: Complex64) -> String {
    format!("{} {} {}i", float(z.re), if z.im < 0.0 { '-' } else { '+' }, float(z.im.abs()))
}

pub fn monodromy(cli: &Cli, beta: f64, e: f64) -> Result<(), Failure> {
    let p = ParamPoint::new(beta, e)?;
    let m = monodromy_of(p, cli.tol)?;
    let class = classify(&m, DEGENERACY_TOL)?;
    let verdict = StabilityVerdict::from_class(&class);
    let (l1, l2) = m.eigenvalues();
    if cli.format() == Format::Json {
        return write_json(
            cli.out.as_deref(),
            &json!({
                "beta": beta,
                "e": e,
                "matrix": m.rows(),
                "trace": m.trace(),
                "class": class.tag(),
                "normal_form": class,
                "verdict": verdict,
                "eigenvalues": [[l1.re, l1.im], [l2.re, l2.im]],
            }),
        );
    }
    let mut s = String::new();
    let _ = writeln!(s, "monodromy at beta = {beta}, e = {e}");
    let _ = writeln!(s, "  [[{}, {}],", float(m.m11), float(m.m12));
    let _ = writeln!(s, "   [{}, {}]]", float(m.m21), float(m.m22));
    let _ = writeln!(s, "trace: {}", float(m.trace()));
    let _ = writeln!(s, "class: {class}");
    let _ = writeln!(s, "spectrally stable: {}", verdict.spectrally_stable);
    let _ = writeln!(s, "linearly stable: {}", verdict.linearly_stable);
    let _ = writeln!(s, "eigenvalues: {}, {}", fmt_complex(l1), fmt_complex(l2));
    emit(cli.out.as_deref(), s.as_bytes())
}

pub fn index(cli: &Cli, beta: f64, e: f64, omega: Complex64, modes: usize, zero_tol: f64) -> Result<(), Failure> {
    let p = ParamPoint::new(beta, e)?;
    let pair = index_and_nullity(p, omega, modes, zero_tol)?;
    let m = monodromy_of(p, cli.tol)?;
    let kernel = kernel_dim(&m, omega, RANK_TOL * m.norm_inf().max(1.0));
    let minus_one = (omega + 1.0).norm() < 1e-14;
    let predicted = if minus_one {
        let i1 = index_and_nullity(p, Complex64::new(1.0, 0.0), modes, zero_tol)?.index;
        Some(index_jump_check(i1 as i64, &m))
    } else {
        None
    };
    let nullity_ok = kernel == pair.nullity;
    let jump_ok = predicted.is_none_or(|v| v == pair.index as i64);
    if cli.format() == Format::Json {
        write_json(
            cli.out.as_deref(),
            &json!({
                "beta": beta,
                "e": e,
                "omega": [omega.re, omega.im],
                "index": pair.index,
                "nullity": pair.nullity,
                "kernel_dim_monodromy": kernel,
                "index_from_splitting_numbers": predicted,
                "consistent": nullity_ok && jump_ok,
            }),
        )?;
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "omega = {}: (index, nullity) = ({}, {})", fmt_complex(omega), pair.index, pair.nullity);
        let _ = writeln!(s, "dim ker(M - omega I) = {kernel}: {}", if nullity_ok { "ok" } else { "MISMATCH" });
        if let Some(v) = predicted {
            let _ = writeln!(s, "index from splitting numbers = {v}: {}", if jump_ok { "ok" } else { "MISMATCH" });
        }
        emit(cli.out.as_deref(), s.as_bytes())?;
    }
    if nullity_ok && jump_ok {
        Ok(())
    } else {
        Err(Failure::Consistency(format!("index cross-check failed at beta = {beta}, e = {e}")))
    }
}

fn check_e_max(e_max: f64) -> Result<(), Failure> {
    if !(e_max > 0.0 && e_max < 1.0) {
        return Err(Failure::Usage(format!("e_max = {e_max} outside (0, 1)")));
    }
    Ok(())
}

/// `steps + 1` equal steps up to `e_max`, plus the tangent stencil.
fn curve_grid(e_max: f64, steps: usize) -> Vec<f64> {
    let mut g = atlas::linspace(e_max, steps + 1);
    g.extend(TANGENT_GRID.iter().filter(|&&e| e <= e_max));
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

pub struct CurveReport {
    pub traced: TracedCurves,
    pub tangent_l: f64,
    pub tangent_r: f64,
}

fn trace_with_tangents(e_max: f64, steps: usize) -> Result<CurveReport, Failure> {
    check_e_max(e_max)?;
    if steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    let traced = curves::trace_curves(&curve_grid(e_max, steps), curves::DEFAULT_ROOT_TOL)?;
    let (tangent_l, tangent_r) = if e_max >= TANGENT_GRID[3] {
        (
            curves::tangent_at_origin(&traced.gamma_l)?,
            curves::tangent_at_origin(&traced.gamma_r)?,
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(CurveReport { traced, tangent_l, tangent_r })
}

fn curves_svg(traced: &TracedCurves, e_top: f64) -> String {
    let mut plot = Plot::new("Degeneracy curves", "beta", "e", (0.0, 1.0), (0.0, e_top));
    let pts = |c: &curves::DegeneracyCurve| c.samples.iter().map(|s| (s.beta, s.ecc)).collect::<Vec<_>>();
    plot.polyline(&pts(&traced.gamma_l), "#1f4e9c", "Gamma_l");
    plot.polyline(&pts(&traced.gamma_r), "#b8322a", "Gamma_r");
    plot.render()
}

fn tangent_report(r: &CurveReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tangent at e = 0: Gamma_l {:.6}, Gamma_r {:.6}", r.tangent_l, r.tangent_r);
    for c in &r.traced.crossings {
        let _ = writeln!(s, "crossing near e = {}: beta_E1 = {}, beta_E2 = {}", float(c.ecc), float(c.beta_e1), float(c.beta_e2));
    }
    s
}

pub fn curves(cli: &Cli, e_max: f64, steps: usize, svg: Option<&Path>) -> Result<(), Failure> {
    let report = trace_with_tangents(e_max, steps)?;
    if let Some(path) = svg {
        emit(Some(path), curves_svg(&report.traced, e_max).as_bytes())?;
    }
    let bytes = match cli.format() {
        Format::Svg => curves_svg(&report.traced, e_max).into_bytes(),
        f => output::curve_bytes(&output::curve_records(&report.traced), f)?,
    };
    emit(cli.out.as_deref(), &bytes)?;
    let text = tangent_report(&report);
    if cli.out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    Ok(())
}

/// `β_j = 0.999·j/steps`, skipping the guard band around 3/4.
fn bound_grid(steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|j| (BETA_CUTOFF * j as f64 / steps as f64).min(BETA_CUTOFF))
        .filter(|b| (b - 0.75).abs() >= SINGULARITY_GUARD)
        .collect()
}

fn bound_curves(steps: usize, variant: Option<&str>) -> Result<Vec<BoundCurve>, Failure> {
    if steps < 2 {
        return Err(Failure::Usage("--beta-steps must be at least 2".into()));
    }
    let variants = match variant {
        Some(name) => vec![name.parse::<BoundVariant>()?],
        None => BoundVariant::ALL.to_vec(),
    };
    let grid = bound_grid(steps);
    variants
        .into_iter()
        .map(|v| {
            let g: Vec<f64> = grid.iter().copied().filter(|&b| v.covers(b)).collect();
            bound_curve(&g, v).map_err(Failure::from)
        })
        .collect()
}

/// Points `(β, 0.95·bound)` where the monodromy is not strictly elliptic.
fn soundness_failures(curve: &BoundCurve) -> Result<Vec<(f64, f64, f64)>, Failure> {
    let bad = curve
        .samples
        .par_iter()
        .filter(|(beta, _)| *beta > 0.0)
        .map(|&(beta, bound)| {
            let e = 0.95 * bound;
            let m = monodromy_of(ParamPoint::new(beta, e)?, DEFAULT_ODE_TOL)?;
            Ok((beta, e, m.trace()))
        })
        .collect::<Result<Vec<_>, floquet_atlas::Error>>()?;
    Ok(bad.into_iter().filter(|(_, _, tr)| tr.is_nan() || tr.abs() >= 2.0 - 1e-6).collect())
}

fn bounds_svg(curves: &[BoundCurve]) -> String {
    let mut plot = Plot::new("Certified elliptic eccentricity", "beta", "e", (0.0, 1.0), (0.0, 1.0));
    let colors = ["#1f4e9c", "#b8322a", "#2a8c4a", "#c77c11", "#000000"];
    for (c, color) in curves.iter().zip(colors.iter().cycle()) {
        plot.polyline(&c.samples, color, c.variant.name());
    }
    plot.render()
}

pub fn bounds(cli: &Cli, steps: usize, variant: Option<&str>, verify: bool, svg: Option<&Path>) -> Result<(), Failure> {
    let curves = bound_curves(steps, variant)?;
    if let Some(path) = svg {
        emit(Some(path), bounds_svg(&curves).as_bytes())?;
    }
    let bytes = match cli.format() {
        Format::Svg => bounds_svg(&curves).into_bytes(),
        f => output::bound_bytes(&output::bound_records(&curves), f)?,
    };
    emit(cli.out.as_deref(), &bytes)?;
    if verify {
        let conservative = match curves.iter().find(|c| c.variant == BoundVariant::ConservativeMin) {
            Some(c) => c.clone(),
            None => bound_curve(&bound_grid(steps), BoundVariant::ConservativeMin)?,
        };
        let bad = soundness_failures(&conservative)?;
        if let Some((beta, e, tr)) = bad.first() {
            return Err(Failure::Consistency(format!(
                "{} points below the conservative bound are not elliptic, first at beta = {beta}, e = {e} (trace {tr})",
                bad.len()
            )));
        }
        eprintln!("soundness: {} samples elliptic below the conservative bound", conservative.samples.len());
    }
    Ok(())
}

fn region_color(r: RegionLabel) -> &'static str {
    match r {
        RegionLabel::RegionI => "#cfe3f7",
        RegionLabel::RegionII => "#f6d2cc",
        RegionLabel::RegionIII => "#d3efd8",
        RegionLabel::OnGammaL | RegionLabel::OnGammaR => "#888888",
        RegionLabel::BoundaryBeta0 | RegionLabel::BoundaryBeta1 => "#bbbbbb",
    }
}

fn atlas_svg(a: &atlas::Atlas) -> String {
    let e_top = *a.eccs.last().unwrap();
    let mut plot = Plot::new("Stability atlas", "beta", "e", (0.0, 1.0), (0.0, e_top));
    let db = 0.5 / (a.betas.len() - 1) as f64;
    let de = 0.5 * e_top / (a.eccs.len() - 1) as f64;
    for c in &a.cells {
        let (b, e) = (c.point.beta(), c.point.ecc());
        plot.rect(((b - db).max(0.0), (b + db).min(1.0)), ((e - de).max(0.0), (e + de).min(e_top)), region_color(c.region));
    }
    plot.legend_entry("Region I (i_-1 = 2)", region_color(RegionLabel::RegionI));
    plot.legend_entry("Region II (i_-1 = 1)", region_color(RegionLabel::RegionII));
    plot.legend_entry("Region III (i_-1 = 0)", region_color(RegionLabel::RegionIII));
    let pts = |c: &curves::DegeneracyCurve| c.samples.iter().map(|s| (s.beta, s.ecc)).collect::<Vec<_>>();
    plot.polyline(&pts(&a.curves.traced.gamma_l), "#1f4e9c", "Gamma_l");
    plot.polyline(&pts(&a.curves.traced.gamma_r), "#b8322a", "Gamma_r");
    plot.render()
}

fn atlas_records(cells: &[AtlasCell]) -> Vec<AtlasRecord> {
    cells.iter().map(AtlasRecord::from).collect()
}

pub fn atlas(cli: &Cli, res: (usize, usize), e_max: f64, svg: Option<&Path>) -> Result<(), Failure> {
    check_e_max(e_max)?;
    let a = atlas::atlas_sweep(res, e_max)?;
    let records = atlas_records(&a.cells);
    if let Some(path) = svg {
        emit(Some(path), atlas_svg(&a).as_bytes())?;
    }
    let bytes = match cli.format() {
        Format::Svg => atlas_svg(&a).into_bytes(),
        f => {
            let bytes = output::atlas_bytes(&records, f)?;
            output::round_trip_atlas(&records, &bytes, f, &a.curves)?;
            bytes
        }
    };
    emit(cli.out.as_deref(), &bytes)?;
    eprintln!("atlas: {} cells consistent", a.cells.len());
    Ok(())
}

pub fn robe(cli: &Cli, mu: f64, e: f64, e_max: f64) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Failure::Usage(format!("mu = {mu} outside [0, 1]")));
    }
    check_e_max(e_max)?;
    if !(0.0..e_max).contains(&e) {
        return Err(Failure::Usage(format!("e = {e} outside [0, {e_max})")));
    }
    let grid: Vec<f64> = if e == 0.0 { vec![0.0] } else { vec![0.0, e] };
    let curves = AtlasCurves::trace(&grid)?;
    let r = atlas::robe_stability(mu, e, &curves)?;
    let c = r.cell;
    if cli.format() == Format::Json {
        return write_json(
            cli.out.as_deref(),
            &json!({
                "mu": mu,
                "beta": c.point.beta(),
                "e": e,
                "region": c.region.name(),
                "class": c.class.tag(),
                "trace": c.trace(),
                "verdict": c.verdict,
                "i1": c.i_1, "nu1": c.nu_1, "im1": c.i_minus1, "num1": c.nu_minus1,
            }),
        );
    }
    let mut s = String::new();
    let _ = writeln!(s, "mu = {mu}, e = {e} (beta = {})", c.point.beta());
    let _ = writeln!(s, "region: {}", c.region.name());
    let _ = writeln!(s, "class: {}", c.class);
    let _ = writeln!(s, "trace: {}", float(c.trace()));
    let _ = writeln!(s, "(i_1, nu_1) = ({}, {}), (i_-1, nu_-1) = ({}, {})", c.i_1, c.nu_1, c.i_minus1, c.nu_minus1);
    let _ = writeln!(
        s,
        "{}",
        if c.verdict.linearly_stable {
            "linearly stable"
        } else if c.verdict.spectrally_stable {
            "spectrally stable, linearly unstable"
        } else {
            "unstable"
        }
    );
    emit(cli.out.as_deref(), s.as_bytes())
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn circular_check() -> Result<Check, Failure> {
    let worst = (0..50)
        .into_par_iter()
        .map(|j| {
            let beta = 0.999 * j as f64 / 49.0;
            let m = monodromy_of(ParamPoint::new(beta, 0.0)?, DEFAULT_ODE_TOL)?;
            let w = (1.0 - beta).sqrt();
            let (s, c) = (TAU * w).sin_cos();
            let err = [m.m11 - c, m.m12 + w * s, m.m21 - s / w, m.m22 - c]
                .iter()
                .fold(0.0_f64, |a, v| a.max(v.abs()));
            Ok(err)
        })
        .collect::<Result<Vec<f64>, floquet_atlas::Error>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(check("circular_closed_form", worst <= 1e-9, format!("max entry error {worst:.3e}")))
}

fn jordan_check() -> Result<Check, Failure> {
    let eccs = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
    let forms = eccs
        .par_iter()
        .map(|&e| atlas::curve_normal_forms(e))
        .collect::<Result<Vec<_>, _>>()?;
    let bad: Vec<String> = forms
        .iter()
        .filter(|f| !f.matches_expected())
        .map(|f| format!("e = {}: {} / {}", f.ecc, f.class_l.tag(), f.class_r.tag()))
        .collect();
    Ok(check(
        "curve_normal_forms",
        bad.is_empty(),
        if bad.is_empty() {
            format!("Gamma_l ~ N1(-1,1), Gamma_r ~ N1(-1,-1) at {} eccentricities", eccs.len())
        } else {
            bad.join("; ")
        },
    ))
}

fn trace_formula_check() -> Result<Check, Failure> {
    let betas = [0.1, 0.2, 0.5, 0.6, 0.9];
    let rows = betas
        .iter()
        .map(|&b| {
            let v = f_closed_form(b, DEFAULT_QUAD_ORDER)?;
            let plus = f_operator_oracle(b, CosineHalf::Plus, 128)?;
            let minus = f_operator_oracle(b, CosineHalf::Minus, 128)?;
            Ok((b, v, plus, minus))
        })
        .collect::<Result<Vec<_>, floquet_atlas::Error>>()?;
    let mut ok = true;
    let mut detail = String::new();
    for (b, v, plus, minus) in rows {
        let rel = (v.f - plus).abs() / v.f;
        let split = (v.f - (2.0 * v.f1 - v.f2)).abs() / v.f;
        ok &= rel <= 1e-4 && (plus - minus).abs() <= 1e-6 && split <= 1e-8;
        let _ = write!(detail, "beta {b}: f {:.10}, oracle {:.10}, rel {rel:.2e}; ", v.f, plus);
    }
    Ok(check("trace_formula", ok, detail.trim_end_matches([' ', ';']).to_string()))
}

fn robe_check(a: &atlas::Atlas) -> Result<Check, Failure> {
    let mus = atlas::linspace(1.0, 21);
    let eccs = atlas::linspace(*a.eccs.last().unwrap(), 11);
    let betas: Vec<f64> = mus.iter().map(|m| 1.0 - m).collect();
    let direct = atlas::sweep_cells(&a.curves, &betas, &eccs)?;
    let mut same = true;
    for (k, &e) in eccs.iter().enumerate() {
        for (j, &mu) in mus.iter().enumerate() {
            let r = atlas::robe_stability(mu, e, &a.curves)?;
            same &= r.cell == direct[k * mus.len() + j];
        }
    }
    Ok(check("robe_mapping", same, format!("{} x {} grid", mus.len(), eccs.len())))
}

pub fn verify_all(cli: &Cli, res: (usize, usize), curve_steps: usize, beta_steps: usize) -> Result<(), Failure> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("verify-all"));
    fs::create_dir_all(&dir).map_err(Failure::io)?;
    let mut checks = Vec::new();

    checks.push(circular_check()?);
    let m = monodromy_of(ParamPoint::new(0.75, 0.0)?, DEFAULT_ODE_TOL)?;
    let class = classify(&m, DEGENERACY_TOL)?;
    checks.push(check("minus_identity_at_bifurcation", class == NormalFormClass::MinusIdentity, class.tag()));

    let report = trace_with_tangents(DEFAULT_E_MAX, curve_steps)?;
    let records = output::curve_records(&report.traced);
    emit(Some(&dir.join("curves.csv")), &output::curve_bytes(&records, Format::Csv)?)?;
    emit(Some(&dir.join("curves.svg")), curves_svg(&report.traced, DEFAULT_E_MAX).as_bytes())?;
    let inside = report
        .traced
        .gamma_l
        .samples
        .iter()
        .chain(&report.traced.gamma_r.samples)
        .all(|s| s.beta > 0.0 && s.beta < 1.0);
    checks.push(check(
        "curves_inside_unit_interval",
        inside,
        format!("{} samples per curve, {} crossings", records.len(), report.traced.crossings.len()),
    ));
    checks.push(check(
        "tangents_at_origin",
        report.tangent_l < 0.0 && report.tangent_r > 0.0,
        format!("Gamma_l {:.9}, Gamma_r {:.9}", report.tangent_l, report.tangent_r),
    ));
    checks.push(jordan_check()?);
    checks.push(trace_formula_check()?);

    let bounds = bound_curves(beta_steps, None)?;
    emit(Some(&dir.join("bounds.csv")), &output::bound_bytes(&output::bound_records(&bounds), Format::Csv)?)?;
    emit(Some(&dir.join("bounds.svg")), bounds_svg(&bounds).as_bytes())?;
    let conservative = bounds.iter().find(|c| c.variant == BoundVariant::ConservativeMin).unwrap();
    let bad = soundness_failures(conservative)?;
    checks.push(check(
        "bound_soundness",
        bad.is_empty(),
        format!("{} of {} samples not elliptic", bad.len(), conservative.samples.len()),
    ));

    let a = atlas::atlas_sweep(res, atlas::DEFAULT_SWEEP_E_MAX)?;
    let rows = atlas_records(&a.cells);
    for (name, f) in [("atlas.csv", Format::Csv), ("atlas.json", Format::Json)] {
        let bytes = output::atlas_bytes(&rows, f)?;
        output::round_trip_atlas(&rows, &bytes, f, &a.curves)?;
        emit(Some(&dir.join(name)), &bytes)?;
    }
    emit(Some(&dir.join("atlas.svg")), atlas_svg(&a).as_bytes())?;
    checks.push(check("atlas_consistency", true, format!("{} cells, round-trip verified", a.cells.len())));
    checks.push(robe_check(&a)?);

    let passed = checks.iter().all(|c| c.passed);
    write_json(Some(&dir.join("summary.json")), &json!({ "passed": passed, "checks": checks }))?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Consistency("verify-all found failing checks".into()))
    }
}
