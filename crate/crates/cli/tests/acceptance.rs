//! Acceptance suite: one line per criterion.
//!
//! Runs without the libtest harness so every line is printed. The process
//! fails on any FAIL that is not listed in `KNOWN_FAILURES`.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use floquet_atlas::atlas::{self, AtlasCell, AtlasCurves, RegionLabel};
use floquet_atlas::curves::{self, TANGENT_GRID};
use floquet_atlas::hamiltonian::{classify, hill_fundamental, monodromy, DEFAULT_ODE_TOL, DEGENERACY_TOL};
use floquet_atlas::spectral::index_pair;
use floquet_atlas::trace_formula::{
    f_closed_form, f_operator_oracle, stability_bound, BoundVariant, CosineHalf, DEFAULT_ORACLE_MODES,
    DEFAULT_QUAD_ORDER,
};
use floquet_atlas::ParamPoint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

/// Criteria that fail as stated, with the reason. See the README.
const KNOWN_FAILURES: &[(u32, &str)] = &[(
    5,
    "the true slopes are -3/8 and +3/8; the stated values drop a factor beta in dA/de",
)];

fn pt(beta: f64, ecc: f64) -> ParamPoint {
    ParamPoint::new(beta, ecc).unwrap()
}

fn summary(checked: usize, bad: &[String]) -> String {
    match bad.first() {
        None => format!("{checked} checked, 0 violations"),
        Some(first) => format!("{checked} checked, {} violations, first: {first}", bad.len()),
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0_f64;
    for j in 0..50 {
        let beta = 0.999 * j as f64 / 49.0;
        let m = monodromy(pt(beta, 0.0), DEFAULT_ODE_TOL).map_err(|e| e.to_string())?;
        let w = (1.0 - beta).sqrt();
        let (s, c) = (TAU * w).sin_cos();
        let expected = [[c, -w * s], [s / w, c]];
        for (row, exp) in m.rows().iter().zip(expected) {
            for (a, b) in row.iter().zip(exp) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    verdict(worst <= 1e-9, format!("50 betas, max |M - closed form| = {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let one = Complex64::new(1.0, 0.0);
    let minus = Complex64::new(-1.0, 0.0);
    let mut cases = vec![(0.5, 0.0, minus, (2, 0)), (0.75, 0.0, minus, (0, 2)), (0.9, 0.0, minus, (0, 0))];
    for e in [0.0, 0.3, 0.6] {
        cases.push((0.0, e, one, (1, 2)));
        cases.push((1.0, e, one, (0, 1)));
        cases.push((1.0, e, minus, (0, 0)));
    }
    let mut bad = Vec::new();
    for &(beta, e, omega, want) in &cases {
        let p = index_pair(pt(beta, e), omega).map_err(|e| e.to_string())?;
        if (p.index, p.nullity) != want {
            bad.push(format!("({beta}, {e}, {}) -> ({}, {})", omega.re, p.index, p.nullity));
        }
    }
    verdict(bad.is_empty(), format!("{} anchors, mismatches: [{}]", cases.len(), bad.join(", ")))
}

struct Grid {
    curves: AtlasCurves,
    cells: Vec<AtlasCell>,
}

fn grid_101x25() -> Result<Grid, String> {
    let betas = atlas::linspace(1.0, 101);
    let eccs = atlas::linspace(0.8, 25);
    let curves = AtlasCurves::trace(&eccs).map_err(|e| e.to_string())?;
    let mut cells = Vec::new();
    for &e in &eccs {
        for &b in &betas {
            cells.push(atlas::evaluate_cell(pt(b, e), &curves).map_err(|e| e.to_string())?);
        }
    }
    Ok(Grid { curves, cells })
}

fn away_from_curves(g: &Grid, c: &AtlasCell) -> bool {
    g.curves.distance_to_curves(c.point).unwrap() >= atlas::EXCLUSION_BAND
}

fn criterion_3(g: &Grid) -> Outcome {
    let (mut checked, mut bad) = (0, Vec::new());
    for c in &g.cells {
        if c.point.beta() < 1.0 && c.i_1 != 1 {
            bad.push(format!("i_1 = {} at ({}, {})", c.i_1, c.point.beta(), c.point.ecc()));
        }
        if !away_from_curves(g, c) {
            continue;
        }
        let want = match c.region {
            RegionLabel::RegionI | RegionLabel::BoundaryBeta0 => 2,
            RegionLabel::RegionII => 1,
            RegionLabel::RegionIII | RegionLabel::BoundaryBeta1 => 0,
            RegionLabel::OnGammaL | RegionLabel::OnGammaR => continue,
        };
        checked += 1;
        if c.i_minus1 != want {
            bad.push(format!("i_-1 = {} at ({}, {})", c.i_minus1, c.point.beta(), c.point.ecc()));
        }
    }
    verdict(bad.is_empty(), summary(checked, &bad))
}

fn criterion_4(g: &Grid) -> Outcome {
    let (mut checked, mut bad) = (0, Vec::new());
    for c in &g.cells {
        if !away_from_curves(g, c) {
            continue;
        }
        let m = &c.monodromy;
        let tr = m.trace();
        let ok = match c.region {
            RegionLabel::RegionI => tr.abs() < 2.0 && m.m21 < 0.0,
            RegionLabel::RegionII => tr < -2.0,
            RegionLabel::RegionIII => tr.abs() < 2.0 && m.m21 > 0.0,
            _ => continue,
        };
        checked += 1;
        if !ok {
            bad.push(format!("{} at ({}, {}): trace {tr}, m21 {}", c.region.name(), c.point.beta(), c.point.ecc(), m.m21));
        }
    }
    verdict(bad.is_empty(), summary(checked, &bad))
}

fn criterion_5() -> Outcome {
    let traced = curves::trace_curves(&TANGENT_GRID, curves::DEFAULT_ROOT_TOL).map_err(|e| e.to_string())?;
    let l = curves::tangent_at_origin(&traced.gamma_l).map_err(|e| e.to_string())?;
    let r = curves::tangent_at_origin(&traced.gamma_r).map_err(|e| e.to_string())?;
    verdict(
        (l + 0.5).abs() <= 5e-3 && (r - 0.5).abs() <= 5e-3,
        format!("slopes Gamma_l {l:.6}, Gamma_r {r:.6}; required -0.5 and +0.5 within 5e-3"),
    )
}

/// `tr Φ(2π) + 2` against `4·y₁(π)·y₂'(π)` for an even potential `q`.
fn factorisation_defect<Q: Fn(f64) -> f64 + Copy>(q: Q) -> Result<f64, String> {
    let full = hill_fundamental(q, 0.0, TAU, DEFAULT_ODE_TOL).map_err(|e| e.to_string())?;
    let half = hill_fundamental(q, 0.0, PI, DEFAULT_ODE_TOL).map_err(|e| e.to_string())?;
    Ok((full[0][0] + full[1][1] + 2.0 - 4.0 * half[0][0] * half[1][1]).abs())
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_random = 0.0_f64;
    for _ in 0..20 {
        let a0: f64 = rng.gen_range(0.1..3.0);
        let a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.6..0.6));
        let q = move |t: f64| a0 + a.iter().enumerate().map(|(k, ak)| ak * ((k + 1) as f64 * t).cos()).sum::<f64>();
        worst_random = worst_random.max(factorisation_defect(q)?);
    }
    if worst_random > 1e-8 {
        return Err(format!("identity fails on random even potentials: {worst_random:.2e}"));
    }
    let mut worst = 0.0_f64;
    for i in 0..30 {
        for j in 0..10 {
            let p = pt(i as f64 / 29.0, 0.9 * j as f64 / 9.0);
            let direct = monodromy(p, DEFAULT_ODE_TOL).map_err(|e| e.to_string())?.trace() + 2.0;
            let half = curves::half_period_values(p, DEFAULT_ODE_TOL).map_err(|e| e.to_string())?;
            worst = worst.max((direct - half.discriminant()).abs());
        }
    }
    verdict(
        worst <= 1e-8,
        format!("random potentials {worst_random:.2e}, 30x10 grid {worst:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let omegas = [("-1", Complex64::new(-1.0, 0.0)), ("i", Complex64::new(0.0, 1.0))];
    let mut bad = Vec::new();
    let mut report = Vec::new();
    for e in [0.0, 0.2, 0.5] {
        for (label, omega) in omegas {
            let roots = curves::omega_degenerate_betas(e, omega, curves::DEFAULT_ROOT_TOL).map_err(|e| e.to_string())?;
            let mut total = 0;
            for &b in &roots {
                total += index_pair(pt(b, e), omega).map_err(|e| e.to_string())?.nullity;
            }
            report.push(format!("(e {e}, omega {label}) -> {total}"));
            if total != 2 {
                bad.push(format!("e = {e}, omega = {label}: roots {roots:?}"));
            }
        }
    }
    verdict(bad.is_empty(), format!("{} {}", report.join(", "), bad.join("; ")).trim_end().to_string())
}

fn criterion_8() -> Outcome {
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for beta in [0.1, 0.2, 0.5, 0.6, 0.9] {
        let v = f_closed_form(beta, DEFAULT_QUAD_ORDER).map_err(|e| e.to_string())?;
        let plus = f_operator_oracle(beta, CosineHalf::Plus, DEFAULT_ORACLE_MODES).map_err(|e| e.to_string())?;
        let minus = f_operator_oracle(beta, CosineHalf::Minus, DEFAULT_ORACLE_MODES).map_err(|e| e.to_string())?;
        worst.0 = worst.0.max((v.f - plus).abs() / v.f);
        worst.1 = worst.1.max((plus - minus).abs());
        worst.2 = worst.2.max((v.f - (2.0 * v.f1 - v.f2)).abs() / v.f);
    }
    verdict(
        worst.0 <= 1e-4 && worst.1 <= 1e-6 && worst.2 <= 1e-8,
        format!("closed vs oracle {:.2e}, K+ vs K- {:.2e}, 2f1 - f2 {:.2e}", worst.0, worst.1, worst.2),
    )
}

fn criterion_9() -> Outcome {
    let betas = (1..=20).map(|i| 0.75 * i as f64 / 21.0).chain((1..=20).map(|i| 0.75 + 0.25 * i as f64 / 21.0));
    let mut bad = Vec::new();
    let mut n = 0;
    for beta in betas {
        n += 1;
        let e = 0.95 * stability_bound(beta, BoundVariant::ConservativeMin).map_err(|e| e.to_string())?;
        let m = monodromy(pt(beta, e), DEFAULT_ODE_TOL).map_err(|e| e.to_string())?;
        let class = classify(&m, DEGENERACY_TOL).map_err(|e| e.to_string())?;
        if !(class.is_elliptic() && m.trace().abs() < 2.0 - 1e-6) {
            bad.push(format!("beta {beta}, e {e}: {}", class.tag()));
        }
    }
    verdict(bad.is_empty(), summary(n, &bad))
}

fn criterion_10() -> Outcome {
    let mus = atlas::linspace(1.0, 21);
    let eccs = atlas::linspace(0.8, 11);
    let curves = AtlasCurves::trace(&eccs).map_err(|e| e.to_string())?;
    let mut bad = 0;
    for &e in &eccs {
        for &mu in &mus {
            let robe = atlas::robe_stability(mu, e, &curves).map_err(|e| e.to_string())?;
            let cell = atlas::atlas_cell(pt(1.0 - mu, e), &curves).map_err(|e| e.to_string())?;
            if robe.cell != cell {
                bad += 1;
            }
        }
    }
    verdict(bad == 0, format!("21x11 grid, {bad} differing cells"))
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_11() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_floquet-atlas");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("run{k}"));
        let status = Command::new(bin)
            .arg("--out")
            .arg(&dir)
            .args(["verify-all", "--res", "21x8", "--curve-steps", "10", "--beta-steps", "20"])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("verify-all exited with {}", status.status));
        }
        runs.push(artifacts(&dir));
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    verdict(
        runs[0] == runs[1] && names.len() >= 8,
        format!("{} artifacts compared: {}", names.len(), names.join(", ")),
    )
}

fn main() {
    let grid = grid_101x25();
    let cell_criterion = |f: fn(&Grid) -> Outcome| -> Outcome {
        match &grid {
            Ok(g) => f(g),
            Err(e) => Err(e.clone()),
        }
    };
    let criteria: Vec<Criterion> = vec![
        (1, "circular closed form", Box::new(criterion_1)),
        (2, "index anchors", Box::new(criterion_2)),
        (3, "index table by region", Box::new(move || cell_criterion(criterion_3))),
        (4, "normal forms by region", Box::new(move || cell_criterion(criterion_4))),
        (5, "tangent slopes at e = 0", Box::new(criterion_5)),
        (6, "half-period factorisation", Box::new(criterion_6)),
        (7, "total degeneracy multiplicity", Box::new(criterion_7)),
        (8, "trace formula", Box::new(criterion_8)),
        (9, "bound soundness", Box::new(criterion_9)),
        (10, "Robe mapping", Box::new(criterion_10)),
        (11, "verify-all determinism", Box::new(criterion_11)),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in &criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.iter().find(|(k, _)| k == id);
        match (&outcome, known) {
            (Ok(d), None) => println!("PASS criterion {id:>2} ({name}): {d} [{secs:.1}s]"),
            (Ok(d), Some(_)) => println!("PASS criterion {id:>2} ({name}): {d} [{secs:.1}s] (listed as known failure)"),
            (Err(d), Some((_, why))) => {
                println!("FAIL criterion {id:>2} ({name}): {d} [{secs:.1}s] (known: {why})")
            }
            (Err(d), None) => {
                println!("FAIL criterion {id:>2} ({name}): {d} [{secs:.1}s]");
                unexpected.push(*id);
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
