//! Acceptance suite: one line per criterion, nonzero exit when any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use gkrs::analysis::{log_grid, scal_maximum_search, soliton_ratio_curve, volume_growth_fit};
use gkrs::ansatz::Ansatz;
use gkrs::curvature::{
    ambi_closed_forms_2d, curvature_from_potential, curvature_tensors, positivity_scan_2d, series_coefficient_checks,
    Chart, ScanGrid,
};
use gkrs::profiles::{build_cao_profile, build_taubnut_profile, Family, Gauge, ProfileSet, SolitonParams};
use gkrs::symfun::{vandermonde_identity_residual, vandermonde_sums_exact};
use gkrs::toric::{forbidden_region_check, ma_residual_spread, DelzantPolyhedron};
use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROFILE_COEFF_TOL: f64 = 1e-12;
const ODE_TOL: f64 = 1e-10;
const MA_STD_TOL: f64 = 1e-6;
const FLAT_RIEMANN_TOL: f64 = 1e-6;
const RICCI_FLAT_TOL: f64 = 1e-5;
const KAHLER_POTENTIAL_TOL: f64 = 1e-8;
const SCAL_MAX_TOL: f64 = 1e-6;
const SCAL_FD_TOL: f64 = 1e-4;
const EXPONENT_TOL: f64 = 0.1;
const SERIES_TOL: f64 = 1e-8;
const VECTOR_TOL: f64 = 1e-12;
const VANDERMONDE_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn params(a: f64, alpha: &[f64], dims: &[usize]) -> SolitonParams {
    SolitonParams {
        a,
        alpha: alpha.to_vec(),
        dims: dims.to_vec(),
        scale: 1.0,
        gauge: Gauge::UnitC,
    }
}

fn cao(a: f64, alpha: &[f64], dims: &[usize]) -> ProfileSet {
    build_cao_profile(&params(a, alpha, dims)).unwrap()
}

fn taubnut(a: f64, alpha: &[f64], dims: &[usize]) -> ProfileSet {
    build_taubnut_profile(&params(a, alpha, dims)).unwrap()
}

fn configurations(a: f64) -> Vec<ProfileSet> {
    vec![
        cao(a, &[0.0], &[1]),
        cao(a, &[0.0, 1.0], &[0, 0]),
        cao(a, &[0.0, 1.0], &[1, 0]),
        taubnut(a, &[0.0, 1.0], &[0, 0]),
        taubnut(a, &[0.0, 1.0, 2.0], &[0, 0, 0]),
    ]
}

fn label(ps: &ProfileSet) -> String {
    format!("{:?} alpha={:?} dims={:?} a={}", ps.family, ps.alpha, ps.dims, ps.a)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn block_points(ps: &ProfileSet, j: usize, count: usize) -> Vec<f64> {
    let (lo, hi) = ps.domain(j);
    (0..count)
        .map(|k| {
            let u = (k as f64 + 0.5) / count as f64;
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => lo + (hi - lo) * u,
                (true, false) => lo + 10f64.powf(-2.0 + 4.0 * u),
                (false, true) => hi - 10f64.powf(-2.0 + 4.0 * u),
                (false, false) => -1e2 + 2e2 * u,
            }
        })
        .collect()
}

fn momenta(an: &Ansatz, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p = an.sample_point(&mut rng);
            let x = an.moment_map(&p.xi, &p.base).unwrap();
            (p.xi, x)
        })
        .collect()
}

fn closed_form_profile() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [0.5, 1.0, 2.0] {
        let ps = cao(a, &[0.0, 1.0], &[0, 0]);
        for f in &ps.profiles {
            let expected = [-1.0, 1.0 - (-2.0 * a).exp()];
            ensure(f.poly.coeffs.len() == 2, || {
                format!("a={a}: degree {}", f.poly.degree())
            })?;
            ensure(f.c == 1.0 && f.rate == -2.0 * a, || {
                format!("a={a}: c={} rate={}", f.c, f.rate)
            })?;
            for (c, e) in f.poly.coeffs.iter().zip(expected) {
                worst = worst.max((c - e).abs());
            }
        }
    }
    ensure(worst < PROFILE_COEFF_TOL, || format!("coefficient error {worst:.3e}"))?;
    Ok(format!("max coefficient error {worst:.3e}"))
}

fn soliton_certification() -> Outcome {
    let (mut ode, mut ma): (f64, f64) = (0.0, 0.0);
    for a in [0.0, 1.0] {
        for ps in configurations(a) {
            for j in 0..ps.ell() {
                for t in block_points(&ps, j, 50) {
                    ode = ode.max(ps.ode_residual(j, t).abs());
                }
            }
            ensure(ode < ODE_TOL, || format!("{}: ODE residual {ode:.3e}", label(&ps)))?;
            let an = Ansatz::new(ps.clone()).map_err(|e| e.to_string())?;
            let b = an.soliton_vector().b;
            let c = vec![2.0; an.n()];
            let xs: Vec<Vec<f64>> = momenta(&an, 100, 42).into_iter().map(|(_, x)| x).collect();
            let s = ma_residual_spread(&an, &b, &c, &xs).map_err(|e| e.to_string())?;
            ma = ma.max(s.std_dev);
            ensure(s.std_dev < MA_STD_TOL, || {
                format!("{}: MA spread {:.3e}", label(&ps), s.std_dev)
            })?;
        }
    }
    Ok(format!("ODE residual {ode:.3e}, MA spread {ma:.3e}"))
}

fn flat_limits() -> Outcome {
    let mut riem: f64 = 0.0;
    for ps in [
        cao(0.0, &[0.0], &[1]),
        cao(0.0, &[0.0, 1.0], &[0, 0]),
        cao(0.0, &[0.0, 1.0], &[1, 0]),
    ] {
        ensure(ps.flat, || format!("{}: not flagged flat", label(&ps)))?;
        let an = Ansatz::new(ps.clone()).map_err(|e| e.to_string())?;
        for (_, x) in momenta(&an, 20, 3) {
            let t = curvature_tensors(&an, &x, Chart::Log).map_err(|e| e.to_string())?;
            riem = riem.max(t.riemann_norm());
        }
        ensure(riem < FLAT_RIEMANN_TOL, || {
            format!("{}: Riemann {riem:.3e}", label(&ps))
        })?;
    }
    let ps = taubnut(0.0, &[0.0, 1.0], &[0, 0]);
    ensure(ps.ricci_flat, || "Taub-NUT a=0 not flagged Ricci-flat".into())?;
    let an = Ansatz::new(ps).map_err(|e| e.to_string())?;
    let (mut ric, mut h_err): (f64, f64) = (0.0, 0.0);
    for (xi, x) in momenta(&an, 50, 5) {
        let r = curvature_from_potential(&an, &x, &[0.0, 0.0], Chart::Log).map_err(|e| e.to_string())?;
        ric = ric.max(r.ricci_norm);
        let hc = an.holomorphic_coordinates_2d(&xi).map_err(|e| e.to_string())?;
        h_err = h_err.max((hc.h - 0.5 * ((xi[0] - 1.0).powi(2) + xi[1] * xi[1])).abs());
    }
    ensure(ric < RICCI_FLAT_TOL, || format!("Taub-NUT Ricci {ric:.3e}"))?;
    ensure(h_err < KAHLER_POTENTIAL_TOL, || {
        format!("Kähler potential error {h_err:.3e}")
    })?;
    Ok(format!(
        "flat Riemann {riem:.3e}, Taub-NUT Ricci {ric:.3e}, potential error {h_err:.3e}"
    ))
}

fn positivity_scan() -> Outcome {
    let mut parts = Vec::new();
    for a in [0.25, 1.0, 4.0] {
        let r = positivity_scan_2d(a, &ScanGrid::default(), false).map_err(|e| e.to_string())?;
        let strict = [
            ("Scal/4 - lambda", r.ricci_lower),
            ("f", r.holomorphic),
            ("f exact", r.holomorphic_exact),
            ("f_s", r.sectional),
            ("f_s exact", r.sectional_exact),
            ("fbar", r.fbar),
            ("fbar exact", r.fbar_exact),
        ];
        for (name, m) in strict {
            ensure(m.value > 0.0, || {
                format!("a={a}: {name} minimum {:.3e} at {:?}", m.value, m.xi)
            })?;
        }
        // The smallest conformal scalar curvature sits on the first log-spaced row.
        ensure(r.kappa_i.value >= 0.0 && r.kappa_i.xi[1] - 1.0 < 1e-2, || {
            format!("a={a}: kappa_I minimum {:.3e} at {:?}", r.kappa_i.value, r.kappa_i.xi)
        })?;
        ensure(r.all_positive, || format!("a={a}: scan not positive"))?;
        parts.push(format!(
            "a={a}: min f_s {:.3e}",
            r.sectional.value.min(r.sectional_exact.value)
        ));
    }
    Ok(parts.join(", "))
}

fn scalar_curvature_maximum() -> Outcome {
    let mut parts = Vec::new();
    for a in [0.25, 1.0, 4.0] {
        let r = scal_maximum_search(a, 20.0, 21, 14).map_err(|e| e.to_string())?;
        let dist: Vec<f64> = r.levels.iter().map(|l| l.argmax[0].hypot(l.argmax[1] - 1.0)).collect();
        ensure(dist.windows(2).all(|w| w[1] <= w[0]), || {
            format!("a={a}: argmax distances {dist:?}")
        })?;
        ensure(r.value_error < SCAL_MAX_TOL, || {
            format!("a={a}: value error {:.3e}", r.value_error)
        })?;
        parts.push(format!(
            "a={a}: error {:.3e} at distance {:.3e}",
            r.value_error, r.argmax_distance
        ));
    }
    Ok(parts.join(", "))
}

fn closed_form_vs_fd() -> Outcome {
    let mut worst: f64 = 0.0;
    let cases = [
        cao(1.0, &[0.0, 1.0], &[0, 0]),
        taubnut(0.0, &[0.0, 1.0], &[0, 0]),
        taubnut(1.0, &[0.0, 1.0], &[0, 0]),
    ];
    for ps in cases {
        let an = Ansatz::new(ps.clone()).map_err(|e| e.to_string())?;
        let b = an.soliton_vector().b;
        let (f1, f2) = (&ps.profiles[0], &ps.profiles[1]);
        let mut err: f64 = 0.0;
        for (xi, x) in momenta(&an, 50, 9) {
            let r = curvature_from_potential(&an, &x, &b, Chart::Log).map_err(|e| e.to_string())?;
            let am = ambi_closed_forms_2d(f1, f2, [xi[0], xi[1]]).map_err(|e| e.to_string())?;
            err = err.max((r.scal - am.scal).abs());
        }
        ensure(err < SCAL_FD_TOL, || format!("{}: Scal error {err:.3e}", label(&ps)))?;
        worst = worst.max(err);
    }
    Ok(format!("max Scal error {worst:.3e}"))
}

fn volume_growth() -> Outcome {
    let cases = [
        cao(1.0, &[0.0, 1.0], &[0, 0]),
        cao(1.0, &[0.0, 1.0], &[1, 0]),
        cao(1.0, &[0.0, 1.0, 2.0], &[0, 0, 0]),
        taubnut(1.0, &[0.0, 1.0], &[0, 0]),
        taubnut(1.0, &[0.0, 1.0, 2.0], &[0, 0, 0]),
    ];
    let mut parts = Vec::new();
    for ps in cases {
        let n = ps.n() as f64;
        let expected = if ps.family == Family::Cao { n } else { 2.0 * n - 1.0 };
        let v = volume_growth_fit(&ps, 1e3, 11).map_err(|e| e.to_string())?;
        let e = v.fit.exponent;
        ensure((e - expected).abs() <= EXPONENT_TOL, || {
            format!("{}: exponent {e:.4} vs {expected}", label(&ps))
        })?;
        parts.push(format!("{e:.3}/{expected}"));
    }
    Ok(format!("exponents {}", parts.join(" ")))
}

fn series_validation() -> Outcome {
    let r = series_coefficient_checks(1.0, 60, &[0.5, 1.0, 2.0, 5.0]).map_err(|e| e.to_string())?;
    for c in &r.checks {
        ensure(c.claim_holds, || {
            format!("{}: claim fails at {:?}", c.name, c.first_violation)
        })?;
        ensure(c.max_error <= SERIES_TOL, || {
            format!("{}: error {:.3e}", c.name, c.max_error)
        })?;
    }
    let worst = r.checks.iter().map(|c| c.max_error).fold(0.0, f64::max);
    Ok(format!("{} checks, max error {worst:.3e}", r.checks.len()))
}

fn soliton_vector_field() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [0.5, 1.0, 2.0] {
        let an = Ansatz::new(cao(a, &[0.0, 1.0], &[0, 0])).map_err(|e| e.to_string())?;
        let lam = an.soliton_vector().label_coefficients;
        let e = (-2.0 * a).exp();
        worst = worst.max((lam[0] - a * (e + 2.0 * a - 1.0)).abs());
        worst = worst.max((lam[1] - a * (1.0 - e * (1.0 + 2.0 * a))).abs());
    }
    ensure(worst < VECTOR_TOL, || format!("component error {worst:.3e}"))?;
    let curve = soliton_ratio_curve(&log_grid(1e-3, 1e3, 61)).map_err(|e| e.to_string())?;
    ensure(curve.strictly_increasing, || "ratio curve not increasing".into())?;
    ensure(curve.limits_bracketed, || {
        format!("ratio limits {} and {}", curve.small_a_ratio, curve.large_a_ratio)
    })?;
    let mut checked = 0;
    for a in [0.25, 1.0, 4.0] {
        for ps in configurations(a) {
            let an = Ansatz::new(ps.clone()).map_err(|e| e.to_string())?;
            let poly = DelzantPolyhedron::standard_cone(an.n());
            let r = forbidden_region_check(&poly, &an.soliton_vector().b).map_err(|e| e.to_string())?;
            ensure(!r.forbidden, || format!("{}: vector in forbidden region", label(&ps)))?;
            checked += 1;
        }
    }
    Ok(format!(
        "component error {worst:.3e}, ratio {:.6} to {:.3e}, {checked} vectors allowed",
        curve.small_a_ratio, curve.large_a_ratio
    ))
}

fn vandermonde_identities() -> Outcome {
    for l in 1..=8_i64 {
        let nodes: Vec<BigRational> = (0..l)
            .map(|k| BigRational::from_integer(BigInt::from(k * k - 7)))
            .collect();
        let sigma1 = nodes.iter().fold(BigRational::zero(), |s, x| s + x);
        let sums = vandermonde_sums_exact(&nodes).map_err(|e| e.to_string())?;
        for (r, s) in sums.iter().enumerate() {
            let target = match r {
                0 => sigma1.clone(),
                1 => BigRational::one(),
                _ => BigRational::zero(),
            };
            ensure(*s == target, || format!("l={l} r={r}: {s} != {target}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut sets = 0;
    while sets < 100 {
        let l = rng.random_range(1..=8);
        let mut xs: Vec<f64> = (0..l).map(|_| rng.random_range(-2.0..2.0)).collect();
        xs.sort_by(f64::total_cmp);
        if xs.windows(2).any(|w| w[1] - w[0] < 0.1) {
            continue;
        }
        let r = vandermonde_identity_residual(&xs).map_err(|e| e.to_string())?;
        worst = worst.max(r.iter().fold(0.0, |m, v| m.max(v.abs())));
        sets += 1;
    }
    ensure(worst < VANDERMONDE_TOL, || format!("float residual {worst:.3e}"))?;
    Ok(format!("exact for l <= 8, float residual {worst:.3e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed_form_profile", closed_form_profile),
        ("soliton_certification", soliton_certification),
        ("flat_limits", flat_limits),
        ("positivity_scan", positivity_scan),
        ("scalar_curvature_maximum", scalar_curvature_maximum),
        ("closed_form_vs_fd", closed_form_vs_fd),
        ("volume_growth", volume_growth),
        ("series_validation", series_validation),
        ("soliton_vector_field", soliton_vector_field),
        ("vandermonde_identities", vandermonde_identities),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}; {secs:.2} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail}; {secs:.2} s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
