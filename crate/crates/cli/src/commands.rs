//! Implementations of the subcommands. Each writes its files into the
//! output directory and returns whether all of its checks passed.

use std::fs;
use std::path::{Path, PathBuf};

use gkrs::analysis::{
    distance_proxy, killing_norm_growth_check, log_grid, scal_maximum_search, soliton_ratio, volume_growth_fit,
    DistanceProxy, KillingReport, RayEnd, ScalMaxReport, VolumeGrowth,
};
use gkrs::ansatz::{Ansatz, ChartPoint};
use gkrs::config::RunConfig;
use gkrs::curvature::{
    ambi_closed_forms_2d, curvature_from_potential, curvature_tensors, positivity_scan_2d, series_coefficient_checks,
    Chart, CurvatureReport, ScanReport, SeriesReport,
};
use gkrs::profiles::{check_admissibility, Family, ProfileSet};
use gkrs::record::ProfileRecord;
use gkrs::toric::{boundary_condition_check, forbidden_region_check, ma_residual_spread, DelzantPolyhedron};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{write_json, Table};

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

pub struct Outcome {
    pub step: &'static str,
    pub pass: bool,
    pub summary: PathBuf,
}

const PROFILE_FILE: &str = "profile.txt";
const SERIES_POINTS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
const SERIES_TERMS: usize = 60;
const ODE_POINTS: usize = 50;
const STRUCTURE_POINTS: usize = 20;

fn config_error(e: gkrs::Error) -> CliError {
    match e {
        gkrs::Error::InvalidInput(_) | gkrs::Error::NonFinite(_) => CliError::Config(e.to_string()),
        other => CliError::Compute(other),
    }
}

#[derive(Serialize)]
struct BuildSummary {
    family: Family,
    n: usize,
    ell: usize,
    admissible: bool,
    violations: Vec<String>,
    q_roots: Vec<f64>,
    min_margin: f64,
    flat: bool,
    ricci_flat: bool,
    incomplete_expected: bool,
    pass: bool,
}

pub fn build(ctx: &Context) -> Result<Outcome, CliError> {
    let ps = ctx.cfg.build().map_err(config_error)?;
    let adm = check_admissibility(&ps);
    let rec = ProfileRecord {
        set: ps.clone(),
        scale: ctx.cfg.scale,
    };
    let path = ctx.path(PROFILE_FILE);
    fs::write(&path, rec.to_text()).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?;
    let pass = adm.admissible || ps.incomplete_expected;
    let summary = BuildSummary {
        family: ps.family,
        n: ps.n(),
        ell: ps.ell(),
        admissible: adm.admissible,
        violations: adm.violations,
        q_roots: adm.q_roots,
        min_margin: adm.min_margin,
        flat: ps.flat,
        ricci_flat: ps.ricci_flat,
        incomplete_expected: ps.incomplete_expected,
        pass,
    };
    let out = ctx.path("admissibility.json");
    write_json(&out, &summary)?;
    Ok(Outcome {
        step: "build",
        pass,
        summary: out,
    })
}

fn load_profile(ctx: &Context) -> Result<ProfileSet, CliError> {
    let path = ctx.path(PROFILE_FILE);
    if !path.exists() {
        return Err(CliError::MissingInput(path.display().to_string()));
    }
    let text = fs::read_to_string(&path).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?;
    let rec = ProfileRecord::from_text(&text).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?;
    Ok(rec.set)
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    max_residual: f64,
    tolerance: f64,
    detail: Option<String>,
}

impl Check {
    fn from(name: &str, tolerance: f64, r: gkrs::Result<(f64, Option<String>)>) -> Self {
        match r {
            Ok((v, detail)) => Check {
                name: name.into(),
                pass: v <= tolerance,
                max_residual: v,
                tolerance,
                detail,
            },
            Err(e) => Check {
                name: name.into(),
                pass: false,
                max_residual: f64::NAN,
                tolerance,
                detail: Some(e.to_string()),
            },
        }
    }

    fn skipped(name: &str, why: &str) -> Self {
        Check {
            name: name.into(),
            pass: true,
            max_residual: 0.0,
            tolerance: 0.0,
            detail: Some(format!("skipped: {why}")),
        }
    }
}

fn block_samples(ps: &ProfileSet, j: usize, count: usize) -> Vec<f64> {
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

fn sample_points(an: &Ansatz, count: usize, seed: u64) -> Vec<ChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| an.sample_point(&mut rng)).collect()
}

fn expected_eigenvalues(ps: &ProfileSet, xi: &[f64]) -> Vec<f64> {
    let mut v = xi.to_vec();
    for (a, d) in ps.alpha.iter().zip(&ps.dims) {
        v.extend(std::iter::repeat_n(*a, *d));
    }
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Serialize)]
struct VerifySummary {
    checks: Vec<Check>,
    all_pass: bool,
    flat: bool,
    ricci_flat: bool,
}

pub fn verify(ctx: &Context) -> Result<Outcome, CliError> {
    let ps = load_profile(ctx)?;
    let tol = &ctx.cfg.tolerances;
    let mut checks = Vec::new();
    checks.push(Check::from(
        "ode_residual",
        tol.ode_residual,
        Ok((
            (0..ps.ell())
                .flat_map(|j| block_samples(&ps, j, ODE_POINTS).into_iter().map(move |t| (j, t)))
                .map(|(j, t)| ps.ode_residual(j, t))
                .fold(0.0, f64::max),
            None,
        )),
    ));
    let an = match Ansatz::new(ps.clone()) {
        Ok(an) => Some(an),
        Err(e) => {
            checks.push(Check::from("ansatz", 0.0, Err(e)));
            None
        }
    };
    let mut flat = false;
    if let Some(an) = &an {
        let seed = ctx.cfg.seed;
        let n = an.n();
        let sv = an.soliton_vector();
        let pts = sample_points(an, ctx.cfg.grids.samples, seed);
        checks.push(Check::from(
            "ma_residual_std",
            tol.ma_std,
            (|| {
                let xs: Vec<Vec<f64>> = pts
                    .iter()
                    .map(|p| an.moment_map(&p.xi, &p.base))
                    .collect::<gkrs::Result<_>>()?;
                let s = ma_residual_spread(an, &sv.b, &vec![2.0; n], &xs)?;
                Ok((s.std_dev / (1.0 + s.mean.abs()), Some(format!("mean {:.16e}", s.mean))))
            })(),
        ));
        let few = &pts[..pts.len().min(STRUCTURE_POINTS)];
        checks.push(Check::from(
            "compatibility",
            tol.compatibility,
            (|| {
                let mut m: f64 = 0.0;
                for p in few {
                    m = an.compatibility_residual(p)?.iter().fold(m, |a, b| a.max(*b));
                }
                Ok((m, None))
            })(),
        ));
        checks.push(Check::from(
            "eigenvalues",
            tol.eigenvalue,
            (|| {
                let mut m: f64 = 0.0;
                for p in few {
                    let ev = an.hamiltonian_form_at(&p.xi)?.eigenvalues;
                    let want = expected_eigenvalues(&ps, &p.xi);
                    for (a, b) in ev.iter().zip(&want) {
                        m = m.max((a - b).abs() / (1.0 + b.abs()));
                    }
                    if ev.len() != want.len() {
                        m = f64::INFINITY;
                    }
                }
                Ok((m, None))
            })(),
        ));
        let poly = DelzantPolyhedron::standard_cone(n);
        if ps.a > 0.0 {
            checks.push(Check::from(
                "forbidden_region",
                0.5,
                (|| {
                    let r = forbidden_region_check(&poly, &sv.b)?;
                    Ok((
                        if r.forbidden { 1.0 } else { 0.0 },
                        Some(format!("max pairing {:.16e}", r.max_pairing)),
                    ))
                })(),
            ));
        } else {
            checks.push(Check::skipped("forbidden_region", "a ≤ 0"));
        }
        checks.push(Check::from(
            "boundary_conditions",
            tol.boundary,
            (|| {
                let x0 = an.moment_map(&pts[0].xi, &pts[0].base)?;
                let mut worst: f64 = 0.0;
                let mut failed = Vec::new();
                for facet in 0..n {
                    let r = boundary_condition_check(an, &poly, facet, &x0, tol.boundary)?;
                    worst = worst.max((r.ratio_limit - 2.0).abs());
                    if !r.pass {
                        failed.push(facet);
                        worst = f64::INFINITY.min(worst.max(1.0));
                    }
                }
                Ok((
                    worst,
                    (!failed.is_empty()).then(|| format!("failing facets {failed:?}")),
                ))
            })(),
        ));
        if ps.flat {
            let c = Check::from(
                "flat",
                tol.flat_riemann,
                (|| {
                    let mut m: f64 = 0.0;
                    for p in few.iter().take(5) {
                        let x = an.moment_map(&p.xi, &p.base)?;
                        m = m.max(curvature_tensors(an, &x, Chart::Log)?.riemann_norm());
                    }
                    Ok((m, None))
                })(),
            );
            flat = c.pass;
            checks.push(c);
        }
    }
    let all_pass = checks.iter().all(|c| c.pass);
    let summary = VerifySummary {
        checks,
        all_pass,
        flat,
        ricci_flat: ps.ricci_flat,
    };
    let out = ctx.path("verification.json");
    write_json(&out, &summary)?;
    Ok(Outcome {
        step: "verify",
        pass: all_pass,
        summary: out,
    })
}

#[derive(Serialize)]
struct Extreme {
    value: f64,
    xi: Vec<f64>,
}

#[derive(Serialize)]
struct CurvatureSummary {
    samples: usize,
    scal_min: Extreme,
    scal_max: Extreme,
    ricci_norm_max: f64,
    riemann_norm_max: f64,
    soliton_residual_max: f64,
    scal_closed_form_max_error: Option<f64>,
    sectional_min: Option<Extreme>,
    sectional_max: Option<f64>,
    flat: bool,
    ricci_flat: bool,
    pass: bool,
}

fn is_orthotoric_2d(ps: &ProfileSet) -> bool {
    ps.ell() == 2 && ps.dims == [0, 0]
}

pub fn curvature(ctx: &Context) -> Result<Outcome, CliError> {
    let ps = load_profile(ctx)?;
    let an = Ansatz::new(ps.clone())?;
    let tol = &ctx.cfg.tolerances;
    let b = an.soliton_vector().b;
    let pts = sample_points(&an, ctx.cfg.grids.curvature_samples, ctx.cfg.seed);
    let results: Vec<(ChartPoint, Vec<f64>, CurvatureReport, Option<f64>)> = pts
        .into_par_iter()
        .map(|p| -> gkrs::Result<_> {
            let x = an.moment_map(&p.xi, &p.base)?;
            let r = curvature_from_potential(&an, &x, &b, Chart::Log)?;
            let closed = if is_orthotoric_2d(&ps) {
                Some(ambi_closed_forms_2d(&ps.profiles[0], &ps.profiles[1], [p.xi[0], p.xi[1]])?.scal)
            } else {
                None
            };
            Ok((p, x, r, closed))
        })
        .collect::<gkrs::Result<_>>()?;
    let l = an.ell();
    let n = an.n();
    let mut header: Vec<String> = (1..=l).map(|j| format!("xi_{j}")).collect();
    header.extend((1..=n).map(|k| format!("x_{k}")));
    header.extend(
        [
            "scal",
            "scal_closed",
            "ricci_norm",
            "riemann_norm",
            "soliton_residual",
            "ricci_min_eigenvalue",
            "sectional_min",
            "sectional_max",
        ]
        .map(String::from),
    );
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    let mut scal_min = Extreme {
        value: f64::INFINITY,
        xi: Vec::new(),
    };
    let mut scal_max = Extreme {
        value: f64::NEG_INFINITY,
        xi: Vec::new(),
    };
    let mut sec_min: Option<Extreme> = None;
    let mut sec_max: Option<f64> = None;
    let (mut ric, mut riem, mut sol) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut closed_err: Option<f64> = None;
    for (p, x, r, closed) in &results {
        let mut row = p.xi.clone();
        row.extend(x);
        let sec = r.sectional.as_ref();
        row.extend([
            r.scal,
            closed.unwrap_or(f64::NAN),
            r.ricci_norm,
            r.riemann_norm,
            r.soliton_residual_norm,
            r.ricci_eigenvalues[0],
            sec.map_or(f64::NAN, |s| s.min),
            sec.map_or(f64::NAN, |s| s.max),
        ]);
        table.rows.push(row);
        if r.scal < scal_min.value {
            scal_min = Extreme {
                value: r.scal,
                xi: p.xi.clone(),
            };
        }
        if r.scal > scal_max.value {
            scal_max = Extreme {
                value: r.scal,
                xi: p.xi.clone(),
            };
        }
        if let Some(s) = sec {
            if sec_min.as_ref().is_none_or(|m| s.min < m.value) {
                sec_min = Some(Extreme {
                    value: s.min,
                    xi: p.xi.clone(),
                });
            }
            sec_max = Some(sec_max.map_or(s.max, |m: f64| m.max(s.max)));
        }
        ric = ric.max(r.ricci_norm);
        riem = riem.max(r.riemann_norm);
        sol = sol.max(r.soliton_residual_norm);
        if let Some(c) = closed {
            closed_err = Some(closed_err.unwrap_or(0.0).max((c - r.scal).abs()));
        }
    }
    table.write(&ctx.path("curvature.csv"))?;
    let mut pass = sol <= tol.soliton_residual;
    pass &= closed_err.is_none_or(|e| e <= tol.scal_closed_form);
    if ps.flat {
        pass &= riem <= tol.flat_riemann;
    }
    if ps.ricci_flat {
        pass &= ric <= tol.ricci_flat;
    }
    let summary = CurvatureSummary {
        samples: results.len(),
        scal_min,
        scal_max,
        ricci_norm_max: ric,
        riemann_norm_max: riem,
        soliton_residual_max: sol,
        scal_closed_form_max_error: closed_err,
        sectional_min: sec_min,
        sectional_max: sec_max,
        flat: ps.flat,
        ricci_flat: ps.ricci_flat,
        pass,
    };
    let out = ctx.path("curvature.json");
    write_json(&out, &summary)?;
    Ok(Outcome {
        step: "curvature",
        pass,
        summary: out,
    })
}

#[derive(Serialize)]
struct ScanSummary {
    positivity: ScanReport,
    series: SeriesReport,
    scal_maximum: ScalMaxReport,
    soliton_ratio: f64,
    sectional_min: f64,
    pass: bool,
}

pub fn scan(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.cfg;
    if cfg.family != Family::Cao || cfg.partition != [0, 0] || cfg.alpha != [0.0, 1.0] || !(cfg.a > 0.0) {
        return Err(CliError::Config(
            "scan needs the Cao family with alpha (0, 1), partition (0, 0) and a > 0".into(),
        ));
    }
    let grid = cfg.grids.scan();
    let rep = positivity_scan_2d(cfg.a, &grid, true)?;
    let mut table = Table::new(&[
        "xi_1",
        "xi_2",
        "scal",
        "kappa_i",
        "lambda_raw",
        "ricci_lower",
        "holomorphic_min",
        "sectional_min",
        "fbar_min",
    ]);
    for r in &rep.rows {
        table.rows.push(vec![
            r.xi1,
            r.xi2,
            r.scal,
            r.kappa_i,
            r.lambda_raw,
            r.ricci_lower,
            r.holomorphic_min,
            r.sectional_min,
            r.fbar_min,
        ]);
    }
    table.write(&ctx.path("scan.csv"))?;
    let series = series_coefficient_checks(cfg.a, SERIES_TERMS, &SERIES_POINTS)?;
    let scal_maximum = scal_maximum_search(cfg.a, grid.xi2_max, 21, 14)?;
    let pass = rep.all_positive && series.all_pass(1e-8) && scal_maximum.value_error < 1e-6;
    let summary = ScanSummary {
        sectional_min: rep.sectional.value.min(rep.sectional_exact.value),
        positivity: rep,
        series,
        scal_maximum,
        soliton_ratio: soliton_ratio(cfg.a),
        pass,
    };
    let out = ctx.path("scan.json");
    write_json(&out, &summary)?;
    Ok(Outcome {
        step: "scan",
        pass,
        summary: out,
    })
}

#[derive(Serialize)]
struct VolumeSummary {
    volume: VolumeGrowth,
    volume_pass: bool,
    distances: Vec<DistanceProxy>,
    killing: Vec<KillingReport>,
    pass: bool,
}

pub fn volume(ctx: &Context) -> Result<Outcome, CliError> {
    let ps = load_profile(ctx)?;
    let an = Ansatz::new(ps.clone())?;
    let cfg = &ctx.cfg;
    let tol = &cfg.tolerances;
    let v = volume_growth_fit(&ps, cfg.grids.volume_r_max, cfg.grids.volume_steps).map_err(config_error)?;
    let mut table = Table::new(&["r", "volume", "volume_exact"]);
    for ((r, q), e) in v.fit.radii.iter().zip(&v.fit.values).zip(&v.exact) {
        table.rows.push(vec![*r, *q, *e]);
    }
    table.write(&ctx.path("volume.csv"))?;
    let volume_pass = v.pass(tol.volume_exponent) && v.max_rel_discrepancy < 1e-8;
    let start = 10.0 * ps.alpha.iter().fold(1.0_f64, |m, a| m.max(a.abs()));
    if !(cfg.grids.ray_max > 10.0 * start) {
        return Err(CliError::Config(format!("ray_max must exceed {}", 10.0 * start)));
    }
    let targets = log_grid(start, cfg.grids.ray_max, cfg.grids.ray_steps);
    let mut ends = vec![RayEnd::Upper];
    if ps.domain(0).0.is_infinite() {
        ends.push(RayEnd::Lower);
    }
    let mut distances = Vec::new();
    let mut killing = Vec::new();
    let mut pass = volume_pass;
    for end in ends {
        let t: Vec<f64> = match end {
            RayEnd::Upper => targets.clone(),
            RayEnd::Lower => targets.iter().map(|x| -x).collect(),
        };
        let d = distance_proxy(&ps, end, &t)?;
        if ps.a > 0.0 {
            pass &= d.linear();
        }
        let k = killing_norm_growth_check(&an, end, &t)?;
        pass &= k.fields.iter().all(|f| f.fit.exponent <= 1.0 + tol.growth_exponent);
        distances.push(d);
        killing.push(k);
    }
    let summary = VolumeSummary {
        volume: v,
        volume_pass,
        distances,
        killing,
        pass,
    };
    let out = ctx.path("volume.json");
    write_json(&out, &summary)?;
    Ok(Outcome {
        step: "volume",
        pass,
        summary: out,
    })
}

#[derive(Serialize)]
struct StepResult {
    step: String,
    pass: bool,
    summary: String,
}

pub fn report(ctx: &Context) -> Result<Outcome, CliError> {
    let mut steps = Vec::new();
    let mut record = |o: Outcome| {
        steps.push(StepResult {
            step: o.step.into(),
            pass: o.pass,
            summary: file_name(&o.summary),
        });
    };
    record(build(ctx)?);
    record(verify(ctx)?);
    record(curvature(ctx)?);
    let cfg = &ctx.cfg;
    if cfg.family == Family::Cao && cfg.partition == [0, 0] && cfg.alpha == [0.0, 1.0] && cfg.a > 0.0 {
        record(scan(ctx)?);
    }
    record(volume(ctx)?);
    let pass = steps.iter().all(|s| s.pass);
    let out = ctx.path("report.json");
    write_json(&out, &serde_json::json!({ "steps": steps, "pass": pass }))?;
    Ok(Outcome {
        step: "report",
        pass,
        summary: out,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
