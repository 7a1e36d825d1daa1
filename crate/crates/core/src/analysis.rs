//! Global and asymptotic quantities: volume growth, distance along
//! coordinate rays, growth of Killing fields, the ratio of soliton-vector
//! components and the location of the scalar-curvature maximum.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::ansatz::{Ansatz, ChartPoint};
use crate::curvature::ambi_cao_2d;
use crate::error::{invalid, Result};
use crate::profiles::{Family, ProfileSet};
use crate::symfun::{integrate, vandermonde_delta, QuadOptions};

/// Least-squares power law `v ∼ r^e` over the top decade of radii.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub exponent: f64,
    pub r_squared: f64,
}

impl GrowthFit {
    /// Fits `log v` against `log r` using the points with `r ≥ r_max/10`.
    pub fn fit(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(invalid("growth fit needs at least two samples"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
            return Err(invalid("radii must be positive and strictly increasing"));
        }
        let rmax = *radii.last().unwrap();
        let pts: Vec<(f64, f64)> = radii
            .iter()
            .zip(&values)
            .filter(|(r, v)| **r >= rmax / 10.0 * (1.0 - 1e-12) && **v > 0.0)
            .map(|(r, v)| (r.ln(), v.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(invalid("fewer than two positive samples in the top decade"));
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let exponent = sxy / sxx;
        let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
        Ok(Self {
            radii,
            values,
            exponent,
            r_squared,
        })
    }
}

/// `|det V(ξ)| · |∏ p_c(ξ_j)|`.
pub fn volume_measure(ps: &ProfileSet, xi: &[f64]) -> f64 {
    let l = xi.len();
    let mut v = 1.0;
    for i in 0..l {
        for j in i + 1..l {
            v *= xi[j] - xi[i];
        }
        v *= ps.p_c.eval(xi[i]);
    }
    v.abs()
}

/// Integration box `D_r`: each domain interval with infinite ends replaced
/// by `±r`.
pub fn volume_region(ps: &ProfileSet, r: f64) -> Vec<(f64, f64)> {
    (0..ps.ell())
        .map(|j| {
            let (lo, hi) = ps.domain(j);
            (
                if lo.is_finite() { lo } else { -r },
                if hi.is_finite() { hi } else { r },
            )
        })
        .collect()
}

type Monomials = BTreeMap<Vec<u32>, f64>;

fn mul_linear(p: &Monomials, var: usize, shift: f64, other: Option<usize>) -> Monomials {
    // Multiplies by (x_var − x_other) or (x_var − shift).
    let mut out = Monomials::new();
    for (e, c) in p {
        let mut up = e.clone();
        up[var] += 1;
        *out.entry(up).or_insert(0.0) += c;
        match other {
            Some(o) => {
                let mut e2 = e.clone();
                e2[o] += 1;
                *out.entry(e2).or_insert(0.0) -= c;
            }
            None if shift != 0.0 => {
                *out.entry(e.clone()).or_insert(0.0) -= c * shift;
            }
            None => {}
        }
    }
    out
}

/// `∫_{D_r}` of the volume measure from its polynomial expansion.
pub fn volume_exact(ps: &ProfileSet, r: f64) -> f64 {
    let l = ps.ell();
    let mut p = Monomials::new();
    p.insert(vec![0; l], 1.0);
    for i in 0..l {
        for j in i + 1..l {
            p = mul_linear(&p, j, 0.0, Some(i));
        }
        for (k, &alpha) in ps.alpha.iter().enumerate() {
            for _ in 0..ps.dims[k] {
                p = mul_linear(&p, i, alpha, None);
            }
        }
    }
    let region = volume_region(ps, r);
    let total: f64 = p
        .iter()
        .map(|(e, c)| {
            c * e
                .iter()
                .zip(&region)
                .map(|(&k, &(lo, hi))| {
                    let m = k as i32 + 1;
                    (hi.powi(m) - lo.powi(m)) / m as f64
                })
                .product::<f64>()
        })
        .sum();
    total.abs()
}

/// `∫_{D_r}` of the volume measure by nested adaptive quadrature.
pub fn volume_quadrature(ps: &ProfileSet, r: f64) -> Result<f64> {
    let region = volume_region(ps, r);
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        ..QuadOptions::default()
    };
    fn nested(ps: &ProfileSet, region: &[(f64, f64)], xi: &[f64], opts: &QuadOptions) -> Result<f64> {
        let k = xi.len();
        if k == region.len() {
            return Ok(volume_measure(ps, xi));
        }
        let (lo, hi) = region[k];
        let cell = std::cell::RefCell::new((xi.to_vec(), None));
        let res = integrate(
            |t| {
                let mut c = cell.borrow_mut();
                c.0.truncate(k);
                c.0.push(t);
                let buf = c.0.clone();
                match nested(ps, region, &buf, opts) {
                    Ok(v) => v,
                    Err(e) => {
                        c.1 = Some(e);
                        f64::NAN
                    }
                }
            },
            lo,
            hi,
            opts,
        );
        if let Some(e) = cell.into_inner().1 {
            return Err(e);
        }
        Ok(res?.value)
    }
    nested(ps, &region, &[], &opts)
}

/// Volume growth of the coordinate boxes `D_r`.
#[derive(Debug, Clone, Serialize)]
pub struct VolumeGrowth {
    pub fit: GrowthFit,
    pub exact: Vec<f64>,
    /// Largest relative difference between quadrature and exact volumes.
    pub max_rel_discrepancy: f64,
    /// `n` for the Cao family, `2n − 1` for Taub-NUT.
    pub expected_exponent: f64,
}

impl VolumeGrowth {
    pub fn pass(&self, tol: f64) -> bool {
        (self.fit.exponent - self.expected_exponent).abs() <= tol
    }
}

/// Volumes of `D_r` for `steps` radii log-spaced over `[r_max/10, r_max]`.
pub fn volume_growth_fit(ps: &ProfileSet, r_max: f64, steps: usize) -> Result<VolumeGrowth> {
    if !(r_max > 10.0 * ps.alpha.iter().fold(1.0_f64, |m, a| m.max(a.abs()))) || steps < 2 {
        return Err(invalid("r_max must exceed ten times the largest node and steps ≥ 2"));
    }
    let radii: Vec<f64> = (0..steps)
        .map(|k| r_max * 10f64.powf(k as f64 / (steps - 1) as f64 - 1.0))
        .collect();
    let quad: Vec<f64> = radii
        .par_iter()
        .map(|&r| volume_quadrature(ps, r))
        .collect::<Result<_>>()?;
    let exact: Vec<f64> = radii.iter().map(|&r| volume_exact(ps, r)).collect();
    let max_rel_discrepancy = quad
        .iter()
        .zip(&exact)
        .map(|(q, e)| (q - e).abs() / e.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let n = ps.n() as f64;
    let expected_exponent = match ps.family {
        Family::Cao => n,
        Family::TaubNut => 2.0 * n - 1.0,
    };
    Ok(VolumeGrowth {
        fit: GrowthFit::fit(radii, quad)?,
        exact,
        max_rel_discrepancy,
        expected_exponent,
    })
}

/// Which end of the ξ-domain a coordinate ray runs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RayEnd {
    /// `ξ_ℓ → +∞`.
    Upper,
    /// `ξ_1 → −∞`.
    Lower,
}

impl RayEnd {
    fn block(self, ps: &ProfileSet) -> usize {
        match self {
            RayEnd::Upper => ps.ell() - 1,
            RayEnd::Lower => 0,
        }
    }
}

/// Lengths of a coordinate ray with the other `ξ_j` frozen at reference
/// points.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceProxy {
    pub end: RayEnd,
    pub start: f64,
    pub targets: Vec<f64>,
    pub lengths: Vec<f64>,
    /// Fit of length against `|target|`.
    pub fit: GrowthFit,
    /// `length/|target|` at the last target.
    pub ratio: f64,
}

impl DistanceProxy {
    /// Linear growth, asserted only for `a > 0`.
    pub fn linear(&self) -> bool {
        (0.9..=1.1).contains(&self.fit.exponent)
    }
}

fn ray_point(ps: &ProfileSet, j: usize, t: f64) -> Vec<f64> {
    (0..ps.ell())
        .map(|k| if k == j { t } else { ps.reference_point(k) })
        .collect()
}

/// Length of the ray from the reference point of the end block to each
/// target, integrating `√(Δ_j/Θ_j)`.
pub fn distance_proxy(ps: &ProfileSet, end: RayEnd, targets: &[f64]) -> Result<DistanceProxy> {
    let j = end.block(ps);
    let (lo, hi) = ps.domain(j);
    let unbounded = match end {
        RayEnd::Upper => hi.is_infinite(),
        RayEnd::Lower => lo.is_infinite(),
    };
    if !unbounded {
        return Err(invalid("the requested end of the domain is bounded"));
    }
    let start = ps.reference_point(j);
    let dir = if end == RayEnd::Upper { 1.0 } else { -1.0 };
    if targets.is_empty()
        || targets.windows(2).any(|w| !((w[1] - w[0]) * dir > 0.0))
        || (targets[0] - start) * dir <= 0.0
    {
        return Err(invalid("targets must move monotonically away from the start"));
    }
    let speed = |t: f64| -> f64 {
        let xi = ray_point(ps, j, t);
        (vandermonde_delta(&xi, j) / ps.theta(j, t)).abs().sqrt()
    };
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        ..QuadOptions::default()
    };
    let mut lengths = Vec::with_capacity(targets.len());
    let mut acc = 0.0;
    let mut prev = start;
    for &t in targets {
        acc += integrate(speed, prev, t, &opts)?.value.abs();
        lengths.push(acc);
        prev = t;
    }
    let radii: Vec<f64> = targets.iter().map(|t| t.abs()).collect();
    let ratio = acc / radii.last().unwrap();
    Ok(DistanceProxy {
        end,
        start,
        targets: targets.to_vec(),
        lengths: lengths.clone(),
        fit: GrowthFit::fit(radii, lengths)?,
        ratio,
    })
}

/// Growth of one Killing field against the distance proxy.
#[derive(Debug, Clone, Serialize)]
pub struct KillingGrowth {
    pub name: String,
    pub fit: GrowthFit,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KillingReport {
    pub distance: DistanceProxy,
    pub fields: Vec<KillingGrowth>,
    pub pass: bool,
}

/// Norms of the fibre fields `K_r = ∂/∂t_r` and of the standard torus
/// generators along a coordinate ray, fitted against the distance proxy.
/// Passes when every exponent is at most `1.05`.
pub fn killing_norm_growth_check(an: &Ansatz, end: RayEnd, targets: &[f64]) -> Result<KillingReport> {
    let ps = &an.profiles;
    let distance = distance_proxy(ps, end, targets)?;
    let j = end.block(ps);
    let l = an.ell();
    let n = an.n();
    let base = an.barycentre();
    let mut norms = vec![Vec::with_capacity(targets.len()); l + n];
    for &t in targets {
        let p = ChartPoint {
            xi: ray_point(ps, j, t),
            angles: vec![0.0; l],
            base: base.clone(),
        };
        let m = an.metric_at(&p)?;
        for r in 0..l {
            norms[r].push(m.angle_block[(r, r)].abs().sqrt());
        }
        let hinv = m
            .potential_hessian
            .clone()
            .try_inverse()
            .ok_or_else(|| crate::Error::Singular("potential hessian".into()))?;
        for k in 0..n {
            norms[l + k].push(hinv[(k, k)].abs().sqrt());
        }
    }
    let mut fields = Vec::with_capacity(l + n);
    for (i, vals) in norms.into_iter().enumerate() {
        let name = if i < l {
            format!("K_{}", i + 1)
        } else {
            format!("X_{}", i - l + 1)
        };
        let fit = GrowthFit::fit(distance.lengths.clone(), vals)?;
        let pass = fit.exponent <= 1.05;
        fields.push(KillingGrowth { name, fit, pass });
    }
    let pass = fields.iter().all(|f| f.pass);
    Ok(KillingReport { distance, fields, pass })
}

/// `λ_1/λ_2` for the two-dimensional Cao family.
pub fn soliton_ratio(a: f64) -> f64 {
    let s = 2.0 * a;
    let em = (-s).exp_m1();
    (s + em) / (-em - s * (-s).exp())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioRow {
    pub a: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioCurve {
    pub rows: Vec<RatioRow>,
    pub strictly_increasing: bool,
    pub small_a_ratio: f64,
    pub large_a_ratio: f64,
    /// `|ratio(10⁻³) − 1| < 10⁻²` and `ratio(10³) > 10²`.
    pub limits_bracketed: bool,
}

pub fn soliton_ratio_curve(a_values: &[f64]) -> Result<RatioCurve> {
    if a_values.iter().any(|a| !(*a > 0.0)) || a_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("a values must be positive and increasing"));
    }
    let rows: Vec<RatioRow> = a_values
        .iter()
        .map(|&a| RatioRow {
            a,
            ratio: soliton_ratio(a),
        })
        .collect();
    let strictly_increasing = rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let small_a_ratio = soliton_ratio(1e-3);
    let large_a_ratio = soliton_ratio(1e3);
    Ok(RatioCurve {
        rows,
        strictly_increasing,
        small_a_ratio,
        large_a_ratio,
        limits_bracketed: (small_a_ratio - 1.0).abs() < 1e-2 && large_a_ratio > 1e2,
    })
}

/// `count` values log-spaced over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let m = (count.max(2) - 1) as f64;
    (0..count)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / m).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZoomLevel {
    pub half_width: f64,
    pub argmax: [f64; 2],
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalMaxReport {
    pub a: f64,
    pub levels: Vec<ZoomLevel>,
    /// `4a²(1 − e^{−2a})`.
    pub supremum: f64,
    pub value_error: f64,
    pub argmax_distance: f64,
}

/// Locates the supremum of the scalar curvature of the two-dimensional Cao
/// family over `(0,1) × (1, ξ_max]` by zooming grids around the argmax.
pub fn scal_maximum_search(a: f64, xi2_max: f64, points: usize, levels: usize) -> Result<ScalMaxReport> {
    if !(a > 0.0) || !(xi2_max > 1.0) || points < 2 || levels == 0 {
        return Err(invalid("scal search needs a > 0, ξ_max > 1, a grid and a level"));
    }
    let mut box_ = [(0.0, 1.0), (1.0, xi2_max)];
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        let mut best = (f64::NEG_INFINITY, [0.0; 2]);
        for i in 0..points {
            let x1 = box_[0].0 + (i as f64 + 0.5) / points as f64 * (box_[0].1 - box_[0].0);
            for k in 0..points {
                let x2 = box_[1].0 + (k as f64 + 0.5) / points as f64 * (box_[1].1 - box_[1].0);
                let s = ambi_cao_2d(a, [x1, x2])?.scal;
                if s > best.0 {
                    best = (s, [x1, x2]);
                }
            }
        }
        let hw = (box_[0].1 - box_[0].0).max(box_[1].1 - box_[1].0) / points as f64 * 2.0;
        out.push(ZoomLevel {
            half_width: hw,
            argmax: best.1,
            value: best.0,
        });
        box_ = [
            ((best.1[0] - hw).max(0.0), (best.1[0] + hw).min(1.0)),
            ((best.1[1] - hw).max(1.0), (best.1[1] + hw).min(xi2_max)),
        ];
    }
    let supremum = 4.0 * a * a * -(-2.0 * a).exp_m1();
    let last = out.last().unwrap();
    Ok(ScalMaxReport {
        a,
        supremum,
        value_error: (supremum - last.value).abs(),
        argmax_distance: last.argmax[0].hypot(last.argmax[1] - 1.0),
        levels: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{build_cao_profile, build_taubnut_profile, Gauge, SolitonParams};
    use approx::assert_relative_eq;

    fn params(a: f64, alpha: &[f64], dims: &[usize]) -> SolitonParams {
        SolitonParams {
            a,
            alpha: alpha.to_vec(),
            dims: dims.to_vec(),
            scale: 1.0,
            gauge: Gauge::UnitC,
        }
    }

    #[test]
    fn measure_examples() {
        let ps = build_cao_profile(&params(1.0, &[0.0, 1.0], &[0, 0])).unwrap();
        assert_relative_eq!(volume_measure(&ps, &[0.3, 2.5]), 2.2, epsilon = 1e-15);
        assert_eq!(volume_measure(&ps, &[0.5, 0.5]), 0.0);
        let ps = build_cao_profile(&params(1.0, &[0.0, 1.0], &[1, 0])).unwrap();
        let (x1, x2) = (0.3, 2.5);
        assert_relative_eq!(
            volume_measure(&ps, &[x1, x2]),
            (x2 - x1) * x1 * x2,
            max_relative = 1e-14
        );
    }

    #[test]
    fn exact_volumes() {
        let ps = build_cao_profile(&params(1.0, &[0.0, 1.0], &[0, 0])).unwrap();
        // ∫₀¹∫₁^r (ξ₂ − ξ₁) = (r² − 1)/2 − (r − 1)/2.
        let r = 7.0;
        assert_relative_eq!(
            volume_exact(&ps, r),
            (r * r - 1.0) / 2.0 - (r - 1.0) / 2.0,
            max_relative = 1e-14
        );
        let ps = build_taubnut_profile(&params(1.0, &[0.0, 1.0], &[0, 0])).unwrap();
        // ∫_{−r}^0 ∫_1^r (ξ₂ − ξ₁) = r(r² − 1)/2 + (r − 1)r²/2.
        assert_relative_eq!(
            volume_exact(&ps, r),
            r * (r * r - 1.0) / 2.0 + (r - 1.0) * r * r / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            volume_quadrature(&ps, r).unwrap(),
            volume_exact(&ps, r),
            max_relative = 1e-10
        );
    }

    #[test]
    fn growth_fit_recovers_power_law() {
        let r = log_grid(10.0, 100.0, 9);
        let v: Vec<f64> = r.iter().map(|x| 3.0 * x.powf(2.5)).collect();
        let f = GrowthFit::fit(r, v).unwrap();
        assert_relative_eq!(f.exponent, 2.5, epsilon = 1e-12);
        assert_relative_eq!(f.r_squared, 1.0, epsilon = 1e-12);
        assert!(GrowthFit::fit(vec![2.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn ratio_values() {
        let e = (-2.0_f64).exp();
        assert_relative_eq!(soliton_ratio(1.0), (e + 1.0) / (1.0 - 3.0 * e), max_relative = 1e-14);
        assert_relative_eq!(soliton_ratio(1.0), 1.9113, epsilon = 1e-4);
        // 1 + 2a/3 + O(a²).
        assert_relative_eq!(soliton_ratio(1e-3), 1.0006669, epsilon = 1e-7);
        let c = soliton_ratio_curve(&log_grid(0.01, 10.0, 61)).unwrap();
        assert!(c.strictly_increasing && c.limits_bracketed);
    }

    #[test]
    fn ratio_matches_soliton_vector() {
        for a in [0.3, 1.0, 3.0] {
            let an = Ansatz::new(build_cao_profile(&params(a, &[0.0, 1.0], &[0, 0])).unwrap()).unwrap();
            let c = an.soliton_vector().label_coefficients;
            assert_relative_eq!(c[0] / c[1], soliton_ratio(a), max_relative = 1e-12);
        }
    }

    #[test]
    fn scal_supremum_at_corner() {
        let r = scal_maximum_search(1.0, 20.0, 21, 10).unwrap();
        assert!(r.value_error < 1e-6, "{r:?}");
        assert!(r.argmax_distance < 1e-6);
        assert!(r.levels.windows(2).all(|w| w[1].value >= w[0].value));
        assert!(r.levels.iter().all(|l| l.value < r.supremum));
    }

    #[test]
    fn distance_and_killing_growth() {
        let targets = log_grid(10.0, 1e4, 13);
        let cao = Ansatz::new(build_cao_profile(&params(1.0, &[0.0, 1.0], &[0, 0])).unwrap()).unwrap();
        let d = distance_proxy(&cao.profiles, RayEnd::Upper, &targets).unwrap();
        assert!(d.linear(), "{:?}", d.fit.exponent);
        let coeff = 1.0 / -(-2.0_f64).exp_m1();
        assert_relative_eq!(d.ratio, coeff.sqrt(), max_relative = 1e-2);
        let k = killing_norm_growth_check(&cao, RayEnd::Upper, &targets).unwrap();
        assert!(k.pass);
        assert!(k.fields[0].fit.exponent.abs() < 0.05);
        let flat = Ansatz::new(build_cao_profile(&params(0.0, &[0.0, 1.0], &[0, 0])).unwrap()).unwrap();
        let d = distance_proxy(&flat.profiles, RayEnd::Upper, &targets).unwrap();
        assert_relative_eq!(d.fit.exponent, 0.5, epsilon = 0.02);
        let far = log_grid(1e4, 1e7, 13);
        let k = killing_norm_growth_check(&flat, RayEnd::Upper, &far).unwrap();
        for f in &k.fields[2..] {
            assert_relative_eq!(f.fit.exponent, 1.0, epsilon = 0.02);
        }
        let tn = Ansatz::new(build_taubnut_profile(&params(1.0, &[0.0, 1.0], &[0, 0])).unwrap()).unwrap();
        for (end, t) in [
            (RayEnd::Upper, targets.clone()),
            (RayEnd::Lower, targets.iter().map(|t| -t).collect()),
        ] {
            let d = distance_proxy(&tn.profiles, end, &t).unwrap();
            assert!(d.linear());
            let k = killing_norm_growth_check(&tn, end, &t).unwrap();
            assert!(k.pass);
            assert!(k.fields[0].fit.exponent.abs() < 0.05);
        }
        assert!(distance_proxy(&cao.profiles, RayEnd::Lower, &[-10.0]).is_err());
    }
}
