//! Curvature of toric metrics `Hess(u) dx² + Hess(u)^{-1} dt²` by finite
//! differences, closed-form curvature of the two-dimensional family, the
//! sectional-curvature function on `[−1,1]²`, positivity scans and the
//! power-series identities behind them.

use nalgebra::{DMatrix, SymmetricEigen};
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::symfun::ExpPoly;
use crate::toric::SymplecticPotential;

/// Riemann tensor and derived quantities at one point.
#[derive(Debug, Clone)]
pub struct CurvatureTensors {
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// `christoffel[e][(b, c)] = Γ^e_{bc}`.
    pub christoffel: Vec<DMatrix<f64>>,
    /// `R_{abcd}` flattened in row-major order; `R_{abab}` is the
    /// sectional numerator.
    pub riemann: Vec<f64>,
    pub ricci: DMatrix<f64>,
    pub scal: f64,
    pub chart: Chart,
    pub momenta: Vec<f64>,
}

impl CurvatureTensors {
    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn r(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.dim();
        self.riemann[((a * n + b) * n + c) * n + d]
    }

    /// `‖R‖_g`.
    pub fn riemann_norm(&self) -> f64 {
        let n = self.dim();
        let h = &self.inverse;
        // Raise all indices, then contract.
        let mut up = self.riemann.clone();
        for slot in 0..4 {
            let mut next = vec![0.0; up.len()];
            for idx in 0..up.len() {
                let mut ids = [idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n];
                let orig = ids[slot];
                let mut acc = 0.0;
                for k in 0..n {
                    ids[slot] = k;
                    acc += h[(orig, k)] * up[((ids[0] * n + ids[1]) * n + ids[2]) * n + ids[3]];
                }
                next[idx] = acc;
            }
            up = next;
        }
        up.iter()
            .zip(&self.riemann)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .abs()
            .sqrt()
    }

    /// `‖T‖_g` for a symmetric 2-tensor.
    pub fn tensor_norm(&self, t: &DMatrix<f64>) -> f64 {
        let m = &self.inverse * t * &self.inverse;
        m.component_mul(t).sum().abs().sqrt()
    }

    /// `Hess⟨b, x⟩` in the chart coordinates.
    pub fn momentum_hessian(&self, b: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (k, bk) in b.iter().enumerate() {
            let dk = match self.chart {
                Chart::Linear => *bk,
                Chart::Log => {
                    m[(k, k)] += bk * self.momenta[k];
                    bk * self.momenta[k]
                }
            };
            m -= &self.christoffel[k] * dk;
        }
        m
    }

    /// Eigenvalues of `g^{-1} Ric`, ascending.
    pub fn ricci_eigenvalues(&self) -> Result<Vec<f64>> {
        generalized_eigenvalues(&self.ricci, &self.metric)
    }
}

fn generalized_eigenvalues(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = g.clone().cholesky().ok_or(Error::NotConvex {
        eigenvalue: g.clone().symmetric_eigenvalues().min(),
    })?;
    let linv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Singular("metric factor".into()))?;
    let m = &linv * a * linv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Coordinates on the momentum directions used for finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// The momenta `x` themselves.
    Linear,
    /// `s_k = log x_k`, for potentials on the open orthant. Near a facet the
    /// metric varies on the scale `x_k`, so a fixed step in `s` stays
    /// accurate where a fixed step in `x` does not.
    Log,
}

impl Chart {
    fn momenta(self, s: &[f64]) -> Vec<f64> {
        match self {
            Chart::Linear => s.to_vec(),
            Chart::Log => s.iter().map(|v| v.exp()).collect(),
        }
    }
}

fn toric_metric(pot: &(impl SymplecticPotential + ?Sized), s: &[f64], chart: Chart) -> Result<DMatrix<f64>> {
    let n = s.len();
    let x = chart.momenta(s);
    if pot.boundary_margin(&x) <= 0.0 {
        return Err(Error::OutOfDomain(format!("{x:?}")));
    }
    let mut h = pot.hessian(&x)?;
    let hinv = h
        .clone()
        .cholesky()
        .ok_or(Error::NotConvex {
            eigenvalue: h.clone().symmetric_eigenvalues().min(),
        })?
        .inverse();
    if chart == Chart::Log {
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] *= x[i] * x[j];
            }
        }
    }
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(&h);
    g.view_mut((n, n), (n, n)).copy_from(&hinv);
    Ok(g)
}

/// Initial finite-difference step at `x` in the given chart.
pub fn curvature_step(pot: &(impl SymplecticPotential + ?Sized), x: &[f64], chart: Chart) -> f64 {
    match chart {
        Chart::Linear => 1e-3_f64.min(pot.boundary_margin(x) / 8.0),
        Chart::Log => 5e-3,
    }
}

/// Levi-Civita curvature of the toric metric of `pot` at momenta `x`, with
/// metric derivatives from fourth-order central differences in `chart`.
/// The step is reduced when a stencil point leaves the domain.
pub fn curvature_tensors(
    pot: &(impl SymplecticPotential + ?Sized),
    x: &[f64],
    chart: Chart,
) -> Result<CurvatureTensors> {
    let n = x.len();
    if n == 0 || n != pot.dim() {
        return Err(invalid("momentum vector has wrong length"));
    }
    if chart == Chart::Log && x.iter().any(|v| !(*v > 0.0)) {
        return Err(invalid("logarithmic chart needs positive momenta"));
    }
    let mut h = curvature_step(pot, x, chart);
    if !(h > 0.0) {
        return Err(Error::OutOfDomain(format!("{x:?}")));
    }
    for _ in 0..8 {
        match tensors_with_step(pot, x, chart, h) {
            Err(Error::OutOfDomain(_)) => h /= 4.0,
            r => return r,
        }
    }
    Err(Error::OutOfDomain(format!("{x:?}")))
}

fn tensors_with_step(
    pot: &(impl SymplecticPotential + ?Sized),
    x: &[f64],
    chart: Chart,
    h: f64,
) -> Result<CurvatureTensors> {
    let n = x.len();
    let s0: Vec<f64> = match chart {
        Chart::Linear => x.to_vec(),
        Chart::Log => x.iter().map(|v| v.ln()).collect(),
    };
    let d = 2 * n;
    let eval = |shift: &[(usize, f64)]| -> Result<DMatrix<f64>> {
        let mut p = s0.clone();
        for &(i, s) in shift {
            p[i] += s;
        }
        toric_metric(pot, &p, chart)
    };
    let g0 = eval(&[])?;
    let ginv = g0
        .clone()
        .cholesky()
        .ok_or(Error::NotConvex {
            eigenvalue: g0.clone().symmetric_eigenvalues().min(),
        })?
        .inverse();
    let w1 = [
        (-2.0, 1.0 / 12.0),
        (-1.0, -8.0 / 12.0),
        (1.0, 8.0 / 12.0),
        (2.0, -1.0 / 12.0),
    ];
    let mut dg: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    let mut ddg = vec![vec![DMatrix::zeros(d, d); n]; n];
    let mut axis: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(n);
    for i in 0..n {
        let vals: Vec<DMatrix<f64>> = w1.iter().map(|&(k, _)| eval(&[(i, k * h)])).collect::<Result<_>>()?;
        let mut di = DMatrix::zeros(d, d);
        for (v, &(_, w)) in vals.iter().zip(&w1) {
            di += v * (w / h);
        }
        dg.push(di);
        axis.push(vals);
    }
    for i in 0..n {
        let v = &axis[i];
        ddg[i][i] = (-&v[0] + &v[1] * 16.0 - &g0 * 30.0 + &v[2] * 16.0 - &v[3]) / (12.0 * h * h);
        for j in i + 1..n {
            let mut acc = DMatrix::zeros(d, d);
            for &(ki, wi) in &w1 {
                for &(kj, wj) in &w1 {
                    acc += eval(&[(i, ki * h), (j, kj * h)])? * (wi * wj);
                }
            }
            acc /= h * h;
            ddg[i][j] = acc.clone();
            ddg[j][i] = acc;
        }
    }
    let pd = |a: usize, r: usize, c: usize| -> f64 {
        if a < n {
            dg[a][(r, c)]
        } else {
            0.0
        }
    };
    let mut lower = vec![DMatrix::zeros(d, d); d];
    for (f, low) in lower.iter_mut().enumerate() {
        for b in 0..d {
            for c in 0..d {
                low[(b, c)] = 0.5 * (pd(b, f, c) + pd(c, f, b) - pd(f, b, c));
            }
        }
    }
    let christoffel: Vec<DMatrix<f64>> = (0..d)
        .map(|e| {
            let mut m = DMatrix::zeros(d, d);
            for (f, low) in lower.iter().enumerate() {
                if ginv[(e, f)] != 0.0 {
                    m += low * ginv[(e, f)];
                }
            }
            m
        })
        .collect();
    let dd = |a: usize, b: usize, r: usize, c: usize| -> f64 {
        if a < n && b < n {
            ddg[a][b][(r, c)]
        } else {
            0.0
        }
    };
    let mut riemann = vec![0.0; d * d * d * d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let dterm = 0.5 * (dd(b, c, a, e) + dd(a, e, b, c) - dd(b, e, a, c) - dd(a, c, b, e));
                    let mut q = 0.0;
                    for p in 0..d {
                        for s in 0..d {
                            q += g0[(p, s)]
                                * (christoffel[p][(b, c)] * christoffel[s][(a, e)]
                                    - christoffel[p][(b, e)] * christoffel[s][(a, c)]);
                        }
                    }
                    riemann[((a * d + b) * d + c) * d + e] = dterm + q;
                }
            }
        }
    }
    let mut ricci = DMatrix::zeros(d, d);
    for b in 0..d {
        for e in 0..d {
            let mut s = 0.0;
            for a in 0..d {
                for c in 0..d {
                    s += ginv[(a, c)] * riemann[((a * d + b) * d + c) * d + e];
                }
            }
            ricci[(b, e)] = s;
        }
    }
    let ricci = (&ricci + ricci.transpose()) * 0.5;
    let scal = ginv.component_mul(&ricci).sum();
    Ok(CurvatureTensors {
        metric: g0,
        inverse: ginv,
        christoffel,
        riemann,
        ricci,
        scal,
        chart,
        momenta: x.to_vec(),
    })
}

/// Range of sectional curvature over all 2-planes at a point.
#[derive(Debug, Clone, Serialize)]
pub struct SectionalRange {
    pub min: f64,
    pub max: f64,
    /// Bivector of the minimising plane in an orthonormal frame, ordered
    /// `e01, e02, e03, e12, e13, e23`.
    pub min_plane: Vec<f64>,
}

/// Sectional-curvature extremes in real dimension four, as
/// `max_c λ_min(R + c⋆)` and `min_c λ_max(R + c⋆)` on `Λ²`.
pub fn sectional_range_4d(t: &CurvatureTensors) -> Result<SectionalRange> {
    if t.dim() != 4 {
        return Err(invalid("sectional range is implemented in real dimension four"));
    }
    let chol = t
        .metric
        .clone()
        .cholesky()
        .ok_or(Error::NotConvex { eigenvalue: f64::NAN })?;
    let frame = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Singular("metric factor".into()))?;
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let rf = |i: usize, j: usize, k: usize, l: usize| -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        s += t.r(a, b, c, d) * frame[(a, i)] * frame[(b, j)] * frame[(c, k)] * frame[(d, l)];
                    }
                }
            }
        }
        s
    };
    let m = DMatrix::from_fn(6, 6, |p, q| rf(pairs[p].0, pairs[p].1, pairs[q].0, pairs[q].1));
    let m = (&m + m.transpose()) * 0.5;
    let mut star = DMatrix::zeros(6, 6);
    for (p, q, s) in [(0, 5, 1.0), (1, 4, -1.0), (2, 3, 1.0)] {
        star[(p, q)] = s;
        star[(q, p)] = s;
    }
    let bound = 4.0 * m.amax() + 1.0;
    let lmin = |c: f64, sign: f64| -> f64 {
        let e = SymmetricEigen::new(&m * sign + &star * c);
        e.eigenvalues.min()
    };
    let argmax = |sign: f64| -> f64 {
        let (mut lo, mut hi) = (-bound, bound);
        let g = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut c1 = hi - g * (hi - lo);
        let mut c2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (lmin(c1, sign), lmin(c2, sign));
        for _ in 0..200 {
            if f1 < f2 {
                lo = c1;
                c1 = c2;
                f1 = f2;
                c2 = lo + g * (hi - lo);
                f2 = lmin(c2, sign);
            } else {
                hi = c2;
                c2 = c1;
                f2 = f1;
                c1 = hi - g * (hi - lo);
                f1 = lmin(c1, sign);
            }
        }
        0.5 * (lo + hi)
    };
    let cmin = argmax(1.0);
    let cmax = argmax(-1.0);
    let e = SymmetricEigen::new(&m + &star * cmin);
    let k = e.eigenvalues.imin();
    Ok(SectionalRange {
        min: e.eigenvalues[k],
        max: -lmin(cmax, -1.0),
        min_plane: e.eigenvectors.column(k).iter().copied().collect(),
    })
}

/// Summary of curvature at a point of a toric soliton.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub scal: f64,
    pub ricci_eigenvalues: Vec<f64>,
    pub ricci_norm: f64,
    pub riemann_norm: f64,
    /// `‖Ric − Hess⟨b, x⟩‖_g`.
    pub soliton_residual_norm: f64,
    pub sectional: Option<SectionalRange>,
}

/// Curvature report for the soliton with vector `b` at momenta `x`.
pub fn curvature_from_potential(
    pot: &(impl SymplecticPotential + ?Sized),
    x: &[f64],
    b: &[f64],
    chart: Chart,
) -> Result<CurvatureReport> {
    if b.len() != x.len() {
        return Err(invalid("soliton vector has wrong length"));
    }
    let t = curvature_tensors(pot, x, chart)?;
    let d = t.dim();
    let resid = &t.ricci - t.momentum_hessian(b);
    let sectional = if d == 4 { Some(sectional_range_4d(&t)?) } else { None };
    Ok(CurvatureReport {
        point: x.to_vec(),
        scal: t.scal,
        ricci_eigenvalues: t.ricci_eigenvalues()?,
        ricci_norm: t.tensor_norm(&t.ricci),
        riemann_norm: t.riemann_norm(),
        soliton_residual_norm: t.tensor_norm(&resid),
        sectional,
    })
}

/// Closed-form curvature quantities of a two-dimensional orthotoric metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmbiData2D {
    pub scal: f64,
    pub kappa_i: f64,
    /// `|λ|`, the branch used by the sectional function.
    pub lambda: f64,
    pub lambda_raw: f64,
    /// `e^{−2aξ_1} + e^{−2aξ_2}` and `e^{−2aξ_1} − e^{−2aξ_2}` for the Cao family.
    pub a_sum: Option<f64>,
    pub b_diff: Option<f64>,
    /// `ξ_2 − ξ_1`.
    pub x: f64,
}

/// Scalar curvature, conformal scalar curvature and `λ` from the profiles.
pub fn ambi_closed_forms_2d(f1: &ExpPoly, f2: &ExpPoly, xi: [f64; 2]) -> Result<AmbiData2D> {
    let d = xi[0] - xi[1];
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Singular("coincident eigenvalues".into()));
    }
    let (u0, u1, u2) = (f1.eval(xi[0]), f1.derivative_at(1, xi[0]), f1.derivative_at(2, xi[0]));
    let (v0, v1, v2) = (f2.eval(xi[1]), f2.derivative_at(1, xi[1]), f2.derivative_at(2, xi[1]));
    let scal = -(u2 - v2) / d;
    let kappa_i = -(u2 - v2) / d + 6.0 * (u1 + v1) / (d * d) - 12.0 * (u0 - v0) / (d * d * d);
    let lambda_raw = -0.25 * (u2 + v2) / d + 0.5 * (u1 - v1) / (d * d);
    Ok(AmbiData2D {
        scal,
        kappa_i,
        lambda: lambda_raw.abs(),
        lambda_raw,
        a_sum: None,
        b_diff: None,
        x: -d,
    })
}

/// Closed forms for the unit-`c` Cao profile in dimension two. Uses the
/// positive power series in `x = ξ_2 − ξ_1` when `2ax < 1`, where the
/// direct formulas cancel.
pub fn ambi_cao_2d(a: f64, xi: [f64; 2]) -> Result<AmbiData2D> {
    let x = xi[1] - xi[0];
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid("expected ξ_1 < ξ_2"));
    }
    let s = 2.0 * a;
    let e2 = (-s * xi[1]).exp();
    let e1 = (-s * xi[0]).exp();
    let sx = s * x;
    let (scal, kappa_i, lambda_raw) = if sx.abs() < 1.0 {
        let (mut sc, mut ka, mut la) = (0.0, 0.0, 0.0);
        // term = s^{m+2} x^m / (m+1)!
        let mut term = s * s;
        for m in 0..60usize {
            let k = m as f64;
            sc += term * s;
            ka += term * s * k * (k - 1.0) / ((k + 3.0) * (k + 2.0));
            la += term * s * k / (4.0 * (k + 2.0));
            term *= sx / (k + 2.0);
        }
        (e2 * sc, e2 * ka, e2 * la)
    } else {
        let em = sx.exp_m1();
        let ep = em + 2.0;
        (
            e2 * s * s * em / x,
            e2 * (s * s * em / x - 6.0 * s * ep / (x * x) + 12.0 * em / (x * x * x)),
            e2 * (s * s * ep / (4.0 * x) - s * em / (2.0 * x * x)),
        )
    };
    Ok(AmbiData2D {
        scal,
        kappa_i,
        lambda: lambda_raw.abs(),
        lambda_raw,
        a_sum: Some(e1 + e2),
        b_diff: Some(e1 - e2),
        x,
    })
}

/// `f_s(t_1,t_2) = t_1² Scal/8 + t_1t_2 λ + t_2² κ_I/8 + (Scal − κ_I)/24`.
pub fn sectional_function(ambi: &AmbiData2D, t1: f64, t2: f64) -> f64 {
    t1 * t1 * ambi.scal / 8.0 + t1 * t2 * ambi.lambda + t2 * t2 * ambi.kappa_i / 8.0 + (ambi.scal - ambi.kappa_i) / 24.0
}

/// Holomorphic restriction `f(t) = f_s(1, t)`.
pub fn holomorphic_function(ambi: &AmbiData2D, t: f64) -> f64 {
    sectional_function(ambi, 1.0, t)
}

/// `f̄(t) = f_s(t, 1)`.
pub fn fbar_function(ambi: &AmbiData2D, t: f64) -> f64 {
    sectional_function(ambi, t, 1.0)
}

/// Minimum of `c2 t² + c1 t + c0` over `[−1, 1]`, with its location.
fn quad_min(c2: f64, c1: f64, c0: f64) -> (f64, f64) {
    let f = |t: f64| c2 * t * t + c1 * t + c0;
    let mut best = if f(-1.0) <= f(1.0) {
        (f(-1.0), -1.0)
    } else {
        (f(1.0), 1.0)
    };
    if c2 > 0.0 {
        let t = -c1 / (2.0 * c2);
        if t.abs() <= 1.0 && f(t) < best.0 {
            best = (f(t), t);
        }
    }
    best
}

/// Exact minimum of `f` over `[−1, 1]`.
pub fn holomorphic_min(ambi: &AmbiData2D) -> (f64, f64) {
    quad_min(
        ambi.kappa_i / 8.0,
        ambi.lambda,
        ambi.scal / 8.0 + (ambi.scal - ambi.kappa_i) / 24.0,
    )
}

/// Exact minimum of `f̄` over `[−1, 1]`.
pub fn fbar_min(ambi: &AmbiData2D) -> (f64, f64) {
    quad_min(ambi.scal / 8.0, ambi.lambda, (ambi.scal + 2.0 * ambi.kappa_i) / 24.0)
}

/// Exact minimum of `f_s` over `[−1, 1]²`: the interior critical value and
/// the minima along the four edges.
pub fn sectional_min(ambi: &AmbiData2D) -> (f64, [f64; 2]) {
    let mut best = (sectional_function(ambi, 0.0, 0.0), [0.0, 0.0]);
    let c0 = (ambi.scal - ambi.kappa_i) / 24.0;
    for s in [-1.0, 1.0] {
        let (v, t) = quad_min(ambi.kappa_i / 8.0, s * ambi.lambda, ambi.scal / 8.0 + c0);
        if v < best.0 {
            best = (v, [s, t]);
        }
        let (v, t) = quad_min(ambi.scal / 8.0, s * ambi.lambda, ambi.kappa_i / 8.0 + c0);
        if v < best.0 {
            best = (v, [t, s]);
        }
    }
    best
}

/// Critical structure of the restricted sectional functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointReport {
    /// `constant`, `no_critical_point` or `interior_critical_point`.
    pub f_kind: String,
    pub f_t_star: Option<f64>,
    pub f_at_t_star: Option<f64>,
    pub fbar_t_star: f64,
    pub fbar_at_t_star: f64,
    /// `−1 < t* ≤ 0` for `f̄`.
    pub fbar_bracketed: bool,
    /// `κ_I Scal = 16λ²`: `d f_s` vanishes along a line.
    pub degenerate_gradient_line: bool,
    pub origin_value: f64,
}

pub fn critical_point_analysis_2d(ambi: &AmbiData2D) -> CriticalPointReport {
    let scale = ambi
        .scal
        .abs()
        .max(ambi.kappa_i.abs())
        .max(ambi.lambda.abs())
        .max(f64::MIN_POSITIVE);
    let tiny = 1e-14 * scale;
    let (f_kind, f_t_star, f_at_t_star) = if ambi.kappa_i.abs() <= tiny {
        if ambi.lambda.abs() <= tiny {
            ("constant".to_string(), None, None)
        } else {
            ("no_critical_point".to_string(), None, None)
        }
    } else {
        let t = -4.0 * ambi.lambda / ambi.kappa_i;
        if t.abs() > 1.0 {
            ("no_critical_point".to_string(), Some(t), None)
        } else {
            (
                "interior_critical_point".to_string(),
                Some(t),
                Some(holomorphic_function(ambi, t)),
            )
        }
    };
    let fbar_t_star = -4.0 * ambi.lambda / ambi.scal;
    let fbar_at_t_star = fbar_function(ambi, fbar_t_star);
    let det = ambi.kappa_i * ambi.scal - 16.0 * ambi.lambda * ambi.lambda;
    CriticalPointReport {
        f_kind,
        f_t_star,
        f_at_t_star,
        fbar_t_star,
        fbar_at_t_star,
        fbar_bracketed: fbar_t_star > -1.0 && fbar_t_star <= 0.0,
        degenerate_gradient_line: det.abs()
            <= 1e-12
                * (ambi.kappa_i * ambi.scal)
                    .abs()
                    .max(16.0 * ambi.lambda * ambi.lambda)
                    .max(tiny),
        origin_value: sectional_function(ambi, 0.0, 0.0),
    }
}

/// Grid for [`positivity_scan_2d`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanGrid {
    pub n_xi1: usize,
    pub n_xi2: usize,
    pub xi2_max: f64,
    pub n_t: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            n_xi1: 200,
            n_xi2: 200,
            xi2_max: 20.0,
            n_t: 41,
        }
    }
}

impl ScanGrid {
    /// Midpoints of `(0, 1)`.
    pub fn xi1(&self) -> Vec<f64> {
        (0..self.n_xi1).map(|k| (k as f64 + 0.5) / self.n_xi1 as f64).collect()
    }

    /// `ξ_2 − 1` log-spaced from `10^{-3}` to `Ξ − 1`.
    pub fn xi2(&self) -> Vec<f64> {
        let lo = 1e-3_f64.ln();
        let hi = (self.xi2_max - 1.0).ln();
        let m = (self.n_xi2.max(2) - 1) as f64;
        (0..self.n_xi2)
            .map(|k| 1.0 + (lo + (hi - lo) * k as f64 / m).exp())
            .collect()
    }

    pub fn t(&self) -> Vec<f64> {
        let m = (self.n_t.max(2) - 1) as f64;
        (0..self.n_t).map(|k| -1.0 + 2.0 * k as f64 / m).collect()
    }
}

/// A minimum over the scan with its location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinRecord {
    pub value: f64,
    pub xi: [f64; 2],
    pub t: [f64; 2],
}

impl MinRecord {
    fn none() -> Self {
        Self {
            value: f64::INFINITY,
            xi: [f64::NAN; 2],
            t: [f64::NAN; 2],
        }
    }

    fn update(&mut self, value: f64, xi: [f64; 2], t: [f64; 2]) {
        if value < self.value {
            *self = Self { value, xi, t };
        }
    }

    fn merge(&mut self, other: &Self) {
        if other.value < self.value {
            *self = *other;
        }
    }
}

/// One grid point of a positivity scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub xi1: f64,
    pub xi2: f64,
    pub scal: f64,
    pub kappa_i: f64,
    pub lambda_raw: f64,
    pub ricci_lower: f64,
    pub holomorphic_min: f64,
    pub sectional_min: f64,
    pub fbar_min: f64,
}

/// Minima of the positivity quantities over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub a: f64,
    pub grid: ScanGrid,
    /// `Scal/4 − λ`, a lower bound for the Ricci eigenvalues.
    pub ricci_lower: MinRecord,
    pub kappa_i: MinRecord,
    pub holomorphic: MinRecord,
    pub holomorphic_exact: MinRecord,
    pub sectional: MinRecord,
    pub sectional_exact: MinRecord,
    pub fbar: MinRecord,
    pub fbar_exact: MinRecord,
    pub scal_min: f64,
    pub scal_max: f64,
    pub lambda_raw_negative: usize,
    pub all_positive: bool,
    #[serde(skip)]
    pub rows: Vec<ScanRow>,
}

/// Scans the two-dimensional Cao family over `(0,1) × (1, Ξ]` and the
/// square `[−1, 1]²`.
pub fn positivity_scan_2d(a: f64, grid: &ScanGrid, keep_rows: bool) -> Result<ScanReport> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(invalid("positivity scan needs a > 0"));
    }
    if grid.n_xi1 == 0 || grid.n_xi2 == 0 || grid.n_t < 2 || !(grid.xi2_max > 1.0 + 1e-3) {
        return Err(invalid("degenerate scan grid"));
    }
    let xs1 = grid.xi1();
    let xs2 = grid.xi2();
    let ts = grid.t();
    struct Partial {
        mins: [MinRecord; 8],
        scal: (f64, f64),
        neg: usize,
        rows: Vec<ScanRow>,
    }
    let partials: Vec<Partial> = xs1
        .par_iter()
        .map(|&x1| -> Result<Partial> {
            let mut mins = [MinRecord::none(); 8];
            let mut scal = (f64::INFINITY, f64::NEG_INFINITY);
            let mut neg = 0;
            let mut rows = Vec::new();
            for &x2 in &xs2 {
                let xi = [x1, x2];
                let am = ambi_cao_2d(a, xi)?;
                scal = (scal.0.min(am.scal), scal.1.max(am.scal));
                if am.lambda_raw < 0.0 {
                    neg += 1;
                }
                let rl = am.scal / 4.0 - am.lambda;
                mins[0].update(rl, xi, [f64::NAN; 2]);
                mins[1].update(am.kappa_i, xi, [f64::NAN; 2]);
                let mut hol = f64::INFINITY;
                let mut fb = f64::INFINITY;
                for &t in &ts {
                    let v = holomorphic_function(&am, t);
                    mins[2].update(v, xi, [1.0, t]);
                    hol = hol.min(v);
                    let w = fbar_function(&am, t);
                    mins[6].update(w, xi, [t, 1.0]);
                    fb = fb.min(w);
                }
                let (hv, ht) = holomorphic_min(&am);
                mins[3].update(hv, xi, [1.0, ht]);
                let mut sec = f64::INFINITY;
                for &t1 in &ts {
                    for &t2 in &ts {
                        let v = sectional_function(&am, t1, t2);
                        mins[4].update(v, xi, [t1, t2]);
                        sec = sec.min(v);
                    }
                }
                let (sv, st) = sectional_min(&am);
                mins[5].update(sv, xi, st);
                let (fv, ft) = fbar_min(&am);
                mins[7].update(fv, xi, [ft, 1.0]);
                if keep_rows {
                    rows.push(ScanRow {
                        xi1: x1,
                        xi2: x2,
                        scal: am.scal,
                        kappa_i: am.kappa_i,
                        lambda_raw: am.lambda_raw,
                        ricci_lower: rl,
                        holomorphic_min: hv.min(hol),
                        sectional_min: sv.min(sec),
                        fbar_min: fv.min(fb),
                    });
                }
            }
            Ok(Partial { mins, scal, neg, rows })
        })
        .collect::<Result<_>>()?;
    let mut mins = [MinRecord::none(); 8];
    let mut scal = (f64::INFINITY, f64::NEG_INFINITY);
    let mut neg = 0;
    let mut rows = Vec::new();
    for p in partials {
        for (m, o) in mins.iter_mut().zip(&p.mins) {
            m.merge(o);
        }
        scal = (scal.0.min(p.scal.0), scal.1.max(p.scal.1));
        neg += p.neg;
        rows.extend(p.rows);
    }
    let all_positive = mins.iter().all(|m| m.value > 0.0);
    Ok(ScanReport {
        a,
        grid: *grid,
        ricci_lower: mins[0],
        kappa_i: mins[1],
        holomorphic: mins[2],
        holomorphic_exact: mins[3],
        sectional: mins[4],
        sectional_exact: mins[5],
        fbar: mins[6],
        fbar_exact: mins[7],
        scal_min: scal.0,
        scal_max: scal.1,
        lambda_raw_negative: neg,
        all_positive,
        rows,
    })
}

/// Outcome of one power-series identity.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesCheck {
    pub name: String,
    pub claim: String,
    pub claim_holds: bool,
    pub first_violation: Option<usize>,
    /// `(x, truncated series, closed form)` at each sample.
    pub samples: Vec<(f64, f64, f64)>,
    /// Largest `|series − closed| / max(1, |closed|)`.
    pub max_error: f64,
    /// Same measure for the expansion as printed, where it differs.
    pub printed_error: Option<f64>,
}

/// All series identities behind the positivity proofs.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub a: f64,
    pub k_max: usize,
    pub checks: Vec<SeriesCheck>,
}

impl SeriesReport {
    pub fn all_pass(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.claim_holds && c.max_error <= tol)
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Evaluates `Σ_k c_k s^{k+p} x^{k+q}` from exact rational coefficients.
fn eval_series(coeffs: &[BigRational], s: f64, x: f64, p: i32, q: i32) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| to_f64(c) * s.powi(k as i32 + p) * x.powi(k as i32 + q))
        .sum()
}

/// Checks the expansions in `x = ξ_2 − ξ_1` used in the positivity proofs
/// for the two-dimensional Cao family. Coefficient signs are decided in
/// exact arithmetic for `k ≤ k_max`; each truncated series is compared with
/// the closed form built from the profile at the sample points.
pub fn series_coefficient_checks(a: f64, k_max: usize, xs: &[f64]) -> Result<SeriesReport> {
    if !(a > 0.0) || k_max > 200 {
        return Err(invalid("series checks need a > 0 and k_max ≤ 200"));
    }
    let s = 2.0 * a;
    let ks = 0..=k_max;
    let big = |v: i64| BigInt::from(v);
    let profile = ExpPoly {
        poly: crate::symfun::Poly::new(vec![-1.0, 1.0 - (-s).exp()]),
        c: 1.0,
        rate: -s,
    };
    // Closed forms evaluated at ξ_2 = 1 + x/2 so both points stay finite.
    let closed = |x: f64| -> Result<(AmbiData2D, f64)> {
        let xi2 = 1.0 + 0.5 * x;
        let am = ambi_closed_forms_2d(&profile, &profile, [xi2 - x, xi2])?;
        Ok((am, (s * xi2).exp()))
    };
    let mut checks = Vec::new();
    let mut push = |name: &str,
                    claim: &str,
                    viol: Option<usize>,
                    series: &dyn Fn(f64) -> f64,
                    lhs: &dyn Fn(f64) -> Result<f64>,
                    printed: Option<&dyn Fn(f64) -> f64>|
     -> Result<()> {
        let mut samples = Vec::new();
        let mut max_error: f64 = 0.0;
        let mut perr: f64 = 0.0;
        for &x in xs {
            let c = lhs(x)?;
            let v = series(x);
            max_error = max_error.max((v - c).abs() / c.abs().max(1.0));
            if let Some(p) = printed {
                perr = perr.max((p(x) - c).abs() / c.abs().max(1.0));
            }
            samples.push((x, v, c));
        }
        checks.push(SeriesCheck {
            name: name.into(),
            claim: claim.into(),
            claim_holds: viol.is_none(),
            first_violation: viol,
            samples,
            max_error,
            printed_error: printed.map(|_| perr),
        });
        Ok(())
    };

    // h(x) = 2(e^{2ax} − 1) e^{2aξ_2} f̄(t*).
    let factors: Vec<BigInt> = ks
        .clone()
        .map(|k| (BigInt::one() << (k + 3)) - big(2) - big(((k + 3) * (k + 2)) as i64))
        .collect();
    let viol = factors
        .iter()
        .enumerate()
        .position(|(k, f)| if k == 0 { !f.is_zero() } else { !f.is_positive() });
    let coeffs: Vec<BigRational> = factors
        .iter()
        .enumerate()
        .map(|(k, f)| ratio(f.clone(), factorial(k + 3)))
        .collect();
    push(
        "h",
        "2^{k+3} − 2 − (k+3)(k+2) vanishes at k = 0 and is positive for k ≥ 1",
        viol,
        &|x| eval_series(&coeffs, s, x, 3, 0),
        &|x| {
            let (am, e) = closed(x)?;
            let t = -4.0 * am.lambda_raw / am.scal;
            let fb = fbar_function(
                &AmbiData2D {
                    lambda: am.lambda_raw,
                    ..am
                },
                t,
            );
            Ok(2.0 * (s * x).exp_m1() * e * fb)
        },
        None,
    )?;

    // e^{2aξ_2} κ_I.
    let kk: Vec<BigInt> = ks.clone().map(|k| big((k * k.saturating_sub(1)) as i64)).collect();
    let viol = kk
        .iter()
        .enumerate()
        .position(|(k, f)| if k < 2 { !f.is_zero() } else { !f.is_positive() });
    let coeffs: Vec<BigRational> = kk
        .iter()
        .enumerate()
        .map(|(k, f)| ratio(f.clone(), factorial(k + 3)))
        .collect();
    let printed: Vec<BigRational> = kk
        .iter()
        .enumerate()
        .map(|(k, f)| ratio(f.clone(), factorial(k + 1) * big(((k + 3) * (k + 2)) as i64)))
        .collect();
    push(
        "kappa_i",
        "k(k − 1) vanishes at k = 0, 1 and is positive afterwards",
        viol,
        &|x| eval_series(&coeffs, s, x, 3, 0),
        &|x| {
            let (am, e) = closed(x)?;
            Ok(e * am.kappa_i)
        },
        Some(&|x| eval_series(&printed, s, x, 2, 0)),
    )?;

    // e^{2aξ_2} f(−1) = e^{2aξ_2}(Scal/6 + κ_I/12 − λ).
    let coeffs: Vec<BigRational> = ks.clone().map(|k| ratio(BigInt::one(), factorial(k + 3))).collect();
    let printed_tail: Vec<BigRational> = ks.clone().map(|k| ratio(BigInt::one(), factorial(k + 2))).collect();
    push(
        "f_minus_one",
        "all coefficients 1/(k+3)! are positive",
        None,
        &|x| eval_series(&coeffs, s, x, 3, 0),
        &|x| {
            let (am, e) = closed(x)?;
            Ok(e * (am.scal / 6.0 + am.kappa_i / 12.0 - am.lambda_raw))
        },
        Some(&|x| 2.0 * a * a / x + eval_series(&printed_tail, s, x, 2, -1)),
    )?;

    // Lower bound e^{2aξ_2}(Scal/3 − κ_I/12 − λ) for 2 e^{2aξ_2} f(t*).
    let fac: Vec<BigRational> = ks
        .clone()
        .map(|k| BigRational::one() - ratio(BigInt::one(), big(k as i64 + 3)))
        .collect();
    let viol = fac.iter().position(|f| !f.is_positive());
    let coeffs: Vec<BigRational> = fac
        .iter()
        .enumerate()
        .map(|(k, f)| f / BigRational::from(factorial(k + 2)))
        .collect();
    let printed: Vec<BigRational> = fac
        .iter()
        .enumerate()
        .map(|(k, f)| f / BigRational::from(factorial(k)))
        .collect();
    push(
        "two_f_t_star_bound",
        "1 − 1/(k+3) is positive",
        viol,
        &|x| eval_series(&coeffs, s, x, 3, 0),
        &|x| {
            let (am, e) = closed(x)?;
            Ok(e * (am.scal / 3.0 - am.kappa_i / 12.0 - am.lambda_raw))
        },
        Some(&|x| eval_series(&printed, s, x, 3, 0)),
    )?;

    // e^{2aξ_2}(Scal − κ_I)/24, summed from k = 3.
    let fac: Vec<BigRational> = ks
        .clone()
        .map(|k| BigRational::one() - ratio(big(2), big(k as i64 + 3)))
        .collect();
    let viol = fac.iter().position(|f| !f.is_positive());
    // Term k' = k + 3: a^{k'} 2^{k'−2}/(k'−1)! (1 − 2/k') x^{k'−3} = s^{k'} (1 − 2/k') / (4 (k'−1)!) x^{k'−3}.
    let coeffs: Vec<BigRational> = fac
        .iter()
        .enumerate()
        .map(|(k, f)| f / BigRational::from(factorial(k + 2) * big(4)))
        .collect();
    push(
        "fs_origin",
        "1 − 2/k is positive for k ≥ 3",
        viol,
        &|x| eval_series(&coeffs, s, x, 3, 0),
        &|x| {
            let (am, e) = closed(x)?;
            Ok(e * (am.scal - am.kappa_i) / 24.0)
        },
        None,
    )?;

    // e^{2aξ_2}(Scal/4 − λ) = a(e^{2ax} − 1)/x² − 2a²/x.
    let coeffs: Vec<BigRational> = ks.clone().map(|k| ratio(BigInt::one(), factorial(k + 2))).collect();
    push(
        "ricci_lower",
        "all coefficients a/(k+2)! are positive",
        None,
        &|x| a * eval_series(&coeffs, s, x, 2, 0),
        &|x| {
            let (am, e) = closed(x)?;
            Ok(e * (am.scal / 4.0 - am.lambda_raw))
        },
        None,
    )?;

    Ok(SeriesReport { a, k_max, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::{DelzantPolyhedron, GuilleminPotential};
    use approx::assert_relative_eq;

    fn cao_profile(a: f64) -> ExpPoly {
        ExpPoly {
            poly: crate::symfun::Poly::new(vec![-1.0, 1.0 - (-2.0 * a).exp()]),
            c: 1.0,
            rate: -2.0 * a,
        }
    }

    #[test]
    fn flat_potential_has_no_curvature() {
        let u = GuilleminPotential::new(&DelzantPolyhedron::standard_cone(2));
        let t = curvature_tensors(&u, &[0.3, 1.7], Chart::Log).unwrap();
        assert!(t.riemann.iter().all(|v| v.abs() < 1e-6));
        assert!(t.riemann_norm() < 1e-6);
    }

    struct Sphere;

    impl SymplecticPotential for Sphere {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok(0.5 * (x[0] * x[0].ln() + (1.0 - x[0]) * (1.0 - x[0]).ln()))
        }
        fn boundary_margin(&self, x: &[f64]) -> f64 {
            x[0].min(1.0 - x[0])
        }
        fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
            Ok(DMatrix::from_element(1, 1, 0.5 / (x[0] * (1.0 - x[0]))))
        }
    }

    #[test]
    fn round_sphere_curvature() {
        // Area 2π, Gauss curvature 2.
        for x in [0.2, 0.5, 0.8] {
            let t = curvature_tensors(&Sphere, &[x], Chart::Linear).unwrap();
            assert_relative_eq!(t.scal, 4.0, epsilon = 1e-7);
            let k = t.r(0, 1, 0, 1) / (t.metric[(0, 0)] * t.metric[(1, 1)]);
            assert_relative_eq!(k, 2.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn cao_closed_forms_at_sample_point() {
        let am = ambi_closed_forms_2d(&cao_profile(1.0), &cao_profile(1.0), [0.5, 2.0]).unwrap();
        let b = (-1.0_f64).exp() - (-4.0_f64).exp();
        assert_relative_eq!(b, 0.3495638, epsilon = 1e-7);
        assert_relative_eq!(am.scal, 4.0 * b / 1.5, epsilon = 1e-14);
        assert_relative_eq!(am.scal, 0.9321702, epsilon = 1e-7);
        let st = ambi_cao_2d(1.0, [0.5, 2.0]).unwrap();
        assert_relative_eq!(st.scal, am.scal, max_relative = 1e-13);
        assert_relative_eq!(st.kappa_i, am.kappa_i, max_relative = 1e-12);
        assert_relative_eq!(st.lambda_raw, am.lambda_raw, max_relative = 1e-12);
        assert_relative_eq!(st.b_diff.unwrap(), b, max_relative = 1e-14);
    }

    #[test]
    fn stable_forms_match_direct_forms_across_the_switch() {
        for a in [0.25, 1.0, 4.0] {
            for x in [0.05 / a, 0.45 / a, 0.55 / a, 2.0 / a] {
                let xi = [0.5, 0.5 + x];
                let d = ambi_closed_forms_2d(&cao_profile(a), &cao_profile(a), xi).unwrap();
                let s = ambi_cao_2d(a, xi).unwrap();
                let sc = d.scal.abs().max(1e-300);
                assert!((d.scal - s.scal).abs() < 1e-9 * sc);
                assert!((d.kappa_i - s.kappa_i).abs() < 1e-7 * sc);
                assert!((d.lambda_raw - s.lambda_raw).abs() < 1e-8 * sc);
            }
        }
    }

    #[test]
    fn flat_limit_and_sectional_identities() {
        let am = ambi_cao_2d(1e-6, [0.3, 2.0]).unwrap();
        assert!(am.scal.abs() < 1e-10 && am.kappa_i.abs() < 1e-10 && am.lambda.abs() < 1e-10);
        let zero = AmbiData2D {
            scal: 0.0,
            kappa_i: 0.0,
            lambda: 0.0,
            lambda_raw: 0.0,
            a_sum: None,
            b_diff: None,
            x: 1.0,
        };
        assert_eq!(sectional_function(&zero, 0.3, -0.7), 0.0);
        let am = ambi_cao_2d(1.0, [0.5, 2.0]).unwrap();
        assert_relative_eq!(
            holomorphic_function(&am, 1.0),
            holomorphic_function(&am, -1.0) + 2.0 * am.lambda,
            epsilon = 1e-14
        );
        let x = am.x;
        let bound = (-2.0_f64 * 2.0).exp() / 3.0;
        assert!(sectional_function(&am, 0.0, 0.0) >= bound);
        assert_relative_eq!(
            (2.0_f64 * 2.0).exp() * sectional_function(&am, 0.0, 0.0),
            ((2.0 * x).exp() + 1.0) / (2.0 * x * x) - (2.0 * x).exp_m1() / (2.0 * x * x * x),
            max_relative = 1e-12
        );
    }

    #[test]
    fn origin_bound_holds_only_with_xi2_dependence() {
        // f_s(0,0) ≥ a³e^{−2aξ_2}/3 holds everywhere; the ξ_2-free bound
        // a³e^{−2a}/3 fails once ξ_2 is large.
        let a = 1.0;
        let am = ambi_cao_2d(a, [0.5, 10.0]).unwrap();
        let v = sectional_function(&am, 0.0, 0.0);
        assert!(v >= a * a * a * (-2.0 * a * 10.0_f64).exp() / 3.0);
        assert!(v < a * a * a * (-2.0 * a).exp() / 3.0);
    }

    #[test]
    fn ricci_lower_bound_formula() {
        let am = ambi_cao_2d(1.0, [0.5, 1.5]).unwrap();
        let e = (2.0_f64 * 1.5).exp();
        assert_relative_eq!(
            e * (am.scal / 4.0 - am.lambda),
            1.0_f64.exp_m1() * 1.0_f64.exp() / 1.0 + 0.0 * e - 2.0
                + (2.0_f64.exp() - 1.0 - 1.0_f64.exp_m1() * 1.0_f64.exp()),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            e * (am.scal / 4.0 - am.lambda),
            2.0_f64.exp() - 1.0 - 2.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(2.0_f64.exp() - 3.0, 4.389056, epsilon = 1e-6);
    }

    #[test]
    fn exact_minima_agree_with_dense_grids() {
        for xi in [[0.5, 2.0], [0.1, 1.05], [0.95, 15.0]] {
            let am = ambi_cao_2d(1.0, xi).unwrap();
            let (m, _) = sectional_min(&am);
            let mut g = f64::INFINITY;
            for i in 0..=400 {
                for j in 0..=400 {
                    g = g.min(sectional_function(
                        &am,
                        -1.0 + i as f64 / 200.0,
                        -1.0 + j as f64 / 200.0,
                    ));
                }
            }
            assert!(m <= g + 1e-15 && g - m < 1e-4 * (1.0 + m.abs()));
            let (h, _) = holomorphic_min(&am);
            let (f, _) = fbar_min(&am);
            for i in 0..=400 {
                let t = -1.0 + i as f64 / 200.0;
                assert!(holomorphic_function(&am, t) >= h - 1e-15);
                assert!(fbar_function(&am, t) >= f - 1e-15);
            }
        }
    }

    #[test]
    fn critical_points() {
        let am = ambi_cao_2d(1.0, [0.5, 2.0]).unwrap();
        let r = critical_point_analysis_2d(&am);
        assert!(r.fbar_bracketed);
        assert!(r.fbar_at_t_star > 0.0);
        let x = 1.5_f64;
        let e = (2.0 * x).exp();
        assert_relative_eq!(
            2.0 * (2.0_f64 * 2.0).exp() * r.fbar_at_t_star,
            (e - 1.0) / x.powi(3) - 4.0 / x * (e / (e - 1.0)),
            max_relative = 1e-12
        );
        assert_relative_eq!(r.fbar_t_star, 1.0 / x - (e + 1.0) / (e - 1.0), max_relative = 1e-12);
        let at1 = ambi_cao_2d(1.0, [0.0 + 0.25, 1.25]).unwrap();
        let v = 2.0 * (2.0_f64 * 1.25).exp() * critical_point_analysis_2d(&at1).fbar_at_t_star;
        let e1 = 2.0_f64.exp();
        assert_relative_eq!(v, (e1 - 1.0) - 4.0 * e1 / (e1 - 1.0), max_relative = 1e-12);
        let degenerate = AmbiData2D {
            scal: 4.0,
            kappa_i: 1.0,
            lambda: 0.5,
            lambda_raw: 0.5,
            a_sum: None,
            b_diff: None,
            x: 1.0,
        };
        assert!(critical_point_analysis_2d(&degenerate).degenerate_gradient_line);
        assert!(!r.degenerate_gradient_line);
        let flat = AmbiData2D {
            scal: 0.0,
            kappa_i: 0.0,
            lambda: 0.0,
            lambda_raw: 0.0,
            a_sum: None,
            b_diff: None,
            x: 1.0,
        };
        assert_eq!(critical_point_analysis_2d(&flat).f_kind, "constant");
    }

    #[test]
    fn kappa_vanishes_only_at_zero_separation() {
        let a = 1.0;
        let am = ambi_cao_2d(a, [0.999_999, 1.000_001]).unwrap();
        assert!(am.kappa_i > 0.0 && am.kappa_i < 1e-10);
    }

    #[test]
    fn series_identities() {
        let rep = series_coefficient_checks(1.0, 60, &[0.5, 1.0, 2.0, 5.0]).unwrap();
        for c in &rep.checks {
            assert!(c.claim_holds, "{}", c.name);
            assert!(c.max_error < 1e-8, "{} {}", c.name, c.max_error);
        }
        let printed: Vec<(&str, f64)> = rep
            .checks
            .iter()
            .filter_map(|c| c.printed_error.map(|e| (c.name.as_str(), e)))
            .collect();
        assert_eq!(printed.len(), 3);
        assert!(printed.iter().all(|(_, e)| *e > 1e-3));
        let h = &rep.checks[0];
        let (x, v, _) = h.samples[2];
        assert_eq!(x, 2.0);
        let e = (2.0_f64 * 2.0).exp();
        assert_relative_eq!(v, (e - 1.0).powi(2) / 8.0 - 4.0 / 2.0 * e, max_relative = 1e-8);
    }

    #[test]
    fn series_coefficient_small_cases() {
        assert_eq!(factorial(5), BigInt::from(120));
        let f = |k: usize| (1i64 << (k + 3)) - 2 - ((k + 3) * (k + 2)) as i64;
        assert_eq!(f(0), 0);
        assert!((1..=40).all(|k| f(k) > 0));
    }
}
