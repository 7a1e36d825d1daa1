//! Symmetric functions, Vandermonde identities, polynomial utilities,
//! confluent Hermite interpolation and adaptive Gauss–Kronrod quadrature.

use nalgebra::{DMatrix, DVector};
use num::{BigRational, One, Zero};

use crate::error::{invalid, Error, Result};

/// Elementary symmetric functions `σ_0 = 1, σ_1, …, σ_ℓ` of `xs`.
pub fn elem_symmetric(xs: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; xs.len() + 1];
    s[0] = 1.0;
    for (k, &x) in xs.iter().enumerate() {
        for r in (1..=k + 1).rev() {
            s[r] += x * s[r - 1];
        }
    }
    s
}

/// Elementary symmetric functions of `xs` with the entry `j` removed.
pub fn elem_symmetric_omitting(xs: &[f64], j: usize) -> Vec<f64> {
    let rest: Vec<f64> = xs
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &x)| x)
        .collect();
    elem_symmetric(&rest)
}

/// `Δ(x_j) = ∏_{k≠j} (x_j − x_k)`.
pub fn vandermonde_delta(xs: &[f64], j: usize) -> f64 {
    xs.iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &x)| xs[j] - x)
        .product()
}

fn check_distinct(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(invalid("empty node set"));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("node set"));
    }
    let scale = xs.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    for i in 0..xs.len() {
        for k in i + 1..xs.len() {
            if (xs[i] - xs[k]).abs() <= 1e-14 * scale {
                return Err(Error::Singular(format!("coincident nodes {} and {}", xs[i], xs[k])));
            }
        }
    }
    Ok(())
}

/// Residuals of the Vandermonde identities for distinct nodes.
///
/// Entry `r` (for `r = 1..=ℓ`) is `Σ_j x_j^{ℓ−r}/Δ(x_j) − δ_{r1}`;
/// entry `0` is `Σ_j x_j^ℓ/Δ(x_j) − σ_1`.
pub fn vandermonde_identity_residual(xs: &[f64]) -> Result<Vec<f64>> {
    check_distinct(xs)?;
    let l = xs.len();
    let deltas: Vec<f64> = (0..l).map(|j| vandermonde_delta(xs, j)).collect();
    let sigma1: f64 = xs.iter().sum();
    Ok((0..=l)
        .map(|r| {
            let sum: f64 = xs.iter().zip(&deltas).map(|(&x, &d)| x.powi((l - r) as i32) / d).sum();
            let target = match r {
                0 => sigma1,
                1 => 1.0,
                _ => 0.0,
            };
            sum - target
        })
        .collect())
}

/// Exact sums `Σ_j x_j^{ℓ−r}/Δ(x_j)` for `r = 0..=ℓ` over the rationals.
pub fn vandermonde_sums_exact(xs: &[BigRational]) -> Result<Vec<BigRational>> {
    if xs.is_empty() {
        return Err(invalid("empty node set"));
    }
    let l = xs.len();
    let mut deltas = Vec::with_capacity(l);
    for j in 0..l {
        let mut d = BigRational::one();
        for k in 0..l {
            if k != j {
                let diff = &xs[j] - &xs[k];
                if diff.is_zero() {
                    return Err(Error::Singular("coincident rational nodes".into()));
                }
                d *= diff;
            }
        }
        deltas.push(d);
    }
    Ok((0..=l)
        .map(|r| {
            let mut acc = BigRational::zero();
            for (x, d) in xs.iter().zip(&deltas) {
                let mut p = BigRational::one();
                for _ in 0..(l - r) {
                    p *= x;
                }
                acc += p / d;
            }
            acc
        })
        .collect())
}

/// Dense real polynomial with coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        if p.coeffs.is_empty() {
            p.coeffs.push(0.0);
        }
        p
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `∏ (t − root)^{mult}`.
    pub fn from_roots(roots: &[(f64, usize)]) -> Self {
        let mut p = Poly::constant(1.0);
        for &(r, m) in roots {
            for _ in 0..m {
                p = p.mul(&Poly::new(vec![-r, 1.0]));
            }
        }
        p
    }

    /// Degree ignoring exact trailing zeros; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Value of the `m`-th derivative at `t`.
    pub fn derivative_at(&self, m: usize, t: f64) -> f64 {
        let mut p = self.clone();
        for _ in 0..m {
            p = p.derivative();
        }
        p.eval(t)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).copied().unwrap_or(0.0) + other.coeffs.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Real roots inside `(lo, hi)` located by sign changes on `samples`
    /// uniform cells and refined by bisection.
    pub fn roots_in(&self, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
        let mut roots = Vec::new();
        let h = (hi - lo) / samples as f64;
        let mut a = lo;
        let mut fa = self.eval(a);
        for k in 1..=samples {
            let b = lo + k as f64 * h;
            let fb = self.eval(b);
            if fa == 0.0 && k > 1 {
                roots.push(a);
            } else if fa * fb < 0.0 {
                roots.push(bisect(|t| self.eval(t), a, b, fa));
            }
            a = b;
            fa = fb;
        }
        roots
    }
}

/// Bisection on a bracketing interval, to floating-point resolution.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Quotient `num / den`, failing if the remainder exceeds
/// `tol · max|num coefficient|`.
pub fn poly_divide_exact(num: &Poly, den: &Poly, tol: f64) -> Result<Poly> {
    let dd = den.degree();
    let lead = den.coeffs[dd];
    if lead == 0.0 {
        return Err(invalid("division by the zero polynomial"));
    }
    let nd = num.degree();
    if nd < dd {
        let rem = num.max_abs_coeff();
        return if rem <= tol * num.max_abs_coeff().max(f64::MIN_POSITIVE) || rem == 0.0 {
            Ok(Poly::constant(0.0))
        } else {
            Err(Error::NotDivisible { remainder: rem })
        };
    }
    let mut r = num.coeffs[..=nd].to_vec();
    let mut q = vec![0.0; nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = r[k + dd] / lead;
        q[k] = c;
        for i in 0..=dd {
            r[k + i] -= c * den.coeffs[i];
        }
    }
    let rem = r[..dd].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if rem > tol * num.max_abs_coeff() {
        return Err(Error::NotDivisible { remainder: rem });
    }
    Ok(Poly::new(q))
}

/// Prescribed values `P(x), P'(x), …` at one interpolation node.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteNode {
    pub x: f64,
    pub derivatives: Vec<f64>,
}

/// Unique polynomial of degree `< Σ (m_j)` matching all prescribed
/// derivatives, from the confluent Vandermonde system.
pub fn hermite_interpolate(nodes: &[HermiteNode]) -> Result<Poly> {
    let n: usize = nodes.iter().map(|nd| nd.derivatives.len()).sum();
    if n == 0 {
        return Err(invalid("no interpolation conditions"));
    }
    let xs: Vec<f64> = nodes.iter().map(|nd| nd.x).collect();
    check_distinct(&xs)?;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut row = 0;
    for nd in nodes {
        for (m, &v) in nd.derivatives.iter().enumerate() {
            for k in m..n {
                let falling: f64 = ((k - m + 1)..=k).map(|i| i as f64).product();
                a[(row, k)] = falling * nd.x.powi((k - m) as i32);
            }
            rhs[row] = v;
            row += 1;
        }
    }
    let lu = a.clone().lu();
    let mut sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("confluent Vandermonde matrix".into()))?;
    let resid = &rhs - &a * &sol;
    if let Some(corr) = lu.solve(&resid) {
        sol += corr;
    }
    if sol.iter().any(|c| !c.is_finite()) {
        return Err(Error::Singular("confluent Vandermonde matrix".into()));
    }
    Ok(Poly::new(sol.iter().copied().collect()))
}

/// `F(t) = P(t) + c·e^{rate·t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    pub poly: Poly,
    pub c: f64,
    pub rate: f64,
}

impl ExpPoly {
    pub fn eval(&self, t: f64) -> f64 {
        self.poly.eval(t) + self.exp_part(t)
    }

    fn exp_part(&self, t: f64) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            self.c * (self.rate * t).exp()
        }
    }

    /// Value of the `m`-th derivative at `t`.
    pub fn derivative_at(&self, m: usize, t: f64) -> f64 {
        self.poly.derivative_at(m, t) + self.rate.powi(m as i32) * self.exp_part(t)
    }

    /// Taylor coefficients `F^{(i)}(t0)/i!` for `i = 0..count`.
    pub fn taylor(&self, t0: f64, count: usize) -> Vec<f64> {
        let mut p = self.poly.clone();
        let e = self.exp_part(t0);
        let mut fact = 1.0;
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            if i > 0 {
                fact *= i as f64;
                p = p.derivative();
            }
            out.push((p.eval(t0) + self.rate.powi(i as i32) * e) / fact);
        }
        out
    }

    pub fn scale(&self, s: f64) -> ExpPoly {
        ExpPoly {
            poly: self.poly.scale(s),
            c: self.c * s,
            rate: self.rate,
        }
    }
}

/// Controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_depth: 40,
            max_intervals: 20_000,
        }
    }
}

/// Value and error estimate of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: usize,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(Error::NonFinite("quadrature integrand"));
    }
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut fv = [0.0; 14];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::NonFinite("quadrature integrand"));
        }
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        rk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    asc *= h.abs();
    let mut err = ((rk - rg) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * (rk * h).abs();
    Ok((rk * h, err.max(round)))
}

/// Globally adaptive 15-point Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// Orientation is respected (`a > b` negates the result). Fails on a
/// non-finite integrand or when the tolerance cannot be met within the
/// depth and interval limits.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if !a.is_finite() || !b.is_finite() {
        return Err(invalid("integration bounds must be finite"));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&f, lo, hi)?;
    let mut segs = vec![Segment {
        a: lo,
        b: hi,
        value: v,
        error: e,
        depth: 0,
    }];
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(QuadResult {
                value: sign * total,
                error: err,
                intervals: segs.len(),
            });
        }
        let worst = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.depth < opts.max_depth)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                iterations: segs.len(),
            });
        };
        if segs.len() >= opts.max_intervals {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                iterations: segs.len(),
            });
        }
        let s = segs.swap_remove(i);
        let m = 0.5 * (s.a + s.b);
        let (v1, e1) = gk15(&f, s.a, m)?;
        let (v2, e2) = gk15(&f, m, s.b)?;
        segs.push(Segment {
            a: s.a,
            b: m,
            value: v1,
            error: e1,
            depth: s.depth + 1,
        });
        segs.push(Segment {
            a: m,
            b: s.b,
            value: v2,
            error: e2,
            depth: s.depth + 1,
        });
    }
}

/// Principal-value integral of `f` over `[a, b]` where `f` has simple poles
/// at the given `(location, residue)` pairs.
///
/// Each pole is subtracted analytically and the smooth remainder is
/// integrated with breakpoints at interior poles.
pub fn integrate_pv(f: impl Fn(f64) -> f64, a: f64, b: f64, poles: &[(f64, f64)], opts: &QuadOptions) -> Result<f64> {
    for &(p, res) in poles {
        if res != 0.0 && (p == a || p == b) {
            return Err(invalid("pole at an endpoint of a principal-value integral"));
        }
    }
    let g = |t: f64| f(t) - poles.iter().map(|&(p, r)| r / (t - p)).sum::<f64>();
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut cuts = vec![lo];
    let mut inner: Vec<f64> = poles.iter().map(|p| p.0).filter(|&p| p > lo && p < hi).collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate(g, w[0], w[1], opts)?.value;
    }
    if a > b {
        total = -total;
    }
    let logs: f64 = poles
        .iter()
        .map(|&(p, r)| {
            if r == 0.0 {
                0.0
            } else {
                r * ((b - p) / (a - p)).abs().ln()
            }
        })
        .sum();
    Ok(total + logs)
}
