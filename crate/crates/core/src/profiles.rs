//! Profile functions `F_j`, the polynomials `p_c` and `q`, and the
//! admissibility inequalities for the Cao-type and Taub-NUT-type families,
//! plus the one-variable Calabi-ansatz profiles.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::symfun::{
    bisect, hermite_interpolate, integrate, poly_divide_exact, ExpPoly, HermiteNode, Poly, QuadOptions,
};

/// Which explicit family a profile set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cao,
    TaubNut,
}

/// Normalisation of the free multiplicative constant of a Cao-type profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// Coefficient of `e^{-2at}` equal to one before the sign fix.
    #[default]
    UnitC,
    /// `|q(α_1)| = 1`.
    UnitQAlpha1,
}

/// Input data of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub a: f64,
    pub alpha: Vec<f64>,
    pub dims: Vec<usize>,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub gauge: Gauge,
}

fn one() -> f64 {
    1.0
}

/// A complete set of profile data `(F_1, …, F_ℓ, p_c, q, ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet {
    pub family: Family,
    pub a: f64,
    pub alpha: Vec<f64>,
    pub dims: Vec<usize>,
    pub p_c: Poly,
    pub q: Poly,
    pub profiles: Vec<ExpPoly>,
    pub epsilon: Vec<i8>,
    /// Cao family at `a = 0`, the flat metric.
    pub flat: bool,
    /// Taub-NUT family at `a = 0`.
    pub ricci_flat: bool,
    /// Cao family with `a < 0`.
    pub incomplete_expected: bool,
}

const MIN_NODE_GAP: f64 = 2e-3;
const TAYLOR_TERMS: usize = 16;

fn validate(params: &SolitonParams) -> Result<()> {
    let l = params.alpha.len();
    if l == 0 {
        return Err(invalid("at least one node α is required"));
    }
    if params.dims.len() != l {
        return Err(invalid(format!("{} nodes but {} dimensions", l, params.dims.len())));
    }
    if params.alpha.iter().any(|x| !x.is_finite()) || !params.a.is_finite() {
        return Err(Error::NonFinite("soliton parameters"));
    }
    if params.alpha.windows(2).any(|w| w[1] - w[0] <= MIN_NODE_GAP) {
        return Err(invalid(
            "nodes α must be strictly increasing and separated by more than 2e-3",
        ));
    }
    if !(params.scale > 0.0 && params.scale.is_finite()) {
        return Err(invalid("scale must be positive"));
    }
    Ok(())
}

fn p_c_of(alpha: &[f64], dims: &[usize]) -> Poly {
    let roots: Vec<(f64, usize)> = alpha.iter().zip(dims).map(|(&a, &d)| (a, d)).collect();
    Poly::from_roots(&roots)
}

fn sign_pow(k: usize) -> i8 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Cao-type profile set: one `F = P + c e^{-2at}` for every `j`, vanishing
/// to order `d_j + 1` at each `α_j`, on `(α_1,α_2) × … × (α_ℓ, ∞)`.
pub fn build_cao_profile(params: &SolitonParams) -> Result<ProfileSet> {
    validate(params)?;
    let l = params.alpha.len();
    let a = params.a;
    let p_c = p_c_of(&params.alpha, &params.dims);
    let (mut f, mut q) = if a == 0.0 {
        let roots: Vec<(f64, usize)> = params
            .alpha
            .iter()
            .zip(&params.dims)
            .map(|(&x, &d)| (x, d + 1))
            .collect();
        let p = Poly::from_roots(&roots);
        let q = poly_divide_exact(&p.derivative(), &p_c, 1e-9)?;
        (
            ExpPoly {
                poly: p,
                c: 0.0,
                rate: 0.0,
            },
            q,
        )
    } else {
        let nodes: Vec<HermiteNode> = params
            .alpha
            .iter()
            .zip(&params.dims)
            .map(|(&x, &d)| HermiteNode {
                x,
                derivatives: (0..=d)
                    .map(|m| -(-2.0 * a).powi(m as i32) * (-2.0 * a * x).exp())
                    .collect(),
            })
            .collect();
        let p = hermite_interpolate(&nodes)?;
        let num = p.derivative().add(&p.scale(2.0 * a));
        let q = poly_divide_exact(&num, &p_c, 1e-8)?;
        (
            ExpPoly {
                poly: p,
                c: 1.0,
                rate: -2.0 * a,
            },
            q,
        )
    };
    let q1 = q.eval(params.alpha[0]);
    if q1 == 0.0 || !q1.is_finite() {
        return Err(Error::NotAdmissible("q vanishes at α_1".into()));
    }
    let mut s = match params.gauge {
        Gauge::UnitC => 1.0,
        Gauge::UnitQAlpha1 => 1.0 / q1.abs(),
    };
    let eps1 = f64::from(sign_pow(l));
    if -eps1 * q1 < 0.0 {
        s = -s;
    }
    s *= params.scale;
    f = f.scale(s);
    q = q.scale(s);
    Ok(ProfileSet {
        family: Family::Cao,
        a,
        alpha: params.alpha.clone(),
        dims: params.dims.clone(),
        p_c,
        q,
        profiles: vec![f; l],
        epsilon: (1..=l).map(|j| sign_pow(l - j + 1)).collect(),
        flat: a == 0.0,
        ricci_flat: a == 0.0,
        incomplete_expected: a < 0.0,
    })
}

/// Taub-NUT-type profile set: `F_j = P` for `j < ℓ` and
/// `F_ℓ = P + c e^{-2at}` with `F_ℓ(α_ℓ) = 0`.
pub fn build_taubnut_profile(params: &SolitonParams) -> Result<ProfileSet> {
    validate(params)?;
    let l = params.alpha.len();
    if l < 2 {
        return Err(invalid("the Taub-NUT family needs at least two nodes"));
    }
    if params.dims[l - 1] != 0 {
        return Err(invalid("the Taub-NUT family requires d_ℓ = 0"));
    }
    let a = params.a;
    let p_c = p_c_of(&params.alpha[..l - 1], &params.dims[..l - 1]);
    let roots: Vec<(f64, usize)> = params.alpha[..l - 1]
        .iter()
        .zip(&params.dims)
        .map(|(&x, &d)| (x, d + 1))
        .collect();
    let p = Poly::from_roots(&roots).scale(params.scale);
    let num = p.derivative().add(&p.scale(2.0 * a));
    let q = poly_divide_exact(&num, &p_c, 1e-9)?;
    let al = params.alpha[l - 1];
    let c = -(2.0 * a * al).exp() * p.eval(al);
    let base = ExpPoly {
        poly: p.clone(),
        c: 0.0,
        rate: -2.0 * a,
    };
    let last = ExpPoly {
        poly: p,
        c,
        rate: -2.0 * a,
    };
    let mut profiles = vec![base; l - 1];
    profiles.push(last);
    let mut epsilon: Vec<i8> = (1..l).map(|j| sign_pow(l - j)).collect();
    epsilon.push(-1);
    Ok(ProfileSet {
        family: Family::TaubNut,
        a,
        alpha: params.alpha.clone(),
        dims: params.dims.clone(),
        p_c,
        q,
        profiles,
        epsilon,
        flat: false,
        ricci_flat: a == 0.0,
        incomplete_expected: false,
    })
}

impl ProfileSet {
    pub fn ell(&self) -> usize {
        self.alpha.len()
    }

    /// Complex dimension `n = Σ (d_j + 1)`.
    pub fn n(&self) -> usize {
        self.dims.iter().map(|d| d + 1).sum()
    }

    /// Open interval in which `ξ_j` ranges (0-based `j`).
    pub fn domain(&self, j: usize) -> (f64, f64) {
        let l = self.ell();
        let al = &self.alpha;
        match self.family {
            Family::Cao => {
                if j + 1 < l {
                    (al[j], al[j + 1])
                } else {
                    (al[l - 1], f64::INFINITY)
                }
            }
            Family::TaubNut => {
                if j == 0 {
                    (f64::NEG_INFINITY, al[0])
                } else if j + 1 < l {
                    (al[j - 1], al[j])
                } else {
                    (al[l - 1], f64::INFINITY)
                }
            }
        }
    }

    /// Fixed base point used as the lower limit of primitives in `ξ_j`:
    /// the interval midpoint, or one unit inside a half-line.
    pub fn reference_point(&self, j: usize) -> f64 {
        match self.domain(j) {
            (lo, hi) if lo.is_finite() && hi.is_finite() => 0.5 * (lo + hi),
            (lo, _) if lo.is_finite() => lo + 1.0,
            (_, hi) => hi - 1.0,
        }
    }

    /// Order of vanishing of `F_j` at `α_k`.
    pub fn zero_order(&self, j: usize, k: usize) -> usize {
        let l = self.ell();
        match self.family {
            Family::Cao => self.dims[k] + 1,
            Family::TaubNut => {
                if j + 1 < l {
                    if k + 1 < l {
                        self.dims[k] + 1
                    } else {
                        0
                    }
                } else if k + 1 == l {
                    1
                } else {
                    0
                }
            }
        }
    }

    pub fn f(&self, j: usize, t: f64) -> f64 {
        self.profiles[j].eval(t)
    }

    pub fn f_deriv(&self, j: usize, m: usize, t: f64) -> f64 {
        self.profiles[j].derivative_at(m, t)
    }

    /// `Θ_j = F_j / p_c`, deflated by a Taylor expansion near shared roots.
    pub fn theta(&self, j: usize, t: f64) -> f64 {
        self.deflated(j, t, &self.dims)
    }

    /// `F_j(t) / ∏_k (t − α_k)^{m_k}` for the given multiplicities, deflated
    /// near the nodes where `F_j` vanishes to at least that order.
    pub fn deflated(&self, j: usize, t: f64, mult: &[usize]) -> f64 {
        let radius = self.taylor_radius();
        for (k, &d) in mult.iter().enumerate() {
            let ak = self.alpha[k];
            let z = self.zero_order(j, k);
            if d > 0 && z >= d && (t - ak).abs() < radius {
                let mut tc = self.profiles[j].taylor(ak, d + TAYLOR_TERMS);
                tc.iter_mut().take(z).for_each(|c| *c = 0.0);
                let h = t - ak;
                let num = tc[d..].iter().rev().fold(0.0, |acc, &c| acc * h + c);
                let den: f64 = mult
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .map(|(m, &e)| (t - self.alpha[m]).powi(e as i32))
                    .product();
                return num / den;
            }
        }
        let den: f64 = mult
            .iter()
            .enumerate()
            .map(|(m, &e)| (t - self.alpha[m]).powi(e as i32))
            .product();
        self.f(j, t) / den
    }

    /// Radius around a node inside which quotients use the Taylor expansion.
    pub fn taylor_radius(&self) -> f64 {
        let gap = self.alpha.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        0.1_f64.min(gap / 3.0)
    }

    /// `p_nc(t) = ∏_j (t − ξ_j)`.
    pub fn p_nc(xi: &[f64], t: f64) -> f64 {
        xi.iter().map(|x| t - x).product()
    }

    /// Pointwise residual of `F_j' + 2a F_j − q p_c`, relative to the size
    /// of its terms.
    pub fn ode_residual(&self, j: usize, t: f64) -> f64 {
        let fp = self.f_deriv(j, 1, t);
        let f = self.f(j, t);
        let rhs = self.q.eval(t) * self.p_c.eval(t);
        let r = fp + 2.0 * self.a * f - rhs;
        r.abs() / (1.0 + fp.abs() + (2.0 * self.a * f).abs() + rhs.abs())
    }
}

/// Outcome of [`check_admissibility`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub violations: Vec<String>,
    /// Roots of `q` found in the bounded intervals `(α_j, α_{j+1})`.
    pub q_roots: Vec<f64>,
    /// Smallest value of `(−1)^{ℓ−j} F_j p_c / (1 + |F_j p_c|)` over the grid.
    pub min_margin: f64,
}

const ADMISSIBILITY_GRID: usize = 10_000;

fn interval_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (0..count)
            .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / count as f64)
            .collect(),
        (true, false) => (0..count)
            .map(|k| lo + 10f64.powf(-4.0 + 8.0 * (k as f64 + 0.5) / count as f64))
            .collect(),
        (false, true) => (0..count)
            .map(|k| hi - 10f64.powf(-4.0 + 8.0 * (k as f64 + 0.5) / count as f64))
            .collect(),
        (false, false) => Vec::new(),
    }
}

/// Checks the sign conditions on `F_j p_c` over each `ξ_j`-interval, the
/// signs `ε_j p_nc(α_j)`, and for the Cao family the sign and root
/// structure of `q`.
pub fn check_admissibility(ps: &ProfileSet) -> AdmissibilityReport {
    let l = ps.ell();
    let mut violations = Vec::new();
    let mut min_margin = f64::INFINITY;
    for j in 0..l {
        let (lo, hi) = ps.domain(j);
        let sgn = f64::from(sign_pow(l - 1 - j));
        let g = |t: f64| sgn * ps.f(j, t) * ps.p_c.eval(t);
        let ts = interval_samples(lo, hi, ADMISSIBILITY_GRID);
        let mut prev: Option<(f64, f64)> = None;
        for &t in &ts {
            let v = g(t);
            min_margin = min_margin.min(v / (1.0 + v.abs()));
            if let Some((tp, vp)) = prev {
                if vp * v < 0.0 {
                    let root = bisect(g, tp, t, vp);
                    violations.push(format!("F_{} p_c changes sign near t = {root:.6}", j + 1));
                }
            }
            prev = Some((t, v));
        }
        if ts.iter().any(|&t| g(t) <= 0.0) {
            violations.push(format!(
                "(−1)^(ℓ−{}) F_{} p_c is not positive on its interval",
                j + 1,
                j + 1
            ));
        }
    }
    let mids: Vec<f64> = (0..l).map(|j| ps.reference_point(j)).collect();
    let n_base = match ps.family {
        Family::Cao => l,
        Family::TaubNut => l - 1,
    };
    for j in 0..n_base {
        if ps.dims[j] > 0 {
            let v = f64::from(ps.epsilon[j]) * ProfileSet::p_nc(&mids, ps.alpha[j]);
            if v <= 0.0 {
                violations.push(format!("ε_{} p_nc(α_{}) is not positive", j + 1, j + 1));
            }
        }
    }
    let mut q_roots = Vec::new();
    if ps.family == Family::Cao {
        for j in 0..l {
            if -f64::from(ps.epsilon[j]) * ps.q.eval(ps.alpha[j]) <= 0.0 {
                violations.push(format!("sign condition on q(α_{}) fails", j + 1));
            }
        }
        let dq = ps.q.derivative();
        for j in 0..l.saturating_sub(1) {
            let roots = ps.q.roots_in(ps.alpha[j], ps.alpha[j + 1], ADMISSIBILITY_GRID);
            if roots.len() != 1 {
                violations.push(format!("q has {} roots in (α_{}, α_{})", roots.len(), j + 1, j + 2));
            }
            for &r in &roots {
                if dq.eval(r).abs() <= 1e-8 {
                    violations.push(format!("q has a multiple root near {r:.6}"));
                }
            }
            q_roots.extend(roots);
        }
    }
    AdmissibilityReport {
        admissible: violations.is_empty(),
        violations,
        q_roots,
        min_margin,
    }
}

/// The three one-variable families of the Calabi ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalabiKind {
    /// Total space of `O(−n)` over projective space, zero section at `ξ = α > 0`.
    Bundle,
    /// Blow-down of the bundle, `α = 0`.
    BlowDown,
    /// The cigar, `n = 1`.
    Cigar,
}

/// `Θ(ξ) = C ξ^{1−n} ∫_α^ξ e^{−2a(ξ−x)} x^{n−1} dx`, solving
/// `Θ' + (2a + (n−1)/ξ) Θ = C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalabiProfile {
    pub kind: CalabiKind,
    pub n: usize,
    pub r: usize,
    pub alpha: f64,
    pub a: f64,
    pub prefactor: f64,
}

/// Builds a Calabi-ansatz profile. `prefactor` defaults to 2.
pub fn build_calabi_profile(
    kind: CalabiKind,
    n: usize,
    a: f64,
    alpha: f64,
    r: Option<usize>,
    prefactor: Option<f64>,
) -> Result<CalabiProfile> {
    if n == 0 || !a.is_finite() || !alpha.is_finite() {
        return Err(invalid("n must be positive and a, α finite"));
    }
    let r = match kind {
        CalabiKind::Bundle => {
            if alpha <= 0.0 {
                return Err(invalid("the bundle case needs α > 0"));
            }
            let r = r.unwrap_or(n);
            if r != n {
                return Err(invalid("the bundle case requires r = n"));
            }
            r
        }
        CalabiKind::BlowDown => {
            if alpha != 0.0 {
                return Err(invalid("the blow-down case needs α = 0"));
            }
            let r = r.unwrap_or(1);
            if r != 1 {
                return Err(invalid("the blow-down case requires r = 1"));
            }
            r
        }
        CalabiKind::Cigar => {
            if n != 1 {
                return Err(invalid("the cigar has n = 1"));
            }
            r.unwrap_or(1)
        }
    };
    let prefactor = prefactor.unwrap_or(2.0);
    if !(prefactor > 0.0) {
        return Err(invalid("prefactor must be positive"));
    }
    Ok(CalabiProfile {
        kind,
        n,
        r,
        alpha,
        a,
        prefactor,
    })
}

impl CalabiProfile {
    pub fn theta(&self, xi: f64) -> Result<f64> {
        if xi < self.alpha {
            return Err(Error::OutOfDomain(format!("ξ = {xi} below α = {}", self.alpha)));
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        let n = self.n as i32;
        if self.a == 0.0 {
            return Ok(self.prefactor * (xi.powi(n) - self.alpha.powi(n)) / (f64::from(n) * xi.powi(n - 1)));
        }
        let a = self.a;
        let v = integrate(
            |x| (-2.0 * a * (xi - x)).exp() * x.powi(n - 1),
            self.alpha,
            xi,
            &QuadOptions::default(),
        )?
        .value;
        Ok(self.prefactor * xi.powi(1 - n) * v)
    }

    /// `Θ'` at the zero `ξ = α`; reported, not imposed.
    pub fn boundary_slope(&self) -> f64 {
        if self.alpha > 0.0 {
            self.prefactor
        } else {
            self.prefactor / self.n as f64
        }
    }

    /// `lim_{ξ→∞} Θ(ξ)` for `a > 0`.
    pub fn asymptotic_limit(&self) -> Option<f64> {
        (self.a > 0.0).then(|| self.prefactor / (2.0 * self.a))
    }

    /// Value of the prefactor under the `2n/r` normalisation.
    pub fn futaki_prefactor(&self) -> f64 {
        2.0 * self.n as f64 / self.r as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cao2(a: f64) -> ProfileSet {
        build_cao_profile(&SolitonParams {
            a,
            alpha: vec![0.0, 1.0],
            dims: vec![0, 0],
            scale: 1.0,
            gauge: Gauge::UnitC,
        })
        .unwrap()
    }

    #[test]
    fn cao_two_dimensional_profile() {
        let ps = cao2(1.0);
        let e2 = (-2.0f64).exp();
        let f = &ps.profiles[0];
        assert_relative_eq!(f.c, 1.0);
        assert_relative_eq!(f.poly.coeffs[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(f.poly.coeffs[1], 1.0 - e2, epsilon = 1e-14);
        assert_relative_eq!(ps.q.eval(0.0), -(1.0 + e2), epsilon = 1e-14);
        assert_relative_eq!(ps.q.eval(1.0), 1.0 - 3.0 * e2, epsilon = 1e-14);
        assert_relative_eq!(ps.q.eval(0.0), -1.135_335_3, epsilon = 1e-7);
        assert_relative_eq!(ps.q.eval(1.0), 0.593_994_2, epsilon = 1e-7);
        assert_eq!(ps.epsilon, vec![1, -1]);
        assert_relative_eq!(ps.theta(0, 0.5), -0.199_788_2, epsilon = 1e-7);
    }

    #[test]
    fn cao_admissibility_and_q_root() {
        let ps = cao2(1.0);
        let rep = check_admissibility(&ps);
        assert!(rep.admissible, "{:?}", rep.violations);
        assert_eq!(rep.q_roots.len(), 1);
        let e2 = (-2.0f64).exp();
        assert_relative_eq!(rep.q_roots[0], (1.0 + e2) / (2.0 * (1.0 - e2)), epsilon = 1e-12);
        assert_relative_eq!(rep.q_roots[0], 0.656_517_6, epsilon = 1e-7);
    }

    #[test]
    fn flat_limit_is_polynomial() {
        let ps = cao2(0.0);
        assert!(ps.flat);
        let f = &ps.profiles[0];
        assert_eq!(f.c, 0.0);
        assert_eq!(f.poly.coeffs, vec![0.0, -1.0, 1.0]);
        assert!(check_admissibility(&ps).admissible);
    }

    #[test]
    fn negative_a_is_flagged() {
        let ps = cao2(-0.5);
        assert!(ps.incomplete_expected);
    }

    #[test]
    fn rejects_bad_nodes() {
        let p = SolitonParams {
            a: 1.0,
            alpha: vec![1.0, 0.0],
            dims: vec![0, 0],
            scale: 1.0,
            gauge: Gauge::UnitC,
        };
        assert!(matches!(build_cao_profile(&p), Err(Error::InvalidInput(_))));
        let p = SolitonParams {
            a: 1.0,
            alpha: vec![0.0, 1.0],
            dims: vec![0, 1],
            scale: 1.0,
            gauge: Gauge::UnitC,
        };
        assert!(matches!(build_taubnut_profile(&p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn taubnut_three_nodes() {
        let p = SolitonParams {
            a: 1.0,
            alpha: vec![0.0, 1.0, 2.0],
            dims: vec![0, 0, 0],
            scale: 1.0,
            gauge: Gauge::UnitC,
        };
        let ps = build_taubnut_profile(&p).unwrap();
        assert_relative_eq!(ps.profiles[2].c, -2.0 * 4.0f64.exp(), epsilon = 1e-12);
        assert_eq!(ps.epsilon, vec![1, -1, -1]);
        assert_eq!(ps.domain(0), (f64::NEG_INFINITY, 0.0));
        assert_eq!(ps.domain(1), (0.0, 1.0));
        assert_eq!(ps.domain(2), (2.0, f64::INFINITY));
        assert!(check_admissibility(&ps).admissible);
    }

    #[test]
    fn taubnut_two_dimensional() {
        let p = SolitonParams {
            a: 0.0,
            alpha: vec![0.0, 1.0],
            dims: vec![0, 0],
            scale: 1.0,
            gauge: Gauge::UnitC,
        };
        let ps = build_taubnut_profile(&p).unwrap();
        assert!(ps.ricci_flat);
        assert_relative_eq!(ps.f(0, -2.0), -2.0);
        assert_relative_eq!(ps.f(1, 3.0), 2.0);
        assert!(check_admissibility(&ps).admissible);
    }

    #[test]
    fn theta_deflation_is_continuous() {
        let p = SolitonParams {
            a: 1.0,
            alpha: vec![0.0, 1.0],
            dims: vec![1, 0],
            scale: 1.0,
            gauge: Gauge::UnitC,
        };
        let ps = build_cao_profile(&p).unwrap();
        let r = ps.taylor_radius();
        for &t in &[1e-3, 5e-3, 0.2, 0.7] {
            let direct = ps.f(0, t) / ps.p_c.eval(t);
            assert_relative_eq!(ps.theta(0, t), direct, max_relative = 1e-9);
        }
        let inside = ps.theta(0, r * (1.0 - 1e-12));
        let outside = ps.theta(0, r * (1.0 + 1e-12));
        assert_relative_eq!(inside, outside, max_relative = 1e-10);
        assert_eq!(ps.theta(0, 0.0), 0.0);
        assert_relative_eq!(ps.theta(0, 1e-9) / 1e-9, ps.q.eval(0.0) / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn calabi_examples() {
        let bd = build_calabi_profile(CalabiKind::BlowDown, 2, 1.0, 0.0, None, None).unwrap();
        let e2 = (-2.0f64).exp();
        assert_relative_eq!(bd.theta(1.0).unwrap(), (1.0 + e2) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(bd.theta(1.0).unwrap(), 0.567_667_6, epsilon = 1e-7);
        let cig = build_calabi_profile(CalabiKind::Cigar, 1, 0.5, 0.0, None, None).unwrap();
        assert_relative_eq!(cig.theta(2.0).unwrap(), 2.0 * (1.0 - (-2.0f64).exp()), epsilon = 1e-12);
        let flat = build_calabi_profile(CalabiKind::Bundle, 3, 0.0, 1.0, None, None).unwrap();
        assert_relative_eq!(
            flat.theta(2.0).unwrap(),
            2.0 * (8.0 - 1.0) / (3.0 * 4.0),
            epsilon = 1e-14
        );
        assert!(build_calabi_profile(CalabiKind::Bundle, 3, 1.0, 1.0, Some(2), None).is_err());
        assert_eq!(bd.futaki_prefactor(), 4.0);
        assert_eq!(bd.asymptotic_limit(), Some(1.0));
    }
}
