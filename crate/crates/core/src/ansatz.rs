//! Hamiltonian 2-form ansatz on the dense chart: labels, momentum map and
//! its inverse, the symplectic potential with analytic Hessian, metric and
//! complex structure blocks, eigenvalues of the Hamiltonian 2-form, the
//! soliton vector field and the two-dimensional holomorphic coordinates.
//!
//! Momenta are taken in lattice-adapted coordinates: block `j` carries
//! `x_{j,0} = L_j (1 − Σ_k μ̌_k)` and `x_{j,k} = L_j μ̌_k`, so the image is
//! the open positive orthant and every facet is `x_i = 0`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::profiles::ProfileSet;
use crate::symfun::{
    bisect, elem_symmetric, elem_symmetric_omitting, integrate, integrate_pv, vandermonde_delta, QuadOptions,
};
use crate::toric::SymplecticPotential;

/// A point of the dense chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartPoint {
    pub xi: Vec<f64>,
    pub angles: Vec<f64>,
    /// Simplex momenta `μ̌^j` of the base factors, one vector of length `d_j`
    /// per block.
    pub base: Vec<Vec<f64>>,
}

/// Metric blocks of the ansatz at a chart point.
#[derive(Debug, Clone, Serialize)]
pub struct MetricBlocks {
    /// Diagonal coefficients `p_c(ξ_j)Δ(ξ_j)/F_j(ξ_j)` of `dξ_j²`.
    pub xi_block: Vec<f64>,
    /// Gram matrix of the connection forms `θ_1..θ_ℓ`.
    pub angle_block: DMatrix<f64>,
    /// `ε_j p_nc(α_j)`, the scale of the base metric of block `j`.
    pub base_factors: Vec<f64>,
    /// `Hess U` at the image of the point under the momentum map.
    pub potential_hessian: DMatrix<f64>,
}

/// The Hamiltonian 2-form on the fibre coframe and the eigenvalues of
/// `φ ∘ ω^{-1}`, listed once per complex dimension.
#[derive(Debug, Clone, Serialize)]
pub struct HamiltonianForm {
    pub phi: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

/// The soliton vector field in the lattice basis.
#[derive(Debug, Clone, Serialize)]
pub struct SolitonVector {
    /// `λ_j` with `X = Σ λ_j X_j`, `X_j` the generator of block `j`.
    pub label_coefficients: Vec<f64>,
    /// Components in the standard momenta; `⟨b, x⟩ = 2aσ_1 + offset`.
    pub b: Vec<f64>,
    pub offset: f64,
}

/// Pluriharmonic coordinates and global Kähler potential in dimension two.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HolomorphicCoords2D {
    pub v: [f64; 2],
    pub z_abs_sq: [f64; 2],
    pub h: f64,
    /// `∂H/∂v_i`, computed from analytic derivatives in `ξ`.
    pub dh_dv: [f64; 2],
    /// `d^c v_i = Σ_r c_{ir} dt_r`; constant exactly when `v_i` is
    /// pluriharmonic.
    pub dc_coefficients: [[f64; 2]; 2],
}

/// Evaluator for one built configuration.
#[derive(Debug, Clone)]
pub struct Ansatz {
    pub profiles: ProfileSet,
    label_factor: Vec<f64>,
    label_matrix: DMatrix<f64>,
    label_inverse: DMatrix<f64>,
    label_offset: DVector<f64>,
    block_start: Vec<usize>,
    quad: QuadOptions,
}

impl Ansatz {
    pub fn new(profiles: ProfileSet) -> Result<Self> {
        let l = profiles.ell();
        let mut label_factor = Vec::with_capacity(l);
        for j in 0..l {
            let q = profiles.q.eval(profiles.alpha[j]);
            if q == 0.0 || !q.is_finite() {
                return Err(Error::Singular(format!("q vanishes at node {}", profiles.alpha[j])));
            }
            label_factor.push(-2.0 * (profiles.dims[j] + 1) as f64 / q);
        }
        let mut label_matrix = DMatrix::zeros(l, l);
        let mut label_offset = DVector::zeros(l);
        for j in 0..l {
            let al = profiles.alpha[j];
            for r in 1..=l {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                label_matrix[(j, r - 1)] = label_factor[j] * sign * al.powi((l - r) as i32);
            }
            label_offset[j] = label_factor[j] * al.powi(l as i32);
        }
        let label_inverse = label_matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("label matrix".into()))?;
        let mut block_start = Vec::with_capacity(l + 1);
        let mut acc = 0;
        for &d in &profiles.dims {
            block_start.push(acc);
            acc += d + 1;
        }
        block_start.push(acc);
        Ok(Self {
            profiles,
            label_factor,
            label_matrix,
            label_inverse,
            label_offset,
            block_start,
            quad: QuadOptions::default(),
        })
    }

    pub fn ell(&self) -> usize {
        self.profiles.ell()
    }

    pub fn n(&self) -> usize {
        self.profiles.n()
    }

    /// `k_j = −2(d_j+1)/q(α_j)`, so that `L_j = k_j p_nc(α_j)`.
    pub fn label_factors(&self) -> &[f64] {
        &self.label_factor
    }

    /// Linear parts of the labels as functions of `σ`: `L = Vσ + c`.
    pub fn label_matrix(&self) -> (&DMatrix<f64>, &DVector<f64>) {
        (&self.label_matrix, &self.label_offset)
    }

    /// Index range of block `j` inside the standard momenta.
    pub fn block(&self, j: usize) -> std::ops::Range<usize> {
        self.block_start[j]..self.block_start[j + 1]
    }

    pub fn check_xi(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.ell() {
            return Err(invalid(format!(
                "expected {} eigenvalues, got {}",
                self.ell(),
                xi.len()
            )));
        }
        for (j, &x) in xi.iter().enumerate() {
            let (lo, hi) = self.profiles.domain(j);
            if !(x > lo && x < hi) {
                return Err(Error::OutOfDomain(format!("xi[{j}] = {x} outside ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    pub fn labels(&self, xi: &[f64]) -> Vec<f64> {
        self.profiles
            .alpha
            .iter()
            .zip(&self.label_factor)
            .map(|(&a, &k)| k * ProfileSet::p_nc(xi, a))
            .collect()
    }

    /// `∂L_j/∂ξ_k`.
    pub fn labels_jacobian(&self, xi: &[f64]) -> DMatrix<f64> {
        let l = self.ell();
        DMatrix::from_fn(l, l, |j, k| {
            let a = self.profiles.alpha[j];
            let rest: f64 = xi
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != k)
                .map(|(_, &x)| a - x)
                .product();
            -self.label_factor[j] * rest
        })
    }

    /// Recovers `ξ` from label values: `p_nc` is fixed by its values
    /// `L_j/k_j` at the nodes, and one root is located in each interval.
    pub fn xi_from_labels(&self, labels: &[f64]) -> Result<Vec<f64>> {
        let l = self.ell();
        if labels.len() != l {
            return Err(invalid("label vector has wrong length"));
        }
        if labels.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("labels"));
        }
        let al = &self.profiles.alpha;
        let w: Vec<f64> = labels.iter().zip(&self.label_factor).map(|(v, k)| v / k).collect();
        let denom: Vec<f64> = (0..l).map(|j| vandermonde_delta(al, j)).collect();
        let pnc = |t: f64| -> f64 {
            let base: f64 = al.iter().map(|a| t - a).product();
            let lag: f64 = (0..l)
                .map(|j| {
                    let num: f64 = (0..l).filter(|&k| k != j).map(|k| t - al[k]).product();
                    w[j] * num / denom[j]
                })
                .sum();
            base + lag
        };
        let mut xi = Vec::with_capacity(l);
        for j in 0..l {
            let (lo, hi) = self.profiles.domain(j);
            let (a, b) = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => (lo, hi),
                (true, false) => {
                    let mut step = 1.0;
                    let mut b = lo + step;
                    let mut tries = 0;
                    while pnc(b) <= 0.0 {
                        step *= 2.0;
                        b = lo + step;
                        tries += 1;
                        if tries > 200 {
                            return Err(Error::OutOfDomain("no root above the last node".into()));
                        }
                    }
                    (lo, b)
                }
                (false, true) => {
                    let mut step = 1.0;
                    let mut a = hi - step;
                    let mut tries = 0;
                    let far = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
                    while pnc(a) * far <= 0.0 {
                        step *= 2.0;
                        a = hi - step;
                        tries += 1;
                        if tries > 200 {
                            return Err(Error::OutOfDomain("no root below the first node".into()));
                        }
                    }
                    (a, hi)
                }
                (false, false) => return Err(invalid("unbounded interval on both sides")),
            };
            let (fa, fb) = (pnc(a), pnc(b));
            if !(fa * fb < 0.0) {
                return Err(Error::OutOfDomain(format!(
                    "labels {labels:?} have no eigenvalue in interval {j}"
                )));
            }
            let root = bisect(pnc, a, b, fa);
            if !(root > lo && root < hi) {
                return Err(Error::OutOfDomain(format!("eigenvalue {j} hit the boundary")));
            }
            xi.push(root);
        }
        Ok(xi)
    }

    /// Standard momenta of a chart point.
    pub fn moment_map(&self, xi: &[f64], base: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_xi(xi)?;
        self.check_base(base)?;
        let labels = self.labels(xi);
        let mut x = Vec::with_capacity(self.n());
        for (j, mu) in base.iter().enumerate() {
            let rest = 1.0 - mu.iter().sum::<f64>();
            x.push(labels[j] * rest);
            x.extend(mu.iter().map(|m| labels[j] * m));
        }
        Ok(x)
    }

    /// Inverse of [`Ansatz::moment_map`] on the open orthant.
    pub fn inverse_moment_map(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        if x.len() != self.n() {
            return Err(invalid(format!("expected {} momenta, got {}", self.n(), x.len())));
        }
        if let Some(v) = x.iter().find(|&&v| !(v > 0.0)) {
            return Err(Error::OutOfDomain(format!("momentum {v} not positive")));
        }
        let sums = self.block_sums(x);
        let xi = self.xi_from_labels(&sums)?;
        let base = (0..self.ell())
            .map(|j| x[self.block(j)][1..].iter().map(|v| v / sums[j]).collect())
            .collect();
        Ok((xi, base))
    }

    fn block_sums(&self, x: &[f64]) -> Vec<f64> {
        (0..self.ell()).map(|j| x[self.block(j)].iter().sum()).collect()
    }

    fn check_base(&self, base: &[Vec<f64>]) -> Result<()> {
        if base.len() != self.ell() {
            return Err(invalid("one base momentum vector per block is required"));
        }
        for (mu, &d) in base.iter().zip(&self.profiles.dims) {
            if mu.len() != d {
                return Err(invalid("base momentum vector has wrong length"));
            }
            if mu.iter().any(|&m| !(m > 0.0)) || !(mu.iter().sum::<f64>() < 1.0) {
                return Err(Error::OutOfDomain("base momenta outside the open simplex".into()));
            }
        }
        Ok(())
    }

    /// Barycentres of the base simplices.
    pub fn barycentre(&self) -> Vec<Vec<f64>> {
        self.profiles
            .dims
            .iter()
            .map(|&d| vec![1.0 / (d + 1) as f64; d])
            .collect()
    }

    /// Random interior chart point: bounded intervals avoid a 5% margin at
    /// each end, half-lines are sampled within four units of the node.
    pub fn sample_point(&self, rng: &mut impl Rng) -> ChartPoint {
        let xi = (0..self.ell())
            .map(|j| {
                let u: f64 = rng.random();
                match self.profiles.domain(j) {
                    (lo, hi) if lo.is_finite() && hi.is_finite() => lo + (0.05 + 0.9 * u) * (hi - lo),
                    (lo, _) if lo.is_finite() => lo + 0.05 + 4.0 * u,
                    (_, hi) => hi - 0.05 - 4.0 * u,
                }
            })
            .collect();
        let base = self
            .profiles
            .dims
            .iter()
            .map(|&d| {
                let e: Vec<f64> = (0..=d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                let s: f64 = e.iter().sum();
                e[1..].iter().map(|v| v / s).collect()
            })
            .collect();
        let angles = (0..self.ell())
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        ChartPoint { xi, angles, base }
    }

    /// `∫_{m_j}^{ξ_j} t^m / Θ_j(t) dt` for `m = 0..=ℓ`, rows indexed by `j`.
    fn moment_integrals(&self, xi: &[f64]) -> Result<Vec<Vec<f64>>> {
        let l = self.ell();
        (0..l)
            .map(|j| {
                let m0 = self.profiles.reference_point(j);
                (0..=l)
                    .map(|m| {
                        let f = |t: f64| t.powi(m as i32) / self.profiles.theta(j, t);
                        Ok(integrate(f, m0, xi[j], &self.quad)?.value)
                    })
                    .collect()
            })
            .collect()
    }

    /// Fibre potential `u(σ) = −Σ_j ∫^{ξ_j} p_nc/Θ_j`, lower limits at the
    /// reference points.
    pub fn fibre_potential(&self, xi: &[f64]) -> Result<f64> {
        let l = self.ell();
        let ints = self.moment_integrals(xi)?;
        let sigma = elem_symmetric(xi);
        let mut u = 0.0;
        for row in &ints {
            for r in 0..=l {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                u -= sign * sigma[r] * row[l - r];
            }
        }
        Ok(u)
    }

    /// `∂u/∂σ_r` for `r = 1..=ℓ`.
    pub fn fibre_gradient(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let l = self.ell();
        let ints = self.moment_integrals(xi)?;
        Ok((1..=l)
            .map(|r| {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                -sign * ints.iter().map(|row| row[l - r]).sum::<f64>()
            })
            .collect())
    }

    /// `∂²u/∂σ_r∂σ_s = Σ_j (−1)^{r+s} ξ_j^{2ℓ−r−s} / (Θ_j Δ_j)`.
    pub fn fibre_hessian(&self, xi: &[f64]) -> DMatrix<f64> {
        let l = self.ell();
        let w: Vec<f64> = (0..l)
            .map(|j| 1.0 / (self.profiles.theta(j, xi[j]) * vandermonde_delta(xi, j)))
            .collect();
        DMatrix::from_fn(l, l, |r, s| {
            let (r, s) = (r + 1, s + 1);
            let sign = if (r + s) % 2 == 0 { 1.0 } else { -1.0 };
            (0..l).map(|j| sign * xi[j].powi((2 * l - r - s) as i32) * w[j]).sum()
        })
    }

    fn summation(&self) -> DMatrix<f64> {
        DMatrix::from_fn(
            self.ell(),
            self.n(),
            |j, i| {
                if self.block(j).contains(&i) {
                    1.0
                } else {
                    0.0
                }
            },
        )
    }

    fn potential_hessian_at(&self, x: &[f64], xi: &[f64]) -> DMatrix<f64> {
        let s = self.block_sums(x);
        let sm = self.summation();
        let m = &self.label_inverse;
        let mut inner = m.transpose() * self.fibre_hessian(xi) * m;
        for (j, sj) in s.iter().enumerate() {
            inner[(j, j)] -= 0.5 / sj;
        }
        let mut h = sm.transpose() * inner * &sm;
        for (i, xv) in x.iter().enumerate() {
            h[(i, i)] += 0.5 / xv;
        }
        h
    }

    pub fn metric_at(&self, p: &ChartPoint) -> Result<MetricBlocks> {
        let xi = &p.xi;
        self.check_xi(xi)?;
        let l = self.ell();
        let theta: Vec<f64> = (0..l).map(|j| self.profiles.theta(j, xi[j])).collect();
        let delta: Vec<f64> = (0..l).map(|j| vandermonde_delta(xi, j)).collect();
        if delta.contains(&0.0) {
            return Err(Error::Singular("coincident eigenvalues".into()));
        }
        let xi_block = (0..l).map(|j| delta[j] / theta[j]).collect();
        let hats: Vec<Vec<f64>> = (0..l).map(|j| elem_symmetric_omitting(xi, j)).collect();
        let angle_block = DMatrix::from_fn(l, l, |r, s| {
            (0..l).map(|j| theta[j] / delta[j] * hats[j][r] * hats[j][s]).sum()
        });
        let base_factors = (0..l)
            .map(|j| self.profiles.epsilon[j] as f64 * ProfileSet::p_nc(xi, self.profiles.alpha[j]))
            .collect();
        let x = self.moment_map(xi, &p.base)?;
        let potential_hessian = self.potential_hessian_at(&x, xi);
        Ok(MetricBlocks {
            xi_block,
            angle_block,
            base_factors,
            potential_hessian,
        })
    }

    /// Complex structure on the fibre coframe `(dξ_1..dξ_ℓ, θ_1..θ_ℓ)`;
    /// column `c` holds the image of coframe element `c`. The action on
    /// forms is `Jα = α ∘ J^{-1}`, so `ω(X, Y) = g(JX, Y)` reads
    /// `Ω = −J G` with `G` the metric on the coframe dual basis.
    pub fn complex_structure_at(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        self.check_xi(xi)?;
        let l = self.ell();
        let mut j_mat = DMatrix::zeros(2 * l, 2 * l);
        for j in 0..l {
            let theta = self.profiles.theta(j, xi[j]);
            let delta = vandermonde_delta(xi, j);
            let hat = elem_symmetric_omitting(xi, j);
            for r in 1..=l {
                j_mat[(l + r - 1, j)] = theta / delta * hat[r - 1];
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                j_mat[(j, l + r - 1)] = sign * xi[j].powi((l - r) as i32) / theta;
            }
        }
        Ok(j_mat)
    }

    /// Kähler form `ω = Σ_r dσ_r ∧ θ_r` as an antisymmetric matrix on the
    /// fibre coframe dual basis.
    pub fn kahler_form_at(&self, xi: &[f64]) -> DMatrix<f64> {
        let l = self.ell();
        let mut om = DMatrix::zeros(2 * l, 2 * l);
        for j in 0..l {
            let hat = elem_symmetric_omitting(xi, j);
            for r in 0..l {
                om[(j, l + r)] = hat[r];
                om[(l + r, j)] = -hat[r];
            }
        }
        om
    }

    /// Residuals `(‖J² + 1‖, ‖JᵀG⁻¹J − G⁻¹‖, ‖g(J·,·) − ω‖)` of the fibre
    /// Kähler structure, each relative to the size of the matrices involved.
    pub fn compatibility_residual(&self, p: &ChartPoint) -> Result<[f64; 3]> {
        let l = self.ell();
        let j = self.complex_structure_at(&p.xi)?;
        let id = DMatrix::<f64>::identity(2 * l, 2 * l);
        let m = self.metric_at(p)?;
        let ang_inv = m
            .angle_block
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("angle block".into()))?;
        let mut dual = DMatrix::zeros(2 * l, 2 * l);
        let mut metric = DMatrix::zeros(2 * l, 2 * l);
        for a in 0..l {
            dual[(a, a)] = 1.0 / m.xi_block[a];
            metric[(a, a)] = m.xi_block[a];
        }
        dual.view_mut((l, l), (l, l)).copy_from(&ang_inv);
        metric.view_mut((l, l), (l, l)).copy_from(&m.angle_block);
        let om = self.kahler_form_at(&p.xi);
        let gj = -&j * &metric;
        Ok([
            (&j * &j + &id).abs().max(),
            (j.transpose() * &dual * &j - &dual).abs().max() / (1.0 + dual.abs().max()),
            (gj - &om).abs().max() / (1.0 + metric.abs().max()),
        ])
    }

    /// `φ = Σ_r (σ_r dσ_1 − dσ_{r+1}) ∧ θ_r` and the spectrum of `φ∘ω^{-1}`
    /// including the constant eigenvalues `α_j` of multiplicity `d_j`.
    pub fn hamiltonian_form_at(&self, xi: &[f64]) -> Result<HamiltonianForm> {
        self.check_xi(xi)?;
        let l = self.ell();
        let sigma = elem_symmetric(xi);
        let omega = self.kahler_form_at(xi);
        let mut phi = DMatrix::zeros(2 * l, 2 * l);
        for j in 0..l {
            let hat = elem_symmetric_omitting(xi, j);
            for r in 1..=l {
                let next = if r < l { hat[r] } else { 0.0 };
                let v = sigma[r] - next;
                phi[(j, l + r - 1)] = v;
                phi[(l + r - 1, j)] = -v;
            }
        }
        let inv = omega
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("Kähler form".into()))?;
        let endo = &phi * inv;
        let mut ev: Vec<f64> = endo.complex_eigenvalues().iter().map(|c| c.re).collect();
        ev.sort_by(f64::total_cmp);
        let mut eigenvalues: Vec<f64> = ev.iter().step_by(2).copied().collect();
        for (j, &d) in self.profiles.dims.iter().enumerate() {
            eigenvalues.extend(std::iter::repeat_n(self.profiles.alpha[j], d));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(HamiltonianForm {
            phi,
            omega,
            eigenvalues,
        })
    }

    /// Soliton vector `X = Σ_j λ_j X_j` with
    /// `λ_j = a q(α_j) / ((d_j+1) Δ(α_j))`.
    pub fn soliton_vector(&self) -> SolitonVector {
        let ps = &self.profiles;
        let label_coefficients: Vec<f64> = (0..ps.ell())
            .map(|j| ps.a * ps.q.eval(ps.alpha[j]) / ((ps.dims[j] + 1) as f64 * vandermonde_delta(&ps.alpha, j)))
            .collect();
        let mut b = vec![0.0; self.n()];
        for (j, &lam) in label_coefficients.iter().enumerate() {
            for i in self.block(j) {
                b[i] = lam;
            }
        }
        let offset = label_coefficients
            .iter()
            .zip(self.label_offset.iter())
            .map(|(l, c)| l * c)
            .sum();
        SolitonVector {
            label_coefficients,
            b,
            offset,
        }
    }

    /// `−½ log|F_j(t)| + ½ ∫_{m_j}^t q/Θ_j − a t`; constant in `t` exactly
    /// when block `j` satisfies the one-variable soliton identity.
    pub fn ricci_soliton_residual_1d(&self, j: usize, t: f64) -> Result<f64> {
        let ps = &self.profiles;
        let (lo, hi) = ps.domain(j);
        if !(t > lo && t < hi) {
            return Err(Error::OutOfDomain(format!("t = {t} outside interval {j}")));
        }
        let m0 = ps.reference_point(j);
        let int = integrate(|s| ps.q.eval(s) / ps.theta(j, s), m0, t, &self.quad)?.value;
        Ok(-0.5 * ps.f(j, t).abs().ln() + 0.5 * int - ps.a * t)
    }

    /// Largest deviation of [`Ansatz::ricci_soliton_residual_1d`] from its
    /// value at the reference point, over the given points.
    pub fn soliton_identity_spread(&self, j: usize, points: &[f64]) -> Result<f64> {
        let r0 = self.ricci_soliton_residual_1d(j, self.profiles.reference_point(j))?;
        points.iter().try_fold(0.0_f64, |m, &t| {
            Ok(m.max((self.ricci_soliton_residual_1d(j, t)? - r0).abs()))
        })
    }

    /// Pluriharmonic coordinates `v_1, v_2` and Kähler potential `H` for
    /// the two-dimensional families with nodes `α_1 < α_2`.
    pub fn holomorphic_coordinates_2d(&self, xi: &[f64]) -> Result<HolomorphicCoords2D> {
        let ps = &self.profiles;
        if ps.ell() != 2 || ps.dims.iter().any(|&d| d != 0) {
            return Err(invalid("holomorphic coordinates need ℓ = 2 and d = (0, 0)"));
        }
        self.check_xi(xi)?;
        let (a1, a2) = (ps.alpha[0], ps.alpha[1]);
        let gap = a2 - a1;
        let pref = [-0.5 * ps.q.eval(a1) / gap, 0.5 * ps.q.eval(a2) / gap];
        // v_1 integrates (t − α_2)/F_j from α_2, v_2 integrates (t − α_1)/F_j from α_1.
        let drop = [[0, 1], [1, 0]];
        let start = [a2, a1];
        let pole = [a1, a2];
        let mut v = [0.0; 2];
        let mut dv = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let f = |t: f64| 1.0 / ps.deflated(j, t, &drop[i]);
                let poles = if ps.zero_order(j, i) >= 1 {
                    vec![(pole[i], (pole[i] - start[i]) / ps.f_deriv(j, 1, pole[i]))]
                } else {
                    Vec::new()
                };
                v[i] += pref[i] * integrate_pv(f, start[i], xi[j], &poles, &self.quad)?;
                dv[i][j] = pref[i] * f(xi[j]);
            }
        }
        let mut h = 0.0;
        let mut dh = [0.0; 2];
        for j in 0..2 {
            let f = |t: f64| 1.0 / ps.deflated(j, t, &[1, 1]);
            let lower = if j == 0 { a2 } else { a1 };
            h += integrate(f, lower, xi[j], &self.quad)?.value;
            dh[j] = f(xi[j]);
        }
        let jac = nalgebra::Matrix2::new(dv[0][0], dv[0][1], dv[1][0], dv[1][1]);
        let sol = jac
            .transpose()
            .lu()
            .solve(&nalgebra::Vector2::new(dh[0], dh[1]))
            .ok_or_else(|| Error::Singular("Jacobian of the holomorphic coordinates".into()))?;
        let mut dc = [[0.0; 2]; 2];
        for (i, row) in dc.iter_mut().enumerate() {
            for j in 0..2 {
                let theta = ps.theta(j, xi[j]);
                let delta = vandermonde_delta(xi, j);
                let hat = elem_symmetric_omitting(xi, j);
                for r in 0..2 {
                    row[r] += dv[i][j] * theta / delta * hat[r];
                }
            }
        }
        Ok(HolomorphicCoords2D {
            v,
            z_abs_sq: [(2.0 * v[0]).exp(), (2.0 * v[1]).exp()],
            h,
            dh_dv: [sol[0], sol[1]],
            dc_coefficients: dc,
        })
    }
}

impl SymplecticPotential for Ansatz {
    fn dim(&self) -> usize {
        self.n()
    }

    /// `U = u(σ) + ½Σ x log x − ½Σ L_j log L_j`.
    fn value(&self, x: &[f64]) -> Result<f64> {
        let (xi, _) = self.inverse_moment_map(x)?;
        let s = self.block_sums(x);
        let u = self.fibre_potential(&xi)?;
        let xl: f64 = x.iter().map(|v| v * v.ln()).sum();
        let sl: f64 = s.iter().map(|v| v * v.ln()).sum();
        Ok(u + 0.5 * (xl - sl))
    }

    fn boundary_margin(&self, x: &[f64]) -> f64 {
        x.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (xi, _) = self.inverse_moment_map(x)?;
        let s = self.block_sums(x);
        let gs = DVector::from_vec(self.fibre_gradient(&xi)?);
        let mut inner = self.label_inverse.transpose() * gs;
        for (j, sj) in s.iter().enumerate() {
            inner[j] -= 0.5 * (sj.ln() + 1.0);
        }
        let mut g = vec![0.0; self.n()];
        for j in 0..self.ell() {
            for i in self.block(j) {
                g[i] = inner[j] + 0.5 * (x[i].ln() + 1.0);
            }
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let (xi, _) = self.inverse_moment_map(x)?;
        Ok(self.potential_hessian_at(x, &xi))
    }
}
