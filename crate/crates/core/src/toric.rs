//! Toric Kähler tools in momentum coordinates: labelled polyhedra and
//! their text format, recession and dual cones, the forbidden region for
//! soliton vectors, the Calabi–Yau constant, the log-determinant
//! Monge–Ampère residual, Legendre duality and boundary behaviour of
//! symplectic potentials.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// A convex function on an open domain of `R^n` whose Hessian defines a
/// toric Kähler metric `Hess(u) dx² + Hess(u)^{-1} dt²`.
pub trait SymplecticPotential {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Distance-like margin to the boundary of the domain; positive inside.
    fn boundary_margin(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        fd_gradient(self, x)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        fd_hessian(self, x)
    }
}

fn fd_step(pot: &(impl SymplecticPotential + ?Sized), x: &[f64], base: f64) -> f64 {
    base.min(0.1 * pot.boundary_margin(x))
}

/// Central-difference gradient with one Richardson step.
pub fn fd_gradient(pot: &(impl SymplecticPotential + ?Sized), x: &[f64]) -> Result<Vec<f64>> {
    let h = fd_step(pot, x, 1e-4);
    let n = x.len();
    let d = |i: usize, h: f64| -> Result<f64> {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[i] += h;
        m[i] -= h;
        Ok((pot.value(&p)? - pot.value(&m)?) / (2.0 * h))
    };
    (0..n).map(|i| Ok((4.0 * d(i, 0.5 * h)? - d(i, h)?) / 3.0)).collect()
}

/// Central-difference Hessian with one Richardson step.
pub fn fd_hessian(pot: &(impl SymplecticPotential + ?Sized), x: &[f64]) -> Result<DMatrix<f64>> {
    let h0 = fd_step(pot, x, 1e-3);
    let n = x.len();
    let f = |dx: &[(usize, f64)]| -> Result<f64> {
        let mut p = x.to_vec();
        for &(i, s) in dx {
            p[i] += s;
        }
        pot.value(&p)
    };
    let d2 = |i: usize, j: usize, h: f64| -> Result<f64> {
        if i == j {
            Ok((f(&[(i, h)])? - 2.0 * f(&[])? + f(&[(i, -h)])?) / (h * h))
        } else {
            Ok(
                (f(&[(i, h), (j, h)])? - f(&[(i, h), (j, -h)])? - f(&[(i, -h), (j, h)])? + f(&[(i, -h), (j, -h)])?)
                    / (4.0 * h * h),
            )
        }
    };
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (4.0 * d2(i, j, 0.5 * h0)? - d2(i, j, h0)?) / 3.0;
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// `L(x) = ⟨normal, x⟩ + offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineLabel {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl AffineLabel {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) + self.offset
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A polyhedron `{x : L_j(x) ≥ 0}` with optional lattice basis and vertex
/// certificates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelzantPolyhedron {
    pub dim: usize,
    pub labels: Vec<AffineLabel>,
    /// Rows form a basis of the lattice; the standard lattice when absent.
    pub lattice: Option<Vec<Vec<f64>>>,
    pub vertices: Vec<Vec<f64>>,
}

const MAX_TEXT_DIM: usize = 64;
const MAX_TEXT_LABELS: usize = 4096;

impl DelzantPolyhedron {
    pub fn new(dim: usize, labels: Vec<AffineLabel>) -> Result<Self> {
        let p = Self {
            dim,
            labels,
            lattice: None,
            vertices: Vec::new(),
        };
        p.check_shape()?;
        Ok(p)
    }

    /// The positive orthant with the origin as its vertex.
    pub fn standard_cone(n: usize) -> Self {
        let labels = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                AffineLabel::new(e, 0.0)
            })
            .collect();
        Self {
            dim: n,
            labels,
            lattice: None,
            vertices: vec![vec![0.0; n]],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.labels.iter().all(|l| l.eval(x) > 0.0)
    }

    pub fn min_label(&self, x: &[f64]) -> f64 {
        self.labels.iter().map(|l| l.eval(x)).fold(f64::INFINITY, f64::min)
    }

    fn check_shape(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("polyhedron dimension must be positive"));
        }
        for l in &self.labels {
            if l.normal.len() != self.dim {
                return Err(invalid("label normal has wrong length"));
            }
            if l.normal.iter().chain([&l.offset]).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("label"));
            }
            if l.normal.iter().all(|v| *v == 0.0) {
                return Err(invalid("label normal is zero"));
            }
        }
        if let Some(b) = &self.lattice {
            if b.len() != self.dim || b.iter().any(|r| r.len() != self.dim) {
                return Err(invalid("lattice basis must be square"));
            }
            let m = DMatrix::from_fn(self.dim, self.dim, |i, j| b[i][j]);
            if m.determinant().abs() < 1e-12 {
                return Err(Error::Singular("lattice basis".into()));
            }
        }
        if self.vertices.iter().any(|v| v.len() != self.dim) {
            return Err(invalid("vertex has wrong length"));
        }
        Ok(())
    }

    /// Checks the shape, finds an interior point, and verifies at every
    /// recorded vertex that exactly `n` labels vanish with normals forming
    /// a lattice basis.
    pub fn validate(&self) -> Result<Vec<f64>> {
        self.check_shape()?;
        let n = self.dim;
        let basis = match &self.lattice {
            Some(b) => DMatrix::from_fn(n, n, |i, j| b[i][j]),
            None => DMatrix::identity(n, n),
        };
        for v in &self.vertices {
            let scale = 1.0 + norm(v);
            let active: Vec<&AffineLabel> = self.labels.iter().filter(|l| l.eval(v).abs() <= 1e-9 * scale).collect();
            if self.labels.iter().any(|l| l.eval(v) < -1e-9 * scale) {
                return Err(invalid(format!("vertex {v:?} violates a label")));
            }
            if active.len() != n {
                return Err(invalid(format!(
                    "{} labels vanish at vertex {v:?}, expected {n}",
                    active.len()
                )));
            }
            // Normals are covectors; in lattice coordinates they become N·Bᵀ.
            let normals = DMatrix::from_fn(n, n, |i, j| active[i].normal[j]);
            let det = (normals * basis.transpose()).determinant();
            if (det.abs() - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("normals at vertex {v:?} have determinant {det}")));
            }
        }
        self.interior_point()
    }

    /// A point where every label is positive, found by least squares and
    /// then by seeded sampling.
    pub fn interior_point(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        if self.labels.is_empty() {
            return Ok(vec![0.0; n]);
        }
        let m = self.labels.len();
        let a = DMatrix::from_fn(m, n, |i, j| self.labels[i].normal[j]);
        let rhs = DVector::from_fn(m, |i, _| 1.0 - self.labels[i].offset);
        if let Ok(x) = a.clone().svd(true, true).solve(&rhs, 1e-12) {
            let x: Vec<f64> = x.iter().copied().collect();
            if self.contains(&x) {
                return Ok(x);
            }
        }
        let radius = 10.0
            * self
                .labels
                .iter()
                .map(|l| l.offset.abs() / norm(&l.normal))
                .fold(1.0, f64::max);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..20_000 {
            let x: Vec<f64> = (0..n).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
            let s = self.min_label(&x);
            if s > 0.0 && best.as_ref().is_none_or(|b| s > b.0) {
                best = Some((s, x));
            }
        }
        best.map(|b| b.1)
            .ok_or_else(|| invalid("no interior point found; polyhedron may be empty"))
    }

    /// Canonical text form. Floats use the shortest representation that
    /// parses back to the same bits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim {}", self.dim);
        for l in &self.labels {
            let normal: Vec<String> = l.normal.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{} ; {:?}", normal.join(" "), l.offset);
        }
        if let Some(b) = &self.lattice {
            let _ = writeln!(s, "lattice");
            for row in b {
                let row: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        for v in &self.vertices {
            let v: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(s, "vertex {}", v.join(" "));
        }
        s
    }

    /// Parses the text form. Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "empty input".into(),
        })?;
        let dim = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["dim", d] => d.parse::<usize>().map_err(|e| Error::Parse {
                line: ln,
                msg: format!("bad dimension: {e}"),
            })?,
            _ => {
                return Err(Error::Parse {
                    line: ln,
                    msg: "expected `dim N`".into(),
                })
            }
        };
        if dim == 0 || dim > MAX_TEXT_DIM {
            return Err(Error::Parse {
                line: ln,
                msg: format!("dimension {dim} out of range"),
            });
        }
        let mut poly = Self {
            dim,
            labels: Vec::new(),
            lattice: None,
            vertices: Vec::new(),
        };
        let mut lattice_rows: Option<Vec<Vec<f64>>> = None;
        for (ln, line) in lines {
            if let Some(rows) = lattice_rows.as_mut() {
                if rows.len() < dim {
                    rows.push(parse_floats(line, dim, ln)?);
                    if rows.len() == dim {
                        poly.lattice = lattice_rows.take();
                    }
                    continue;
                }
            }
            if line == "lattice" {
                if poly.lattice.is_some() {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "duplicate lattice block".into(),
                    });
                }
                lattice_rows = Some(Vec::new());
            } else if let Some(rest) = line.strip_prefix("vertex") {
                poly.vertices.push(parse_floats(rest, dim, ln)?);
            } else if let Some((normal, offset)) = line.split_once(';') {
                if poly.labels.len() >= MAX_TEXT_LABELS {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "too many labels".into(),
                    });
                }
                let normal = parse_floats(normal, dim, ln)?;
                let offset = parse_floats(offset, 1, ln)?[0];
                poly.labels.push(AffineLabel::new(normal, offset));
            } else {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("unrecognised line `{line}`"),
                });
            }
        }
        if lattice_rows.is_some() {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: "truncated lattice block".into(),
            });
        }
        poly.check_shape().map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        Ok(poly)
    }
}

fn parse_floats(s: &str, count: usize, line: usize) -> Result<Vec<f64>> {
    let vals = s
        .split_whitespace()
        .map(|t| {
            let v: f64 = t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad number `{t}`"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    line,
                    msg: format!("non-finite number `{t}`"),
                })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() != count {
        return Err(Error::Parse {
            line,
            msg: format!("expected {count} numbers, found {}", vals.len()),
        });
    }
    Ok(vals)
}

/// A closed convex cone: nonnegative combinations of `rays` plus the
/// linear span of `lineality`. Rays are unit vectors orthogonal to the
/// lineality space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cone {
    pub dim: usize,
    pub rays: Vec<Vec<f64>>,
    pub lineality: Vec<Vec<f64>>,
}

const CONE_TOL: f64 = 1e-10;

impl Cone {
    /// `{x : ⟨a_i, x⟩ ≥ 0}` in generator form, by enumerating the
    /// one-dimensional intersections of rank-deficient active sets.
    pub fn from_inequalities(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if dim == 0 || dim > 16 {
            return Err(invalid("cone dimension out of range"));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("inequality has wrong length"));
        }
        let rows: Vec<&Vec<f64>> = rows.iter().filter(|r| norm(r) > 0.0).collect();
        let m = rows.len();
        let full = |k: usize| -> DMatrix<f64> {
            DMatrix::from_fn(k.max(dim), dim, |i, j| if i < m { rows[i][j] } else { 0.0 })
        };
        let a = full(m);
        let svd = a.svd(false, true);
        let vt = svd.v_t.as_ref().ok_or_else(|| Error::Singular("cone SVD".into()))?;
        let smax = svd.singular_values.max();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let rank = order
            .iter()
            .filter(|&&i| svd.singular_values[i] > CONE_TOL * smax.max(1.0) && i < m.max(1) && smax > 0.0)
            .count();
        let row_basis: Vec<Vec<f64>> = order[..rank]
            .iter()
            .map(|&i| vt.row(i).iter().copied().collect())
            .collect();
        let lineality: Vec<Vec<f64>> = order[rank..]
            .iter()
            .map(|&i| vt.row(i).iter().copied().collect())
            .collect();
        let r = rank;
        let mut rays: Vec<Vec<f64>> = Vec::new();
        if r > 0 {
            let reduced: Vec<Vec<f64>> = rows
                .iter()
                .map(|row| row_basis.iter().map(|b| dot(row, b)).collect())
                .collect();
            for subset in combinations(m, r - 1) {
                let mat = DMatrix::from_fn(r, r, |i, j| if i + 1 < r { reduced[subset[i]][j] } else { 0.0 });
                let s = mat.svd(false, true);
                let Some(vt) = s.v_t.as_ref() else { continue };
                let mut idx: Vec<usize> = (0..r).collect();
                idx.sort_by(|&i, &j| s.singular_values[i].total_cmp(&s.singular_values[j]));
                let scale = s.singular_values.max().max(1.0);
                if r > 1 && s.singular_values[idx[1]] <= CONE_TOL * scale {
                    continue;
                }
                let z: Vec<f64> = vt.row(idx[0]).iter().copied().collect();
                for sign in [1.0, -1.0] {
                    let zs: Vec<f64> = z.iter().map(|v| sign * v).collect();
                    if reduced.iter().all(|row| dot(row, &zs) >= -CONE_TOL * norm(row)) {
                        let mut x = vec![0.0; dim];
                        for (b, &c) in row_basis.iter().zip(&zs) {
                            for (xi, bi) in x.iter_mut().zip(b) {
                                *xi += c * bi;
                            }
                        }
                        let nx = norm(&x);
                        x.iter_mut().for_each(|v| *v /= nx);
                        if !rays.iter().any(|y| dist(y, &x) < 1e-8) {
                            rays.push(x);
                        }
                    }
                }
            }
        }
        rays.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| y.total_cmp(x))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(Self { dim, rays, lineality })
    }

    /// Rays followed by `±` each lineality vector.
    pub fn generators(&self) -> Vec<Vec<f64>> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(l.iter().map(|v| -v).collect());
        }
        g
    }

    pub fn dual(&self) -> Result<Self> {
        Self::from_inequalities(self.dim, &self.generators())
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.dual()
            .map(|d| d.generators().iter().all(|g| dot(g, x) >= -tol * norm(x).max(1.0)))
            .unwrap_or(false)
    }

    /// Equality of cones as point sets, up to `tol` on unit generators.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        if self.lineality.len() != other.lineality.len() || self.rays.len() != other.rays.len() {
            return false;
        }
        let in_span = |v: &[f64], basis: &[Vec<f64>]| {
            let proj: f64 = basis.iter().map(|b| dot(v, b).powi(2)).sum();
            (dot(v, v) - proj).abs() < tol
        };
        self.lineality.iter().all(|l| in_span(l, &other.lineality))
            && self.rays.iter().all(|r| other.rays.iter().any(|s| dist(r, s) < tol))
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= m {
        rec(0, m, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Recession cone `{x : ⟨dL_j, x⟩ ≥ 0}` and its dual.
pub fn recession_and_dual_cone(poly: &DelzantPolyhedron) -> Result<(Cone, Cone)> {
    let rows: Vec<Vec<f64>> = poly.labels.iter().map(|l| l.normal.clone()).collect();
    let cone = Cone::from_inequalities(poly.dim, &rows)?;
    let dual = cone.dual()?;
    Ok((cone, dual))
}

/// Outcome of [`forbidden_region_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForbiddenReport {
    /// `b ∈ −C*`: `⟨b, x⟩ ≤ 0` on the whole recession cone.
    pub forbidden: bool,
    /// A generator of the recession cone with `⟨b, x⟩ > 0`, when one exists.
    pub witness: Option<Vec<f64>>,
    pub max_pairing: f64,
}

/// Decides whether `b` lies in `−C*` by maximising `⟨b, ·⟩` over the
/// generators of the recession cone.
pub fn forbidden_region_check(poly: &DelzantPolyhedron, b: &[f64]) -> Result<ForbiddenReport> {
    if b.len() != poly.dim {
        return Err(invalid("vector has wrong length"));
    }
    let (cone, _) = recession_and_dual_cone(poly)?;
    let tol = 1e-12 * norm(b).max(1.0);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for g in cone.generators() {
        let p = dot(&g, b);
        if best.as_ref().is_none_or(|(m, _)| p > *m) {
            best = Some((p, g));
        }
    }
    Ok(match best {
        Some((p, g)) if p > tol => ForbiddenReport {
            forbidden: false,
            witness: Some(g),
            max_pairing: p,
        },
        Some((p, _)) => ForbiddenReport {
            forbidden: true,
            witness: None,
            max_pairing: p,
        },
        None => ForbiddenReport {
            forbidden: true,
            witness: None,
            max_pairing: 0.0,
        },
    })
}

/// The unique `c` with `⟨dL_j, c⟩ = 2` for every label.
pub fn calabi_yau_constant(poly: &DelzantPolyhedron) -> Result<Vec<f64>> {
    let n = poly.dim;
    let m = poly.labels.len();
    if m < n {
        return Err(Error::Underdetermined(format!("{m} labels in dimension {n}")));
    }
    let a = DMatrix::from_fn(m, n, |i, j| poly.labels[i].normal[j]);
    let rhs = DVector::from_element(m, 2.0);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.iter().any(|s| *s <= 1e-12 * smax) {
        return Err(Error::Underdetermined("label normals do not span".into()));
    }
    let c = svd.solve(&rhs, 1e-14).map_err(|e| Error::Singular(e.into()))?;
    let resid = (&a * &c - &rhs).amax();
    if resid > 1e-9 * (1.0 + c.amax()) {
        return Err(Error::Inconsistent(format!(
            "no c satisfies every label (residual {resid:e})"
        )));
    }
    Ok(c.iter().copied().collect())
}

/// `½ Σ L_j log L_j`, the canonical potential of a labelled polyhedron.
#[derive(Debug, Clone)]
pub struct GuilleminPotential {
    pub labels: Vec<AffineLabel>,
}

impl GuilleminPotential {
    pub fn new(poly: &DelzantPolyhedron) -> Self {
        Self {
            labels: poly.labels.clone(),
        }
    }
}

impl SymplecticPotential for GuilleminPotential {
    fn dim(&self) -> usize {
        self.labels.first().map_or(0, |l| l.normal.len())
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.labels.iter().try_fold(0.0, |acc, l| {
            let v = l.eval(x);
            if v > 0.0 {
                Ok(acc + 0.5 * v * v.ln())
            } else {
                Err(Error::OutOfDomain(format!("label value {v}")))
            }
        })
    }

    fn boundary_margin(&self, x: &[f64]) -> f64 {
        self.labels.iter().map(|l| l.eval(x)).fold(f64::INFINITY, f64::min)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        for l in &self.labels {
            let v = l.eval(x);
            if !(v > 0.0) {
                return Err(Error::OutOfDomain(format!("label value {v}")));
            }
            for (gi, ni) in g.iter_mut().zip(&l.normal) {
                *gi += 0.5 * (v.ln() + 1.0) * ni;
            }
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut h = DMatrix::zeros(n, n);
        for l in &self.labels {
            let v = l.eval(x);
            if !(v > 0.0) {
                return Err(Error::OutOfDomain(format!("label value {v}")));
            }
            let nv = DVector::from_column_slice(&l.normal);
            h += &nv * nv.transpose() * (0.5 / v);
        }
        Ok(h)
    }
}

/// A potential given by closures; derivatives use finite differences.
pub struct FnPotential<F, M> {
    pub dim: usize,
    pub f: F,
    pub margin: M,
}

impl<F, M> SymplecticPotential for FnPotential<F, M>
where
    F: Fn(&[f64]) -> f64,
    M: Fn(&[f64]) -> f64,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        if (self.margin)(x) <= 0.0 {
            return Err(Error::OutOfDomain(format!("{x:?}")));
        }
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("potential value"))
        }
    }

    fn boundary_margin(&self, x: &[f64]) -> f64 {
        (self.margin)(x)
    }
}

fn checked_cholesky(h: DMatrix<f64>) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    match h.clone().cholesky() {
        Some(c) => Ok(c),
        None => {
            let ev = h.symmetric_eigenvalues().min();
            Err(Error::NotConvex { eigenvalue: ev })
        }
    }
}

/// `log det Hess U + ⟨c, ∇U⟩ − ⟨b, x⟩`; constant in `x` exactly when `U`
/// defines a steady soliton with vector `b`.
pub fn ma_residual(pot: &(impl SymplecticPotential + ?Sized), b: &[f64], c: &[f64], x: &[f64]) -> Result<f64> {
    if b.len() != x.len() || c.len() != x.len() {
        return Err(invalid("vector lengths differ from the dimension"));
    }
    let chol = checked_cholesky(pot.hessian(x)?)?;
    let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let g = pot.gradient(x)?;
    Ok(logdet + dot(c, &g) - dot(b, x))
}

/// Sample statistics of a residual that should be constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadStats {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub max_deviation: f64,
}

impl SpreadStats {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                std_dev: f64::NAN,
                max_deviation: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
        let max_deviation = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        Self {
            count,
            mean,
            std_dev: var.sqrt(),
            max_deviation,
        }
    }
}

pub fn ma_residual_spread(
    pot: &(impl SymplecticPotential + ?Sized + Sync),
    b: &[f64],
    c: &[f64],
    points: &[Vec<f64>],
) -> Result<SpreadStats> {
    use rayon::prelude::*;
    let vals = points
        .par_iter()
        .map(|x| ma_residual(pot, b, c, x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SpreadStats::from_values(&vals))
}

/// A point and its Legendre dual: `y = ∇u(x)`, `H(y) = ⟨x, y⟩ − u(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegendrePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: f64,
    pub h: f64,
}

pub fn legendre_forward(pot: &(impl SymplecticPotential + ?Sized), x: &[f64]) -> Result<LegendrePoint> {
    let y = pot.gradient(x)?;
    let u = pot.value(x)?;
    let h = dot(x, &y) - u;
    Ok(LegendrePoint { x: x.to_vec(), y, u, h })
}

/// Solves `∇u(x) = y` by damped Newton from `x0`, staying inside the
/// domain.
pub fn legendre_inverse(pot: &(impl SymplecticPotential + ?Sized), y: &[f64], x0: &[f64]) -> Result<LegendrePoint> {
    const MAX_ITER: usize = 100;
    let mut x = x0.to_vec();
    let resid = |x: &[f64]| -> Result<Vec<f64>> { Ok(pot.gradient(x)?.iter().zip(y).map(|(g, t)| g - t).collect()) };
    let mut r = resid(&x)?;
    for _ in 0..MAX_ITER {
        let rn = norm(&r);
        if rn <= 1e-13 * (1.0 + norm(y)) {
            return legendre_forward(pot, &x);
        }
        let chol = checked_cholesky(pot.hessian(&x)?)?;
        let step = chol.solve(&DVector::from_column_slice(&r));
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            if pot.boundary_margin(&cand) > 0.0 {
                if let Ok(rc) = resid(&cand) {
                    if norm(&rc) < rn || t < 1e-6 {
                        x = cand;
                        r = rc;
                        break;
                    }
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::NoConvergence {
                    what: "Legendre inversion line search",
                    iterations: 0,
                });
            }
        }
    }
    if norm(&r) <= 1e-10 * (1.0 + norm(y)) {
        return legendre_forward(pot, &x);
    }
    Err(Error::NoConvergence {
        what: "Legendre inversion",
        iterations: MAX_ITER,
    })
}

/// Facet approach data for one label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub facet: usize,
    pub levels: Vec<f64>,
    /// `G(dL, dL)/L` with `G = (Hess U)^{-1}`; the limit should be 2.
    pub ratio: Vec<f64>,
    /// `‖G(dL, ·)‖`; should vanish linearly in `L`.
    pub off_norm: Vec<f64>,
    pub ratio_limit: f64,
    pub ratio_order: f64,
    pub off_order: f64,
    pub pass: bool,
}

pub const BOUNDARY_LEVELS: usize = 12;

/// Moves from `x0` towards the facet `L_j = 0` along the normal, with
/// `L_j = 2^{-k} L_j(x0)` for `k = 1..=12`, and extrapolates the boundary
/// limits. Passing requires the limit within `tol` of 2 and both
/// convergence orders at least 3/4.
pub fn boundary_condition_check(
    pot: &(impl SymplecticPotential + ?Sized),
    poly: &DelzantPolyhedron,
    facet: usize,
    x0: &[f64],
    tol: f64,
) -> Result<BoundaryReport> {
    let label = poly
        .labels
        .get(facet)
        .ok_or_else(|| invalid(format!("no facet {facet}")))?;
    let l0 = label.eval(x0);
    if !(l0 > 0.0) || !poly.contains(x0) {
        return Err(Error::OutOfDomain("start point is not interior".into()));
    }
    let nn = dot(&label.normal, &label.normal);
    let u = DVector::from_column_slice(&label.normal);
    let (mut levels, mut ratio, mut off_norm) = (Vec::new(), Vec::new(), Vec::new());
    for k in 1..=BOUNDARY_LEVELS {
        let shrink = 1.0 - 0.5_f64.powi(k as i32);
        let x: Vec<f64> = x0
            .iter()
            .zip(&label.normal)
            .map(|(a, n)| a - shrink * l0 * n / nn)
            .collect();
        let others_ok = poly
            .labels
            .iter()
            .enumerate()
            .all(|(i, l)| i == facet || l.eval(&x) > 0.0);
        if !others_ok || pot.boundary_margin(&x) <= 0.0 {
            return Err(Error::OutOfDomain(format!(
                "approach sequence leaves the domain at level {k}"
            )));
        }
        let lv = label.eval(&x);
        let chol = checked_cholesky(pot.hessian(&x)?)?;
        let gu = chol.solve(&u);
        levels.push(lv);
        ratio.push(u.dot(&gu) / lv);
        off_norm.push(gu.norm());
    }
    let k = ratio.len();
    let (r0, r1, r2) = (ratio[k - 3], ratio[k - 2], ratio[k - 1]);
    let (d1, d2) = (r1 - r0, r2 - r1);
    let small = 1e-9 * (1.0 + r2.abs());
    let (ratio_limit, ratio_order) = if d1.abs().max(d2.abs()) <= small {
        (r2, f64::INFINITY)
    } else {
        let p = (d1 / d2).abs().log2();
        let lim = if p > 0.0 { r2 + d2 / (2.0_f64.powf(p) - 1.0) } else { r2 };
        (lim, p)
    };
    let tail = k / 2;
    let off_order = if off_norm[tail..].iter().all(|v| *v <= 1e-12) {
        f64::INFINITY
    } else {
        slope(
            &levels[tail..].iter().map(|v| v.ln()).collect::<Vec<_>>(),
            &off_norm[tail..].iter().map(|v| v.max(1e-300).ln()).collect::<Vec<_>>(),
        )
    };
    let pass = (ratio_limit - 2.0).abs() <= tol && ratio_order >= 0.75 && off_order >= 0.75;
    Ok(BoundaryReport {
        facet,
        levels,
        ratio,
        off_norm,
        ratio_limit,
        ratio_order,
        off_order,
        pass,
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
