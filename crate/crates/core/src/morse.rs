//! Morse theory of `ρ_b = z_1⋯z_m` on the fiber `M_b` of the planar unit arm.
//!
//! Critical points are the two-valued configurations `z^K`: components outside
//! `K` at angle `ξ`, components in `K` at `−η`, with `ξ, η` the angles of the
//! triangle `(0, b, P e^{iξ})` of sides `b, P = m − |K|, N = |K|`. The index of
//! `z^K` is `|K| − 1`; it is computed here from the constrained Hessian and
//! cross-checked against a local chart of `M_b` whose Hessian at `z^K` is
//! block diagonal, `diag(s_u M(P−1), s_v M(N−1))`, where `M(k)` has `−2` on the
//! diagonal and `−1` elsewhere and `s_v = −s_u = PN(1 + cos γ)/(2A)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arm::{angle_jacobian, critical_radii, eval_arm, gram, ArmSpec, Configuration, IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::lift::{kernel_basis, singular_threshold};

/// `ρ(z) = z_1 z_2 ⋯ z_m` for a planar configuration.
pub fn rho(z: &Configuration) -> Result<Complex64> {
    let q = z.planar_angles()?;
    Ok(q.iter().fold(Complex64::new(1.0, 0.0), |acc, qj| acc * Complex64::from_polar(1.0, *qj)))
}

/// `Σ q_j`, the real lift of `ρ` along the continuous angle lift.
pub fn rho_lift(q: &[f64]) -> f64 {
    q.iter().sum()
}

/// Every component rotated by `θ`.
pub fn rotate_diagonal(z: &Configuration, theta: f64) -> Result<Configuration> {
    let q = z.planar_angles()?;
    Ok(Configuration::from_angles(q.iter().map(|x| x + theta).collect()))
}

/// Gradient of `Σ q_j` on the fiber through `q`: the part of `U = (1, …, 1)`
/// orthogonal to the rows of `Df`.
pub fn grad_rho_b(spec: &ArmSpec, z: &Configuration) -> Result<DVector<f64>> {
    spec.require_planar()?;
    spec.check(z)?;
    let q = z.planar_angles()?;
    let p = gram(spec, z)?;
    if p.det < singular_threshold(spec) {
        let b = eval_arm(spec, z)?;
        return Err(Error::NearCritical {
            det: p.det,
            distance: crate::arm::distance_to_critical(spec, &b),
            partial: None,
        });
    }
    let df = angle_jacobian(spec.lengths(), q);
    let u = DVector::from_element(q.len(), 1.0);
    let lambda = p
        .entries
        .lu()
        .solve(&(&df * &u))
        .ok_or_else(|| Error::invalid("singular Gram matrix"))?;
    Ok(u - df.transpose() * lambda)
}

/// Components take exactly two distinct values (within `tol`, chordal).
pub fn is_two_valued(z: &Configuration, tol: f64) -> bool {
    let mut values: Vec<&DVector<f64>> = Vec::new();
    for v in z.vectors() {
        if !values.iter().any(|w| (*w - v).norm() <= tol) {
            values.push(v);
        }
    }
    values.len() == 2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// Indices (0-based) of the components at angle `−η`.
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    pub xi: f64,
    pub eta: f64,
    pub config: Configuration,
    pub index: usize,
    /// `Σ q_j` at the critical point, for `b` on the positive real axis.
    pub rho_lift: f64,
}

/// Triangle data of `z^K`: sides `b`, `P`, `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub b: f64,
    pub p: usize,
    pub n: usize,
    pub xi: f64,
    pub eta: f64,
    /// Angle at `P e^{iξ}`.
    pub gamma: f64,
    pub area: f64,
}

impl Triangle {
    pub fn new(b: f64, p: usize, n: usize) -> Option<Self> {
        let (pf, nf) = (p as f64, n as f64);
        if p == 0 || n == 0 || !((pf - nf).abs() < b && b < pf + nf) {
            return None;
        }
        let xi = ((b * b + pf * pf - nf * nf) / (2.0 * b * pf)).clamp(-1.0, 1.0).acos();
        let eta = ((b * b - pf * pf + nf * nf) / (2.0 * b * nf)).clamp(-1.0, 1.0).acos();
        let gamma = ((pf * pf + nf * nf - b * b) / (2.0 * pf * nf)).clamp(-1.0, 1.0).acos();
        let heron = -b.powi(4) - pf.powi(4) - nf.powi(4)
            + 2.0 * b * b * pf * pf
            + 2.0 * b * b * nf * nf
            + 2.0 * pf * pf * nf * nf;
        Some(Triangle {
            b,
            p,
            n,
            xi,
            eta,
            gamma,
            area: heron.max(0.0).sqrt() / 4.0,
        })
    }

    /// `∂(Pξ − Nη)/∂u` at `(u, v) = (P, N)`.
    pub fn s_u(&self) -> f64 {
        let (p, n) = (self.p as f64, self.n as f64);
        -p * n * (1.0 + self.gamma.cos()) / (2.0 * self.area)
    }

    /// `∂(Pξ − Nη)/∂v` at `(u, v) = (P, N)`.
    pub fn s_v(&self) -> f64 {
        -self.s_u()
    }
}

fn check_b(m: usize, b: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("arm needs at least one segment"));
    }
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::invalid("b must be a finite real number >= 0"));
    }
    let spec = ArmSpec::unit_planar(m)?;
    if let Some(r) = critical_radii(&spec).into_iter().find(|r| (r - b).abs() <= 1e-9) {
        if b != 0.0 || m.is_multiple_of(2) {
            return Err(Error::invalid(format!("b = {b} is a critical value (radius {r})")));
        }
    }
    Ok(())
}

fn combinations(m: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for k in start..m {
            cur.push(k);
            rec(m, n, k + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, n, 0, &mut Vec::new(), &mut out);
    out
}

/// Every critical point of `ρ_b` for the unit arm with `m` segments and `b`
/// on the positive real axis, ordered by `|K|` then lexicographically.
pub fn critical_points(m: usize, b: f64) -> Result<Vec<CriticalPoint>> {
    check_b(m, b)?;
    let spec = ArmSpec::unit_planar(m)?;
    let target = DVector::from_vec(vec![b, 0.0]);
    let mut out = Vec::new();
    for n in 1..m {
        let Some(tri) = Triangle::new(b, m - n, n) else { continue };
        let (pf, nf) = ((m - n) as f64, n as f64);
        let closure = (pf * tri.xi.cos() + nf * tri.eta.cos() - b).abs() + (pf * tri.xi.sin() - nf * tri.eta.sin()).abs();
        if closure > IDENTITY_TOL * m as f64 {
            return Err(Error::invalid(format!("triangle closure failed by {closure:.3e}")));
        }
        for k in combinations(m, n) {
            let q: Vec<f64> = (0..m).map(|j| if k.contains(&j) { -tri.eta } else { tri.xi }).collect();
            let config = Configuration::from_angles(q.clone());
            let miss = (eval_arm(&spec, &config)? - &target).norm();
            if miss > IDENTITY_TOL {
                return Err(Error::invalid(format!("z^K misses b by {miss:.3e}")));
            }
            let g = grad_rho_b(&spec, &config)?.norm();
            if g > 1e-8 {
                return Err(Error::invalid(format!("grad ρ_b = {g:.3e} at z^K")));
            }
            if !is_two_valued(&config, 1e-9) {
                return Err(Error::invalid("z^K is not two-valued"));
            }
            let index = constrained_hessian(&spec, &q)?.index;
            out.push(CriticalPoint {
                k,
                xi: tri.xi,
                eta: tri.eta,
                config,
                index,
                rho_lift: rho_lift(&q),
            });
        }
    }
    Ok(out)
}

/// Critical points for a complex `b`, rotated from the real case by `arg b`.
pub fn critical_points_at(m: usize, b: [f64; 2]) -> Result<Vec<CriticalPoint>> {
    let r = b[0].hypot(b[1]);
    let theta = b[1].atan2(b[0]);
    let mut points = critical_points(m, r)?;
    for cp in &mut points {
        cp.config = rotate_diagonal(&cp.config, theta)?;
        cp.rho_lift += m as f64 * theta;
    }
    Ok(points)
}

/// Spectrum of the constrained Hessian of `Σ q_j` on `T_q M_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedHessian {
    pub lambda: [f64; 2],
    /// Ascending eigenvalues in an orthonormal basis of `ker Df`.
    pub eigenvalues: Vec<f64>,
    pub index: usize,
}

/// Lagrange form `Kᵀ(−λ_X ∇²X − λ_Y ∇²Y)K` with `K` an orthonormal basis of
/// `ker Df` and `λ` solving `Dfᵀλ = U`.
pub fn constrained_hessian(spec: &ArmSpec, q: &[f64]) -> Result<ConstrainedHessian> {
    spec.require_planar()?;
    let m = q.len();
    let df = angle_jacobian(spec.lengths(), q);
    let u = DVector::from_element(m, 1.0);
    let lambda = df
        .transpose()
        .svd(true, true)
        .solve(&u, 1e-14)
        .map_err(|e| Error::invalid(e.to_string()))?;
    let (lx, ly) = (lambda[0], lambda[1]);
    let a = spec.lengths();
    // ∇²X = diag(−a cos q), ∇²Y = diag(−a sin q).
    let h = DMatrix::from_diagonal(&DVector::from_fn(m, |j, _| a[j] * (lx * q[j].cos() + ly * q[j].sin())));
    let k = kernel_basis(spec, q);
    let reduced = k.transpose() * h * &k;
    let mut eig: Vec<f64> = reduced.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let scale = eig.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
    if let Some(z) = eig.iter().find(|x| x.abs() <= 1e-8 * scale) {
        return Err(Error::IndeterminateIndex { eigenvalue: *z });
    }
    if scale == 0.0 && !eig.is_empty() {
        return Err(Error::IndeterminateIndex { eigenvalue: 0.0 });
    }
    let index = eig.iter().filter(|x| **x < -1e-8 * scale).count();
    Ok(ConstrainedHessian {
        lambda: [lx, ly],
        eigenvalues: eig,
        index,
    })
}

/// `M(k)`: `−2` on the diagonal, `−1` elsewhere.
pub fn m_block(k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| if i == j { -2.0 } else { -1.0 })
}

/// Local chart of `M_b` around `z^K` with `K` the last `N` indices.
pub fn chart(b: f64, p: usize, n: usize, qt: &[f64], rt: &[f64]) -> Option<Vec<f64>> {
    let sq: f64 = qt.iter().map(|x| x.sin()).sum();
    let sr: f64 = rt.iter().map(|x| x.sin()).sum();
    if sq.abs() > 1.0 || sr.abs() > 1.0 {
        return None;
    }
    let u = qt.iter().map(|x| x.cos()).sum::<f64>() + (1.0 - sq * sq).sqrt();
    let v = rt.iter().map(|x| x.cos()).sum::<f64>() + (1.0 - sr * sr).sqrt();
    let cx = (b * b + u * u - v * v) / (2.0 * b * u);
    let ce = (b * b - u * u + v * v) / (2.0 * b * v);
    if cx.abs() > 1.0 || ce.abs() > 1.0 {
        return None;
    }
    let (xi, eta) = (cx.acos(), ce.acos());
    let mut q = Vec::with_capacity(p + n);
    q.extend(qt.iter().map(|x| xi + x));
    q.push(xi - sq.asin());
    q.push(-eta - sr.asin());
    q.extend((1..n).rev().map(|j| -eta + rt[j - 1]));
    Some(q)
}

/// Chart cross-check at one critical point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartCheck {
    pub s_u: f64,
    pub s_v: f64,
    /// Spectrum of `diag(s_u M(P−1), s_v M(N−1))`, ascending.
    pub predicted: Vec<f64>,
    /// Spectrum of `Jᵀ H J`, with `J` the chart Jacobian and `H` the Lagrange Hessian.
    pub pulled_back: Vec<f64>,
    /// Spectrum of the chart Hessian of `Σ q_j` by finite differences.
    pub finite_difference: Vec<f64>,
    pub max_deviation: f64,
    pub consistent: bool,
}

pub const CHART_TOL: f64 = 1e-6;

fn sorted_eigs(m: DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut e: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Compare the analytic block Hessian with the chart Hessian at `z^K`, where
/// `K` holds the last `n` of `p + n` indices.
pub fn chart_check(b: f64, p: usize, n: usize) -> Result<ChartCheck> {
    let tri = Triangle::new(b, p, n).ok_or_else(|| Error::invalid("no critical point with these P, N"))?;
    let m = p + n;
    let dim = m - 2;
    let (su, sv) = (tri.s_u(), tri.s_v());

    let mut block = DMatrix::zeros(dim, dim);
    block.view_mut((0, 0), (p - 1, p - 1)).copy_from(&(m_block(p - 1) * su));
    block.view_mut((p - 1, p - 1), (n - 1, n - 1)).copy_from(&(m_block(n - 1) * sv));
    let predicted = sorted_eigs(block.clone());

    let eval = |x: &DVector<f64>| -> Option<Vec<f64>> { chart(b, p, n, &x.as_slice()[..p - 1], &x.as_slice()[p - 1..]) };
    let h = 1e-4;
    let rho_at = |x: &DVector<f64>| eval(x).map(|q| rho_lift(&q)).unwrap_or(f64::NAN);
    let mut fd = DMatrix::zeros(dim, dim);
    let e = |i: usize| {
        let mut v = DVector::zeros(dim);
        v[i] = h;
        v
    };
    let origin = DVector::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let (ei, ej) = (e(i), e(j));
            fd[(i, j)] = (rho_at(&(&origin + &ei + &ej)) - rho_at(&(&origin + &ei - &ej)) - rho_at(&(&origin - &ei + &ej))
                + rho_at(&(&origin - &ei - &ej)))
                / (4.0 * h * h);
        }
    }
    let fd = (&fd + fd.transpose()) * 0.5;

    let q0 = eval(&origin).ok_or_else(|| Error::invalid("chart undefined at the origin"))?;
    let spec = ArmSpec::unit_planar(m)?;
    let hess = {
        let df = angle_jacobian(spec.lengths(), &q0);
        let lam = df
            .transpose()
            .svd(true, true)
            .solve(&DVector::from_element(m, 1.0), 1e-14)
            .map_err(|e| Error::invalid(e.to_string()))?;
        DMatrix::from_diagonal(&DVector::from_fn(m, |j, _| lam[0] * q0[j].cos() + lam[1] * q0[j].sin()))
    };
    let hj = 1e-6;
    let mut jac = DMatrix::zeros(m, dim);
    for i in 0..dim {
        let mut d = DVector::zeros(dim);
        d[i] = hj;
        let plus = eval(&d).ok_or_else(|| Error::invalid("chart undefined near the origin"))?;
        let minus = eval(&-d).ok_or_else(|| Error::invalid("chart undefined near the origin"))?;
        for r in 0..m {
            jac[(r, i)] = (plus[r] - minus[r]) / (2.0 * hj);
        }
    }
    let pulled = jac.transpose() * hess * &jac;
    let dev_pulled = (&pulled - &block).amax();
    let dev_fd = (&fd - &block).amax();
    let scale = block.amax().max(1.0);
    let max_deviation = dev_pulled.max(dev_fd) / scale;
    Ok(ChartCheck {
        s_u: su,
        s_v: sv,
        predicted,
        pulled_back: sorted_eigs(pulled),
        finite_difference: sorted_eigs(fd),
        max_deviation,
        consistent: max_deviation < CHART_TOL,
    })
}

/// Full index verification of a critical point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub index: usize,
    pub expected: usize,
    pub hessian: ConstrainedHessian,
    /// Signs of `s_u < 0 < s_v`.
    pub sign_pattern_ok: bool,
    pub chart: Option<ChartCheck>,
}

/// Morse index of `cp` from the constrained Hessian, with the block-sign and
/// chart cross-checks. A chart failure is reported, not raised.
pub fn morse_index(m: usize, b: f64, cp: &CriticalPoint) -> Result<IndexReport> {
    let spec = ArmSpec::unit_planar(m)?;
    let q = cp.config.planar_angles()?;
    let hessian = constrained_hessian(&spec, q)?;
    let n = cp.k.len();
    let tri = Triangle::new(b, m - n, n).ok_or_else(|| Error::invalid("b outside the existence range of z^K"))?;
    let sign_pattern_ok = tri.s_u() < 0.0 && tri.s_v() > 0.0;
    Ok(IndexReport {
        index: hessian.index,
        expected: n - 1,
        hessian,
        sign_pattern_ok,
        chart: chart_check(b, m - n, n).ok(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseCensus {
    pub m: usize,
    pub b: f64,
    pub counts: BTreeMap<usize, usize>,
    pub euler: i64,
}

pub fn morse_census(m: usize, b: f64) -> Result<MorseCensus> {
    let mut counts = BTreeMap::new();
    for cp in critical_points(m, b)? {
        *counts.entry(cp.index).or_insert(0) += 1;
    }
    let euler = counts
        .iter()
        .map(|(i, c)| if i % 2 == 0 { *c as i64 } else { -(*c as i64) })
        .sum();
    Ok(MorseCensus { m, b, counts, euler })
}
