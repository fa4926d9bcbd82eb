//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Reference values come from independent
//! computations in this file (direct determinants, hand-rolled RK4 and
//! finite differences, closed-form homographies), never from the library
//! routine under test.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI, TAU};
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use armlift::arm::{det_gram_closed_form, two_link_solutions};
use armlift::holonomy::{commutator_estimate, gamma_estimate};
use armlift::lift::{lift_path, CurveSpec, LiftOptions, LiftTrajectory};
use armlift::moebius::{
    act_group, flow_gamma, lie_bracket_numeric, planar_fields, reachable, MoebiusElement, PlanarField, Verdict,
};
use armlift::morse::{critical_points, morse_census, morse_index};
use armlift::{ArmSpec, Configuration};

// Pinned tolerances.
const GRAM_REL: f64 = 1e-10;
const FLOW_TOL: f64 = 1e-8;
const BRACKET_REL: f64 = 1e-5;
const CIRCLE_TOL: f64 = 1e-8;
const MIN_ORDER: f64 = 3.7;
const COINCIDENCE_DRIFT: f64 = 1e-7;
const CROSS_RATIO_DRIFT: f64 = 1e-5;
const WITNESS_TOL: f64 = 1e-8;
/// First-order convergence: `r(s) = (γ̂(s) − γ) / (γ s)` settles to a
/// constant, so its last change is at most this fraction of its size...
const GAMMA_SETTLE_REL: f64 = 0.1;
/// ...plus this absolute slack for a vanishing first-order coefficient.
const GAMMA_SETTLE_ABS: f64 = 1e-3;
/// Or `r` is still converging: successive changes shrink by at least this
/// factor per halving of `s` (the first-order value is 1/2; an error of lower
/// order makes `r` diverge with growing changes).
const GAMMA_CONTRACTION: f64 = 0.75;
/// Relative error at the smallest side.
const GAMMA_FINAL_REL: f64 = 0.1;
const CENSUS_SECONDS: f64 = 1.0;
const TWO_LINK_TOL: f64 = 1e-12;
const TRIVIAL_HOLONOMY: f64 = 1e-9;
/// Orthogonal ratio at the smallest side must shrink at least this much from the largest.
const ALIGNMENT_SHRINK: f64 = 0.25;
const ALIGNMENT_FINAL: f64 = 0.05;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn angles(z: &Configuration) -> Vec<f64> {
    z.vectors().iter().map(|v| v[1].atan2(v[0])).collect()
}

fn effector(a: &[f64], q: &[f64]) -> [f64; 2] {
    let x = a.iter().zip(q).map(|(a, q)| a * q.cos()).sum();
    let y = a.iter().zip(q).map(|(a, q)| a * q.sin()).sum();
    [x, y]
}

/// `det Σ a_j² (I − z_j z_jᵀ)` assembled entry by entry.
fn det_direct(a: &[f64], q: &[f64]) -> f64 {
    let (mut p11, mut p12, mut p22) = (0.0, 0.0, 0.0);
    for (a, q) in a.iter().zip(q) {
        let (c, s) = (q.cos(), q.sin());
        let w = a * a;
        p11 += w * (1.0 - c * c);
        p12 -= w * c * s;
        p22 += w * (1.0 - s * s);
    }
    p11 * p22 - p12 * p12
}

/// Double-double number `hi + lo`.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn of(x: f64) -> Self {
        Dd(x, 0.0)
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.0 + o.0;
        let bb = s - self.0;
        let err = (self.0 - (s - bb)) + (o.0 - bb);
        let lo = err + self.1 + o.1;
        let hi = s + lo;
        Dd(hi, lo - (hi - s))
    }

    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let err = self.0.mul_add(o.0, -p);
        let lo = err + self.0 * o.1 + self.1 * o.0;
        let hi = p + lo;
        Dd(hi, lo - (hi - p))
    }
}

/// [`det_direct`] with every sum and product in double-double, from the
/// rounded sines and cosines. The only error left is that of the inputs.
fn det_direct_dd(a: &[f64], q: &[f64]) -> f64 {
    let (mut p11, mut p12, mut p22) = (Dd::of(0.0), Dd::of(0.0), Dd::of(0.0));
    for (a, q) in a.iter().zip(q) {
        let (c, s) = (Dd::of(q.cos()), Dd::of(q.sin()));
        let w = Dd::of(*a).mul(Dd::of(*a));
        p11 = p11.add(w.mul(s).mul(s));
        p12 = p12.add(w.mul(c).mul(s).neg());
        p22 = p22.add(w.mul(c).mul(c));
    }
    let d = p11.mul(p22).add(p12.mul(p12).neg());
    d.0 + d.1
}

fn critical_distance(a: &[f64], r: f64) -> f64 {
    let m = a.len();
    (0..1usize << m)
        .map(|mask| (0..m).map(|i| if mask >> i & 1 == 1 { -a[i] } else { a[i] }).sum::<f64>().abs())
        .map(|c| (c - r).abs())
        .fold(f64::INFINITY, f64::min)
}

fn log2_slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.log2()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = r.random_range(2..=8);
        let a: Vec<f64> = (0..m).map(|_| r.random_range(0.1..3.0)).collect();
        let q: Vec<f64> = (0..m).map(|_| r.random_range(-PI..PI)).collect();
        let spec = ArmSpec::planar(a.clone()).unwrap();
        let z = Configuration::from_angles(q.clone());
        let direct = det_direct_dd(&a, &q);
        let closed = det_gram_closed_form(&spec, &z).unwrap();
        worst = worst.max((closed - direct).abs() / direct.abs());
    }
    outcome(worst <= GRAM_REL, format!("1000 cases, worst relative gap {worst:.2e} (limit {GRAM_REL:.0e})"))
}

fn rk4_sphere(s: &DVector<f64>, x0: &DVector<f64>, t: f64, n: usize) -> DVector<f64> {
    let f = |x: &DVector<f64>| s - x * x.dot(s);
    let h = t / n as f64;
    let mut x = x0.clone();
    for _ in 0..n {
        let k1 = f(&x);
        let k2 = f(&(&x + &k1 * (h / 2.0)));
        let k3 = f(&(&x + &k2 * (h / 2.0)));
        let k4 = f(&(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    x
}

fn random_unit(r: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| r.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let d = [2, 3, 4][i % 3];
        let s = random_unit(&mut r, d);
        let x = random_unit(&mut r, d);
        let closed = flow_gamma(&s, 1.0, &x);
        let numeric = rk4_sphere(&s, &x, 1.0, 2000);
        worst = worst.max((closed - numeric).norm());
    }
    outcome(worst <= FLOW_TOL, format!("200 cases, d in {{2,3,4}}, worst |closed - RK4| {worst:.2e} (limit {FLOW_TOL:.0e})"))
}

/// Central-difference bracket `DG·F − DF·G`, step chosen here.
fn fd_bracket(f: &dyn Fn(&DVector<f64>) -> DVector<f64>, g: &dyn Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    let h = 1e-4;
    let (fx, gx) = (f(x), g(x));
    let dgf = (g(&(x + &fx * h)) - g(&(x - &fx * h))) / (2.0 * h);
    let dfg = (f(&(x + &gx * h)) - f(&(x - &gx * h))) / (2.0 * h);
    dgf - dfg
}

fn criterion_3() -> Outcome {
    let (a1, a2) = (1.3, 0.7);
    let a = vec![a1, a2, a1, a2, a2];
    let spec = ArmSpec::planar(a.clone()).unwrap();
    let (p2, p4) = (a1 * a1 * a2 * a2, a1 * a1 + a2 * a2);
    let p6 = a1.powi(4) + p2 + a2.powi(4);
    let field = |k: u32, kind: char| {
        let a = a.clone();
        move |x: &DVector<f64>| {
            DVector::from_fn(x.len(), |j, _| {
                let w = a[j].powi(k as i32);
                match kind {
                    'C' => w * x[j].cos(),
                    'S' => w * x[j].sin(),
                    _ => w,
                }
            })
        }
    };
    let (ac, as_, a2f, a3c, a3s, a4) = (field(1, 'C'), field(1, 'S'), field(2, '1'), field(3, 'C'), field(3, 'S'), field(4, '1'));
    let c = field(0, 'C');
    let s = field(0, 'S');

    let mut r = rng(3);
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..20 {
        let x = DVector::from_fn(a.len(), |_, _| r.random_range(-PI..PI));
        let q = x.as_slice();
        let fd = |f: &dyn Fn(&DVector<f64>) -> DVector<f64>, g: &dyn Fn(&DVector<f64>) -> DVector<f64>| fd_bracket(f, g, &x);
        let cases: Vec<(DVector<f64>, DVector<f64>)> = vec![
            (fd(&c, &s), DVector::from_element(a.len(), 1.0)),
            (fd(&ac, &as_), a2f(&x)),
            (fd(&a2f, &ac), -a3s(&x)),
            (fd(&a2f, &as_), a3c(&x)),
            (fd(&ac, &a3s), a4(&x)),
            (fd(&a2f, &a3c), as_(&x) * p2 - a3s(&x) * p4),
            (fd(&a4, &ac), as_(&x) * p2 - a3s(&x) * p4),
            (fd(&a2f, &a3s), -ac(&x) * p2 + a3c(&x) * p4),
            (fd(&a4, &as_), -ac(&x) * p2 + a3c(&x) * p4),
            (fd(&a3c, &a3s), -a2f(&x) * p2 + a4(&x) * p4),
            (fd(&a4, &a3c), as_(&x) * (p2 * p4) - a3s(&x) * p6),
            (fd(&a4, &a3s), -ac(&x) * (p2 * p4) + a3c(&x) * p6),
        ];
        for (got, want) in &cases {
            worst = worst.max((got - want).norm() / want.norm().max(1.0));
            count += 1;
        }
        // The library's own bracket on its own fields agrees with the table too.
        let lib = lie_bracket_numeric(
            |p| planar_fields(&spec, p.as_slice(), PlanarField::AkC(1)).unwrap(),
            |p| planar_fields(&spec, p.as_slice(), PlanarField::AkS(1)).unwrap(),
            &x,
        );
        let want = planar_fields(&spec, q, PlanarField::Ak(2)).unwrap();
        worst = worst.max((lib - &want).norm() / want.norm().max(1.0));
    }
    outcome(
        worst <= BRACKET_REL,
        format!("[C,S]=U and the eleven two-length brackets at 20 points ({count} checks), worst relative gap {worst:.2e} (limit {BRACKET_REL:.0e})"),
    )
}

fn generic_curve(b0: [f64; 2]) -> CurveSpec {
    let r = 0.35;
    CurveSpec::arc([b0[0] - r, b0[1]], r, 0.0, 1.4, 1.5).unwrap()
}

fn final_tracking(spec: &ArmSpec, q0: &Configuration, curve: &CurveSpec, h: f64) -> f64 {
    let traj = lift_path(spec, q0, curve, &LiftOptions::with_step(h)).unwrap();
    let q = angles(traj.final_config());
    let e = effector(spec.lengths(), &q);
    let c = curve.end();
    (e[0] - c[0]).hypot(e[1] - c[1])
}

fn criterion_4() -> Outcome {
    let spec = ArmSpec::planar(vec![1.0]).unwrap();
    let circle = CurveSpec::arc([0.0, 0.0], 1.0, 0.0, 1.0, 1.0).unwrap();
    let traj = lift_path(&spec, &Configuration::from_angles(vec![0.0]), &circle, &LiftOptions::default()).unwrap();
    let q1 = traj.final_config().angles().unwrap()[0];
    let circle_ok = (q1 - 1.0).abs() <= CIRCLE_TOL && (traj.final_time() - 1.0).abs() < 1e-15;

    let a = vec![1.0, 1.3, 0.8];
    let spec = ArmSpec::planar(a.clone()).unwrap();
    let q0 = vec![0.2, 1.4, -0.9];
    let curve = generic_curve(effector(&a, &q0));
    let z0 = Configuration::from_angles(q0);
    let hs = [0.1, 0.05, 0.025, 0.0125];
    let errs: Vec<f64> = hs.iter().map(|&h| final_tracking(&spec, &z0, &curve, h)).collect();
    let order = log2_slope(&hs, &errs);
    outcome(
        circle_ok && order >= MIN_ORDER,
        format!(
            "circle |q(1) - 1| = {:.2e} (limit {CIRCLE_TOL:.0e}); tracking errors {:?} give order {order:.2} (min {MIN_ORDER})",
            (q1 - 1.0).abs(),
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()
        ),
    )
}

/// Real cross-ratio of four points on the circle, computed from angles.
fn cross_ratio(q: &[f64], [i, j, k, l]: [usize; 4]) -> f64 {
    let z = |t: f64| Complex64::from_polar(1.0, t);
    let (zi, zj, zk, zl) = (z(q[i]), z(q[j]), z(q[k]), z(q[l]));
    ((zi - zk) * (zj - zl) / ((zi - zl) * (zj - zk))).re
}

fn drift(traj: &LiftTrajectory, measure: impl Fn(&[f64]) -> f64) -> f64 {
    let v0 = measure(&angles(&traj.configs[0]));
    traj.configs.iter().map(|z| (measure(&angles(z)) - v0).abs()).fold(0.0, f64::max)
}

fn criterion_5() -> Outcome {
    let a = vec![1.0; 4];
    let spec = ArmSpec::planar(a.clone()).unwrap();

    // Two coincident components.
    let q_pair = vec![0.4, 0.4, 2.1, -1.2];
    let curve = generic_curve(effector(&a, &q_pair));
    let traj = lift_path(&spec, &Configuration::from_angles(q_pair), &curve, &LiftOptions::with_step(1e-3)).unwrap();
    let coincidence = traj
        .configs
        .iter()
        .map(|z| (z.vector(0) - z.vector(1)).norm())
        .fold(0.0, f64::max);

    // Four distinct components.
    let q = vec![0.3, 1.5, 2.7, -1.6];
    let quads = [[0, 1, 2, 3], [0, 2, 1, 3]];
    let z = Configuration::from_angles(q.clone());
    let curve = generic_curve(effector(&a, &q));
    let at = |h: f64| {
        let traj = lift_path(&spec, &z, &curve, &LiftOptions::with_step(h)).unwrap();
        quads.iter().map(|&c| drift(&traj, |q| cross_ratio(q, c))).fold(0.0, f64::max)
    };
    let fine = at(1e-3);
    let hs = [0.1, 0.05, 0.025, 0.0125];
    let errs: Vec<f64> = hs.iter().map(|&h| at(h)).collect();
    let order = log2_slope(&hs, &errs);
    outcome(
        coincidence < COINCIDENCE_DRIFT && fine < CROSS_RATIO_DRIFT && order >= MIN_ORDER,
        format!(
            "coincidence drift {coincidence:.2e} (limit {COINCIDENCE_DRIFT:.0e}); cross-ratio drift at h=1e-3 {fine:.2e} (limit {CROSS_RATIO_DRIFT:.0e}); drift order {order:.2} over {:?}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()
        ),
    )
}

/// `(α z + β) / (β̄ z + ᾱ)` on the unit circle.
fn homography(alpha: Complex64, beta: Complex64, z: Complex64) -> Complex64 {
    (alpha * z + beta) / (beta.conj() * z + alpha.conj())
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let (mut yes, mut worst_witness) = (0, 0.0f64);
    for _ in 0..1000 {
        let m = r.random_range(3..=7);
        let a: Vec<f64> = (0..m).map(|_| if r.random_bool(0.5) { 1.0 } else { 2.0 }).collect();
        let spec = ArmSpec::planar(a.clone()).unwrap();
        let q0: Vec<f64> = (0..m).map(|_| r.random_range(-PI..PI)).collect();
        let factors: Vec<(Complex64, Complex64)> = (0..spec.sharp())
            .map(|_| {
                let rad = r.random_range(0.0..1.0f64);
                (
                    Complex64::from_polar(rad.cosh(), r.random_range(0.0..TAU)),
                    Complex64::from_polar(rad.sinh(), r.random_range(0.0..TAU)),
                )
            })
            .collect();
        let q1: Vec<f64> = (0..m)
            .map(|j| {
                let (al, be) = factors[spec.class_of(j).unwrap()];
                homography(al, be, Complex64::from_polar(1.0, q0[j])).arg()
            })
            .collect();
        let z0 = Configuration::from_angles(q0);
        let z1 = Configuration::from_angles(q1);
        let report = reachable(&spec, &z0, &z1).unwrap();
        if report.verdict == Verdict::Yes {
            yes += 1;
        }
        if let Some(w) = &report.witness {
            for j in 0..m {
                let MoebiusElement::Planar(g) = &w.factors[spec.class_of(j).unwrap()] else { unreachable!() };
                let p = homography(g.a, g.b, Complex64::new(z0.vector(j)[0], z0.vector(j)[1]));
                worst_witness = worst_witness.max((p - Complex64::new(z1.vector(j)[0], z1.vector(j)[1])).norm());
            }
            let moved = act_group(w, &spec, &z0).unwrap();
            for j in 0..m {
                worst_witness = worst_witness.max((moved.vector(j) - z1.vector(j)).norm());
            }
        } else {
            worst_witness = f64::INFINITY;
        }
    }
    let spec = ArmSpec::unit_planar(3).unwrap();
    let flipped = reachable(
        &spec,
        &Configuration::from_angles(vec![0.0, 2.0, 4.0]),
        &Configuration::from_angles(vec![0.0, 4.0, 2.0]),
    )
    .unwrap()
    .verdict;
    outcome(
        yes == 1000 && flipped == Verdict::No && worst_witness <= WITNESS_TOL,
        format!("{yes}/1000 orbit pairs reachable; flipped triple -> {flipped:?}; worst witness residual {worst_witness:.2e} (limit {WITNESS_TOL:.0e})"),
    )
}

fn random_regular(r: &mut ChaCha8Rng, a: &[f64], clearance: f64) -> Vec<f64> {
    loop {
        let q: Vec<f64> = a.iter().map(|_| r.random_range(-PI..PI)).collect();
        let e = effector(a, &q);
        let s2: f64 = a.iter().map(|x| x * x).sum();
        if critical_distance(a, e[0].hypot(e[1])) > clearance && det_direct(a, &q) > 0.05 * s2 * s2 / a.len() as f64 {
            return q;
        }
    }
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let sides = [0.2, 0.1, 0.05, 0.025];
    let (mut settled, mut worst_final, mut worst_constant, mut worst_change) = (true, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let m = r.random_range(3..=6);
        let a: Vec<f64> = (0..m).map(|_| r.random_range(0.5..2.0)).collect();
        let q = random_regular(&mut r, &a, 0.4);
        let spec = ArmSpec::planar(a.clone()).unwrap();
        let gamma = 1.0 / det_direct(&a, &q);
        let z = Configuration::from_angles(q);
        let ratio: Vec<f64> = sides
            .iter()
            .map(|&s| (gamma_estimate(&spec, &z, s, &LiftOptions::default()).unwrap() - gamma) / gamma / s)
            .collect();
        let change = (ratio[3] - ratio[2]).abs();
        let previous = (ratio[2] - ratio[1]).abs();
        let small = change <= GAMMA_SETTLE_REL * ratio[3].abs() + GAMMA_SETTLE_ABS;
        let contracting = change <= GAMMA_CONTRACTION * previous;
        settled &= small || contracting;
        if !small {
            worst_change = worst_change.max(change / previous);
        }
        worst_final = worst_final.max(ratio[3].abs() * sides[3]);
        worst_constant = worst_constant.max(ratio.iter().fold(0.0f64, |acc, x| acc.max(x.abs())));
    }
    outcome(
        settled && worst_final <= GAMMA_FINAL_REL,
        format!(
            "20 arms, m in 3..=6: (gamma_hat - 1/det P)/(gamma s) bounded by {worst_constant:.2} and converging (settled within {GAMMA_SETTLE_REL} or contracting, worst contraction {worst_change:.2}, limit {GAMMA_CONTRACTION}); relative error at s=0.025 <= {worst_final:.2e} (limit {GAMMA_FINAL_REL})"
        ),
    )
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Counts from the existence rule `|P − N| < b < P + N` alone.
fn census_oracle(m: usize, b: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 1..m {
        let p = m - n;
        if (p as f64 - n as f64).abs() < b && b < m as f64 {
            out.push((n - 1, binomial(m, n)));
        }
    }
    out
}

const CENSUSES: [(usize, f64, &[(usize, usize)], Option<i64>); 5] = [
    (3, 2.0, &[(0, 3), (1, 3)], Some(0)),
    (4, 1.0, &[(1, 6)], Some(-6)),
    (4, 3.0, &[(0, 4), (1, 6), (2, 4)], Some(2)),
    (5, 0.5, &[], None),
    (5, 4.5, &[(0, 5), (1, 10), (2, 10), (3, 5)], None),
];

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (m, b, expected, euler) in CENSUSES {
        let start = Instant::now();
        let census = morse_census(m, b).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let got: Vec<(usize, usize)> = census.counts.iter().map(|(k, v)| (*k, *v)).collect();
        let this = got == expected && got == census_oracle(m, b) && euler.is_none_or(|e| e == census.euler) && secs < CENSUS_SECONDS;
        ok &= this;
        notes.push(format!("m={m} b={b}: {got:?} chi={} in {:.3}s", census.euler, secs));
    }
    outcome(ok, notes.join("; "))
}

/// Index from a finite-difference Hessian of `Σq − λ·f` restricted to `ker Df`.
fn index_oracle(q: &[f64]) -> usize {
    let m = q.len();
    let df = DMatrix::from_fn(2, m, |r, j| if r == 0 { -q[j].sin() } else { q[j].cos() });
    let u = DVector::from_element(m, 1.0);
    let lambda = (&df * df.transpose()).try_inverse().unwrap() * (&df * &u);
    let lagrangian = |x: &[f64]| -> f64 {
        let e = effector(&vec![1.0; m], x);
        x.iter().sum::<f64>() - lambda[0] * e[0] - lambda[1] * e[1]
    };
    let h = 1e-4;
    let mut hess = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let at = |di: f64, dj: f64| {
                let mut x = q.to_vec();
                x[i] += di;
                x[j] += dj;
                lagrangian(&x)
            };
            hess[(i, j)] = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
        }
    }
    // Π H Π has the kernel spectrum plus two zeros from the row space of Df.
    let proj = DMatrix::identity(m, m) - df.transpose() * (&df * df.transpose()).try_inverse().unwrap() * &df;
    let eig = SymmetricEigen::new(&proj * hess * &proj).eigenvalues;
    let scale = eig.amax();
    eig.iter().filter(|e| **e < -1e-6 * scale).count()
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut checked = 0;
    let mut notes = Vec::new();
    for (m, b, _, _) in CENSUSES {
        let points = critical_points(m, b).unwrap();
        for (n, cp) in points.iter().enumerate() {
            let q = cp.config.angles().unwrap();
            let report = morse_index(m, b, cp).unwrap();
            let oracle = index_oracle(q);
            ok &= report.index == cp.k.len() - 1 && cp.index == report.index && oracle == report.index;
            checked += 1;
            if n == 0 {
                let chart = report.chart.as_ref().map(|c| c.consistent);
                ok &= report.sign_pattern_ok && chart != Some(false);
                notes.push(format!("m={m} b={b}: s_u<0<s_v {} chart {:?}", report.sign_pattern_ok, chart));
            }
        }
    }
    outcome(ok, format!("{checked} critical points with index |K|-1 (library and finite-difference oracle agree); {}", notes.join("; ")))
}

fn criterion_10() -> Outcome {
    let sols = two_link_solutions(3f64.sqrt(), 1.0, [2.0, 0.0]).unwrap();
    let expected = [[FRAC_PI_6, -FRAC_PI_3], [-FRAC_PI_6, FRAC_PI_3]];
    let mut worst = 0.0f64;
    let mut matched = sols.len() == 2;
    for want in expected {
        let best = sols
            .iter()
            .map(|z| {
                let q = z.angles().unwrap();
                (q[0] - want[0]).abs().max((q[1] - want[1]).abs())
            })
            .fold(f64::INFINITY, f64::min);
        matched &= best <= TWO_LINK_TOL;
        worst = worst.max(best);
    }
    let spec = ArmSpec::planar(vec![3f64.sqrt(), 1.0]).unwrap();
    let mut hol = 0.0f64;
    for z in &sols {
        for side in [0.2, 0.05] {
            let rep = commutator_estimate(&spec, z, side, &LiftOptions::default()).unwrap();
            let d = rep.displacement.iter().map(|x| x * x).sum::<f64>().sqrt();
            hol = hol.max(d);
        }
    }
    outcome(
        matched && hol <= TRIVIAL_HOLONOMY,
        format!("{} solutions, worst gap to (pi/6,-pi/3),(-pi/6,pi/3) {worst:.1e} (limit {TWO_LINK_TOL:.0e}); largest loop displacement {hol:.1e} (limit {TRIVIAL_HOLONOMY:.0e})", sols.len()),
    )
}

/// Orthogonal-to-gradient part of the tangential displacement over its parallel part.
fn alignment_oracle(q: &[f64], disp: &[f64]) -> f64 {
    let m = q.len();
    let df = DMatrix::from_fn(2, m, |r, j| if r == 0 { -q[j].sin() } else { q[j].cos() });
    let pinv = df.transpose() * (&df * df.transpose()).try_inverse().unwrap();
    let project = |v: &DVector<f64>| v - &pinv * (&df * v);
    let grad = project(&DVector::from_element(m, 1.0));
    let tangential = project(&DVector::from_column_slice(disp));
    let unit = &grad / grad.norm();
    let par = tangential.dot(&unit);
    (tangential - unit * par).norm() / par.abs()
}

fn criterion_11() -> Outcome {
    let mut r = rng(11);
    let sides = [0.1, 0.05, 0.025, 0.0125];
    let mut ok = true;
    let mut worst_final = 0.0f64;
    let mut worst_shrink = 0.0f64;
    for i in 0..6 {
        // With m = 3 the fiber is a curve and alignment holds trivially.
        let m = 4 + i % 3;
        let a = vec![1.0; m];
        let spec = ArmSpec::unit_planar(m).unwrap();
        let q = random_regular(&mut r, &a, 0.3);
        let z = Configuration::from_angles(q.clone());
        let ratios: Vec<f64> = sides
            .iter()
            .map(|&s| {
                let rep = commutator_estimate(&spec, &z, s, &LiftOptions::default()).unwrap();
                let oracle = alignment_oracle(&q, &rep.displacement);
                let lib = rep.alignment.as_ref().unwrap().orthogonal_ratio;
                assert!((oracle - lib).abs() <= 1e-6 * oracle.max(1.0), "{oracle} vs {lib}");
                oracle
            })
            .collect();
        let shrink = ratios[3] / ratios[0];
        worst_shrink = worst_shrink.max(shrink);
        worst_final = worst_final.max(ratios[3]);
        ok &= ratios.windows(2).all(|w| w[1] < w[0]);
    }
    ok &= worst_shrink <= ALIGNMENT_SHRINK && worst_final <= ALIGNMENT_FINAL;
    outcome(
        ok,
        format!("6 unit arms, m in 4..=6: residual ratio decreasing in s, final/initial <= {worst_shrink:.3} (limit {ALIGNMENT_SHRINK}), at s=0.0125 <= {worst_final:.2e} (limit {ALIGNMENT_FINAL})"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Gram identity", criterion_1),
        ("flow identity", criterion_2),
        ("bracket tables", criterion_3),
        ("lift correctness", criterion_4),
        ("conservation laws", criterion_5),
        ("reachability oracle", criterion_6),
        ("holonomy curvature", criterion_7),
        ("Morse census", criterion_8),
        ("Morse indices", criterion_9),
        ("two-link arm", criterion_10),
        ("gradient alignment", criterion_11),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.ok { "PASS" } else { "FAIL" };
        if !result.ok {
            failed += 1;
        }
        println!("criterion {:>2} {tag} {name} [{:.2}s]: {}", n + 1, start.elapsed().as_secs_f64(), result.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
