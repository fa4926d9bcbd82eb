//! SU(1,1) acting on the unit circle by homographies.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::invariants::{check_distinct, orientation};
use crate::arm::STRUCTURAL_TOL;
use crate::error::{Error, Result};

/// The matrix `[[a, b], [b̄, ā]]` with `|a|² − |b|² = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SU11Element {
    pub a: Complex64,
    pub b: Complex64,
}

impl SU11Element {
    pub fn identity() -> Self {
        SU11Element {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Build from `(a, b)`, rescaling onto `|a|² − |b|² = 1`.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let det = a.norm_sqr() - b.norm_sqr();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::invalid(format!("|a|^2 - |b|^2 = {det} is not positive")));
        }
        let k = det.sqrt().recip();
        Ok(SU11Element { a: a * k, b: b * k })
    }

    /// Rotation `z ↦ e^{iφ} z`.
    pub fn rotation(phi: f64) -> Self {
        SU11Element {
            a: Complex64::from_polar(1.0, phi / 2.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// `Exp(t C_s)`, whose homography is the flow `Γ_t^s`.
    pub fn translation(s: Complex64, t: f64) -> Self {
        let s = s / s.norm();
        SU11Element {
            a: Complex64::new((t / 2.0).cosh(), 0.0),
            b: s * (t / 2.0).sinh(),
        }
    }

    pub fn determinant_defect(&self) -> f64 {
        (self.a.norm_sqr() - self.b.norm_sqr() - 1.0).abs()
    }

    /// Matrix product `self · other`, i.e. apply `other` first.
    pub fn compose(&self, other: &SU11Element) -> SU11Element {
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        // Renormalize to stop drift over long products.
        SU11Element::new(a, b).unwrap_or(SU11Element { a, b })
    }

    pub fn inverse(&self) -> SU11Element {
        SU11Element {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.a, self.b], [self.b.conj(), self.a.conj()]]
    }

    /// The homography `(a z + b) / (b̄ z + ā)` on a point of the unit circle.
    pub fn act(&self, z: Complex64) -> Complex64 {
        let w = (self.a * z + self.b) / (self.b.conj() * z + self.a.conj());
        w / w.norm()
    }
}

/// An element `[[iu, b], [b̄, −iu]]` of the Lie algebra su(1,1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SU11Algebra {
    pub u: f64,
    pub b: Complex64,
}

impl SU11Algebra {
    /// `C̃`, generating the flow with stable point `i`.
    pub fn c_tilde() -> Self {
        SU11Algebra {
            u: 0.0,
            b: Complex64::new(0.0, 0.5),
        }
    }

    /// `S̃`, generating the flow with stable point `1`.
    pub fn s_tilde() -> Self {
        SU11Algebra {
            u: 0.0,
            b: Complex64::new(0.5, 0.0),
        }
    }

    /// `Ũ`, generating rotations.
    pub fn u_tilde() -> Self {
        SU11Algebra {
            u: 0.5,
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// `C_s = [[0, s/2], [s̄/2, 0]]`.
    pub fn c_s(s: Complex64) -> Self {
        SU11Algebra {
            u: 0.0,
            b: s / s.norm() * 0.5,
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let iu = Complex64::new(0.0, self.u);
        [[iu, self.b], [self.b.conj(), -iu]]
    }

    pub fn scale(&self, k: f64) -> Self {
        SU11Algebra {
            u: self.u * k,
            b: self.b * k,
        }
    }

    /// Matrix commutator `XY − YX`.
    pub fn bracket(&self, other: &SU11Algebra) -> SU11Algebra {
        let x = self.matrix();
        let y = other.matrix();
        let xy = mat_mul(&x, &y);
        let yx = mat_mul(&y, &x);
        SU11Algebra {
            u: (xy[0][0] - yx[0][0]).im,
            b: xy[0][1] - yx[0][1],
        }
    }

    /// `exp(tX)` in closed form: `X² = δ I` with `δ = |b|² − u²`.
    pub fn exp(&self, t: f64) -> SU11Element {
        let delta = self.b.norm_sqr() - self.u * self.u;
        let (c, k) = if delta > 1e-300 {
            let r = delta.sqrt();
            ((t * r).cosh(), (t * r).sinh() / r)
        } else if delta < -1e-300 {
            let r = (-delta).sqrt();
            ((t * r).cos(), (t * r).sin() / r)
        } else {
            (1.0, t)
        };
        let a = Complex64::new(c, 0.0) + Complex64::new(0.0, self.u) * k;
        let b = self.b * k;
        SU11Element::new(a, b).unwrap_or(SU11Element { a, b })
    }

    /// Infinitesimal action on the circle, `d/dt exp(tX)·z` at `t = 0`,
    /// as a complex tangent vector at `z`.
    pub fn field_at(&self, z: Complex64) -> Complex64 {
        let iu = Complex64::new(0.0, self.u);
        self.b + iu * z * 2.0 - self.b.conj() * z * z
    }
}

fn mat_mul(x: &[[Complex64; 2]; 2], y: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = x[r][0] * y[0][c] + x[r][1] * y[1][c];
        }
    }
    out
}

fn mat_adj(x: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [[x[1][1], -x[0][1]], [-x[1][0], x[0][0]]]
}

pub fn act_homography(g: &SU11Element, z: Complex64) -> Complex64 {
    g.act(z)
}

/// The Moebius map sending `(z1, z2, z3)` to `(∞, 0, 1)`.
fn to_standard_triple(z: [Complex64; 3]) -> [[Complex64; 2]; 2] {
    let [z1, z2, z3] = z;
    [[z3 - z1, -z2 * (z3 - z1)], [z3 - z2, -z1 * (z3 - z2)]]
}

/// The orientation-preserving circle homography sending `w_i` to `v_i`.
///
/// Both triples must be pairwise distinct and carry the same orientation.
pub fn moebius_through_triple(w: [Complex64; 3], v: [Complex64; 3]) -> Result<SU11Element> {
    for triple in [&w, &v] {
        check_distinct(&triple[..])?;
    }
    if orientation(w[0], w[1], w[2])? != orientation(v[0], v[1], v[2])? {
        return Err(Error::OrientationMismatch);
    }
    let m = mat_mul(&mat_adj(&to_standard_triple(v)), &to_standard_triple(w));
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let k = det.sqrt().inv();
    let a = m[0][0] * k;
    let b = m[0][1] * k;
    let g = SU11Element::new(a, b)?;
    let defect = (m[1][1] * k - a.conj()).norm() + (m[1][0] * k - b.conj()).norm();
    if defect > 1e-6 * (1.0 + a.norm()) {
        return Err(Error::OrientationMismatch);
    }
    debug_assert!(g.determinant_defect() < STRUCTURAL_TOL * (1.0 + g.a.norm_sqr()));
    Ok(g)
}
