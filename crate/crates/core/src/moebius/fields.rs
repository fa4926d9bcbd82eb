//! Planar vector fields on `ℝ^m` and a finite-difference Lie bracket.
//!
//! Bracket convention: `[F, G] = DG·F − DF·G`. With it, `[C, S] = U` and
//! `[AC, AS] = A²`.

use nalgebra::DVector;

use crate::arm::ArmSpec;
use crate::error::Result;

/// Central-difference step for [`lie_bracket_numeric`].
pub const BRACKET_STEP: f64 = 1e-5;

/// The fields `S, C, U` and the length-weighted families `A^k, A^k S, A^k C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanarField {
    S,
    C,
    U,
    Ak(u32),
    AkS(u32),
    AkC(u32),
}

pub fn planar_fields(spec: &ArmSpec, q: &[f64], which: PlanarField) -> Result<DVector<f64>> {
    spec.require_planar()?;
    if q.len() != spec.m() {
        return Err(crate::Error::dims(format!("q has {} entries, arm has {}", q.len(), spec.m())));
    }
    Ok(planar_field(spec.lengths(), q, which))
}

pub(crate) fn planar_field(a: &[f64], q: &[f64], which: PlanarField) -> DVector<f64> {
    let weight = |j: usize, k: u32| a[j].powi(k as i32);
    DVector::from_fn(q.len(), |j, _| match which {
        PlanarField::S => q[j].sin(),
        PlanarField::C => q[j].cos(),
        PlanarField::U => 1.0,
        PlanarField::Ak(k) => weight(j, k),
        PlanarField::AkS(k) => weight(j, k) * q[j].sin(),
        PlanarField::AkC(k) => weight(j, k) * q[j].cos(),
    })
}

/// `grad X^a = −AS`.
pub fn grad_x(a: &[f64], q: &[f64]) -> DVector<f64> {
    -planar_field(a, q, PlanarField::AkS(1))
}

/// `grad Y^a = AC`.
pub fn grad_y(a: &[f64], q: &[f64]) -> DVector<f64> {
    planar_field(a, q, PlanarField::AkC(1))
}

/// `(DG·F − DF·G)(x)` with directional central differences of step `h`.
///
/// Fields on spheres are handled through any smooth ambient extension: the
/// bracket of two tangent fields does not depend on how they are extended.
pub fn lie_bracket_numeric_with_step<F, G>(f: F, g: G, x: &DVector<f64>, h: f64) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    let fx = f(x);
    let gx = g(x);
    let dg_f = (g(&(x + &fx * h)) - g(&(x - &fx * h))) / (2.0 * h);
    let df_g = (f(&(x + &gx * h)) - f(&(x - &gx * h))) / (2.0 * h);
    dg_f - df_g
}

pub fn lie_bracket_numeric<F, G>(f: F, g: G, x: &DVector<f64>) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    lie_bracket_numeric_with_step(f, g, x, BRACKET_STEP)
}
