//! Holonomy of horizontal lifts over closed loops and the small-square
//! commutator estimate.
//!
//! Lifting the counterclockwise square of side `s` at `b = f(q)` moves `q` by
//! `s² [ẽ₁, ẽ₂]_q + o(s²)`, where `ẽ_k` are the horizontal lifts of the
//! coordinate fields and the bracket is `[F, G] = DG·F − DF·G`. Decomposing
//! the bracket on `AC, AS, A²` gives an `A²` coefficient equal to `1/det P`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::arm::{angle_jacobian, eval_arm, gram, ArmSpec, Configuration};
use crate::error::{Error, Result};
use crate::lift::{kernel_basis, lift_path, CurveSpec, LiftOptions};
use crate::moebius::fields::{lie_bracket_numeric, planar_field, PlanarField};
use crate::morse::grad_rho_b;

/// End of the horizontal lift of a closed loop.
pub fn holonomy_map(spec: &ArmSpec, lp: &CurveSpec, q0: &Configuration, opts: &LiftOptions) -> Result<Configuration> {
    if !lp.is_closed() {
        return Err(Error::invalid("holonomy needs a closed loop"));
    }
    Ok(lift_path(spec, q0, lp, opts)?.final_config().clone())
}

/// Horizontal lift `Dfᵀ P⁻¹ e_k` of a coordinate field, in angle coordinates.
/// NaN when `P` is singular.
pub fn lifted_coordinate_field(a: &[f64], q: &[f64], k: usize) -> DVector<f64> {
    let df = angle_jacobian(a, q);
    let p = &df * df.transpose();
    let det = p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)];
    let col = if k == 0 {
        DVector::from_vec(vec![p[(1, 1)], -p[(1, 0)]])
    } else {
        DVector::from_vec(vec![-p[(0, 1)], p[(0, 0)]])
    };
    df.transpose() * (col / det)
}

/// `[ẽ₁, ẽ₂]_q` by central differences.
pub fn lifted_bracket(a: &[f64], q: &[f64]) -> DVector<f64> {
    let x = DVector::from_column_slice(q);
    lie_bracket_numeric(
        |p| lifted_coordinate_field(a, p.as_slice(), 0),
        |p| lifted_coordinate_field(a, p.as_slice(), 1),
        &x,
    )
}

/// Coefficients of `w = α AC + β AS + γ A²` by least squares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `‖w − (α AC + β AS + γ A²)‖ / ‖w‖`.
    pub residual: f64,
}

pub fn decompose(a: &[f64], q: &[f64], w: &DVector<f64>) -> Result<Decomposition> {
    let m = q.len();
    if m < 3 {
        return Err(Error::DegenerateDecomposition(format!(
            "AC, AS, A² cannot be independent in ℝ^{m}: the fiber is discrete and carries no holonomy"
        )));
    }
    let cols = [
        planar_field(a, q, PlanarField::AkC(1)),
        planar_field(a, q, PlanarField::AkS(1)),
        planar_field(a, q, PlanarField::Ak(2)),
    ];
    let basis = DMatrix::from_columns(&cols);
    let svd = basis.clone().svd(true, true);
    let top = svd.singular_values.max();
    let low = svd.singular_values.min();
    if !(low > 1e-8 * top) {
        return Err(Error::DegenerateDecomposition(format!(
            "AC, AS, A² are dependent at this configuration (singular values {:.3e} / {:.3e})",
            low, top
        )));
    }
    let c = svd
        .solve(w, 1e-12 * top)
        .map_err(|e| Error::DegenerateDecomposition(e.to_string()))?;
    let fitted = &basis * &c;
    let scale = w.norm();
    let residual = if scale > 0.0 { (w - fitted).norm() / scale } else { 0.0 };
    Ok(Decomposition {
        alpha: c[0],
        beta: c[1],
        gamma: c[2],
        residual,
    })
}

/// How well a displacement follows `grad ρ_b` inside `T_q M_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub grad_rho: Vec<f64>,
    /// Angle between the tangential displacement and the gradient line.
    pub angle: f64,
    /// Tangential part orthogonal to the gradient, over the parallel part.
    pub orthogonal_ratio: f64,
}

pub fn alignment(spec: &ArmSpec, q: &[f64], displacement: &DVector<f64>) -> Result<Alignment> {
    let g = grad_rho_b(spec, &Configuration::from_angles(q.to_vec()))?;
    let k = kernel_basis(spec, q);
    let tangential = &k * (k.transpose() * displacement);
    let gn = g.norm();
    if gn == 0.0 {
        return Err(Error::DegenerateDecomposition("grad ρ_b vanishes here".into()));
    }
    let unit = &g / gn;
    let parallel = tangential.dot(&unit);
    let orth = (&tangential - &unit * parallel).norm();
    Ok(Alignment {
        grad_rho: g.iter().copied().collect(),
        angle: orth.atan2(parallel.abs()),
        orthogonal_ratio: orth / parallel.abs(),
    })
}

fn equal_positive_lengths(spec: &ArmSpec) -> bool {
    spec.sharp() == 1 && spec.zero_segments().is_empty()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyReport {
    #[serde(rename = "loop")]
    pub lp: CurveSpec,
    pub side: f64,
    pub basepoint: Vec<f64>,
    pub start: Configuration,
    pub end: Configuration,
    /// `c̃(4s) − q` in angle coordinates.
    pub displacement: Vec<f64>,
    /// `s² [ẽ₁, ẽ₂]_q`.
    pub commutator_prediction: Vec<f64>,
    /// `A²` coefficient of the displacement over `s²`; absent for `m < 3`.
    pub gamma_estimate: Option<f64>,
    pub decomposition: Option<Decomposition>,
    pub det_gram: f64,
    /// `1 / det P`.
    pub gamma_theory: f64,
    /// Present for arms whose segments all have one positive length.
    pub alignment: Option<Alignment>,
    pub tracking_error: f64,
}

/// Lift the square loop of side `s` based at `f(q)` and compare the
/// displacement with the bracket prediction.
pub fn commutator_estimate(spec: &ArmSpec, q: &Configuration, side: f64, opts: &LiftOptions) -> Result<HolonomyReport> {
    spec.require_planar()?;
    spec.check(q)?;
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::invalid("square side must be positive"));
    }
    let angles = q.planar_angles()?.to_vec();
    let b = eval_arm(spec, q)?;
    let lp = CurveSpec::square_loop([b[0], b[1]], side)?;
    let traj = lift_path(spec, q, &lp, opts)?;
    let end = traj.final_config().clone();
    let end_angles = end.planar_angles()?;
    let displacement = DVector::from_fn(angles.len(), |j, _| end_angles[j] - angles[j]);

    let a = spec.lengths();
    let prediction = lifted_bracket(a, &angles) * (side * side);
    let decomposition = decompose(a, &angles, &displacement).ok();
    let gamma_estimate = decomposition.as_ref().map(|d| d.gamma / (side * side));
    let det = gram(spec, q)?.det;
    let alignment = if equal_positive_lengths(spec) && angles.len() >= 3 {
        alignment(spec, &angles, &displacement).ok()
    } else {
        None
    };

    Ok(HolonomyReport {
        lp,
        side,
        basepoint: b.iter().copied().collect(),
        start: q.clone(),
        end,
        displacement: displacement.iter().copied().collect(),
        commutator_prediction: prediction.iter().copied().collect(),
        gamma_estimate,
        decomposition,
        det_gram: det,
        gamma_theory: 1.0 / det,
        alignment,
        tracking_error: traj.final_tracking_error(),
    })
}

/// `γ` estimate alone; fails when the decomposition is not available.
pub fn gamma_estimate(spec: &ArmSpec, q: &Configuration, side: f64, opts: &LiftOptions) -> Result<f64> {
    let angles = q.planar_angles()?.to_vec();
    let report = commutator_estimate(spec, q, side, opts)?;
    match report.gamma_estimate {
        Some(g) => Ok(g),
        None => {
            let d = DVector::from_vec(report.displacement);
            decompose(spec.lengths(), &angles, &d).map(|x| x.gamma / (side * side))
        }
    }
}
