//! One-parameter Moebius flows `Γ_t^s` and the gradient fields they integrate.

use nalgebra::DVector;
use num_complex::Complex64;

/// `Γ_t^s(z) = (cosh(t/2) z + s sinh(t/2)) / (s̄ sinh(t/2) z + cosh(t/2))`.
pub fn flow_gamma_planar(s: Complex64, t: f64, z: Complex64) -> Complex64 {
    let (sh, ch) = ((t / 2.0).sinh(), (t / 2.0).cosh());
    let w = (z * ch + s * sh) / (s.conj() * sh * z + ch);
    w / w.norm()
}

/// `Γ_t^s` on `S^{d-1}`, reduced to the plane spanned by `s` and `x`.
///
/// Writing `x = cos θ s + sin θ w`, the flow keeps `w` and moves the angle by
/// `tan(θ'/2) = e^{-t} tan(θ/2)`. The points `±s` are fixed.
pub fn flow_gamma(s: &DVector<f64>, t: f64, x: &DVector<f64>) -> DVector<f64> {
    let c = x.dot(s);
    let perp = x - s * c;
    let sin_theta = perp.norm();
    if sin_theta < 1e-300 {
        return x.clone();
    }
    let w = perp / sin_theta;
    let theta = sin_theta.atan2(c);
    let half = theta / 2.0;
    let theta_new = 2.0 * ((-t).exp() * half.sin()).atan2(half.cos());
    let out = s * theta_new.cos() + w * theta_new.sin();
    let n = out.norm();
    out / n
}

/// `grad g_s (x) = s − ⟨x, s⟩ x`, the gradient of `g_s = ⟨·, s⟩` on the sphere.
pub fn sphere_gradient(s: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    s - x * x.dot(s)
}

/// Generator of the rotation in the oriented plane `(s, s')`: `⟨x,s⟩ s' − ⟨x,s'⟩ s`.
pub fn rotation_field(s: &DVector<f64>, s_prime: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    s_prime * x.dot(s) - s * x.dot(s_prime)
}

/// Embed a complex number as a vector of `ℝ²`.
pub fn complex_to_vec(z: Complex64) -> DVector<f64> {
    DVector::from_vec(vec![z.re, z.im])
}

pub fn vec_to_complex(v: &DVector<f64>) -> Complex64 {
    Complex64::new(v[0], v[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn planar_flow_fixed_points_and_identity() {
        let s = Complex64::from_polar(1.0, 0.4);
        let z = Complex64::from_polar(1.0, 2.2);
        assert!((flow_gamma_planar(s, 0.0, z) - z).norm() < 1e-15);
        for t in [-3.0, 0.5, 7.0] {
            // The repelling point loses digits to cosh − sinh cancellation.
            assert!((flow_gamma_planar(s, t, s) - s).norm() < 1e-14);
            assert!((flow_gamma_planar(s, t, -s) + s).norm() < 1e-11);
        }
    }

    #[test]
    fn planar_flow_at_i() {
        let w = flow_gamma_planar(Complex64::new(1.0, 0.0), 1.0, Complex64::new(0.0, 1.0));
        let expect = Complex64::new(1f64.sinh(), 1.0) / 1f64.cosh();
        assert!((w - expect).norm() < 1e-15);
    }

    #[test]
    fn sphere_flow_fixed_and_limit() {
        let s = v(&[1.0, 0.0, 0.0]);
        assert!((flow_gamma(&s, 2.0, &s) - &s).norm() < 1e-15);
        let x = v(&[0.0, 1.0, 0.0]);
        let mut prev = -1.0;
        for t in [0.0, 1.0, 5.0, 20.0, 40.0] {
            let y = flow_gamma(&s, t, &x);
            let g = y.dot(&s);
            assert!(g >= prev);
            prev = g;
        }
        assert!((flow_gamma(&s, 40.0, &x) - &s).norm() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let s = v(&[0.0, 0.0, 1.0]);
        assert!(sphere_gradient(&s, &s).norm() < 1e-15);
        let x = v(&[1.0, 0.0, 0.0]);
        assert!((sphere_gradient(&s, &x) - &s).norm() < 1e-15);
    }
}
