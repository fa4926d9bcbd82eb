//! The Moebius flows on spheres and the bracket relations of the planar fields.

use nalgebra::DVector;
use num_complex::Complex64;

use armlift::moebius::{flow_gamma, flow_gamma_planar, lie_bracket_numeric, planar_fields, PlanarField, SU11Algebra};
use armlift::ArmSpec;

fn main() -> armlift::Result<()> {
    let s = DVector::from_vec(vec![0.0, 0.0, 1.0]);
    let x = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    for t in [0.0, 0.5, 1.0, 3.0] {
        let y = flow_gamma(&s, t, &x);
        println!("Gamma_t^s(x) at t = {t}: [{:.4}, {:.4}, {:.4}]", y[0], y[1], y[2]);
    }
    let z = flow_gamma_planar(Complex64::new(0.0, 1.0), 1.0, Complex64::new(1.0, 0.0));
    println!("planar flow toward i from 1 after t = 1: {z:.4}");

    let c = SU11Algebra::c_tilde();
    let sv = SU11Algebra::s_tilde();
    let u = c.bracket(&sv);
    println!("[C~, S~] = (u {:.3}, b {:.3})", u.u, u.b);

    let spec = ArmSpec::planar(vec![1.0, 2.0, 1.0, 2.0])?;
    let q = DVector::from_vec(vec![0.3, -1.1, 2.0, 0.7]);
    let spec = &spec;
    let field = |which| move |p: &DVector<f64>| planar_fields(spec, p.as_slice(), which).unwrap();
    let pairs = [
        ("[AC, AS]", PlanarField::AkC(1), PlanarField::AkS(1), PlanarField::Ak(2), 1.0),
        ("[A2, AC]", PlanarField::Ak(2), PlanarField::AkC(1), PlanarField::AkS(3), -1.0),
        ("[A2, AS]", PlanarField::Ak(2), PlanarField::AkS(1), PlanarField::AkC(3), 1.0),
        ("[AC, A3S]", PlanarField::AkC(1), PlanarField::AkS(3), PlanarField::Ak(4), 1.0),
    ];
    for (name, f, g, want, sign) in pairs {
        let got = lie_bracket_numeric(field(f), field(g), &q);
        let expected = field(want)(&q) * sign;
        println!("{name}: finite-difference gap {:.1e}", (got - expected).norm());
    }
    Ok(())
}
