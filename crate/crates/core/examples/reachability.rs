//! Which configurations can reach each other horizontally.

use num_complex::Complex64;

use armlift::moebius::{act_group, reachable, GroupElement, MoebiusElement, SU11Element};
use armlift::{ArmSpec, Configuration};

fn report(name: &str, spec: &ArmSpec, z0: &Configuration, z1: &Configuration) -> armlift::Result<()> {
    let r = reachable(spec, z0, z1)?;
    println!("{name}: {:?}", r.verdict);
    for c in &r.classes {
        println!("  class {} (length {}): {:?}, {}", c.class, c.length, c.verdict, c.reason);
    }
    Ok(())
}

fn main() -> armlift::Result<()> {
    let spec = ArmSpec::planar(vec![1.0, 1.0, 1.0, 2.0, 2.0])?;
    let z0 = Configuration::from_angles(vec![0.1, 1.9, 3.8, -0.7, 2.2]);

    let g = GroupElement::new(vec![
        MoebiusElement::Planar(SU11Element::new(Complex64::from_polar(1.3, 0.4), Complex64::from_polar(0.83, -1.0))?),
        MoebiusElement::Planar(SU11Element::translation(Complex64::new(0.0, 1.0), 0.9)),
    ]);
    let z1 = act_group(&g, &spec, &z0)?;
    report("g . z0", &spec, &z0, &z1)?;

    let r = reachable(&spec, &z0, &z1)?;
    let w = act_group(r.witness.as_ref().unwrap(), &spec, &z0)?;
    let residual = (0..spec.m()).map(|j| (w.vector(j) - z1.vector(j)).norm()).fold(0.0, f64::max);
    println!("  witness residual {residual:.1e}");

    let spec3 = ArmSpec::unit_planar(3)?;
    report(
        "flipped triple",
        &spec3,
        &Configuration::from_angles(vec![0.0, 2.0, 4.0]),
        &Configuration::from_angles(vec![0.0, 4.0, 2.0]),
    )?;
    report(
        "broken coincidence",
        &spec3,
        &Configuration::from_angles(vec![0.5, 0.5, 2.0]),
        &Configuration::from_angles(vec![0.5, 0.6, 2.0]),
    )?;
    Ok(())
}
