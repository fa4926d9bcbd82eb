//! Holonomy of small square loops: the displacement approaches
//! `s² [ẽ₁, ẽ₂]` and its `A²` part recovers `1 / det P`.

use armlift::holonomy::commutator_estimate;
use armlift::lift::LiftOptions;
use armlift::{ArmSpec, Configuration};

fn main() -> armlift::Result<()> {
    let spec = ArmSpec::planar(vec![1.0, 1.4, 0.7, 1.1])?;
    let q = Configuration::from_angles(vec![0.2, 1.7, -0.9, 2.6]);
    println!("side     gamma_hat    1/det P      |disp - s^2 bracket|");
    for s in [0.2, 0.1, 0.05, 0.025] {
        let r = commutator_estimate(&spec, &q, s, &LiftOptions::default())?;
        let gap = r
            .displacement
            .iter()
            .zip(&r.commutator_prediction)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        println!("{s:<8} {:<12.6} {:<12.6} {gap:.2e}", r.gamma_estimate.unwrap(), r.gamma_theory);
    }

    let unit = ArmSpec::unit_planar(5)?;
    let q = Configuration::from_angles(vec![0.4, 1.2, 2.9, -1.4, -0.3]);
    println!("\nequal lengths: displacement against grad rho_b");
    for s in [0.1, 0.05, 0.025] {
        let r = commutator_estimate(&unit, &q, s, &LiftOptions::default())?;
        println!("s = {s:<6} orthogonal/parallel = {:.2e}", r.alignment.unwrap().orthogonal_ratio);
    }
    Ok(())
}
