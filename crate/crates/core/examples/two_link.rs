//! A two-link arm has a discrete fiber: two elbow solutions and no holonomy.

use armlift::arm::two_link_solutions;
use armlift::holonomy::commutator_estimate;
use armlift::lift::LiftOptions;
use armlift::ArmSpec;

fn main() -> armlift::Result<()> {
    let a = 3f64.sqrt();
    let spec = ArmSpec::planar(vec![a, 1.0])?;
    for z in two_link_solutions(a, 1.0, [2.0, 0.0])? {
        let q = z.angles().unwrap().to_vec();
        let r = commutator_estimate(&spec, &z, 0.2, &LiftOptions::default())?;
        let d = r.displacement.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!(
            "q = ({:+.6}, {:+.6}) = ({:+.4} pi, {:+.4} pi)   square-loop displacement {d:.1e}",
            q[0],
            q[1],
            q[0] / std::f64::consts::PI,
            q[1] / std::f64::consts::PI
        );
    }
    Ok(())
}
