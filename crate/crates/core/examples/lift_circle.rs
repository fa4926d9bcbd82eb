//! Lift an end-effector path and write the trajectory as CSV.
//!
//! A single unit link following the unit circle turns at unit rate, so the
//! final angle equals the elapsed time. A three-link arm then follows a
//! quarter arc and a straight return.

use armlift::lift::{lift_path, write_csv, CurveSpec, LiftOptions};
use armlift::{ArmSpec, Configuration};

fn main() -> armlift::Result<()> {
    let spec = ArmSpec::planar(vec![1.0])?;
    let circle = CurveSpec::arc([0.0, 0.0], 1.0, 0.0, 1.0, 1.0)?;
    let traj = lift_path(&spec, &Configuration::from_angles(vec![0.0]), &circle, &LiftOptions::default())?;
    let q = traj.final_config().angles().unwrap()[0];
    println!("single link: q(1) = {q:.12}  (|q - 1| = {:.1e})", (q - 1.0).abs());

    let spec = ArmSpec::planar(vec![1.0, 0.8, 0.5])?;
    let q0 = Configuration::from_angles(vec![0.3, 1.2, -0.4]);
    let b = armlift::arm::eval_arm(&spec, &q0)?;
    let r = 0.3;
    let arc = CurveSpec::arc([b[0] - r, b[1]], r, 0.0, std::f64::consts::FRAC_PI_2, 1.0)?;
    let back = CurveSpec::polyline(vec![arc.end().iter().copied().collect(), vec![b[0], b[1]]], vec![0.0, 0.5])?;
    let path = arc.then(&back)?;
    let traj = lift_path(&spec, &q0, &path, &LiftOptions::with_step(0.05))?;
    println!(
        "three links: {} samples, max tracking error {:.2e}, final q = {:?}",
        traj.len(),
        traj.max_tracking_error(),
        traj.final_config().angles().unwrap()
    );
    let mut out = std::io::stdout().lock();
    write_csv(&traj, &mut out)?;
    Ok(())
}
