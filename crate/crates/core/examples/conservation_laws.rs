//! Moebius invariants along a horizontal lift.
//!
//! Equal-length components that coincide stay together, and cross-ratios of
//! equal-length components do not move, while the configuration itself does.

use armlift::arm::eval_arm;
use armlift::lift::{lift_path, monitor_invariants, CurveSpec, LiftOptions};
use armlift::moebius::invariants::CrossRatioKind;
use armlift::{ArmSpec, Configuration};

fn main() -> armlift::Result<()> {
    let spec = ArmSpec::planar(vec![1.0, 1.0, 1.0, 1.0, 2.0])?;
    let z = Configuration::from_angles(vec![0.3, 1.5, 1.5, -1.6, 2.6]);
    let b = eval_arm(&spec, &z)?;
    let path = CurveSpec::arc([b[0] - 0.4, b[1]], 0.4, 0.0, 2.0, 2.0)?;

    for h in [0.1, 0.05, 0.025, 1e-3] {
        let traj = lift_path(&spec, &z, &path, &LiftOptions::with_step(h))?;
        let drift = monitor_invariants(&spec, &traj);
        println!(
            "h = {h:<6} coincidence drift {:.1e}  cross-ratio drift {:.1e}  orientation constant {}",
            drift.max_coincidence_drift(),
            drift.max_cross_ratio_drift(CrossRatioKind::Real),
            drift.orientations_constant()
        );
        if h == 1e-3 {
            let q0 = z.angles().unwrap();
            let q1 = traj.final_config().angles().unwrap();
            let moved: f64 = q0.iter().zip(q1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            println!("largest joint motion {moved:.3} rad");
        }
    }
    Ok(())
}
