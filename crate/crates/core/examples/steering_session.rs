//! Steer an arm in process: move the target around a square and look at the
//! configuration change left behind.

use armlift::session::{Session, SessionSettings};
use armlift::{ArmSpec, Configuration};

fn main() -> armlift::Result<()> {
    let spec = ArmSpec::unit_planar(4)?;
    let settings = SessionSettings { speed_cap: 0.5, tick_rate: 30.0, ..SessionSettings::default() };
    let dt = 1.0 / settings.tick_rate;
    let mut s = Session::create("demo", spec, Configuration::from_angles(vec![0.4, 1.7, -0.6, 2.5]), settings)?;
    let b = s.effector();
    let side = 0.2;
    for corner in [[b[0] + side, b[1]], [b[0] + side, b[1] + side], [b[0], b[1] + side], b] {
        s.set_target(corner)?;
        let mut ticks = 0;
        loop {
            let f = s.tick(dt)?;
            ticks += 1;
            if (f.effector[0] - corner[0]).hypot(f.effector[1] - corner[1]) < 1e-10 {
                println!("reached [{:.3}, {:.3}] after {ticks} ticks, det P = {:.4}", corner[0], corner[1], f.det_p);
                break;
            }
        }
    }
    let snap = s.holonomy_snapshot()?;
    println!("back at the base point; joint displacement {:.3?} (norm {:.2e})", snap.displacement, snap.norm);
    if let Some(a) = snap.alignment {
        println!("orthogonal/parallel to grad rho_b: {:.2e}", a.orthogonal_ratio);
    }
    Ok(())
}
