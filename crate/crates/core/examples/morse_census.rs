//! Critical points of `ρ̃ = Σ q_j` on fibers of the unit-length planar arm.

use armlift::morse::{critical_points, morse_census, morse_index};

fn main() -> armlift::Result<()> {
    for (m, b) in [(3, 2.0), (4, 1.0), (4, 3.0), (5, 0.5), (5, 4.5)] {
        let c = morse_census(m, b)?;
        println!("m = {m}, b = {b}: counts {:?}, Euler characteristic {}", c.counts, c.euler);
    }

    let (m, b) = (4, 3.0);
    println!("\ncritical points for m = {m}, b = {b}:");
    for cp in critical_points(m, b)? {
        let ix = morse_index(m, b, &cp)?;
        println!(
            "  K = {:?}  index {}  rho = {:.6}  Hessian spectrum {:.3?}",
            cp.k, ix.index, cp.rho_lift, ix.hessian.eigenvalues
        );
    }
    Ok(())
}
