use std::io::Write;

use super::integrate::LiftTrajectory;
use crate::error::{Error, Result};

/// CSV with columns `t, q_1..q_m` (planar) or `z_j_k` components, then
/// `tracking_error, det_gram`.
pub fn write_csv<W: Write>(traj: &LiftTrajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::invalid(format!("writing CSV: {e}"));
    let Some(first) = traj.configs.first() else {
        return Ok(());
    };

    let mut header = vec!["t".to_string()];
    if first.angles().is_some() {
        header.extend((1..=first.m()).map(|j| format!("q_{j}")));
    } else {
        for j in 1..=first.m() {
            header.extend((1..=first.dim()).map(|k| format!("z_{j}_{k}")));
        }
    }
    header.push("tracking_error".into());
    header.push("det_gram".into());
    w.write_record(&header).map_err(io)?;

    for ((t, z), d) in traj.times.iter().zip(&traj.configs).zip(&traj.diagnostics) {
        let mut row = vec![t.to_string()];
        match z.angles() {
            Some(q) => row.extend(q.iter().map(f64::to_string)),
            None => row.extend(z.vectors().iter().flat_map(|v| v.iter().map(f64::to_string))),
        }
        row.push(d.tracking_error.to_string());
        row.push(d.det_gram.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("writing CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arm::{ArmSpec, Configuration};
    use crate::lift::{lift_path, CurveSpec, LiftOptions};

    #[test]
    fn header_and_rows() {
        let spec = ArmSpec::planar(vec![1.0]).unwrap();
        let c = CurveSpec::arc([0.0, 0.0], 1.0, 0.0, 1.0, 1.0).unwrap();
        let traj = lift_path(&spec, &Configuration::from_angles(vec![0.0]), &c, &LiftOptions::with_step(0.25)).unwrap();
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,q_1,tracking_error,det_gram");
        assert_eq!(lines.len(), 6);
        assert!(lines[5].starts_with("1,"));
    }
}
