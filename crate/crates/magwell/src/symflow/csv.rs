use std::fmt::Write;

use super::guiding::guiding_center;
use super::integrate::Trajectory;
use crate::fieldlab::{MagneticField, VectorPotential};

pub const CSV_HEADER: &str = "t,q1,q2,p1,p2,H,c1,c2,I,B_at_c";

/// Trajectory rows with 17 significant digits, guiding-centre data included.
pub fn trajectory_csv(field: &MagneticField, pot: &VectorPotential, traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.len() * 240);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for ((t, s), h) in traj.times.iter().zip(&traj.states).zip(&traj.energy) {
        let g = guiding_center(field, pot, s);
        let row = [
            *t,
            s.q[0],
            s.q[1],
            s.p[0],
            s.p[1],
            *h,
            g.center[0],
            g.center[1],
            g.action,
            g.field_at_center,
        ];
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}
