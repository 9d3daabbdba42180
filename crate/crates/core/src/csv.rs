//! CSV writers for paths, trajectories and diagnostics.
//!
//! Every file has a one-line header. Reals are written in scientific notation
//! with 17 significant digits so they round-trip exactly.

use std::io::{self, Write};

use crate::diagnostics::{ConvergenceReport, PhaseDomain};
use crate::integrators::TrajectoryRecord;
use crate::levy_path::LevyPath;

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// `channel,jump_index,jump_time,jump_size`
pub fn write_path<W: Write>(mut w: W, path: &LevyPath) -> io::Result<()> {
    writeln!(w, "channel,jump_index,jump_time,jump_size")?;
    for r in 0..path.num_channels() {
        let ch = path.channel(r).expect("index in range");
        for (k, (&t, &size)) in ch.times.iter().zip(&ch.sizes).enumerate() {
            writeln!(w, "{r},{k},{},{}", fmt_real(t), fmt_real(size))?;
        }
    }
    Ok(())
}

/// `t,P,Q,H0,jump_flag` for `n = 1`, otherwise `t,P_1..P_n,Q_1..Q_n,H0,jump_flag`.
/// `H0` is empty when the record carries no Hamiltonian values.
pub fn write_trajectory<W: Write>(mut w: W, record: &TrajectoryRecord) -> io::Result<()> {
    let n = record.states.first().map_or(1, |s| s.dim());
    let mut header = vec!["t".to_string()];
    if n == 1 {
        header.extend(["P".to_string(), "Q".to_string()]);
    } else {
        header.extend((1..=n).map(|i| format!("P_{i}")));
        header.extend((1..=n).map(|i| format!("Q_{i}")));
    }
    header.extend(["H0".to_string(), "jump_flag".to_string()]);
    writeln!(w, "{}", header.join(","))?;
    for i in 0..record.len() {
        let s = &record.states[i];
        let mut row = vec![fmt_real(record.times[i])];
        row.extend(s.p.iter().chain(&s.q).map(|&x| fmt_real(x)));
        row.push(
            record
                .hamiltonians
                .as_ref()
                .map_or_else(String::new, |h| fmt_real(h[i])),
        );
        row.push(u8::from(record.jump_flags[i]).to_string());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// `tau,rms_error`
pub fn write_convergence<W: Write>(mut w: W, report: &ConvergenceReport) -> io::Result<()> {
    writeln!(w, "tau,rms_error")?;
    for (tau, err) in report.step_sizes.iter().zip(&report.rms_errors) {
        writeln!(w, "{},{}", fmt_real(*tau), fmt_real(*err))?;
    }
    Ok(())
}

/// `method,snapshot_time,vertex_index,P,Q`
pub fn write_domains<W: Write>(mut w: W, domains: &[(&str, &[PhaseDomain])]) -> io::Result<()> {
    writeln!(w, "method,snapshot_time,vertex_index,P,Q")?;
    for (method, snaps) in domains {
        for d in snaps.iter() {
            for (k, v) in d.vertices.iter().enumerate() {
                writeln!(
                    w,
                    "{method},{},{k},{},{}",
                    fmt_real(d.timestamp),
                    fmt_real(v.p[0]),
                    fmt_real(v.q[0])
                )?;
            }
        }
    }
    Ok(())
}

/// `method,snapshot_time,shoelace_area`
pub fn write_areas<W: Write>(mut w: W, domains: &[(&str, &[PhaseDomain])]) -> io::Result<()> {
    writeln!(w, "method,snapshot_time,shoelace_area")?;
    for (method, snaps) in domains {
        for d in snaps.iter() {
            writeln!(
                w,
                "{method},{},{}",
                fmt_real(d.timestamp),
                fmt_real(d.area())
            )?;
        }
    }
    Ok(())
}
