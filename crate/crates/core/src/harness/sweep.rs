use std::io::Write;

use rayon::prelude::*;

use super::Scenario;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x0: f64,
    pub c_beta: f64,
    /// Fuel used (kg); NaN when the run could not be started.
    pub dm: f64,
    pub landed: bool,
    /// Glide-slope constraint violated.
    pub violated: bool,
}

/// One closed-loop run per `(c_beta, x0)` with the initial downrange of
/// `base` replaced by `x0`. Rows are ordered by `c_beta`, then `x0`.
pub fn downrange_sweep(base: &Scenario, x0_values: &[f64], c_betas: &[f64]) -> crate::Result<Vec<SweepRow>> {
    if x0_values.is_empty() || c_betas.is_empty() {
        return Err(Error::InvalidParameter {
            name: "x0_values",
            value: 0.0,
            reason: "sweep needs at least one x0 and one c_beta",
        });
    }
    let cases: Vec<(f64, f64)> = c_betas
        .iter()
        .flat_map(|&cb| x0_values.iter().map(move |&x0| (cb, x0)))
        .collect();
    let rows = cases
        .par_iter()
        .map(|&(c_beta, x0)| {
            let mut s = base.clone();
            s.r0.x = x0;
            s.sim.guidance.c_beta = c_beta;
            match s.run() {
                Ok((_, rep)) => SweepRow {
                    x0,
                    c_beta,
                    dm: rep.fuel_used,
                    landed: rep.landed,
                    violated: rep.constraint_violated,
                },
                Err(_) => SweepRow {
                    x0,
                    c_beta,
                    dm: f64::NAN,
                    landed: false,
                    violated: true,
                },
            }
        })
        .collect();
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x0_m", "cbeta", "dm_kg", "violated"])?;
    for r in rows {
        w.write_record([
            format!("{:.8e}", r.x0),
            format!("{}", r.c_beta),
            format!("{:.8e}", r.dm),
            u8::from(r.violated).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
