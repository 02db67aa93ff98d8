//! Profile and history CSV files.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fields::{FieldConfiguration, PinSet};
use crate::mesh::RadialGrid;
use crate::minimizer::HistorySample;

pub const PROFILE_HEADER: [&str; 5] = ["r", "a", "b", "f", "g"];
pub const HISTORY_HEADER: [&str; 3] = ["iteration", "energy", "grad_norm"];

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_profile<W: Write>(out: W, grid: &RadialGrid, config: &FieldConfiguration) -> Result<()> {
    config.check_grid(grid)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_HEADER)?;
    for (i, &r) in grid.nodes().iter().enumerate() {
        w.write_record([r, config.a[i], config.b[i], config.f[i], config.g[i]].map(fmt_float))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a profile written by [`write_profile`]; the grid comes back as
/// explicit nodes and the pins as the admissible set.
pub fn read_profile<R: Read>(input: R) -> Result<(RadialGrid, FieldConfiguration)> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().map(str::trim).ne(PROFILE_HEADER) {
        return Err(Error::Format(format!("expected header r,a,b,f,g, got {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut cols: [Vec<f64>; 5] = Default::default();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::Format(format!("row {}: expected 5 columns, got {}", line + 2, rec.len())));
        }
        for (k, s) in rec.iter().enumerate() {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {}: cannot parse {s:?}", line + 2)))?;
            cols[k].push(v);
        }
    }
    let [r, a, b, f, g] = cols;
    let grid = RadialGrid::from_nodes(r)?;
    let config = FieldConfiguration::new(a, b, f, g, PinSet::admissible())?;
    Ok((grid, config))
}

pub fn write_history<W: Write>(out: W, history: &[HistorySample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HISTORY_HEADER)?;
    for s in history {
        w.write_record([s.iteration.to_string(), fmt_float(s.energy), fmt_float(s.grad_norm)])?;
    }
    w.flush()?;
    Ok(())
}
