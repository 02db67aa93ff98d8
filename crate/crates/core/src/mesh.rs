//! Truncated radial mesh on `[0, r_max]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grading {
    Uniform,
    /// Cell widths grow by `ratio` from the origin outward.
    Geometric { ratio: f64 },
    /// Nodes supplied directly, e.g. read back from a profile file.
    Explicit,
}

/// Strictly increasing nodes `0 = r₀ < … < r_K = r_max` with cell widths.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    widths: Vec<f64>,
    grading: Grading,
}

pub const MIN_CELLS: usize = 8;

/// First-cell width of the default production grid as a fraction of the
/// mean cell width.
pub const DEFAULT_FIRST_CELL_FRACTION: f64 = 0.1;

impl RadialGrid {
    pub fn build(r_max: f64, cells: usize, grading: Grading) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("r_max must be positive, got {r_max}")));
        }
        if cells < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_CELLS} cells, got {cells}"
            )));
        }
        Self::build_unchecked(r_max, cells, grading)
    }

    /// Same as [`RadialGrid::build`] without the minimum cell count.
    pub(crate) fn build_unchecked(r_max: f64, cells: usize, grading: Grading) -> Result<Self> {
        let widths: Vec<f64> = match grading {
            Grading::Uniform => vec![r_max / cells as f64; cells],
            Grading::Geometric { ratio } => {
                if !(ratio > 0.0 && ratio.is_finite()) {
                    return Err(Error::InvalidGrid(format!("bad geometric ratio {ratio}")));
                }
                let first = if ratio == 1.0 {
                    r_max / cells as f64
                } else {
                    r_max * (ratio - 1.0) / (cells as f64 * (ratio - 1.0).ln_1p()).exp_m1()
                };
                (0..cells).map(|i| first * ratio.powi(i as i32)).collect()
            }
            Grading::Explicit => {
                return Err(Error::InvalidGrid(
                    "explicit grids are built with RadialGrid::from_nodes".into(),
                ))
            }
        };
        let mut nodes = Vec::with_capacity(cells + 1);
        nodes.push(0.0);
        match grading {
            Grading::Uniform => {
                nodes.extend((1..=cells).map(|i| r_max * i as f64 / cells as f64));
            }
            _ => {
                let mut acc = 0.0;
                for w in &widths[..cells - 1] {
                    acc += w;
                    nodes.push(acc);
                }
                nodes.push(r_max);
            }
        }
        if widths.iter().any(|w| !(*w > 0.0)) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("degenerate cell widths".into()));
        }
        Ok(Self {
            nodes,
            widths,
            grading,
        })
    }

    /// Geometric grid whose first cell is `first_cell` wide.
    pub fn geometric_with_first_cell(r_max: f64, cells: usize, first_cell: f64) -> Result<Self> {
        let ratio = geometric_ratio_for_first_cell(r_max, cells, first_cell)?;
        Self::build(r_max, cells, Grading::Geometric { ratio })
    }

    /// Default production mesh: geometric grading with the first cell a
    /// tenth of the mean width.
    pub fn production(r_max: f64, cells: usize) -> Result<Self> {
        Self::geometric_with_first_cell(
            r_max,
            cells,
            DEFAULT_FIRST_CELL_FRACTION * r_max / cells as f64,
        )
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first node must be the origin, got {}",
                nodes[0]
            )));
        }
        if nodes.iter().any(|r| !r.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("nodes must be finite and strictly increasing".into()));
        }
        let widths = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            nodes,
            widths,
            grading: Grading::Explicit,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn cells(&self) -> usize {
        self.widths.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Always true; kept for schema parity with exported grid metadata.
    pub fn r0_is_origin(&self) -> bool {
        self.nodes[0] == 0.0
    }

    /// `(r_i + r_{i+1})/2` for every cell.
    pub fn cell_midpoint_radii(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Solves `h (q^n − 1)/(q − 1) = r_max` for the growth ratio `q ≥ 1`.
pub fn geometric_ratio_for_first_cell(r_max: f64, cells: usize, first_cell: f64) -> Result<f64> {
    let n = cells as f64;
    if !(first_cell > 0.0) || first_cell * n > r_max * (1.0 + 1e-15) {
        return Err(Error::InvalidGrid(format!(
            "first cell {first_cell} cannot start a {cells}-cell grid of growing cells on [0, {r_max}]"
        )));
    }
    if (first_cell * n - r_max).abs() <= 1e-15 * r_max {
        return Ok(1.0);
    }
    // Sum of widths is increasing in q; bisect on log q.
    let total = |q: f64| first_cell * ((n * q.ln()).exp_m1() / (q - 1.0));
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while total(hi) < r_max {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if total(mid) < r_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
