use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admitted number of cells.
pub const MIN_CELLS: usize = 16;

/// Uniform cell-centered lattice on `[−L, L]`.
///
/// Cell `i` has center `x_i = −L + (i + ½)Δ` with `Δ = 2L/n`. An optional
/// mask pins cells to zero; pinned cells still take part in the nonlocal
/// interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_width: f64,
    n: usize,
    delta: f64,
    mask: Option<Vec<bool>>,
}

impl Grid1D {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Grid(format!(
                "half-width L = {half_width} must be positive"
            )));
        }
        if n < MIN_CELLS {
            return Err(Error::Grid(format!("n = {n} is below {MIN_CELLS}")));
        }
        Ok(Self {
            half_width,
            n,
            delta: 2.0 * half_width / n as f64,
            mask: None,
        })
    }

    /// Pins every cell whose center lies outside the open ball `|x| < R`.
    pub fn with_ball(mut self, radius: f64) -> Result<Self> {
        if !(radius >= self.delta) {
            return Err(Error::Grid(format!(
                "mask radius R = {radius} is smaller than the cell size {}",
                self.delta
            )));
        }
        let mask: Vec<bool> = (0..self.n).map(|i| self.x(i).abs() < radius).collect();
        self.mask = Some(mask);
        Ok(self)
    }

    /// Uses an explicit mask (`true` = free).
    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.n {
            return Err(Error::Grid(format!(
                "mask has {} entries for {} cells",
                mask.len(),
                self.n
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::Grid("mask pins every cell".into()));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.delta
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[i])
    }

    pub fn free_count(&self) -> usize {
        (0..self.n).filter(|&i| self.is_free(i)).count()
    }

    /// The same lattice with each cell split in two; masks are inherited.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            n: 2 * self.n,
            delta: 0.5 * self.delta,
            mask: self
                .mask
                .as_ref()
                .map(|m| m.iter().flat_map(|&b| [b, b]).collect()),
        }
    }
}

/// Samples of a function on a [`Grid1D`], zero on pinned cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFunction {
    grid: Grid1D,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Grid(format!(
                "{} values for {} cells",
                values.len(),
                grid.n()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("value at cell {i} is not finite")));
        }
        if let Some(i) = (0..grid.n()).find(|&i| !grid.is_free(i) && values[i] != 0.0) {
            return Err(Error::Grid(format!("pinned cell {i} holds a nonzero value")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at cell centers; pinned cells get zero.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n())
            .map(|i| if grid.is_free(i) { f(grid.x(i)) } else { 0.0 })
            .collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid1D) -> Self {
        let n = grid.n();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Piecewise-constant embedding into [`Grid1D::refined`].
    pub fn refined(&self) -> Self {
        Self {
            grid: self.grid.refined(),
            values: self.values.iter().flat_map(|&v| [v, v]).collect(),
        }
    }

    /// Writes `x,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([format!("{:.16e}", self.grid.x(i)), format!("{v:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads `x,value` rows written by [`write_csv`](Self::write_csv).
    ///
    /// The lattice is rebuilt from the first and last centers; masks are not
    /// stored, so every cell comes back free.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for rec in r.deserialize() {
            let (x, v): (f64, f64) = rec?;
            xs.push(x);
            values.push(v);
        }
        if xs.len() < MIN_CELLS {
            return Err(Error::Grid(format!("csv has {} rows", xs.len())));
        }
        let n = xs.len();
        let delta = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        let grid = Grid1D::new(0.5 * delta * n as f64, n)?;
        for (i, &x) in xs.iter().enumerate() {
            if (x - grid.x(i)).abs() > 1e-9 * grid.half_width() {
                return Err(Error::Grid(format!(
                    "row {i}: x = {x} is off the uniform lattice"
                )));
            }
        }
        Self::new(grid, values)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid1D::new(20.0, 128).unwrap();
        assert_eq!(g.delta(), 0.3125);
        assert_eq!(g.x(0), -20.0 + 0.15625);
        assert_eq!(g.x(127), 20.0 - 0.15625);
        assert_eq!(g.x(63), -g.x(64));
        assert!(Grid1D::new(20.0, 8).is_err());
        assert!(Grid1D::new(0.0, 64).is_err());
    }

    #[test]
    fn ball_mask() {
        let g = Grid1D::new(4.0, 16).unwrap().with_ball(1.5).unwrap();
        assert_eq!(g.free_count(), 6);
        assert!(g.is_free(7) && g.is_free(8) && !g.is_free(0));
        assert!(Grid1D::new(4.0, 16).unwrap().with_ball(0.4).is_err());
        assert_eq!(g.refined().free_count(), 12);
    }

    #[test]
    fn pinned_cells_must_vanish() {
        let g = Grid1D::new(4.0, 16).unwrap().with_ball(1.5).unwrap();
        assert!(DiscreteFunction::new(g.clone(), vec![1.0; 16]).is_err());
        let f = DiscreteFunction::from_fn(g, |_| 1.0).unwrap();
        assert_eq!(f.values().iter().sum::<f64>(), 6.0);
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid1D::new(3.0, 32).unwrap();
        let f = DiscreteFunction::from_fn(g, |x| (-x * x).exp() / 3.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,value\n"));
        let back = DiscreteFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
        assert!((back.grid().delta() - f.grid().delta()).abs() < 1e-14);
    }

    #[test]
    fn refine_doubles_cells() {
        let g = Grid1D::new(2.0, 16).unwrap();
        let f = DiscreteFunction::from_fn(g, |x| x).unwrap();
        let r = f.refined();
        assert_eq!(r.values().len(), 32);
        assert_eq!(r.values()[0], r.values()[1]);
        assert_eq!(r.grid().x(0), -2.0 + 0.0625);
    }
}
