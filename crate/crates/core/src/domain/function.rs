//! Real-valued fields over the interior nodes of a [`Grid`].

use std::io::Write;

use crate::error::{Error, Result};

use super::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.num_interior()],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.num_interior()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_interior() {
            return Err(Error::Domain(format!(
                "grid function length {} does not match interior node count {}",
                values.len(),
                grid.num_interior()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_fn(grid: &Grid, func: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.num_interior())
            .map(|k| {
                let (x, y) = grid.coords(k);
                func(x, y)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Mesh-weighted discrete L2 norm: `sqrt(h (x hy) * sum v^2)`.
    pub fn l2_norm(&self) -> f64 {
        let cell = if self.grid.dim() == 1 {
            self.grid.h(0)
        } else {
            self.grid.h(0) * self.grid.h(1)
        };
        (cell * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Nodewise `self <= other + tol`.
    pub fn le(&self, other: &Self, tol: f64) -> bool {
        self.values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| *a <= *b + tol)
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// CSV with columns `index,x[,y],value`, one header line.
    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        if self.grid.dim() == 1 {
            writeln!(w, "index,x,value")?;
            for (k, v) in self.values.iter().enumerate() {
                let (x, _) = self.grid.coords(k);
                writeln!(w, "{k},{x},{v}")?;
            }
        } else {
            writeln!(w, "index,x,y,value")?;
            for (k, v) in self.values.iter().enumerate() {
                let (x, y) = self.grid.coords(k);
                writeln!(w, "{k},{x},{y},{v}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let g = Grid::interval(0.0, 1.0, 3).unwrap();
        let f = GridFunction::from_values(&g, vec![1.0, -2.0, 1.0]).unwrap();
        assert_eq!(f.sup_norm(), 2.0);
        assert!((f.l2_norm() - (0.25f64 * 6.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = Grid::interval(0.0, 1.0, 2).unwrap();
        let f = GridFunction::from_values(&g, vec![0.5, 0.25]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,x,value");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,"));
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = Grid::interval(0.0, 1.0, 3).unwrap();
        assert!(GridFunction::from_values(&g, vec![1.0]).is_err());
    }
}
