//! The crowding weight `b(x) >= 0`, its support and the refuge where it
//! vanishes.
//!
//! The refuge configuration places a single smooth disk bump strictly
//! inside a 2D domain, so the refuge (the complement of the closed bump
//! support) stays connected. Interior bumps are rejected in 1D, where
//! they would disconnect the refuge.

use crate::error::{Error, Result};

use super::grid::Grid;

/// Geometry descriptor for the weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightShape {
    /// `b = 0` everywhere; the whole domain is refuge.
    Zero,
    /// `b = b0 > 0` everywhere; no refuge.
    Constant { b0: f64 },
    /// 2D squared-hinge bump `b(x) = b0 * max(0, 1 - |x-c|^2/rho^2)^2`,
    /// positive exactly on the open disk `|x-c| < rho`.
    DiskBump { b0: f64, center: (f64, f64), radius: f64 },
}

#[derive(Debug, Clone)]
pub struct WeightField {
    shape: WeightShape,
    values: Vec<f64>,
    refuge_mask: Vec<bool>,
}

impl WeightField {
    pub fn build(grid: &Grid, shape: WeightShape) -> Result<Self> {
        match shape {
            WeightShape::Zero => {
                let n = grid.num_interior();
                Ok(Self {
                    shape,
                    values: vec![0.0; n],
                    refuge_mask: vec![true; n],
                })
            }
            WeightShape::Constant { b0 } => {
                if !(b0 > 0.0) {
                    return Err(Error::Config(format!("constant weight needs b0 > 0, got {b0}")));
                }
                let n = grid.num_interior();
                Ok(Self {
                    shape,
                    values: vec![b0; n],
                    refuge_mask: vec![false; n],
                })
            }
            WeightShape::DiskBump { b0, center, radius } => {
                if grid.dim() != 2 {
                    return Err(Error::Config(
                        "disk-bump weight requires a 2D grid: an interior bump in 1D disconnects the refuge"
                            .into(),
                    ));
                }
                if !(b0 > 0.0) || !(radius > 0.0) {
                    return Err(Error::Config(format!(
                        "disk bump needs b0 > 0 and radius > 0, got b0={b0}, radius={radius}"
                    )));
                }
                let (ax, bx) = grid.extents(0);
                let (ay, by) = grid.extents(1);
                let inside = center.0 - radius > ax
                    && center.0 + radius < bx
                    && center.1 - radius > ay
                    && center.1 + radius < by;
                if !inside {
                    return Err(Error::Config(
                        "bump support must lie strictly inside the domain".into(),
                    ));
                }
                let n = grid.num_interior();
                let mut values = vec![0.0; n];
                let mut refuge_mask = vec![false; n];
                for k in 0..n {
                    let (x, y) = grid.coords(k);
                    let d2 = (x - center.0).powi(2) + (y - center.1).powi(2);
                    let t = 1.0 - d2 / (radius * radius);
                    if t > 0.0 {
                        values[k] = b0 * t * t;
                    } else {
                        refuge_mask[k] = true;
                    }
                }
                let field = Self {
                    shape,
                    values,
                    refuge_mask,
                };
                if !field.refuge_connected(grid) {
                    return Err(Error::Config("refuge node set is not edge-connected".into()));
                }
                Ok(field)
            }
        }
    }

    pub fn shape(&self) -> WeightShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// True where `b = 0`.
    pub fn refuge_mask(&self) -> &[bool] {
        &self.refuge_mask
    }

    pub fn refuge_nodes(&self) -> Vec<usize> {
        (0..self.refuge_mask.len())
            .filter(|&k| self.refuge_mask[k])
            .collect()
    }

    pub fn has_refuge(&self) -> bool {
        self.refuge_mask.iter().any(|&m| m)
    }

    fn refuge_connected(&self, grid: &Grid) -> bool {
        let start = match self.refuge_mask.iter().position(|&m| m) {
            Some(k) => k,
            None => return false,
        };
        let mut seen = vec![false; self.refuge_mask.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 1usize;
        while let Some(k) = stack.pop() {
            for nb in grid.neighbors(k) {
                if self.refuge_mask[nb] && !seen[nb] {
                    seen[nb] = true;
                    count += 1;
                    stack.push(nb);
                }
            }
        }
        count == self.refuge_mask.iter().filter(|&&m| m).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_mode() {
        let g = Grid::interval(0.0, 1.0, 5).unwrap();
        let w = WeightField::build(&g, WeightShape::Constant { b0: 1.0 }).unwrap();
        assert!(w.values().iter().all(|&v| v == 1.0));
        assert!(!w.has_refuge());
    }

    #[test]
    fn disk_bump_values_and_refuge() {
        let g = Grid::unit_square(31).unwrap();
        let shape = WeightShape::DiskBump {
            b0: 2.0,
            center: (0.5, 0.5),
            radius: 0.25,
        };
        let w = WeightField::build(&g, shape).unwrap();
        // Node nearest the center carries (almost) the full amplitude.
        let center_k = g.index(15, 15);
        assert!((w.value(center_k) - 2.0).abs() < 1e-12);
        // Positivity exactly on the open disk.
        for k in 0..g.num_interior() {
            let (x, y) = g.coords(k);
            let d2 = (x - 0.5f64).powi(2) + (y - 0.5f64).powi(2);
            if d2 < 0.25 * 0.25 {
                assert!(w.value(k) > 0.0);
                assert!(!w.refuge_mask()[k]);
            } else {
                assert_eq!(w.value(k), 0.0);
                assert!(w.refuge_mask()[k]);
            }
        }
    }

    #[test]
    fn bump_touching_boundary_rejected() {
        let g = Grid::unit_square(15).unwrap();
        let shape = WeightShape::DiskBump {
            b0: 1.0,
            center: (0.5, 0.5),
            radius: 0.5,
        };
        assert!(WeightField::build(&g, shape).is_err());
    }

    #[test]
    fn bump_in_1d_rejected() {
        let g = Grid::interval(0.0, 1.0, 15).unwrap();
        let shape = WeightShape::DiskBump {
            b0: 1.0,
            center: (0.5, 0.0),
            radius: 0.1,
        };
        assert!(WeightField::build(&g, shape).is_err());
    }
}
