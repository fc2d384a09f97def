//! Uniform tensor grids on an interval or a rectangle with homogeneous
//! Dirichlet boundary bookkeeping. Interior nodes are ordered
//! lexicographically, x fastest.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    extents: [(f64, f64); 2],
    n: [usize; 2],
    h: [f64; 2],
}

impl Grid {
    /// 1D interval `(a, b)` with `n` interior points, `h = (b-a)/(n+1)`.
    pub fn interval(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("grid needs at least one interior point".into()));
        }
        if !(b > a) {
            return Err(Error::Domain(format!("empty interval ({a}, {b})")));
        }
        Ok(Self {
            dim: 1,
            extents: [(a, b), (0.0, 0.0)],
            n: [n, 1],
            h: [(b - a) / (n as f64 + 1.0), 0.0],
        })
    }

    /// 2D rectangle with `nx * ny` interior points.
    pub fn rectangle(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if nx < 1 || ny < 1 {
            return Err(Error::Domain("grid needs at least one interior point per axis".into()));
        }
        if !(x.1 > x.0 && y.1 > y.0) {
            return Err(Error::Domain("empty rectangle".into()));
        }
        Ok(Self {
            dim: 2,
            extents: [x, y],
            n: [nx, ny],
            h: [
                (x.1 - x.0) / (nx as f64 + 1.0),
                (y.1 - y.0) / (ny as f64 + 1.0),
            ],
        })
    }

    /// Unit square helper with `n` interior points per axis.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::rectangle((0.0, 1.0), (0.0, 1.0), n, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self, axis: usize) -> (f64, f64) {
        self.extents[axis]
    }

    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    pub fn num_interior(&self) -> usize {
        self.n[0] * self.n[1]
    }

    /// Lattice coordinates of interior node `k`.
    pub fn lattice(&self, k: usize) -> (usize, usize) {
        (k % self.n[0], k / self.n[0])
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    /// Physical coordinates of interior node `k`; the y component is 0 in 1D.
    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.lattice(k);
        let x = self.extents[0].0 + (i as f64 + 1.0) * self.h[0];
        let y = if self.dim == 2 {
            self.extents[1].0 + (j as f64 + 1.0) * self.h[1]
        } else {
            0.0
        };
        (x, y)
    }

    /// Interior lattice neighbors of node `k` (boundary neighbors omitted:
    /// homogeneous Dirichlet data contributes nothing).
    pub fn neighbors(&self, k: usize) -> Vec<usize> {
        let (i, j) = self.lattice(k);
        let mut out = Vec::with_capacity(4);
        if i > 0 {
            out.push(self.index(i - 1, j));
        }
        if i + 1 < self.n[0] {
            out.push(self.index(i + 1, j));
        }
        if self.dim == 2 {
            if j > 0 {
                out.push(self.index(i, j - 1));
            }
            if j + 1 < self.n[1] {
                out.push(self.index(i, j + 1));
            }
        }
        out
    }

    /// Distance from node `k` to the domain boundary.
    pub fn boundary_distance(&self, k: usize) -> f64 {
        let (x, y) = self.coords(k);
        let dx = (x - self.extents[0].0).min(self.extents[0].1 - x);
        if self.dim == 1 {
            dx
        } else {
            dx.min((y - self.extents[1].0).min(self.extents[1].1 - y))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_layout() {
        let g = Grid::interval(0.0, 1.0, 3).unwrap();
        assert_eq!(g.h(0), 0.25);
        assert_eq!(g.num_interior(), 3);
        assert_eq!(g.coords(0).0, 0.25);
        assert_eq!(g.coords(2).0, 0.75);
        assert_eq!(g.neighbors(1), vec![0, 2]);
    }

    #[test]
    fn rectangle_layout_is_lexicographic() {
        let g = Grid::rectangle((0.0, 1.0), (0.0, 2.0), 3, 2).unwrap();
        assert_eq!(g.num_interior(), 6);
        assert_eq!(g.index(2, 1), 5);
        let (x, y) = g.coords(g.index(0, 1));
        assert!((x - 0.25).abs() < 1e-15);
        assert!((y - 2.0 * 2.0 / 3.0).abs() < 1e-15);
        let mut nb = g.neighbors(g.index(1, 0));
        nb.sort();
        assert_eq!(nb, vec![0, 2, 4]);
    }

    #[test]
    fn degenerate_grids_rejected() {
        assert!(Grid::interval(0.0, 1.0, 0).is_err());
        assert!(Grid::interval(1.0, 0.0, 5).is_err());
    }
}
