//! Sparse symmetric operators of the form `-Delta + V` on grid interiors,
//! assembled from the standard 3-point / 5-point Dirichlet stencil.

use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, BandLu, BandMatrix};

use super::function::GridFunction;
use super::grid::Grid;
use super::weight::WeightField;

/// Unknown-count threshold above which linear solves fall back to
/// preconditioned conjugate gradient instead of a banded factorization.
pub const DIRECT_SOLVE_CUTOFF: usize = 100_000;

/// Symmetric sparse operator stored by rows.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    bandwidth: usize,
}

impl LinearOperator {
    fn from_parts(rows: Vec<Vec<(usize, f64)>>, diag: Vec<f64>) -> Self {
        let mut bandwidth = 0usize;
        for (i, row) in rows.iter().enumerate() {
            for &(j, _) in row {
                bandwidth = bandwidth.max(i.abs_diff(j));
            }
        }
        Self {
            rows,
            diag,
            bandwidth,
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries of row `i`.
    pub fn off_diagonal(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n());
        let mut out = vec![0.0; v.len()];
        for i in 0..v.len() {
            let mut s = self.diag[i] * v[i];
            for &(j, a) in &self.rows[i] {
                s += a * v[j];
            }
            out[i] = s;
        }
        out
    }

    /// New operator `A + diag(v)`.
    pub fn with_potential(&self, v: &[f64]) -> LinearOperator {
        assert_eq!(v.len(), self.n());
        let diag = self.diag.iter().zip(v).map(|(d, p)| d + p).collect();
        Self {
            rows: self.rows.clone(),
            diag,
            bandwidth: self.bandwidth,
        }
    }

    /// New operator `A + c I`.
    pub fn shifted(&self, c: f64) -> LinearOperator {
        Self {
            rows: self.rows.clone(),
            diag: self.diag.iter().map(|d| d + c).collect(),
            bandwidth: self.bandwidth,
        }
    }

    /// Structural symmetry check: every entry has a matching transpose entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                let back = self.rows[j]
                    .iter()
                    .find(|&&(k, _)| k == i)
                    .map(|&(_, v)| v);
                match back {
                    Some(v) if (v - a).abs() <= tol * (1.0 + a.abs()) => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// Smallest Gershgorin disk lower bound `min_i (a_ii - sum_j |a_ij|)`.
    pub fn gershgorin_lower(&self) -> f64 {
        (0..self.n())
            .map(|i| self.diag[i] - self.rows[i].iter().map(|(_, a)| a.abs()).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_band(&self) -> BandMatrix {
        let k = self.bandwidth;
        let mut band = BandMatrix::zeros(self.n(), k, k);
        for i in 0..self.n() {
            band.set(i, i, self.diag[i]);
            for &(j, a) in &self.rows[i] {
                band.set(i, j, a);
            }
        }
        band
    }

    pub fn factor(&self) -> Result<BandLu> {
        self.to_band().factor()
    }

    /// Solve `A x = rhs`; banded factorization below the size cutoff,
    /// Jacobi-preconditioned CG (valid for SPD operators) above it.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if self.n() <= DIRECT_SOLVE_CUTOFF {
            Ok(self.factor()?.solve(rhs))
        } else {
            conjugate_gradient(&|v| self.matvec(v), &self.diag, rhs, 1e-12, 10 * self.n())
        }
    }
}

/// Discrete Dirichlet Laplacian `-Delta` on the grid interior.
pub fn assemble_laplacian(grid: &Grid) -> LinearOperator {
    let n = grid.num_interior();
    let inv_hx2 = 1.0 / (grid.h(0) * grid.h(0));
    let inv_hy2 = if grid.dim() == 2 {
        1.0 / (grid.h(1) * grid.h(1))
    } else {
        0.0
    };
    let diag_val = if grid.dim() == 1 {
        2.0 * inv_hx2
    } else {
        2.0 * inv_hx2 + 2.0 * inv_hy2
    };
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let (ik, jk) = grid.lattice(k);
        let mut row = Vec::with_capacity(4);
        for nb in grid.neighbors(k) {
            let (inb, _) = grid.lattice(nb);
            let coeff = if inb != ik { -inv_hx2 } else { -inv_hy2 };
            let _ = jk;
            row.push((nb, coeff));
        }
        rows.push(row);
    }
    LinearOperator::from_parts(rows, vec![diag_val; n])
}

/// Dirichlet Laplacian of the refuge subdomain: the principal submatrix of
/// the full Laplacian on refuge nodes (nodes of the bump support act as
/// homogeneous Dirichlet boundary). Returns the operator together with the
/// full-grid indices of its unknowns.
pub fn refuge_operator(grid: &Grid, weight: &WeightField) -> Result<(LinearOperator, Vec<usize>)> {
    let nodes = weight.refuge_nodes();
    if nodes.is_empty() {
        return Err(Error::Config("refuge is empty (weight positive everywhere)".into()));
    }
    let full = assemble_laplacian(grid);
    let mut local = vec![usize::MAX; grid.num_interior()];
    for (loc, &k) in nodes.iter().enumerate() {
        local[k] = loc;
    }
    let mut rows = Vec::with_capacity(nodes.len());
    let mut diag = Vec::with_capacity(nodes.len());
    for &k in &nodes {
        diag.push(full.diag()[k]);
        let row = full.off_diagonal(k)
            .iter()
            .filter(|&&(j, _)| local[j] != usize::MAX)
            .map(|&(j, a)| (local[j], a))
            .collect();
        rows.push(row);
    }
    Ok((LinearOperator::from_parts(rows, diag), nodes))
}

/// Solution of `-Delta e = 1` on the box enlarged by `enlargement` on every
/// side (same mesh width), restricted to the original grid's nodes.
/// Strictly positive on all of them, including those adjacent to the
/// boundary of the original domain.
pub fn auxiliary_supersolution_field(grid: &Grid, enlargement: f64) -> Result<GridFunction> {
    if !(enlargement > 0.0) {
        return Err(Error::Domain(format!(
            "enlargement must be positive, got {enlargement}"
        )));
    }
    let pad = |h: f64| -> usize { ((enlargement / h).round() as usize).max(1) };
    let (big, mx, my) = match grid.dim() {
        1 => {
            let h = grid.h(0);
            let m = pad(h);
            let (a, b) = grid.extents(0);
            (
                Grid::interval(a - m as f64 * h, b + m as f64 * h, grid.n(0) + 2 * m)?,
                m,
                0,
            )
        }
        _ => {
            let (hx, hy) = (grid.h(0), grid.h(1));
            let (mx, my) = (pad(hx), pad(hy));
            let (ax, bx) = grid.extents(0);
            let (ay, by) = grid.extents(1);
            (
                Grid::rectangle(
                    (ax - mx as f64 * hx, bx + mx as f64 * hx),
                    (ay - my as f64 * hy, by + my as f64 * hy),
                    grid.n(0) + 2 * mx,
                    grid.n(1) + 2 * my,
                )?,
                mx,
                my,
            )
        }
    };
    let a = assemble_laplacian(&big);
    let e_big = a.solve(&vec![1.0; big.num_interior()])?;
    let mut values = Vec::with_capacity(grid.num_interior());
    for k in 0..grid.num_interior() {
        let (i, j) = grid.lattice(k);
        values.push(e_big[big.index(i + mx, j + my)]);
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Numeric(
            "auxiliary supersolution field is not strictly positive".into(),
        ));
    }
    GridFunction::from_values(grid, values)
}
