//! Principal eigenvalue and positive eigenfunction of `-Delta + V` by
//! shifted inverse power iteration.
//!
//! Only the smallest eigenvalue is ever needed and the operators are
//! M-matrices, so a dedicated inverse iteration with a Gershgorin shift is
//! simpler and certifiable by residual.

use crate::domain::{refuge_operator, Grid, GridFunction, LinearOperator, WeightField};
use crate::error::{Error, Result};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Principal (smallest) eigenvalue.
    pub lambda1: f64,
    /// Eigenfunction, positive at every node, normalized to sup-norm 1.
    pub phi: Vec<f64>,
    pub iterations: usize,
    /// Final `||(A - lambda1) phi||_2 / ||phi||_2`.
    pub residual: f64,
}

/// Smallest eigenvalue of a symmetric operator, with its positive
/// eigenfunction. The shift sits one unit below the Gershgorin lower
/// bound, so the shifted operator is positive definite.
pub fn principal_eigen(op: &LinearOperator, tol: f64, max_iter: usize) -> Result<EigenResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("eigen tol must be positive, got {tol}")));
    }
    if !op.is_symmetric(1e-12) {
        return Err(Error::Domain("principal_eigen requires a symmetric operator".into()));
    }
    let n = op.n();
    let shift = op.gershgorin_lower() - 1.0;
    let lu = op.shifted(-shift).factor()?;
    // Residuals are measured relative to the operator scale; an absolute
    // target below ||A|| * eps is unreachable in floating point.
    let op_scale = (0..n).fold(1.0f64, |m, i| m.max(op.diag()[i].abs()));

    let mut v = vec![1.0; n];
    let norm0 = (n as f64).sqrt();
    for x in &mut v {
        *x /= norm0;
    }
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let mut w = lu.solve(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Numeric("inverse iteration produced the zero vector".into()));
        }
        for x in &mut w {
            *x /= norm;
        }
        let aw = op.matvec(&w);
        lambda = aw.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        residual = aw
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        v = w;
        if residual <= tol * op_scale {
            // Sign-normalize positive with sup-norm 1.
            let (mut max_abs, mut max_signed) = (0.0f64, 0.0f64);
            for &x in &v {
                if x.abs() > max_abs {
                    max_abs = x.abs();
                    max_signed = x;
                }
            }
            for x in &mut v {
                *x /= max_signed;
            }
            if v.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::Numeric(
                    "principal eigenfunction is not strictly positive".into(),
                ));
            }
            return Ok(EigenResult {
                lambda1: lambda,
                phi: v,
                iterations: it,
                residual,
            });
        }
    }
    let _ = lambda;
    Err(Error::Convergence {
        what: "inverse power iteration",
        residual,
        iterations: max_iter,
    })
}

/// Principal eigenpair of the refuge Laplacian; the eigenfunction is
/// extended by zero to the full grid.
#[derive(Debug, Clone)]
pub struct RefugeEigen {
    pub lambda: f64,
    /// Refuge eigenfunction extended by zero to all interior nodes.
    pub psi: GridFunction,
}

pub fn refuge_eigenvalue(grid: &Grid, weight: &WeightField, tol: f64) -> Result<RefugeEigen> {
    let (op, nodes) = refuge_operator(grid, weight)?;
    let eig = principal_eigen(&op, tol, DEFAULT_EIGEN_MAX_ITER)?;
    let mut psi = GridFunction::zeros(grid);
    for (loc, &k) in nodes.iter().enumerate() {
        psi.values_mut()[k] = eig.phi[loc];
    }
    Ok(RefugeEigen {
        lambda: eig.lambda1,
        psi,
    })
}

/// Closed-form principal eigenvalue of the discrete 1D Dirichlet
/// Laplacian on an interval of length `len` with `n` interior points:
/// `(4/h^2) sin^2(pi h / (2 len))`.
pub fn discrete_lambda1_interval(len: f64, n: usize) -> f64 {
    let h = len / (n as f64 + 1.0);
    4.0 / (h * h) * (std::f64::consts::PI * h / (2.0 * len)).sin().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{assemble_laplacian, WeightShape};

    fn lambda1_1d(len: f64, n: usize) -> f64 {
        let h = len / (n as f64 + 1.0);
        4.0 / (h * h) * (std::f64::consts::PI / len * h / 2.0).sin().powi(2)
    }

    #[test]
    fn closed_form_1d_eigenvalue() {
        let n = 199;
        let g = Grid::interval(0.0, 1.0, n).unwrap();
        let a = assemble_laplacian(&g);
        let eig = principal_eigen(&a, 1e-12, 10_000).unwrap();
        let exact = lambda1_1d(1.0, n);
        assert!(
            ((eig.lambda1 - exact) / exact).abs() < 1e-9,
            "{} vs {}",
            eig.lambda1,
            exact
        );
        assert!(eig.phi.iter().all(|&x| x > 0.0));
        assert!((eig.phi.iter().cloned().fold(0.0f64, f64::max) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let g = Grid::interval(0.0, 1.0, 99).unwrap();
        let a = assemble_laplacian(&g);
        let c = 3.75;
        let shifted = a.with_potential(&vec![c; a.n()]);
        let e0 = principal_eigen(&a, 1e-12, 10_000).unwrap();
        let e1 = principal_eigen(&shifted, 1e-12, 10_000).unwrap();
        assert!((e1.lambda1 - e0.lambda1 - c).abs() < 1e-10);
    }

    #[test]
    fn unit_square_converges_to_2_pi_squared() {
        let target = 2.0 * std::f64::consts::PI.powi(2);
        let g = Grid::unit_square(31).unwrap();
        let a = assemble_laplacian(&g);
        let eig = principal_eigen(&a, 1e-10, 10_000).unwrap();
        assert!(((eig.lambda1 - target) / target).abs() < 2e-3);
    }

    #[test]
    fn rayleigh_quotient_consistency() {
        let g = Grid::unit_square(15).unwrap();
        let a = assemble_laplacian(&g);
        let eig = principal_eigen(&a, 1e-10, 10_000).unwrap();
        let av = a.matvec(&eig.phi);
        let num: f64 = av.iter().zip(&eig.phi).map(|(x, y)| x * y).sum();
        let den: f64 = eig.phi.iter().map(|x| x * x).sum();
        assert!((num / den - eig.lambda1).abs() < 1e-9);
    }

    #[test]
    fn eigenvalue_monotone_in_potential() {
        let g = Grid::interval(0.0, 1.0, 49).unwrap();
        let a = assemble_laplacian(&g);
        let v1 = vec![0.0; a.n()];
        let mut v2 = v1.clone();
        for (k, v) in v2.iter_mut().enumerate() {
            if k % 3 == 0 {
                *v = 2.0;
            }
        }
        let e1 = principal_eigen(&a.with_potential(&v1), 1e-11, 10_000).unwrap();
        let e2 = principal_eigen(&a.with_potential(&v2), 1e-11, 10_000).unwrap();
        assert!(e2.lambda1 > e1.lambda1);
    }

    #[test]
    fn refuge_eigenvalue_cases() {
        // b = 0: refuge eigenvalue equals lambda_1 of the full domain.
        let g = Grid::unit_square(21).unwrap();
        let w0 = WeightField::build(&g, WeightShape::Zero).unwrap();
        let full = principal_eigen(&assemble_laplacian(&g), 1e-11, 10_000).unwrap();
        let r0 = refuge_eigenvalue(&g, &w0, 1e-11).unwrap();
        assert!((r0.lambda - full.lambda1).abs() < 1e-9);

        // Nonempty bump: strict domain inclusion raises the eigenvalue,
        // and shrinking the bump radius moves it back toward lambda_1.
        let big = WeightField::build(
            &g,
            WeightShape::DiskBump {
                b0: 1.0,
                center: (0.5, 0.5),
                radius: 0.25,
            },
        )
        .unwrap();
        let small = WeightField::build(
            &g,
            WeightShape::DiskBump {
                b0: 1.0,
                center: (0.5, 0.5),
                radius: 0.15,
            },
        )
        .unwrap();
        let rb = refuge_eigenvalue(&g, &big, 1e-11).unwrap();
        let rs = refuge_eigenvalue(&g, &small, 1e-11).unwrap();
        assert!(rb.lambda > rs.lambda && rs.lambda > full.lambda1);
        // Extension by zero vanishes on the bump.
        for k in 0..g.num_interior() {
            if big.value(k) > 0.0 {
                assert_eq!(rb.psi.values()[k], 0.0);
            }
        }
    }
}
