//! Direct banded LU factorization and a preconditioned conjugate
//! gradient, the two linear-solve backends used by every PDE module.
//!
//! The banded LU follows the classic LAPACK `dgbtf2` layout: `kl` extra
//! storage rows absorb the fill produced by partial pivoting.

use crate::error::{Error, Result};

/// General band matrix with `kl` subdiagonals and `ku` superdiagonals,
/// stored column-major with room for pivoting fill.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        // fill rows occupy offsets 0..kl; original band starts at kl.
        j * self.ldab + (self.kl + self.ku + i) - j
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!((j >= i && j - i <= self.ku) || (i >= j && i - j <= self.kl));
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j);
        self.data[o] = v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let diff = i.max(j) - i.min(j);
        if (j >= i && diff > self.ku) || (i > j && diff > self.kl) {
            return 0.0;
        }
        self.data[self.offset(i, j)]
    }

    /// In-place LU with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl) = (self.n, self.kl);
        let kv = self.kl + self.ku; // effective upper bandwidth after fill
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // pivot search in column j
            let mut jp = 0usize;
            let mut amax = self.data[self.offset(j, j)].abs();
            for i in 1..=km {
                let v = self.data[self.offset(j + i, j)].abs();
                if v > amax {
                    amax = v;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if amax == 0.0 {
                return Err(Error::Numeric(format!(
                    "banded LU: zero pivot at column {j}"
                )));
            }
            let ju = (j + kv).min(n - 1);
            if jp != 0 {
                for k in j..=ju {
                    let oa = self.offset(j, k);
                    let ob = self.offset(j + jp, k);
                    self.data.swap(oa, ob);
                }
            }
            let piv = self.data[self.offset(j, j)];
            for i in 1..=km {
                let o = self.offset(j + i, j);
                self.data[o] /= piv;
            }
            for k in (j + 1)..=ju {
                let ujk = self.data[self.offset(j, k)];
                if ujk != 0.0 {
                    for i in 1..=km {
                        let l = self.data[self.offset(j + i, j)];
                        let o = self.offset(j + i, k);
                        self.data[o] -= l * ujk;
                    }
                }
            }
        }
        Ok(BandLu { mat: self, ipiv })
    }
}

/// Factored form returned by [`BandMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandLu {
    mat: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Solve `A x = b`, overwriting `b` with the solution.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.mat;
        let (n, kl) = (m.n, m.kl);
        let kv = m.kl + m.ku;
        assert_eq!(b.len(), n);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for i in 1..=km {
                    b[j + i] -= m.data[m.offset(j + i, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= m.data[m.offset(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    b[i] -= m.data[m.offset(i, j)] * bj;
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Jacobi-preconditioned conjugate gradient for symmetric positive
/// definite operators, used above the direct-factorization size cutoff.
pub fn conjugate_gradient(
    matvec: &dyn Fn(&[f64]) -> Vec<f64>,
    diag: &[f64],
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let rhs_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..max_iter {
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * rhs_norm {
            return Ok(x);
        }
        let ap = matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::Numeric("CG: operator not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rnorm <= tol * rhs_norm {
        Ok(x)
    } else {
        Err(Error::Convergence {
            what: "conjugate gradient",
            residual: rnorm / rhs_norm,
            iterations: max_iter,
        })
    }
}
