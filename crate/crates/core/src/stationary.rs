//! Stationary positive solutions of the dual semilinear problem
//! `-Delta v = lambda f(v) f'(v) - b(x) f(v)^p f'(v)` and of the
//! classical `kappa = 0` logistic problem, plus branch continuation in
//! `lambda` and linearized stability.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{
    assemble_laplacian, auxiliary_supersolution_field, Grid, GridFunction, LinearOperator,
    WeightField,
};
use crate::eigen::{principal_eigen, refuge_eigenvalue, RefugeEigen, DEFAULT_EIGEN_MAX_ITER};
use crate::error::{Error, Result};
use crate::transform::{self, DualTransform};

/// Iteration controls for the nonlinear solves.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Residual sup-norm target.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Backtracking factor in (0,1).
    pub damping: f64,
    /// Switch to the shifted monotone scheme when Newton stalls.
    pub monotone_fallback: bool,
    /// Shift M of the monotone scheme; 0 selects an adaptive Lipschitz bound.
    pub monotone_shift: f64,
    pub max_monotone: usize,
    /// Sup-norm below which a solution is declared trivial.
    pub zero_threshold: f64,
    /// Seed for randomized probes.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton: 500,
            damping: 0.5,
            monotone_fallback: true,
            monotone_shift: 0.0,
            max_monotone: 2000,
            zero_threshold: 1e-8,
            seed: 0,
        }
    }
}

/// One record of a lambda sweep.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    pub kappa: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    /// Principal eigenvalue of the linearization; NaN when not computed.
    pub stability_eig: f64,
    pub newton_iters: usize,
    pub converged_to_zero: bool,
    /// Set when the solve at this lambda failed; the sweep continues.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub solutions: Vec<GridFunction>,
    /// Count of nodewise lambda-monotonicity violations between
    /// consecutive accepted positive solutions.
    pub monotone_violations: usize,
}

impl Branch {
    /// CSV columns: lambda,kappa,sup_norm,l2_norm,stability_eig,newton_iters,converged_to_zero.
    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(
            w,
            "lambda,kappa,sup_norm,l2_norm,stability_eig,newton_iters,converged_to_zero"
        )?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                p.lambda, p.kappa, p.sup_norm, p.l2_norm, p.stability_eig, p.newton_iters,
                p.converged_to_zero
            )?;
        }
        Ok(())
    }
}

/// A discretized stationary problem with its spectral data precomputed.
pub struct StationaryProblem {
    grid: Grid,
    weight: WeightField,
    transform: DualTransform,
    laplacian: LinearOperator,
    lambda1: f64,
    phi1: Vec<f64>,
    refuge: Option<RefugeEigen>,
}

impl StationaryProblem {
    pub fn new(grid: &Grid, weight: &WeightField, transform: DualTransform) -> Result<Self> {
        let laplacian = assemble_laplacian(grid);
        let eig = principal_eigen(&laplacian, 1e-11, DEFAULT_EIGEN_MAX_ITER)?;
        let refuge = if weight.has_refuge() && weight.values().iter().any(|&v| v > 0.0) {
            Some(refuge_eigenvalue(grid, weight, 1e-11)?)
        } else {
            None
        };
        Ok(Self {
            grid: grid.clone(),
            weight: weight.clone(),
            transform,
            laplacian,
            lambda1: eig.lambda1,
            phi1: eig.phi,
            refuge,
        })
    }

    /// Same discretization and spectral data, different transform
    /// parameters (the eigen data do not depend on kappa or p).
    pub fn with_transform(&self, transform: DualTransform) -> Self {
        Self {
            grid: self.grid.clone(),
            weight: self.weight.clone(),
            transform,
            laplacian: self.laplacian.clone(),
            lambda1: self.lambda1,
            phi1: self.phi1.clone(),
            refuge: self.refuge.clone(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weight(&self) -> &WeightField {
        &self.weight
    }

    pub fn transform(&self) -> DualTransform {
        self.transform
    }

    pub fn laplacian(&self) -> &LinearOperator {
        &self.laplacian
    }

    /// Principal Dirichlet eigenvalue of the full domain.
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn phi1(&self) -> &[f64] {
        &self.phi1
    }

    /// Refuge eigenvalue, when the weight has a nonempty proper refuge.
    pub fn lambda_b0(&self) -> Option<f64> {
        self.refuge.as_ref().map(|r| r.lambda)
    }

    pub fn refuge_eigenfunction(&self) -> Option<&GridFunction> {
        self.refuge.as_ref().map(|r| &r.psi)
    }

    fn reaction_field(&self, lambda: f64, v: &[f64]) -> Result<Vec<f64>> {
        let t = self.transform;
        v.iter()
            .enumerate()
            .map(|(k, &vk)| transform::reaction(t.kappa, t.p, lambda, self.weight.value(k), vk))
            .collect()
    }

    fn reaction_deriv_field(&self, lambda: f64, v: &[f64]) -> Result<Vec<f64>> {
        let t = self.transform;
        v.iter()
            .enumerate()
            .map(|(k, &vk)| {
                transform::reaction_derivative(t.kappa, t.p, lambda, self.weight.value(k), vk)
            })
            .collect()
    }

    /// Sup-norm of `A v - reaction(v)`.
    pub fn residual_sup(&self, lambda: f64, v: &GridFunction) -> Result<f64> {
        let av = self.laplacian.matvec(v.values());
        let re = self.reaction_field(lambda, v.values())?;
        Ok(av
            .iter()
            .zip(&re)
            .fold(0.0f64, |m, (a, r)| m.max((a - r).abs())))
    }

    /// Damped Newton on `A v - reaction(v) = 0`, iterates clipped at 0.
    /// Falls back to the shifted monotone scheme when Newton stalls.
    pub fn solve_dual(
        &self,
        lambda: f64,
        config: &SolverConfig,
        init: &GridFunction,
    ) -> Result<GridFunction> {
        Ok(self.newton(lambda, config, init)?.0)
    }

    fn newton(
        &self,
        lambda: f64,
        config: &SolverConfig,
        init: &GridFunction,
    ) -> Result<(GridFunction, usize)> {
        let n = self.grid.num_interior();
        let mut v: Vec<f64> = init.values().iter().map(|&x| x.max(0.0)).collect();
        let mut step_sup = f64::INFINITY;
        let mut monotone_rounds = 0usize;
        let mut it = 0usize;
        while it < config.max_newton {
            it += 1;
            let av = self.laplacian.matvec(&v);
            let re = self.reaction_field(lambda, &v)?;
            let r: Vec<f64> = av.iter().zip(&re).map(|(a, g)| a - g).collect();
            let res = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let v_sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if res <= config.newton_tol && step_sup <= (1e-6 * v_sup).max(1e-12) {
                // At or below the bifurcation point the zero state is
                // non-hyperbolic and Newton can stall at a tiny spurious
                // amplitude with the residual at the rounding floor; no
                // positive solution exists there, so a small converged
                // iterate belongs to the zero branch.
                if lambda <= self.lambda1 * (1.0 + 1e-9) && v_sup < 1e-3 {
                    return Ok((GridFunction::zeros(&self.grid), it));
                }
                return Ok((GridFunction::from_values(&self.grid, v)?, it));
            }
            let rd = self.reaction_deriv_field(lambda, &v)?;
            let neg_rd: Vec<f64> = rd.iter().map(|x| -x).collect();
            let jac = self.laplacian.with_potential(&neg_rd);
            let delta = match jac.factor() {
                Ok(lu) => lu.solve(&r),
                Err(_) => {
                    // Singular Jacobian (lambda at an eigenvalue of the
                    // linearization); nudge with a tiny shift.
                    jac.shifted(1e-10 * (1.0 + lambda.abs())).factor()?.solve(&r)
                }
            };
            let mut s = 1.0f64;
            let mut accepted = false;
            while s >= 1e-8 {
                let trial: Vec<f64> = (0..n).map(|k| (v[k] - s * delta[k]).max(0.0)).collect();
                let av_t = self.laplacian.matvec(&trial);
                let re_t = self.reaction_field(lambda, &trial)?;
                let res_t = av_t
                    .iter()
                    .zip(&re_t)
                    .fold(0.0f64, |m, (a, g)| m.max((a - g).abs()));
                let trial_sup = trial.iter().fold(0.0f64, |m, &x| m.max(x));
                let v_sup = v.iter().fold(0.0f64, |m, &x| m.max(x));
                // A full clip to zero has zero residual but abandons the
                // positive branch; shrink the step instead.
                if trial_sup == 0.0 && v_sup > 10.0 * config.zero_threshold {
                    s *= config.damping;
                    continue;
                }
                if res_t < res * (1.0 - 1e-4 * s) || res_t == 0.0 {
                    step_sup = (0..n).fold(0.0f64, |m, k| m.max((trial[k] - v[k]).abs()));
                    v = trial;
                    accepted = true;
                    break;
                }
                s *= config.damping;
            }
            if !accepted {
                // The line search cannot improve a residual that is already
                // at the rounding floor of evaluating A v - reaction(v).
                // The floor scales with the stencil terms before
                // cancellation, not with |A v| itself.
                let v_sup_f = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let re_max = re.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let diag_max = self
                    .laplacian
                    .diag()
                    .iter()
                    .fold(0.0f64, |m, x| m.max(x.abs()));
                let floor = 32.0 * f64::EPSILON * (2.0 * diag_max * v_sup_f + re_max);
                if res <= config.newton_tol.max(floor) {
                    let v_sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    if lambda <= self.lambda1 * (1.0 + 1e-9) && v_sup < 1e-3 {
                        return Ok((GridFunction::zeros(&self.grid), it));
                    }
                    return Ok((GridFunction::from_values(&self.grid, v)?, it));
                }
                if config.monotone_fallback && monotone_rounds < 3 {
                    monotone_rounds += 1;
                    let from = GridFunction::from_values(&self.grid, v.clone())?;
                    let relaxed = self.monotone_iterate(
                        lambda,
                        config.monotone_shift,
                        &from,
                        config.max_monotone,
                        config.newton_tol,
                    )?;
                    v = relaxed.values().to_vec();
                    step_sup = f64::INFINITY;
                } else {
                    return Err(Error::Convergence {
                        what: "damped Newton on the dual problem",
                        residual: res,
                        iterations: it,
                    });
                }
            }
        }
        let gf = GridFunction::from_values(&self.grid, v)?;
        let res = self.residual_sup(lambda, &gf)?;
        if res <= config.newton_tol {
            Ok((gf, it))
        } else {
            Err(Error::Convergence {
                what: "damped Newton on the dual problem",
                residual: res,
                iterations: it,
            })
        }
    }

    /// Shifted monotone scheme `v_{n+1} = (A + M I)^{-1} (reaction(v_n) + M v_n)`.
    ///
    /// Order-preserving when `M` dominates `-reaction'` on the iterates;
    /// `shift = 0` selects that bound adaptively (at least `lambda`).
    pub fn monotone_iterate(
        &self,
        lambda: f64,
        shift: f64,
        from: &GridFunction,
        max_iter: usize,
        tol: f64,
    ) -> Result<GridFunction> {
        let mut v = from.values().to_vec();
        let fixed = shift > 0.0;
        let mut m = if fixed {
            shift
        } else {
            let rd = self.reaction_deriv_field(lambda, &v)?;
            rd.iter().fold(lambda.abs(), |acc, &x| acc.max(-x))
        };
        let mut lu = self.laplacian.shifted(m).factor()?;
        for _ in 0..max_iter {
            if !fixed {
                let rd = self.reaction_deriv_field(lambda, &v)?;
                let needed = rd.iter().fold(lambda.abs(), |acc, &x| acc.max(-x));
                if needed > m {
                    m = 2.0 * needed;
                    lu = self.laplacian.shifted(m).factor()?;
                }
            }
            let re = self.reaction_field(lambda, &v)?;
            let rhs: Vec<f64> = re.iter().zip(&v).map(|(g, x)| g + m * x).collect();
            let next: Vec<f64> = lu.solve(&rhs).iter().map(|&x| x.max(0.0)).collect();
            let diff = next
                .iter()
                .zip(&v)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            v = next;
            if diff <= tol {
                break;
            }
        }
        GridFunction::from_values(&self.grid, v)
    }

    /// The subsolution `eps(lambda) * psi` with `psi` the refuge
    /// eigenfunction extended by zero and `eps = h^{-1}(lambda_b0/lambda)`.
    pub fn subsolution(&self, lambda: f64) -> Result<GridFunction> {
        let refuge = self.refuge.as_ref().ok_or_else(|| {
            Error::Config("subsolution requires a weight with a proper refuge".into())
        })?;
        if !(lambda > refuge.lambda) {
            return Err(Error::Domain(format!(
                "subsolution needs lambda > lambda_b0 = {}, got {lambda}",
                refuge.lambda
            )));
        }
        let eps = transform::h_inverse(self.transform.kappa, refuge.lambda / lambda)?;
        let sub = refuge.psi.scale(eps);
        // Nodewise residual inequality A v <= reaction(v) on refuge-interior
        // nodes (all lattice neighbors inside the refuge).
        let mask = self.weight.refuge_mask();
        let av = self.laplacian.matvec(sub.values());
        let re = self.reaction_field(lambda, sub.values())?;
        for k in 0..sub.len() {
            if mask[k]
                && self.grid.neighbors(k).iter().all(|&nb| mask[nb])
                && av[k] > re[k] + 1e-8
            {
                return Err(Error::Numeric(format!(
                    "subsolution inequality violated at node {k}: {} > {}",
                    av[k], re[k]
                )));
            }
        }
        Ok(sub)
    }

    /// The supersolution `K(lambda) e`, with `e` the auxiliary field of the
    /// enlarged box and `K = (1+margin) * lambda/sqrt(2 kappa) * max(1, 1/min e)`.
    ///
    /// Only defined for `kappa > 0`: the bound `lambda f f' <= lambda/sqrt(2 kappa)`
    /// is what makes a lambda-independent profile work.
    pub fn supersolution(&self, lambda: f64, margin: f64) -> Result<GridFunction> {
        let kappa = self.transform.kappa;
        if !(kappa > 0.0) {
            return Err(Error::Domain(
                "supersolution construction requires kappa > 0".into(),
            ));
        }
        let (a0, b0) = self.grid.extents(0);
        let mut len = b0 - a0;
        if self.grid.dim() == 2 {
            let (a1, b1) = self.grid.extents(1);
            len = len.min(b1 - a1);
        }
        let e = auxiliary_supersolution_field(&self.grid, 0.25 * len)?;
        let min_e = e.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let k = (1.0 + margin) * lambda.max(0.0) / (2.0 * kappa).sqrt() * (1.0 / min_e).max(1.0);
        let sup = e.scale(k);
        let av = self.laplacian.matvec(sup.values());
        let re = self.reaction_field(lambda, sup.values())?;
        for i in 0..sup.len() {
            if av[i] < re[i] - 1e-8 {
                return Err(Error::Numeric(format!(
                    "supersolution inequality violated at node {i}: {} < {}",
                    av[i], re[i]
                )));
            }
        }
        Ok(sup)
    }

    /// Largest multiple of `phi_1` from a geometric ladder that is a
    /// nodewise discrete subsolution; generic seed when no refuge exists.
    fn eigenfunction_seed(&self, lambda: f64) -> Result<Option<GridFunction>> {
        let mut eps = 1.0f64;
        for _ in 0..60 {
            let v: Vec<f64> = self.phi1.iter().map(|&x| eps * x).collect();
            let av = self.laplacian.matvec(&v);
            let re = self.reaction_field(lambda, &v)?;
            if av.iter().zip(&re).all(|(a, g)| *a <= *g + 1e-14) {
                return Ok(Some(GridFunction::from_values(&self.grid, v)?));
            }
            eps *= 0.5;
        }
        Ok(None)
    }

    /// Robust driver: seeds from the refuge subsolution (when available and
    /// lambda > lambda_b0) or the eigenfunction ladder, runs Newton, and
    /// re-seeds through the monotone scheme if the iterate collapses onto
    /// the trivial branch while lambda > lambda_1.
    pub fn solve_positive(&self, lambda: f64, config: &SolverConfig) -> Result<GridFunction> {
        let seed = self.initial_guess(lambda)?;
        self.solve_positive_from(lambda, config, &seed)
    }

    /// Default seed for a positive solve at this `lambda`.
    pub fn initial_guess(&self, lambda: f64) -> Result<GridFunction> {
        if let Some(r) = &self.refuge {
            if lambda > r.lambda * (1.0 + 1e-12) {
                return self.subsolution(lambda);
            }
        }
        if lambda > self.lambda1 {
            if let Some(seed) = self.eigenfunction_seed(lambda)? {
                return Ok(seed);
            }
        }
        // Below lambda_1 any positive bump works; Newton drives it to zero.
        GridFunction::from_values(
            &self.grid,
            self.phi1.iter().map(|&x| 0.5 * x).collect(),
        )
    }

    pub fn solve_positive_from(
        &self,
        lambda: f64,
        config: &SolverConfig,
        init: &GridFunction,
    ) -> Result<GridFunction> {
        let sol = self.solve_dual(lambda, config, init)?;
        if sol.sup_norm() > config.zero_threshold || lambda <= self.lambda1 * (1.0 + 1e-9) {
            return Ok(sol);
        }
        // Collapse onto the trivial branch above lambda_1: climb back up
        // from a genuine subsolution with the order-preserving scheme.
        // Near the bifurcation the climb contracts slowly, so alternate
        // growing climb rounds with Newton attempts; the climbed state is
        // kept between rounds because monotone progress accumulates.
        let seed = self.initial_guess(lambda)?;
        if seed.sup_norm() <= config.zero_threshold {
            return Ok(sol);
        }
        let mut state = seed;
        let mut round_iters = 500.max(config.max_monotone / 4);
        let mut last = sol;
        for _ in 0..5 {
            state =
                self.monotone_iterate(lambda, config.monotone_shift, &state, round_iters, 1e-9)?;
            last = self.solve_dual(lambda, config, &state)?;
            if last.sup_norm() > config.zero_threshold {
                return Ok(last);
            }
            round_iters *= 2;
        }
        Ok(last)
    }

    /// Primal field `Psi = f_kappa(Theta)`, nodewise.
    pub fn recover_primal(&self, theta: &GridFunction) -> Result<GridFunction> {
        let kappa = self.transform.kappa;
        let values: Result<Vec<f64>> = theta.values().iter().map(|&t| transform::f(kappa, t)).collect();
        GridFunction::from_values(&self.grid, values?)
    }

    /// Principal eigenvalue of the linearized operator at `theta`.
    pub fn stability_eigen(&self, lambda: f64, theta: &GridFunction) -> Result<f64> {
        let t = self.transform;
        let potential: Result<Vec<f64>> = theta
            .values()
            .iter()
            .enumerate()
            .map(|(k, &vk)| {
                transform::linearized_potential(t.kappa, t.p, lambda, self.weight.value(k), vk)
            })
            .collect();
        let op = self.laplacian.with_potential(&potential?);
        Ok(principal_eigen(&op, 1e-10, DEFAULT_EIGEN_MAX_ITER)?.lambda1)
    }

    /// March lambda on a uniform grid with warm starts, recording one
    /// branch point per value. Nodewise monotonicity between consecutive
    /// accepted positive solutions is tallied in the result.
    pub fn branch_continuation(
        &self,
        lambda_from: f64,
        lambda_to: f64,
        steps: usize,
        config: &SolverConfig,
    ) -> Result<Branch> {
        if steps < 2 {
            return Err(Error::Domain("branch continuation needs at least 2 steps".into()));
        }
        let mut points = Vec::with_capacity(steps);
        let mut solutions = Vec::with_capacity(steps);
        let mut monotone_violations = 0usize;
        let mut warm: Option<GridFunction> = None;
        let mut prev_positive: Option<GridFunction> = None;
        for i in 0..steps {
            let lambda =
                lambda_from + (lambda_to - lambda_from) * i as f64 / (steps as f64 - 1.0);
            let solve = match &warm {
                Some(w) if w.sup_norm() > config.zero_threshold => {
                    self.solve_positive_from(lambda, config, w)
                }
                _ => self.solve_positive(lambda, config),
            };
            match solve {
                Ok(sol) => {
                    let sup = sol.sup_norm();
                    let zero = sup <= config.zero_threshold;                    let stability = if !zero && self.transform.p >= 3.0 {
                        self.stability_eigen(lambda, &sol).unwrap_or(f64::NAN)
                    } else {
                        f64::NAN
                    };
                    if !zero {
                        if let Some(prev) = &prev_positive {
                            if !prev.le(&sol, 1e-9) {
                                monotone_violations += 1;
                            }
                        }
                        prev_positive = Some(sol.clone());
                    }
                    points.push(BranchPoint {
                        lambda,
                        kappa: self.transform.kappa,
                        sup_norm: sup,
                        l2_norm: sol.l2_norm(),
                        stability_eig: stability,
                        newton_iters: 0,
                        converged_to_zero: zero,
                        error: None,
                    });
                    warm = Some(sol.clone());
                    solutions.push(sol);
                }
                Err(e) => {
                    points.push(BranchPoint {
                        lambda,
                        kappa: self.transform.kappa,
                        sup_norm: f64::NAN,
                        l2_norm: f64::NAN,
                        stability_eig: f64::NAN,
                        newton_iters: 0,
                        converged_to_zero: false,
                        error: Some(e.to_string()),
                    });
                    solutions.push(GridFunction::zeros(&self.grid));
                    warm = None;
                }
            }
        }
        Ok(Branch {
            points,
            solutions,
            monotone_violations,
        })
    }

    /// Multi-start uniqueness probe: positive solves from `starts` random
    /// initializations; returns the max pairwise sup-distance.
    pub fn uniqueness_probe(
        &self,
        lambda: f64,
        starts: usize,
        config: &SolverConfig,
    ) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let reference = self.solve_positive(lambda, config)?;
        let scale = reference.sup_norm().max(0.1);
        let mut worst = 0.0f64;
        let mut sols = vec![reference];
        for _ in 0..starts {
            let init = GridFunction::from_values(
                &self.grid,
                self.phi1
                    .iter()
                    .map(|&x| x * rng.gen_range(0.05..2.0) * scale * rng.gen_range(0.5..1.5))
                    .collect(),
            )?;
            let sol = self.solve_positive_from(lambda, config, &init)?;
            for other in &sols {
                worst = worst.max(sol.sup_distance(other));
            }
            sols.push(sol);
        }
        Ok(worst)
    }
}

/// Independent solver for the classical `kappa = 0` logistic problem
/// `-Delta u = lambda u - b(x) u^p`; deliberately bypasses the dual
/// transform so it can serve as an oracle for `solve_dual` at `kappa = 0`.
pub fn solve_logistic(
    grid: &Grid,
    weight: &WeightField,
    p: f64,
    lambda: f64,
    config: &SolverConfig,
) -> Result<GridFunction> {
    let a = assemble_laplacian(grid);
    let eig = principal_eigen(&a, 1e-11, DEFAULT_EIGEN_MAX_ITER)?;
    let n = grid.num_interior();
    let react = |u: f64, b: f64| -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            lambda * u - b * u.powf(p)
        }
    };
    let react_d = |u: f64, b: f64| -> f64 {
        if u < 0.0 {
            0.0
        } else {
            lambda - p * b * u.powf(p - 1.0)
        }
    };
    // Seed: largest eigenfunction multiple that is a nodewise subsolution,
    // then climb with the order-preserving scheme so Newton starts inside
    // the positive solution's basin rather than the trivial one.
    let mut u: Vec<f64> = {
        let mut eps = 1.0f64;
        let mut chosen = vec![0.0; n];
        if lambda > eig.lambda1 {
            for _ in 0..60 {
                let v: Vec<f64> = eig.phi.iter().map(|&x| eps * x).collect();
                let av = a.matvec(&v);
                if (0..n).all(|k| av[k] <= react(v[k], weight.value(k)) + 1e-14) {
                    chosen = v;
                    break;
                }
                eps *= 0.5;
            }
            let mut shift = (0..n).fold(lambda.abs(), |m, k| m.max(-react_d(chosen[k], weight.value(k))));
            let mut lu = a.shifted(shift).factor()?;
            for _ in 0..400 {
                let needed = (0..n).fold(lambda.abs(), |m, k| m.max(-react_d(chosen[k], weight.value(k))));
                if needed > shift {
                    shift = 2.0 * needed;
                    lu = a.shifted(shift).factor()?;
                }
                let rhs: Vec<f64> = (0..n)
                    .map(|k| react(chosen[k], weight.value(k)) + shift * chosen[k])
                    .collect();
                let next: Vec<f64> = lu.solve(&rhs).iter().map(|&x| x.max(0.0)).collect();
                let diff = (0..n).fold(0.0f64, |m, k| m.max((next[k] - chosen[k]).abs()));
                chosen = next;
                if diff <= 1e-6 {
                    break;
                }
            }
        } else {
            chosen = eig.phi.iter().map(|&x| 0.5 * x).collect();
        }
        chosen
    };
    let mut step_sup = f64::INFINITY;
    for it in 1..=config.max_newton {
        let av = a.matvec(&u);
        let r: Vec<f64> = (0..n).map(|k| av[k] - react(u[k], weight.value(k))).collect();
        let res = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let u_sup = u.iter().fold(0.0f64, |m, x| m.max(*x));
        if res <= config.newton_tol && step_sup <= (1e-6 * u_sup).max(1e-12) {
            return GridFunction::from_values(grid, u);
        }
        let neg_rd: Vec<f64> = (0..n).map(|k| -react_d(u[k], weight.value(k))).collect();
        let jac = a.with_potential(&neg_rd);
        let delta = match jac.factor() {
            Ok(lu) => lu.solve(&r),
            Err(_) => jac.shifted(1e-10 * (1.0 + lambda.abs())).factor()?.solve(&r),
        };
        let mut s = 1.0f64;
        let mut accepted = false;
        while s >= 1e-8 {
            let trial: Vec<f64> = (0..n).map(|k| (u[k] - s * delta[k]).max(0.0)).collect();
            let av_t = a.matvec(&trial);
            let res_t = (0..n)
                .map(|k| (av_t[k] - react(trial[k], weight.value(k))).abs())
                .fold(0.0f64, f64::max);
            let trial_sup = trial.iter().fold(0.0f64, |m, &x| m.max(x));
            let u_sup = u.iter().fold(0.0f64, |m, &x| m.max(x));
            if trial_sup == 0.0 && u_sup > 10.0 * config.zero_threshold {
                s *= config.damping;
                continue;
            }
            if res_t < res * (1.0 - 1e-4 * s) || res_t == 0.0 {
                step_sup = (0..n).fold(0.0f64, |m, k| m.max((trial[k] - u[k]).abs()));
                u = trial;
                accepted = true;
                break;
            }
            s *= config.damping;
        }
        if !accepted {
            // Line search stalled: accept if the residual is already within
            // the rounding floor of evaluating A u - reaction(u). The floor
            // scales with the stencil terms before cancellation.
            let u_sup = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let re_max = (0..n).fold(0.0f64, |m, k| {
                m.max(react(u[k], weight.value(k)).abs())
            });
            let diag_max = a.diag().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let floor = 32.0 * f64::EPSILON * (2.0 * diag_max * u_sup + re_max);
            if res <= config.newton_tol.max(floor) {
                return GridFunction::from_values(grid, u);
            }
            return Err(Error::Convergence {
                what: "logistic Newton",
                residual: res,
                iterations: it,
            });
        }
    }
    let gf = GridFunction::from_values(grid, u)?;
    let av = a.matvec(gf.values());
    let res = (0..n)
        .map(|k| (av[k] - react(gf.values()[k], weight.value(k))).abs())
        .fold(0.0f64, f64::max);
    if res <= config.newton_tol {
        Ok(gf)
    } else {
        Err(Error::Convergence {
            what: "logistic Newton",
            residual: res,
            iterations: config.max_newton,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::WeightShape;

    fn interval_problem(
        n: usize,
        kappa: f64,
        p: f64,
        b0: f64,
    ) -> (Grid, WeightField, StationaryProblem) {
        let grid = Grid::interval(0.0, 1.0, n).unwrap();
        let weight = if b0 > 0.0 {
            WeightField::build(&grid, WeightShape::Constant { b0 }).unwrap()
        } else {
            WeightField::build(&grid, WeightShape::Zero).unwrap()
        };
        let problem =
            StationaryProblem::new(&grid, &weight, DualTransform::new(kappa, p).unwrap()).unwrap();
        (grid, weight, problem)
    }

    #[test]
    fn below_lambda1_converges_to_zero() {
        let (_, _, prob) = interval_problem(99, 1.0, 3.0, 1.0);
        let cfg = SolverConfig::default();
        let lambda = 0.5 * prob.lambda1();
        let sol = prob.solve_positive(lambda, &cfg).unwrap();
        assert!(sol.sup_norm() < 1e-8, "sup = {}", sol.sup_norm());
    }

    #[test]
    fn kappa_zero_matches_independent_logistic_oracle() {
        let (grid, weight, prob) = interval_problem(99, 0.0, 3.0, 1.0);
        let cfg = SolverConfig::default();
        let lambda = 3.0 * prob.lambda1();
        let dual = prob.solve_positive(lambda, &cfg).unwrap();
        let logistic = solve_logistic(&grid, &weight, 3.0, lambda, &cfg).unwrap();
        assert!(dual.sup_distance(&logistic) < 1e-8);
    }

    #[test]
    fn a_priori_bound_for_constant_weight() {
        let (_, _, prob) = interval_problem(99, 1.0, 3.0, 2.0);
        let cfg = SolverConfig::default();
        let lambda = 4.0 * prob.lambda1();
        let sol = prob.solve_positive(lambda, &cfg).unwrap();
        assert!(sol.sup_norm() > 0.1);
        let fmax = transform::f(1.0, sol.sup_norm()).unwrap();
        assert!(2.0 * fmax.powf(2.0) <= lambda + 1e-8);
    }

    #[test]
    fn residual_certificate() {
        let (_, _, prob) = interval_problem(79, 1.0, 3.0, 1.0);
        let cfg = SolverConfig::default();
        let lambda = 2.5 * prob.lambda1();
        let sol = prob.solve_positive(lambda, &cfg).unwrap();
        assert!(prob.residual_sup(lambda, &sol).unwrap() <= cfg.newton_tol);
    }

    #[test]
    fn recover_primal_bounded_by_theta() {
        let (_, _, prob) = interval_problem(79, 1.0, 3.0, 1.0);
        let cfg = SolverConfig::default();
        let sol = prob.solve_positive(3.0 * prob.lambda1(), &cfg).unwrap();
        let psi = prob.recover_primal(&sol).unwrap();
        for (a, b) in psi.values().iter().zip(sol.values()) {
            assert!(a <= b);
            if *b > 0.0 {
                assert!(a < b);
            }
        }
        // kappa = 0 keeps Theta unchanged; zero maps to zero.
        let (_, _, prob0) = interval_problem(19, 0.0, 3.0, 1.0);
        let z = GridFunction::zeros(prob0.grid());
        assert_eq!(prob0.recover_primal(&z).unwrap().values(), z.values());
    }

    #[test]
    fn supersolution_dominates_solution() {
        let (_, _, prob) = interval_problem(79, 1.0, 3.0, 1.0);
        let cfg = SolverConfig::default();
        let lambda = 20.0;
        let sup = prob.supersolution(lambda, 0.1).unwrap();
        let sol = prob.solve_positive(lambda, &cfg).unwrap();
        assert!(sol.le(&sup, 1e-10));
        // Doubling K preserves the supersolution inequality.
        let doubled = sup.scale(2.0);
        let av = prob.laplacian().matvec(doubled.values());
        let re = prob.reaction_field(lambda, doubled.values()).unwrap();
        assert!(av.iter().zip(&re).all(|(a, g)| a >= g));
        // kappa = 0 has no lambda-independent profile of this form.
        let (_, _, prob0) = interval_problem(19, 0.0, 3.0, 1.0);
        assert!(prob0.supersolution(lambda, 0.1).is_err());
    }

    #[test]
    fn branch_is_increasing_with_small_tail_at_bifurcation() {
        let (_, _, prob) = interval_problem(99, 1.0, 3.0, 1.0);
        let cfg = SolverConfig::default();
        let l1 = prob.lambda1();
        let branch = prob
            .branch_continuation(l1 * 1.001, l1 * 3.0, 20, &cfg)
            .unwrap();
        assert_eq!(branch.monotone_violations, 0);
        let sups: Vec<f64> = branch.points.iter().map(|p| p.sup_norm).collect();
        for w in sups.windows(2) {
            assert!(w[1] > w[0], "sup-norms not increasing: {w:?}");
        }
        assert!(branch.points.iter().all(|p| !p.converged_to_zero));
    }

    #[test]
    fn uniqueness_probe_agrees_across_starts() {
        let (_, _, prob) = interval_problem(79, 1.0, 3.0, 1.0);
        let cfg = SolverConfig::default();
        let spread = prob.uniqueness_probe(2.0 * prob.lambda1(), 4, &cfg).unwrap();
        assert!(spread < 1e-6, "spread = {spread}");
    }

    #[test]
    fn logistic_respects_maximum_principle_bound() {
        let grid = Grid::interval(0.0, 1.0, 99).unwrap();
        let weight = WeightField::build(&grid, WeightShape::Constant { b0: 2.0 }).unwrap();
        let cfg = SolverConfig::default();
        let a = assemble_laplacian(&grid);
        let l1 = principal_eigen(&a, 1e-11, 10_000).unwrap().lambda1;
        let lambda = 3.0 * l1;
        let sol = solve_logistic(&grid, &weight, 3.0, lambda, &cfg).unwrap();
        assert!(sol.sup_norm() > 0.0);
        assert!(sol.sup_norm() <= (lambda / 2.0).powf(0.5) + 1e-8);
        // Below lambda_1 only the trivial solution remains.
        let small = solve_logistic(&grid, &weight, 3.0, 0.9 * l1, &cfg).unwrap();
        assert!(small.sup_norm() < 1e-8);
    }
}
