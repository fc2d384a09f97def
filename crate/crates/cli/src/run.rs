//! Experiment drivers: each builds its objects from the config, writes
//! CSV artifacts into the output directory, and records one verdict per
//! checked property. All file writes happen at the end of the run.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use quasilog_core::transform;
use quasilog_core::{
    assemble_laplacian, discrete_lambda1_interval, kappa_to_zero, lambda_limits,
    minimal_large_solution, principal_eigen, refuge_eigenvalue, Compact, DualTransform, Error,
    Grid, GridFunction, Result, StationaryProblem, WeightField,
};

use crate::config::{ExperimentConfig, ExperimentKind, WeightMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One checked property: `check_id status measured threshold`.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: String,
    pub status: Status,
    pub measured: f64,
    pub threshold: f64,
}

impl Verdict {
    /// Passes when `measured <= threshold`.
    fn le(id: &str, measured: f64, threshold: f64) -> Self {
        let ok = measured.is_finite() && measured <= threshold;
        Self {
            id: id.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            threshold,
        }
    }

    /// Passes when `measured > threshold`.
    fn gt(id: &str, measured: f64, threshold: f64) -> Self {
        let ok = measured.is_finite() && measured > threshold;
        Self {
            id: id.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            threshold,
        }
    }

    /// Boolean verdict imported from a sweep flag (1 = holds).
    fn flag(id: &str, ok: bool) -> Self {
        Self {
            id: id.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
        }
    }

    fn skipped(id: &str) -> Self {
        Self {
            id: id.into(),
            status: Status::Skipped,
            measured: f64::NAN,
            threshold: f64::NAN,
        }
    }
}

/// A CSV artifact buffered until the single write pass at the end.
struct Artifact {
    name: String,
    bytes: Vec<u8>,
}

struct Outputs {
    artifacts: Vec<Artifact>,
    verdicts: Vec<Verdict>,
}

impl Outputs {
    fn new() -> Self {
        Self {
            artifacts: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut bytes = Vec::new();
        write(&mut bytes)?;
        self.artifacts.push(Artifact {
            name: name.into(),
            bytes,
        });
        Ok(())
    }
}

/// Runs the configured experiment; returns the verdicts after writing
/// all artifacts and `verdict.txt` under the output directory.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<Verdict>> {
    let mut out = Outputs::new();
    match cfg.kind {
        ExperimentKind::VerifyF => verify_f(cfg, workers, &mut out)?,
        ExperimentKind::Eig => eig(cfg, &mut out)?,
        ExperimentKind::Solve => solve(cfg, &mut out)?,
        ExperimentKind::Branch => branch(cfg, false, &mut out)?,
        ExperimentKind::Stability => branch(cfg, true, &mut out)?,
        ExperimentKind::LambdaSweep => lambda_sweep(cfg, &mut out)?,
        ExperimentKind::KappaSweep => kappa_sweep(cfg, &mut out)?,
        ExperimentKind::Large => large(cfg, &mut out)?,
    }
    write_outputs(&cfg.out_dir, &out)?;
    Ok(out.verdicts)
}

fn write_outputs(dir: &Path, out: &Outputs) -> Result<()> {
    fs::create_dir_all(dir)?;
    for a in &out.artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
    }
    let mut text = String::new();
    for v in &out.verdicts {
        let status = match v.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        };
        writeln!(text, "{} {} {:.6e} {:.6e}", v.id, status, v.measured, v.threshold)
            .expect("writing to a String cannot fail");
    }
    fs::write(dir.join("verdict.txt"), text)?;
    Ok(())
}

fn build_grid(cfg: &ExperimentConfig) -> Result<Grid> {
    match cfg.dimension {
        1 => Grid::interval(cfg.extents_x.0, cfg.extents_x.1, cfg.n),
        _ => Grid::rectangle(cfg.extents_x, cfg.extents_y, cfg.n, cfg.n),
    }
}

fn build_problem(cfg: &ExperimentConfig) -> Result<(Grid, WeightField, StationaryProblem)> {
    let grid = build_grid(cfg)?;
    let weight = WeightField::build(&grid, cfg.weight_shape())?;
    let problem = StationaryProblem::new(&grid, &weight, DualTransform::new(cfg.kappa, cfg.p)?)?;
    Ok((grid, weight, problem))
}

// ---------------------------------------------------------------- verify-f

/// Per-sample maxima accumulated by the transform property scan.
#[derive(Clone, Copy)]
struct TransformWorst {
    fprime_bounds: f64,
    below_identity: f64,
    concavity: f64,
    second_forms: f64,
    round_trip: f64,
    h_round_trip: f64,
    kappa_monotone: f64,
}

impl TransformWorst {
    fn new() -> Self {
        Self {
            fprime_bounds: f64::NEG_INFINITY,
            below_identity: f64::NEG_INFINITY,
            concavity: f64::NEG_INFINITY,
            second_forms: 0.0,
            round_trip: 0.0,
            h_round_trip: 0.0,
            kappa_monotone: f64::NEG_INFINITY,
        }
    }

    fn merge(&mut self, o: &Self) {
        self.fprime_bounds = self.fprime_bounds.max(o.fprime_bounds);
        self.below_identity = self.below_identity.max(o.below_identity);
        self.concavity = self.concavity.max(o.concavity);
        self.second_forms = self.second_forms.max(o.second_forms);
        self.round_trip = self.round_trip.max(o.round_trip);
        self.h_round_trip = self.h_round_trip.max(o.h_round_trip);
        self.kappa_monotone = self.kappa_monotone.max(o.kappa_monotone);
    }
}

fn scan_transform(kappa: f64, ts: &[f64]) -> Result<TransformWorst> {
    let mut w = TransformWorst::new();
    for &t in ts {
        let fv = transform::f(kappa, t)?;
        let fp = transform::f_prime(kappa, t)?;
        let fs = transform::f_second(kappa, t)?;
        w.fprime_bounds = w.fprime_bounds.max((-fp).max(fp - 1.0));
        w.below_identity = w.below_identity.max(fv - t);
        w.concavity = w.concavity.max(fs);
        // Product-rule identity (f f')' = f'^4, i.e. f'^2 + f f'' = f'^4.
        let id_resid = (fp * fp + fv * fs - fp.powi(4)).abs() / (fp * fp);
        w.second_forms = w.second_forms.max(id_resid);
        let back = transform::inverse_transform(kappa, fv)?;
        w.round_trip = w.round_trip.max((back - t).abs() / t);
        if kappa > 0.0 {
            // Round trip in y: inverting h near y = 1 (t near 0) is
            // ill-conditioned in t, but h o h_inverse is stable everywhere.
            let y = transform::h(kappa, t)?;
            let y_back = transform::h(kappa, transform::h_inverse(kappa, y)?)?;
            w.h_round_trip = w.h_round_trip.max((y_back - y).abs());
            let f_stiffer = transform::f(2.0 * kappa, t)?;
            w.kappa_monotone = w.kappa_monotone.max(f_stiffer - fv);
        }
    }
    Ok(w)
}

fn verify_f(cfg: &ExperimentConfig, workers: usize, out: &mut Outputs) -> Result<()> {
    let samples = 200usize;
    let ts: Vec<f64> = (0..samples)
        .map(|i| 10f64.powf(-6.0 + 9.0 * i as f64 / (samples - 1) as f64))
        .collect();
    let kappa = cfg.kappa;

    let workers = workers.clamp(1, ts.len());
    let chunk = ts.len().div_ceil(workers);
    let mut worst = TransformWorst::new();
    let partials: Vec<Result<TransformWorst>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ts
            .chunks(chunk)
            .map(|part| scope.spawn(move || scan_transform(kappa, part)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("transform scan worker panicked"))
            .collect()
    });
    for p in partials {
        worst.merge(&p?);
    }

    let f0 = transform::f(kappa, 0.0)?;
    out.verdicts.push(Verdict::le("transform_f_origin", f0.abs(), 1e-12));
    out.verdicts
        .push(Verdict::le("transform_fprime_bounds", worst.fprime_bounds, 1e-10));
    out.verdicts
        .push(Verdict::le("transform_f_below_identity", worst.below_identity, 1e-10));
    out.verdicts
        .push(Verdict::le("transform_concavity", worst.concavity, 1e-10));
    out.verdicts.push(Verdict::le(
        "transform_product_rule_identity",
        worst.second_forms,
        1e-10,
    ));
    out.verdicts
        .push(Verdict::le("transform_round_trip", worst.round_trip, 1e-12));
    if kappa > 0.0 {
        out.verdicts
            .push(Verdict::le("transform_h_round_trip", worst.h_round_trip, 1e-10));
        out.verdicts
            .push(Verdict::le("transform_kappa_monotone", worst.kappa_monotone, 0.0));
    } else {
        out.verdicts.push(Verdict::skipped("transform_h_round_trip"));
        out.verdicts.push(Verdict::skipped("transform_kappa_monotone"));
    }

    out.csv("transform.csv", |w| {
        use std::io::Write as _;
        writeln!(w, "t,f,f_prime,f_second,h")?;
        for &t in &ts {
            let h = if kappa > 0.0 {
                transform::h(kappa, t)?
            } else {
                1.0
            };
            writeln!(
                w,
                "{},{},{},{},{}",
                t,
                transform::f(kappa, t)?,
                transform::f_prime(kappa, t)?,
                transform::f_second(kappa, t)?,
                h,
            )?;
        }
        Ok(())
    })
}

// -------------------------------------------------------------------- eig

fn eig(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let grid = build_grid(cfg)?;
    let weight = WeightField::build(&grid, cfg.weight_shape())?;
    let lap = assemble_laplacian(&grid);
    let eig = principal_eigen(&lap, 1e-12, quasilog_core::eigen::DEFAULT_EIGEN_MAX_ITER)?;

    // For a tensor-product grid the discrete principal eigenvalue is the
    // sum of the per-axis closed-form values.
    let mut reference = 0.0;
    for axis in 0..grid.dim() {
        let (a, b) = grid.extents(axis);
        reference += discrete_lambda1_interval(b - a, grid.n(axis));
    }
    let rel = (eig.lambda1 - reference).abs() / reference;
    out.verdicts.push(Verdict::le("eig_discrete_match", rel, 1e-9));

    let av = lap.matvec(&eig.phi);
    let resid = av
        .iter()
        .zip(&eig.phi)
        .fold(0.0f64, |m, (a, p)| m.max((a - eig.lambda1 * p).abs()));
    out.verdicts.push(Verdict::le("eig_residual", resid, 1e-6));

    let phi_min = eig.phi.iter().cloned().fold(f64::INFINITY, f64::min);
    out.verdicts.push(Verdict::gt("eig_positive", phi_min, 0.0));

    let mut lambda_b0 = f64::NAN;
    if weight.has_refuge() && cfg.weight_mode == WeightMode::DiskBump {
        let refuge = refuge_eigenvalue(&grid, &weight, 1e-10)?;
        lambda_b0 = refuge.lambda;
        // The refuge eigenvalue must sit strictly above lambda_1.
        out.verdicts
            .push(Verdict::gt("eig_refuge_gap", lambda_b0 - eig.lambda1, 0.0));
    } else {
        out.verdicts.push(Verdict::skipped("eig_refuge_gap"));
    }

    let phi = GridFunction::from_values(&grid, eig.phi.clone())?;
    out.csv("eigenfunction.csv", |w| phi.write_csv(w))?;
    out.csv("eigenvalues.csv", |w| {
        use std::io::Write as _;
        writeln!(w, "lambda1,lambda_b0,discrete_reference")?;
        writeln!(w, "{},{},{}", eig.lambda1, lambda_b0, reference)?;
        Ok(())
    })
}

// ------------------------------------------------------------------ solve

/// Residual acceptance level: the Newton target, relaxed to the rounding
/// floor of the stencil arithmetic at the solution's amplitude.
fn residual_gate(problem: &StationaryProblem, lambda: f64, sup: f64, tol: f64) -> f64 {
    let diag_max = problem
        .laplacian()
        .diag()
        .iter()
        .fold(0.0f64, |m, &d| m.max(d.abs()));
    tol.max(64.0 * f64::EPSILON * (2.0 * diag_max * sup + lambda.abs() * sup))
}

fn solve(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (_grid, _weight, problem) = build_problem(cfg)?;
    let lambda = if cfg.lambda > 0.0 {
        cfg.lambda
    } else {
        2.0 * problem.lambda1()
    };

    let v = problem.solve_positive(lambda, &cfg.solver)?;
    let psi = problem.recover_primal(&v)?;
    let sup = v.sup_norm();

    let resid = problem.residual_sup(lambda, &v)?;
    out.verdicts.push(Verdict::le(
        "solve_residual",
        resid,
        residual_gate(&problem, lambda, sup, cfg.solver.newton_tol),
    ));
    let min = v.values().iter().cloned().fold(f64::INFINITY, f64::min);
    out.verdicts.push(Verdict::le("solve_nonnegative", -min, 0.0));

    if lambda <= problem.lambda1() * (1.0 + 1e-12) {
        out.verdicts.push(Verdict::le("solve_zero_below_lambda1", sup, 1e-8));
        out.verdicts.push(Verdict::skipped("solve_positive_above_lambda1"));
    } else {
        out.verdicts.push(Verdict::skipped("solve_zero_below_lambda1"));
        out.verdicts.push(Verdict::gt(
            "solve_positive_above_lambda1",
            sup,
            cfg.solver.zero_threshold,
        ));
    }

    if cfg.weight_mode == WeightMode::Constant && lambda > problem.lambda1() {
        let fmax = transform::f(cfg.kappa, sup)?;
        let lhs = cfg.b0 * fmax.powf(cfg.p - 1.0);
        out.verdicts.push(Verdict::le("solve_apriori_bound", lhs - lambda, 1e-8));
    } else {
        out.verdicts.push(Verdict::skipped("solve_apriori_bound"));
    }

    out.csv("dual.csv", |w| v.write_csv(w))?;
    out.csv("primal.csv", |w| psi.write_csv(w))
}

// ----------------------------------------------------------------- branch

fn branch(cfg: &ExperimentConfig, with_stability: bool, out: &mut Outputs) -> Result<()> {
    let (_grid, weight, problem) = build_problem(cfg)?;
    let lambda1 = problem.lambda1();
    let from = if cfg.lambda_from > 0.0 {
        cfg.lambda_from
    } else {
        1.001 * lambda1
    };
    let to = if cfg.lambda_to > 0.0 { cfg.lambda_to } else { 3.0 * lambda1 };
    if to <= from {
        return Err(Error::Config(format!(
            "branch range is empty: lambda_from = {from}, lambda_to = {to}"
        )));
    }

    let branch = problem.branch_continuation(from, to, cfg.steps, &cfg.solver)?;

    let errors = branch.points.iter().filter(|p| p.error.is_some()).count();
    out.verdicts.push(Verdict::le("branch_no_errors", errors as f64, 0.0));

    if to <= lambda1 {
        let nonzero = branch.points.iter().filter(|p| !p.converged_to_zero).count();
        out.verdicts
            .push(Verdict::le("branch_zero_below_lambda1", nonzero as f64, 0.0));
        out.verdicts.push(Verdict::skipped("branch_positive"));
        out.verdicts.push(Verdict::skipped("branch_sup_increasing"));
    } else {
        out.verdicts.push(Verdict::skipped("branch_zero_below_lambda1"));
        let positive: Vec<_> = branch
            .points
            .iter()
            .filter(|p| p.lambda > lambda1 * (1.0 + 1e-9) && p.error.is_none())
            .collect();
        let collapsed = positive.iter().filter(|p| p.converged_to_zero).count();
        out.verdicts.push(Verdict::le("branch_positive", collapsed as f64, 0.0));
        let decreases = positive
            .windows(2)
            .filter(|w| w[1].sup_norm <= w[0].sup_norm)
            .count();
        out.verdicts
            .push(Verdict::le("branch_sup_increasing", decreases as f64, 0.0));
    }

    if cfg.weight_mode == WeightMode::Constant {
        let mut worst = f64::NEG_INFINITY;
        for p in branch.points.iter().filter(|p| p.error.is_none()) {
            let fmax = transform::f(cfg.kappa, p.sup_norm)?;
            worst = worst.max(cfg.b0 * fmax.powf(cfg.p - 1.0) - p.lambda);
        }
        out.verdicts.push(Verdict::le("branch_apriori_bound", worst, 1e-8));
    } else {
        out.verdicts.push(Verdict::skipped("branch_apriori_bound"));
    }

    if with_stability {
        let min_eig = branch
            .points
            .iter()
            .filter(|p| p.error.is_none() && !p.converged_to_zero)
            .fold(f64::INFINITY, |m, p| m.min(p.stability_eig));
        out.verdicts.push(Verdict::gt("stability_min_eig", min_eig, 0.0));

        // The linearized potential must be exactly -reaction'(theta).
        if let Some(v) = branch.solutions.last() {
            let t = problem.transform();
            let mut worst = 0.0f64;
            let lambda_last = branch
                .points
                .iter()
                .rev()
                .find(|p| p.error.is_none() && !p.converged_to_zero)
                .map(|p| p.lambda)
                .unwrap_or(to);
            for (k, &x) in v.values().iter().enumerate() {
                let b = weight.value(k);
                let pot = t.linearized_potential(lambda_last, b, x)?;
                let rd = t.reaction_derivative(lambda_last, b, x)?;
                worst = worst.max((pot + rd).abs());
            }
            out.verdicts
                .push(Verdict::le("stability_potential_consistency", worst, 1e-12));
        }
    }

    out.csv("branch.csv", |w| branch.write_csv(w))
}

// ----------------------------------------------------------------- sweeps

fn refuge_compacts(grid: &Grid, weight: &WeightField) -> Result<Vec<Compact>> {
    if weight.has_refuge() && grid.dim() == 2 {
        let margin = 3.0 * grid.h(0).max(grid.h(1));
        Ok(vec![Compact::refuge(grid, weight, "refuge", margin)?])
    } else {
        Ok(Vec::new())
    }
}

fn lambda_sweep(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (grid, weight, problem) = build_problem(cfg)?;
    let lambda1 = problem.lambda1();
    let grid_l: Vec<f64> = if !cfg.lambdas.is_empty() {
        cfg.lambdas.clone()
    } else if cfg.lambda_from > 0.0 && cfg.lambda_to > cfg.lambda_from {
        let n = cfg.steps;
        (0..n)
            .map(|i| {
                cfg.lambda_from + (cfg.lambda_to - cfg.lambda_from) * i as f64 / (n - 1) as f64
            })
            .collect()
    } else {
        [2.0, 5.0, 10.0, 20.0, 50.0].iter().map(|m| m * lambda1).collect()
    };

    let compacts = refuge_compacts(&grid, &weight)?;
    let report = lambda_limits(&problem, &grid_l, &compacts, &cfg.solver, cfg.warm)?;
    for (name, ok) in &report.flags {
        out.verdicts.push(Verdict::flag(&format!("sweep_{name}"), *ok));
    }
    out.csv("sweep.csv", |w| report.write_csv(w))
}

fn kappa_sweep(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (grid, weight, problem) = build_problem(cfg)?;
    let lambda1 = problem.lambda1();
    let lambda = if cfg.lambda > 0.0 {
        cfg.lambda
    } else if let Some(lb0) = problem.lambda_b0() {
        0.5 * (lambda1 + lb0)
    } else {
        2.0 * lambda1
    };

    let mut compacts = refuge_compacts(&grid, &weight)?;
    // Above the refuge eigenvalue with p > 3, also track a compact in the
    // interior of the positivity disk for the radial-oracle comparison.
    if let quasilog_core::WeightShape::DiskBump { center, radius, .. } = cfg.weight_shape() {
        let above = problem.lambda_b0().is_some_and(|lb0| lambda >= lb0);
        if above && cfg.p > 3.0 {
            let margin = 3.0 * grid.h(0).max(grid.h(1));
            compacts.push(Compact::disk(&grid, "core", center, 0.3 * radius, margin)?);
        }
    }

    let report = kappa_to_zero(
        &grid,
        &weight,
        cfg.p,
        lambda,
        &cfg.kappas,
        &compacts,
        &cfg.solver,
        cfg.warm,
        cfg.mesh_n,
    )?;
    for (name, ok) in &report.flags {
        out.verdicts.push(Verdict::flag(&format!("sweep_{name}"), *ok));
    }
    out.csv("sweep.csv", |w| report.write_csv(w))
}

// ------------------------------------------------------------------ large

fn large(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let lambda = if cfg.lambda > 0.0 { cfg.lambda } else { 4.0 };
    let sol = minimal_large_solution(
        cfg.ball_dimension,
        cfg.ball_radius,
        lambda,
        cfg.b0,
        cfg.p,
        cfg.mesh_n,
        None,
    )?;

    // The interior differences first grow while the boundary data is still
    // below the solution's interior scale, then decrease monotonically in
    // the exhaustion tail; check the tail past the peak.
    let peak = sol
        .interior_diffs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    let increases = sol.interior_diffs[peak..]
        .windows(2)
        .filter(|w| w[1] >= w[0])
        .count();
    out.verdicts
        .push(Verdict::le("large_diffs_decreasing", increases as f64, 0.0));
    let last = sol.interior_diffs.last().copied().unwrap_or(f64::NAN);
    out.verdicts.push(Verdict::le("large_converged", last, 1e-6));

    let ko = quasilog_core::keller_osserman_margin(cfg.p, 1e3)?;
    out.verdicts
        .push(Verdict::le("ko_unit_increment", ko.unit_increment, 1e-3));
    out.verdicts
        .push(Verdict::gt("ko_tail_exponent", ko.tail_exponent, 1.0));

    out.csv("profile.csv", |w| sol.profile.write_csv(w))?;
    out.csv("schedule.csv", |w| {
        use std::io::Write as _;
        writeln!(w, "m,interior_diff")?;
        for (m, d) in sol.m_values.iter().skip(1).zip(&sol.interior_diffs) {
            writeln!(w, "{},{}", m, d)?;
        }
        Ok(())
    })
}
