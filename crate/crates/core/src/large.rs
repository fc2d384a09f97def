//! Boundary blow-up solutions of the radial absorption problem
//! `-v'' - ((N-1)/r) v' = lambda v - b0 g(v)` on a ball, obtained as the
//! limit of finite boundary data M doubling to infinity, plus the
//! Keller-Osserman integrability certificate and the uniform-in-kappa
//! compact bound it yields for the 2D stationary solutions.

use std::io::Write;

use crate::domain::{Grid, GridFunction, WeightField, WeightShape};
use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::stationary::{SolverConfig, StationaryProblem};
use crate::transform::{self, DualTransform};

/// Radial field on `[0, R]`; `boundary_value = None` tags the M = infinity limit.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    pub dim: usize,
    pub boundary_value: Option<f64>,
}

impl RadialProfile {
    pub fn radius(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// Piecewise-linear evaluation, clamped to `[0, R]`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.radius());
        let i = match self.r.iter().position(|&x| x >= r) {
            Some(0) => return self.values[0],
            Some(i) => i,
            None => return *self.values.last().unwrap(),
        };
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        let w = (r - r0) / (r1 - r0);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }

    pub fn max_on(&self, r_max: f64) -> f64 {
        self.r
            .iter()
            .zip(&self.values)
            .filter(|(r, _)| **r <= r_max + 1e-14)
            .fold(0.0f64, |m, (_, v)| m.max(*v))
    }

    /// CSV columns: r,value,M_tag  (M_tag is `inf` for the limit profile).
    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "r,value,M_tag")?;
        let tag = match self.boundary_value {
            Some(m) => format!("{m}"),
            None => "inf".to_string(),
        };
        for (r, v) in self.r.iter().zip(&self.values) {
            writeln!(w, "{},{},{}", r, v, tag)?;
        }
        Ok(())
    }
}

/// Mesh on `[0, R]`: uniform in the interior, the last cells shrinking
/// geometrically by 0.9 toward `r = R` to resolve the boundary layer.
pub fn graded_mesh(radius: f64, n: usize) -> Vec<f64> {
    let q: f64 = 0.9;
    let k = (n / 3).min(280);
    // base spacing c: c*(n-k) + c*q*(1-q^k)/(1-q) = R
    let tail: f64 = (1..=k).map(|j| q.powi(j as i32)).sum();
    let c = radius / ((n - k) as f64 + tail);
    // Geometric cells never shrink below a floor that keeps adjacent nodes
    // well separated in double precision.
    let floor = radius * 1e-12;
    let mut r = Vec::with_capacity(n + 1);
    r.push(0.0);
    let mut acc = 0.0;
    for i in 0..n {
        let h = if i < n - k {
            c
        } else {
            (c * q.powi((i - (n - k) + 1) as i32)).max(floor)
        };
        acc += h;
        r.push(acc);
    }
    // Rescale so the last node lands exactly on the boundary.
    let stretch = radius / acc;
    for x in r.iter_mut() {
        *x *= stretch;
    }
    *r.last_mut().unwrap() = radius;
    r
}

/// Absorption nonlinearity of the radial problem `-Delta v = lambda v - b0 * a(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Absorption {
    /// `a(v) = g(v) = f_1^{p+1}(v)/v`: the dual-problem bound used for caps.
    DualCap,
    /// `a(v) = v^p`: the classical logistic absorption of the kappa = 0 limit.
    PowerLaw,
}

impl Absorption {
    fn value(self, p: f64, t: f64) -> Result<f64> {
        match self {
            Absorption::DualCap => transform::g(p, t),
            Absorption::PowerLaw => Ok(t.powf(p)),
        }
    }

    fn deriv(self, p: f64, t: f64) -> Result<f64> {
        match self {
            Absorption::DualCap => transform::g_prime(p, t),
            Absorption::PowerLaw => Ok(if t > 0.0 { p * t.powf(p - 1.0) } else { 0.0 }),
        }
    }
}

fn radial_solve_on_mesh(
    dim: usize,
    r: &[f64],
    lambda: f64,
    b_at: &dyn Fn(f64) -> f64,
    p: f64,
    m: f64,
    init: Option<&[f64]>,
    absorption: Absorption,
) -> Result<Vec<f64>> {
    let n = r.len() - 1; // unknowns v[0..n], boundary v[n] = m
    let nd = dim as f64;
    let mut v: Vec<f64> = match init {
        Some(w) => w.to_vec(),
        None => vec![m; n],
    };
    // Residual F and componentwise scale of its terms, with v[n] = m.
    let eval = |v: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut fres = vec![0.0; n];
        let mut scale = vec![0.0; n];
        let at = |v: &[f64], i: usize| if i == n { m } else { v[i] };
        for i in 0..n {
            // `mag` tracks the absolute size of the stencil terms before
            // cancellation; the residual target is relative to it.
            let (lin, mag) = if i == 0 {
                let h0 = r[1] - r[0];
                let c = 2.0 * nd / (h0 * h0);
                (c * (v[0] - at(v, 1)), c * (v[0].abs() + at(v, 1).abs()))
            } else {
                let hm = r[i] - r[i - 1];
                let hp = r[i + 1] - r[i];
                let (vm, vi, vp) = (at(v, i - 1), v[i], at(v, i + 1));
                let s = hm * hp * (hm + hp);
                let lap = 2.0 * (hp * vm - (hm + hp) * vi + hm * vp) / s;
                let grad = (-hp * hp * vm + (hp * hp - hm * hm) * vi + hm * hm * vp) / s;
                let w = (nd - 1.0) / r[i];
                let mag = (2.0 + w * hp.max(hm)) * (hp * vm.abs() + (hm + hp) * vi.abs() + hm * vp.abs()) / s;
                (-lap - w * grad, mag)
            };
            let b0 = b_at(r[i]);
            let gv = absorption.value(p, v[i].max(0.0))?;
            fres[i] = lin - lambda * v[i] + b0 * gv;
            scale[i] = mag + (lambda * v[i]).abs() + b0 * gv;
        }
        Ok((fres, scale))
    };
    // Absolute tolerance with a per-node roundoff floor: residual terms of
    // size `scale` cannot be evaluated more accurately than scale * eps.
    let rel_sup = |fres: &[f64], scale: &[f64]| {
        fres.iter()
            .zip(scale)
            .fold(0.0f64, |acc, (f, s)| {
                acc.max(f.abs() / (1.0 + 32.0 * f64::EPSILON * s / TOL))
            })
    };
    const TOL: f64 = 1e-9;
    let tol = TOL;
    for _ in 0..300 {
        let (fres, scale) = eval(&v)?;
        let res = rel_sup(&fres, &scale);
        if res <= tol {
            let mut out = v;
            out.push(m);
            return Ok(out);
        }
        // Tridiagonal Jacobian.
        let mut jac = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            let b0 = b_at(r[i]);
            let gp = absorption.deriv(p, v[i].max(0.0))?;
            if i == 0 {
                let h0 = r[1] - r[0];
                jac.set(0, 0, 2.0 * nd / (h0 * h0) - lambda + b0 * gp);
                if n > 1 {
                    jac.set(0, 1, -2.0 * nd / (h0 * h0));
                }
            } else {
                let hm = r[i] - r[i - 1];
                let hp = r[i + 1] - r[i];
                let s = hm * hp * (hm + hp);
                let c_lap_m = -2.0 * hp / s;
                let c_lap_0 = 2.0 * (hm + hp) / s;
                let c_lap_p = -2.0 * hm / s;
                let w = (nd - 1.0) / r[i];
                let c_grad_m = -hp * hp / s;
                let c_grad_0 = (hp * hp - hm * hm) / s;
                let c_grad_p = hm * hm / s;
                jac.set(i, i - 1, c_lap_m - w * c_grad_m);
                jac.set(i, i, c_lap_0 - w * c_grad_0 - lambda + b0 * gp);
                if i + 1 < n {
                    jac.set(i, i + 1, c_lap_p - w * c_grad_p);
                }
            }
        }
        let delta = jac.factor()?.solve(&fres);
        let mut s = 1.0f64;
        let mut accepted = false;
        while s >= 1e-10 {
            let trial: Vec<f64> = (0..n).map(|i| (v[i] - s * delta[i]).max(0.0)).collect();
            let (ft, st) = eval(&trial)?;
            let res_t = rel_sup(&ft, &st);
            if res_t < res * (1.0 - 1e-4 * s) || res_t == 0.0 {
                v = trial;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(Error::Convergence {
                what: "radial Newton",
                residual: res,
                iterations: 300,
            });
        }
    }
    let (fres, scale) = eval(&v)?;
    Err(Error::Convergence {
        what: "radial Newton",
        residual: rel_sup(&fres, &scale),
        iterations: 300,
    })
}

/// Dirichlet problem on the ball of radius `radius` in dimension `dim`
/// with constant boundary data `m`; damped Newton on the graded mesh,
/// componentwise relative residual at most 1e-9.
pub fn solve_dirichlet_ball(
    dim: usize,
    radius: f64,
    lambda: f64,
    b0: f64,
    p: f64,
    m: f64,
    mesh_n: usize,
) -> Result<RadialProfile> {
    if dim < 1 || !(radius > 0.0) || !(b0 > 0.0) || !(m > 0.0) || !(p > 1.0) {
        return Err(Error::Domain(format!(
            "solve_dirichlet_ball: need dim >= 1, radius > 0, b0 > 0, m > 0, p > 1 \
             (got dim={dim}, radius={radius}, b0={b0}, m={m}, p={p})"
        )));
    }
    if mesh_n < 8 {
        return Err(Error::Domain("solve_dirichlet_ball: mesh_n too small".into()));
    }
    let r = graded_mesh(radius, mesh_n);
    let values = radial_solve_on_mesh(dim, &r, lambda, &|_| b0, p, m, None, Absorption::DualCap)?;
    Ok(RadialProfile {
        r,
        values,
        dim,
        boundary_value: Some(m),
    })
}

/// The M = infinity limit produced by the doubling schedule.
#[derive(Debug, Clone)]
pub struct LargeSolution {
    pub profile: RadialProfile,
    /// Boundary data visited, in order.
    pub m_values: Vec<f64>,
    /// Sup over `[0, R/2]` of consecutive profile differences.
    pub interior_diffs: Vec<f64>,
}

/// Minimal blow-up solution: doubles the boundary data along `schedule`
/// (default 10 * 2^k) with warm starts until the profiles on `[0, R/2]`
/// agree to 1e-6; requires `p > 3` so that Keller-Osserman holds.
pub fn minimal_large_solution(
    dim: usize,
    radius: f64,
    lambda: f64,
    b0: f64,
    p: f64,
    mesh_n: usize,
    schedule: Option<&[f64]>,
) -> Result<LargeSolution> {
    minimal_large_solution_tol(dim, radius, lambda, b0, p, mesh_n, schedule, 0.0, Absorption::DualCap)
}

/// Same schedule, but the stopping test is `diff <= 1e-6 + rel_tol * sup`
/// with `sup` the interior sup of the current profile. Large-amplitude
/// profiles carry a rounding noise floor proportional to their size, so
/// oracle uses (where only the profile's value matters, not an absolute
/// 1e-6 agreement) stop relative to the amplitude.
pub(crate) fn minimal_large_solution_tol(
    dim: usize,
    radius: f64,
    lambda: f64,
    b0: f64,
    p: f64,
    mesh_n: usize,
    schedule: Option<&[f64]>,
    rel_tol: f64,
    absorption: Absorption,
) -> Result<LargeSolution> {
    minimal_large_solution_profile(
        dim, radius, lambda, &|_| b0, p, mesh_n, schedule, rel_tol, absorption,
    )
}

/// As `minimal_large_solution_tol`, but with a radially varying absorption
/// weight `b(r)`; the weight must stay positive on `[0, radius)` so that
/// Keller-Osserman applies on the whole ball.
pub(crate) fn minimal_large_solution_profile(
    dim: usize,
    radius: f64,
    lambda: f64,
    b_at: &dyn Fn(f64) -> f64,
    p: f64,
    mesh_n: usize,
    schedule: Option<&[f64]>,
    rel_tol: f64,
    absorption: Absorption,
) -> Result<LargeSolution> {
    if !(p > 3.0) {
        return Err(Error::Domain(format!(
            "minimal_large_solution requires p > 3 (Keller-Osserman), got p = {p}"
        )));
    }
    let default_schedule: Vec<f64> = (0..340).map(|k| 10.0 * f64::powi(2.0, k)).collect();
    let schedule: &[f64] = match schedule {
        Some(s) => s,
        None => &default_schedule,
    };
    if schedule.len() < 2 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "minimal_large_solution: schedule must be increasing with >= 2 entries".into(),
        ));
    }
    let r = graded_mesh(radius, mesh_n);
    let half = radius / 2.0;
    let mut m_values = Vec::new();
    let mut interior_diffs = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for &m in schedule {
        let init = prev.as_ref().map(|v| &v[..v.len() - 1]);
        let values = radial_solve_on_mesh(dim, &r, lambda, b_at, p, m, init, absorption)?;
        m_values.push(m);
        if let Some(pv) = &prev {
            let (diff, sup) = r
                .iter()
                .zip(values.iter().zip(pv.iter()))
                .filter(|(rr, _)| **rr <= half + 1e-14)
                .fold((0.0f64, 0.0f64), |(d, s), (_, (a, b))| {
                    (d.max((a - b).abs()), s.max(a.abs()))
                });
            interior_diffs.push(diff);
            if diff <= 1e-6 + rel_tol * sup {
                return Ok(LargeSolution {
                    profile: RadialProfile {
                        r,
                        values,
                        dim,
                        boundary_value: None,
                    },
                    m_values,
                    interior_diffs,
                });
            }
        }
        prev = Some(values);
    }
    Err(Error::Convergence {
        what: "large-solution schedule (interior never stabilized; Keller-Osserman failure?)",
        residual: *interior_diffs.last().unwrap_or(&f64::NAN),
        iterations: schedule.len(),
    })
}

/// Keller-Osserman certificate for the absorption g at this p.
#[derive(Debug, Clone, Copy)]
pub struct KellerOsserman {
    /// Quadrature value of the tail integral on `[1, T]`.
    pub partial_integral: f64,
    /// Integrand `1/sqrt(G(T))` at the cutoff: the unit-step increment
    /// of the partial integral.
    pub unit_increment: f64,
    /// Closed-form bound on the remainder `[T, inf)` from `g(t) >= g(1) t^{(p-1)/2}`.
    pub analytic_tail_bound: f64,
    /// `(p+1)/4`; convergence requires this to exceed 1.
    pub tail_exponent: f64,
}

fn simpson_g(p: f64, a: f64, b: f64, panels: usize) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let x0 = a + i as f64 * h;
        let x1 = x0 + h;
        let xm = 0.5 * (x0 + x1);
        total += h / 6.0 * (transform::g(p, x0)? + 4.0 * transform::g(p, xm)? + transform::g(p, x1)?);
    }
    Ok(total)
}

/// Evaluates `I(T) = int_1^T dt / sqrt(G(t))`, `G(t) = int_0^t g`, by a
/// joint RK4 integration in log-t, and the analytic remainder bound.
pub fn keller_osserman_margin(p: f64, t_cut: f64) -> Result<KellerOsserman> {
    if !(p > 3.0) {
        return Err(Error::Domain(format!(
            "keller_osserman_margin requires p > 3, got {p}"
        )));
    }
    if !(t_cut > 1.0) {
        return Err(Error::Domain(format!(
            "keller_osserman_margin requires T > 1, got {t_cut}"
        )));
    }
    let mut g_acc = simpson_g(p, 0.0, 1.0, 400)?;
    let mut integral = 0.0;
    // d/ds G = g(e^s) e^s,  d/ds I = e^s / sqrt(G),  s = ln t.
    let steps = 4000usize;
    let h = t_cut.ln() / steps as f64;
    let mut s = 0.0f64;
    for _ in 0..steps {
        let f1 = {
            let t = s.exp();
            (transform::g(p, t)? * t, t / g_acc.sqrt())
        };
        let f2 = {
            let t = (s + 0.5 * h).exp();
            let gm = g_acc + 0.5 * h * f1.0;
            (transform::g(p, t)? * t, t / gm.sqrt())
        };
        let f3 = {
            let t = (s + 0.5 * h).exp();
            let gm = g_acc + 0.5 * h * f2.0;
            (transform::g(p, t)? * t, t / gm.sqrt())
        };
        let f4 = {
            let t = (s + h).exp();
            let gm = g_acc + h * f3.0;
            (transform::g(p, t)? * t, t / gm.sqrt())
        };
        g_acc += h / 6.0 * (f1.0 + 2.0 * f2.0 + 2.0 * f3.0 + f4.0);
        integral += h / 6.0 * (f1.1 + 2.0 * f2.1 + 2.0 * f3.1 + f4.1);
        s += h;
    }
    let beta = (p + 1.0) / 2.0;
    let c = transform::g(p, 1.0)?; // g(t) >= c t^{(p-1)/2} for t >= 1
    // G(t) >= (2c/(p+1)) (t^beta - 1) >= (2c/(p+1)) (1 - T^-beta) t^beta on [T, inf)
    let coeff = 2.0 * c / (p + 1.0) * (1.0 - t_cut.powf(-beta));
    let tail = t_cut.powf(1.0 - beta / 2.0) / ((beta / 2.0 - 1.0) * coeff.sqrt());
    Ok(KellerOsserman {
        partial_integral: integral,
        unit_increment: 1.0 / g_acc.sqrt(),
        analytic_tail_bound: tail,
        tail_exponent: (p + 1.0) / 4.0,
    })
}

/// Uniform-in-kappa bound of the dual solutions on a compact disk K
/// inside the positivity set, checked against the radial large-solution cap.
#[derive(Debug, Clone)]
pub struct CompactBoundReport {
    pub kappas: Vec<f64>,
    /// max over K of the dual solution, per kappa.
    pub compact_max: Vec<f64>,
    /// max over [0, r/2] of the minimal large solution on the comparison ball.
    pub cap: f64,
    pub ball_radius: f64,
    pub b_min: f64,
}

/// Solves the dual problem for each kappa and compares the maxima over the
/// disk K(center, radius) against the large-solution cap on the ball of
/// radius 2*radius with the weight minimum as constant absorption.
pub fn compact_bound_check(
    grid: &Grid,
    weight: &WeightField,
    kappas: &[f64],
    p: f64,
    lambda: f64,
    k_center: (f64, f64),
    k_radius: f64,
    mesh_n: usize,
    config: &SolverConfig,
) -> Result<CompactBoundReport> {
    if grid.dim() != 2 {
        return Err(Error::Config("compact_bound_check requires a 2D grid".into()));
    }
    let (bump_center, bump_radius, _b0) = match weight.shape() {
        WeightShape::DiskBump { b0, center, radius } => (center, radius, b0),
        _ => {
            return Err(Error::Config(
                "compact_bound_check requires a disk-bump weight".into(),
            ))
        }
    };
    if kappas.iter().any(|&k| !(k > 0.0 && k < 1.0)) {
        return Err(Error::Config("compact_bound_check: kappas must lie in (0,1)".into()));
    }
    let ball_radius = 2.0 * k_radius;
    let off = ((k_center.0 - bump_center.0).powi(2) + (k_center.1 - bump_center.1).powi(2)).sqrt();
    let hmax = grid.h(0).max(grid.h(1));
    if off + ball_radius >= bump_radius - hmax {
        return Err(Error::Config(format!(
            "compact disk (center {k_center:?}, radius {k_radius}) with its comparison \
             ball of radius {ball_radius} is not strictly inside the positivity disk"
        )));
    }
    let in_disk = |k: usize, rad: f64| -> bool {
        let c = grid.coords(k);
        let (x, y) = c;
        (x - k_center.0).powi(2) + (y - k_center.1).powi(2) <= rad * rad
    };
    let mut b_min = f64::INFINITY;
    let mut k_nodes = Vec::new();
    for k in 0..grid.num_interior() {
        if in_disk(k, ball_radius) {
            b_min = b_min.min(weight.value(k));
        }
        if in_disk(k, k_radius) {
            k_nodes.push(k);
        }
    }
    if k_nodes.is_empty() || !b_min.is_finite() {
        return Err(Error::Config("compact disk contains no grid nodes".into()));
    }
    let cap = minimal_large_solution_tol(
        2,
        ball_radius,
        lambda,
        b_min,
        p,
        mesh_n,
        None,
        1e-6,
        Absorption::DualCap,
    )?
    .profile
    .max_on(ball_radius / 2.0);
    let base = StationaryProblem::new(grid, weight, DualTransform::new(kappas[0], p)?)?;
    let mut compact_max = Vec::with_capacity(kappas.len());
    let mut warm: Option<GridFunction> = None;
    for &kappa in kappas {
        let prob = base.with_transform(DualTransform::new(kappa, p)?);
        let sol = match &warm {
            Some(w) => prob.solve_positive_from(lambda, config, w)?,
            None => prob.solve_positive(lambda, config)?,
        };
        let mx = k_nodes
            .iter()
            .fold(0.0f64, |m, &k| m.max(sol.values()[k]));
        compact_max.push(mx);
        warm = Some(sol);
    }
    Ok(CompactBoundReport {
        kappas: kappas.to_vec(),
        compact_max,
        cap,
        ball_radius,
        b_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::BandMatrix as Band;

    #[test]
    fn constant_dominates_when_absorption_wins() {
        // lambda = 0, b0 large: constant M is a supersolution, so the
        // solution stays below M everywhere.
        let prof = solve_dirichlet_ball(2, 1.0, 0.0, 5.0, 4.0, 0.5, 300).unwrap();
        assert!(prof.values.iter().all(|&v| v <= 0.5 + 1e-12));
        assert!(prof.values.iter().all(|&v| v >= 0.0));
        assert!((prof.values.last().unwrap() - 0.5).abs() < 1e-14);
    }

    /// Independent oracle: full-interval two-point BVP on [-R, R] with a
    /// uniform mesh and plain Newton, no radial machinery.
    fn full_interval_oracle(radius: f64, lambda: f64, b0: f64, p: f64, m: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let h = 2.0 * radius / (n as f64 + 1.0);
        let x: Vec<f64> = (1..=n).map(|i| -radius + i as f64 * h).collect();
        let mut v = vec![m; n];
        for _ in 0..200 {
            let mut fres = vec![0.0; n];
            for i in 0..n {
                let vm = if i == 0 { m } else { v[i - 1] };
                let vp = if i == n - 1 { m } else { v[i + 1] };
                let lap = (vm - 2.0 * v[i] + vp) / (h * h);
                fres[i] = -lap - lambda * v[i] + b0 * transform::g(p, v[i].max(0.0)).unwrap();
            }
            let res = fres.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if res <= 1e-11 {
                break;
            }
            let mut jac = Band::zeros(n, 1, 1);
            for i in 0..n {
                jac.set(
                    i,
                    i,
                    2.0 / (h * h) - lambda + b0 * transform::g_prime(p, v[i].max(0.0)).unwrap(),
                );
                if i > 0 {
                    jac.set(i, i - 1, -1.0 / (h * h));
                }
                if i + 1 < n {
                    jac.set(i, i + 1, -1.0 / (h * h));
                }
            }
            let delta = jac.factor().unwrap().solve(&fres);
            for i in 0..n {
                v[i] = (v[i] - delta[i]).max(0.0);
            }
        }
        (x, v)
    }

    #[test]
    fn one_dimensional_radial_matches_full_interval_solver() {
        let (radius, lambda, b0, p, m) = (0.3, 5.0, 2.0, 4.0, 2.0);
        let prof = solve_dirichlet_ball(1, radius, lambda, b0, p, m, 2000).unwrap();
        let (x, v) = full_interval_oracle(radius, lambda, b0, p, m, 3999);
        let worst = x
            .iter()
            .zip(&v)
            .filter(|(x, _)| **x >= 0.0)
            .fold(0.0f64, |acc, (x, v)| acc.max((prof.eval(*x) - v).abs()));
        assert!(worst < 1e-7, "radial vs full-interval mismatch {worst}");
    }

    #[test]
    fn dirichlet_profiles_monotone_in_boundary_data() {
        let a = solve_dirichlet_ball(2, 0.3, 5.0, 1.0, 4.0, 10.0, 400).unwrap();
        let b = solve_dirichlet_ball(2, 0.3, 5.0, 1.0, 4.0, 20.0, 400).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!(x <= &(y + 1e-9));
        }
    }

    #[test]
    fn schedule_stabilizes_with_decreasing_interior_diffs() {
        let ls = minimal_large_solution(2, 0.3, 5.0, 1.0, 4.0, 840, None).unwrap();
        assert!(ls.interior_diffs.len() >= 2);
        // The diffs rise while M is still below the interior scale, then
        // decrease strictly once the boundary data saturates it.
        let peak = ls
            .interior_diffs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        for w in ls.interior_diffs[peak..].windows(2) {
            assert!(w[1] < w[0], "diffs not decreasing past the peak");
        }
        assert!(*ls.interior_diffs.last().unwrap() <= 1e-6);
        assert!(ls.profile.boundary_value.is_none());
        // Interior values bounded along the schedule: the converged profile
        // on [0, R/2] is finite and positive.
        assert!(ls.profile.max_on(0.15).is_finite());
        assert!(ls.profile.values[0] > 0.0);
    }

    #[test]
    fn subcritical_exponent_is_rejected() {
        assert!(minimal_large_solution(2, 0.3, 5.0, 1.0, 2.0, 200, None).is_err());
        assert!(keller_osserman_margin(2.0, 100.0).is_err());
        // Finite boundary data still fine at p = 2 (exploratory regime).
        assert!(solve_dirichlet_ball(2, 0.3, 5.0, 1.0, 2.0, 10.0, 200).is_err() == false);
    }

    #[test]
    fn keller_osserman_tail_certificate() {
        let a = keller_osserman_margin(4.0, 1e3).unwrap();
        let b = keller_osserman_margin(4.0, 1e4).unwrap();
        assert!(a.tail_exponent > 1.0);
        assert!((a.tail_exponent - 1.25).abs() < 1e-14);
        // Partial integrals increase and stay below partial + analytic tail.
        assert!(b.partial_integral > a.partial_integral);
        assert!(b.partial_integral <= a.partial_integral + a.analytic_tail_bound + 1e-6);
        // Unit-step increments shrink below 1e-3 past T = 1e3.
        assert!(a.unit_increment < 1e-3);
        assert!(b.unit_increment < a.unit_increment);
        // p = 5 absorbs harder, so its tail is smaller at equal T.
        let c = keller_osserman_margin(5.0, 1e3).unwrap();
        assert!(c.unit_increment < a.unit_increment);
        assert!(c.analytic_tail_bound < a.analytic_tail_bound);
    }

    #[test]
    fn quadrature_oracle_for_partial_integral() {
        // Independent check of I(T) on a modest T with plain composite
        // Simpson over t (G built by cumulative fine Simpson).
        let p = 4.0;
        let t_cut = 50.0;
        let n = 20_000usize;
        let h = (t_cut - 1.0) / n as f64;
        let mut g_acc = simpson_g(p, 0.0, 1.0, 2000).unwrap();
        let mut integral = 0.0;
        for i in 0..n {
            let t0 = 1.0 + i as f64 * h;
            let tm = t0 + 0.5 * h;
            let t1 = t0 + h;
            let g0 = g_acc;
            let gm = g0 + simpson_g(p, t0, tm, 1).unwrap();
            let g1 = gm + simpson_g(p, tm, t1, 1).unwrap();
            integral += h / 6.0 * (1.0 / g0.sqrt() + 4.0 / gm.sqrt() + 1.0 / g1.sqrt());
            g_acc = g1;
        }
        let ko = keller_osserman_margin(p, t_cut).unwrap();
        assert!(
            (ko.partial_integral - integral).abs() < 1e-6,
            "RK4 {} vs Simpson {}",
            ko.partial_integral,
            integral
        );
    }

    #[test]
    fn dual_reaction_below_g_for_kappa_below_one() {
        // t*f' <= f gives f_kappa^p f_kappa' <= f_kappa^{p+1}/t at every
        // kappa; for kappa >= 1 the right side is further dominated by g
        // because f_kappa <= f_1 there.
        for &kappa in &[0.02, 0.1, 0.5, 1.0, 3.0, 20.0] {
            for i in 0..100 {
                let t = 1e-3 * (10.0f64).powf(6.0 * i as f64 / 99.0);
                let fv = transform::f(kappa, t).unwrap();
                let fp = transform::f_prime(kappa, t).unwrap();
                let ratio_bound = fv.powi(5) / t;
                assert!(fv.powi(4) * fp <= ratio_bound * (1.0 + 1e-9));
                if kappa >= 1.0 {
                    let g = transform::g(4.0, t).unwrap();
                    assert!(fv.powi(4) * fp <= g * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn g_prime_matches_finite_differences() {
        for i in 1..60 {
            let t = 0.05 * i as f64;
            let h = 1e-6 * t.max(1.0);
            let fd = (transform::g(4.0, t + h).unwrap() - transform::g(4.0, t - h).unwrap())
                / (2.0 * h);
            let an = transform::g_prime(4.0, t).unwrap();
            assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "t={t}: {fd} vs {an}");
        }
    }
}
