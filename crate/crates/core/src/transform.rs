//! The dual change of variables `f_kappa` and every scalar map derived
//! from it.
//!
//! `f_kappa` is the solution of the Cauchy problem
//! `f'(t) = 1/sqrt(1 + 2*kappa*f(t)^2)`, `f(0) = 0`. Its inverse has the
//! closed form `F(u) = u*sqrt(1+2*kappa*u^2)/2 + asinh(sqrt(2*kappa)*u)/(2*sqrt(2*kappa))`,
//! so `f` itself is evaluated by safeguarded Newton inversion of `F`.
//! All evaluators are total on `t >= 0` and pure, hence safe to call from
//! any number of threads.

use crate::error::{Error, Result};

/// Below this threshold `kappa` is treated as exactly zero; the
/// `asinh(sqrt(2k)u)/sqrt(2k)` term cancels catastrophically otherwise.
pub const KAPPA_ZERO: f64 = 1e-14;

/// Residual tolerance for the Newton inversion of `F`, relative to `max(1, t)`.
const INVERT_TOL: f64 = 2e-15;
const INVERT_MAX_ITER: usize = 200;

/// Parameter bundle `(kappa, p)` for the dual transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualTransform {
    pub kappa: f64,
    pub p: f64,
}

impl DualTransform {
    pub fn new(kappa: f64, p: f64) -> Result<Self> {
        if !(kappa >= 0.0) {
            return Err(Error::Domain(format!("kappa must be >= 0, got {kappa}")));
        }
        if !(p > 1.0) {
            return Err(Error::Domain(format!("p must be > 1, got {p}")));
        }
        Ok(Self { kappa, p })
    }

    pub fn f(&self, t: f64) -> Result<f64> {
        f(self.kappa, t)
    }

    pub fn f_prime(&self, t: f64) -> Result<f64> {
        f_prime(self.kappa, t)
    }

    pub fn f_second(&self, t: f64) -> Result<f64> {
        f_second(self.kappa, t)
    }

    pub fn h(&self, t: f64) -> Result<f64> {
        h(self.kappa, t)
    }

    pub fn h_inverse(&self, y: f64) -> Result<f64> {
        h_inverse(self.kappa, y)
    }

    pub fn reaction(&self, lambda: f64, b: f64, t: f64) -> Result<f64> {
        reaction(self.kappa, self.p, lambda, b, t)
    }

    pub fn reaction_derivative(&self, lambda: f64, b: f64, t: f64) -> Result<f64> {
        reaction_derivative(self.kappa, self.p, lambda, b, t)
    }

    pub fn linearized_potential(&self, lambda: f64, b: f64, t: f64) -> Result<f64> {
        linearized_potential(self.kappa, self.p, lambda, b, t)
    }
}

/// `F(u) = integral_0^u sqrt(1 + 2*kappa*s^2) ds`, evaluated in closed form.
///
/// This is the inverse function of `f_kappa`; strictly increasing in `u`.
pub fn inverse_transform(kappa: f64, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("inverse_transform: u must be >= 0, got {u}")));
    }
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!(
            "inverse_transform: kappa must be >= 0, got {kappa}"
        )));
    }
    if kappa < KAPPA_ZERO {
        return Ok(u);
    }
    let s = (2.0 * kappa).sqrt();
    Ok(0.5 * u * (1.0 + 2.0 * kappa * u * u).sqrt() + (s * u).asinh() / (2.0 * s))
}

/// Derivative of `inverse_transform` with respect to `u`.
fn inverse_transform_deriv(kappa: f64, u: f64) -> f64 {
    (1.0 + 2.0 * kappa * u * u).sqrt()
}

/// The dual transform itself: the unique `u >= 0` with `F(u) = t`.
///
/// Newton from the upper seed `u0 = t` (valid since `F(u) >= u`),
/// safeguarded by bisection on `[0, t]`.
pub fn f(kappa: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("f: t must be >= 0, got {t}")));
    }
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("f: kappa must be >= 0, got {kappa}")));
    }
    if kappa < KAPPA_ZERO || t == 0.0 {
        return Ok(t);
    }
    let tol = INVERT_TOL * t;
    let (mut lo, mut hi) = (0.0_f64, t);
    let mut u = t;
    let mut residual = inverse_transform(kappa, u)? - t;
    for _ in 0..INVERT_MAX_ITER {
        if residual.abs() <= tol {
            return Ok(u);
        }
        if residual > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let mut next = u - residual / inverse_transform_deriv(kappa, u);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        u = next;
        residual = inverse_transform(kappa, u)? - t;
    }
    if residual.abs() <= tol {
        Ok(u)
    } else {
        Err(Error::Convergence {
            what: "dual transform Newton inversion",
            residual: residual.abs(),
            iterations: INVERT_MAX_ITER,
        })
    }
}

/// `f'(t) = 1/sqrt(1 + 2*kappa*f(t)^2)`; lies in `(0, 1]` and equals 1 at `t = 0`.
pub fn f_prime(kappa: f64, t: f64) -> Result<f64> {
    let fv = f(kappa, t)?;
    Ok(1.0 / (1.0 + 2.0 * kappa * fv * fv).sqrt())
}

/// `f''(t) = -2*kappa*f*(f')^4`; nonpositive.
pub fn f_second(kappa: f64, t: f64) -> Result<f64> {
    let fv = f(kappa, t)?;
    let fp = 1.0 / (1.0 + 2.0 * kappa * fv * fv).sqrt();
    Ok(-2.0 * kappa * fv * fp.powi(4))
}

/// `h(t) = f(t) f'(t) / t`, extended by its limit `h(0) = 1`.
///
/// Strictly decreasing on `(0, inf)` with limit 0 at infinity.
pub fn h(kappa: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("h: t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let fv = f(kappa, t)?;
    let fp = 1.0 / (1.0 + 2.0 * kappa * fv * fv).sqrt();
    Ok(fv * fp / t)
}

/// Inverse of `h(kappa, .)` on `(0, 1)`, by bisection on a geometrically
/// grown bracket. Strictly decreasing in `y`.
pub fn h_inverse(kappa: f64, y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("h_inverse: y must be in (0,1), got {y}")));
    }
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!(
            "h_inverse: kappa must be > 0, got {kappa}"
        )));
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while h(kappa, hi)? > y {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Numeric("h_inverse bracket overflow".into()));
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let hm = h(kappa, mid)?;
        if (hm - y).abs() <= 1e-10 {
            return Ok(mid);
        }
        if hm > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The bracket is at rounding width; return the midpoint regardless of
    // the residual gate (h is locally flat only at the far tail).
    Ok(mid)
}

/// `g(t) = f_1(t)^{p+1} / t`, extended by `g(0) = 0`; the absorption
/// nonlinearity of the radial blow-up problem.
pub fn g(p: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("g: t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let fv = f(1.0, t)?;
    Ok(fv.powf(p + 1.0) / t)
}

/// `g'(t) = ((p+1) f_1^p f_1' - g) / t`, extended by `g'(0) = 0` (valid
/// for p > 1 since g(t) ~ t^p near 0).
pub fn g_prime(p: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("g_prime: t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let fv = f(1.0, t)?;
    let fp = 1.0 / (1.0 + 2.0 * fv * fv).sqrt();
    Ok(((p + 1.0) * fv.powf(p) * fp - fv.powf(p + 1.0) / t) / t)
}

/// Right-hand side of the dual problem:
/// `lambda*f*f' - b*f^p*f'`, extended by 0 for `t < 0`.
pub fn reaction(kappa: f64, p: f64, lambda: f64, b: f64, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let fv = f(kappa, t)?;
    let fp = 1.0 / (1.0 + 2.0 * kappa * fv * fv).sqrt();
    Ok(lambda * fv * fp - b * fv.powf(p) * fp)
}

/// Derivative of `reaction` in `t`:
/// `lambda*(f')^4 - b*f^{p-1}*[(p-1)(f')^2 + (f')^4]`; 0 for `t < 0`.
pub fn reaction_derivative(kappa: f64, p: f64, lambda: f64, b: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Ok(0.0);
    }
    let fv = f(kappa, t)?;
    let fp = 1.0 / (1.0 + 2.0 * kappa * fv * fv).sqrt();
    let fp2 = fp * fp;
    let fp4 = fp2 * fp2;
    let fpow = if fv == 0.0 && p - 1.0 > 0.0 {
        0.0
    } else {
        fv.powf(p - 1.0)
    };
    Ok(lambda * fp4 - b * fpow * ((p - 1.0) * fp2 + fp4))
}

/// Diagonal potential of the linearized operator at a state value `t`:
/// `-lambda*[(f')^2 - 2*kappa*f^2*(f')^4] + b*f^{p-1}*[(p-1)(f')^2 + (f')^4]`.
///
/// Algebraically equal to `-reaction_derivative`, but assembled from the
/// independent form so the identity can be cross-checked.
pub fn linearized_potential(kappa: f64, p: f64, lambda: f64, b: f64, t: f64) -> Result<f64> {
    let fv = f(kappa, t.max(0.0))?;
    let fp = 1.0 / (1.0 + 2.0 * kappa * fv * fv).sqrt();
    let fp2 = fp * fp;
    let fp4 = fp2 * fp2;
    let fpow = if fv == 0.0 && p - 1.0 > 0.0 {
        0.0
    } else {
        fv.powf(p - 1.0)
    };
    Ok(-lambda * (fp2 - 2.0 * kappa * fv * fv * fp4) + b * fpow * ((p - 1.0) * fp2 + fp4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Adaptive Simpson quadrature, used only as an independent oracle.
    fn simpson_adaptive(func: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(func: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (func(a) + 4.0 * func(0.5 * (a + b)) + func(b))
        }
        fn recurse(
            func: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            whole: f64,
            tol: f64,
            depth: usize,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(func, a, m);
            let right = simpson(func, m, b);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                recurse(func, a, m, left, tol / 2.0, depth - 1)
                    + recurse(func, m, b, right, tol / 2.0, depth - 1)
            }
        }
        let whole = simpson(func, a, b);
        recurse(func, a, b, whole, tol, 40)
    }

    fn log_uniform_samples(n: usize) -> Vec<f64> {
        // Deterministic log-uniform coverage of [1e-6, 1e3].
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                10f64.powf(-6.0 + 9.0 * s)
            })
            .collect()
    }

    #[test]
    fn inverse_transform_trivial_cases() {
        assert_eq!(inverse_transform(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(inverse_transform(0.0, 2.5).unwrap(), 2.5);
        assert!(inverse_transform(1.0, -1.0).is_err());
        assert!(inverse_transform(-1.0, 1.0).is_err());
    }

    #[test]
    fn inverse_transform_matches_quadrature_oracle() {
        let kappa = 1.0;
        let oracle = simpson_adaptive(&|s| (1.0 + 2.0 * kappa * s * s).sqrt(), 0.0, 1.0, 1e-14);
        let val = inverse_transform(kappa, 1.0).unwrap();
        assert!(
            ((val - oracle) / oracle).abs() < 1e-12,
            "closed form {val} vs quadrature {oracle}"
        );
    }

    #[test]
    fn f_trivial_cases() {
        assert_eq!(f(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(f(0.0, 7.0).unwrap(), 7.0);
    }

    #[test]
    fn f_matches_bisection_oracle() {
        // Plain bisection on F(u) = 1 over [0, 1], independent of the Newton path.
        let kappa = 1.0;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inverse_transform(kappa, mid).unwrap() > 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let val = f(kappa, 1.0).unwrap();
        assert!((val - oracle).abs() < 1e-12);
    }

    #[test]
    fn f_prime_trivial_and_fd() {
        assert_eq!(f_prime(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(f_prime(0.0, 3.0).unwrap(), 1.0);
        // Centered finite difference of f at t = 2.
        let d = 1e-5;
        let fd = (f(1.0, 2.0 + d).unwrap() - f(1.0, 2.0 - d).unwrap()) / (2.0 * d);
        assert!((f_prime(1.0, 2.0).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn f_second_forms_agree() {
        assert_eq!(f_second(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(f_second(0.0, 5.0).unwrap(), 0.0);
        // Second finite difference of f at t = 1.
        let d = 1e-4;
        let fd = (f(1.0, 1.0 + d).unwrap() - 2.0 * f(1.0, 1.0).unwrap() + f(1.0, 1.0 - d).unwrap())
            / (d * d);
        assert!((f_second(1.0, 1.0).unwrap() - fd).abs() < 1e-5);
        // Alternate form [(f')^4 - (f')^2]/f for t > 0.
        for &t in &[0.3, 1.0, 4.0, 50.0] {
            let fv = f(1.0, t).unwrap();
            let fp = f_prime(1.0, t).unwrap();
            let alt = (fp.powi(4) - fp.powi(2)) / fv;
            let direct = f_second(1.0, t).unwrap();
            assert!(
                ((alt - direct) / direct).abs() < 1e-10,
                "t={t}: {alt} vs {direct}"
            );
        }
    }

    #[test]
    fn h_limit_monotonicity_and_definition() {
        assert!((h(1.0, 1e-12).unwrap() - 1.0).abs() < 1e-6);
        assert!(h(1.0, 10.0).unwrap() < h(1.0, 1.0).unwrap());
        let direct = f(1.0, 1.0).unwrap() * f_prime(1.0, 1.0).unwrap();
        assert!((h(1.0, 1.0).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn h_inverse_round_trip_and_limits() {
        for &t0 in &[0.1, 1.0, 10.0] {
            let y = h(1.0, t0).unwrap();
            let t = h_inverse(1.0, y).unwrap();
            assert!((t - t0).abs() < 1e-8, "round trip at {t0}: got {t}");
        }
        // y -> 1- gives t near 0.
        assert!(h_inverse(1.0, 1.0 - 1e-8).unwrap() < 1e-3);
        // Bisection oracle at y = 0.5.
        let (mut lo, mut hi) = (0.0_f64, 16.0_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if h(1.0, mid).unwrap() > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((h_inverse(1.0, 0.5).unwrap() - oracle).abs() < 1e-9);
        assert!(h_inverse(1.0, 0.0).is_err());
        assert!(h_inverse(1.0, 1.0).is_err());
    }

    #[test]
    fn g_limit_monotone_and_lower_bound() {
        assert!(g(4.0, 1e-12).unwrap() < 1e-6);
        assert!(g(4.0, 2.0).unwrap() > g(4.0, 1.0).unwrap());
        let c = g(4.0, 1.0).unwrap();
        assert!(g(4.0, 9.0).unwrap() >= c * 9f64.powf(1.5));
    }

    #[test]
    fn reaction_cases() {
        assert_eq!(reaction(1.0, 3.0, 10.0, 1.0, 0.0).unwrap(), 0.0);
        // kappa = 0 reduces to the classical logistic right-hand side.
        let (lambda, b, p, t) = (7.0f64, 2.0f64, 3.0f64, 1.3f64);
        let classic = lambda * t - b * t.powf(p);
        assert!((reaction(0.0, p, lambda, b, t).unwrap() - classic).abs() < 1e-12);
        // Definition consistency from the evaluators.
        let (kappa, lambda, b, p, t) = (1.0, 10.0, 1.0, 3.0, 2.0);
        let fv = f(kappa, t).unwrap();
        let fp = f_prime(kappa, t).unwrap();
        let expected = lambda * fv * fp - b * fv.powi(3) * fp;
        assert!((reaction(kappa, p, lambda, b, t).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn reaction_derivative_cases() {
        // kappa = 0: classical linearization lambda - p*b*t^{p-1}.
        let (lambda, b, p, t) = (5.0f64, 1.5f64, 3.0f64, 0.8f64);
        let classic = lambda - p * b * t.powf(p - 1.0);
        assert!((reaction_derivative(0.0, p, lambda, b, t).unwrap() - classic).abs() < 1e-12);
        // t = 0 gives lambda.
        assert!((reaction_derivative(1.0, 3.0, 5.0, 1.5, 0.0).unwrap() - 5.0).abs() < 1e-14);
        // Centered finite difference of reaction at t = 1.5.
        let (kappa, lambda, b, p, t) = (1.0, 10.0, 1.0, 3.0, 1.5);
        let d = 1e-5;
        let fd = (reaction(kappa, p, lambda, b, t + d).unwrap()
            - reaction(kappa, p, lambda, b, t - d).unwrap())
            / (2.0 * d);
        assert!((reaction_derivative(kappa, p, lambda, b, t).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn reaction_derivative_matches_fd_at_many_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let kappa = rng.gen_range(0.05..5.0);
            let lambda = rng.gen_range(0.5..30.0);
            let b = rng.gen_range(0.0..4.0);
            let p = rng.gen_range(1.5..5.0);
            let t: f64 = rng.gen_range(0.05..20.0);
            let d = 1e-5 * t.max(1.0);
            let fd = (reaction(kappa, p, lambda, b, t + d).unwrap()
                - reaction(kappa, p, lambda, b, t - d).unwrap())
                / (2.0 * d);
            let rd = reaction_derivative(kappa, p, lambda, b, t).unwrap();
            assert!(
                (rd - fd).abs() < 1e-6 * (1.0 + rd.abs()),
                "fd mismatch at kappa={kappa} p={p} t={t}: {rd} vs {fd}"
            );
        }
    }

    #[test]
    fn linearized_potential_equals_minus_reaction_derivative() {
        for &t in &[0.0, 0.2, 1.0, 3.7, 40.0] {
            let pot = linearized_potential(1.0, 3.0, 8.0, 1.2, t).unwrap();
            let rd = reaction_derivative(1.0, 3.0, 8.0, 1.2, t).unwrap();
            assert!((pot + rd).abs() <= 1e-12 * (1.0 + rd.abs()));
        }
    }

    #[test]
    fn lemma_pointwise_bounds_on_log_grid() {
        // Lemma 2.1 (i), (ii), (iii), (v), (vii) on a deterministic sample.
        for &kappa in &[1e-3, 1e-1, 1.0, 10.0] {
            let ts = log_uniform_samples(200);
            let mut prev_ratio = 0.0;
            for &t in &ts {
                let fv = f(kappa, t).unwrap();
                let fp = f_prime(kappa, t).unwrap();
                assert!(fv >= 0.0 && fv <= t + 1e-10);
                assert!(fp > 0.0 && fp <= 1.0);
                assert!(fv * fp <= 1.0 / (2.0 * kappa).sqrt() + 1e-12);
                assert!(0.5 * fv - 1e-10 <= t * fp && t * fp <= fv + 1e-10);
                let ratio = fv / t.sqrt();
                assert!(ratio >= prev_ratio - 1e-10, "f/sqrt(t) dipped at t={t}");
                prev_ratio = ratio;
            }
        }
    }

    #[test]
    fn round_trip_relative_error() {
        for &kappa in &[1e-3, 1e-1, 1.0, 10.0] {
            for &t in &log_uniform_samples(200) {
                let back = inverse_transform(kappa, f(kappa, t).unwrap()).unwrap();
                assert!(
                    ((back - t) / t).abs() < 1e-12,
                    "round trip kappa={kappa} t={t}: {back}"
                );
            }
        }
    }

    #[test]
    fn kappa_monotonicity() {
        let kappas = [1e-3, 1e-1, 1.0, 10.0];
        for w in kappas.windows(2) {
            for &t in &log_uniform_samples(50) {
                assert!(
                    f(w[1], t).unwrap() < f(w[0], t).unwrap(),
                    "kappa-monotonicity failed at t={t}"
                );
            }
        }
    }

    #[test]
    fn map_fp_fprime_over_t_increasing_for_p_ge_3() {
        // Lemma 2.2(ii): t -> f^p f'/t increasing for p >= 3, limit 0 at 0+.
        for &p in &[3.0, 4.0] {
            let ts = log_uniform_samples(100);
            let mut prev = -1.0;
            for &t in &ts {
                let fv = f(1.0, t).unwrap();
                let fp = f_prime(1.0, t).unwrap();
                let val = fv.powf(p) * fp / t;
                assert!(val > prev, "f^p f'/t not increasing at t={t}, p={p}");
                prev = val;
            }
            let near_zero = {
                let t = 1e-9;
                f(1.0, t).unwrap().powf(p) * f_prime(1.0, t).unwrap() / t
            };
            assert!(near_zero < 1e-6);
        }
    }

    #[test]
    fn g_over_t_increasing_for_p_gt_3() {
        let p = 4.0;
        let ts = log_uniform_samples(100);
        let mut prev = -1.0;
        for &t in &ts {
            let val = g(p, t).unwrap() / t;
            assert!(val > prev, "g(t)/t not increasing at t={t}");
            prev = val;
        }
    }

    proptest! {
        #[test]
        fn prop_f_bracketed_and_monotone(kappa in 1e-3f64..10.0, a in 1e-6f64..1e3, d in 1e-3f64..10.0) {
            let fa = f(kappa, a).unwrap();
            let fb = f(kappa, a + d).unwrap();
            prop_assert!(fa >= 0.0 && fa <= a);
            prop_assert!(fb > fa);
        }

        #[test]
        fn prop_h_strictly_decreasing(kappa in 1e-3f64..10.0, t in 1e-4f64..1e2, factor in 1.1f64..10.0) {
            prop_assert!(h(kappa, t * factor).unwrap() < h(kappa, t).unwrap());
        }

        #[test]
        fn prop_round_trip(kappa in 1e-3f64..10.0, t in 1e-6f64..1e3) {
            let back = inverse_transform(kappa, f(kappa, t).unwrap()).unwrap();
            prop_assert!(((back - t) / t).abs() < 1e-12);
        }
    }
}
