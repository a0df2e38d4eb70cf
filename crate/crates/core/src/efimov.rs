//! Threshold-accumulation machinery: the sphere kernel family, its Legendre
//! diagonalization, the super-level measure integral and the asymptotic
//! coefficient, interval (Nystrom) discretizations of the log-variable
//! convolution operator, and the straight-line fit of eigenvalue counts
//! against the logarithm of the distance to threshold.
//!
//! Everything here depends on the model only through the shape ratio
//! `s = l2/l1` and the scale `l0`; spheres are never discretized directly.
//! Kernels depend on the inner product `t` of two unit vectors, so the
//! Funk-Hecke reduction turns each harmonic degree into a 1-D Legendre
//! transform with multiplicity `2 l + 1`.
//!
//! Two candidate forms of the diagonalized kernel differ in the argument of
//! the sinh: `arccos(s t)` versus `pi - arccos(s t)` (the reflection
//! `t -> -t`). They agree at even degrees, so the zero-harmonic closed form
//! cannot distinguish them; the Fourier transform of the interval kernel
//! decides at degree one and lands on the direct `arccos(s t)` form, which
//! is therefore the default everywhere. See [`select_arccos_convention`].

use crate::linalg::SymMatrix;
use crate::numerics::{self, adaptive_simpson, gauss_legendre, legendre_all};

#[derive(Debug, Clone, thiserror::Error)]
pub enum EfimovError {
    #[error("shape ratio s = {0} must satisfy 0 < |s| < 1")]
    BadShapeRatio(f64),
    #[error("scale l0 = {0} must be positive")]
    BadScale(f64),
    #[error("zero-harmonic value at 0 is {at_zero}, not above {mu}: no root exists")]
    NoRoot { at_zero: f64, mu: f64 },
    #[error("harmonic cutoff {l_max} too small: degree {l} still contributes measure {measure}")]
    HarmonicCutoff { l_max: usize, l: usize, measure: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] numerics::QuadratureError),
    #[error("need at least 4 points for the log fit, got {0}")]
    TooFewPoints(usize),
}

/// Arccos-argument convention of the diagonalized kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArccosConvention {
    /// sinh(lambda arccos(s t)), as printed
    Direct,
    /// sinh(lambda (pi - arccos(s t))) = the transform of the interval kernel
    Reflected,
}

/// Shape parameters of the threshold kernels.
#[derive(Debug, Clone, Copy)]
pub struct EfimovParams {
    pub s: f64,
    pub l0: f64,
}

impl EfimovParams {
    pub fn new(s: f64, l0: f64) -> Result<Self, EfimovError> {
        if !(s.abs() < 1.0) || s == 0.0 {
            return Err(EfimovError::BadShapeRatio(s));
        }
        if !(l0 > 0.0) {
            return Err(EfimovError::BadScale(l0));
        }
        Ok(Self { s, l0 })
    }

    /// Canonical construction from the quadratic data of a model; here
    /// `l0 = (1 - s^2)^{-1/2}` automatically.
    pub fn from_quadratic(qd: &crate::model::QuadraticData) -> Result<Self, EfimovError> {
        Self::new(qd.s, qd.l0)
    }
}

/// Kernel of the sphere operator family at inner product `t` and parameter
/// `lambda`, in the requested convention. Even in `lambda`; finite at
/// `t = +-1` since |s| < 1.
pub fn s_hat_kernel_with(params: &EfimovParams, t: f64, lambda: f64, conv: ArccosConvention) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&t));
    let a = match conv {
        ArccosConvention::Direct => (params.s * t).acos(),
        ArccosConvention::Reflected => std::f64::consts::PI - (params.s * t).acos(),
    };
    let root = (1.0 - params.s * params.s * t * t).sqrt();
    let lam = lambda.abs();
    let prefactor = params.l0 / (2.0 * std::f64::consts::PI);
    if lam < 1e-8 {
        // sinh(lambda a) / sinh(pi lambda) -> a / pi
        return prefactor * a / (std::f64::consts::PI * root);
    }
    // sinh(lam a)/sinh(pi lam) computed through exponentials to stay finite
    // at large lam: e^{lam (a - pi)} (1 - e^{-2 lam a}) / (1 - e^{-2 pi lam})
    let ratio = ((lam * (a - std::f64::consts::PI)).exp() * (1.0 - (-2.0 * lam * a).exp()))
        / (1.0 - (-2.0 * std::f64::consts::PI * lam).exp());
    prefactor * ratio / root
}

/// Printed-convention kernel.
pub fn s_hat_kernel(params: &EfimovParams, t: f64, lambda: f64) -> f64 {
    s_hat_kernel_with(params, t, lambda, ArccosConvention::Direct)
}

/// Closed form of the zero-harmonic eigenvalue,
/// `l0 sinh(y arcsin s) / (s y cosh(pi y / 2))`; identical under both
/// conventions.
pub fn s_hat_zero_closed(params: &EfimovParams, y: f64) -> f64 {
    let a = params.s.asin();
    let yy = y.abs();
    if yy < 1e-10 {
        return params.l0 * a / params.s;
    }
    params.l0 * (yy * a).sinh() / (params.s * yy * (0.5 * std::f64::consts::PI * yy).cosh())
}

/// Funk-Hecke eigenvalues `2 pi int P_l(t) K(t; lambda) dt` for degrees
/// `0..=l_max`, by adaptive quadrature per degree.
pub fn legendre_eigenvalues(
    params: &EfimovParams,
    lambda: f64,
    l_max: usize,
    conv: ArccosConvention,
) -> Result<Vec<f64>, EfimovError> {
    let mut out = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        let f = |t: f64| {
            let p = legendre_all(l, t);
            s_hat_kernel_with(params, t, lambda, conv) * p[l]
        };
        let v = adaptive_simpson(&f, -1.0, 1.0, 1e-12)?;
        out.push(2.0 * std::f64::consts::PI * v);
    }
    Ok(out)
}

/// Fixed-rule variant evaluating all degrees in one pass; the kernel is
/// analytic on [-1, 1], so 64-point Gauss-Legendre is far below 1e-12 here.
/// Used by the super-level scans.
fn legendre_eigenvalues_fast(
    params: &EfimovParams,
    lambda: f64,
    l_max: usize,
    conv: ArccosConvention,
    rule: &[(f64, f64)],
) -> Vec<f64> {
    let mut acc = vec![0.0; l_max + 1];
    for &(t, w) in rule {
        let k = s_hat_kernel_with(params, t, lambda, conv);
        let p = legendre_all(l_max, t);
        for l in 0..=l_max {
            acc[l] += w * k * p[l];
        }
    }
    for a in acc.iter_mut() {
        *a *= 2.0 * std::f64::consts::PI;
    }
    acc
}

/// Unique positive root of the zero-harmonic equation `S0(y) = 1`.
pub fn zero_harmonic_root(params: &EfimovParams) -> Result<f64, EfimovError> {
    zero_harmonic_crossing(params, 1.0)
}

fn zero_harmonic_crossing(params: &EfimovParams, mu: f64) -> Result<f64, EfimovError> {
    let at_zero = s_hat_zero_closed(params, 0.0);
    if at_zero <= mu {
        return Err(EfimovError::NoRoot { at_zero, mu });
    }
    let mut hi = 1.0;
    while s_hat_zero_closed(params, hi) > mu {
        hi *= 2.0;
        if hi > 100.0 {
            return Err(EfimovError::NoRoot { at_zero, mu });
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if s_hat_zero_closed(params, mid) > mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-harmonic super-level measures and the resulting coefficient.
#[derive(Debug, Clone)]
pub struct EfimovEstimate {
    pub mu: f64,
    /// crossing of the zero harmonic (half-width of its super-level set)
    pub y_star: f64,
    /// (degree, measure of {y : s_l(y) > mu})
    pub per_harmonic: Vec<(usize, f64)>,
    /// U(mu) = (4 pi)^{-1} sum_l (2l + 1) measure_l
    pub value: f64,
    /// zero-harmonic contribution alone
    pub lower_bound: f64,
    pub convention: ArccosConvention,
}

/// Super-level integral `U(mu) = (4 pi)^{-1} int n(mu, S(y)) dy`, computed
/// per harmonic degree. Demands that the last two degrees below `l_max`
/// contribute nothing, otherwise the cutoff is too small.
pub fn u_of_mu(params: &EfimovParams, mu: f64, l_max: usize) -> Result<EfimovEstimate, EfimovError> {
    let conv = ArccosConvention::Direct;
    let rule = gauss_legendre(64);
    // scan window: grow until every harmonic is clearly below mu at the edge
    let mut y_max = 10.0;
    loop {
        let vals = legendre_eigenvalues_fast(params, y_max, l_max, conv, &rule);
        if vals.iter().all(|v| v.abs() < 0.5 * mu) || y_max >= 160.0 {
            break;
        }
        y_max *= 2.0;
    }

    let step = 0.01;
    let steps = (y_max / step).ceil() as usize;
    let evals: Vec<Vec<f64>> = crate::exec::map_indexed(steps + 1, |i| {
        legendre_eigenvalues_fast(params, i as f64 * step, l_max, conv, &rule)
    });

    let mut per_harmonic = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        let above = |v: f64| v > mu;
        let mut measure = 0.0;
        let refine = |a: f64, b: f64| -> f64 {
            // bisect the crossing of s_l - mu in (a, b) to 1e-6
            let mut lo = a;
            let mut hi = b;
            let f_lo = above(legendre_eigenvalues_fast(params, lo, l_max, conv, &rule)[l]);
            for _ in 0..40 {
                if hi - lo < 1e-6 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let f_mid = above(legendre_eigenvalues_fast(params, mid, l_max, conv, &rule)[l]);
                if f_mid == f_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let mut prev_above = above(evals[0][l]);
        let mut open_at = if prev_above { Some(0.0) } else { None };
        for i in 1..=steps {
            let now_above = above(evals[i][l]);
            if now_above != prev_above {
                let y_cross = refine((i - 1) as f64 * step, i as f64 * step);
                if now_above {
                    open_at = Some(y_cross);
                } else if let Some(start) = open_at.take() {
                    measure += y_cross - start;
                }
                prev_above = now_above;
            }
        }
        if let Some(start) = open_at {
            measure += y_max - start;
        }
        // the spectrum is even in y: measures double
        per_harmonic.push((l, 2.0 * measure));
    }

    if l_max >= 1 {
        for l in [l_max - 1, l_max] {
            let measure = per_harmonic[l].1;
            if measure > 0.0 {
                return Err(EfimovError::HarmonicCutoff { l_max, l, measure });
            }
        }
    }

    let value = per_harmonic
        .iter()
        .map(|(l, m)| (2 * l + 1) as f64 * m)
        .sum::<f64>()
        / (4.0 * std::f64::consts::PI);
    let lower_bound = per_harmonic[0].1 / (4.0 * std::f64::consts::PI);
    let y_star = zero_harmonic_crossing(params, mu).unwrap_or(0.0);
    Ok(EfimovEstimate {
        mu,
        y_star,
        per_harmonic,
        value,
        lower_bound,
        convention: conv,
    })
}

/// Interval-kernel value `S_l(y) = (l0 / 2 pi) int P_l(t) / (cosh y + s t) dt`.
pub fn interval_kernel(params: &EfimovParams, l: usize, y: f64, rule: &[(f64, f64)]) -> f64 {
    let c = y.cosh();
    let mut acc = 0.0;
    for &(t, w) in rule {
        let p = legendre_all(l, t);
        acc += w * p[l] / (c + params.s * t);
    }
    params.l0 / (2.0 * std::f64::consts::PI) * acc
}

/// Nystrom matrix of the convolution operator with kernel `S_l(x - x')` on
/// (0, r): midpoint rule with `n_nodes` points, quadrature-symmetrized (the
/// uniform weight makes that a plain scaling). Toeplitz structure is used for
/// assembly only; the returned matrix is dense symmetric.
pub fn s_r_matrix(params: &EfimovParams, r: f64, l: usize, n_nodes: usize) -> SymMatrix {
    let rule = gauss_legendre(32);
    let dx = r / n_nodes as f64;
    let band: Vec<f64> = crate::exec::map_indexed(n_nodes, |k| {
        dx * interval_kernel(params, l, k as f64 * dx, &rule)
    });
    SymMatrix::from_fn(n_nodes, |i, j| band[i.abs_diff(j)])
}

#[derive(Debug, Clone)]
pub struct SobolevRow {
    pub r: f64,
    pub count: usize,
    pub ratio: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SobolevReport {
    pub mu: f64,
    pub u_mu: f64,
    pub rows: Vec<SobolevRow>,
}

/// Interval counts against the super-level integral:
/// `n(mu, S_r) / (2 r)` tends to `U(mu)` as the interval grows.
pub fn sobolev_limit_check(
    params: &EfimovParams,
    mu: f64,
    r_list: &[f64],
    l_max: usize,
    nodes_per_unit: usize,
) -> Result<SobolevReport, EfimovError> {
    let u = u_of_mu(params, mu, l_max)?;
    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let mut count = 0usize;
        for l in 0..=l_max {
            let n_nodes = (r * nodes_per_unit as f64).ceil() as usize;
            let m = s_r_matrix(params, r, l, n_nodes);
            let above = m.tridiagonalize().count_above(mu);
            count += (2 * l + 1) * above;
        }
        let ratio = count as f64 / (2.0 * r);
        rows.push(SobolevRow {
            r,
            count,
            ratio,
            gap: (ratio - u.value).abs(),
        });
    }
    Ok(SobolevReport {
        mu,
        u_mu: u.value,
        rows,
    })
}

/// Numeric Fourier transform of the interval kernel,
/// `int S_l(y) e^{-i lambda y} dy = 2 int_0^inf S_l(y) cos(lambda y) dy`.
pub fn interval_kernel_transform(params: &EfimovParams, l: usize, lambda: f64) -> Result<f64, EfimovError> {
    let rule = gauss_legendre(32);
    // the kernel decays like e^{-y}; beyond y = 45 the tail is below 1e-19
    let f = |y: f64| interval_kernel(params, l, y, &rule) * (lambda * y).cos();
    let v = adaptive_simpson(&f, 0.0, 45.0, 1e-11)?;
    Ok(2.0 * v)
}

#[derive(Debug, Clone)]
pub struct ConventionReport {
    pub selected: ArccosConvention,
    pub mismatch_direct: f64,
    pub mismatch_reflected: f64,
}

/// Decide the arccos convention by matching the numeric Fourier transform of
/// the interval kernels against the Funk-Hecke eigenvalues of each candidate.
/// The even degrees agree under both; the odd degrees differ by a sign, so
/// degree one is the discriminator.
pub fn select_arccos_convention(params: &EfimovParams) -> Result<ConventionReport, EfimovError> {
    let mut worst_direct: f64 = 0.0;
    let mut worst_reflected: f64 = 0.0;
    for l in [0usize, 1] {
        for lambda in [0.5, 1.0, 2.0] {
            let ft = interval_kernel_transform(params, l, lambda)?;
            let d = legendre_eigenvalues(params, lambda, l, ArccosConvention::Direct)?[l];
            let r = legendre_eigenvalues(params, lambda, l, ArccosConvention::Reflected)?[l];
            worst_direct = worst_direct.max((ft - d).abs());
            worst_reflected = worst_reflected.max((ft - r).abs());
        }
    }
    let selected = if worst_reflected <= worst_direct {
        ArccosConvention::Reflected
    } else {
        ArccosConvention::Direct
    };
    Ok(ConventionReport {
        selected,
        mismatch_direct: worst_direct,
        mismatch_reflected: worst_reflected,
    })
}

#[derive(Debug, Clone)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

/// Least-squares fit `N ~ slope |log(m - z)| + intercept` over count sweeps.
pub fn fit_log_asymptotics(m: f64, points: &[(f64, usize)]) -> Result<LogFit, EfimovError> {
    if points.len() < 4 {
        return Err(EfimovError::TooFewPoints(points.len()));
    }
    let xs: Vec<f64> = points.iter().map(|(z, _)| (m - z).ln().abs()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, n)| *n as f64).collect();
    let (slope, intercept, rms_residual) = numerics::linear_fit(&xs, &ys);
    Ok(LogFit {
        slope,
        intercept,
        rms_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn canonical() -> EfimovParams {
        // shape of the nearest-neighbor model: s = 1/2, l0 = 2/sqrt(3)
        EfimovParams::new(0.5, 2.0 / 3f64.sqrt()).unwrap()
    }

    #[test]
    fn construction_rejects_bad_shape() {
        assert!(EfimovParams::new(1.0, 2.0).is_err());
        assert!(EfimovParams::new(0.0, 2.0).is_err());
        assert!(EfimovParams::new(0.5, 0.0).is_err());
    }

    #[test]
    fn kernel_point_value_and_evenness() {
        let p = canonical();
        // (2 pi)^{-1} l0 sinh(pi/2)/sinh(pi) at t = 0, lambda = 1
        let expect = p.l0 / (2.0 * PI) * (PI / 2.0).sinh() / PI.sinh();
        assert_relative_eq!(s_hat_kernel(&p, 0.0, 1.0), expect, epsilon = 1e-12);
        assert_relative_eq!(s_hat_kernel(&p, 0.0, 1.0), 0.03662, epsilon = 1e-5);
        for t in [-0.9, -0.3, 0.2, 1.0] {
            for lam in [0.3, 1.7] {
                assert_relative_eq!(
                    s_hat_kernel(&p, t, lam),
                    s_hat_kernel(&p, t, -lam),
                    epsilon = 1e-14
                );
            }
        }
        // lambda -> 0 limit: (2 pi)^{-1} l0 arccos(s t) / (pi sqrt(1 - s^2 t^2))
        let t = 0.4;
        let lim = p.l0 / (2.0 * PI) * (p.s * t).acos()
            / (PI * (1.0 - p.s * p.s * t * t).sqrt());
        assert_relative_eq!(s_hat_kernel(&p, t, 1e-9), lim, epsilon = 1e-9);
    }

    #[test]
    fn zero_harmonic_quadrature_matches_closed_form() {
        let p = canonical();
        for conv in [ArccosConvention::Direct, ArccosConvention::Reflected] {
            for i in 0..=16 {
                let lambda = 0.1 + 4.9 * i as f64 / 16.0;
                let got = legendre_eigenvalues(&p, lambda, 0, conv).unwrap()[0];
                let want = s_hat_zero_closed(&p, lambda);
                assert!(
                    (got - want).abs() <= 1e-8,
                    "conv {conv:?} lambda {lambda}: {got} vs {want}"
                );
            }
        }
        // value at the origin: l0 arcsin(s)/s = 2 pi / (3 sqrt 3) for s = 1/2
        assert_relative_eq!(
            s_hat_zero_closed(&p, 0.0),
            2.0 * PI / (3.0 * 3f64.sqrt()),
            epsilon = 1e-12
        );
        assert!(s_hat_zero_closed(&p, 0.0) > 1.0);
    }

    #[test]
    fn fast_rule_agrees_with_adaptive_quadrature() {
        let p = canonical();
        let rule = gauss_legendre(64);
        for lambda in [0.2, 1.0, 3.3] {
            let fast = legendre_eigenvalues_fast(&p, lambda, 6, ArccosConvention::Reflected, &rule);
            let slow = legendre_eigenvalues(&p, lambda, 6, ArccosConvention::Reflected).unwrap();
            for l in 0..=6 {
                assert!((fast[l] - slow[l]).abs() <= 1e-10, "degree {l}");
            }
        }
    }

    #[test]
    fn harmonic_eigenvalues_decay_with_degree() {
        let p = canonical();
        let vals = legendre_eigenvalues(&p, 0.7, 8, ArccosConvention::Reflected).unwrap();
        assert!(vals[4].abs() < vals[0].abs());
        assert!(vals[8].abs() < 1e-3 * vals[0].abs());
    }

    #[test]
    fn zero_harmonic_root_matches_inline_bisection_oracle() {
        let p = canonical();
        // independent oracle on the closed-form equation
        // (4 / sqrt 3) sinh(pi y / 6) = y cosh(pi y / 2)
        let f = |y: f64| 4.0 / 3f64.sqrt() * (PI * y / 6.0).sinh() - y * (PI * y / 2.0).cosh();
        let (mut lo, mut hi) = (0.1f64, 1.0f64);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let got = zero_harmonic_root(&p).unwrap();
        assert!((got - oracle).abs() <= 1e-6, "root {got} vs oracle {oracle}");
        // frozen value of the oracle root for this shape
        assert!((got - 0.413650).abs() <= 1e-4, "root {got}");
    }

    #[test]
    fn root_shrinks_with_shape_and_grows_with_scale() {
        let near_zero = EfimovParams::new(0.05, (1.0f64 - 0.0025).powf(-0.5)).unwrap();
        let y_small = zero_harmonic_root(&near_zero).unwrap();
        let y_mid = zero_harmonic_root(&canonical()).unwrap();
        assert!(y_small < y_mid);
        assert!(y_small < 0.1);
        let doubled = EfimovParams::new(0.5, 2.0 * canonical().l0).unwrap();
        assert!(zero_harmonic_root(&doubled).unwrap() > y_mid);
        // no root when the zero harmonic never reaches 1
        let weak = EfimovParams::new(0.5, 0.5).unwrap();
        assert!(matches!(
            zero_harmonic_root(&weak),
            Err(EfimovError::NoRoot { .. })
        ));
    }

    #[test]
    fn super_level_integral_for_the_canonical_shape() {
        let p = canonical();
        let est = u_of_mu(&p, 1.0, 8).unwrap();
        let y_star = zero_harmonic_root(&p).unwrap();
        // only the zero harmonic contributes at mu = 1
        assert_relative_eq!(est.per_harmonic[0].1, 2.0 * y_star, epsilon = 1e-4);
        for (l, m) in est.per_harmonic.iter().skip(1) {
            assert_eq!(*m, 0.0, "degree {l} unexpectedly contributes");
        }
        assert_relative_eq!(est.value, est.lower_bound, epsilon = 1e-12);
        assert_relative_eq!(est.value, 2.0 * y_star / (4.0 * PI), epsilon = 1e-4);
        assert_relative_eq!(est.y_star, y_star, epsilon = 1e-5);
    }

    #[test]
    fn super_level_integral_is_monotone_and_vanishes_for_large_mu() {
        let p = canonical();
        let u1 = u_of_mu(&p, 1.0, 6).unwrap().value;
        let u2 = u_of_mu(&p, 1.1, 6).unwrap().value;
        assert!(u2 <= u1);
        let u_big = u_of_mu(&p, 10.0, 6).unwrap();
        assert_eq!(u_big.value, 0.0);
    }

    #[test]
    fn positive_coefficient_across_shape_ratios() {
        for i in 1..=8 {
            let s = 0.1 * i as f64;
            let l0 = (1.0 - s * s).powf(-0.5);
            let p = EfimovParams::new(s, l0).unwrap();
            assert!(s_hat_zero_closed(&p, 0.0) > 1.0, "s = {s}");
            let est = u_of_mu(&p, 1.0, 8).unwrap();
            assert!(est.value > 0.0, "s = {s}");
            assert!(est.value >= est.lower_bound - 1e-12);
        }
    }

    #[test]
    fn cutoff_guard_demands_empty_top_harmonics() {
        let p = canonical();
        assert!(matches!(
            u_of_mu(&p, 1.0, 1),
            Err(EfimovError::HarmonicCutoff { .. })
        ));
    }

    #[test]
    fn interval_kernel_is_even_and_decays_exponentially() {
        let p = canonical();
        let rule = gauss_legendre(32);
        for y in [0.3, 1.0, 2.5] {
            assert_relative_eq!(
                interval_kernel(&p, 0, y, &rule),
                interval_kernel(&p, 0, -y, &rule),
                epsilon = 1e-14
            );
        }
        // ratio of successive values approaches e^{-1} at large y
        let a = interval_kernel(&p, 0, 8.0, &rule);
        let b = interval_kernel(&p, 0, 9.0, &rule);
        assert_relative_eq!(b / a, (-1.0f64).exp(), max_relative = 0.05);
    }

    #[test]
    fn fourier_transform_reproduces_the_zero_harmonic() {
        let p = canonical();
        for lambda in [0.5, 1.0, 2.0] {
            let ft = interval_kernel_transform(&p, 0, lambda).unwrap();
            let closed = s_hat_zero_closed(&p, lambda);
            assert!(
                (ft - closed).abs() <= 1e-6,
                "lambda {lambda}: {ft} vs {closed}"
            );
        }
    }

    #[test]
    fn fourier_consistency_selects_the_direct_convention() {
        let p = canonical();
        let report = select_arccos_convention(&p).unwrap();
        assert_eq!(report.selected, ArccosConvention::Direct);
        assert!(report.mismatch_direct <= 1e-6);
        // the losing convention is recorded, not silently discarded
        assert!(report.mismatch_reflected > 1e-2);
    }

    #[test]
    fn interval_counts_approach_the_super_level_integral() {
        let p = canonical();
        let report = sobolev_limit_check(&p, 1.0, &[15.0, 30.0], 2, 8).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows[1].gap <= report.rows[0].gap + 1e-12);
        assert!(report.rows[1].count >= report.rows[0].count);
        // large mu: every count is zero
        let empty = sobolev_limit_check(&p, 25.0, &[10.0], 2, 8).unwrap();
        assert_eq!(empty.rows[0].count, 0);
        assert_eq!(empty.u_mu, 0.0);
    }

    #[test]
    fn log_fit_recovers_synthetic_slopes() {
        let m = 0.0;
        let points: Vec<(f64, usize)> = (1..=6)
            .map(|k| {
                let z = -(10f64.powi(-k));
                let n = (0.16 * (m - z).ln().abs() + 1.0).round() as usize;
                (z, n)
            })
            .collect();
        let fit = fit_log_asymptotics(m, &points).unwrap();
        // integers round the ideal line; the fit stays near the true slope
        assert!((fit.slope - 0.16).abs() < 0.08, "slope {}", fit.slope);
        // exact recovery on exact data
        let exact: Vec<(f64, usize)> = (1..=5)
            .map(|k| {
                let z = -(2f64.powi(-6 * k));
                (z, k as usize)
            })
            .collect();
        let fit = fit_log_asymptotics(m, &exact).unwrap();
        assert_relative_eq!(fit.slope, 1.0 / (6.0 * 2f64.ln()), epsilon = 1e-9);
        assert!(fit.rms_residual < 1e-9);
        assert!(matches!(
            fit_log_asymptotics(m, &exact[..3]),
            Err(EfimovError::TooFewPoints(3))
        ));
    }
}
