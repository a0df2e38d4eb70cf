//! Small numerical building blocks shared across the crate: 3-vector helpers,
//! deterministic summation, Richardson extrapolation, 1-D quadrature, Legendre
//! polynomials, and dense linear solves for Newton steps.

/// A point on the torus (or a tangent vector), stored as plain coordinates.
pub type Point = [f64; 3];

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn dot_i(a: Point, s: [i32; 3]) -> f64 {
    a[0] * s[0] as f64 + a[1] * s[1] as f64 + a[2] * s[2] as f64
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn neg(a: Point) -> Point {
    [-a[0], -a[1], -a[2]]
}

pub fn scale(a: Point, t: f64) -> Point {
    [t * a[0], t * a[1], t * a[2]]
}

pub fn norm_sq(a: Point) -> f64 {
    dot(a, a)
}

pub fn norm(a: Point) -> f64 {
    norm_sq(a).sqrt()
}

/// Pairwise (binary-tree) summation over the given slice, in index order.
///
/// The reduction tree depends only on the slice length, so the result is
/// bit-identical no matter how the terms were produced (serial or parallel).
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    const BASE: usize = 32;
    let n = terms.len();
    if n <= BASE {
        let mut acc = 0.0;
        for &t in terms {
            acc += t;
        }
        return acc;
    }
    let half = n / 2;
    pairwise_sum(&terms[..half]) + pairwise_sum(&terms[half..])
}

/// Polynomial extrapolation of `(h, value)` samples to `h = 0` (Neville's
/// scheme). With k points this removes error terms up to `h^(k-1)`.
pub fn richardson_zero(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len();
    assert!(n >= 1, "richardson_zero needs at least one sample");
    let mut h: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut v: Vec<f64> = samples.iter().map(|s| s.1).collect();
    for level in 1..n {
        for i in 0..n - level {
            let denom = h[i] - h[i + level];
            v[i] = (0.0 - h[i + level]) * (v[i] - v[i + 1]) / denom + v[i + 1];
        }
    }
    // After the sweep v[0] holds the value of the interpolating polynomial at 0.
    let _ = &mut h;
    v[0]
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("adaptive quadrature did not converge on [{a}, {b}] (tol {tol:e})")]
pub struct QuadratureError {
    pub a: f64,
    pub b: f64,
    pub tol: f64,
}

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Option<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Some(left + right + err / 15.0);
        }
        if depth == 0 {
            return None;
        }
        let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Some(l + r)
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48).ok_or(QuadratureError { a, b, tol })
}

/// Legendre polynomials P_0(x) .. P_{l_max}(x) by the three-term recurrence.
pub fn legendre_all(l_max: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(l_max + 1);
    p.push(1.0);
    if l_max == 0 {
        return p;
    }
    p.push(x);
    for l in 1..l_max {
        let next = ((2 * l + 1) as f64 * x * p[l] - l as f64 * p[l - 1]) / (l + 1) as f64;
        p.push(next);
    }
    p
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut rule = Vec::with_capacity(n);
    for i in 0..(n + 1) / 2 {
        // Chebyshev-like initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' at x.
            let (mut p0, mut p1) = (1.0, x);
            for l in 1..n {
                let p2 = ((2 * l + 1) as f64 * x * p1 - l as f64 * p0) / (l + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    // Mirror to the negative half (skip the duplicate center node for odd n).
    let mirrored: Vec<(f64, f64)> = rule
        .iter()
        .filter(|(x, _)| *x > 1e-14)
        .map(|&(x, w)| (-x, w))
        .collect();
    rule.extend(mirrored);
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Least-squares straight line through (x, y); returns (slope, intercept, rms residual).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut sse = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - slope * x - intercept;
        sse += r * r;
    }
    (slope, intercept, (sse / n).sqrt())
}

/// Solve the n x n system `a x = b` in place by Gaussian elimination with
/// partial pivoting (`a` row-major). Returns false when the pivot collapses.
pub fn solve_dense(n: usize, a: &mut [f64], b: &mut [f64]) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-300 {
            return false;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in col + 1..n {
            acc -= a[col * n + c] * b[c];
        }
        b[col] = acc / a[col * n + col];
    }
    true
}

/// FNV-1a 64-bit hash; stable across platforms, used for run manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pairwise_sum_matches_naive_on_benign_data() {
        let terms: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let naive: f64 = terms.iter().sum();
        assert_relative_eq!(pairwise_sum(&terms), naive, max_relative = 1e-12);
    }

    #[test]
    fn richardson_recovers_polynomial_limit() {
        // v(h) = 3 + 2h + 5h^2 => limit 3 from three samples.
        let f = |h: f64| 3.0 + 2.0 * h + 5.0 * h * h;
        let samples = [(0.4, f(0.4)), (0.2, f(0.2)), (0.1, f(0.1))];
        assert_relative_eq!(richardson_zero(&samples), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-10);
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -6.0, 6.0, 1e-12).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn legendre_recurrence_known_values() {
        let p = legendre_all(4, 0.3);
        assert_relative_eq!(p[2], 0.5 * (3.0 * 0.09 - 1.0), epsilon = 1e-15);
        assert_relative_eq!(p[3], 0.5 * (5.0 * 0.027 - 3.0 * 0.3), epsilon = 1e-15);
        // P_l(1) = 1 for all l.
        let at_one = legendre_all(6, 1.0);
        for v in at_one {
            assert_relative_eq!(v, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let rule = gauss_legendre(8);
        assert_eq!(rule.len(), 8);
        let wsum: f64 = rule.iter().map(|r| r.1).sum();
        assert_relative_eq!(wsum, 2.0, epsilon = 1e-14);
        // Degree-15 monomial integrates exactly with 8 nodes.
        let q: f64 = rule.iter().map(|&(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(q, 2.0 / 15.0, epsilon = 1e-13);
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.16 * x + 1.0).collect();
        let (s, i, r) = linear_fit(&xs, &ys);
        assert_relative_eq!(s, 0.16, epsilon = 1e-12);
        assert_relative_eq!(i, 1.0, epsilon = 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn solve_dense_3x3() {
        let mut a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let mut b = vec![3.0, 5.0, 3.0];
        assert!(solve_dense(3, &mut a, &mut b));
        assert_relative_eq!(b[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(b[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(b[2], 1.0, epsilon = 1e-12);
    }
}
