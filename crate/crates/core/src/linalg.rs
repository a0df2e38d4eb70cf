//! Dense symmetric eigenvalue counting by inertia.
//!
//! The route is Householder tridiagonalization followed by Sturm-sequence
//! (LDLt pivot sign) counts. Counting is exact integer output: by Sylvester's
//! law of inertia the number of negative pivots of T - lambda*I equals the
//! number of eigenvalues below lambda. Individual eigenvalues, when needed,
//! come from bisection on the same counts.

use crate::exec;

/// Dense symmetric matrix, full column-major storage.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Build from the generator `f(i, j)`; only i <= j is evaluated and the
    /// value is mirrored, so the result is symmetric by construction.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        // Generate column-by-column (upper triangle), then mirror.
        let cols = exec::map_indexed(n, |j| {
            let mut col = vec![0.0; n];
            for (i, slot) in col.iter_mut().enumerate().take(j + 1) {
                *slot = f(i, j);
            }
            col
        });
        let mut data = vec![0.0; n * n];
        for (j, col) in cols.iter().enumerate() {
            data[j * n..j * n + n].copy_from_slice(col);
        }
        let mut m = Self { n, data };
        for j in 0..n {
            for i in j + 1..n {
                let v = m.data[i * n + j];
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.n + i] = v;
        self.data[i * self.n + j] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n {
            for i in 0..j {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn add_assign(&mut self, other: &SymMatrix) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn scale(&mut self, t: f64) {
        for a in self.data.iter_mut() {
            *a *= t;
        }
    }

    /// Householder reduction to symmetric tridiagonal form.
    pub fn tridiagonalize(&self) -> SymTridiag {
        let n = self.n;
        let mut a = self.data.clone();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.max(1) - 1];
        let mut v = vec![0.0; n];
        let mut w = vec![0.0; n];

        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1; // trailing block size
            // x = A[k+1.., k]
            let xcol = &a[k * n + k + 1..k * n + n];
            let sigma = xcol.iter().map(|x| x * x).sum::<f64>().sqrt();
            if sigma == 0.0 {
                off[k] = 0.0;
                continue;
            }
            let x0 = xcol[0];
            let alpha = if x0 >= 0.0 { -sigma } else { sigma };
            // v = x - alpha e1; beta = 2 / |v|^2
            v[..m].copy_from_slice(xcol);
            v[0] -= alpha;
            let vnorm2: f64 = v[..m].iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                off[k] = alpha;
                continue;
            }
            let beta = 2.0 / vnorm2;

            // p = beta * A22 * v, streaming over columns of the trailing block.
            w[..m].iter_mut().for_each(|x| *x = 0.0);
            {
                let base = k + 1;
                for j in 0..m {
                    let col = &a[(base + j) * n + base..(base + j) * n + base + m];
                    let vj = v[j];
                    for i in 0..m {
                        w[i] += col[i] * vj;
                    }
                }
                for wi in w[..m].iter_mut() {
                    *wi *= beta;
                }
            }
            // w = p - (beta/2)(v.p) v
            let vp: f64 = v[..m].iter().zip(&w[..m]).map(|(a, b)| a * b).sum();
            let kappa = 0.5 * beta * vp;
            for i in 0..m {
                w[i] -= kappa * v[i];
            }

            // A22 <- A22 - v w^T - w v^T  (column chunks; parallel when enabled)
            {
                let base = k + 1;
                let vs = &v[..m];
                let ws = &w[..m];
                let block = &mut a[base * n..];
                let chunk_cols = if m >= 512 { 64 } else { m.max(1) };
                exec::for_each_col_chunk(
                    &mut block[..(m - 1) * n + base + m],
                    n,
                    chunk_cols,
                    |col0, chunk| {
                        for (jj, col) in chunk.chunks_mut(n).enumerate() {
                            let j = col0 + jj;
                            if j >= m {
                                break;
                            }
                            let (vj, wj) = (vs[j], ws[j]);
                            let colsub = &mut col[base..base + m];
                            for i in 0..m {
                                colsub[i] -= vs[i] * wj + ws[i] * vj;
                            }
                        }
                    },
                );
            }

            off[k] = alpha;
            // Keep the explicit sub-diagonal consistent for later reads.
            a[k * n + k + 1] = alpha;
            a[(k + 1) * n + k] = alpha;
        }

        for i in 0..n {
            diag[i] = a[i * n + i];
        }
        if n >= 2 {
            off[n - 2] = a[(n - 2) * n + n - 1];
        }
        SymTridiag { diag, off }
    }
}

/// Symmetric tridiagonal matrix: `diag` (n) and `off` (n-1).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `lambda` (Sturm / LDLt pivot signs).
    pub fn count_below(&self, lambda: f64) -> usize {
        let n = self.diag.len();
        if n == 0 {
            return 0;
        }
        let mut count = 0usize;
        let mut q = self.diag[0] - lambda;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let q_safe = if q.abs() < 1e-300 {
                if q >= 0.0 {
                    1e-300
                } else {
                    -1e-300
                }
            } else {
                q
            };
            q = (self.diag[i] - lambda) - self.off[i - 1] * self.off[i - 1] / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// True when some eigenvalue lies within `atol` of `lambda`.
    pub fn eigenvalue_near(&self, lambda: f64, atol: f64) -> bool {
        self.count_below(lambda + atol) > self.count_below(lambda - atol)
    }

    pub fn count_above(&self, lambda: f64) -> usize {
        self.n() - self.count_below(lambda)
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for i in 0..n {
            let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - l - r);
            hi = hi.max(self.diag[i] + l + r);
        }
        (lo - 1.0, hi + 1.0)
    }

    /// k-th smallest eigenvalue (0-indexed) by count bisection.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.n());
        let (mut a, mut b) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (b - a) < 2.0 * f64::EPSILON * mid.abs().max(1.0) {
                break;
            }
            if self.count_below(mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn smallest(&self, k: usize) -> Vec<f64> {
        (0..k.min(self.n())).map(|i| self.kth_eigenvalue(i)).collect()
    }

    /// Shortest distance from `lambda` to the spectrum.
    pub fn gap_to_spectrum(&self, lambda: f64) -> f64 {
        let n = self.n();
        let below = self.count_below(lambda);
        let mut gap = f64::INFINITY;
        if below > 0 {
            gap = gap.min(lambda - self.kth_eigenvalue(below - 1));
        }
        if below < n {
            gap = gap.min(self.kth_eigenvalue(below) - lambda);
        }
        gap.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        SymMatrix::from_fn(n, |i, j| 0.5 * (raw[i * n + j] + raw[j * n + i]))
    }

    fn nalgebra_eigs(m: &SymMatrix) -> Vec<f64> {
        let n = m.n();
        let dm = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
        let mut e: Vec<f64> = dm.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn tridiagonal_counts_match_direct_eigensolve() {
        for seed in [1u64, 2, 3] {
            let m = random_sym(40, seed);
            let tri = m.tridiagonalize();
            let eigs = nalgebra_eigs(&m);
            for lambda in [-2.0, -0.5, 0.0, 0.3, 1.5] {
                let expect = eigs.iter().filter(|&&e| e < lambda).count();
                assert_eq!(tri.count_below(lambda), expect, "seed {seed} lambda {lambda}");
            }
        }
    }

    #[test]
    fn kth_eigenvalue_matches_direct_eigensolve() {
        let m = random_sym(30, 7);
        let tri = m.tridiagonalize();
        let eigs = nalgebra_eigs(&m);
        for k in [0usize, 1, 14, 28, 29] {
            assert_relative_eq!(tri.kth_eigenvalue(k), eigs[k], epsilon = 1e-9);
        }
    }

    #[test]
    fn diagonal_matrix_counting_is_exact() {
        let d = [-3.0, -1.0, 0.0, 2.0, 2.0, 5.0];
        let m = SymMatrix::from_fn(6, |i, j| if i == j { d[i] } else { 0.0 });
        let tri = m.tridiagonalize();
        assert_eq!(tri.count_below(-5.0), 0);
        assert_eq!(tri.count_below(0.0), 2);
        assert_eq!(tri.count_below(2.5), 5);
        assert_eq!(tri.count_above(1.0), 3);
        assert!(tri.eigenvalue_near(2.0, 1e-12));
        assert!(!tri.eigenvalue_near(1.0, 1e-6));
    }

    #[test]
    fn gap_to_spectrum_reports_nearest_distance() {
        let d = [0.0, 1.0, 4.0];
        let m = SymMatrix::from_fn(3, |i, j| if i == j { d[i] } else { 0.0 });
        let tri = m.tridiagonalize();
        assert_relative_eq!(tri.gap_to_spectrum(2.0), 1.0, epsilon = 1e-9);
        assert_relative_eq!(tri.gap_to_spectrum(0.2), 0.2, epsilon = 1e-9);
    }

    #[test]
    fn from_fn_is_symmetric() {
        let m = random_sym(17, 42);
        assert_eq!(m.max_abs_asymmetry(), 0.0);
    }
}
