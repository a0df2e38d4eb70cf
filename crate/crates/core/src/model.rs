//! Model data: the dispersion built from finitely many nonpositive Fourier
//! coefficients, the shifted one-particle energy, the form factor, and the
//! two-particle symbol `w(p, q) = eps(p) + eps(p+q) + eps(q)`.
//!
//! The dispersion is evaluated through `sum 4(-eps_hat(s)) sin^2((p,s)/2)`,
//! a sum of nonnegative terms. This keeps `eps(p) - eps(0)` and
//! `w(p, q) - m` fully accurate at arbitrarily small arguments, which the
//! near-threshold sweeps rely on.

use crate::grid::TorusGrid;
use crate::numerics::{add, dot_i, neg, solve_dense, Point};

#[derive(Debug, Clone, thiserror::Error)]
pub enum ModelError {
    #[error("coefficient at s = {0:?} must reference a nonzero lattice vector")]
    ZeroLatticeVector([i32; 3]),
    #[error("coefficient at s = {s:?} is {value}, but conditional negative definiteness requires values <= 0")]
    PositiveCoefficient { s: [i32; 3], value: f64 },
    #[error("coefficients at s and -s disagree at {s:?}: {a} vs {b}")]
    AsymmetricCoefficients { s: [i32; 3], a: f64, b: f64 },
    #[error("dispersion needs at least one nonzero coefficient")]
    EmptyCoefficients,
    #[error("dispersion minimum at the origin is degenerate (Hessian not positive definite)")]
    DegenerateMinimum,
    #[error("dispersion minimum is not unique: eps({p:?}) matches eps(0)")]
    NonUniqueMinimum { p: Point },
    #[error("form factor is not even at q = {q:?}")]
    OddFormFactor { q: Point },
    #[error("Assumption 2.1(ii) violated: mixed Hessian is not proportional to the direct one (max deviation {deviation:e})")]
    HessianNotProportional { deviation: f64 },
    #[error("Assumption 2.1(ii) violated: direct Hessian of w at the origin is not positive definite")]
    HessianNotPositiveDefinite,
    #[error("analytic and finite-difference Hessians disagree (relative error {rel:e})")]
    HessianCrossCheckFailed { rel: f64 },
}

/// Even closed-form form factor on the torus.
#[derive(Debug, Clone, PartialEq)]
pub enum FormFactor {
    /// v(q) = a
    Constant(f64),
    /// v(q) = a (1 - cos q_1); vanishes quadratically at the origin
    OneMinusCos(f64),
    /// v(q) = a |sin q_1|; vanishes linearly at the origin
    AbsSin(f64),
}

impl FormFactor {
    pub fn eval(&self, q: Point) -> f64 {
        match *self {
            FormFactor::Constant(a) => a,
            FormFactor::OneMinusCos(a) => a * 2.0 * (0.5 * q[0]).sin().powi(2),
            FormFactor::AbsSin(a) => a * q[0].sin().abs(),
        }
    }

    pub fn at_zero(&self) -> f64 {
        match *self {
            FormFactor::Constant(a) => a,
            FormFactor::OneMinusCos(_) | FormFactor::AbsSin(_) => 0.0,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FormFactor::Constant(_) => "constant",
            FormFactor::OneMinusCos(_) => "one_minus_cos",
            FormFactor::AbsSin(_) => "abs_sin",
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            FormFactor::Constant(a) | FormFactor::OneMinusCos(a) | FormFactor::AbsSin(a) => a,
        }
    }
}

/// The model quadruple: dispersion Fourier data, shift `c` in
/// `u = eps + c`, the zero-sector energy `u0`, and the form factor `v`.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    /// canonical half of the symmetric coefficient support; each entry stands
    /// for the +/- s pair and stores eps_hat(s) <= 0
    eps_half: Vec<([i32; 3], f64)>,
    eps0: f64,
    c: f64,
    u0: f64,
    v: FormFactor,
    /// all shipped ingredients are smooth; recorded as metadata only
    smoothness: &'static str,
}

fn canonical_sign(s: [i32; 3]) -> ([i32; 3], bool) {
    for &x in &s {
        if x > 0 {
            return (s, false);
        }
        if x < 0 {
            return ([-s[0], -s[1], -s[2]], true);
        }
    }
    (s, false)
}

impl ModelSpec {
    /// Validate and build a model. Coefficients may list one or both members
    /// of each +/- s pair; evenness forces them equal, so listing both with
    /// different values is rejected.
    pub fn new(
        coeffs: &[([i32; 3], f64)],
        eps0: f64,
        c: f64,
        u0: f64,
        v: FormFactor,
    ) -> Result<Self, ModelError> {
        let mut eps_half: Vec<([i32; 3], f64)> = Vec::new();
        for &(s, value) in coeffs {
            if s == [0, 0, 0] {
                return Err(ModelError::ZeroLatticeVector(s));
            }
            if value > 0.0 {
                return Err(ModelError::PositiveCoefficient { s, value });
            }
            let (cs, _) = canonical_sign(s);
            match eps_half.iter_mut().find(|(t, _)| *t == cs) {
                Some((_, existing)) => {
                    if (*existing - value).abs() > 1e-14 * (1.0 + value.abs()) {
                        return Err(ModelError::AsymmetricCoefficients {
                            s: cs,
                            a: *existing,
                            b: value,
                        });
                    }
                }
                None => eps_half.push((cs, value)),
            }
        }
        if eps_half.is_empty() {
            return Err(ModelError::EmptyCoefficients);
        }
        eps_half.sort_by_key(|(s, _)| *s);

        let model = Self {
            eps_half,
            eps0,
            c,
            u0,
            v,
            smoothness: "smooth (all shipped dispersions and form factors are C-infinity \
                         except abs_sin, which is Lipschitz)",
        };

        // Non-degenerate minimum at the origin.
        let e = model.hess_epsilon([0.0; 3]);
        if !positive_definite_3x3(&e) {
            return Err(ModelError::DegenerateMinimum);
        }
        // Uniqueness probe on a lattice that contains the half-period points.
        let probe = 16usize;
        let h = 2.0 * std::f64::consts::PI / probe as f64;
        let span = model.eps_span();
        for ix in 0..probe {
            for iy in 0..probe {
                for iz in 0..probe {
                    let p = [
                        -std::f64::consts::PI + ix as f64 * h,
                        -std::f64::consts::PI + iy as f64 * h,
                        -std::f64::consts::PI + iz as f64 * h,
                    ];
                    if crate::numerics::norm_sq(p) < 1e-24 {
                        continue;
                    }
                    if model.eps_excess(p) <= 1e-10 * span {
                        return Err(ModelError::NonUniqueMinimum { p });
                    }
                }
            }
        }
        // Evenness of the form factor at a few deterministic probes.
        for i in 0..32 {
            let t = 0.1 + 0.19 * i as f64;
            let q = [t.sin() * 2.0, (t * 1.7).cos() * 2.0, (t * 0.9).sin() * 2.0];
            if (model.v.eval(q) - model.v.eval(neg(q))).abs() > 1e-12 {
                return Err(ModelError::OddFormFactor { q });
            }
        }
        Ok(model)
    }

    /// Canonical nearest-neighbor dispersion `eps = 3 - sum cos q_i`,
    /// `v = 1`, `u0 = 0`; `c` stays the tunable threshold parameter.
    pub fn cubic(c: f64) -> Self {
        Self::new(
            &[
                ([1, 0, 0], -0.5),
                ([0, 1, 0], -0.5),
                ([0, 0, 1], -0.5),
            ],
            0.0,
            c,
            0.0,
            FormFactor::Constant(1.0),
        )
        .expect("canonical model is valid")
    }

    pub fn with_form_factor(mut self, v: FormFactor) -> Self {
        self.v = v;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_u0(mut self, u0: f64) -> Self {
        self.u0 = u0;
        self
    }

    pub fn coefficients(&self) -> &[([i32; 3], f64)] {
        &self.eps_half
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn v(&self) -> &FormFactor {
        &self.v
    }

    pub fn smoothness_note(&self) -> &'static str {
        self.smoothness
    }

    /// eps(p) - eps(0) as a sum of nonnegative terms; exact at tiny arguments.
    #[inline]
    pub fn eps_excess(&self, p: Point) -> f64 {
        let mut acc = 0.0;
        for &(s, val) in &self.eps_half {
            let x = 0.5 * dot_i(p, s);
            let sx = x.sin();
            acc += 4.0 * (-val) * sx * sx;
        }
        acc
    }

    pub fn epsilon(&self, p: Point) -> f64 {
        self.eps0 + self.eps_excess(p)
    }

    pub fn grad_epsilon(&self, p: Point) -> Point {
        let mut g = [0.0; 3];
        for &(s, val) in &self.eps_half {
            let x = dot_i(p, s);
            let t = 2.0 * (-val) * x.sin();
            for k in 0..3 {
                g[k] += t * s[k] as f64;
            }
        }
        g
    }

    pub fn hess_epsilon(&self, p: Point) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for &(s, val) in &self.eps_half {
            let t = 2.0 * (-val) * dot_i(p, s).cos();
            for i in 0..3 {
                for j in 0..3 {
                    h[i][j] += t * s[i] as f64 * s[j] as f64;
                }
            }
        }
        h
    }

    /// u(p) = eps(p) + c
    pub fn u(&self, p: Point) -> f64 {
        self.epsilon(p) + self.c
    }

    /// Global minimum of w, attained at the origin pair: m = 3 eps(0).
    pub fn m(&self) -> f64 {
        3.0 * self.eps0
    }

    pub fn w(&self, p: Point, q: Point) -> f64 {
        self.epsilon(p) + self.epsilon(add(p, q)) + self.epsilon(q)
    }

    /// w(p, q) - m as a sum of nonnegative terms.
    #[inline]
    pub fn w_minus_m(&self, p: Point, q: Point) -> f64 {
        self.eps_excess(p) + self.eps_excess(add(p, q)) + self.eps_excess(q)
    }

    /// w(p, q) - w(0, q) in product form `sin^2 A + sin A sin B`, accurate to
    /// full relative precision even when |p| is many orders below |q|.
    #[inline]
    pub fn w_shift(&self, p: Point, q: Point) -> f64 {
        let mut acc = 0.0;
        for &(s, val) in &self.eps_half {
            let a = 0.5 * dot_i(p, s);
            let b = 0.5 * dot_i(add(q, add(q, p)), s); // ((p + 2q), s)/2
            let sa = a.sin();
            acc += 4.0 * (-val) * (sa * sa + sa * b.sin());
        }
        acc
    }

    fn eps_span(&self) -> f64 {
        // crude scale: eps at the far corner of the torus
        let corner = [std::f64::consts::PI; 3];
        self.eps_excess(corner).max(1e-12)
    }

    /// Quadratic shape of w at the origin: the Hessian blocks are
    /// `l1 W` (direct) and `l2 W` (mixed), with W normalized to W[0][0] = 1.
    pub fn quadratic_data(&self) -> Result<QuadraticData, ModelError> {
        let e = self.hess_epsilon([0.0; 3]);
        let mut hpp = [[0.0; 3]; 3];
        let mut hpq = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                hpp[i][j] = 2.0 * e[i][j];
                hpq[i][j] = e[i][j];
            }
        }
        // cross-check against central finite differences of w at (0,0)
        let fd = self.hessian_blocks_fd(1e-4);
        let scale = hpp.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
        let mut rel: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                rel = rel.max((fd.0[i][j] - hpp[i][j]).abs() / scale);
                rel = rel.max((fd.1[i][j] - hpq[i][j]).abs() / scale);
            }
        }
        if rel > 1e-6 {
            return Err(ModelError::HessianCrossCheckFailed { rel });
        }
        QuadraticData::from_blocks(hpp, hpq)
    }

    /// Finite-difference Hessian blocks of w at (0,0); test and validation aid.
    pub fn hessian_blocks_fd(&self, h: f64) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
        let unit = |k: usize, t: f64| {
            let mut p = [0.0; 3];
            p[k] = t;
            p
        };
        let mut hpp = [[0.0; 3]; 3];
        let mut hpq = [[0.0; 3]; 3];
        let w0 = self.w([0.0; 3], [0.0; 3]);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    let f = |t: f64| self.w(unit(i, t), [0.0; 3]);
                    hpp[i][j] = (f(h) - 2.0 * w0 + f(-h)) / (h * h);
                } else {
                    let f = |a: f64, b: f64| {
                        let mut p = [0.0; 3];
                        p[i] = a;
                        p[j] = b;
                        self.w(p, [0.0; 3])
                    };
                    hpp[i][j] = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
                }
                let g = |a: f64, b: f64| self.w(unit(i, a), unit(j, b));
                hpq[i][j] = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4.0 * h * h);
            }
        }
        (hpp, hpq)
    }

    /// Extremal values of w over the product of two torus copies: coarse scan
    /// plus Newton polish. Returns (min, max, argmax).
    pub fn w_extrema(&self, scan_per_axis: usize) -> (f64, f64, (Point, Point)) {
        // the p+q lookup below folds lattice sums back onto the axis, which
        // needs an even point count
        let n = scan_per_axis + scan_per_axis % 2;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let axis: Vec<f64> = (0..n).map(|j| -std::f64::consts::PI + j as f64 * h).collect();
        let mut best_max = f64::MIN;
        let mut arg_max = ([0.0; 3], [0.0; 3]);
        let mut best_min = f64::MAX;
        // eps is a function of a single point; scan w via cached eps values
        let mut eps_cache = vec![vec![vec![0.0; n]; n]; n];
        for (ix, &x) in axis.iter().enumerate() {
            for (iy, &y) in axis.iter().enumerate() {
                for (iz, &z) in axis.iter().enumerate() {
                    eps_cache[ix][iy][iz] = self.epsilon([x, y, z]);
                }
            }
        }
        // axis[i] + axis[j] = -2pi + (i+j)h = axis[(i + j + n/2) mod n] mod 2pi
        let wrap = |i: usize, j: usize| (i + j + n / 2) % n;
        for ip in 0..n * n * n {
            let (ix, iy, iz) = (ip / (n * n), (ip / n) % n, ip % n);
            for jx in 0..n {
                for jy in 0..n {
                    for jz in 0..n {
                        let w = eps_cache[ix][iy][iz]
                            + eps_cache[jx][jy][jz]
                            + eps_cache[wrap(ix, jx)][wrap(iy, jy)][wrap(iz, jz)];
                        if w > best_max {
                            best_max = w;
                            arg_max = ([axis[ix], axis[iy], axis[iz]], [axis[jx], axis[jy], axis[jz]]);
                        }
                        if w < best_min {
                            best_min = w;
                        }
                    }
                }
            }
        }
        // Newton polish of the maximum in all six variables.
        let (mut p, mut q) = arg_max;
        for _ in 0..60 {
            let gp = add(self.grad_epsilon(p), self.grad_epsilon(add(p, q)));
            let gq = add(self.grad_epsilon(q), self.grad_epsilon(add(p, q)));
            let hp = self.hess_epsilon(p);
            let hq = self.hess_epsilon(q);
            let hm = self.hess_epsilon(add(p, q));
            let mut a = [0.0; 36];
            let mut b = [gp[0], gp[1], gp[2], gq[0], gq[1], gq[2]];
            for i in 0..3 {
                for j in 0..3 {
                    a[i * 6 + j] = hp[i][j] + hm[i][j];
                    a[i * 6 + (j + 3)] = hm[i][j];
                    a[(i + 3) * 6 + j] = hm[i][j];
                    a[(i + 3) * 6 + (j + 3)] = hq[i][j] + hm[i][j];
                }
            }
            if !solve_dense(6, &mut a, &mut b) {
                break;
            }
            let step_sq: f64 = b.iter().map(|x| x * x).sum();
            p = [p[0] - b[0], p[1] - b[1], p[2] - b[2]];
            q = [q[0] - b[3], q[1] - b[4], q[2] - b[5]];
            if step_sq < 1e-24 {
                break;
            }
        }
        let polished = self.w(p, q);
        if polished > best_max {
            best_max = polished;
            arg_max = (p, q);
        }
        (best_min, best_max, arg_max)
    }

    /// Stable content hash of the model parameters, for run manifests.
    pub fn content_hash(&self) -> u64 {
        let mut buf = String::new();
        for (s, v) in &self.eps_half {
            buf.push_str(&format!("{},{},{}={:.17e};", s[0], s[1], s[2], v));
        }
        buf.push_str(&format!(
            "eps0={:.17e};c={:.17e};u0={:.17e};v={}:{:.17e}",
            self.eps0,
            self.c,
            self.u0,
            self.v.kind(),
            self.v.amplitude()
        ));
        crate::numerics::fnv1a64(buf.as_bytes())
    }
}

fn positive_definite_3x3(h: &[[f64; 3]; 3]) -> bool {
    let d1 = h[0][0];
    let d2 = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let d3 = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
        - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
        + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
    d1 > 0.0 && d2 > 0.0 && d3 > 0.0
}

fn det_3x3(h: &[[f64; 3]; 3]) -> f64 {
    h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
        - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
        + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0])
}

/// Quadratic expansion data of w at the origin, together with the derived
/// threshold parameters.
#[derive(Debug, Clone)]
pub struct QuadraticData {
    pub w_matrix: [[f64; 3]; 3],
    pub l1: f64,
    pub l2: f64,
    /// l = (l1^2 - l2^2) / l1
    pub l: f64,
    /// s = l2 / l1
    pub s: f64,
    /// l0 = (l1^2 / (l1^2 - l2^2))^(1/2)
    pub l0: f64,
    pub det_w: f64,
}

impl QuadraticData {
    pub fn from_blocks(hpp: [[f64; 3]; 3], hpq: [[f64; 3]; 3]) -> Result<Self, ModelError> {
        if !positive_definite_3x3(&hpp) {
            return Err(ModelError::HessianNotPositiveDefinite);
        }
        let l1 = hpp[0][0];
        let mut w_matrix = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                w_matrix[i][j] = hpp[i][j] / l1;
            }
        }
        let l2 = hpq[0][0] / w_matrix[0][0];
        // proportionality check: hpq must equal l2 * W entrywise
        let scale = l1.abs().max(l2.abs());
        let mut deviation: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                deviation = deviation.max((hpq[i][j] - l2 * w_matrix[i][j]).abs() / scale);
            }
        }
        if deviation > 1e-5 {
            return Err(ModelError::HessianNotProportional { deviation });
        }
        if l2 == 0.0 || l2.abs() >= l1 {
            return Err(ModelError::HessianNotProportional { deviation: l2.abs() });
        }
        let l = (l1 * l1 - l2 * l2) / l1;
        let s = l2 / l1;
        let l0 = (l1 * l1 / (l1 * l1 - l2 * l2)).sqrt();
        Ok(Self {
            w_matrix,
            l1,
            l2,
            l,
            s,
            l0,
            det_w: det_3x3(&w_matrix),
        })
    }

    /// (W p, p)
    pub fn w_form(&self, p: Point) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += self.w_matrix[i][j] * p[i] * p[j];
            }
        }
        acc
    }

    /// The threshold-expansion constant `2 sqrt2 pi^2 v0^2 l1^{-3/2} (det W)^{-1/2}`.
    pub fn slope_constant(&self, v_at_zero: f64) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        2.0 * std::f64::consts::SQRT_2 * pi2 * v_at_zero * v_at_zero
            / (self.l1.powf(1.5) * self.det_w.sqrt())
    }
}

// ---------------------------------------------------------------------------
// Assumption report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Clause {
    pub name: &'static str,
    pub pass: bool,
    pub fitted: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub clauses: Vec<Clause>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn clause(&self, name: &str) -> &Clause {
        self.clauses
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("no clause named {name}"))
    }
}

/// Uniqueness-of-minimum check over a probe lattice, factored out so the
/// two-minimum negative control can exercise it with a custom symbol.
pub fn minimum_uniqueness_clause(
    w_fn: &dyn Fn(Point, Point) -> f64,
    probe_per_axis: usize,
    exclusion_radius: f64,
    m: f64,
) -> Clause {
    let n = probe_per_axis;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let axis: Vec<f64> = (0..n).map(|j| -std::f64::consts::PI + j as f64 * h).collect();
    let mut margin = f64::MAX;
    let mut arg = ([0.0; 3], [0.0; 3]);
    for &px in &axis {
        for &py in &axis {
            for &pz in &axis {
                for &qx in &axis {
                    for &qy in &axis {
                        for &qz in &axis {
                            let p = [px, py, pz];
                            let q = [qx, qy, qz];
                            let r2 = crate::numerics::norm_sq(p) + crate::numerics::norm_sq(q);
                            if r2 < exclusion_radius * exclusion_radius {
                                continue;
                            }
                            let excess = w_fn(p, q) - m;
                            if excess < margin {
                                margin = excess;
                                arg = (p, q);
                            }
                        }
                    }
                }
            }
        }
    }
    Clause {
        name: "unique_minimum",
        pass: margin > 0.0,
        fitted: Some(margin),
        detail: format!(
            "min (w - m) outside the {exclusion_radius}-ball is {margin:.6e} at ({:?}, {:?})",
            arg.0, arg.1
        ),
    }
}

impl ModelSpec {
    /// Numeric verification of the standing assumptions: evenness, unique
    /// minimum, Hessian structure, two-sided quadratic bounds of w - m, and
    /// the quadratic decay of the fiber integral away from the origin.
    pub fn check_assumptions(&self, grid: &TorusGrid) -> AssumptionReport {
        let mut clauses = Vec::new();
        let m = self.m();

        // (a) evenness of u, v, w at deterministic sample points
        {
            let mut worst: f64 = 0.0;
            for i in 0..100 {
                let t = i as f64 * 0.37;
                let p = [
                    2.9 * (t).sin(),
                    2.9 * (t * 1.3 + 0.4).sin(),
                    2.9 * (t * 0.7 + 1.1).sin(),
                ];
                let q = [
                    2.9 * (t * 1.9 + 0.2).sin(),
                    2.9 * (t * 0.5 + 2.0).sin(),
                    2.9 * (t * 1.1 + 0.8).sin(),
                ];
                worst = worst.max((self.u(p) - self.u(neg(p))).abs());
                worst = worst.max((self.v.eval(q) - self.v.eval(neg(q))).abs());
                worst = worst.max((self.w(p, q) - self.w(neg(p), neg(q))).abs());
            }
            clauses.push(Clause {
                name: "evenness",
                pass: worst <= 1e-12,
                fitted: Some(worst),
                detail: format!("max |f(x) - f(-x)| over samples = {worst:.3e}"),
            });
        }

        // (b) uniqueness of the minimum of w
        clauses.push(minimum_uniqueness_clause(
            &|p, q| self.w(p, q),
            9,
            0.5,
            m,
        ));

        // (c) positive definite Hessian structure
        {
            let qd = self.quadratic_data();
            let (pass, detail) = match &qd {
                Ok(d) => (
                    d.l1 > 0.0 && d.l1 > d.l2.abs(),
                    format!("l1 = {:.6}, l2 = {:.6}, det W = {:.6}", d.l1, d.l2, d.det_w),
                ),
                Err(e) => (false, e.to_string()),
            };
            clauses.push(Clause {
                name: "hessians",
                pass,
                fitted: qd.ok().map(|d| d.l1),
                detail,
            });
        }

        // (d) C1 (|p|^2 + |q|^2) <= w - m <= C2 (|p|^2 + |q|^2) near the origin
        {
            let delta = 0.4;
            let mut c1 = f64::MAX;
            let mut c2: f64 = 0.0;
            for i in 1..=60 {
                let t = i as f64 * 0.15;
                let dir_p = [t.sin(), (1.7 * t).cos(), (0.6 * t).sin()];
                let dir_q = [(0.9 * t).cos(), (1.2 * t).sin(), (2.1 * t).cos()];
                let r = delta * (0.05 + 0.95 * (i as f64 / 60.0));
                let p = crate::numerics::scale(dir_p, r / crate::numerics::norm(dir_p));
                let q = crate::numerics::scale(dir_q, r / crate::numerics::norm(dir_q));
                let ratio = self.w_minus_m(p, q) / (2.0 * r * r);
                c1 = c1.min(ratio);
                c2 = c2.max(ratio);
            }
            clauses.push(Clause {
                name: "quadratic_bounds",
                pass: c1 > 0.0 && c2.is_finite(),
                fitted: Some(c1),
                detail: format!("C1 = {c1:.6}, C2 = {c2:.6} on |p|,|q| < 0.4"),
            });
        }

        // (e) Lambda(0, m) - Lambda(p, m) >= c p^2 on a small ball
        {
            let family = crate::friedrichs::FiberFamily::new(self, grid);
            match family {
                Ok(fam) => {
                    let mut c = f64::MAX;
                    for i in 1..=24 {
                        let t = i as f64 * 0.26;
                        let dir = [t.cos(), (1.3 * t).sin(), (0.7 * t + 0.3).cos()];
                        let r = 0.05 + 0.25 * (i as f64 / 24.0);
                        let p = crate::numerics::scale(dir, r / crate::numerics::norm(dir));
                        let drop = fam.lambda_drop(p);
                        c = c.min(drop / crate::numerics::norm_sq(p));
                    }
                    clauses.push(Clause {
                        name: "lambda_decay",
                        pass: c > 0.0,
                        fitted: Some(c),
                        detail: format!("fitted c = {c:.6} in Lambda(0,m) - Lambda(p,m) >= c p^2"),
                    });
                }
                Err(e) => clauses.push(Clause {
                    name: "lambda_decay",
                    pass: false,
                    fitted: None,
                    detail: format!("fiber integrals unavailable on this grid: {e}"),
                }),
            }
        }

        AssumptionReport { clauses }
    }
}
