//! The fiber family over total quasi-momentum p: the scalar determinant
//! `Delta(p, z) = u(p) - z - (1/2) Lambda(p, z)` with
//! `Lambda(p, z) = int v^2(t) / (w(p, t) - z) dt`, its roots (the fiber
//! eigenvalues), the fiber minimum geometry, threshold classification at the
//! band bottom, and the square-root expansion of Delta near threshold.
//!
//! Evaluations at and near z = m are organized around differences so that no
//! large-against-large cancellation occurs:
//!
//!   Delta(p, m) = Delta(0, m) + eps(p) + (Lambda(0,m) - Lambda(p,m)) / 2
//!   Delta(p, z) = Delta(p, m) + (m - z) (1 + I(p, m - z) / 2)
//!
//! where both correction sums have nonnegative terms. On a tuned model the
//! stored Delta(0, m) is exactly zero, so these expressions stay meaningful
//! down to m - z of order 1e-30.

use crate::grid::TorusGrid;
use crate::model::ModelSpec;
use crate::numerics::{self, pairwise_sum, Point};

#[derive(Debug, Clone, thiserror::Error)]
pub enum FiberError {
    #[error("grid samples the origin; fiber integrals at z = m need offset or graded grids")]
    SingularGrid,
    #[error("denominator sign change: z = {z} is not below the fiber band at p = {p:?} (node {node:?})")]
    DenominatorSignChange { p: Point, z: f64, node: Point },
    #[error("bracket expansion exceeded its budget hunting the fiber root at p = {p:?}")]
    BracketBudget { p: Point },
    #[error("minimizer descent did not converge at p = {p:?} (|grad| = {grad_norm:e})")]
    DescentFailed { p: Point, grad_norm: f64 },
    #[error("threshold-derivative extrapolation is oscillating, not converging")]
    ExtrapolationDiverged,
    #[error("square-root fit rejected: {reason}")]
    FitRejected { reason: String },
    #[error("operation requires v(0) != 0, but the form factor vanishes at the origin")]
    RequiresNonvanishingV0,
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Classification of the fiber family at the bottom of the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    /// Delta(0, m) = 0 with v(0) != 0: threshold solution not square-integrable
    Resonance,
    /// Delta(0, m) = 0 with v(0) = 0: threshold solution is an eigenvector
    Eigenvalue,
    /// Delta(0, m) != 0
    Regular,
}

#[derive(Debug, Clone)]
pub struct ThresholdClass {
    pub kind: ThresholdKind,
    pub delta0m: f64,
    pub v_at_0: f64,
    pub tol: f64,
}

/// Per-fiber record for sweeps and CSV export.
#[derive(Debug, Clone)]
pub struct FiberReport {
    pub p: Point,
    pub m_p: f64,
    pub big_m_p: f64,
    pub delta_at_m: f64,
    pub eigenvalue: Option<f64>,
}

/// Finite-difference threshold derivative together with its closed-form
/// prediction.
#[derive(Debug, Clone)]
pub struct SlopeEstimate {
    pub numeric: f64,
    pub prediction: f64,
}

/// Fitted coefficient of sqrt(m - z) in Delta(0, z), with the two printed
/// candidate constants it arbitrates between.
#[derive(Debug, Clone)]
pub struct SqrtFit {
    pub fitted: f64,
    /// threshold-derivative constant (the one the quadrature confirms)
    pub prediction: f64,
    /// the competing constant, exactly twice the first
    pub alt_prediction: f64,
    pub rms_residual: f64,
}

/// Precomputed fiber evaluator over one (model, grid) pair.
pub struct FiberFamily<'a> {
    model: &'a ModelSpec,
    grid: &'a TorusGrid,
    /// quadrature coefficient w_j v^2(q_j) per node
    cj: Vec<f64>,
    /// w(0, q_j) - m = 2 (eps(q_j) - eps(0)) per node
    w0_excess: Vec<f64>,
    /// eps(q_j) - eps(0) per node
    eps_excess: Vec<f64>,
    m: f64,
    lambda0m: f64,
    delta0m: f64,
}

impl<'a> FiberFamily<'a> {
    pub fn new(model: &'a ModelSpec, grid: &'a TorusGrid) -> Result<Self, FiberError> {
        if !grid.origin_free() {
            return Err(FiberError::SingularGrid);
        }
        let nodes = grid.nodes();
        let weights = grid.weights();
        let n = nodes.len();
        let mut cj = Vec::with_capacity(n);
        let mut w0_excess = Vec::with_capacity(n);
        let mut eps_excess = Vec::with_capacity(n);
        for j in 0..n {
            let v = model.v().eval(nodes[j]);
            cj.push(weights[j] * v * v);
            let e = model.eps_excess(nodes[j]);
            eps_excess.push(e);
            w0_excess.push(2.0 * e);
        }
        let m = model.m();
        let lambda_terms: Vec<f64> = (0..n).map(|j| cj[j] / w0_excess[j]).collect();
        if lambda_terms.iter().any(|t| !t.is_finite()) {
            return Err(FiberError::SingularGrid);
        }
        let lambda0m = pairwise_sum(&lambda_terms);
        let delta0m = model.u([0.0; 3]) - m - 0.5 * lambda0m;
        Ok(Self {
            model,
            grid,
            cj,
            w0_excess,
            eps_excess,
            m,
            lambda0m,
            delta0m,
        })
    }

    /// Tune the shift c so that Delta(0, m) vanishes on this grid, and return
    /// the retuned model together with the tuning value
    /// `c* = m - eps(0) + Lambda(0, m) / 2`. A family built over the returned
    /// model carries Delta(0, m) = 0 exactly.
    pub fn tune_resonance(model: &ModelSpec, grid: &TorusGrid) -> Result<(ModelSpec, f64), FiberError> {
        let probe = FiberFamily::new(model, grid)?;
        let c_star = probe.m - model.eps0() + 0.5 * probe.lambda0m;
        Ok((model.clone().with_c(c_star), c_star))
    }

    /// Build the family for a model tuned on this same grid, pinning the
    /// stored Delta(0, m) to exactly zero instead of the rounding residue.
    pub fn new_tuned(model: &'a ModelSpec, grid: &'a TorusGrid) -> Result<Self, FiberError> {
        let mut family = Self::new(model, grid)?;
        family.delta0m = 0.0;
        Ok(family)
    }

    pub fn model(&self) -> &ModelSpec {
        self.model
    }

    pub fn grid(&self) -> &TorusGrid {
        self.grid
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn lambda_at_origin_threshold(&self) -> f64 {
        self.lambda0m
    }

    pub fn delta0m(&self) -> f64 {
        self.delta0m
    }

    #[inline]
    fn w_minus_m_node(&self, p: Point, j: usize) -> f64 {
        let node = self.grid.nodes()[j];
        self.model.eps_excess(p) + self.model.eps_excess(numerics::add(p, node)) + self.eps_excess[j]
    }

    /// Lambda(p, z) by direct quadrature; requires w(p, q_j) > z at all nodes.
    pub fn lambda(&self, p: Point, z: f64) -> Result<f64, FiberError> {
        let dz = self.m - z;
        let eps_p = self.model.eps_excess(p);
        let nodes = self.grid.nodes();
        let terms: Vec<f64> = (0..nodes.len())
            .map(|j| {
                let denom =
                    eps_p + self.model.eps_excess(numerics::add(p, nodes[j])) + self.eps_excess[j] + dz;
                self.cj[j] / denom
            })
            .collect();
        for (j, t) in terms.iter().enumerate() {
            if !t.is_finite() || *t < 0.0 {
                return Err(FiberError::DenominatorSignChange {
                    p,
                    z,
                    node: nodes[j],
                });
            }
        }
        Ok(pairwise_sum(&terms))
    }

    /// Delta(p, z) by direct quadrature.
    pub fn delta(&self, p: Point, z: f64) -> Result<f64, FiberError> {
        Ok(self.model.u(p) - z - 0.5 * self.lambda(p, z)?)
    }

    /// Delta(p, z) for z strictly above the fiber band (every denominator
    /// negative); used to screen for roots in (M, infinity).
    pub fn delta_above_band(&self, p: Point, z: f64) -> Result<f64, FiberError> {
        let dz = self.m - z;
        let eps_p = self.model.eps_excess(p);
        let nodes = self.grid.nodes();
        let terms: Vec<f64> = (0..nodes.len())
            .map(|j| {
                let denom =
                    eps_p + self.model.eps_excess(numerics::add(p, nodes[j])) + self.eps_excess[j] + dz;
                self.cj[j] / denom
            })
            .collect();
        for (j, t) in terms.iter().enumerate() {
            if !t.is_finite() || *t > 0.0 {
                return Err(FiberError::DenominatorSignChange {
                    p,
                    z,
                    node: nodes[j],
                });
            }
        }
        Ok(self.model.u(p) - z - 0.5 * pairwise_sum(&terms))
    }

    /// Lambda(0, m) - Lambda(p, m) as a single sum of products; positive for
    /// the shipped models and accurate at small |p|.
    pub fn lambda_drop(&self, p: Point) -> f64 {
        let nodes = self.grid.nodes();
        let terms: Vec<f64> = (0..nodes.len())
            .map(|j| {
                let shift = self.model.w_shift(p, nodes[j]); // w(p,q) - w(0,q)
                let wp = self.w_minus_m_node(p, j);
                self.cj[j] * shift / (self.w0_excess[j] * wp)
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// Delta(p, m) through the threshold difference identity.
    pub fn delta_at_m(&self, p: Point) -> f64 {
        self.delta0m + self.model.eps_excess(p) + 0.5 * self.lambda_drop(p)
    }

    /// Delta(p, m - dz) for dz > 0, cancellation-free in dz.
    pub fn delta_near_m(&self, p: Point, dz: f64) -> f64 {
        let nodes = self.grid.nodes();
        let terms: Vec<f64> = (0..nodes.len())
            .map(|j| {
                let wp = self.w_minus_m_node(p, j);
                self.cj[j] / (wp * (wp + dz))
            })
            .collect();
        let i_sum = pairwise_sum(&terms);
        self.delta_at_m(p) + dz * (1.0 + 0.5 * i_sum)
    }

    /// Minimizer of q -> w(p, q) near the origin, by Newton descent seeded at
    /// -(l2/l1) p.
    pub fn minimizer_q0(&self, p: Point) -> Result<Point, FiberError> {
        let qd = self.model.quadratic_data()?;
        let mut q = numerics::scale(p, -qd.l2 / qd.l1);
        for _ in 0..80 {
            let g = numerics::add(
                self.model.grad_epsilon(q),
                self.model.grad_epsilon(numerics::add(p, q)),
            );
            let gn = numerics::norm(g);
            if gn < 1e-12 {
                return Ok(q);
            }
            let hq = self.model.hess_epsilon(q);
            let hpq = self.model.hess_epsilon(numerics::add(p, q));
            let mut a = [0.0; 9];
            let mut b = [g[0], g[1], g[2]];
            for i in 0..3 {
                for jj in 0..3 {
                    a[i * 3 + jj] = hq[i][jj] + hpq[i][jj];
                }
            }
            if !numerics::solve_dense(3, &mut a, &mut b) {
                break;
            }
            q = [q[0] - b[0], q[1] - b[1], q[2] - b[2]];
        }
        let g = numerics::add(
            self.model.grad_epsilon(q),
            self.model.grad_epsilon(numerics::add(p, q)),
        );
        let gn = numerics::norm(g);
        if gn < 1e-9 {
            Ok(q)
        } else {
            Err(FiberError::DescentFailed { p, grad_norm: gn })
        }
    }

    /// Fiber band bottom m(p) = w(p, q0(p)), valid near the origin.
    pub fn m_of_p(&self, p: Point) -> Result<f64, FiberError> {
        let q0 = self.minimizer_q0(p)?;
        Ok(self.model.w(p, q0))
    }

    /// Fiber band bottom relative to the global minimum, m(p) - m, evaluated
    /// without cancellation.
    pub fn m_of_p_excess(&self, p: Point) -> Result<f64, FiberError> {
        let q0 = self.minimizer_q0(p)?;
        Ok(self.model.w_minus_m(p, q0))
    }

    /// Per-fiber data that does not depend on z: Delta(p, m) and the node
    /// values w(p, q_j) - m. One evaluation of Delta(p, m - dz) then costs a
    /// single pass over the nodes.
    fn threshold_profile(&self, p: Point) -> (f64, Vec<f64>) {
        let nodes = self.grid.nodes();
        let wm: Vec<f64> = (0..nodes.len())
            .map(|j| self.w_minus_m_node(p, j))
            .collect();
        (self.delta_at_m(p), wm)
    }

    fn delta_from_profile(&self, delta_at_m: f64, wm: &[f64], dz: f64) -> f64 {
        let terms: Vec<f64> = wm
            .iter()
            .zip(&self.cj)
            .map(|(w, c)| c / (w * (w + dz)))
            .collect();
        delta_at_m + dz * (1.0 + 0.5 * pairwise_sum(&terms))
    }

    /// The unique root of Delta(p, .) below the global band bottom m, when
    /// Delta(p, m) < 0; None otherwise. The root satisfies
    /// |Delta(p, z)| <= 1e-9 (1 + |z|).
    pub fn fiber_eigenvalue(&self, p: Point) -> Result<Option<f64>, FiberError> {
        let tol_zero = 1e-10 * (1.0 + self.model.u([0.0; 3]).abs());
        let (d_m, wm) = self.threshold_profile(p);
        if d_m >= -tol_zero {
            return Ok(None);
        }
        // bracket: Delta -> +inf as z -> -inf. The profile form is
        // algebraically identical to the direct quadrature for z < m, so it
        // serves as the single evaluator here.
        let mut lo = self.m - 1.0;
        let mut budget = 200usize;
        loop {
            if self.delta_from_profile(d_m, &wm, self.m - lo) > 0.0 {
                break;
            }
            lo = self.m - 2.0 * (self.m - lo);
            budget -= 1;
            if budget == 0 {
                return Err(FiberError::BracketBudget { p });
            }
        }
        let mut hi = self.m;
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let d = self.delta_from_profile(d_m, &wm, self.m - mid);
            if d.abs() <= 1e-10 * (1.0 + mid.abs()) {
                return Ok(Some(mid));
            }
            if d > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= f64::EPSILON * (1.0 + mid.abs()) {
                break;
            }
        }
        Ok(Some(mid))
    }

    /// Threshold classification from Delta(0, m) and v(0).
    pub fn classify(&self, tol: Option<f64>) -> ThresholdClass {
        let tol = tol.unwrap_or_else(|| 1e-8 * (1.0 + self.model.u([0.0; 3]).abs()));
        let v0 = self.model.v().at_zero();
        let kind = if self.delta0m.abs() <= tol {
            if v0.abs() > tol {
                ThresholdKind::Resonance
            } else {
                ThresholdKind::Eigenvalue
            }
        } else {
            ThresholdKind::Regular
        };
        ThresholdClass {
            kind,
            delta0m: self.delta0m,
            v_at_0: v0,
            tol,
        }
    }

    /// Right-hand derivative of `zeta -> D(0, zeta)` at zero by dyadic finite
    /// differences with first-order Richardson extrapolation, plus the
    /// closed-form prediction `2 sqrt2 pi^2 v^2(0) l1^{-3/2} (det W)^{-1/2}`.
    ///
    /// The difference quotient is evaluated as
    /// `zeta + (zeta/2) int v^2 / (w0 (w0 + zeta^2))`, never as a difference
    /// of two large integrals.
    pub fn d_zeta_slope(&self) -> Result<SlopeEstimate, FiberError> {
        if self.model.v().at_zero() == 0.0 {
            return Err(FiberError::RequiresNonvanishingV0);
        }
        let quotient = |zeta: f64| {
            let terms: Vec<f64> = (0..self.cj.len())
                .map(|j| self.cj[j] / (self.w0_excess[j] * (self.w0_excess[j] + zeta * zeta)))
                .collect();
            zeta + 0.5 * zeta * pairwise_sum(&terms)
        };
        // the quotient integrand lives at scale |q| ~ zeta: only zetas the
        // grading actually resolves are usable
        let finest = 2.0 * std::f64::consts::PI
            / self.grid.n_per_axis() as f64
            * 0.5f64.powi(self.grid.grading_levels() as i32);
        let quotients: Vec<f64> = (4..=14)
            .map(|k| 2f64.powi(-k))
            .filter(|zeta| *zeta >= 8.0 * finest)
            .map(quotient)
            .collect();
        if quotients.len() < 4 {
            return Err(FiberError::ExtrapolationDiverged);
        }
        // first-order Richardson r_k = 2 q_{k+1} - q_k, stopped where the
        // extrapolant sequence is stationary (smallest successive change):
        // past that point resolution error takes over again.
        let extrapolated: Vec<f64> = quotients
            .windows(2)
            .map(|w| 2.0 * w[1] - w[0])
            .collect();
        let mut best = extrapolated.len() - 1;
        let mut best_diff = f64::INFINITY;
        for i in 0..extrapolated.len() - 1 {
            let d = (extrapolated[i + 1] - extrapolated[i]).abs();
            if d < best_diff {
                best_diff = d;
                best = i + 1;
            }
        }
        let numeric = extrapolated[best];
        if best_diff > 0.05 * numeric.abs() {
            return Err(FiberError::ExtrapolationDiverged);
        }
        let qd = self.model.quadratic_data()?;
        Ok(SlopeEstimate {
            numeric,
            prediction: qd.slope_constant(self.model.v().at_zero()),
        })
    }

    /// Fit of Delta(0, z) / sqrt(m - z) over m - z in [1e-6, 1e-3]; demands a
    /// threshold-tuned model (Delta(0, m) = 0 within tolerance).
    pub fn delta_sqrt_coefficient(&self) -> Result<SqrtFit, FiberError> {
        let scale = 1.0 + self.model.u([0.0; 3]).abs();
        if self.delta0m.abs() > 1e-6 * scale {
            return Err(FiberError::FitRejected {
                reason: format!(
                    "Delta(0, m) = {:.3e} does not vanish; the ratio to sqrt(m - z) diverges",
                    self.delta0m
                ),
            });
        }
        let count = 7;
        let mut zetas = Vec::with_capacity(count);
        let mut ratios = Vec::with_capacity(count);
        for i in 0..count {
            let t = i as f64 / (count - 1) as f64;
            let dz = 10f64.powf(-6.0 + 3.0 * t); // m - z, log-spaced
            let zeta = dz.sqrt();
            let value = self.delta_near_m([0.0; 3], dz) - self.delta0m;
            zetas.push(zeta);
            ratios.push(value / zeta);
        }
        let (slope, intercept, rms) = numerics::linear_fit(&zetas, &ratios);
        let _ = slope;
        if intercept <= 0.0 || rms > 0.02 * intercept.abs() {
            return Err(FiberError::FitRejected {
                reason: format!("intercept {intercept:.4e}, rms residual {rms:.2e}"),
            });
        }
        let qd = self.model.quadratic_data()?;
        let prediction = qd.slope_constant(self.model.v().at_zero());
        Ok(SqrtFit {
            fitted: intercept,
            prediction,
            alt_prediction: 2.0 * prediction,
            rms_residual: rms,
        })
    }
}


impl<'a> FiberFamily<'a> {
    /// Diagnostic access to the threshold difference quotient (examples/tests).
    pub fn probe_threshold_quotient(&self, zeta: f64) -> f64 {
        let terms: Vec<f64> = (0..self.cj.len())
            .map(|j| self.cj[j] / (self.w0_excess[j] * (self.w0_excess[j] + zeta * zeta)))
            .collect();
        zeta + 0.5 * zeta * pairwise_sum(&terms)
    }
}
