//! Constrained descent for `S = inf { ∫|∇u|^p : ∫ u^q |y|^{-β} = 1 }` on cylindrical grids.
//!
//! Each step moves along the energy gradient projected onto the tangent space of the
//! constraint level set, measured in the metric of the `p = 2` stiffness operator, then
//! clamps at zero and rescales back onto the constraint. The preconditioner is inverted by
//! fast diagonalization of its two one-dimensional factors.

use std::sync::Arc;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{hs_constraint, hs_quotient, pow_abs, weighted_dirichlet, Mode, Params};
use crate::grid::{CylGrid, FaceLine, Grading, GridFunction, RadialGrid};
use crate::rearrange::{double_star, is_double_star_fixed, monotonicity_defect};
use crate::sharp_constant::{product_family, Bump, TaperedEpsFamily};

/// Iterates whose monotonicity defect stays below this count as inside the symmetric class.
pub const CLOSURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescentOptions {
    /// Stop once the relative quotient decrease of an accepted step drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub tau0: f64,
    pub max_halvings: usize,
    /// Regularization `δ = delta_scale · diameter` for `p ≠ 2`.
    pub delta_scale: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            tol: 1e-10,
            max_iter: 2000,
            tau0: 1.0,
            max_halvings: 40,
            delta_scale: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Relative quotient change fell below the tolerance.
    Tolerance,
    /// The search direction vanished.
    Stationary,
    IterationCap,
    /// Every halving of the step increased the quotient.
    StepRejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub energy: f64,
    pub constraint: f64,
    pub quotient: f64,
    /// Accepted step size; zero for the initial state.
    pub step: f64,
}

/// How iterates started inside the double-star class behaved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureObservation {
    pub violations: usize,
    pub max_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizationTrace {
    pub iterations: Vec<IterationRecord>,
    #[serde(skip)]
    pub final_u: GridFunction,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub quotient: f64,
    pub delta: f64,
    /// Present when the initial function was its own double star.
    pub closure: Option<ClosureObservation>,
    /// `|z|` at the cell where the final iterate peaks.
    pub t_argmax: f64,
    pub grid: String,
}

impl MinimizationTrace {
    /// True when no accepted step raised the recorded quotient.
    pub fn is_monotone(&self) -> bool {
        self.iterations
            .windows(2)
            .all(|w| w[1].quotient <= w[0].quotient)
    }
}

/// Starting point for [`minimize_hs`].
#[derive(Debug, Clone)]
pub enum Init {
    /// `e^{−s²−t²}` sampled at the cell centers.
    Bump,
    /// The bump times `1 + amplitude·ξ` with `ξ` uniform on `[−1, 1]` per cell.
    Perturbed {
        seed: u64,
        amplitude: f64,
    },
    Given(GridFunction),
}

impl Init {
    pub fn build(&self, grid: &Arc<CylGrid>) -> Result<GridFunction> {
        let bump = |s: f64, t: f64| (-s * s - t * t).exp();
        match self {
            Init::Bump => GridFunction::from_fn(grid.clone(), bump),
            Init::Perturbed { seed, amplitude } => {
                if !(0.0..1.0).contains(amplitude) {
                    return Err(Error::config(format!(
                        "perturbation amplitude {amplitude} must lie in [0, 1)"
                    )));
                }
                let base = GridFunction::from_fn(grid.clone(), bump)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let values = base
                    .values()
                    .iter()
                    .map(|v| v * (1.0 + amplitude * rng.gen_range(-1.0..=1.0)))
                    .collect();
                GridFunction::new(grid.clone(), values)
            }
            Init::Given(u) => {
                if u.grid() != grid.as_ref() {
                    return Err(Error::usage("initial function lives on a different grid"));
                }
                Ok(u.clone())
            }
        }
    }
}

/// A functional pair `(E, C)` with `E` `p`-homogeneous and `C` `q`-homogeneous.
trait ConstrainedProblem {
    fn p(&self) -> f64;
    fn q(&self) -> f64;
    fn energy(&self, u: &[f64]) -> f64;
    /// Gradient of the regularized energy.
    fn energy_gradient(&self, u: &[f64]) -> Vec<f64>;
    fn constraint(&self, u: &[f64]) -> f64;
    fn constraint_gradient(&self, u: &[f64]) -> Vec<f64>;
    /// Applies the inverse of the metric operator.
    fn precondition(&self, r: &[f64]) -> Vec<f64>;
}

struct Descent {
    values: Vec<f64>,
    records: Vec<IterationRecord>,
    converged: bool,
    stop_reason: StopReason,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize<P: ConstrainedProblem>(
    pb: &P,
    mut u: Vec<f64>,
) -> Option<(Vec<f64>, IterationRecord)> {
    let c = pb.constraint(&u);
    if !(c > 0.0 && c.is_finite()) {
        return None;
    }
    let scale = c.powf(-1.0 / pb.q());
    u.iter_mut().for_each(|x| *x *= scale);
    let constraint = pb.constraint(&u);
    let energy = pb.energy(&u);
    let quotient = energy / constraint.powf(pb.p() / pb.q());
    quotient.is_finite().then_some((
        u,
        IterationRecord {
            energy,
            constraint,
            quotient,
            step: 0.0,
        },
    ))
}

fn descend<P: ConstrainedProblem>(
    pb: &P,
    u0: Vec<f64>,
    opts: &DescentOptions,
    mut on_accept: impl FnMut(&[f64]),
) -> Result<Descent> {
    let (mut u, first) = normalize(pb, u0)
        .ok_or_else(|| Error::degenerate("initial function has zero constraint value"))?;
    let mut records = vec![first];
    let mut current = first.quotient;

    for _ in 0..opts.max_iter {
        let grad_c = pb.constraint_gradient(&u);
        let ge = pb.precondition(&pb.energy_gradient(&u));
        let gc = pb.precondition(&grad_c);
        let mu = dot(&grad_c, &ge) / dot(&grad_c, &gc);
        let d: Vec<f64> = ge.iter().zip(&gc).map(|(a, b)| a - mu * b).collect();
        let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if d.iter().all(|x| x.abs() <= f64::EPSILON * scale) {
            return Ok(Descent {
                values: u,
                records,
                converged: true,
                stop_reason: StopReason::Stationary,
            });
        }

        let mut tau = opts.tau0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = u
                .iter()
                .zip(&d)
                .map(|(x, y)| (x - tau * y).max(0.0))
                .collect();
            if let Some((v, rec)) = normalize(pb, trial) {
                if rec.quotient <= current {
                    accepted = Some((v, IterationRecord { step: tau, ..rec }));
                    break;
                }
            }
            tau *= 0.5;
        }
        let Some((v, rec)) = accepted else {
            debug!("line search exhausted at quotient {current}");
            return Ok(Descent {
                values: u,
                records,
                converged: false,
                stop_reason: StopReason::StepRejected,
            });
        };
        let change = (current - rec.quotient) / current;
        u = v;
        current = rec.quotient;
        records.push(rec);
        on_accept(&u);
        if change < opts.tol {
            return Ok(Descent {
                values: u,
                records,
                converged: true,
                stop_reason: StopReason::Tolerance,
            });
        }
    }
    Ok(Descent {
        values: u,
        records,
        converged: false,
        stop_reason: StopReason::IterationCap,
    })
}

/// Symmetric tridiagonal matrix by its diagonal and off-diagonal.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    fn dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        })
    }

    /// Thomas algorithm.
    fn solve(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut denom = self.diag[0];
        x[0] = r[0] / denom;
        for i in 1..n {
            c[i - 1] = self.off[i - 1] / denom;
            denom = self.diag[i] - self.off[i - 1] * c[i - 1];
            x[i] = (r[i] - self.off[i - 1] * x[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    }
}

/// Stiffness of the face-averaged `p = 2` energy along one radial line.
fn line_stiffness(grid: &RadialGrid) -> Tridiagonal {
    let n = grid.len();
    let mut t = Tridiagonal {
        diag: vec![0.0; n],
        off: vec![0.0; n - 1],
    };
    if grid.is_point() {
        return t;
    }
    let faces = FaceLine::new(grid);
    let m = grid.measures();
    for f in 0..n {
        let ih2 = faces.inv_h[f] * faces.inv_h[f];
        if f + 1 < n {
            let c = 0.5 * (m[f] + m[f + 1]) * ih2;
            t.diag[f] += c;
            t.diag[f + 1] += c;
            t.off[f] -= c;
        } else {
            t.diag[f] += 0.5 * m[f] * ih2;
        }
    }
    t
}

/// Returns `M^{-1/2} V` and the eigenvalues of `M^{-1/2} A M^{-1/2}`.
fn generalized_modes(stiffness: &Tridiagonal, mass: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let n = mass.len();
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let a = stiffness.dense();
    let b = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let eig = SymmetricEigen::new(b);
    let mut modes = eig.eigenvectors;
    for (i, mut row) in modes.row_iter_mut().enumerate() {
        row *= inv_sqrt[i];
    }
    (modes, eig.eigenvalues)
}

/// Inverse of `2 (A_s ⊗ M_t + M_s ⊗ A_t)`.
enum Preconditioner {
    /// No `z` factor: the operator is tridiagonal.
    Radial(Tridiagonal),
    /// Fast diagonalization through the eigenbases of both generalized problems.
    Tensor {
        s_modes: DMatrix<f64>,
        s_eigs: DVector<f64>,
        t_modes: DMatrix<f64>,
        t_eigs: DVector<f64>,
    },
}

impl Preconditioner {
    fn new(grid: &CylGrid) -> Self {
        let a_s = line_stiffness(grid.s());
        if grid.t().is_point() {
            let twice = Tridiagonal {
                diag: a_s.diag.iter().map(|d| 2.0 * d).collect(),
                off: a_s.off.iter().map(|o| 2.0 * o).collect(),
            };
            return Preconditioner::Radial(twice);
        }
        let (s_modes, s_eigs) = generalized_modes(&a_s, grid.s().measures());
        let (t_modes, t_eigs) = generalized_modes(&line_stiffness(grid.t()), grid.t().measures());
        Preconditioner::Tensor {
            s_modes,
            s_eigs,
            t_modes,
            t_eigs,
        }
    }

    /// Solves for row-major `r`.
    fn solve(&self, r: &[f64]) -> Vec<f64> {
        let Preconditioner::Tensor {
            s_modes,
            s_eigs,
            t_modes,
            t_eigs,
        } = self
        else {
            let Preconditioner::Radial(t) = self else {
                unreachable!()
            };
            return t.solve(r);
        };
        let (ns, nt) = (s_eigs.len(), t_eigs.len());
        let rhs = DMatrix::from_row_slice(ns, nt, r);
        let mut y = s_modes.transpose() * rhs * t_modes;
        for i in 0..ns {
            for j in 0..nt {
                y[(i, j)] /= 2.0 * (s_eigs[i] + t_eigs[j]);
            }
        }
        let x = s_modes * y * t_modes.transpose();
        let mut out = Vec::with_capacity(ns * nt);
        for i in 0..ns {
            out.extend((0..nt).map(|j| x[(i, j)]));
        }
        out
    }
}

struct HsProblem {
    p: f64,
    q: f64,
    delta2: f64,
    ns: usize,
    nt: usize,
    s_faces: FaceLine,
    t_faces: Option<FaceLine>,
    /// Cell measures `ms_i · mt_j`.
    omega: Vec<f64>,
    /// Cell measures times the exact cell average of `s^{-β}`.
    omega_beta: Vec<f64>,
    solver: Preconditioner,
}

impl HsProblem {
    fn new(grid: &CylGrid, params: &Params, delta: f64) -> Result<Self> {
        let w = grid.s().weight_average(-params.beta)?;
        let omega = grid.cell_measures();
        let nt = grid.nt();
        let omega_beta = omega
            .iter()
            .enumerate()
            .map(|(idx, m)| m * w[idx / nt])
            .collect();
        Ok(HsProblem {
            p: params.p,
            q: params.q,
            delta2: delta * delta,
            ns: grid.ns(),
            nt,
            s_faces: FaceLine::new(grid.s()),
            t_faces: (!grid.t().is_point()).then(|| FaceLine::new(grid.t())),
            omega,
            omega_beta,
            solver: Preconditioner::new(grid),
        })
    }

    /// Visits every face as `(cell a, cell b or None for the ghost, 1/h)`.
    fn for_each_face(&self, mut f: impl FnMut(usize, Option<usize>, f64)) {
        let (ns, nt) = (self.ns, self.nt);
        for j in 0..nt {
            for i in 0..ns {
                f(
                    i * nt + j,
                    (i + 1 < ns).then(|| (i + 1) * nt + j),
                    self.s_faces.inv_h[i],
                );
            }
        }
        if let Some(tf) = &self.t_faces {
            for i in 0..ns {
                for j in 0..nt {
                    f(
                        i * nt + j,
                        (j + 1 < nt).then(|| i * nt + j + 1),
                        tf.inv_h[j],
                    );
                }
            }
        }
    }

    fn squared_gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g2 = vec![0.0; u.len()];
        self.for_each_face(|a, b, ih| {
            let d = (b.map_or(0.0, |b| u[b]) - u[a]) * ih;
            let half = 0.5 * d * d;
            g2[a] += half;
            if let Some(b) = b {
                g2[b] += half;
            }
        });
        g2
    }
}

impl ConstrainedProblem for HsProblem {
    fn p(&self) -> f64 {
        self.p
    }

    fn q(&self) -> f64 {
        self.q
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let half_p = 0.5 * self.p;
        self.squared_gradient(u)
            .iter()
            .zip(&self.omega)
            .map(|(g, w)| w * if half_p == 1.0 { *g } else { g.powf(half_p) })
            .sum()
    }

    fn energy_gradient(&self, u: &[f64]) -> Vec<f64> {
        let half_p = 0.5 * self.p;
        let coef: Vec<f64> = self
            .squared_gradient(u)
            .iter()
            .zip(&self.omega)
            .map(|(g, w)| {
                w * half_p
                    * if half_p == 1.0 {
                        1.0
                    } else {
                        (g + self.delta2).powf(half_p - 1.0)
                    }
            })
            .collect();
        let mut grad = vec![0.0; u.len()];
        self.for_each_face(|a, b, ih| {
            let d = (b.map_or(0.0, |b| u[b]) - u[a]) * ih;
            let flux = (coef[a] + b.map_or(0.0, |b| coef[b])) * d * ih;
            grad[a] -= flux;
            if let Some(b) = b {
                grad[b] += flux;
            }
        });
        grad
    }

    fn constraint(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.omega_beta)
            .map(|(x, w)| pow_abs(*x, self.q) * w)
            .sum()
    }

    fn constraint_gradient(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.omega_beta)
            .map(|(x, w)| self.q * x.abs().powf(self.q - 1.0) * w)
            .collect()
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        self.solver.solve(r)
    }
}

fn grid_diameter(grid: &CylGrid) -> f64 {
    let t = if grid.t().is_point() {
        0.0
    } else {
        grid.t().r_max()
    };
    grid.s().r_max().hypot(t)
}

/// Minimizes the Hardy–Sobolev quotient over nonnegative grid functions vanishing at the outer edges.
pub fn minimize_hs(
    params: &Params,
    grid: Arc<CylGrid>,
    init: &Init,
    opts: &DescentOptions,
) -> Result<MinimizationTrace> {
    if params.mode != Mode::HardySobolev {
        return Err(Error::usage(
            "minimization needs parameters built under condition (H)",
        ));
    }
    if opts.max_iter == 0 || !(opts.tau0 > 0.0) || !(opts.tol >= 0.0) {
        return Err(Error::config(
            "descent needs max_iter ≥ 1, τ₀ > 0 and tol ≥ 0",
        ));
    }
    if !(params.beta < params.p) {
        warn!(
            "β = {} ≥ p: the infimum is not attained, expect drift",
            params.beta
        );
    }
    let u0 = init.build(&grid)?;
    // validates grid dimensions against the parameters
    if !(hs_constraint(&u0, params)? > 0.0) {
        return Err(Error::degenerate(
            "initial function has zero constraint value",
        ));
    }
    let delta = opts.delta_scale * grid_diameter(&grid);
    let pb = HsProblem::new(&grid, params, delta)?;

    let track = is_double_star_fixed(&u0);
    let mut closure = ClosureObservation {
        violations: 0,
        max_defect: 0.0,
    };
    let mut step = 0usize;
    let descent = descend(&pb, u0.values().to_vec(), opts, |v| {
        step += 1;
        if !track {
            return;
        }
        if let Ok(f) = GridFunction::new(grid.clone(), v.to_vec()) {
            let defect = monotonicity_defect(&f);
            closure.max_defect = closure.max_defect.max(defect);
            if defect > CLOSURE_TOLERANCE {
                closure.violations += 1;
                warn!("iterate {step} left the double-star class (defect {defect:.3e})");
            }
        }
    })?;

    let final_u = GridFunction::new(grid.clone(), descent.values)?;
    let argmax = final_u.values().iter().enumerate().fold(0, |best, (i, v)| {
        if *v > final_u.values()[best] {
            i
        } else {
            best
        }
    });
    let t_argmax = if grid.t().is_point() {
        0.0
    } else {
        grid.t().nodes()[argmax % grid.nt()]
    };
    let quotient = descent.records.last().map_or(f64::NAN, |r| r.quotient);
    Ok(MinimizationTrace {
        iterations: descent.records,
        final_u,
        converged: descent.converged,
        stop_reason: descent.stop_reason,
        quotient,
        delta,
        closure: track.then_some(closure),
        t_argmax,
        grid: grid.descriptor().0,
    })
}

/// Cell-centered profile on `(0, width)` with zero ghosts on both ends.
struct IntervalProblem {
    p: f64,
    h: f64,
    delta2: f64,
    /// `2A` for the `p = 2` energy.
    metric: Tridiagonal,
}

impl IntervalProblem {
    fn new(p: f64, width: f64, n: usize, delta: f64) -> Self {
        let h = width / n as f64;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        // boundary faces touch one cell at distance h/2; interior faces two cells at distance h
        let edge = 2.0 * 0.5 * h * (2.0 / h).powi(2);
        diag[0] += edge;
        diag[n - 1] += edge;
        let inner = 2.0 * h / (h * h);
        for f in 0..n - 1 {
            diag[f] += inner;
            diag[f + 1] += inner;
            off[f] = -inner;
        }
        IntervalProblem {
            p,
            h,
            delta2: delta * delta,
            metric: Tridiagonal { diag, off },
        }
    }

    /// Face differences, `n + 1` of them, and their derivative factors.
    fn faces(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut d = Vec::with_capacity(n + 1);
        d.push(u[0] * 2.0 / self.h);
        d.extend(u.windows(2).map(|w| (w[1] - w[0]) / self.h));
        d.push(-u[n - 1] * 2.0 / self.h);
        d
    }
}

impl ConstrainedProblem for IntervalProblem {
    fn p(&self) -> f64 {
        self.p
    }

    fn q(&self) -> f64 {
        self.p
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let d = self.faces(u);
        d.windows(2)
            .map(|f| self.h * (0.5 * (f[0] * f[0] + f[1] * f[1])).powf(0.5 * self.p))
            .sum()
    }

    fn energy_gradient(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let d = self.faces(u);
        let half_p = 0.5 * self.p;
        let coef: Vec<f64> = d
            .windows(2)
            .map(|f| {
                let g2 = 0.5 * (f[0] * f[0] + f[1] * f[1]);
                self.h
                    * half_p
                    * if half_p == 1.0 {
                        1.0
                    } else {
                        (g2 + self.delta2).powf(half_p - 1.0)
                    }
            })
            .collect();
        let mut grad = vec![0.0; n];
        grad[0] += coef[0] * d[0] * 2.0 / self.h;
        grad[n - 1] -= coef[n - 1] * d[n] * 2.0 / self.h;
        for f in 1..n {
            let flux = (coef[f - 1] + coef[f]) * d[f] / self.h;
            grad[f] += flux;
            grad[f - 1] -= flux;
        }
        grad
    }

    fn constraint(&self, u: &[f64]) -> f64 {
        u.iter().map(|x| pow_abs(*x, self.p) * self.h).sum()
    }

    fn constraint_gradient(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .map(|x| self.p * x.abs().powf(self.p - 1.0) * self.h)
            .collect()
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        self.metric.solve(r)
    }
}

/// Discrete minimizer of `∫|v'|^p / ∫|v|^p` on `(0, width)` with Dirichlet ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalMinimum {
    pub values: Vec<f64>,
    pub quotient: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn minimize_interval(
    p: f64,
    width: f64,
    n: usize,
    opts: &DescentOptions,
) -> Result<IntervalMinimum> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p = {p} must exceed 1")));
    }
    if !(width > 0.0) || n < 2 {
        return Err(Error::config(
            "the interval needs positive width and at least two cells",
        ));
    }
    let pb = IntervalProblem::new(p, width, n, opts.delta_scale * width);
    let h = width / n as f64;
    let u0 = (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            x * (width - x)
        })
        .collect();
    let d = descend(&pb, u0, opts, |_| {})?;
    Ok(IntervalMinimum {
        quotient: d.records.last().map_or(f64::NAN, |r| r.quotient),
        values: d.values,
        converged: d.converged,
        iterations: d.records.len() - 1,
    })
}

/// Energy, constraint and quotient of `u` and of `u★★`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizeReport {
    pub quotient_before: f64,
    pub quotient_after: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    pub constraint_before: f64,
    pub constraint_after: f64,
}

impl SymmetrizeReport {
    /// `(Q(u★★) − Q(u)) / Q(u)`; positive values are discretization slack.
    pub fn relative_excess(&self) -> f64 {
        (self.quotient_after - self.quotient_before) / self.quotient_before
    }
}

/// Compares `u` with its double star; quotients are those of the functions rescaled to constraint 1.
pub fn symmetrize_and_compare(u: &GridFunction, params: &Params) -> Result<SymmetrizeReport> {
    let after = double_star(u)?;
    let constraint_before = hs_constraint(u, params)?;
    let constraint_after = hs_constraint(&after, params)?;
    if !(constraint_before > 0.0) {
        return Err(Error::degenerate("zero constraint value"));
    }
    let energy_before = weighted_dirichlet(u, params.p, 0.0)?;
    let energy_after = weighted_dirichlet(&after, params.p, 0.0)?;
    Ok(SymmetrizeReport {
        quotient_before: hs_quotient(u, params)?.value,
        quotient_after: hs_quotient(&after, params)?.value,
        energy_before,
        energy_after,
        constraint_before,
        constraint_after,
    })
}

/// The product family `v_ε(|y|)·w(|z|/λ)` used at the endpoint `β = p`.
///
/// `v_ε` is [`TaperedEpsFamily`] and `w` the unit [`Bump`]. Each `λ` is a multiple of the
/// support radius of `v_ε`, since the `z` share of the quotient scales with that radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointFamily {
    pub eps: Vec<f64>,
    pub lambda: Vec<f64>,
    pub taper_a: f64,
    pub taper_b: f64,
    pub n_s: usize,
    pub n_t: usize,
}

impl Default for EndpointFamily {
    fn default() -> Self {
        EndpointFamily {
            eps: vec![0.2, 0.1, 0.05, 0.02, 0.015],
            lambda: vec![1.0, 4.0, 16.0, 64.0, 256.0],
            taper_a: 1.0,
            taper_b: 1.0,
            n_s: 4096,
            n_t: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointRow {
    pub eps: f64,
    /// `λ` in units of the `y`-support radius.
    pub lambda: f64,
    pub support: f64,
    pub energy: f64,
    pub constraint: f64,
    pub quotient: f64,
    pub target: f64,
    pub grid: String,
}

/// `hs_quotient` along simultaneous `ε ↓`, `λ ↑` ladders at `β = q = p`.
pub fn hardy_endpoint_sweep(params: &Params, family: &EndpointFamily) -> Result<Vec<EndpointRow>> {
    if params.mode != Mode::HardySobolev {
        return Err(Error::usage(
            "the endpoint sweep needs Hardy–Sobolev parameters",
        ));
    }
    if params.beta != params.p {
        return Err(Error::usage(format!(
            "the endpoint sweep needs β = p, got β = {}",
            params.beta
        )));
    }
    if !(params.p < params.k as f64) {
        return Err(Error::domain(format!(
            "p = {} ≥ k = {}: the endpoint constant degenerates",
            params.p, params.k
        )));
    }
    if params.m() == 0 {
        return Err(Error::usage("the endpoint sweep needs a z-factor (k < N)"));
    }
    if family.eps.is_empty() || family.eps.len() != family.lambda.len() {
        return Err(Error::config(
            "the ε and λ ladders must be nonempty and of equal length",
        ));
    }
    if family.n_s < 8 || family.n_t < 2 {
        return Err(Error::config("endpoint grids need n_s ≥ 8 and n_t ≥ 2"));
    }
    let target = ((params.k as f64 - params.p) / params.p).powf(params.p);
    let bump = Bump::default();
    let mut rows = family
        .eps
        .par_iter()
        .zip(&family.lambda)
        .map(|(&eps, &lambda)| {
            let v = TaperedEpsFamily::new(
                eps,
                params.p,
                -params.p,
                params.k,
                family.taper_a,
                family.taper_b,
            )?;
            let s = RadialGrid::new(
                params.k,
                v.r_end,
                family.n_s,
                Grading::Split { r_break: 1.0 },
            )?;
            let scale = lambda * v.r_end;
            let t = RadialGrid::new(
                params.m(),
                scale * bump.radius,
                family.n_t,
                Grading::Uniform,
            )?;
            let grid = Arc::new(CylGrid::new(s, Some(t))?);
            let u = product_family(&v, &bump, scale, grid)?;
            let r = hs_quotient(&u, params)?;
            Ok(EndpointRow {
                eps,
                lambda,
                support: v.r_end,
                energy: r.numerator,
                constraint: r.denominator,
                quotient: r.value,
                target,
                grid: r.grid.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cyl(k: usize, m: usize, r: f64, n: usize) -> Arc<CylGrid> {
        let s = RadialGrid::new(k, r, n, Grading::Uniform).unwrap();
        let t = (m > 0).then(|| RadialGrid::new(m, r, n, Grading::Uniform).unwrap());
        Arc::new(CylGrid::new(s, t).unwrap())
    }

    fn quick() -> DescentOptions {
        DescentOptions {
            tol: 1e-9,
            max_iter: 300,
            ..DescentOptions::default()
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let grid = cyl(2, 2, 3.0, 6);
        let params = Params::hardy_sobolev(4, 2, 2.5, 1.0).unwrap();
        let pb = HsProblem::new(&grid, &params, 0.0).unwrap();
        let u: Vec<f64> = Init::Perturbed {
            seed: 3,
            amplitude: 0.5,
        }
        .build(&grid)
        .unwrap()
        .into_values();
        let g = pb.energy_gradient(&u);
        // central differences resolve |∇u|^{p-2} only where u is well above the step
        for idx in (0..u.len()).filter(|i| u[*i] > 1e-3) {
            let h = 1e-7;
            let (mut up, mut dn) = (u.clone(), u.clone());
            up[idx] += h;
            dn[idx] -= h;
            let fd = (pb.energy(&up) - pb.energy(&dn)) / (2.0 * h);
            assert_relative_eq!(g[idx], fd, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn solver_inverts_stiffness() {
        // for p = 2 the energy gradient is 2Ku, so preconditioning returns u
        for (grid, params) in [
            (
                cyl(2, 1, 2.0, 5),
                Params::hardy_sobolev(3, 2, 2.0, 0.5).unwrap(),
            ),
            (
                cyl(3, 0, 2.0, 9),
                Params::hardy_sobolev(3, 3, 2.0, 0.0).unwrap(),
            ),
        ] {
            let pb = HsProblem::new(&grid, &params, 0.0).unwrap();
            let u: Vec<f64> = (0..grid.len())
                .map(|i| (i as f64 * 0.37).sin().abs())
                .collect();
            let back = pb.precondition(&pb.energy_gradient(&u));
            for (a, b) in u.iter().zip(&back) {
                assert_relative_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn energy_agrees_with_functional() {
        let grid = cyl(2, 2, 3.0, 8);
        let params = Params::hardy_sobolev(4, 2, 3.0, 1.0).unwrap();
        let u = Init::Bump.build(&grid).unwrap();
        let pb = HsProblem::new(&grid, &params, 0.0).unwrap();
        assert_relative_eq!(
            pb.energy(u.values()),
            weighted_dirichlet(&u, 3.0, 0.0).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            pb.constraint(u.values()),
            hs_constraint(&u, &params).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn trace_is_monotone_and_projected() {
        let grid = cyl(2, 2, 4.0, 24);
        let params = Params::hardy_sobolev(4, 2, 2.0, 1.0).unwrap();
        let trace = minimize_hs(
            &params,
            grid,
            &Init::Perturbed {
                seed: 1,
                amplitude: 0.3,
            },
            &quick(),
        )
        .unwrap();
        assert!(trace.is_monotone());
        for r in &trace.iterations {
            assert!((r.constraint - 1.0).abs() < 1e-12);
        }
        assert!(trace.converged, "{:?}", trace.stop_reason);
    }

    #[test]
    fn zero_init_is_degenerate() {
        let grid = cyl(2, 2, 2.0, 4);
        let params = Params::hardy_sobolev(4, 2, 2.0, 1.0).unwrap();
        let zero = GridFunction::zeros(grid.clone());
        assert!(matches!(
            minimize_hs(&params, grid, &Init::Given(zero), &quick()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn init_scaling_is_irrelevant() {
        let grid = cyl(2, 2, 4.0, 16);
        let params = Params::hardy_sobolev(4, 2, 2.0, 1.0).unwrap();
        let u = Init::Bump.build(&grid).unwrap();
        let a = minimize_hs(&params, grid.clone(), &Init::Given(u.clone()), &quick()).unwrap();
        let b = minimize_hs(
            &params,
            grid,
            &Init::Given(u.scaled(10.0).unwrap()),
            &quick(),
        )
        .unwrap();
        assert_relative_eq!(a.quotient, b.quotient, max_relative = 1e-10);
    }

    #[test]
    fn interval_minimum_tends_to_pi_squared() {
        let opts = DescentOptions {
            tol: 1e-14,
            max_iter: 5000,
            ..DescentOptions::default()
        };
        let m = minimize_interval(2.0, 1.0, 200, &opts).unwrap();
        assert!(m.converged);
        assert_relative_eq!(
            m.quotient,
            std::f64::consts::PI.powi(2),
            max_relative = 1e-3
        );
    }

    #[test]
    fn symmetric_input_is_unchanged() {
        let grid = cyl(2, 2, 3.0, 10);
        let params = Params::hardy_sobolev(4, 2, 2.0, 1.0).unwrap();
        let r = symmetrize_and_compare(&Init::Bump.build(&grid).unwrap(), &params).unwrap();
        assert_eq!(r.quotient_before, r.quotient_after);
        assert_eq!(r.energy_before, r.energy_after);
    }

    #[test]
    fn endpoint_sweep_guards() {
        let fam = EndpointFamily {
            eps: vec![0.2],
            lambda: vec![1.0],
            n_s: 64,
            n_t: 8,
            ..EndpointFamily::default()
        };
        let p3 = Params::hardy_sobolev(4, 3, 2.0, 1.0).unwrap();
        assert!(matches!(
            hardy_endpoint_sweep(&p3, &fam),
            Err(Error::Usage(_))
        ));
        let bad = EndpointFamily {
            lambda: vec![],
            ..fam.clone()
        };
        let p = Params::hardy_sobolev(4, 3, 2.0, 2.0).unwrap();
        assert!(matches!(
            hardy_endpoint_sweep(&p, &bad),
            Err(Error::Config(_))
        ));
        let rows = hardy_endpoint_sweep(&p, &fam).unwrap();
        assert!(rows[0].quotient > rows[0].target);
    }
}
