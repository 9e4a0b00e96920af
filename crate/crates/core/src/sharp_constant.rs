//! The sharp Hardy constant and the test families that attain it in the limit.
//!
//! For `k = N` the two-piece family `u_ε = min(1, |x|^{-(α+N)/p - ε})` has the closed-form
//! quotient
//!
//! ```text
//! Q(ε) = ((α+N)/p + ε)^p · (α+N) / (α+N + pε)
//! ```
//!
//! which decreases to `((α+N)/p)^p` as `ε → 0`. For `k < N` the product `v(|y|)·w(|z|/λ)`
//! spreads the `z` factor until its share of the energy is negligible.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{hardy_quotient, hardy_quotient_with, pow_abs, Mode, Params, TailMode};
use crate::grid::{sphere_area, CylGrid, GridFunction, PowerTail, RadialGrid};
use crate::minimizer::{minimize_interval, DescentOptions};

/// `p^p / (α + k)^p`.
pub fn hardy_constant(p: f64, alpha: f64, k: usize) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p = {p} must exceed 1")));
    }
    let ak = alpha + k as f64;
    if !(ak > 0.0) {
        return Err(Error::domain(format!("α + k = {ak} must be positive")));
    }
    Ok((p / ak).powf(p))
}

/// Decay exponent `(α + N)/p + ε` of the ε-family.
pub fn eps_exponent(eps: f64, p: f64, alpha: f64, n: usize) -> f64 {
    (alpha + n as f64) / p + eps
}

/// Samples `u_ε` (plateau 1 on `r ≤ 1`, power decay outside) at the nodes of a radial grid.
pub fn eps_family(eps: f64, params: &Params, grid: &RadialGrid) -> Result<GridFunction> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("ε = {eps} must be positive")));
    }
    if params.mode != Mode::Hardy || params.k != params.n {
        return Err(Error::usage(
            "the ε-family is the radial (k = N) Hardy construction",
        ));
    }
    if grid.dim() != params.n {
        return Err(Error::usage(format!(
            "grid dimension {} does not match N = {}",
            grid.dim(),
            params.n
        )));
    }
    if grid.r_max() < 1.0 {
        return Err(Error::config(
            "the ε-family grid must reach past the plateau (r_max ≥ 1)",
        ));
    }
    let c = eps_exponent(eps, params.p, params.alpha, params.n);
    let cyl = Arc::new(CylGrid::radial(grid.clone())?);
    GridFunction::from_fn(cyl, |r, _| if r <= 1.0 { 1.0 } else { r.powf(-c) })?.with_tail(
        PowerTail {
            amplitude: 1.0,
            exponent: c,
        },
    )
}

/// Closed-form Hardy quotient of the ε-family.
pub fn eps_quotient_closed_form(eps: f64, p: f64, alpha: f64, n: usize) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p = {p} must exceed 1")));
    }
    let an = alpha + n as f64;
    if !(an > 0.0) {
        return Err(Error::domain(format!("α + N = {an} must be positive")));
    }
    if !(eps > 0.0) {
        return Err(Error::domain(format!("ε = {eps} must be positive")));
    }
    Ok((an / p + eps).powf(p) * an / (an + p * eps))
}

/// Which functional a tail remainder belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailFunctional {
    /// `∫_{r > r_max} |u|^p r^a`
    Norm,
    /// `∫_{r > r_max} |u'|^p r^a`
    Dirichlet,
}

/// Closed-form integral of a power-law tail over `(r_max, ∞)` in dimension `grid.dim()`.
///
/// `None` stands for a compactly supported function and contributes nothing.
pub fn tail_correction(
    tail: Option<PowerTail>,
    grid: &RadialGrid,
    p: f64,
    a: f64,
    functional: TailFunctional,
) -> Result<f64> {
    let Some(tail) = tail else {
        return Ok(0.0);
    };
    let d = grid.dim();
    let sigma = sphere_area(d)?;
    let r = grid.r_max();
    let (coef, power) = match functional {
        TailFunctional::Norm => (tail.amplitude.abs(), tail.exponent),
        TailFunctional::Dirichlet => (tail.amplitude.abs() * tail.exponent, tail.exponent + 1.0),
    };
    let e = -power * p + a + d as f64;
    if !(e < 0.0) {
        return Err(Error::domain(format!(
            "tail r^-{power} gives a divergent remainder (integrand exponent {e} ≥ -1)"
        )));
    }
    Ok(sigma * coef.powf(p) * r.powf(e) / -e)
}

/// `((s² + t²)^{p/2}, (1−λ)^{1−p} s^p + λ^{1−p} t^p)`.
pub fn convexity_bound(s: f64, t: f64, lambda: f64, p: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(format!("λ = {lambda} must lie in (0, 1)")));
    }
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::domain("s and t must be nonnegative"));
    }
    if !(p > 1.0) {
        return Err(Error::domain(format!("p = {p} must exceed 1")));
    }
    let lhs = (s * s + t * t).powf(0.5 * p);
    let rhs = (1.0 - lambda).powf(1.0 - p) * s.powf(p) + lambda.powf(1.0 - p) * t.powf(p);
    Ok((lhs, rhs))
}

/// A radial profile that can be evaluated off-grid.
pub trait RadialSample: Sync {
    fn sample(&self, r: f64) -> f64;
    /// Smallest radius outside which the profile vanishes (`∞` if never).
    fn support_radius(&self) -> f64;
}

impl RadialSample for GridFunction {
    /// Piecewise-linear through the nodes, flat inside the first node, ghost-valued at `r_max`.
    fn sample(&self, r: f64) -> f64 {
        debug_assert_eq!(
            self.grid().m(),
            0,
            "off-grid sampling is for radial functions"
        );
        let g = self.grid().s();
        let nodes = g.nodes();
        let v = self.values();
        let r_max = g.r_max();
        if r > r_max {
            return self.tail().map_or(0.0, |t| t.value(r));
        }
        if r <= nodes[0] {
            return v[0];
        }
        let last = nodes.len() - 1;
        if r >= nodes[last] {
            let ghost = self.s_ghost(0);
            let f = (r - nodes[last]) / (r_max - nodes[last]);
            return v[last] + f * (ghost - v[last]);
        }
        let i = nodes.partition_point(|x| *x <= r) - 1;
        let f = (r - nodes[i]) / (nodes[i + 1] - nodes[i]);
        v[i] + f * (v[i + 1] - v[i])
    }

    fn support_radius(&self) -> f64 {
        if self.tail().is_some() {
            return f64::INFINITY;
        }
        self.grid().s().r_max()
    }
}

/// `(1 − (r/radius)²)²` on `r < radius`; zero slope at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub radius: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Bump { radius: 1.0 }
    }
}

impl RadialSample for Bump {
    fn sample(&self, r: f64) -> f64 {
        let x = r / self.radius;
        if x >= 1.0 {
            0.0
        } else {
            let b = 1.0 - x * x;
            b * b
        }
    }

    fn support_radius(&self) -> f64 {
        self.radius
    }
}

/// The ε-family with compact support: plateau on `r ≤ 1`, `r^{-c}` up to `r_taper`,
/// then multiplied by a factor falling linearly in `ln r` to zero at `r_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperedEpsFamily {
    pub eps: f64,
    pub exponent: f64,
    pub r_taper: f64,
    pub r_end: f64,
}

impl TaperedEpsFamily {
    /// Taper from `e^{a/ε}` to `e^{(a+b)/ε}`.
    pub fn new(eps: f64, p: f64, alpha: f64, k: usize, taper_a: f64, taper_b: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("ε = {eps} must be positive")));
        }
        if !(taper_a > 0.0 && taper_b > 0.0) {
            return Err(Error::config("taper lengths must be positive"));
        }
        let r_taper = (taper_a / eps).exp();
        let r_end = ((taper_a + taper_b) / eps).exp();
        if !r_end.is_finite() || r_end.powi(k as i32 + 2).is_infinite() {
            return Err(Error::config(format!(
                "ε = {eps} puts the taper end beyond floating-point range"
            )));
        }
        Ok(TaperedEpsFamily {
            eps,
            exponent: eps_exponent(eps, p, alpha, k),
            r_taper,
            r_end,
        })
    }
}

impl RadialSample for TaperedEpsFamily {
    fn sample(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else if r <= self.r_taper {
            r.powf(-self.exponent)
        } else if r < self.r_end {
            let frac = (r / self.r_taper).ln() / (self.r_end / self.r_taper).ln();
            r.powf(-self.exponent) * (1.0 - frac)
        } else {
            0.0
        }
    }

    fn support_radius(&self) -> f64 {
        self.r_end
    }
}

/// Samples `u(y, z) = v(|y|) · w(|z| / lambda_scale)` on a cylindrical grid.
pub fn product_family<V: RadialSample + ?Sized, W: RadialSample + ?Sized>(
    v: &V,
    w: &W,
    lambda_scale: f64,
    grid: Arc<CylGrid>,
) -> Result<GridFunction> {
    if grid.m() == 0 {
        return Err(Error::usage("the product family needs a z-factor (m ≥ 1)"));
    }
    if !(lambda_scale > 0.0 && lambda_scale.is_finite()) {
        return Err(Error::domain(format!(
            "λ = {lambda_scale} must be positive"
        )));
    }
    let slack = 1.0 + 1e-12;
    let z_support = lambda_scale * w.support_radius();
    if !(z_support <= grid.t().r_max() * slack) {
        return Err(Error::config(format!(
            "scaled z-support {z_support} does not fit inside t_max = {}",
            grid.t().r_max()
        )));
    }
    if !(v.support_radius() <= grid.s().r_max() * slack) {
        return Err(Error::config(format!(
            "y-support {} does not fit inside s_max = {}",
            v.support_radius(),
            grid.s().r_max()
        )));
    }
    let vs: Vec<f64> = grid.s().nodes().iter().map(|r| v.sample(*r)).collect();
    let ws: Vec<f64> = grid
        .t()
        .nodes()
        .iter()
        .map(|r| w.sample(*r / lambda_scale))
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for a in &vs {
        values.extend(ws.iter().map(|b| a * b));
    }
    GridFunction::new(grid, values)
}

/// One point of an ε ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSweepRow {
    pub eps: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
    /// Quotient from grid quadrature alone.
    pub uncorrected: f64,
    pub tail_numerator: f64,
    pub tail_denominator: f64,
    pub closed_form: f64,
    pub grid: String,
}

/// Hardy quotient of the ε-family along a ladder, with the analytic tail added.
pub fn eps_sweep(params: &Params, grid: &RadialGrid, ladder: &[f64]) -> Result<Vec<EpsSweepRow>> {
    if ladder.is_empty() {
        return Err(Error::config("the ε ladder is empty"));
    }
    let mut rows: Vec<EpsSweepRow> = ladder
        .par_iter()
        .map(|&eps| {
            let u = eps_family(eps, params, grid)?;
            let corrected = hardy_quotient(&u, params)?;
            let raw = hardy_quotient_with(&u, params, TailMode::Off)?;
            let tail = corrected.tail.expect("ε-family carries a tail");
            Ok(EpsSweepRow {
                eps,
                numerator: corrected.numerator,
                denominator: corrected.denominator,
                quotient: corrected.value,
                uncorrected: raw.value,
                tail_numerator: tail.numerator,
                tail_denominator: tail.denominator,
                closed_form: eps_quotient_closed_form(eps, params.p, params.alpha, params.n)?,
                grid: corrected.grid.0,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    Ok(rows)
}

/// Resolution of the `Ω × ℝ` splitting demo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitResolution {
    /// Cells across `Ω`.
    pub n_omega: usize,
    /// Cells across the support of the `z` bump.
    pub n_z: usize,
}

impl Default for SplitResolution {
    fn default() -> Self {
        SplitResolution {
            n_omega: 256,
            n_z: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRow {
    pub lambda: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDemo {
    pub p: f64,
    pub omega_width: f64,
    /// Discrete infimum of `∫_Ω |v'|^p / ∫_Ω |v|^p`.
    pub omega_infimum: f64,
    pub rows: Vec<SplitRow>,
}

/// Face-averaged squared differences of a cell-centered profile on a uniform interval
/// with Dirichlet ghosts on both end edges.
pub(crate) fn interval_squared_gradient(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut faces = Vec::with_capacity(n + 1);
    faces.push(v[0] / (0.5 * h));
    faces.extend(v.windows(2).map(|w| (w[1] - w[0]) / h));
    faces.push(-v[n - 1] / (0.5 * h));
    faces
        .windows(2)
        .map(|f| 0.5 * (f[0] * f[0] + f[1] * f[1]))
        .collect()
}

/// Rayleigh quotient of `u(x₁, x₂) = v(x₁) w(x₂/λ)` on `(0, width) × ℝ`, for each `λ`.
///
/// `v` is the discrete minimizer on `Ω = (0, width)`; the rows approach its quotient as `λ` grows.
pub fn split_infimum_demo(
    p: f64,
    omega_width: f64,
    lambda_scales: &[f64],
    resolution: SplitResolution,
) -> Result<SplitDemo> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("p = {p} must exceed 1")));
    }
    if !(omega_width > 0.0) {
        return Err(Error::config("Ω must have positive width"));
    }
    if lambda_scales.is_empty() {
        return Err(Error::config("the λ ladder is empty"));
    }
    if lambda_scales.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::domain("λ values must be positive"));
    }
    if resolution.n_omega < 2 || resolution.n_z < 2 {
        return Err(Error::config(
            "split demo needs at least two cells per direction",
        ));
    }
    let opts = DescentOptions {
        tol: 1e-13,
        max_iter: 5000,
        ..DescentOptions::default()
    };
    let omega = minimize_interval(p, omega_width, resolution.n_omega, &opts)?;
    let h = omega_width / resolution.n_omega as f64;
    let gv = interval_squared_gradient(&omega.values, h);
    let bump = Bump::default();

    let rows = lambda_scales
        .par_iter()
        .map(|&lambda| {
            let t = RadialGrid::new(
                1,
                lambda * bump.radius,
                resolution.n_z,
                crate::grid::Grading::Uniform,
            )?;
            let tline = Arc::new(CylGrid::radial(t)?);
            let w = GridFunction::from_fn(tline.clone(), |r, _| bump.sample(r / lambda))?;
            let gw = crate::grid::squared_gradient(&w, crate::grid::Components::Full);
            let mt = tline.s().measures();
            let (mut num, mut den) = (0.0, 0.0);
            for (i, vi) in omega.values.iter().enumerate() {
                for (j, wj) in w.values().iter().enumerate() {
                    let g2 = wj * wj * gv[i] + vi * vi * gw[j];
                    num += pow_abs(g2.sqrt(), p) * h * mt[j];
                    den += pow_abs(vi * wj, p) * h * mt[j];
                }
            }
            Ok(SplitRow {
                lambda,
                numerator: num,
                denominator: den,
                quotient: num / den,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SplitDemo {
        p,
        omega_width,
        omega_infimum: omega.quotient,
        rows,
    })
}
