//! Weighted integral functionals of grid functions.
//!
//! All weights are powers of `s = |y|`, averaged exactly over each s-cell, so the
//! singular weights `|y|^α` and `|y|^{-β}` never get sampled at the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::grid::{squared_gradient, Components, GridDescriptor, GridFunction};
use crate::sharp_constant::{tail_correction, TailFunctional};

/// Which inequality a parameter tuple is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `∫|u|^p |y|^α ≤ C ∫|∇u|^p |y|^{α+p}`
    Hardy,
    /// `∫|u|^q |y|^{-β} ≤ C (∫|∇u|^p)^{q/p}` under condition (H).
    HardySobolev,
}

/// The problem tuple `(N, k, p, α, β, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub mode: Mode,
}

fn check_common(n: usize, k: usize, p: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid(Violation::DimensionPositive));
    }
    if k == 0 || k > n {
        return Err(Error::Invalid(Violation::KInRange));
    }
    if !p.is_finite() {
        return Err(Error::Invalid(Violation::Finite));
    }
    if !(p > 1.0) {
        return Err(Error::Invalid(Violation::PAboveOne));
    }
    Ok(())
}

impl Params {
    pub fn hardy(n: usize, k: usize, p: f64, alpha: f64) -> Result<Self> {
        check_common(n, k, p)?;
        if !alpha.is_finite() {
            return Err(Error::Invalid(Violation::Finite));
        }
        if !(alpha + k as f64 > 0.0) {
            return Err(Error::Invalid(Violation::AlphaPlusK));
        }
        Ok(Params {
            n,
            k,
            p,
            alpha,
            beta: 0.0,
            q: p,
            mode: Mode::Hardy,
        })
    }

    /// Condition (H); `q` is derived from `(N, p, β)`.
    pub fn hardy_sobolev(n: usize, k: usize, p: f64, beta: f64) -> Result<Self> {
        check_common(n, k, p)?;
        if !beta.is_finite() {
            return Err(Error::Invalid(Violation::Finite));
        }
        if !(beta >= 0.0) {
            return Err(Error::Invalid(Violation::BetaNonNegative));
        }
        if !(beta < k as f64) {
            return Err(Error::Invalid(Violation::BetaBelowK));
        }
        if !(beta <= p) {
            return Err(Error::Invalid(Violation::BetaAtMostP));
        }
        if !(p < n as f64) {
            return Err(Error::Invalid(Violation::PBelowN));
        }
        let q = critical_exponent(n, p, beta);
        Ok(Params {
            n,
            k,
            p,
            alpha: 0.0,
            beta,
            q,
            mode: Mode::HardySobolev,
        })
    }

    /// As [`Params::hardy_sobolev`], rejecting an explicit `q` that disagrees with (H).
    pub fn hardy_sobolev_with_q(n: usize, k: usize, p: f64, beta: f64, q: f64) -> Result<Self> {
        let params = Self::hardy_sobolev(n, k, p, beta)?;
        if !q.is_finite() || (q - params.q).abs() > 1e-12 * params.q.abs().max(1.0) {
            return Err(Error::Invalid(Violation::QConsistent));
        }
        Ok(params)
    }

    pub fn m(&self) -> usize {
        self.n - self.k
    }

    /// `((α + k)/p)^p` in Hardy mode, the infimum of the Hardy quotient.
    pub fn hardy_target(&self) -> f64 {
        ((self.alpha + self.k as f64) / self.p).powf(self.p)
    }
}

/// `q(N, p, β) = p(N − β)/(N − p)`.
pub fn critical_exponent(n: usize, p: f64, beta: f64) -> f64 {
    p * (n as f64 - beta) / (n as f64 - p)
}

/// Analytic remainder added to a quotient's numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailNote {
    pub numerator: f64,
    pub denominator: f64,
}

/// Numerator, denominator and value of a Rayleigh-type quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub numerator: f64,
    pub denominator: f64,
    pub value: f64,
    pub grid: GridDescriptor,
    /// Present when an analytic tail beyond `r_max` was added to both integrals.
    pub tail: Option<TailNote>,
}

impl QuotientReport {
    pub fn tail_corrected(&self) -> bool {
        self.tail.is_some()
    }
}

/// Whether to add the analytic tail carried by a grid function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMode {
    #[default]
    Auto,
    Off,
}

fn check_weight(u: &GridFunction, a: f64) -> Result<Vec<f64>> {
    let k = u.grid().k() as f64;
    if !(a + k > 0.0) {
        return Err(Error::domain(format!(
            "weight |y|^{a} is not integrable at y = 0 for k = {k}"
        )));
    }
    u.grid().s().weight_average(a)
}

/// `Σ_ij f(cell) · w_i(a) · m_ij` for a per-cell density.
fn weighted_sum(u: &GridFunction, density: &[f64], a: f64) -> Result<f64> {
    let w = check_weight(u, a)?;
    let grid = u.grid();
    let nt = grid.nt();
    let mt = grid.t().measures();
    Ok(grid
        .s()
        .measures()
        .iter()
        .zip(&w)
        .enumerate()
        .map(|(i, (ms, wi))| {
            let row = &density[i * nt..(i + 1) * nt];
            ms * wi * row.iter().zip(mt).map(|(d, m)| d * m).sum::<f64>()
        })
        .sum())
}

#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else {
        x.abs().powf(p)
    }
}

/// `∫ u^p |y|^a dx` over the grid (no tail).
pub fn weighted_p_norm(u: &GridFunction, p: f64, a: f64) -> Result<f64> {
    let density: Vec<f64> = u.values().iter().map(|v| pow_abs(*v, p)).collect();
    weighted_sum(u, &density, a)
}

/// `∫ |∇u|^p |y|^a dx` over the grid (no tail).
pub fn weighted_dirichlet(u: &GridFunction, p: f64, a: f64) -> Result<f64> {
    weighted_dirichlet_components(u, p, a, Components::Full)
}

/// Dirichlet energy restricted to some gradient components.
pub fn weighted_dirichlet_components(
    u: &GridFunction,
    p: f64,
    a: f64,
    components: Components,
) -> Result<f64> {
    let g2 = squared_gradient(u, components);
    let density: Vec<f64> = g2
        .iter()
        .map(|g| if p == 2.0 { *g } else { g.powf(0.5 * p) })
        .collect();
    weighted_sum(u, &density, a)
}

/// `∫|∇u|^p |y|^{α+p} / ∫|u|^p |y|^α`.
pub fn hardy_quotient(u: &GridFunction, params: &Params) -> Result<QuotientReport> {
    hardy_quotient_with(u, params, TailMode::Auto)
}

pub fn hardy_quotient_with(
    u: &GridFunction,
    params: &Params,
    tail_mode: TailMode,
) -> Result<QuotientReport> {
    check_grid(u, params)?;
    let (p, alpha) = (params.p, params.alpha);
    let mut numerator = weighted_dirichlet(u, p, alpha + p)?;
    let mut denominator = weighted_p_norm(u, p, alpha)?;
    let mut note = None;
    if let (TailMode::Auto, Some(tail)) = (tail_mode, u.tail()) {
        let s = u.grid().s();
        let tn = tail_correction(Some(tail), s, p, alpha + p, TailFunctional::Dirichlet)?;
        let td = tail_correction(Some(tail), s, p, alpha, TailFunctional::Norm)?;
        numerator += tn;
        denominator += td;
        note = Some(TailNote {
            numerator: tn,
            denominator: td,
        });
    }
    report(numerator, denominator, u, note)
}

fn report(
    numerator: f64,
    denominator: f64,
    u: &GridFunction,
    tail: Option<TailNote>,
) -> Result<QuotientReport> {
    if !(denominator > 0.0) {
        return Err(Error::degenerate("quotient denominator vanishes"));
    }
    Ok(QuotientReport {
        numerator,
        denominator,
        value: numerator / denominator,
        grid: u.grid().descriptor(),
        tail,
    })
}

fn require_hs(params: &Params) -> Result<()> {
    if params.mode != Mode::HardySobolev {
        return Err(Error::usage(
            "Hardy–Sobolev functionals need parameters built under condition (H)",
        ));
    }
    Ok(())
}

fn check_grid(u: &GridFunction, params: &Params) -> Result<()> {
    let g = u.grid();
    if g.k() != params.k || g.big_n() != params.n {
        return Err(Error::usage(format!(
            "grid is ℝ^{}×ℝ^{} but parameters ask for k = {}, N = {}",
            g.k(),
            g.m(),
            params.k,
            params.n
        )));
    }
    Ok(())
}

/// `∫ u^q |y|^{-β} dx`, evaluated but not enforced.
pub fn hs_constraint(u: &GridFunction, params: &Params) -> Result<f64> {
    require_hs(params)?;
    check_grid(u, params)?;
    if !(params.beta < u.grid().k() as f64) {
        return Err(Error::domain(format!(
            "β = {} must stay below k = {}",
            params.beta,
            u.grid().k()
        )));
    }
    weighted_p_norm(u, params.q, -params.beta)
}

/// `∫|∇u|^p / (∫ u^q |y|^{-β})^{p/q}`, invariant under `u → c·u`.
pub fn hs_quotient(u: &GridFunction, params: &Params) -> Result<QuotientReport> {
    let constraint = hs_constraint(u, params)?;
    if !(constraint > 0.0) {
        return Err(Error::degenerate(
            "Hardy–Sobolev constraint integral vanishes",
        ));
    }
    let energy = weighted_dirichlet(u, params.p, 0.0)?;
    report(energy, constraint.powf(params.p / params.q), u, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CylGrid, Grading, RadialGrid};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn radial_grid(d: usize, r_max: f64, n: usize) -> Arc<CylGrid> {
        Arc::new(CylGrid::radial(RadialGrid::new(d, r_max, n, Grading::Uniform).unwrap()).unwrap())
    }

    #[test]
    fn params_validation_names_clauses() {
        assert!(Params::hardy(3, 3, 2.0, 0.0).is_ok());
        let err = |r: Result<Params>| match r {
            Err(Error::Invalid(v)) => v,
            other => panic!("expected validation error, got {other:?}"),
        };
        assert_eq!(err(Params::hardy(3, 3, 1.0, 0.0)), Violation::PAboveOne);
        assert_eq!(err(Params::hardy(3, 3, 2.0, -3.0)), Violation::AlphaPlusK);
        assert_eq!(err(Params::hardy(3, 4, 2.0, 0.0)), Violation::KInRange);
        assert_eq!(
            err(Params::hardy_sobolev(4, 2, 2.0, 2.0)),
            Violation::BetaBelowK
        );
        assert_eq!(
            err(Params::hardy_sobolev(4, 3, 2.0, 2.5)),
            Violation::BetaAtMostP
        );
        assert_eq!(
            err(Params::hardy_sobolev(3, 3, 3.0, 0.0)),
            Violation::PBelowN
        );
        assert_eq!(
            err(Params::hardy_sobolev(4, 2, 2.0, -0.5)),
            Violation::BetaNonNegative
        );
        assert_eq!(
            err(Params::hardy_sobolev_with_q(4, 2, 2.0, 1.0, 3.5)),
            Violation::QConsistent
        );
        assert_eq!(
            Params::hardy_sobolev_with_q(4, 2, 2.0, 1.0, 3.0).unwrap().q,
            3.0
        );
        assert_eq!(format!("{}", Violation::BetaBelowK), "β < k violated");
    }

    #[test]
    fn p_norm_examples() {
        let ball = radial_grid(3, 1.0, 64);
        let one = GridFunction::from_fn(ball.clone(), |_, _| 1.0).unwrap();
        assert_relative_eq!(
            weighted_p_norm(&one, 2.0, 0.0).unwrap(),
            4.0 * PI / 3.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            weighted_p_norm(&one, 2.0, -2.0).unwrap(),
            4.0 * PI,
            max_relative = 1e-12
        );
        let zero = GridFunction::zeros(ball);
        assert_eq!(weighted_p_norm(&zero, 2.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            weighted_p_norm(&one, 2.0, -3.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dirichlet_examples() {
        let line = radial_grid(1, 2.0, 400);
        let c = GridFunction::from_fn(line.clone(), |_, _| 0.7).unwrap();
        // the Dirichlet ghost face is the only contribution for a constant
        let boundary_only = weighted_dirichlet(&c, 2.0, 0.0).unwrap();
        let h: f64 = 2.0 / 400.0;
        assert_relative_eq!(
            boundary_only,
            0.5 * (0.7 / (0.5 * h)).powi(2) * 2.0 * h,
            max_relative = 1e-12
        );

        let tent = GridFunction::from_fn(line, |s, _| (1.0 - s).max(0.0)).unwrap();
        let e = weighted_dirichlet(&tent, 2.0, 0.0).unwrap();
        assert!((e - 2.0).abs() < 1e-2, "tent energy {e}");
    }

    #[test]
    fn tent_hardy_quotient_matches_hand_integration() {
        // u = (1-s)_+ on ℝ¹ with α = 0: ∫|u'|²|y|² = 2/3 and ∫u² = 2/3
        let params = Params::hardy(1, 1, 2.0, 0.0).unwrap();
        let line = radial_grid(1, 2.0, 2000);
        let tent = GridFunction::from_fn(line, |s, _| (1.0 - s).max(0.0)).unwrap();
        let r = hardy_quotient(&tent, &params).unwrap();
        assert!((r.value - 1.0).abs() < 1e-3, "{}", r.value);
        assert!(!r.tail_corrected());
    }

    #[test]
    fn hs_constraint_examples() {
        let p = Params::hardy_sobolev(3, 3, 2.0, 1.0).unwrap();
        let ball = radial_grid(3, 1.0, 32);
        let one = GridFunction::from_fn(ball.clone(), |_, _| 1.0).unwrap();
        // 4π ∫₀¹ r dr
        assert_relative_eq!(
            hs_constraint(&one, &p).unwrap(),
            2.0 * PI,
            max_relative = 1e-12
        );
        assert_eq!(
            hs_constraint(&GridFunction::zeros(ball.clone()), &p).unwrap(),
            0.0
        );
        let p0 = Params::hardy_sobolev(3, 3, 2.0, 0.0).unwrap();
        assert_relative_eq!(
            hs_constraint(&one, &p0).unwrap(),
            4.0 * PI / 3.0,
            max_relative = 1e-12
        );
        assert!(matches!(
            hs_quotient(&GridFunction::zeros(ball), &p),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn hs_quotient_normalized_equals_energy() {
        let p = Params::hardy_sobolev(3, 3, 2.0, 0.0).unwrap();
        let g = radial_grid(3, 5.0, 200);
        let u = GridFunction::from_fn(g, |s, _| (-s * s).exp()).unwrap();
        let c = hs_constraint(&u, &p).unwrap();
        let un = u.scaled(c.powf(-1.0 / p.q)).unwrap();
        assert_relative_eq!(hs_constraint(&un, &p).unwrap(), 1.0, max_relative = 1e-12);
        let r = hs_quotient(&un, &p).unwrap();
        assert_relative_eq!(
            r.value,
            weighted_dirichlet(&un, 2.0, 0.0).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            r.value,
            hs_quotient(&u.scaled(3.0).unwrap(), &p).unwrap().value,
            max_relative = 1e-12
        );
    }
}
