//! Randomized rearrangement checks run by the `properties` experiment.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::functionals::{pow_abs, Params};
use crate::grid::{CylGrid, Grading, GridFunction, RadialGrid};
use crate::minimizer::symmetrize_and_compare;
use crate::rearrange::{
    double_star, hardy_littlewood_check, monotone_weight_constraint, polya_szego_check,
    reference_weight,
};

use super::PropertiesConfig;

/// Outcome of one randomized property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest violation found, in the property's own relative units.
    pub max_violation: f64,
}

/// Polya–Szegő slack of the fixed shifted bump at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackLevel {
    pub n: usize,
    pub plain: f64,
    pub symmetrized: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub grid: String,
    pub properties: Vec<PropertyResult>,
    pub polya_szego: Vec<SlackLevel>,
}

/// Equal-measure grid with the `s` and `t` dimensions of `params`.
pub fn equal_measure_grid(params: &Params, n: usize, r_max: f64) -> Result<Arc<CylGrid>> {
    let s = RadialGrid::new(params.k, r_max, n, Grading::EqualMeasure)?;
    let t = (params.m() > 0)
        .then(|| RadialGrid::new(params.m(), r_max, n, Grading::EqualMeasure))
        .transpose()?;
    Ok(Arc::new(CylGrid::new(s, t)?))
}

/// Sum of three Gaussian bumps with centers in `[0, 0.6 R]²` and widths in `[0.1 R, 0.3 R]`.
pub fn random_bumps(grid: Arc<CylGrid>, rng: &mut impl Rng) -> Result<GridFunction> {
    let r = grid.s().r_max();
    let bumps: Vec<[f64; 4]> = (0..3)
        .map(|_| {
            [
                rng.gen_range(0.0..0.6 * r),
                rng.gen_range(0.0..0.6 * r),
                rng.gen_range(0.1 * r..0.3 * r),
                rng.gen_range(0.2..1.0),
            ]
        })
        .collect();
    GridFunction::from_fn(grid, |s, t| {
        bumps
            .iter()
            .map(|[s0, t0, w, h]| h * (-((s - s0).powi(2) + (t - t0).powi(2)) / (w * w)).exp())
            .sum()
    })
}

pub fn shifted_bump(grid: Arc<CylGrid>, s0: f64, t0: f64, width: f64) -> Result<GridFunction> {
    GridFunction::from_fn(grid, |s, t| {
        (-((s - s0).powi(2) + (t - t0).powi(2)) / (width * width)).exp()
    })
}

fn uniform_random(grid: Arc<CylGrid>, rng: &mut impl Rng) -> Result<GridFunction> {
    let values = (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    GridFunction::new(grid, values)
}

struct Tally {
    name: &'static str,
    trials: usize,
    violations: usize,
    worst: f64,
    tolerance: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            name,
            trials: 0,
            violations: 0,
            worst: 0.0,
            tolerance,
        }
    }

    /// Records a trial whose violation is `excess`; it fails above the tolerance.
    fn record(&mut self, excess: f64) {
        self.trials += 1;
        if excess > self.tolerance {
            self.violations += 1;
        }
        self.worst = self.worst.max(excess);
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            name: self.name.into(),
            trials: self.trials,
            violations: self.violations,
            max_violation: self.worst,
        }
    }
}

pub fn run_suite(params: &Params, cfg: &PropertiesConfig, seed: u64) -> Result<SuiteReport> {
    let grid = equal_measure_grid(params, cfg.n, cfg.r_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = params.q;

    let mut equi = Tally::new("equimeasurability", 1e-12);
    let mut hl = Tally::new("hardy-littlewood", 0.0);
    let mut idem = Tally::new("idempotence", 0.0);
    let mut mono = Tally::new("monotone-weight", 0.0);
    let (weight, _) = reference_weight(grid.clone(), params.beta, 0.5 * cfg.r_max, None)?;
    let g: Vec<f64> = grid.s().nodes().iter().map(|s| (-s).exp()).collect();
    let h: Vec<f64> = grid.t().nodes().iter().map(|t| 1.0 / (1.0 + t)).collect();
    let norm = |v: &[f64]| grid.integrate(&v.iter().map(|x| pow_abs(*x, q)).collect::<Vec<_>>());

    for _ in 0..cfg.trials {
        let u = uniform_random(grid.clone(), &mut rng)?;
        let us = double_star(&u)?;
        let (a, b) = (norm(u.values())?, norm(us.values())?);
        equi.record((a - b).abs() / a);

        let (plain, sym) = hardy_littlewood_check(&u, &weight)?;
        hl.record((plain - sym) / plain);

        let twice = double_star(&us)?;
        let diff = twice
            .values()
            .iter()
            .zip(us.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        idem.record(diff);

        let (plain, sym) = monotone_weight_constraint(&u, &g, &h, q)?;
        mono.record((plain - sym) / plain);
    }

    let mut quotient = Tally::new("symmetrized-quotient", 0.0);
    for _ in 0..cfg.quotient_trials {
        let u = random_bumps(grid.clone(), &mut rng)?;
        quotient.record(symmetrize_and_compare(&u, params)?.relative_excess());
    }

    let polya_szego = [cfg.n, 2 * cfg.n]
        .iter()
        .map(|&n| {
            let grid = equal_measure_grid(params, n, cfg.r_max)?;
            let r = 0.375 * cfg.r_max;
            let ps = polya_szego_check(
                &shifted_bump(grid, r, 0.25 * cfg.r_max, 0.175 * cfg.r_max)?,
                params.p,
            )?;
            Ok(SlackLevel {
                n,
                plain: ps.plain,
                symmetrized: ps.symmetrized,
                slack: ps.slack,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SuiteReport {
        grid: grid.descriptor().0,
        properties: vec![
            equi.finish(),
            hl.finish(),
            idem.finish(),
            mono.finish(),
            quotient.finish(),
        ],
        polya_szego,
    })
}
