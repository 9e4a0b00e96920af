//! Discrete Schwarz symmetrization on measure-weighted grids.
//!
//! A rearrangement keeps cell geometry fixed and reassigns values: each line of cells is
//! refilled from the origin outward with its values sorted in decreasing order. On grids
//! whose cells along the line carry equal measure this is exactly equimeasurable; otherwise
//! superlevel sets match only up to single-cell granularity, which [`Rearranged`] reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{pow_abs, weighted_dirichlet};
use crate::grid::{CylGrid, GridFunction};

/// Distribution function `λ ↦ μ({u > λ})` sampled at the distinct values of `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerProfile {
    /// Distinct levels, decreasing.
    pub thresholds: Vec<f64>,
    pub superlevel_measures: Vec<f64>,
}

impl LayerProfile {
    pub fn new(values: &[f64], measures: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|a, b| values[*b].total_cmp(&values[*a]));
        let mut thresholds = Vec::new();
        let mut superlevel_measures = Vec::new();
        let mut acc = 0.0;
        let mut k = 0;
        while k < order.len() {
            let level = values[order[k]];
            thresholds.push(level);
            superlevel_measures.push(acc);
            while k < order.len() && values[order[k]] == level {
                acc += measures[order[k]];
                k += 1;
            }
        }
        LayerProfile {
            thresholds,
            superlevel_measures,
        }
    }

    /// `μ({u > level})`.
    pub fn measure_above(&self, values: &[f64], measures: &[f64], level: f64) -> f64 {
        values
            .iter()
            .zip(measures)
            .filter(|(v, _)| **v > level)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Output of the 1D kernel with its measure bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearranged {
    pub values: Vec<f64>,
    pub layers: LayerProfile,
    /// Largest `|μ(input > λ) − μ(output > λ)|` over the distinct levels.
    pub max_measure_mismatch: f64,
}

fn check_line(values: &[f64], measures: &[f64]) -> Result<()> {
    if values.len() != measures.len() {
        return Err(Error::usage(format!(
            "{} values for {} cells",
            values.len(),
            measures.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::domain(format!(
            "rearrangement needs nonnegative values, found {v}"
        )));
    }
    if measures.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::config(
            "rearrangement needs cells of positive measure",
        ));
    }
    Ok(())
}

/// Stable descending sort; equal values keep their input order.
fn sort_desc(values: &mut [f64]) {
    values.sort_by(|a, b| b.total_cmp(a));
}

/// Decreasing rearrangement of one line of cells ordered by increasing radius.
pub fn decreasing_rearrangement_1d(values: &[f64], measures: &[f64]) -> Result<Rearranged> {
    check_line(values, measures)?;
    let mut out = values.to_vec();
    sort_desc(&mut out);
    let before = LayerProfile::new(values, measures);
    let max_measure_mismatch = before
        .thresholds
        .iter()
        .zip(&before.superlevel_measures)
        .map(|(level, mu)| (before.measure_above(&out, measures, *level) - mu).abs())
        .fold(0.0, f64::max);
    Ok(Rearranged {
        values: out,
        layers: before,
        max_measure_mismatch,
    })
}

fn check_fn(u: &GridFunction) -> Result<()> {
    if let Some(v) = u.values().iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::domain(format!(
            "rearrangement needs nonnegative values, found {v}"
        )));
    }
    Ok(())
}

/// Schwarz symmetrization in `y` for every fixed `|z|`: each t-row sorted along s.
pub fn schwarz_y(u: &GridFunction) -> Result<GridFunction> {
    check_fn(u)?;
    let grid = u.grid();
    let (ns, nt) = (grid.ns(), grid.nt());
    let mut out = u.values().to_vec();
    let mut line = vec![0.0; ns];
    for j in 0..nt {
        for (i, x) in line.iter_mut().enumerate() {
            *x = out[i * nt + j];
        }
        sort_desc(&mut line);
        for (i, x) in line.iter().enumerate() {
            out[i * nt + j] = *x;
        }
    }
    u.with_values(out)
}

/// Schwarz symmetrization in `z` for every fixed `|y|`: each s-column sorted along t.
pub fn schwarz_z(u: &GridFunction) -> Result<GridFunction> {
    check_fn(u)?;
    let nt = u.grid().nt();
    let mut out = u.values().to_vec();
    for row in out.chunks_mut(nt) {
        sort_desc(row);
    }
    u.with_values(out)
}

/// `u★★ = schwarz_z(schwarz_y(u))`, nonincreasing in both `s` and `t`.
pub fn double_star(u: &GridFunction) -> Result<GridFunction> {
    schwarz_z(&schwarz_y(u)?)
}

/// True when `u` is nonincreasing along every s-line and every t-line.
pub fn is_double_star_fixed(u: &GridFunction) -> bool {
    monotonicity_defect(u) == 0.0
}

/// Largest upward jump `max(u_next − u, 0)` along either direction, relative to `max u`.
pub fn monotonicity_defect(u: &GridFunction) -> f64 {
    let grid = u.grid();
    let (ns, nt) = (grid.ns(), grid.nt());
    let v = u.values();
    let mut worst = 0.0f64;
    for i in 0..ns {
        for j in 0..nt {
            let here = v[i * nt + j];
            if i + 1 < ns {
                worst = worst.max(v[(i + 1) * nt + j] - here);
            }
            if j + 1 < nt {
                worst = worst.max(v[i * nt + j + 1] - here);
            }
        }
    }
    let scale = u.max_value();
    if scale > 0.0 {
        worst / scale
    } else {
        0.0
    }
}

fn same_grid(u: &GridFunction, v: &GridFunction) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::usage("both functions must live on the same grid"));
    }
    Ok(())
}

fn pair_integral(grid: &CylGrid, a: &[f64], b: &[f64]) -> f64 {
    let nt = grid.nt();
    let mt = grid.t().measures();
    grid.s()
        .measures()
        .iter()
        .enumerate()
        .map(|(i, ms)| {
            let (ra, rb) = (&a[i * nt..(i + 1) * nt], &b[i * nt..(i + 1) * nt]);
            ms * ra
                .iter()
                .zip(rb)
                .zip(mt)
                .map(|((x, y), m)| x * y * m)
                .sum::<f64>()
        })
        .sum()
}

/// `(∫ u v, ∫ u★★ v)` for a weight `v` that is its own double star.
pub fn hardy_littlewood_check(u: &GridFunction, v: &GridFunction) -> Result<(f64, f64)> {
    same_grid(u, v)?;
    if !is_double_star_fixed(v) {
        return Err(Error::usage(
            "the Hardy–Littlewood weight must satisfy v★★ = v",
        ));
    }
    let us = double_star(u)?;
    let grid = u.grid();
    Ok((
        pair_integral(grid, u.values(), v.values()),
        pair_integral(grid, us.values(), v.values()),
    ))
}

/// Cell values of `|y|^{-β} χ_{|z| ≤ r_cut}`, with `|y|^{-β}` averaged exactly over each s-cell.
///
/// Returns the weight and a flag that is set when `u` (if given) is nonzero beyond `r_cut`.
pub fn reference_weight(
    grid: std::sync::Arc<CylGrid>,
    beta: f64,
    r_cut: f64,
    u: Option<&GridFunction>,
) -> Result<(GridFunction, bool)> {
    let w = grid.s().weight_average(-beta)?;
    let t_nodes = grid.t().nodes().to_vec();
    let nt = grid.nt();
    let mut values = Vec::with_capacity(grid.len());
    for wi in &w {
        values.extend(t_nodes.iter().map(|t| {
            if grid.t().is_point() || *t <= r_cut {
                *wi
            } else {
                0.0
            }
        }));
    }
    let exceeds = u.is_some_and(|u| {
        u.values()
            .iter()
            .enumerate()
            .any(|(idx, val)| *val > 0.0 && !grid.t().is_point() && t_nodes[idx % nt] > r_cut)
    });
    Ok((GridFunction::new(grid, values)?, exceeds))
}

/// Dirichlet `p`-energies along the chain `u → u★ → u★★` and the measured violations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyaSzego {
    pub plain: f64,
    pub y_symmetrized: f64,
    pub symmetrized: f64,
    /// `max(E(u★) − E(u), 0) + max(E(u★★) − E(u★), 0)`.
    pub slack: f64,
}

impl PolyaSzego {
    pub fn relative_slack(&self) -> f64 {
        self.slack / self.plain
    }
}

pub fn polya_szego_check(u: &GridFunction, p: f64) -> Result<PolyaSzego> {
    let ys = schwarz_y(u)?;
    let ds = schwarz_z(&ys)?;
    let plain = weighted_dirichlet(u, p, 0.0)?;
    let y_symmetrized = weighted_dirichlet(&ys, p, 0.0)?;
    let symmetrized = weighted_dirichlet(&ds, p, 0.0)?;
    let slack = (y_symmetrized - plain).max(0.0) + (symmetrized - y_symmetrized).max(0.0);
    Ok(PolyaSzego {
        plain,
        y_symmetrized,
        symmetrized,
        slack,
    })
}

/// `(∫ u^q g h, ∫ (u★★)^q g h)` for nonincreasing profiles `g(s)`, `h(t)` given per cell.
pub fn monotone_weight_constraint(
    u: &GridFunction,
    g: &[f64],
    h: &[f64],
    q: f64,
) -> Result<(f64, f64)> {
    let grid = u.grid();
    if g.len() != grid.ns() || h.len() != grid.nt() {
        return Err(Error::usage(
            "g must have one value per s-cell and h one per t-cell",
        ));
    }
    let nonincreasing =
        |x: &[f64]| x.windows(2).all(|w| w[1] <= w[0]) && x.iter().all(|v| *v >= 0.0);
    if !nonincreasing(g) || !nonincreasing(h) {
        return Err(Error::domain(
            "g and h must be nonnegative and nonincreasing",
        ));
    }
    let weight: Vec<f64> = g
        .iter()
        .flat_map(|gi| h.iter().map(move |hj| gi * hj))
        .collect();
    let us = double_star(u)?;
    let pow = |x: &[f64]| x.iter().map(|v| pow_abs(*v, q)).collect::<Vec<_>>();
    Ok((
        pair_integral(grid, &pow(u.values()), &weight),
        pair_integral(grid, &pow(us.values()), &weight),
    ))
}
