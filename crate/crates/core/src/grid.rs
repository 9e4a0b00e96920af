//! Radial and cylindrical grids.
//!
//! Every integral over `ℝ^N` that the workbench needs is taken over functions of
//! `(|y|, |z|)` for `x = (y, z) ∈ ℝ^k × ℝ^{N-k}`. A [`RadialGrid`] discretizes one
//! radius, carrying the exact per-cell measure `σ(d) ∫ r^{d-1} dr`; a [`CylGrid`] is
//! the tensor product of an `s = |y|` grid and a `t = |z|` grid.
//!
//! Boundary conditions are fixed: homogeneous Neumann at the origin of each radius,
//! homogeneous Dirichlet at the truncation radius unless the function carries an
//! analytic [`PowerTail`].

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface area of the unit sphere in `ℝ^d`, `2 π^{d/2} / Γ(d/2)`.
pub fn sphere_area(d: usize) -> Result<f64> {
    match d {
        0 => Err(Error::domain("sphere_area requires d ≥ 1")),
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        _ => {
            // σ(d) = σ(d-2) · 2π / (d-2)
            let mut area = if d % 2 == 1 { 2.0 } else { 2.0 * PI };
            let mut dim = if d % 2 == 1 { 1 } else { 2 };
            while dim < d {
                area *= 2.0 * PI / dim as f64;
                dim += 2;
            }
            Ok(area)
        }
    }
}

/// How cell edges are distributed over `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Grading {
    Uniform,
    /// Cell widths grow outward by `ratio` (≥ 1).
    Geometric {
        ratio: f64,
    },
    /// A quarter of the cells uniform on `[0, r_break]`, the rest log-uniform out to `r_max`.
    Split {
        r_break: f64,
    },
    /// Every cell carries the same `d`-dimensional measure.
    EqualMeasure,
}

impl fmt::Display for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grading::Uniform => write!(f, "uniform"),
            Grading::Geometric { ratio } => write!(f, "geometric({ratio})"),
            Grading::Split { r_break } => write!(f, "split({r_break})"),
            Grading::EqualMeasure => write!(f, "equal-measure"),
        }
    }
}

/// Serializable description of a [`RadialGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub r_max: f64,
    pub n: usize,
    pub grading: Grading,
}

impl GridSpec {
    pub fn new(d: usize, r_max: f64, n: usize, grading: Grading) -> Self {
        GridSpec {
            d,
            r_max,
            n,
            grading,
        }
    }

    pub fn build(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.d, self.r_max, self.n, self.grading)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d={} r_max={} n={} {}",
            self.d, self.r_max, self.n, self.grading
        )
    }
}

/// Cell-centered grid on `[0, r_max]` for a radius in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    edges: Vec<f64>,
    nodes: Vec<f64>,
    measures: Vec<f64>,
    spec: Option<GridSpec>,
}

impl RadialGrid {
    pub fn new(d: usize, r_max: f64, n: usize, grading: Grading) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("radial grid dimension must be ≥ 1"));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::config(format!(
                "r_max must be positive and finite, got {r_max}"
            )));
        }
        if n == 0 {
            return Err(Error::config("radial grid needs at least one cell"));
        }
        let edges = match grading {
            Grading::Uniform => (0..=n).map(|i| r_max * i as f64 / n as f64).collect(),
            Grading::Geometric { ratio } => {
                if !(ratio >= 1.0 && ratio.is_finite()) {
                    return Err(Error::config(format!(
                        "geometric ratio must be ≥ 1 (cells coarsen outward), got {ratio}"
                    )));
                }
                geometric_edges(r_max, n, ratio)
            }
            Grading::Split { r_break } => {
                if !(r_break > 0.0 && r_break < r_max) {
                    return Err(Error::config(format!(
                        "split break {r_break} must lie strictly inside (0, {r_max})"
                    )));
                }
                if n < 2 {
                    return Err(Error::config("split grading needs n ≥ 2"));
                }
                let core = (n / 4).max(1);
                let tail = n - core;
                let mut edges: Vec<f64> = (0..=core)
                    .map(|i| r_break * i as f64 / core as f64)
                    .collect();
                let log_span = (r_max / r_break).ln();
                edges.extend(
                    (1..=tail).map(|j| r_break * (log_span * j as f64 / tail as f64).exp()),
                );
                edges[n] = r_max;
                edges
            }
            Grading::EqualMeasure => (0..=n)
                .map(|i| r_max * (i as f64 / n as f64).powf(1.0 / d as f64))
                .collect(),
        };
        let mut grid = Self::from_edges(d, edges)?;
        grid.spec = Some(GridSpec {
            d,
            r_max,
            n,
            grading,
        });
        Ok(grid)
    }

    /// Grid from explicit edges `0 = e_0 < e_1 < ... < e_n`.
    pub fn from_edges(d: usize, edges: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("radial grid dimension must be ≥ 1"));
        }
        if edges.len() < 2 || edges[0] != 0.0 {
            return Err(Error::config(
                "edges must start at 0 and contain at least one cell",
            ));
        }
        if edges
            .windows(2)
            .any(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(Error::config(
                "cell edges must be finite and strictly increasing",
            ));
        }
        let sigma = sphere_area(d)?;
        let di = d as i32;
        let measures = edges
            .windows(2)
            .map(|w| sigma * (w[1].powi(di) - w[0].powi(di)) / d as f64)
            .collect();
        let nodes = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(RadialGrid {
            dim: d,
            edges,
            nodes,
            measures,
            spec: None,
        })
    }

    /// The degenerate grid used for `ℝ^0`: one cell of measure 1.
    pub fn point() -> Self {
        RadialGrid {
            dim: 0,
            edges: vec![0.0, 0.0],
            nodes: vec![0.0],
            measures: vec![1.0],
            spec: None,
        }
    }

    pub fn is_point(&self) -> bool {
        self.dim == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.edges.last().expect("grid has edges")
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn spec(&self) -> Option<GridSpec> {
        self.spec
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// `Σ_i values_i · m_i`.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::usage(format!(
                "integrate: {} values for {} cells",
                values.len(),
                self.len()
            )));
        }
        Ok(values.iter().zip(&self.measures).map(|(v, m)| v * m).sum())
    }

    /// Exact average of `r^a` over each cell against the cell's `r^{d-1} dr` measure.
    pub fn weight_average(&self, a: f64) -> Result<Vec<f64>> {
        if self.is_point() || a == 0.0 {
            return Ok(vec![1.0; self.len()]);
        }
        let d = self.dim as f64;
        let e = a + d;
        if !(e > 0.0) {
            return Err(Error::domain(format!(
                "weight r^{a} is not integrable at the origin in dimension {}",
                self.dim
            )));
        }
        Ok(self
            .edges
            .windows(2)
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                (d / e) * (hi.powf(e) - lo.powf(e)) / (hi.powf(d) - lo.powf(d))
            })
            .collect())
    }

    /// A copy with cells `i` and `i + 1` merged into one.
    pub fn merge_cells(&self, i: usize) -> Result<Self> {
        if self.is_point() || i + 1 >= self.len() {
            return Err(Error::usage(format!(
                "cannot merge cell {i} with its outer neighbour"
            )));
        }
        let mut edges = self.edges.clone();
        edges.remove(i + 1);
        let mut measures = self.measures.clone();
        let merged = measures[i] + measures[i + 1];
        measures.remove(i + 1);
        measures[i] = merged;
        let nodes = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(RadialGrid {
            dim: self.dim,
            edges,
            nodes,
            measures,
            spec: None,
        })
    }

    /// True when all cells carry the same measure to relative `tol`.
    pub fn is_equal_measure(&self, tol: f64) -> bool {
        let first = self.measures[0];
        self.measures
            .iter()
            .all(|m| ((m - first) / first).abs() <= tol)
    }

    fn descriptor(&self) -> String {
        match (self.is_point(), self.spec) {
            (true, _) => "point".to_string(),
            (false, Some(spec)) => spec.to_string(),
            (false, None) => format!(
                "d={} r_max={} n={} custom",
                self.dim,
                self.r_max(),
                self.len()
            ),
        }
    }
}

fn geometric_edges(r_max: f64, n: usize, ratio: f64) -> Vec<f64> {
    if (ratio - 1.0).abs() < 1e-14 {
        return (0..=n).map(|i| r_max * i as f64 / n as f64).collect();
    }
    let total = (ratio.powi(n as i32) - 1.0) / (ratio - 1.0);
    let first = r_max / total;
    let mut edges = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    let mut width = first;
    edges.push(0.0);
    for _ in 0..n {
        acc += width;
        edges.push(acc);
        width *= ratio;
    }
    edges[n] = r_max;
    edges
}

/// Serializable description of a [`CylGrid`]; `t: None` means `k = N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylSpec {
    pub s: GridSpec,
    #[serde(default)]
    pub t: Option<GridSpec>,
}

impl CylSpec {
    pub fn build(&self) -> Result<CylGrid> {
        let s = self.s.build()?;
        let t = self.t.map(|t| t.build()).transpose()?;
        CylGrid::new(s, t)
    }
}

/// Tensor grid over `(s, t) = (|y|, |z|)` with `y ∈ ℝ^k`, `z ∈ ℝ^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylGrid {
    s: RadialGrid,
    t: RadialGrid,
}

impl CylGrid {
    /// `t = None` gives the degenerate `m = 0` grid.
    pub fn new(s: RadialGrid, t: Option<RadialGrid>) -> Result<Self> {
        if s.is_point() {
            return Err(Error::config("the s-grid must have dimension k ≥ 1"));
        }
        let t = match t {
            Some(t) if t.is_point() => {
                return Err(Error::config("pass None for a zero-dimensional t-grid"))
            }
            Some(t) => t,
            None => RadialGrid::point(),
        };
        Ok(CylGrid { s, t })
    }

    pub fn radial(s: RadialGrid) -> Result<Self> {
        Self::new(s, None)
    }

    pub fn k(&self) -> usize {
        self.s.dim
    }

    pub fn m(&self) -> usize {
        self.t.dim
    }

    pub fn big_n(&self) -> usize {
        self.k() + self.m()
    }

    pub fn s(&self) -> &RadialGrid {
        &self.s
    }

    pub fn t(&self) -> &RadialGrid {
        &self.t
    }

    pub fn ns(&self) -> usize {
        self.s.len()
    }

    pub fn nt(&self) -> usize {
        self.t.len()
    }

    pub fn len(&self) -> usize {
        self.ns() * self.nt()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nt() + j
    }

    /// `m_ij = m^s_i · m^t_j`, row-major in `(s, t)`.
    pub fn cell_measures(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for ms in &self.s.measures {
            out.extend(self.t.measures.iter().map(|mt| ms * mt));
        }
        out
    }

    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::usage(format!(
                "integrate: {} values for {} cells",
                values.len(),
                self.len()
            )));
        }
        let nt = self.nt();
        Ok(self
            .s
            .measures
            .iter()
            .enumerate()
            .map(|(i, ms)| {
                let row = &values[i * nt..(i + 1) * nt];
                ms * row
                    .iter()
                    .zip(&self.t.measures)
                    .map(|(v, mt)| v * mt)
                    .sum::<f64>()
            })
            .sum())
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor(format!(
            "s[{}] t[{}]",
            self.s.descriptor(),
            self.t.descriptor()
        ))
    }

    pub fn spec(&self) -> Option<CylSpec> {
        let s = self.s.spec?;
        let t = if self.t.is_point() {
            None
        } else {
            Some(self.t.spec?)
        };
        Some(CylSpec { s, t })
    }
}

/// Printable grid identity carried by reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridDescriptor(pub String);

impl fmt::Display for GridDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Analytic continuation `u(r) = amplitude · r^{-exponent}` beyond the s-grid's `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub amplitude: f64,
    pub exponent: f64,
}

impl PowerTail {
    pub fn value(&self, r: f64) -> f64 {
        self.amplitude * r.powf(-self.exponent)
    }
}

/// Nonnegative cell values of a function of `(|y|, |z|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<CylGrid>,
    values: Vec<f64>,
    tail: Option<PowerTail>,
}

impl GridFunction {
    pub fn new(grid: Arc<CylGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::usage(format!(
                "{} values for a grid with {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!(
                "grid functions must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(GridFunction {
            grid,
            values,
            tail: None,
        })
    }

    /// Samples `f(s, t)` at cell nodes.
    pub fn from_fn(grid: Arc<CylGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for &s in grid.s.nodes() {
            for &t in grid.t.nodes() {
                values.push(f(s, t));
            }
        }
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<CylGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        GridFunction {
            grid,
            values,
            tail: None,
        }
    }

    pub fn with_tail(mut self, tail: PowerTail) -> Result<Self> {
        if self.grid.m() != 0 {
            return Err(Error::usage(
                "power tails are only supported on radial (k = N) grids",
            ));
        }
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn grid(&self) -> &CylGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<CylGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tail(&self) -> Option<PowerTail> {
        self.tail
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// `c · u`; the tail amplitude scales along.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut out = GridFunction::new(
            self.grid.clone(),
            self.values.iter().map(|v| c * v).collect(),
        )?;
        out.tail = self.tail.map(|t| PowerTail {
            amplitude: c * t.amplitude,
            ..t
        });
        Ok(out)
    }

    /// Same grid, new values, no tail.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        GridFunction::new(self.grid.clone(), values)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Ghost value at `s = r_max` for the given t-column.
    pub(crate) fn s_ghost(&self, j: usize) -> f64 {
        match self.tail {
            Some(tail) => {
                let g = self.grid.s();
                let last = g.len() - 1;
                let ratio = (g.r_max() / g.nodes()[last]).powf(-tail.exponent);
                ratio * self.values[self.grid.index(last, j)]
            }
            None => 0.0,
        }
    }

    /// Writes `s,t,value,cell_measure` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["s", "t", "value", "cell_measure"])?;
        let measures = self.grid.cell_measures();
        for (i, s) in self.grid.s.nodes().iter().enumerate() {
            for (j, t) in self.grid.t.nodes().iter().enumerate() {
                let idx = self.grid.index(i, j);
                wtr.write_record([
                    s.to_string(),
                    t.to_string(),
                    self.values[idx].to_string(),
                    measures[idx].to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Per-cell gradient components `(∂_s u, ∂_t u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub ds: Vec<f64>,
    pub dt: Vec<f64>,
}

/// Centered differences at interior nodes; at `s = 0` the mirror ghost `u(-r_0) = u(r_0)`,
/// at `s = r_max` the Dirichlet (or tail) ghost value placed on the outer edge.
pub fn gradient(u: &GridFunction) -> Result<Gradient> {
    let grid = u.grid();
    let (ns, nt) = (grid.ns(), grid.nt());
    if ns < 2 {
        return Err(Error::usage("gradient along s needs at least two cells"));
    }
    if !grid.t().is_point() && nt < 2 {
        return Err(Error::usage("gradient along t needs at least two cells"));
    }
    let v = u.values();
    let mut ds = vec![0.0; grid.len()];
    let mut dt = vec![0.0; grid.len()];

    let sn = grid.s().nodes();
    let s_max = grid.s().r_max();
    for j in 0..nt {
        for i in 0..ns {
            let idx = grid.index(i, j);
            ds[idx] = if i == 0 {
                (v[grid.index(1, j)] - v[idx]) / (sn[1] + sn[0])
            } else if i == ns - 1 {
                (u.s_ghost(j) - v[grid.index(i - 1, j)]) / (s_max - sn[i - 1])
            } else {
                (v[grid.index(i + 1, j)] - v[grid.index(i - 1, j)]) / (sn[i + 1] - sn[i - 1])
            };
        }
    }
    if !grid.t().is_point() {
        let tn = grid.t().nodes();
        let t_max = grid.t().r_max();
        for i in 0..ns {
            for j in 0..nt {
                let idx = grid.index(i, j);
                dt[idx] = if j == 0 {
                    (v[idx + 1] - v[idx]) / (tn[1] + tn[0])
                } else if j == nt - 1 {
                    -v[idx - 1] / (t_max - tn[j - 1])
                } else {
                    (v[idx + 1] - v[idx - 1]) / (tn[j + 1] - tn[j - 1])
                };
            }
        }
    }
    Ok(Gradient { ds, dt })
}

/// Which gradient components enter `|∇u|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Components {
    Full,
    SOnly,
    TOnly,
}

/// One-dimensional face differences along a line of cells.
///
/// Face `f` sits between cells `f` and `f + 1`; the last face connects the outer cell to the
/// ghost value on the truncation edge. There is no face at the origin (Neumann).
pub(crate) struct FaceLine {
    /// `1 / (x_{f+1} - x_f)` per face, the last entry for the ghost face.
    pub inv_h: Vec<f64>,
}

impl FaceLine {
    pub fn new(grid: &RadialGrid) -> Self {
        let n = grid.nodes();
        let mut inv_h: Vec<f64> = n.windows(2).map(|w| 1.0 / (w[1] - w[0])).collect();
        inv_h.push(1.0 / (grid.r_max() - n[n.len() - 1]));
        FaceLine { inv_h }
    }
}

/// Cell values of the squared gradient norm built from face differences:
/// `|∇u|²_ij = ½ Σ_{s-faces of ij} D_s² + ½ Σ_{t-faces of ij} D_t²`.
///
/// Unlike the centered [`gradient`], this form has no odd-even null space, so the
/// energies built from it are coercive.
pub fn squared_gradient(u: &GridFunction, components: Components) -> Vec<f64> {
    let grid = u.grid();
    let (ns, nt) = (grid.ns(), grid.nt());
    let v = u.values();
    let mut g2 = vec![0.0; grid.len()];

    if components != Components::TOnly {
        let faces = FaceLine::new(grid.s());
        for j in 0..nt {
            let mut prev = 0.0;
            for i in 0..ns {
                let here = v[grid.index(i, j)];
                let next = if i + 1 < ns {
                    v[grid.index(i + 1, j)]
                } else {
                    u.s_ghost(j)
                };
                let d = (next - here) * faces.inv_h[i];
                let sq = d * d;
                g2[grid.index(i, j)] += 0.5 * (prev + sq);
                prev = sq;
            }
        }
    }
    if components != Components::SOnly && !grid.t().is_point() {
        let faces = FaceLine::new(grid.t());
        for i in 0..ns {
            let row = &v[i * nt..(i + 1) * nt];
            let mut prev = 0.0;
            for j in 0..nt {
                let next = if j + 1 < nt { row[j + 1] } else { 0.0 };
                let d = (next - row[j]) * faces.inv_h[j];
                let sq = d * d;
                g2[i * nt + j] += 0.5 * (prev + sq);
                prev = sq;
            }
        }
    }
    g2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn radial(d: usize, r_max: f64, n: usize, grading: Grading) -> RadialGrid {
        RadialGrid::new(d, r_max, n, grading).unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1).unwrap(), 2.0);
        assert_relative_eq!(sphere_area(2).unwrap(), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3).unwrap(), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(4).unwrap(), 2.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(
            sphere_area(5).unwrap(),
            8.0 * PI * PI / 3.0,
            max_relative = 1e-15
        );
        assert!(matches!(sphere_area(0), Err(Error::Domain(_))));
    }

    #[test]
    fn small_grids() {
        let g = radial(1, 1.0, 2, Grading::Uniform);
        assert_eq!(g.edges(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.measures(), &[1.0, 1.0]);

        let ball = radial(3, 1.0, 1, Grading::Uniform);
        assert_relative_eq!(ball.measures()[0], 4.0 * PI / 3.0, max_relative = 1e-15);

        let disk = radial(2, 2.0, 2, Grading::Uniform);
        assert_relative_eq!(disk.measures()[0], PI, max_relative = 1e-15);
        assert_relative_eq!(disk.measures()[1], 3.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn gradings_cover_the_interval() {
        let gradings = [
            Grading::Uniform,
            Grading::Geometric { ratio: 1.05 },
            Grading::Split { r_break: 1.0 },
            Grading::EqualMeasure,
        ];
        for d in 1..=4 {
            for grading in gradings {
                let g = radial(d, 7.5, 40, grading);
                assert_eq!(g.edges()[0], 0.0);
                assert_relative_eq!(g.r_max(), 7.5, max_relative = 1e-14);
                let ball = sphere_area(d).unwrap() * 7.5f64.powi(d as i32) / d as f64;
                assert_relative_eq!(g.total_measure(), ball, max_relative = 1e-12);
                for (i, node) in g.nodes().iter().enumerate() {
                    assert!(g.edges()[i] < *node && *node < g.edges()[i + 1]);
                    assert!(g.measures()[i] > 0.0);
                }
            }
        }
        assert!(radial(2, 3.0, 16, Grading::EqualMeasure).is_equal_measure(1e-12));
    }

    #[test]
    fn bad_gradings_are_configuration_errors() {
        assert!(matches!(
            RadialGrid::new(2, 1.0, 4, Grading::Geometric { ratio: 0.5 }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RadialGrid::new(2, 1.0, 4, Grading::Split { r_break: 2.0 }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RadialGrid::new(2, -1.0, 4, Grading::Uniform),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RadialGrid::new(0, 1.0, 4, Grading::Uniform),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn integrate_examples() {
        let ball = radial(3, 1.0, 50, Grading::Uniform);
        assert_relative_eq!(
            ball.integrate(&vec![1.0; 50]).unwrap(),
            4.0 * PI / 3.0,
            max_relative = 1e-12
        );
        assert_eq!(ball.integrate(&vec![0.0; 50]).unwrap(), 0.0);
        assert!(matches!(ball.integrate(&[1.0; 3]), Err(Error::Usage(_))));

        let line = radial(1, 1.0, 1000, Grading::Uniform);
        let vals: Vec<f64> = line.nodes().to_vec();
        // midpoint rule is exact for linear integrands
        assert_relative_eq!(line.integrate(&vals).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn weight_average_is_exact_for_powers() {
        for grading in [
            Grading::Uniform,
            Grading::Geometric { ratio: 1.2 },
            Grading::Split { r_break: 0.3 },
        ] {
            let g = radial(3, 2.0, 25, grading);
            for a in [0.0, 1.0, 2.0, -1.0, -2.5] {
                let w = g.weight_average(a).unwrap();
                let total = g.integrate(&w).unwrap();
                let exact = 4.0 * PI * 2.0f64.powf(a + 3.0) / (a + 3.0);
                assert_relative_eq!(total, exact, max_relative = 1e-10);
            }
        }
        assert!(matches!(
            radial(2, 1.0, 4, Grading::Uniform).weight_average(-2.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn merging_preserves_measure() {
        let g = radial(2, 3.0, 10, Grading::Geometric { ratio: 1.3 });
        let merged = g.merge_cells(4).unwrap();
        assert_eq!(merged.len(), 9);
        assert_eq!(merged.total_measure(), g.measures().iter().sum::<f64>());
        let closed = 2.0 * PI * (g.edges()[6].powi(2) - g.edges()[4].powi(2)) / 2.0;
        assert_relative_eq!(merged.measures()[4], closed, max_relative = 1e-14);
        assert!(g.merge_cells(9).is_err());
    }

    #[test]
    fn centered_gradient_examples() {
        let grid = Arc::new(CylGrid::radial(radial(1, 1.0, 100, Grading::Uniform)).unwrap());
        let c = GridFunction::from_fn(grid.clone(), |_, _| 3.0).unwrap();
        let g = gradient(&c).unwrap();
        // the Dirichlet ghost only touches the last cell
        assert!(g.ds[..99].iter().all(|d| *d == 0.0));

        let lin = GridFunction::from_fn(grid.clone(), |s, _| s).unwrap();
        let g = gradient(&lin).unwrap();
        for d in &g.ds[1..99] {
            assert!((d - 1.0).abs() < 1e-12);
        }

        let quad = GridFunction::from_fn(grid.clone(), |s, _| s * s).unwrap();
        let g = gradient(&quad).unwrap();
        let nodes = grid.s().nodes();
        let err = (1..99)
            .map(|i| (g.ds[i] - 2.0 * nodes[i]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "max interior error {err}");
    }

    #[test]
    fn gradient_needs_two_cells() {
        let grid = Arc::new(CylGrid::radial(radial(3, 1.0, 1, Grading::Uniform)).unwrap());
        let u = GridFunction::from_fn(grid, |_, _| 1.0).unwrap();
        assert!(matches!(gradient(&u), Err(Error::Usage(_))));
    }

    #[test]
    fn degenerate_t_grid_integrates_as_identity() {
        let s = radial(3, 1.0, 20, Grading::Uniform);
        let cyl = CylGrid::radial(s.clone()).unwrap();
        assert_eq!(cyl.m(), 0);
        assert_eq!(cyl.nt(), 1);
        let vals: Vec<f64> = s.nodes().iter().map(|r| r * r).collect();
        assert_eq!(cyl.integrate(&vals).unwrap(), s.integrate(&vals).unwrap());
    }

    #[test]
    fn face_gradient_is_exact_for_linear_profiles() {
        let grid = Arc::new(
            CylGrid::new(
                radial(2, 1.0, 30, Grading::Uniform),
                Some(radial(2, 1.0, 30, Grading::Uniform)),
            )
            .unwrap(),
        );
        let u = GridFunction::from_fn(grid.clone(), |s, t| 2.0 - s - 0.5 * t).unwrap();
        let g2 = squared_gradient(&u, Components::Full);
        // interior cells in both directions see both faces
        for i in 1..29 {
            for j in 1..29 {
                assert_relative_eq!(g2[grid.index(i, j)], 1.25, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn negative_values_rejected() {
        let grid = Arc::new(CylGrid::radial(radial(1, 1.0, 2, Grading::Uniform)).unwrap());
        assert!(matches!(
            GridFunction::new(grid.clone(), vec![1.0, -1.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            GridFunction::new(grid, vec![1.0]),
            Err(Error::Usage(_))
        ));
    }
}
