use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{refined, GridConfig, InitKind, Shape};
use super::suite::{random_bumps, run_suite, shifted_bump};
use super::{Experiment, ExperimentConfig, Format};
use crate::error::{Error, Result};
use crate::grid::{CylGrid, Grading};
use crate::minimizer::{
    hardy_endpoint_sweep, minimize_hs, symmetrize_and_compare, EndpointFamily, Init,
};
use crate::rearrange::double_star;
use crate::sharp_constant::{eps_sweep, hardy_constant, split_infimum_demo, SplitResolution};

/// Version of every JSON document written by the runner.
pub const SCHEMA_VERSION: u32 = 1;

/// One line of console output: what was expected, what came out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub label: String,
    pub target: Option<f64>,
    pub achieved: f64,
}

impl Summary {
    pub fn relative_gap(&self) -> Option<f64> {
        self.target
            .filter(|t| *t != 0.0)
            .map(|t| (self.achieved - t) / t)
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: achieved {}",
            self.experiment, self.label, self.achieved
        )?;
        match (self.target, self.relative_gap()) {
            (Some(t), Some(g)) => write!(f, ", target {t}, relative gap {g:+.3e}"),
            (Some(t), None) => write!(f, ", target {t}"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub summaries: Vec<Summary>,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    experiment: &'a str,
    data: &'a T,
}

struct Sink<'a> {
    dir: &'a Path,
    mode: Experiment,
    outcome: RunOutcome,
}

impl<'a> Sink<'a> {
    fn open(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path)?;
        self.outcome.artifacts.push(path);
        Ok(BufWriter::new(file))
    }

    fn json<T: Serialize>(&mut self, name: &str, data: &T) -> Result<()> {
        let mut w = self.open(name)?;
        serde_json::to_writer_pretty(
            &mut w,
            &Envelope {
                schema_version: SCHEMA_VERSION,
                experiment: self.mode.name(),
                data,
            },
        )?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(self.open(name)?);
        for row in rows {
            wtr.serialize(row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Writes a table in the configured format under `stem`.
    fn table<T: Serialize>(&mut self, format: Format, stem: &str, rows: &[T]) -> Result<()> {
        match format {
            Format::Csv => self.csv(&format!("{stem}.csv"), rows),
            Format::Json => self.json(&format!("{stem}.json"), &rows),
        }
    }

    fn summary(&mut self, label: impl Into<String>, target: Option<f64>, achieved: f64) {
        self.outcome.summaries.push(Summary {
            experiment: self.mode.name().into(),
            label: label.into(),
            target,
            achieved,
        });
    }
}

/// Runs one experiment and writes its artifacts into `config.out`, which must exist.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mode = config.mode;
    if !config.out.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("output directory {} does not exist", config.out.display()),
        )));
    }
    let mut sink = Sink {
        dir: &config.out,
        mode,
        outcome: RunOutcome::default(),
    };
    match mode {
        Experiment::Constant => constant(config, &mut sink)?,
        Experiment::EpsSweep => eps(config, &mut sink)?,
        Experiment::ProductSweep => product(config, &mut sink)?,
        Experiment::Symmetrize => symmetrize(config, &mut sink)?,
        Experiment::Minimize => minimize(config, &mut sink)?,
        Experiment::SplitDemo => split(config, &mut sink)?,
        Experiment::Properties => properties(config, &mut sink)?,
    }
    Ok(sink.outcome)
}

#[derive(Serialize)]
struct ConstantRow {
    p: f64,
    alpha: f64,
    k: usize,
    constant: f64,
}

fn constant(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let params = config.params.hardy(config.mode)?;
    let c = hardy_constant(params.p, params.alpha, params.k)?;
    sink.table(
        config.format,
        "constant",
        &[ConstantRow {
            p: params.p,
            alpha: params.alpha,
            k: params.k,
            constant: c,
        }],
    )?;
    sink.summary(
        format!(
            "p^p/(α+k)^p at p={}, α={}, k={}",
            params.p, params.alpha, params.k
        ),
        None,
        c,
    );
    Ok(())
}

fn s_grid(config: &ExperimentConfig, fallback: GridConfig) -> GridConfig {
    config.grid.clone().unwrap_or(fallback)
}

fn eps(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let params = config.params.hardy(config.mode)?;
    let ladder = config
        .eps
        .clone()
        .unwrap_or_else(|| vec![1.0, 0.5, 0.1, 0.05, 0.01, 1e-3]);
    if ladder.is_empty() {
        return Err(Error::config("the ε ladder is empty"));
    }
    let grid = s_grid(
        config,
        GridConfig::new(1000.0, 4096, Grading::Split { r_break: 1.0 }),
    )
    .build(params.n, config.refine)?;
    let rows = eps_sweep(&params, &grid, &ladder)?;
    sink.table(config.format, "eps_sweep", &rows)?;
    let last = rows.last().expect("ladder is nonempty");
    sink.summary(
        format!("Hardy quotient at ε={}", last.eps),
        Some(params.hardy_target()),
        last.quotient,
    );
    Ok(())
}

fn product(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let params = config.params.hardy_sobolev(config.mode)?;
    let defaults = EndpointFamily::default();
    let family = EndpointFamily {
        eps: config.eps.clone().unwrap_or(defaults.eps),
        lambda: config.lambda.clone().unwrap_or(defaults.lambda),
        taper_a: config.taper.0,
        taper_b: config.taper.1,
        n_s: refined(config.endpoint_cells.0, config.refine)?,
        n_t: refined(config.endpoint_cells.1, config.refine)?,
    };
    let rows = hardy_endpoint_sweep(&params, &family)?;
    sink.table(config.format, "product_sweep", &rows)?;
    let best = rows
        .iter()
        .min_by(|a, b| a.quotient.total_cmp(&b.quotient))
        .expect("ladder is nonempty");
    sink.summary(
        format!("best quotient (ε={}, λ={})", best.eps, best.lambda),
        Some(best.target),
        best.quotient,
    );
    Ok(())
}

fn cyl_grid(
    config: &ExperimentConfig,
    k: usize,
    m: usize,
    fallback: GridConfig,
) -> Result<Arc<CylGrid>> {
    let s = s_grid(config, fallback.clone()).build(k, config.refine)?;
    let t = (m > 0)
        .then(|| {
            config
                .t_grid
                .clone()
                .or_else(|| config.grid.clone())
                .unwrap_or(fallback)
                .build(m, config.refine)
        })
        .transpose()?;
    Ok(Arc::new(CylGrid::new(s, t)?))
}

fn symmetrize(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let params = config.params.hardy_sobolev(config.mode)?;
    let grid = cyl_grid(
        config,
        params.k,
        params.m(),
        GridConfig::new(4.0, 64, Grading::EqualMeasure),
    )?;
    let sc = &config.symmetrize;
    let u = match sc.shape {
        Shape::ShiftedBump => shifted_bump(grid, sc.s0, sc.t0, sc.width)?,
        Shape::RandomBumps => random_bumps(grid, &mut ChaCha8Rng::seed_from_u64(config.seed))?,
    };
    let report = symmetrize_and_compare(&u, &params)?;
    u.write_csv(sink.open("symmetrize_before.csv")?)?;
    double_star(&u)?.write_csv(sink.open("symmetrize_after.csv")?)?;
    sink.table(config.format, "symmetrize", &[report])?;
    sink.summary(
        "quotient of u★★ against u",
        Some(report.quotient_before),
        report.quotient_after,
    );
    Ok(())
}

#[derive(Serialize)]
struct MinimizeRow {
    seed: u64,
    quotient: f64,
    iterations: usize,
    converged: bool,
    stop_reason: String,
    t_argmax: f64,
}

fn minimize(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let params = config.params.hardy_sobolev(config.mode)?;
    let grid = cyl_grid(
        config,
        params.k,
        params.m(),
        GridConfig::new(6.0, 64, Grading::Uniform),
    )?;
    let ic = &config.init;
    if ic.count == 0 {
        return Err(Error::config("init.count must be at least 1"));
    }
    let mut rows = Vec::with_capacity(ic.count);
    for i in 0..ic.count as u64 {
        let seed = config.seed + i;
        let init = match ic.kind {
            InitKind::Bump => Init::Bump,
            InitKind::Perturbed => Init::Perturbed {
                seed,
                amplitude: ic.amplitude,
            },
        };
        let trace = minimize_hs(&params, grid.clone(), &init, &config.descent)?;
        sink.json(&format!("minimize_trace_{seed}.json"), &trace)?;
        trace
            .final_u
            .write_csv(sink.open(&format!("minimize_final_{seed}.csv"))?)?;
        rows.push(MinimizeRow {
            seed,
            quotient: trace.quotient,
            iterations: trace.iterations.len() - 1,
            converged: trace.converged,
            stop_reason: serde_json::to_value(trace.stop_reason)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
            t_argmax: trace.t_argmax,
        });
    }
    sink.table(config.format, "minimize", &rows)?;
    let lo = rows
        .iter()
        .map(|r| r.quotient)
        .fold(f64::INFINITY, f64::min);
    let hi = rows
        .iter()
        .map(|r| r.quotient)
        .fold(f64::NEG_INFINITY, f64::max);
    sink.summary(
        format!(
            "discrete S over {} init(s), spread {:.3e}",
            rows.len(),
            (hi - lo) / lo
        ),
        None,
        lo,
    );
    Ok(())
}

/// First eigenvalue of the one-dimensional `p`-Laplacian on an interval of the given width.
fn interval_eigenvalue(p: f64, width: f64) -> f64 {
    let pi_p = 2.0 * std::f64::consts::PI / (p * (std::f64::consts::PI / p).sin());
    (p - 1.0) * (pi_p / width).powf(p)
}

fn split(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let p = config.params.p_or_default(config.mode);
    let sc = &config.split;
    let lambdas = config
        .lambda
        .clone()
        .unwrap_or_else(|| vec![1.0, 4.0, 16.0, 64.0]);
    let resolution = SplitResolution {
        n_omega: refined(sc.n_omega, config.refine)?,
        n_z: refined(sc.n_z, config.refine)?,
    };
    let demo = split_infimum_demo(p, sc.width, &lambdas, resolution)?;
    sink.table(config.format, "split_demo", &demo.rows)?;
    let last = demo.rows.last().expect("ladder is nonempty");
    sink.summary(
        format!("quotient at λ={}", last.lambda),
        Some(interval_eigenvalue(p, sc.width)),
        last.quotient,
    );
    Ok(())
}

#[derive(Serialize)]
struct PropertyRow<'a> {
    name: &'a str,
    trials: usize,
    violations: usize,
    max_violation: f64,
}

fn properties(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let params = config.params.hardy_sobolev(config.mode)?;
    let mut pc = config.properties.clone();
    pc.n = refined(pc.n, config.refine)?;
    let report = run_suite(&params, &pc, config.seed)?;
    match config.format {
        Format::Json => sink.json("properties.json", &report)?,
        Format::Csv => {
            let rows: Vec<PropertyRow> = report
                .properties
                .iter()
                .map(|r| PropertyRow {
                    name: &r.name,
                    trials: r.trials,
                    violations: r.violations,
                    max_violation: r.max_violation,
                })
                .collect();
            sink.csv("properties.csv", &rows)?;
            sink.csv("polya_szego.csv", &report.polya_szego)?;
        }
    }
    let violations: usize = report.properties.iter().map(|r| r.violations).sum();
    sink.summary(
        "violations across the property suite",
        Some(0.0),
        violations as f64,
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_laplacian_eigenvalue_reduces_to_pi_squared() {
        assert!((interval_eigenvalue(2.0, 1.0) - std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn summary_line_reports_gap() {
        let s = Summary {
            experiment: "x".into(),
            label: "y".into(),
            target: Some(2.0),
            achieved: 2.02,
        };
        assert!(s.to_string().contains("relative gap +1.000e-2"));
    }
}
