//! Named experiments producing time series files and pass/fail summaries.
//!
//! Each `cmd_*` function computes a table, checks the headline numbers and
//! writes the table as CSV or JSON. Files are written to a temporary path
//! first and renamed, so a failed run leaves nothing behind.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::dynamics::EvolutionKind;
use crate::error::{Error, Result};
use crate::observables::{
    diffusion_rate_for_threshold, gamma_global_diffusion, gamma_global_diffusion_quadrature,
    gamma_reduced_diffusion, gamma_reduced_diffusion_quadrature, marginal_purity, negativity,
    quantum_purity, PurityMethod,
};
use crate::params::{Params, RawParams};
use crate::potentials::QuadraticPotential;
use crate::potentials::{dv_fit, dv_newton, dv_taylor, v_fit, v_newton, v_taylor};
use crate::quadrature::{init_threads_from_env, QuadratureConfig};
use crate::trajectory::{
    exact_relative_trajectory, quadratic_relative_trajectory, stepwise_relative_trajectory,
    RelativeSample,
};
use crate::wigner::BranchSet;

/// The interrogation time singled out in every time grid (s).
pub const PROPOSED_TIME: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

/// Where a target value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// An externally quoted reference value.
    Reference,
    /// Computed independently from other results.
    Derived,
    /// Holds by construction.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    Within { target: f64, tolerance: f64 },
    InRange { low: f64, high: f64 },
    Below { limit: f64 },
    AtLeast { limit: f64 },
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub check: Check,
    pub basis: Basis,
    pub pass: bool,
}

impl Metric {
    fn new(name: impl Into<String>, value: f64, check: Check, basis: Basis) -> Self {
        let pass = value.is_finite()
            && match check {
                Check::Within { target, tolerance } => (value - target).abs() <= tolerance,
                Check::InRange { low, high } => (low..=high).contains(&value),
                Check::Below { limit } => value < limit,
                Check::AtLeast { limit } => value >= limit,
                Check::Holds => value != 0.0,
            };
        Self {
            name: name.into(),
            value,
            check,
            basis,
            pass,
        }
    }

    pub fn within(
        name: impl Into<String>,
        value: f64,
        target: f64,
        tolerance: f64,
        basis: Basis,
    ) -> Self {
        Self::new(name, value, Check::Within { target, tolerance }, basis)
    }

    pub fn in_range(
        name: impl Into<String>,
        value: f64,
        low: f64,
        high: f64,
        basis: Basis,
    ) -> Self {
        Self::new(name, value, Check::InRange { low, high }, basis)
    }

    pub fn below(name: impl Into<String>, value: f64, limit: f64, basis: Basis) -> Self {
        Self::new(name, value, Check::Below { limit }, basis)
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64, basis: Basis) -> Self {
        Self::new(name, value, Check::AtLeast { limit }, basis)
    }

    pub fn holds(name: impl Into<String>, ok: bool, basis: Basis) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Check::Holds, basis)
    }

    fn describe(&self) -> String {
        match self.check {
            Check::Within { target, tolerance } => format!("{target} ± {tolerance}"),
            Check::InRange { low, high } => format!("in [{low}, {high}]"),
            Check::Below { limit } => format!("< {limit}"),
            Check::AtLeast { limit } => format!(">= {limit}"),
            Check::Holds => "holds".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: RawParams,
    pub metrics: Vec<Metric>,
    /// Row index of the proposed time in the table, when sampled.
    pub marked_row: Option<usize>,
    pub outputs: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.metrics.iter().all(|m| m.pass)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}:\n", self.experiment);
        for m in &self.metrics {
            let _ = writeln!(
                s,
                "  [{}] {} = {:.6e} (expected {}, {:?})",
                if m.pass { "pass" } else { "FAIL" },
                m.name,
                m.value,
                m.describe(),
                m.basis
            );
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A numeric table with unit-annotated column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Fixed 17-significant-digit rendering.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        // avoid "-0"
        "0.0000000000000000e0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, metadata: Value) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.clone(), json!(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "metadata": metadata, "rows": rows }))?;
        s.push('\n');
        Ok(s)
    }
}

/// Options shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonArgs {
    pub params_file: Option<PathBuf>,
    /// `None` writes the table to standard output.
    pub output: Option<PathBuf>,
    pub format: Format,
    pub quadrature: QuadratureConfig,
}

impl Default for CommonArgs {
    fn default() -> Self {
        Self {
            params_file: None,
            output: None,
            format: Format::Csv,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl CommonArgs {
    pub fn params(&self) -> Result<Params> {
        let raw = match &self.params_file {
            Some(path) => RawParams::from_file(path)?,
            None => RawParams::default(),
        };
        Params::derive(raw)
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Sibling path holding the JSON report next to a table file.
pub fn summary_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

fn emit(
    experiment: &str,
    table: &Table,
    metrics: Vec<Metric>,
    params: &Params,
    common: &CommonArgs,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport {
        experiment: experiment.to_string(),
        params: params.raw(),
        metrics,
        marked_row: table
            .column("t_s")
            .and_then(|t| index_of(&t, PROPOSED_TIME)),
        outputs: Vec::new(),
    };
    let body = match common.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(json!({
            "experiment": experiment,
            "params": params.raw(),
            "quadrature": common.quadrature,
            "marked_row": report.marked_row,
        }))?,
    };
    match &common.output {
        Some(path) => {
            let summary = summary_path(path);
            report.outputs = vec![path.clone(), summary.clone()];
            write_atomic(path, &body)?;
            if let Err(e) = write_atomic(&summary, &report.to_json()?) {
                let _ = fs::remove_file(path);
                return Err(e);
            }
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(report)
}

/// Uniform closed grid on `[0, t_max]` with `steps` points, plus the
/// proposed time when it falls strictly inside and is not already a node.
pub fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t-max must be non-negative, got {t_max}"
        )));
    }
    if t_max == 0.0 {
        return Ok(vec![0.0]);
    }
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 steps, got {steps}"
        )));
    }
    let mut grid: Vec<f64> = (0..steps)
        .map(|i| t_max * i as f64 / (steps - 1) as f64)
        .collect();
    let tol = 1e-12 * t_max;
    if PROPOSED_TIME < t_max {
        match grid.iter().position(|t| (t - PROPOSED_TIME).abs() <= tol) {
            Some(i) => grid[i] = PROPOSED_TIME,
            None => {
                let at = grid.partition_point(|t| *t < PROPOSED_TIME);
                grid.insert(at, PROPOSED_TIME);
            }
        }
    } else if (t_max - PROPOSED_TIME).abs() <= tol {
        *grid.last_mut().expect("non-empty") = PROPOSED_TIME;
    }
    Ok(grid)
}

fn index_of(grid: &[f64], t: f64) -> Option<usize> {
    grid.iter().position(|s| *s == t)
}

// ---------------------------------------------------------------- purity

#[derive(Debug, Clone, PartialEq)]
pub struct PurityCurveArgs {
    pub common: CommonArgs,
    pub t_max: f64,
    pub steps: usize,
    pub kinds: Vec<EvolutionKind>,
    pub method: PurityMethod,
}

impl Default for PurityCurveArgs {
    fn default() -> Self {
        Self {
            common: CommonArgs::default(),
            t_max: 10.0,
            steps: 101,
            kinds: vec![
                EvolutionKind::QuantumReference,
                EvolutionKind::Taylor,
                EvolutionKind::Fit,
            ],
            method: PurityMethod::GaussianAnalytic,
        }
    }
}

/// Purity of the particle-2 marginal against time.
pub fn cmd_purity_curve(args: &PurityCurveArgs) -> Result<ExperimentReport> {
    init_threads_from_env();
    let params = args.common.params()?;
    let grid = time_grid(args.t_max, args.steps)?;
    let mut kinds = Vec::new();
    for kind in [
        EvolutionKind::QuantumReference,
        EvolutionKind::Taylor,
        EvolutionKind::Fit,
    ] {
        if args.kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    if kinds.is_empty() || args.kinds.iter().any(|k| !kinds.contains(k)) {
        return Err(Error::InvalidArgument(
            "kinds must be a non-empty subset of qt, taylor, fit".into(),
        ));
    }
    let mut columns = vec!["t_s".to_string()];
    columns.extend(kinds.iter().map(|k| format!("gamma_{}", k.label())));
    let cfg = args.common.quadrature;
    let values: Vec<Vec<f64>> = kinds
        .iter()
        .map(|&kind| match kind {
            EvolutionKind::QuantumReference => {
                Ok(grid.iter().map(|&t| quantum_purity(t, &params)).collect())
            }
            _ => grid
                .par_iter()
                .map(|&t| marginal_purity(kind, t, &params, args.method, &cfg))
                .collect::<Result<Vec<f64>>>(),
        })
        .collect::<Result<_>>()?;
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for (i, &t) in grid.iter().enumerate() {
        let mut row = vec![t];
        row.extend(values.iter().map(|v| v[i]));
        table.push(row);
    }

    let series = |kind: EvolutionKind| kinds.iter().position(|k| *k == kind).map(|i| &values[i]);
    let mut metrics = Vec::new();
    for (k, v) in kinds.iter().zip(&values) {
        metrics.push(Metric::within(
            format!("gamma_{}(0)", k.label()),
            v[0],
            1.0,
            1e-6,
            Basis::Trivial,
        ));
        if let Some(m) = v.iter().copied().reduce(f64::max) {
            metrics.push(Metric::below(
                format!("max gamma_{}", k.label()),
                m,
                1.0 + 1e-6,
                Basis::Trivial,
            ));
        }
    }
    let at = index_of(&grid, PROPOSED_TIME);
    if let (Some(i), Some(qt)) = (at, series(EvolutionKind::QuantumReference)) {
        metrics.push(Metric::within(
            "gamma_qt(2.5 s)",
            qt[i],
            0.9878,
            1e-3,
            Basis::Derived,
        ));
        if let Some(fit) = series(EvolutionKind::Fit) {
            metrics.push(Metric::below(
                "|gamma_fit - gamma_qt|(2.5 s)",
                (fit[i] - qt[i]).abs(),
                5e-3,
                Basis::Reference,
            ));
        }
    }
    if let (Some(qt), Some(fit)) = (
        series(EvolutionKind::QuantumReference),
        series(EvolutionKind::Fit),
    ) {
        let dev = grid
            .iter()
            .zip(qt.iter().zip(fit))
            .filter(|(t, _)| **t <= 10.0 + 1e-12)
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max);
        metrics.push(Metric::below(
            "max |gamma_fit - gamma_qt| for t <= 10 s",
            dev,
            5e-3 + 1e-15,
            Basis::Reference,
        ));
        if let (Some(i), Some(tay)) = (index_of(&grid, 10.0), series(EvolutionKind::Taylor)) {
            let ratio = (tay[i] - qt[i]).abs() / (fit[i] - qt[i]).abs();
            metrics.push(Metric::at_least(
                "taylor / fit deviation ratio at 10 s",
                ratio,
                5.0,
                Basis::Reference,
            ));
        }
    }
    emit("purity-curve", &table, metrics, &params, &args.common)
}

// ------------------------------------------------------------ negativity

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityArgs {
    pub common: CommonArgs,
    pub t_max: f64,
    pub steps: usize,
    /// `D t` at the proposed time in units of `0.25 (hbar / delta_x)^2`.
    pub d_over_threshold: f64,
}

impl Default for NegativityArgs {
    fn default() -> Self {
        Self {
            common: CommonArgs::default(),
            t_max: 2.5,
            steps: 11,
            d_over_threshold: 1.0,
        }
    }
}

/// Momentum-marginal negativity with and without diffusion.
pub fn cmd_negativity(args: &NegativityArgs) -> Result<ExperimentReport> {
    init_threads_from_env();
    if !(args.d_over_threshold >= 0.0 && args.d_over_threshold.is_finite()) {
        return Err(Error::InvalidArgument(
            "d-over-threshold must be non-negative".into(),
        ));
    }
    let params = args.common.params()?;
    let grid = time_grid(args.t_max, args.steps)?;
    let rate = diffusion_rate_for_threshold(args.d_over_threshold, PROPOSED_TIME, &params);
    let diffusion = EvolutionKind::stepwise_diffusion(rate)?;
    let cfg = args.common.quadrature;
    let rows: Vec<(f64, f64)> = grid
        .iter()
        .map(|&t| {
            Ok((
                negativity(EvolutionKind::Stepwise, t, &params, &cfg)?,
                negativity(diffusion, t, &params, &cfg)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["t_s", "nu_step", "nu_step_diffusion"]);
    for (t, (a, b)) in grid.iter().zip(&rows) {
        table.push(vec![*t, *a, *b]);
    }
    let mut metrics = vec![Metric::below(
        "nu_step(0)",
        rows[0].0.abs(),
        1e-9,
        Basis::Trivial,
    )];
    if let Some(i) = index_of(&grid, PROPOSED_TIME) {
        metrics.push(Metric::within(
            "nu_step(2.5 s)",
            rows[i].0,
            0.0017,
            3e-4,
            Basis::Reference,
        ));
        if args.d_over_threshold >= 1.0 {
            metrics.push(Metric::below(
                "nu_step_diffusion(2.5 s)",
                rows[i].1,
                2e-7,
                Basis::Reference,
            ));
        }
    }
    emit("negativity", &table, metrics, &params, &args.common)
}

// ------------------------------------------------------------- diffusion

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionArgs {
    pub common: CommonArgs,
    pub t_max: f64,
    pub steps: usize,
    pub d_over_threshold: f64,
    /// Also evaluate the brute-force quadrature values at the proposed time.
    pub oracle: bool,
}

impl Default for DiffusionArgs {
    fn default() -> Self {
        Self {
            common: CommonArgs::default(),
            t_max: 2.5,
            steps: 11,
            d_over_threshold: 1.0,
            oracle: false,
        }
    }
}

/// Global and reduced purity estimates of the diffusion model.
pub fn cmd_diffusion_purities(args: &DiffusionArgs) -> Result<ExperimentReport> {
    init_threads_from_env();
    if !(args.d_over_threshold >= 0.0 && args.d_over_threshold.is_finite()) {
        return Err(Error::InvalidArgument(
            "d-over-threshold must be non-negative".into(),
        ));
    }
    let params = args.common.params()?;
    let branches = BranchSet::new(&params);
    let grid = time_grid(args.t_max, args.steps)?;
    let rate = diffusion_rate_for_threshold(args.d_over_threshold, PROPOSED_TIME, &params);
    let mut table = Table::new(&["t_s", "gamma_global_d", "gamma_reduced_d"]);
    for &t in &grid {
        table.push(vec![
            t,
            gamma_global_diffusion(t, rate, &params, &branches),
            gamma_reduced_diffusion(t, rate, &params, &branches),
        ]);
    }
    let mut metrics = Vec::new();
    if let Some(i) = index_of(&grid, PROPOSED_TIME) {
        let (g, r) = (table.rows[i][1], table.rows[i][2]);
        if (args.d_over_threshold - 1.0).abs() < 1e-12 {
            metrics.push(Metric::within(
                "Gamma_D(2.5 s)",
                g,
                0.79,
                0.01,
                Basis::Reference,
            ));
            metrics.push(Metric::within(
                "gamma_D(2.5 s)",
                r,
                0.88,
                0.01,
                Basis::Reference,
            ));
            metrics.push(Metric::holds(
                "Gamma_D < gamma_D at 2.5 s",
                g < r,
                Basis::Reference,
            ));
        }
        if args.oracle {
            let cfg = args.common.quadrature;
            let go = gamma_global_diffusion_quadrature(PROPOSED_TIME, rate, &params, &cfg)?;
            let ro = gamma_reduced_diffusion_quadrature(PROPOSED_TIME, rate, &params, &cfg)?;
            metrics.push(Metric::below(
                "|Gamma_D - quadrature|(2.5 s)",
                (g - go).abs(),
                2e-2,
                Basis::Derived,
            ));
            metrics.push(Metric::below(
                "|gamma_D - quadrature|(2.5 s)",
                (r - ro).abs(),
                5e-2,
                Basis::Derived,
            ));
        }
    }
    emit("diffusion-purities", &table, metrics, &params, &args.common)
}

// ---------------------------------------------------------- trajectories

/// Starting points of the trajectory benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStart {
    /// Closest branch pair, two widths further in: separation `d - delta_x - 2 sigma`.
    Closest,
    /// Intermediate pair: separation `d - delta_x / 2 - 2 sigma`.
    Intermediate,
}

impl TrajectoryStart {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Closest => "closest",
            Self::Intermediate => "intermediate",
        }
    }

    /// `(x_rel0, p_rel0, stepwise force)` in SI units.
    pub fn initial(&self, params: &Params) -> (f64, f64, f64) {
        let arm = match self {
            Self::Closest => params.delta_x,
            Self::Intermediate => params.delta_x / 2.0,
        };
        let x0 = -(arm + 2.0 * params.sigma) / SQRT_2;
        let p0 = -params.hbar / (SQRT_2 * params.sigma);
        let xbar = params.d - arm;
        (x0, p0, params.kappa / (xbar * xbar))
    }
}

/// Relative trajectories of the four models from one start.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub start: TrajectoryStart,
    pub newton: Vec<RelativeSample>,
    pub taylor: Vec<RelativeSample>,
    pub fit: Vec<RelativeSample>,
    pub step: Vec<RelativeSample>,
}

impl TrajectorySet {
    pub fn compute(start: TrajectoryStart, grid: &[f64], params: &Params) -> Result<Self> {
        let (x0, p0, force) = start.initial(params);
        Ok(Self {
            start,
            newton: exact_relative_trajectory(x0, p0, grid, params)?,
            taylor: quadratic_relative_trajectory(
                &QuadraticPotential::taylor(params),
                x0,
                p0,
                grid,
                params,
            )?,
            fit: quadratic_relative_trajectory(
                &QuadraticPotential::fit(params),
                x0,
                p0,
                grid,
                params,
            )?,
            step: stepwise_relative_trajectory(force, x0, p0, grid, params)?,
        })
    }

    pub fn models(&self) -> [(&'static str, &[RelativeSample]); 4] {
        [
            ("newton", &self.newton),
            ("taylor", &self.taylor),
            ("fit", &self.fit),
            ("step", &self.step),
        ]
    }

    /// Largest `|x_rel(t) - x_rel(0)|` over all models, in `sigma`.
    pub fn max_displacement(&self, params: &Params) -> f64 {
        self.models()
            .iter()
            .flat_map(|(_, s)| s.iter().map(|r| r.dx_rel.abs()))
            .fold(0.0, f64::max)
            / params.sigma
    }

    /// Largest `|p_model(t) - p_newton(t)|` in `hbar / delta_x`.
    pub fn max_momentum_deviation(&self, model: &[RelativeSample], params: &Params) -> f64 {
        model
            .iter()
            .zip(&self.newton)
            .map(|(a, b)| (a.dp_rel - b.dp_rel).abs())
            .fold(0.0, f64::max)
            / params.fringe_momentum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryArgs {
    pub common: CommonArgs,
    pub t_max: f64,
    pub steps: usize,
}

impl Default for TrajectoryArgs {
    fn default() -> Self {
        Self {
            common: CommonArgs::default(),
            t_max: 10.0,
            steps: 101,
        }
    }
}

/// Relative-coordinate trajectories under the exact and approximate
/// potentials for the two close branch starts.
pub fn cmd_trajectories(args: &TrajectoryArgs) -> Result<ExperimentReport> {
    init_threads_from_env();
    let params = args.common.params()?;
    let grid = time_grid(args.t_max, args.steps)?;
    let sets = [TrajectoryStart::Closest, TrajectoryStart::Intermediate]
        .iter()
        .map(|s| TrajectorySet::compute(*s, &grid, &params))
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec!["t_s".to_string()];
    for set in &sets {
        for (m, _) in set.models() {
            columns.push(format!("dx_{}_{m}_sigma", set.start.label()));
            columns.push(format!("dp_{}_{m}_hbar_per_dx", set.start.label()));
        }
    }
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    let pf = params.fringe_momentum();
    for (i, &t) in grid.iter().enumerate() {
        let mut row = vec![t];
        for set in &sets {
            for (_, s) in set.models() {
                row.push(s[i].dx_rel / params.sigma);
                row.push(s[i].dp_rel / pf);
            }
        }
        table.push(row);
    }
    let [closest, mid] = [&sets[0], &sets[1]];
    let taylor = mid.max_momentum_deviation(&mid.taylor, &params);
    let metrics = vec![
        Metric::below(
            "max |x_rel - x_rel(0)| closest start (sigma)",
            closest.max_displacement(&params),
            1e-8,
            Basis::Reference,
        ),
        Metric::in_range(
            "max |p_taylor - p_newton| (hbar/dx)",
            taylor,
            0.45,
            0.75,
            Basis::Reference,
        ),
        Metric::below(
            "max |p_fit - p_newton| (hbar/dx)",
            mid.max_momentum_deviation(&mid.fit, &params),
            taylor,
            Basis::Reference,
        ),
        Metric::below(
            "max |p_step - p_newton| (hbar/dx)",
            mid.max_momentum_deviation(&mid.step, &params),
            taylor,
            Basis::Reference,
        ),
    ];
    emit("trajectories", &table, metrics, &params, &args.common)
}

// ------------------------------------------------------------ potentials

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialsArgs {
    pub common: CommonArgs,
    /// Samples over `x_rel / delta_x` in `[-1, 1]`.
    pub points: usize,
}

impl Default for PotentialsArgs {
    fn default() -> Self {
        Self {
            common: CommonArgs::default(),
            points: 201,
        }
    }
}

/// Newtonian potential against its two quadratic approximations.
pub fn cmd_potentials(args: &PotentialsArgs) -> Result<ExperimentReport> {
    let params = args.common.params()?;
    if args.points < 3 || args.points.is_multiple_of(2) {
        return Err(Error::InvalidArgument(
            "points must be odd and at least 3".into(),
        ));
    }
    let (k, dx) = (params.kappa, params.delta_x);
    let v_unit = k / dx;
    let f_unit = k / (dx * dx);
    let mut table = Table::new(&[
        "x_rel_over_dx",
        "v_newton_kappa_per_dx",
        "v_taylor_kappa_per_dx",
        "v_fit_kappa_per_dx",
        "dv_newton_kappa_per_dx2",
        "dv_taylor_kappa_per_dx2",
        "dv_fit_kappa_per_dx2",
    ]);
    let n = args.points;
    for i in 0..n {
        let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        let x = s * dx;
        table.push(vec![
            s,
            v_newton(x, &params)? / v_unit,
            v_taylor(x, &params) / v_unit,
            v_fit(x, &params) / v_unit,
            dv_newton(x, &params)? / f_unit,
            dv_taylor(x, &params) / f_unit,
            dv_fit(x, &params) / f_unit,
        ]);
    }
    let mut gap: f64 = 0.0;
    for x in [0.0, dx / SQRT_2, -dx / SQRT_2] {
        gap = gap.max((v_fit(x, &params) - v_newton(x, &params)?).abs() / v_unit);
    }
    let a = dx / SQRT_2;
    let (mut et, mut ef) = (0.0f64, 0.0f64);
    for i in 0..=1000 {
        let x = -a + 2.0 * a * i as f64 / 1000.0;
        let exact = dv_newton(x, &params)?;
        et = et.max((dv_taylor(x, &params) - exact).abs());
        ef = ef.max((dv_fit(x, &params) - exact).abs());
    }
    let metrics = vec![
        Metric::below(
            "max |v_fit - v_newton| at the fit nodes (kappa/dx)",
            gap,
            1e-15,
            Basis::Trivial,
        ),
        Metric::holds(
            "fit derivative error below taylor",
            ef < et,
            Basis::Reference,
        ),
    ];
    emit("potentials", &table, metrics, &params, &args.common)
}
