//! Tensor-product quadrature on phase-space windows.
//!
//! Node evaluations run in parallel over the outermost axis; the partial sums
//! are then added in a fixed order so results do not depend on scheduling.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Once;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "WIGNER_GRAV_THREADS";

static POOL_INIT: Once = Once::new();

/// Configures the global thread pool from `WIGNER_GRAV_THREADS` on first
/// call. Later calls are no-ops.
pub fn init_threads_from_env() {
    POOL_INIT.call_once(|| {
        if let Some(n) = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            // fails only if a pool already exists, in which case keep it
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    #[default]
    GaussLegendre,
    Trapezoid,
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gauss-legendre" | "gauss_legendre" | "gl" | "gauss" => Ok(Self::GaussLegendre),
            "trapezoid" | "trap" => Ok(Self::Trapezoid),
            other => Err(Error::InvalidArgument(format!(
                "unknown quadrature rule `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GaussLegendre => "gauss-legendre",
            Self::Trapezoid => "trapezoid",
        })
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn trapezoid(n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 / (n - 1) as f64;
    let x = (0..n).map(|i| -1.0 + h * i as f64).collect();
    let mut w = vec![h; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    (x, w)
}

/// What an axis represents, for the resolution checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AxisKind {
    Generic,
    /// Position axis. `lobe_center` is the outermost lobe center the window
    /// has to cover.
    Position {
        lobe_center: f64,
    },
    /// Momentum axis; `fringe` marks axes that carry interference fringes.
    Momentum {
        fringe: bool,
    },
}

/// One axis of a tensor grid, internal units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub center: f64,
    pub half_width: f64,
    pub nodes: usize,
    pub kind: AxisKind,
}

impl Axis {
    pub fn generic(center: f64, half_width: f64, nodes: usize) -> Self {
        Self {
            center,
            half_width,
            nodes,
            kind: AxisKind::Generic,
        }
    }

    pub fn position(center: f64, half_width: f64, nodes: usize) -> Self {
        Self {
            center,
            half_width,
            nodes,
            kind: AxisKind::Position {
                lobe_center: center,
            },
        }
    }

    pub fn momentum(center: f64, half_width: f64, nodes: usize, fringe: bool) -> Self {
        Self {
            center,
            half_width,
            nodes,
            kind: AxisKind::Momentum { fringe },
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.nodes as f64
    }
}

/// Lower bounds on window sizes, internal units.
pub const MIN_NODES: usize = 8;
pub const MIN_POSITION_MARGIN: f64 = 6.0;
pub const MIN_MOMENTUM_HALF_WIDTH: f64 = 4.0;

/// Largest allowed mean node spacing on fringe axes for fringe wavenumber
/// `k` (internal units): sixteen nodes per period.
pub fn max_fringe_spacing(k: f64) -> f64 {
    PI / 8.0 / k
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub axes: Vec<Axis>,
    pub rule: Rule,
    /// Fringe wavenumber in internal momentum units (`delta_x / sigma`).
    pub fringe_wavenumber: f64,
}

impl QuadratureSpec {
    pub fn new(axes: Vec<Axis>, rule: Rule, fringe_wavenumber: f64) -> Self {
        Self {
            axes,
            rule,
            fringe_wavenumber,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.axes.iter().enumerate() {
            if a.nodes < MIN_NODES {
                return Err(Error::SpecViolation(format!(
                    "axis {i}: {} nodes, need at least {MIN_NODES}",
                    a.nodes
                )));
            }
            if !(a.half_width > 0.0 && a.half_width.is_finite() && a.center.is_finite()) {
                return Err(Error::SpecViolation(format!("axis {i}: bad window")));
            }
            match a.kind {
                AxisKind::Generic => {}
                AxisKind::Position { lobe_center } => {
                    let margin = a.half_width - (lobe_center - a.center).abs();
                    if margin < MIN_POSITION_MARGIN {
                        return Err(Error::SpecViolation(format!(
                            "axis {i}: position window leaves {margin} sigma beyond the lobe, need {MIN_POSITION_MARGIN}"
                        )));
                    }
                }
                AxisKind::Momentum { fringe } => {
                    if a.half_width < MIN_MOMENTUM_HALF_WIDTH {
                        return Err(Error::SpecViolation(format!(
                            "axis {i}: momentum half-width {} below {MIN_MOMENTUM_HALF_WIDTH}",
                            a.half_width
                        )));
                    }
                    let limit = max_fringe_spacing(self.fringe_wavenumber);
                    if fringe && a.spacing() > limit * (1.0 + 1e-12) {
                        return Err(Error::SpecViolation(format!(
                            "axis {i}: momentum spacing {} exceeds {limit}",
                            a.spacing()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TensorGrid> {
        self.validate()?;
        Ok(TensorGrid {
            axes: self
                .axes
                .iter()
                .map(|a| AxisNodes::new(a, self.rule))
                .collect(),
        })
    }
}

/// Scaled nodes and weights of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisNodes {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisNodes {
    pub fn new(axis: &Axis, rule: Rule) -> Self {
        let (x, w) = match rule {
            Rule::GaussLegendre => gauss_legendre(axis.nodes),
            Rule::Trapezoid => trapezoid(axis.nodes),
        };
        Self {
            nodes: x
                .iter()
                .map(|u| axis.center + axis.half_width * u)
                .collect(),
            weights: w.iter().map(|v| v * axis.half_width).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Weighted 1D sum.
    pub fn sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Precomputed nodes for every axis of a spec.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    pub axes: Vec<AxisNodes>,
}

impl TensorGrid {
    fn expect_dim(&self, n: usize) -> Result<()> {
        if self.axes.len() == n {
            Ok(())
        } else {
            Err(Error::SpecViolation(format!(
                "expected {n} axes, spec has {}",
                self.axes.len()
            )))
        }
    }
}

/// Deterministic parallel map-sum over the outer axis.
pub(crate) fn ordered_par_sum<F>(outer: &AxisNodes, f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let parts: Vec<f64> = outer
        .nodes
        .par_iter()
        .zip(outer.weights.par_iter())
        .map(|(&x, &w)| w * f(x))
        .collect();
    parts.iter().sum()
}

pub fn integrate_2d<F>(f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let grid = spec.grid()?;
    grid.expect_dim(2)?;
    let [a, b] = [&grid.axes[0], &grid.axes[1]];
    Ok(ordered_par_sum(a, |x| b.sum(|y| f(x, y))))
}

pub fn integrate_4d<F>(f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64, f64, f64) -> f64 + Sync,
{
    let grid = spec.grid()?;
    grid.expect_dim(4)?;
    let [a, b, c, d] = [&grid.axes[0], &grid.axes[1], &grid.axes[2], &grid.axes[3]];
    Ok(ordered_par_sum(a, |x| {
        b.sum(|y| c.sum(|z| d.sum(|w| f(x, y, z, w))))
    }))
}

/// Node counts and rule used by the observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    /// Nodes per position axis over a branch-centered window.
    pub pos_nodes: usize,
    /// Nodes per fringe-carrying momentum axis; axes without fringes use
    /// an eighth of this.
    pub mom_nodes: usize,
    pub rule: Rule,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            pos_nodes: 32,
            mom_nodes: 512,
            rule: Rule::GaussLegendre,
        }
    }
}

/// Half-width of branch-centered position windows.
pub const POSITION_HALF_WIDTH: f64 = 7.0;

impl QuadratureConfig {
    pub fn doubled(&self) -> Self {
        Self {
            pos_nodes: 2 * self.pos_nodes,
            mom_nodes: 2 * self.mom_nodes,
            rule: self.rule,
        }
    }

    pub fn validate(&self, fringe_wavenumber: f64) -> Result<()> {
        QuadratureSpec::new(
            vec![
                self.position_axis(0.0),
                self.momentum_axis(0.0, MIN_MOMENTUM_HALF_WIDTH, true, fringe_wavenumber),
                self.momentum_axis(0.0, MIN_MOMENTUM_HALF_WIDTH, false, fringe_wavenumber),
            ],
            self.rule,
            fringe_wavenumber,
        )
        .validate()
    }

    pub fn position_axis(&self, center: f64) -> Axis {
        Axis::position(center, POSITION_HALF_WIDTH, self.pos_nodes)
    }

    /// Momentum axis of at least the configured density. Fringe axes wider
    /// than the minimum get extra nodes so the spacing bound still holds.
    pub fn momentum_axis(
        &self,
        center: f64,
        half_width: f64,
        fringe: bool,
        fringe_wavenumber: f64,
    ) -> Axis {
        let nodes = if fringe {
            let needed = (2.0 * half_width / max_fringe_spacing(fringe_wavenumber)).ceil() as usize;
            let scaled =
                (self.mom_nodes as f64 * half_width / MIN_MOMENTUM_HALF_WIDTH).ceil() as usize;
            if half_width > MIN_MOMENTUM_HALF_WIDTH {
                scaled.max(needed).max(self.mom_nodes)
            } else {
                self.mom_nodes
            }
        } else {
            (self.mom_nodes / 8).max(MIN_NODES)
        };
        Axis::momentum(center, half_width, nodes, fringe)
    }
}
