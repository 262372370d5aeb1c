//! Purities, momentum-marginal negativity and the diffusion-model purity
//! estimates.
//!
//! Everything is computed in internal units where `hbar = 1`; the purity of
//! a one-particle Wigner function is then `2 pi ∫ W^2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector4;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    diffusion_branch_internal, diffusion_to_internal, flow_quadratic, stepwise_backward,
    AffineMap4, EvolutionKind,
};
use crate::error::{Error, Result};
use crate::gaussian::{purity_of_sum, GaussTerm2, GaussTerm4, SeparableBranch};
use crate::params::Params;
use crate::quadrature::{
    integrate_2d, integrate_4d, Axis, AxisKind, AxisNodes, QuadratureConfig, QuadratureSpec,
    MIN_MOMENTUM_HALF_WIDTH,
};
use crate::wigner::{branch_prefactor, branch_term_internal, BranchInternal, BranchSet, Z4};

const ALPHA: f64 = 2.0;
const BETA: f64 = 0.5;

/// Gravitational phase rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseRates {
    pub rate_phi: f64,
    pub rate_lr: f64,
    pub rate_rl: f64,
    pub delta_lr: f64,
    pub delta_rl: f64,
}

impl PhaseRates {
    pub fn new(params: &Params) -> Self {
        let a = params.kappa / params.hbar;
        let rate_phi = a / params.d;
        let rate_lr = a / (params.d + params.delta_x);
        let rate_rl = a / (params.d - params.delta_x);
        Self {
            rate_phi,
            rate_lr,
            rate_rl,
            delta_lr: rate_lr - rate_phi,
            delta_rl: rate_rl - rate_phi,
        }
    }

    /// Accumulated relative phases `(delta_lr t, delta_rl t)`.
    pub fn phases(&self, t: f64) -> (f64, f64) {
        (self.delta_lr * t, self.delta_rl * t)
    }
}

/// Purity of the reduced quantum state, `(3 + cos((dLR + dRL) t)) / 4`.
pub fn quantum_purity(t: f64, params: &Params) -> f64 {
    let r = PhaseRates::new(params);
    (3.0 + ((r.delta_lr + r.delta_rl) * t).cos()) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PurityMethod {
    Quadrature,
    #[default]
    GaussianAnalytic,
}

impl FromStr for PurityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "quadrature" => Ok(Self::Quadrature),
            "gaussian_analytic" | "gaussian-analytic" | "analytic" => Ok(Self::GaussianAnalytic),
            other => Err(Error::InvalidArgument(format!(
                "unknown purity method `{other}`"
            ))),
        }
    }
}

impl fmt::Display for PurityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Quadrature => "quadrature",
            Self::GaussianAnalytic => "gaussian_analytic",
        })
    }
}

/// Samples `(t, value)` with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "time series entries must be finite".into(),
            ));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument(
                "time series times must increase strictly".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            points,
        })
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Value at a sample time, matched to 1e-12 relative.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|(s, _)| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|p| p.1)
    }

    pub fn max_abs_diff(&self, other: &TimeSeries) -> f64 {
        self.values()
            .zip(other.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[allow(clippy::large_enum_variant)]
enum Model {
    /// Each branch is the initial branch evaluated at `backward[j] z`.
    Affine {
        backward: [AffineMap4; 9],
        centers: [Z4; 9],
    },
    /// Stepwise forces with momentum diffusion, `dt = D t` internal.
    Diffusion { t: f64, dt: f64 },
}

/// A classically evolved state, branch by branch.
pub(crate) struct Evolved {
    branches: [BranchInternal; 9],
    pref: f64,
    norm_n: f64,
    fringe_k: f64,
    model: Model,
}

impl Evolved {
    pub(crate) fn new(kind: EvolutionKind, t: f64, params: &Params) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
        let set = BranchSet::new(params);
        let branches = *set.internal_all();
        let start = |b: &BranchInternal| Z4::new(b.x0, b.y0, 0.0, 0.0);
        let model = match kind {
            EvolutionKind::QuantumReference => {
                return Err(Error::MethodUnsupported {
                    method: "classical evolution",
                    kind: kind.to_string(),
                })
            }
            EvolutionKind::Taylor | EvolutionKind::Fit => {
                let pot = kind.quadratic_potential(params).expect("quadratic kind");
                let fwd = flow_quadratic(&pot, t, params);
                let back = fwd.inverse().expect("symplectic flows are invertible");
                Model::Affine {
                    backward: [back; 9],
                    centers: branches.map(|b| fwd.apply(&start(&b))),
                }
            }
            EvolutionKind::Stepwise => Model::Affine {
                backward: branches.map(|b| stepwise_backward(&b, t)),
                centers: branches.map(|b| {
                    let k = b.force_rate * t;
                    Z4::new(b.x0, b.y0, k, -k)
                }),
            },
            EvolutionKind::StepwiseDiffusion { rate } => {
                if !(rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "diffusion rate {rate} is negative"
                    )));
                }
                Model::Diffusion {
                    t,
                    dt: diffusion_to_internal(rate, params) * t,
                }
            }
        };
        Ok(Self {
            branches,
            pref: branch_prefactor(params),
            norm_n: params.norm_n,
            fringe_k: params.delta_x_int(),
            model,
        })
    }

    /// Value of branch `j` (0-based) at `z`, internal units.
    #[inline]
    pub(crate) fn value(&self, j: usize, z: &Z4) -> f64 {
        let b = &self.branches[j];
        match &self.model {
            Model::Affine { backward, .. } => {
                branch_term_internal(b, self.pref, &backward[j].apply(z))
            }
            Model::Diffusion { t, dt } => diffusion_branch_internal(b, self.norm_n, *t, *dt, z),
        }
    }

    pub(crate) fn center(&self, j: usize) -> Z4 {
        match &self.model {
            Model::Affine { centers, .. } => centers[j],
            Model::Diffusion { t, .. } => {
                let b = &self.branches[j];
                let k = b.force_rate * t;
                Z4::new(b.x0, b.y0, k, -k)
            }
        }
    }

    /// Momentum window half-width, widened with the diffusion variance.
    fn momentum_half_width(&self) -> f64 {
        match self.model {
            Model::Affine { .. } => MIN_MOMENTUM_HALF_WIDTH,
            Model::Diffusion { dt, .. } => {
                MIN_MOMENTUM_HALF_WIDTH * (1.0 + 2.0 * ALPHA * dt).sqrt()
            }
        }
    }

    fn gauss_terms(&self, j: usize) -> Vec<GaussTerm4> {
        let b = &self.branches[j];
        match &self.model {
            Model::Affine { backward, .. } => SeparableBranch {
                amplitude: self.pref * b.weight,
                centers: [b.x0, b.y0, 0.0, 0.0],
                precisions: [BETA, BETA, ALPHA, ALPHA],
                wavenumbers: [0.0, 0.0, b.k1, b.k2],
            }
            .terms()
            .iter()
            .map(|g| g.pullback(&backward[j]))
            .collect(),
            Model::Diffusion { t, dt } => {
                let at = ALPHA / (1.0 + 2.0 * ALPHA * dt);
                let r = at / ALPHA;
                let damping = dt * at * (b.k1 * b.k1 + b.k2 * b.k2) / (2.0 * ALPHA);
                let kick = b.force_rate * t;
                SeparableBranch {
                    amplitude: BETA / PI * 4.0 * at / (self.norm_n * PI)
                        * b.weight
                        * (-damping).exp(),
                    centers: [b.x0, b.y0, kick, -kick],
                    precisions: [BETA, BETA, at, at],
                    wavenumbers: [0.0, 0.0, r * b.k1, r * b.k2],
                }
                .terms()
            }
        }
    }

    fn all_terms(&self) -> Vec<GaussTerm4> {
        (0..9).flat_map(|j| self.gauss_terms(j)).collect()
    }

    /// Particle-2 marginal of branch `j` in closed form; only used for the
    /// diffusion model.
    fn reduced_diffusion(&self, j: usize, x2: f64, p2: f64) -> f64 {
        let Model::Diffusion { t, dt } = self.model else {
            unreachable!("closed-form reduced branches exist only for diffusion")
        };
        let b = &self.branches[j];
        let at = ALPHA / (1.0 + 2.0 * ALPHA * dt);
        let r = at / ALPHA;
        let damping = dt * at * (b.k1 * b.k1 + b.k2 * b.k2) / (2.0 * ALPHA);
        let q2 = p2 + b.force_rate * t;
        let dx2 = x2 - b.y0;
        let position = (BETA / PI).sqrt() * (-BETA * dx2 * dx2).exp();
        // ∫ exp(-at q^2) cos(r k1 q) dq
        let p1_integral = (PI / at).sqrt() * (-(r * b.k1).powi(2) / (4.0 * at)).exp();
        let mut v = position * 4.0 * at / (self.norm_n * PI)
            * b.weight
            * (-damping - at * q2 * q2).exp()
            * p1_integral;
        if b.k2 != 0.0 {
            v *= (r * b.k2 * q2).cos();
        }
        v
    }

    fn fringe_axis(
        &self,
        center: f64,
        half_width: f64,
        fringe: bool,
        cfg: &QuadratureConfig,
    ) -> Axis {
        cfg.momentum_axis(center, half_width, fringe, self.fringe_k)
    }

    fn spec(&self, axes: Vec<Axis>, cfg: &QuadratureConfig) -> QuadratureSpec {
        QuadratureSpec::new(axes, cfg.rule, self.fringe_k)
    }

    /// `∫ w_j dx1 dp1` at `(x2, p2)` by direct evaluation at every node.
    #[cfg(test)]
    fn inner_marginal_direct(
        &self,
        j: usize,
        x2: f64,
        p2: f64,
        x1: &AxisNodes,
        p1: &AxisNodes,
    ) -> f64 {
        let mut acc = 0.0;
        for (x, wx) in x1.iter() {
            for (p, wp) in p1.iter() {
                acc += wx * wp * self.value(j, &Z4::new(x, x2, p, p2));
            }
        }
        acc
    }

    fn inner_kernel(
        &self,
        j: usize,
        x1: AxisNodes,
        p1: AxisNodes,
        cx: f64,
        cp: f64,
    ) -> InnerKernel<'_> {
        match &self.model {
            Model::Affine { backward, .. } => InnerKernel::Affine(Box::new(AffineInner::new(
                &self.branches[j],
                self.pref,
                &backward[j],
                x1,
                p1,
                cx,
                cp,
            ))),
            Model::Diffusion { .. } => InnerKernel::Diffusion { ev: self, j },
        }
    }

    /// Inner `(x1, p1)` grids for branch `j`.
    fn inner_grids(&self, j: usize, cfg: &QuadratureConfig) -> Result<(AxisNodes, AxisNodes)> {
        let c = self.center(j);
        let spec = self.spec(
            vec![
                cfg.position_axis(c[0]),
                self.fringe_axis(
                    c[2],
                    self.momentum_half_width(),
                    self.branches[j].k1 != 0.0,
                    cfg,
                ),
            ],
            cfg,
        );
        let mut g = spec.grid()?;
        let p1 = g.axes.pop().expect("two axes");
        let x1 = g.axes.pop().expect("two axes");
        Ok((x1, p1))
    }
}

/// `∫ w_j dx1 dp1` on a fixed inner grid, as a function of `(x2, p2)`.
enum InnerKernel<'a> {
    Affine(Box<AffineInner>),
    Diffusion { ev: &'a Evolved, j: usize },
}

impl InnerKernel<'_> {
    fn eval(&self, x2: f64, p2: f64) -> f64 {
        match self {
            Self::Affine(k) => k.eval(x2, p2),
            Self::Diffusion { ev, j } => ev.reduced_diffusion(*j, x2, p2),
        }
    }
}

/// Inner sum for a branch pulled back by an affine map.
///
/// With `x1 = cx + xi`, `p1 = cp + eta` the backward point is
/// `z0 + u xi + v eta`. The Gaussian exponent then splits into a constant,
/// a row factor in `xi`, a column factor in `eta` and an `xi eta` cross
/// factor that does not depend on `(x2, p2)`; the cosines become complex
/// row and column phases. Only `O(rows + cols)` transcendentals are needed
/// per outer node.
struct AffineInner {
    amp: f64,
    shift: Vector4<f64>,
    m1: Vector4<f64>,
    m3: Vector4<f64>,
    z_center: Vector4<f64>,
    u: Vector4<f64>,
    v: Vector4<f64>,
    xi: Vec<f64>,
    wx: Vec<f64>,
    eta: Vec<f64>,
    wp: Vec<f64>,
    /// Row-major `exp(-2 Σ g u v xi eta)`.
    cross: Vec<f64>,
    /// `(coefficient, sign of k1 term, sign of k2 term)`.
    phases: Vec<(f64, f64, f64)>,
    k: [f64; 2],
}

const GAUSS_WEIGHTS: [f64; 4] = [BETA, BETA, ALPHA, ALPHA];

impl AffineInner {
    fn new(
        b: &BranchInternal,
        pref: f64,
        map: &AffineMap4,
        x1: AxisNodes,
        p1: AxisNodes,
        cx: f64,
        cp: f64,
    ) -> Self {
        let m = &map.matrix;
        let u: Vector4<f64> = m.column(0).into_owned();
        let v: Vector4<f64> = m.column(2).into_owned();
        let xi: Vec<f64> = x1.nodes.iter().map(|x| x - cx).collect();
        let eta: Vec<f64> = p1.nodes.iter().map(|p| p - cp).collect();
        let uv: f64 = (0..4).map(|i| GAUSS_WEIGHTS[i] * u[i] * v[i]).sum();
        let cross = xi
            .iter()
            .flat_map(|a| eta.iter().map(move |e| (-2.0 * uv * a * e).exp()))
            .collect();
        let phases = match (b.k1 != 0.0, b.k2 != 0.0) {
            (false, false) => vec![(1.0, 0.0, 0.0)],
            (true, false) => vec![(1.0, 1.0, 0.0)],
            (false, true) => vec![(1.0, 0.0, 1.0)],
            (true, true) => vec![(0.5, 1.0, 1.0), (0.5, 1.0, -1.0)],
        };
        Self {
            amp: pref * b.weight,
            shift: Vector4::new(b.x0, b.y0, 0.0, 0.0),
            m1: m.column(1).into_owned(),
            m3: m.column(3).into_owned(),
            z_center: u * cx + v * cp + map.offset,
            u,
            v,
            xi,
            wx: x1.weights,
            eta,
            wp: p1.weights,
            cross,
            phases,
            k: [b.k1, b.k2],
        }
    }

    fn eval(&self, x2: f64, p2: f64) -> f64 {
        let z0 = self.m1 * x2 + self.m3 * p2 + self.z_center;
        let r = z0 - self.shift;
        let (mut e0, mut ax, mut aa, mut bx, mut bb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..4 {
            let g = GAUSS_WEIGHTS[i];
            e0 -= g * r[i] * r[i];
            ax -= 2.0 * g * r[i] * self.u[i];
            aa -= g * self.u[i] * self.u[i];
            bx -= 2.0 * g * r[i] * self.v[i];
            bb -= g * self.v[i] * self.v[i];
        }
        let rows: Vec<f64> = self
            .xi
            .iter()
            .zip(&self.wx)
            .map(|(x, w)| w * (ax * x + aa * x * x).exp())
            .collect();
        let cols: Vec<f64> = self
            .eta
            .iter()
            .zip(&self.wp)
            .map(|(e, w)| w * (bx * e + bb * e * e).exp())
            .collect();
        let np = self.eta.len();
        let mut total = 0.0;
        for &(coef, s1, s2) in &self.phases {
            let kk = [s1 * self.k[0], s2 * self.k[1]];
            let rho = kk[0] * self.u[2] + kk[1] * self.u[3];
            let tau = kk[0] * self.v[2] + kk[1] * self.v[3];
            let phi = kk[0] * z0[2] + kk[1] * z0[3];
            let (mut re, mut im) = (0.0, 0.0);
            if tau == 0.0 && rho == 0.0 {
                for (i, rw) in rows.iter().enumerate() {
                    let line = &self.cross[i * np..(i + 1) * np];
                    re += rw * line.iter().zip(&cols).map(|(c, w)| c * w).sum::<f64>();
                }
            } else {
                let (cs, cc): (Vec<f64>, Vec<f64>) = self
                    .eta
                    .iter()
                    .zip(&cols)
                    .map(|(e, w)| {
                        let (s, c) = (tau * e).sin_cos();
                        (w * s, w * c)
                    })
                    .unzip();
                for (i, (x, rw)) in self.xi.iter().zip(&rows).enumerate() {
                    let line = &self.cross[i * np..(i + 1) * np];
                    let (mut sr, mut si) = (0.0, 0.0);
                    for ((c, a), b) in line.iter().zip(&cc).zip(&cs) {
                        sr += c * a;
                        si += c * b;
                    }
                    let (s, c) = (rho * x).sin_cos();
                    re += rw * (c * sr - s * si);
                    im += rw * (s * sr + c * si);
                }
            }
            let (s, c) = phi.sin_cos();
            total += coef * (c * re - s * im);
        }
        self.amp * e0.exp() * total
    }
}

/// Particle-2 marginal on one lobe grid.
struct LobeGrid {
    x2: AxisNodes,
    p2: AxisNodes,
    values: Vec<f64>,
}

impl LobeGrid {
    fn weighted(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let np = self.p2.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.x2.weights[i / np] * self.p2.weights[i % np], *v))
    }
}

/// Integrals of the particle-2 marginal computed on branch-centered grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedIntegrals {
    /// `∫ W2`, equal to the full phase-space normalization.
    pub normalization: f64,
    /// `2 pi hbar ∫ W2^2`.
    pub purity: f64,
}

fn lobe_grids(ev: &Evolved, cfg: &QuadratureConfig) -> Result<Vec<LobeGrid>> {
    let mhw = ev.momentum_half_width();
    let mut out = Vec::with_capacity(3);
    // branches sharing y0 sit on the same particle-2 lobe
    for lobe in 0..3 {
        let members = [lobe, lobe + 3, lobe + 6];
        let centers = members.map(|j| ev.center(j));
        let x_mid = centers.iter().map(|c| c[1]).sum::<f64>() / 3.0;
        let p_mid = centers.iter().map(|c| c[3]).sum::<f64>() / 3.0;
        let x_far = centers
            .iter()
            .map(|c| c[1])
            .max_by(|a, b| (a - x_mid).abs().total_cmp(&(b - x_mid).abs()))
            .unwrap_or(x_mid);
        let p_spread = centers
            .iter()
            .map(|c| (c[3] - p_mid).abs())
            .fold(0.0, f64::max);
        let fringe = members.iter().any(|&j| ev.branches[j].k2 != 0.0);
        let mut x_axis = cfg.position_axis(x_mid);
        x_axis.kind = AxisKind::Position { lobe_center: x_far };
        let spec = ev.spec(
            vec![x_axis, ev.fringe_axis(p_mid, mhw + p_spread, fringe, cfg)],
            cfg,
        );
        let mut g = spec.grid()?;
        let p2 = g.axes.pop().expect("two axes");
        let x2 = g.axes.pop().expect("two axes");
        let inner: Vec<InnerKernel> = members
            .iter()
            .map(|&j| {
                let c = ev.center(j);
                ev.inner_grids(j, cfg)
                    .map(|(a, b)| ev.inner_kernel(j, a, b, c[0], c[2]))
            })
            .collect::<Result<_>>()?;
        let np = p2.len();
        let values: Vec<f64> = (0..x2.len() * np)
            .into_par_iter()
            .map(|i| {
                let (x, p) = (x2.nodes[i / np], p2.nodes[i % np]);
                inner.iter().map(|k| k.eval(x, p)).sum()
            })
            .collect();
        out.push(LobeGrid { x2, p2, values });
    }
    Ok(out)
}

/// Normalization and purity of the particle-2 marginal by quadrature.
pub fn reduced_integrals(
    kind: EvolutionKind,
    t: f64,
    params: &Params,
    cfg: &QuadratureConfig,
) -> Result<ReducedIntegrals> {
    let ev = Evolved::new(kind, t, params)?;
    let grids = lobe_grids(&ev, cfg)?;
    let (mut norm, mut sq) = (0.0, 0.0);
    for g in &grids {
        for (w, v) in g.weighted() {
            norm += w * v;
            sq += w * v * v;
        }
    }
    Ok(ReducedIntegrals {
        normalization: norm,
        purity: 2.0 * PI * sq,
    })
}

/// Particle-2 reduced Wigner function at `(x2, p2)` in SI units (1 / (J s)).
pub fn marginal2(
    kind: EvolutionKind,
    x2: f64,
    p2: f64,
    t: f64,
    params: &Params,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let ev = Evolved::new(kind, t, params)?;
    let u = params.units;
    let (x, p) = (u.length_to_internal(x2), u.momentum_to_internal(p2));
    let mut acc = 0.0;
    for j in 0..9 {
        let c = ev.center(j);
        let (a, b) = ev.inner_grids(j, cfg)?;
        acc += ev.inner_kernel(j, a, b, c[0], c[2]).eval(x, p);
    }
    Ok(acc / params.hbar)
}

/// Purity `2 pi hbar ∫ W2^2` of the particle-2 marginal.
pub fn marginal_purity(
    kind: EvolutionKind,
    t: f64,
    params: &Params,
    method: PurityMethod,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    match method {
        PurityMethod::Quadrature => Ok(reduced_integrals(kind, t, params, cfg)?.purity),
        PurityMethod::GaussianAnalytic => {
            let ev = Evolved::new(kind, t, params)?;
            let terms: Vec<GaussTerm2> =
                ev.all_terms().iter().map(|g| g.marginal([1, 3])).collect();
            Ok(purity_of_sum(&terms))
        }
    }
}

/// Full phase-space normalization `∫ W` in closed form.
pub fn analytic_normalization(kind: EvolutionKind, t: f64, params: &Params) -> Result<f64> {
    let ev = Evolved::new(kind, t, params)?;
    Ok(ev.all_terms().iter().map(|g| g.integral().re).sum())
}

/// Purities on a time grid. Times must be strictly increasing.
pub fn purity_series(
    kind: EvolutionKind,
    times: &[f64],
    params: &Params,
    method: PurityMethod,
    cfg: &QuadratureConfig,
) -> Result<TimeSeries> {
    let values: Vec<f64> = match kind {
        EvolutionKind::QuantumReference => {
            times.iter().map(|&t| quantum_purity(t, params)).collect()
        }
        _ => times
            .par_iter()
            .map(|&t| marginal_purity(kind, t, params, method, cfg))
            .collect::<Result<_>>()?,
    };
    TimeSeries::new(kind.label(), times.iter().copied().zip(values).collect())
}

/// Negativity `½ (∫|W(p1, p2)| - ∫W(p1, p2))` of the two-particle momentum
/// marginal.
pub fn negativity(
    kind: EvolutionKind,
    t: f64,
    params: &Params,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let ev = Evolved::new(kind, t, params)?;
    let spread = (0..9)
        .map(|j| {
            let c = ev.center(j);
            c[2].abs().max(c[3].abs())
        })
        .fold(0.0, f64::max);
    let hw = ev.momentum_half_width() + spread;
    let spec = ev.spec(vec![ev.fringe_axis(0.0, hw, true, cfg); 2], cfg);
    let (abs, plain) = match &ev.model {
        Model::Affine { .. } => {
            let terms: Vec<GaussTerm2> =
                ev.all_terms().iter().map(|g| g.marginal([2, 3])).collect();
            let f = |p1: f64, p2: f64| terms.iter().map(|g| g.eval(p1, p2).re).sum::<f64>();
            (
                integrate_2d(|a, b| f(a, b).abs(), &spec)?,
                integrate_2d(f, &spec)?,
            )
        }
        Model::Diffusion { .. } => {
            // the position factor integrates to one
            let f = |p1: f64, p2: f64| {
                (0..9)
                    .map(|j| {
                        let b = &ev.branches[j];
                        ev.value(j, &Z4::new(b.x0, b.y0, p1, p2)) * 2.0 * PI
                    })
                    .sum::<f64>()
            };
            (
                integrate_2d(|a, b| f(a, b).abs(), &spec)?,
                integrate_2d(f, &spec)?,
            )
        }
    };
    let nu = 0.5 * (abs - plain);
    Ok(if (-1e-12..0.0).contains(&nu) { 0.0 } else { nu })
}

/// Diffusion rate (kg^2 m^2 s^-3) for which `D t` equals
/// `scale * 0.25 (hbar / delta_x)^2` at time `t`.
pub fn diffusion_rate_for_threshold(scale: f64, t: f64, params: &Params) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let f = params.fringe_momentum();
    scale * 0.25 * f * f / t
}

fn diffusion_factors(t: f64, rate: f64, params: &Params) -> (f64, f64) {
    let dt = diffusion_to_internal(rate, params) * t;
    (dt, ALPHA / (1.0 + 2.0 * ALPHA * dt))
}

/// Single-particle factor of the global-purity approximation for one
/// branch and particle.
fn gamma_ij(k: f64, div: f64, dt: f64, at: f64) -> f64 {
    (-dt * at * k * k / ALPHA).exp() / (2.0 * div * (1.0 + 2.0 * ALPHA * dt).sqrt())
}

/// Global-purity approximation `Σ_j Γ_1j Γ_2j` of the diffusion model.
pub fn gamma_global_diffusion(t: f64, rate: f64, params: &Params, branches: &BranchSet) -> f64 {
    let (dt, at) = diffusion_factors(t, rate, params);
    let k = params.delta_x_int();
    branches
        .iter()
        .map(|b| {
            let k1 = if b.gamma1 != 0.0 { k } else { 0.0 };
            let k2 = if b.gamma2 != 0.0 { k } else { 0.0 };
            gamma_ij(k1, b.div1, dt, at) * gamma_ij(k2, b.div2, dt, at)
        })
        .sum()
}

/// Reduced-purity approximation of the diffusion model, including the
/// cross terms between branches that share a particle-2 lobe.
pub fn gamma_reduced_diffusion(t: f64, rate: f64, params: &Params, branches: &BranchSet) -> f64 {
    let (dt, at) = diffusion_factors(t, rate, params);
    let k = params.delta_x_int();
    let bs: Vec<_> = branches.iter().collect();
    let f: Vec<f64> = bs
        .iter()
        .map(|b| params.units.force_to_internal(b.force))
        .collect();
    let g2: Vec<f64> = bs
        .iter()
        .map(|b| gamma_ij(if b.gamma2 != 0.0 { k } else { 0.0 }, b.div2, dt, at))
        .collect();
    let cross = |i: usize, j: usize| (-at * (f[i] - f[j]).powi(2) * t * t / 2.0).exp();
    0.25 * g2[..6].iter().sum::<f64>()
        + g2[0] / 2.0 * (cross(0, 3) + cross(1, 4))
        + g2[2] / 2.0 * cross(2, 5) * (at / ALPHA * k * (f[2] - f[5]) * t).cos()
}

/// `(2 pi hbar)^2 Σ_j ∫ (w_j^D)^2` by 4D quadrature over each branch.
pub fn gamma_global_diffusion_quadrature(
    t: f64,
    rate: f64,
    params: &Params,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let ev = Evolved::new(EvolutionKind::stepwise_diffusion(rate)?, t, params)?;
    let mhw = ev.momentum_half_width();
    let mut total = 0.0;
    for j in 0..9 {
        let c = ev.center(j);
        let b = &ev.branches[j];
        let spec = ev.spec(
            vec![
                cfg.position_axis(c[0]),
                cfg.position_axis(c[1]),
                ev.fringe_axis(c[2], mhw, b.k1 != 0.0, cfg),
                ev.fringe_axis(c[3], mhw, b.k2 != 0.0, cfg),
            ],
            cfg,
        );
        total += integrate_4d(
            |x1, x2, p1, p2| {
                let v = ev.value(j, &Z4::new(x1, x2, p1, p2));
                v * v
            },
            &spec,
        )?;
    }
    Ok(4.0 * PI * PI * total)
}

/// Reduced purity of the diffusion model from its particle-2 marginal by
/// 2D quadrature, with all nine branches and no lobe approximations.
pub fn gamma_reduced_diffusion_quadrature(
    t: f64,
    rate: f64,
    params: &Params,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    marginal_purity(
        EvolutionKind::stepwise_diffusion(rate)?,
        t,
        params,
        PurityMethod::Quadrature,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wigner::single_particle_wigner;

    fn p() -> Params {
        Params::standard()
    }

    fn small() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn phase_rates_ordering_and_values() {
        let p = p();
        let r = PhaseRates::new(&p);
        assert!(r.rate_rl > r.rate_phi && r.rate_phi > r.rate_lr && r.rate_lr > 0.0);
        let (a, b) = r.phases(2.5);
        assert!((a + 0.13).abs() < 5e-3, "{a}");
        assert!((b - 0.44).abs() < 5e-3, "{b}");
    }

    #[test]
    fn quantum_purity_values() {
        let p = p();
        assert_eq!(quantum_purity(0.0, &p), 1.0);
        // hand evaluation with the rounded phases -0.13 and 0.44
        let want = (3.0 + (0.44f64 - 0.13).cos()) / 4.0;
        assert!((quantum_purity(2.5, &p) - want).abs() < 1e-3);
        assert!((quantum_purity(2.5, &p) - 0.9878).abs() < 1e-3);
    }

    #[test]
    fn time_series_validation() {
        assert!(TimeSeries::new("a", vec![(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(TimeSeries::new("a", vec![(0.0, f64::NAN)]).is_err());
        let s = TimeSeries::new("a", vec![(0.0, 1.0), (2.5, 0.5)]).unwrap();
        assert_eq!(s.value_at(2.5), Some(0.5));
        assert_eq!(s.value_at(1.0), None);
    }

    #[test]
    fn initial_marginal_is_single_particle() {
        let p = p();
        let cfg = small();
        for kind in [
            EvolutionKind::Taylor,
            EvolutionKind::Fit,
            EvolutionKind::Stepwise,
        ] {
            for (q, mom) in [
                (0.0, 0.0),
                (0.5 * p.delta_x, 0.3 * p.hbar / p.sigma),
                (0.1 * p.delta_x, 2e-2 * p.hbar / p.sigma),
            ] {
                let got = marginal2(kind, p.d / 2.0 + q, mom, 0.0, &p, &cfg).unwrap();
                let want = single_particle_wigner(q, mom, &p);
                let scale = 1.0 / p.hbar;
                assert!(
                    (got - want).abs() <= 1e-8 * scale,
                    "{kind}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn diffusion_reduced_branch_matches_gaussian_marginal() {
        let p = p();
        let rate = diffusion_rate_for_threshold(1.0, 2.5, &p);
        let ev = Evolved::new(EvolutionKind::stepwise_diffusion(rate).unwrap(), 2.5, &p).unwrap();
        for j in 0..9 {
            let c = ev.center(j);
            for (dx, dp) in [(0.0, 0.0), (0.4, 0.1), (-1.0, -0.3)] {
                let closed = ev.reduced_diffusion(j, c[1] + dx, c[3] + dp);
                let g: f64 = ev
                    .gauss_terms(j)
                    .iter()
                    .map(|t| t.marginal([1, 3]).eval(c[1] + dx, c[3] + dp).re)
                    .sum();
                assert!(
                    (closed - g).abs() < 1e-12 * closed.abs().max(1e-3),
                    "j = {j}"
                );
            }
        }
    }

    #[test]
    fn factored_inner_sum_matches_direct_evaluation() {
        let p = p();
        let cfg = small();
        for kind in [
            EvolutionKind::Taylor,
            EvolutionKind::Fit,
            EvolutionKind::Stepwise,
        ] {
            let ev = Evolved::new(kind, 7.5, &p).unwrap();
            for j in [0, 2, 6, 8] {
                let c = ev.center(j);
                let (a, b) = ev.inner_grids(j, &cfg).unwrap();
                let direct = |x: f64, q: f64| ev.inner_marginal_direct(j, x, q, &a, &b);
                let k = ev.inner_kernel(j, a.clone(), b.clone(), c[0], c[2]);
                for (dx, dp) in [(0.0, 0.0), (1.3, -0.4), (-3.0, 1.1)] {
                    let (x, q) = (c[1] + dx, c[3] + dp);
                    let want = direct(x, q);
                    let got = k.eval(x, q);
                    assert!(
                        (got - want).abs() <= 1e-12 * want.abs() + 1e-14,
                        "{kind} j = {j}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn analytic_purity_is_one_initially() {
        let p = p();
        for kind in [
            EvolutionKind::Taylor,
            EvolutionKind::Fit,
            EvolutionKind::Stepwise,
        ] {
            let v =
                marginal_purity(kind, 0.0, &p, PurityMethod::GaussianAnalytic, &small()).unwrap();
            assert!((v - 1.0).abs() < 1e-6, "{kind}: {v}");
            let n = analytic_normalization(kind, 0.0, &p).unwrap();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_normalization_is_conserved() {
        let p = p();
        for kind in [
            EvolutionKind::Taylor,
            EvolutionKind::Fit,
            EvolutionKind::Stepwise,
        ] {
            for t in [2.5, 10.0] {
                let n = analytic_normalization(kind, t, &p).unwrap();
                assert!((n - 1.0).abs() < 1e-10, "{kind} {t}: {n}");
            }
        }
    }

    #[test]
    fn fit_tracks_quantum_purity() {
        let p = p();
        let v = marginal_purity(
            EvolutionKind::Fit,
            2.5,
            &p,
            PurityMethod::GaussianAnalytic,
            &small(),
        )
        .unwrap();
        assert!((v - quantum_purity(2.5, &p)).abs() < 5e-3, "{v}");
    }

    #[test]
    fn quantum_reference_is_not_a_classical_state() {
        let p = p();
        let err = marginal_purity(
            EvolutionKind::QuantumReference,
            1.0,
            &p,
            PurityMethod::Quadrature,
            &small(),
        );
        assert!(matches!(err, Err(Error::MethodUnsupported { .. })));
        assert!(negativity(EvolutionKind::Stepwise, -1.0, &p, &small()).is_err());
    }

    #[test]
    fn initial_negativity_vanishes() {
        let p = p();
        let nu = negativity(EvolutionKind::Stepwise, 0.0, &p, &small()).unwrap();
        assert!(nu.abs() <= 1e-9, "{nu}");
    }

    #[test]
    fn diffusion_formulas_at_zero() {
        let p = p();
        let b = BranchSet::new(&p);
        assert!((gamma_global_diffusion(0.0, 0.0, &p, &b) - 1.0).abs() < 1e-12);
        assert!((gamma_reduced_diffusion(0.0, 0.0, &p, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diffusion_formulas_at_threshold() {
        let p = p();
        let b = BranchSet::new(&p);
        let rate = diffusion_rate_for_threshold(1.0, 2.5, &p);
        let g = gamma_global_diffusion(2.5, rate, &p, &b);
        let r = gamma_reduced_diffusion(2.5, rate, &p, &b);
        // hand evaluation: Dt = 4e-4 internal, exp(-Dt at k^2 / alpha) = 0.779,
        // one factor 1 / sqrt(1 + 2 alpha Dt) per particle
        let e = (-4e-4 * (2.0 / 1.0016) * 625.0 / 2.0f64).exp();
        let want = (0.25 + 0.5 * e + 0.25 * e * e) / 1.0016;
        assert!((g - want).abs() < 1e-9, "{g} vs {want}");
        assert!((g - 0.79).abs() < 0.01);
        assert!((r - 0.88).abs() < 0.01, "{r}");
        assert!(g < r);
        let mut last = 1.0;
        for s in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let v = gamma_global_diffusion(2.5, diffusion_rate_for_threshold(s, 2.5, &p), &p, &b);
            assert!(v <= last + 1e-15);
            last = v;
        }
    }
}
