//! Classical phase-space flows acting on the branch decomposition.
//!
//! The quadratic Hamiltonians generate affine symplectic maps, assembled in
//! center-of-mass / relative coordinates and conjugated back to
//! `(x1, x2, p1, p2)`. All maps act on internal units (lengths in `sigma`,
//! momenta in `hbar / sigma`).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::potentials::QuadraticPotential;
use crate::wigner::{
    branch_prefactor, branch_term_internal, check_index, BranchInternal, BranchSet, PhasePoint, Z4,
};

/// The canonical form for the ordering `(x1, x2, p1, p2)`.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

/// `z -> M z + c` on internal phase-space coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap4 {
    pub matrix: Matrix4<f64>,
    pub offset: Vector4<f64>,
}

impl AffineMap4 {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix4::identity(),
            offset: Vector4::zeros(),
        }
    }

    pub fn translation(offset: Vector4<f64>) -> Self {
        Self {
            matrix: Matrix4::identity(),
            offset,
        }
    }

    #[inline]
    pub fn apply(&self, z: &Z4) -> Z4 {
        self.matrix * z + self.offset
    }

    pub fn apply_si(&self, pt: &PhasePoint, params: &Params) -> PhasePoint {
        PhasePoint::from_internal(&self.apply(&pt.to_internal(params)), params)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &AffineMap4) -> Self {
        Self {
            matrix: self.matrix * inner.matrix,
            offset: self.matrix * inner.offset + self.offset,
        }
    }

    /// Symplectic maps always have unit determinant, so this only fails for
    /// matrices that were not built by a Hamiltonian flow.
    pub fn inverse(&self) -> Option<Self> {
        let inv = self.matrix.try_inverse()?;
        Some(Self {
            matrix: inv,
            offset: -(inv * self.offset),
        })
    }

    /// `max |M^T J M - J|`.
    pub fn symplectic_defect(&self) -> f64 {
        let j = symplectic_form();
        (self.matrix.transpose() * j * self.matrix - j).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    /// Largest entry-wise deviation from another map.
    pub fn max_abs_diff(&self, other: &AffineMap4) -> f64 {
        (self.matrix - other.matrix)
            .amax()
            .max((self.offset - other.offset).amax())
    }
}

/// Choice of dynamical model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvolutionKind {
    QuantumReference,
    Taylor,
    Fit,
    Stepwise,
    /// Stepwise forces plus momentum diffusion at `rate` (kg^2 m^2 / s^3)
    /// per particle.
    StepwiseDiffusion {
        rate: f64,
    },
}

impl EvolutionKind {
    pub fn stepwise_diffusion(rate: f64) -> Result<Self> {
        if rate >= 0.0 && rate.is_finite() {
            Ok(Self::StepwiseDiffusion { rate })
        } else {
            Err(Error::InvalidArgument(format!(
                "diffusion rate must be finite and non-negative, got {rate}"
            )))
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::QuantumReference => "qt",
            Self::Taylor => "taylor",
            Self::Fit => "fit",
            Self::Stepwise => "step",
            Self::StepwiseDiffusion { .. } => "step_diffusion",
        }
    }

    pub fn quadratic_potential(&self, params: &Params) -> Option<QuadraticPotential> {
        match self {
            Self::Taylor => Some(QuadraticPotential::taylor(params)),
            Self::Fit => Some(QuadraticPotential::fit(params)),
            _ => None,
        }
    }
}

impl fmt::Display for EvolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StepwiseDiffusion { rate } => write!(f, "step_diffusion(D = {rate:e})"),
            other => f.write_str(other.label()),
        }
    }
}

impl FromStr for EvolutionKind {
    type Err = Error;

    /// Accepts the labels produced by [`EvolutionKind::label`]; diffusion
    /// needs a rate and therefore cannot be parsed from a bare label.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "qt" | "quantum" => Ok(Self::QuantumReference),
            "taylor" => Ok(Self::Taylor),
            "fit" => Ok(Self::Fit),
            "step" | "stepwise" => Ok(Self::Stepwise),
            other => Err(Error::InvalidArgument(format!(
                "unknown evolution kind `{other}`"
            ))),
        }
    }
}

/// `C = cosh(wt)`, `S = sinh(wt)/w` and `(C - 1)/lambda` for `lambda = w^2`,
/// continued analytically to `lambda <= 0`. The last one is evaluated as
/// `2 sinh^2(wt/2) / lambda` so tiny `wt` loses no precision.
pub(crate) fn hyperbolic_kernels(lambda: f64, t: f64) -> (f64, f64, f64) {
    if lambda > 0.0 {
        let w = lambda.sqrt();
        let h = (0.5 * w * t).sinh();
        ((w * t).cosh(), (w * t).sinh() / w, 2.0 * h * h / lambda)
    } else if lambda < 0.0 {
        let w = (-lambda).sqrt();
        let h = (0.5 * w * t).sin();
        ((w * t).cos(), (w * t).sin() / w, 2.0 * h * h / (-lambda))
    } else {
        (1.0, t, 0.5 * t * t)
    }
}

/// Relative-coordinate dynamics of a quadratic potential in internal units:
/// `x' = nu p`, `p' = -a x - b`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RelativeQuadratic {
    nu: f64,
    a: f64,
    b: f64,
}

impl RelativeQuadratic {
    pub(crate) fn new(pot: &QuadraticPotential, params: &Params) -> Self {
        let (sigma, hbar) = (params.sigma, params.hbar);
        Self {
            nu: params.drift_rate(),
            a: 2.0 * pot.c2 * sigma * sigma / hbar,
            b: pot.c1 * sigma / hbar,
        }
    }

    fn lambda(&self) -> f64 {
        -self.a * self.nu
    }

    /// Change `(x(t) - x(0), p(t) - p(0))` from `(x0, p0)`, computed without
    /// cancellation.
    pub(crate) fn displacement(&self, x0: f64, p0: f64, t: f64) -> (f64, f64) {
        let lambda = self.lambda();
        let (_, s, cm1) = hyperbolic_kernels(lambda, t);
        let dx = cm1 * (lambda * x0 - self.b * self.nu) + self.nu * s * p0;
        let dp = -s * (self.a * x0 + self.b) + lambda * cm1 * p0;
        (dx, dp)
    }

    /// Matrix and offset acting on `(x_avg, x_rel, p_avg, p_rel)`.
    fn map(&self, t: f64) -> (Matrix4<f64>, Vector4<f64>) {
        let lambda = self.lambda();
        let (c, s, cm1) = hyperbolic_kernels(lambda, t);
        let nu = self.nu;
        let m = Matrix4::new(
            1.0,
            0.0,
            nu * t,
            0.0, //
            0.0,
            c,
            0.0,
            nu * s, //
            0.0,
            0.0,
            1.0,
            0.0, //
            0.0,
            -self.a * s,
            0.0,
            c,
        );
        let f = Vector4::new(0.0, -self.b * nu * cm1, 0.0, -self.b * s);
        (m, f)
    }
}

/// Rotation to `(x_avg, x_rel + d/sqrt 2, p_avg, p_rel)`.
fn to_relative() -> Matrix4<f64> {
    let r = FRAC_1_SQRT_2;
    Matrix4::new(
        r, r, 0.0, 0.0, //
        -r, r, 0.0, 0.0, //
        0.0, 0.0, r, r, //
        0.0, 0.0, -r, r,
    )
}

/// Forward flow of a quadratic relative potential over `t` seconds.
pub fn flow_quadratic(pot: &QuadraticPotential, t: f64, params: &Params) -> AffineMap4 {
    let rel = RelativeQuadratic::new(pot, params);
    let (a, f) = rel.map(t);
    let r = to_relative();
    let shift = Vector4::new(0.0, -params.d_int() * FRAC_1_SQRT_2, 0.0, 0.0);
    // z -> R^T (A (R z + s) + f - s)
    AffineMap4 {
        matrix: r.transpose() * a * r,
        offset: r.transpose() * (a * shift + f - shift),
    }
}

pub fn flow_taylor(t: f64, params: &Params) -> AffineMap4 {
    flow_quadratic(&QuadraticPotential::taylor(params), t, params)
}

pub fn flow_fit(t: f64, params: &Params) -> AffineMap4 {
    flow_quadratic(&QuadraticPotential::fit(params), t, params)
}

/// The phase-space point that flows into `pt` after time `t`.
pub fn backward_point(
    kind: EvolutionKind,
    pt: &PhasePoint,
    t: f64,
    params: &Params,
) -> Result<PhasePoint> {
    let pot = kind
        .quadratic_potential(params)
        .ok_or_else(|| Error::MethodUnsupported {
            method: "backward_point",
            kind: kind.to_string(),
        })?;
    let inv = flow_quadratic(&pot, t, params)
        .inverse()
        .expect("symplectic flows are invertible");
    Ok(inv.apply_si(pt, params))
}

/// Backward map of branch `j` under the stepwise forces: momenta shifted,
/// positions untouched.
pub(crate) fn stepwise_backward(b: &BranchInternal, t: f64) -> AffineMap4 {
    let kick = b.force_rate * t;
    AffineMap4::translation(Vector4::new(0.0, 0.0, -kick, kick))
}

/// `w_j(x1, x2, p1 - F_j t, p2 + F_j t)` in SI units.
pub fn stepwise_branch_value(
    j: usize,
    pt: &PhasePoint,
    t: f64,
    params: &Params,
    branches: &BranchSet,
) -> Result<f64> {
    check_index(j)?;
    let b = branches.internal(j);
    let z = stepwise_backward(b, t).apply(&pt.to_internal(params));
    Ok(branch_term_internal(b, branch_prefactor(params), &z) / (params.hbar * params.hbar))
}

/// Momentum-diffusion rate from SI (kg^2 m^2 s^-3) to internal units per second.
pub(crate) fn diffusion_to_internal(rate: f64, params: &Params) -> f64 {
    let pu = params.units.momentum_unit;
    rate / (pu * pu)
}

/// Closed-form branch `j` under stepwise forces and momentum diffusion,
/// internal units. `dt` is the accumulated diffusion `D t` in internal units.
#[inline]
pub(crate) fn diffusion_branch_internal(
    b: &BranchInternal,
    norm_n: f64,
    t: f64,
    dt: f64,
    z: &Z4,
) -> f64 {
    const ALPHA: f64 = 2.0;
    const BETA: f64 = 0.5;
    let alpha_t = ALPHA / (1.0 + 2.0 * ALPHA * dt);
    let ratio = alpha_t / ALPHA;
    let kick = b.force_rate * t;
    let (q1, q2) = (z[2] - kick, z[3] + kick);
    let dx1 = z[0] - b.x0;
    let dx2 = z[1] - b.y0;
    let position = BETA / PI * (-BETA * (dx1 * dx1 + dx2 * dx2)).exp();
    let damping = dt * alpha_t * (b.k1 * b.k1 + b.k2 * b.k2) / (2.0 * ALPHA);
    let mut momentum =
        4.0 * alpha_t / (norm_n * PI) * (-alpha_t * (q1 * q1 + q2 * q2) - damping).exp() * b.weight;
    if b.k1 != 0.0 {
        momentum *= (ratio * b.k1 * q1).cos();
    }
    if b.k2 != 0.0 {
        momentum *= (ratio * b.k2 * q2).cos();
    }
    position * momentum
}

/// Branch `j` under stepwise forces plus momentum diffusion at rate
/// `rate` (kg^2 m^2 / s^3), SI units.
pub fn diffusion_branch_value(
    j: usize,
    pt: &PhasePoint,
    t: f64,
    rate: f64,
    params: &Params,
    branches: &BranchSet,
) -> Result<f64> {
    check_index(j)?;
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "diffusion rate {rate} is negative"
        )));
    }
    let dt = diffusion_to_internal(rate, params) * t;
    let z = pt.to_internal(params);
    Ok(
        diffusion_branch_internal(branches.internal(j), params.norm_n, t, dt, &z)
            / (params.hbar * params.hbar),
    )
}
