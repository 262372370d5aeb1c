//! The initial two-particle Wigner function and its nine-branch decomposition.
//!
//! Particle 1 sits around `-d/2` and particle 2 around `+d/2`. Each particle
//! is an even superposition of two Gaussians separated by `delta_x`, so the
//! product Wigner function expands into nine Gaussian x cosine branch terms.
//! Branches are kept symbolically (centers, wavenumbers, divisors); every
//! evolution acts on these parameters rather than on grid samples.

use std::f64::consts::PI;

use nalgebra::Vector4;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;

/// Phase-space point in internal units, ordered `(x1, x2, p1, p2)`.
pub type Z4 = Vector4<f64>;

/// A phase-space point in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x1: f64,
    pub x2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub fn new(x1: f64, x2: f64, p1: f64, p2: f64) -> Self {
        Self { x1, x2, p1, p2 }
    }

    pub fn to_internal(&self, params: &Params) -> Z4 {
        let u = &params.units;
        Z4::new(
            u.length_to_internal(self.x1),
            u.length_to_internal(self.x2),
            u.momentum_to_internal(self.p1),
            u.momentum_to_internal(self.p2),
        )
    }

    pub fn from_internal(z: &Z4, params: &Params) -> Self {
        let u = &params.units;
        Self {
            x1: u.length_to_si(z[0]),
            x2: u.length_to_si(z[1]),
            p1: u.momentum_to_si(z[2]),
            p2: u.momentum_to_si(z[3]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.p1.is_finite() && self.p2.is_finite()
    }
}

/// One branch `w_j` of the initial Wigner function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    /// 1-based branch index.
    pub index: usize,
    /// Particle-1 position center (m).
    pub x0: f64,
    /// Particle-2 position center (m).
    pub y0: f64,
    /// Cosine wavenumber in p1 (1 / (kg m/s)); either 0 or delta_x / hbar.
    pub gamma1: f64,
    /// Cosine wavenumber in p2.
    pub gamma2: f64,
    pub div1: f64,
    pub div2: f64,
    /// Branch distance |x0 - y0| (m).
    pub xbar: f64,
    /// Stepwise force G m^2 / xbar^2 (N).
    pub force: f64,
}

/// The same branch data in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BranchInternal {
    pub x0: f64,
    pub y0: f64,
    pub k1: f64,
    pub k2: f64,
    /// 1 / (div1 div2)
    pub weight: f64,
    /// Momentum gained by particle 1 per second, internal units.
    pub force_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchSet {
    branches: [Branch; 9],
    internal: [BranchInternal; 9],
}

const DIV1: [f64; 9] = [2., 2., 2., 2., 2., 2., 1., 1., 1.];
const DIV2: [f64; 9] = [2., 2., 1., 2., 2., 1., 2., 2., 1.];
const FRINGE1: [bool; 9] = [false, false, false, false, false, false, true, true, true];
const FRINGE2: [bool; 9] = [false, false, true, false, false, true, false, false, true];

impl BranchSet {
    pub fn new(params: &Params) -> Self {
        let d = params.d;
        let dx = params.delta_x;
        let x0 = [
            -(d + dx) / 2.0,
            -(d + dx) / 2.0,
            -(d + dx) / 2.0,
            -(d - dx) / 2.0,
            -(d - dx) / 2.0,
            -(d - dx) / 2.0,
            -d / 2.0,
            -d / 2.0,
            -d / 2.0,
        ];
        let y0_cycle = [(d - dx) / 2.0, (d + dx) / 2.0, d / 2.0];
        let k = dx / params.hbar;
        let branches: [Branch; 9] = std::array::from_fn(|i| {
            let y0 = y0_cycle[i % 3];
            let xbar = (x0[i] - y0).abs();
            Branch {
                index: i + 1,
                x0: x0[i],
                y0,
                gamma1: if FRINGE1[i] { k } else { 0.0 },
                gamma2: if FRINGE2[i] { k } else { 0.0 },
                div1: DIV1[i],
                div2: DIV2[i],
                xbar,
                force: params.kappa / (xbar * xbar),
            }
        });
        let u = params.units;
        let internal = branches.map(|b| BranchInternal {
            x0: u.length_to_internal(b.x0),
            y0: u.length_to_internal(b.y0),
            k1: b.gamma1 * u.momentum_unit,
            k2: b.gamma2 * u.momentum_unit,
            weight: 1.0 / (b.div1 * b.div2),
            force_rate: u.force_to_internal(b.force),
        });
        Self { branches, internal }
    }

    /// Branch `j` with `1 <= j <= 9`.
    pub fn get(&self, j: usize) -> Result<&Branch> {
        check_index(j)?;
        Ok(&self.branches[j - 1])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Branch> {
        self.branches.iter()
    }

    pub fn forces(&self) -> [f64; 9] {
        self.branches.map(|b| b.force)
    }

    pub(crate) fn internal(&self, j: usize) -> &BranchInternal {
        &self.internal[j - 1]
    }

    pub(crate) fn internal_all(&self) -> &[BranchInternal; 9] {
        &self.internal
    }
}

pub(crate) fn check_index(j: usize) -> Result<()> {
    if (1..=9).contains(&j) {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange(j))
    }
}

/// Normalisation of a branch term in internal units, 4 / (N pi^2).
#[inline]
pub(crate) fn branch_prefactor(params: &Params) -> f64 {
    4.0 / (params.norm_n * PI * PI)
}

/// Branch term in internal units (value times hbar^2).
#[inline]
pub(crate) fn branch_term_internal(b: &BranchInternal, prefactor: f64, z: &Z4) -> f64 {
    let dx1 = z[0] - b.x0;
    let dx2 = z[1] - b.y0;
    let expo = -0.5 * (dx1 * dx1 + dx2 * dx2) - 2.0 * (z[2] * z[2] + z[3] * z[3]);
    let mut v = prefactor * b.weight * expo.exp();
    if b.k1 != 0.0 {
        v *= (b.k1 * z[2]).cos();
    }
    if b.k2 != 0.0 {
        v *= (b.k2 * z[3]).cos();
    }
    v
}

/// Single-particle Wigner function of the two-arm superposition, internal
/// units (value times hbar). `q` is measured from the midpoint of the arms.
#[inline]
pub(crate) fn single_particle_internal(q: f64, p: f64, params: &Params) -> f64 {
    let half = 0.5 * params.delta_x_int();
    let lobes = (-0.5 * (q + half) * (q + half)).exp()
        + (-0.5 * (q - half) * (q - half)).exp()
        + 2.0 * (-0.5 * q * q).exp() * (2.0 * half * p).cos();
    (-2.0 * p * p).exp() * lobes / (PI * params.norm_n.sqrt())
}

/// Wigner function of one particle in SI units (1 / (J s)), with `q` the
/// position relative to the midpoint between the arms.
pub fn single_particle_wigner(q: f64, p: f64, params: &Params) -> f64 {
    let u = &params.units;
    single_particle_internal(u.length_to_internal(q), u.momentum_to_internal(p), params)
        / params.hbar
}

/// Branch term `w_j` at an SI phase-space point (1 / (J s)^2).
pub fn branch_term(
    j: usize,
    pt: &PhasePoint,
    params: &Params,
    branches: &BranchSet,
) -> Result<f64> {
    check_index(j)?;
    let z = pt.to_internal(params);
    Ok(
        branch_term_internal(branches.internal(j), branch_prefactor(params), &z)
            / (params.hbar * params.hbar),
    )
}

/// Initial two-particle Wigner function as the product of the
/// single-particle functions centered at `-d/2` and `+d/2`.
pub fn initial_wigner(pt: &PhasePoint, params: &Params) -> f64 {
    let z = pt.to_internal(params);
    initial_wigner_internal(&z, params) / (params.hbar * params.hbar)
}

/// The same function evaluated as the sum of the nine branch terms.
pub fn initial_wigner_branch_sum(pt: &PhasePoint, params: &Params, branches: &BranchSet) -> f64 {
    let z = pt.to_internal(params);
    let pref = branch_prefactor(params);
    let sum: f64 = branches
        .internal_all()
        .iter()
        .map(|b| branch_term_internal(b, pref, &z))
        .sum();
    sum / (params.hbar * params.hbar)
}

pub(crate) fn initial_wigner_internal(z: &Z4, params: &Params) -> f64 {
    let half_d = 0.5 * params.d_int();
    single_particle_internal(z[0] + half_d, z[2], params)
        * single_particle_internal(z[1] - half_d, z[3], params)
}
