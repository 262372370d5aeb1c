//! Relative-coordinate trajectories: RK4 on the Newtonian equations of
//! motion, the closed-form quadratic flows and the constant-force model.
//!
//! Integration runs on deviations from the starting point in internal units
//! so that displacements of order `1e-9 sigma` survive rounding.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::dynamics::RelativeQuadratic;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::potentials::QuadraticPotential;

/// Default RK4 step in seconds.
pub const DEFAULT_STEP: f64 = 1e-3;

/// One sample of a relative trajectory, SI units. `dx_rel` and `dp_rel` are
/// measured from the starting point and carry full precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeSample {
    pub t: f64,
    pub x_rel: f64,
    pub p_rel: f64,
    pub dx_rel: f64,
    pub dp_rel: f64,
}

struct Rhs {
    nu: f64,
    x0: f64,
    p0: f64,
    d: f64,
    /// `sqrt(2) kappa sigma / hbar`, with separation measured in sigma.
    strength: f64,
    floor: f64,
}

impl Rhs {
    fn new(x_rel0: f64, p_rel0: f64, params: &Params) -> Self {
        let u = params.units;
        let d = params.d_int();
        Self {
            nu: params.drift_rate(),
            x0: u.length_to_internal(x_rel0),
            p0: u.momentum_to_internal(p_rel0),
            d,
            strength: SQRT_2 * params.kappa / (params.sigma * params.hbar),
            floor: 0.1 * d,
        }
    }

    fn separation(&self, u: f64) -> f64 {
        self.d + SQRT_2 * (self.x0 + u)
    }

    /// Derivatives of `(u, q)` where `x = x0 + u`, `p = p0 + q`.
    #[inline]
    fn eval(&self, u: f64, q: f64) -> (f64, f64) {
        let s = self.separation(u);
        (self.nu * (self.p0 + q), -self.strength / (s * s))
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument(
            "time grid must be finite and non-negative".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "time grid must be non-decreasing".into(),
        ));
    }
    Ok(())
}

fn sample(t: f64, u: f64, q: f64, rhs: &Rhs, params: &Params) -> RelativeSample {
    let units = params.units;
    RelativeSample {
        t,
        x_rel: units.length_to_si(rhs.x0 + u),
        p_rel: units.momentum_to_si(rhs.p0 + q),
        dx_rel: units.length_to_si(u),
        dp_rel: units.momentum_to_si(q),
    }
}

/// Classic fixed-step RK4 from `t = 0`, sampled on `t_grid`. Steps are
/// shortened where needed to land on each sample time.
pub fn rk4_relative_trajectory(
    x_rel0: f64,
    p_rel0: f64,
    t_grid: &[f64],
    step: f64,
    params: &Params,
) -> Result<Vec<RelativeSample>> {
    check_grid(t_grid)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    let rhs = Rhs::new(x_rel0, p_rel0, params);
    if rhs.separation(0.0) <= rhs.floor {
        return Err(Error::SingularityApproached {
            t: 0.0,
            separation: rhs.separation(0.0) * params.sigma,
        });
    }
    let (mut t, mut u, mut q) = (0.0f64, 0.0f64, 0.0f64);
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let span = target - t;
        let n = (span / step).ceil().max(0.0) as usize;
        let h = if n > 0 { span / n as f64 } else { 0.0 };
        for _ in 0..n {
            let (k1u, k1q) = rhs.eval(u, q);
            let (k2u, k2q) = rhs.eval(u + 0.5 * h * k1u, q + 0.5 * h * k1q);
            let (k3u, k3q) = rhs.eval(u + 0.5 * h * k2u, q + 0.5 * h * k2q);
            let (k4u, k4q) = rhs.eval(u + h * k3u, q + h * k3q);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            t += h;
            let s = rhs.separation(u);
            if s.is_nan() || s <= rhs.floor {
                return Err(Error::SingularityApproached {
                    t,
                    separation: s * params.sigma,
                });
            }
        }
        t = target;
        out.push(sample(t, u, q, &rhs, params));
    }
    Ok(out)
}

/// RK4 solution of the Newtonian relative motion. Starts from
/// [`DEFAULT_STEP`] and halves the step until halving moves the final
/// `p_rel` by less than `1e-3 hbar / delta_x`.
pub fn exact_relative_trajectory(
    x_rel0: f64,
    p_rel0: f64,
    t_grid: &[f64],
    params: &Params,
) -> Result<Vec<RelativeSample>> {
    let tol = 1e-3 * params.fringe_momentum();
    let mut step = DEFAULT_STEP;
    let mut coarse = rk4_relative_trajectory(x_rel0, p_rel0, t_grid, step, params)?;
    for _ in 0..20 {
        step *= 0.5;
        let fine = rk4_relative_trajectory(x_rel0, p_rel0, t_grid, step, params)?;
        let last = |s: &[RelativeSample]| s.last().map(|r| r.dp_rel).unwrap_or(0.0);
        if (last(&fine) - last(&coarse)).abs() < tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::InvalidArgument(
        "RK4 step refinement did not converge".into(),
    ))
}

/// Closed-form trajectory under a quadratic relative potential.
pub fn quadratic_relative_trajectory(
    pot: &QuadraticPotential,
    x_rel0: f64,
    p_rel0: f64,
    t_grid: &[f64],
    params: &Params,
) -> Result<Vec<RelativeSample>> {
    check_grid(t_grid)?;
    let rel = RelativeQuadratic::new(pot, params);
    let rhs = Rhs::new(x_rel0, p_rel0, params);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let (u, q) = rel.displacement(rhs.x0, rhs.p0, t);
            sample(t, u, q, &rhs, params)
        })
        .collect())
}

/// Trajectory under a constant pair force `force` (N) attracting the two
/// masses: `p_rel` decreases at `sqrt(2) force`.
pub fn stepwise_relative_trajectory(
    force: f64,
    x_rel0: f64,
    p_rel0: f64,
    t_grid: &[f64],
    params: &Params,
) -> Result<Vec<RelativeSample>> {
    check_grid(t_grid)?;
    let rhs = Rhs::new(x_rel0, p_rel0, params);
    let f = params.units.force_to_internal(SQRT_2 * force);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let q = -f * t;
            let u = rhs.nu * (rhs.p0 * t - 0.5 * f * t * t);
            sample(t, u, q, &rhs, params)
        })
        .collect())
}

/// `p^2 / 2m + V_N` at a sample, joules.
pub fn newton_energy(s: &RelativeSample, params: &Params) -> Result<f64> {
    Ok(s.p_rel * s.p_rel / (2.0 * params.m) + crate::potentials::v_newton(s.x_rel, params)?)
}

/// Uniform closed grid `0..=t_max` with `n` samples.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wigner::BranchSet;

    fn p() -> Params {
        Params::standard()
    }

    #[test]
    fn energy_is_conserved() {
        let p = p();
        let grid = uniform_grid(10.0, 11);
        let traj = exact_relative_trajectory(0.0, 0.0, &grid, &p).unwrap();
        let e0 = newton_energy(&traj[0], &p).unwrap();
        for s in &traj {
            let e = newton_energy(s, &p).unwrap();
            assert!((e - e0).abs() <= 1e-10 * e0.abs());
        }
        // at long times the kinetic term is no longer negligible
        let grid = uniform_grid(2e6, 5);
        let traj = rk4_relative_trajectory(0.0, 0.0, &grid, 2e3, &p).unwrap();
        let e0 = newton_energy(&traj[0], &p).unwrap();
        let kin = traj[4].p_rel.powi(2) / (2.0 * p.m);
        assert!(kin > 1e-6 * e0.abs());
        for s in &traj {
            assert!((newton_energy(s, &p).unwrap() - e0).abs() <= 1e-10 * e0.abs());
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let p = p();
        let grid = [2e6];
        let end = |n: usize| {
            rk4_relative_trajectory(0.0, 0.0, &grid, 2e6 / n as f64, &p).unwrap()[0].dp_rel
        };
        let (a, b, c) = (end(10), end(20), end(40));
        let ratio = (a - b) / (b - c);
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk4_agrees_with_quadratic_flow_near_the_origin() {
        // over 10 s the separation barely changes, so Taylor and exact kicks
        // differ only at third order in x_rel / d
        let p = p();
        let grid = uniform_grid(10.0, 6);
        let exact = exact_relative_trajectory(0.0, 0.0, &grid, &p).unwrap();
        let taylor =
            quadratic_relative_trajectory(&QuadraticPotential::taylor(&p), 0.0, 0.0, &grid, &p)
                .unwrap();
        for (e, t) in exact.iter().zip(&taylor) {
            assert!((e.dp_rel - t.dp_rel).abs() <= 1e-9 * e.dp_rel.abs().max(1e-40));
            assert!((e.dx_rel - t.dx_rel).abs() <= 1e-6 * e.dx_rel.abs().max(1e-40));
        }
    }

    #[test]
    fn worst_case_start_barely_moves() {
        let p = p();
        let x0 = -(p.delta_x + 2.0 * p.sigma) / SQRT_2;
        let p0 = -p.hbar / (SQRT_2 * p.sigma);
        let grid = uniform_grid(10.0, 101);
        let traj = exact_relative_trajectory(x0, p0, &grid, &p).unwrap();
        let max = traj.iter().map(|s| s.dx_rel.abs()).fold(0.0, f64::max) / p.sigma;
        assert!(max > 1e-11 && max < 1e-8, "{max}");
        assert_eq!(traj[0].dx_rel, 0.0);
    }

    #[test]
    fn stepwise_matches_constant_force_kinematics() {
        let p = p();
        let b = BranchSet::new(&p);
        let f = b.forces()[0];
        let traj = stepwise_relative_trajectory(f, 0.0, 0.0, &[2.5], &p).unwrap();
        let want = -SQRT_2 * f * 2.5;
        assert!((traj[0].dp_rel - want).abs() <= 1e-13 * want.abs());
        let wantx = -SQRT_2 * f / (2.0 * p.m) * 2.5 * 2.5;
        assert!((traj[0].dx_rel - wantx).abs() <= 1e-12 * wantx.abs());
    }

    #[test]
    fn singularity_is_reported() {
        let p = p();
        let x0 = -0.6 * p.d;
        let p0 = -1e8 * p.hbar / p.sigma;
        let err = exact_relative_trajectory(x0, p0, &[1e3], &p).unwrap_err();
        assert!(matches!(err, Error::SingularityApproached { .. }), "{err}");
        assert!(rk4_relative_trajectory(-0.7 * p.d, 0.0, &[1.0], 1e-3, &p).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        let p = p();
        assert!(rk4_relative_trajectory(0.0, 0.0, &[], 1e-3, &p).is_err());
        assert!(rk4_relative_trajectory(0.0, 0.0, &[1.0, 0.5], 1e-3, &p).is_err());
        assert!(rk4_relative_trajectory(0.0, 0.0, &[1.0], 0.0, &p).is_err());
    }
}
