//! Newtonian relative potential, its two quadratic approximations and the
//! stepwise-constant force table.
//!
//! All potentials are functions of the relative coordinate
//! `x_rel = (x2 - x1 - d) / sqrt(2)` in metres and return joules.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::wigner::BranchSet;

/// `c0 + c1 x + c2 x^2` over `x_rel`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticPotential {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl QuadraticPotential {
    /// Second-order Taylor expansion of the Newtonian potential at `x_rel = 0`.
    pub fn taylor(params: &Params) -> Self {
        let (k, d) = (params.kappa, params.d);
        Self {
            c0: -k / d,
            c1: SQRT_2 * k / (d * d),
            c2: -2.0 * k / (d * d * d),
        }
    }

    /// The quadratic through the Newtonian potential at `x_rel = 0` and
    /// `x_rel = +-delta_x / sqrt(2)`.
    pub fn fit(params: &Params) -> Self {
        let (k, d, dx) = (params.kappa, params.d, params.delta_x);
        let span = d * d - dx * dx;
        Self {
            c0: -k / d,
            c1: SQRT_2 * k / span,
            c2: -2.0 * k / (d * span),
        }
    }

    #[inline]
    pub fn value(&self, x_rel: f64) -> f64 {
        self.c0 + x_rel * (self.c1 + x_rel * self.c2)
    }

    #[inline]
    pub fn derivative(&self, x_rel: f64) -> f64 {
        self.c1 + 2.0 * self.c2 * x_rel
    }

    /// Stationary point `-c1 / (2 c2)`.
    pub fn stationary_point(&self) -> f64 {
        -self.c1 / (2.0 * self.c2)
    }
}

fn separation(x_rel: f64, params: &Params) -> Result<f64> {
    let s = params.d + SQRT_2 * x_rel;
    if s > 0.0 {
        Ok(s)
    } else {
        Err(Error::DomainError { x_rel })
    }
}

/// `-kappa / (d + sqrt(2) x_rel)`.
pub fn v_newton(x_rel: f64, params: &Params) -> Result<f64> {
    Ok(-params.kappa / separation(x_rel, params)?)
}

/// Derivative of the Newtonian potential, `sqrt(2) kappa / (d + sqrt(2) x_rel)^2`.
pub fn dv_newton(x_rel: f64, params: &Params) -> Result<f64> {
    let s = separation(x_rel, params)?;
    Ok(SQRT_2 * params.kappa / (s * s))
}

/// Partial sum of the geometric series of `v_newton` up to and including
/// `x_rel^order`. Converges for `|x_rel| < d / sqrt(2)`.
pub fn v_newton_series(x_rel: f64, order: usize, params: &Params) -> f64 {
    let ratio = -SQRT_2 * x_rel / params.d;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..=order {
        sum += term;
        term *= ratio;
    }
    -params.kappa / params.d * sum
}

pub fn v_taylor(x_rel: f64, params: &Params) -> f64 {
    QuadraticPotential::taylor(params).value(x_rel)
}

pub fn dv_taylor(x_rel: f64, params: &Params) -> f64 {
    QuadraticPotential::taylor(params).derivative(x_rel)
}

pub fn v_fit(x_rel: f64, params: &Params) -> f64 {
    QuadraticPotential::fit(params).value(x_rel)
}

pub fn dv_fit(x_rel: f64, params: &Params) -> f64 {
    QuadraticPotential::fit(params).derivative(x_rel)
}

/// `kappa / xbar_j^2` for each branch. Particle 1 is pushed towards `+x`
/// (`p1 - F t` in the shifted argument) and particle 2 towards `-x`.
pub fn stepwise_forces(branches: &BranchSet, params: &Params) -> [f64; 9] {
    let mut out = [0.0; 9];
    for (slot, b) in out.iter_mut().zip(branches.iter()) {
        *slot = params.kappa / (b.xbar * b.xbar);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawParams;

    fn p() -> Params {
        Params::standard()
    }

    #[test]
    fn newton_values() {
        let p = p();
        assert_eq!(v_newton(0.0, &p).unwrap(), -p.kappa / p.d);
        let v = v_newton(p.delta_x / SQRT_2, &p).unwrap();
        let want = -p.kappa / (p.d + p.delta_x);
        assert!((v - want).abs() <= 1e-15 * want.abs());
        assert!(matches!(
            v_newton(-0.75 * p.d, &p),
            Err(Error::DomainError { .. })
        ));
        assert!(dv_newton(-p.d, &p).is_err());
    }

    #[test]
    fn taylor_anchor_and_fixed_point() {
        let p = p();
        assert_eq!(v_taylor(0.0, &p), v_newton(0.0, &p).unwrap());
        let xs = p.d / (2.0 * SQRT_2);
        assert!(dv_taylor(xs, &p).abs() <= 1e-15 * dv_taylor(0.0, &p));
        let q = QuadraticPotential::taylor(&p);
        assert!((q.stationary_point() - xs).abs() <= 1e-15 * xs);
        assert!(q.c2 < 0.0 && QuadraticPotential::fit(&p).c2 < 0.0);
    }

    #[test]
    fn taylor_gap_at_arm_offset() {
        let p = p();
        let x = p.delta_x / SQRT_2;
        let gap = v_taylor(x, &p) - v_newton(x, &p).unwrap();
        // v_newton - v_taylor = -kappa/d * sum_{n>=3} r^n with r = -delta_x/d
        let r = -p.delta_x / p.d;
        let remainder = -p.kappa / p.d * r.powi(3) / (1.0 - r);
        assert!(gap.abs() > 0.0);
        assert!((gap + remainder).abs() <= 1e-12 * remainder.abs());
    }

    #[test]
    fn fit_interpolates_newton() {
        let p = p();
        for x in [0.0, p.delta_x / SQRT_2, -p.delta_x / SQRT_2] {
            let n = v_newton(x, &p).unwrap();
            assert!(
                (v_fit(x, &p) - n).abs() <= 4.0 * f64::EPSILON * n.abs(),
                "x = {x}"
            );
        }
        assert!(
            (v_taylor(p.delta_x / SQRT_2, &p) - v_newton(p.delta_x / SQRT_2, &p).unwrap()).abs()
                > 0.0
        );
    }

    #[test]
    fn fit_approaches_taylor_for_small_arms() {
        let raw = RawParams {
            delta_x: 4.5e-6,
            sigma: 1e-6,
            ..RawParams::default()
        };
        let p = Params::derive(raw).unwrap();
        let t = QuadraticPotential::taylor(&p);
        let f = QuadraticPotential::fit(&p);
        let bound = 2.0 * (p.delta_x / p.d).powi(2) + 1e-12;
        assert!(((f.c1 - t.c1) / t.c1).abs() <= bound);
        assert!(((f.c2 - t.c2) / t.c2).abs() <= bound);
        assert_eq!(f.c0, t.c0);
    }

    #[test]
    fn fit_derivative_beats_taylor() {
        let p = p();
        let a = p.delta_x / SQRT_2;
        let (mut err_t, mut err_f) = (0.0f64, 0.0f64);
        for i in 0..=1000 {
            let x = -a + 2.0 * a * i as f64 / 1000.0;
            let exact = dv_newton(x, &p).unwrap();
            err_t = err_t.max((dv_taylor(x, &p) - exact).abs());
            err_f = err_f.max((dv_fit(x, &p) - exact).abs());
        }
        assert!(err_f < err_t, "fit {err_f} taylor {err_t}");
    }

    #[test]
    fn series_converges() {
        let p = p();
        let a = 0.8 * p.delta_x / SQRT_2;
        for x in [-a, -a / 2.0, 0.0, a / 3.0, a] {
            let exact = v_newton(x, &p).unwrap();
            let s10 = v_newton_series(x, 10, &p);
            let s20 = v_newton_series(x, 20, &p);
            assert!((s20 - exact).abs() < (s10 - exact).abs() || s10 == exact);
            // |r|^11 / (1 - |r|) with |r| <= 0.8 * 0.556
            assert!((s10 - exact).abs() <= 5e-4 * exact.abs());
        }
    }

    #[test]
    fn stepwise_force_values() {
        let p = Params::derive(RawParams {
            hbar: 1.0546e-34,
            g: 6.674e-11,
            ..RawParams::default()
        })
        .unwrap();
        let b = BranchSet::new(&p);
        let f = stepwise_forces(&b, &p);
        assert!((f[0] - 6.674e-39 / (4.5e-4f64).powi(2)).abs() < 1e-45);
        assert!((f[0] - 3.296e-32).abs() < 1e-35);
        // j = 4, xbar = 200 um
        assert!((f[3] - 1.6685e-31).abs() < 1e-34);
        let kick = f[3] * 2.5 / (p.hbar / p.delta_x);
        assert!((kick - 0.989).abs() < 2e-3, "{kick}");
        // ordering by distance
        let by_xbar = [f[3], f[5], f[0], f[2], f[1]];
        assert!(by_xbar.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(f, b.forces());
    }
}
