//! Experiment parameters, derived constants and the internal unit system.
//!
//! Everything downstream works in internal units where lengths are measured
//! in `sigma` and momenta in `hbar / sigma`. Time stays in seconds. In these
//! units every Gaussian exponent of the initial state is O(1), whereas SI
//! momenta sit around 1e-30 kg m/s.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_HBAR: f64 = 1.054571817e-34;
pub const DEFAULT_G: f64 = 6.67430e-11;

/// Raw SI inputs before derivation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub m: f64,
    pub delta_x: f64,
    pub d: f64,
    pub sigma: f64,
    pub hbar: f64,
    pub g: f64,
}

impl Default for RawParams {
    /// m = 1e-14 kg, arm separation 250 um, mean distance 450 um, width 10 um.
    fn default() -> Self {
        Self {
            m: 1e-14,
            delta_x: 2.5e-4,
            d: 4.5e-4,
            sigma: 1e-5,
            hbar: DEFAULT_HBAR,
            g: DEFAULT_G,
        }
    }
}

const KEYS: [&str; 6] = ["m_kg", "delta_x_m", "d_m", "sigma_m", "hbar_js", "G_si"];

impl RawParams {
    /// Parses the flat `key = value` parameter format. Missing keys keep
    /// their default value; unknown or repeated keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        let mut seen = [false; KEYS.len()];
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::ParamFile {
                line: line_no,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::ParamFile {
                    line: line_no,
                    message: format!("unknown key `{key}` (expected one of {})", KEYS.join(", ")),
                })?;
            if seen[slot] {
                return Err(Error::ParamFile {
                    line: line_no,
                    message: format!("key `{key}` given twice"),
                });
            }
            seen[slot] = true;
            let parsed: f64 = value.parse().map_err(|_| Error::ParamFile {
                line: line_no,
                message: format!("cannot parse `{value}` as a number"),
            })?;
            *raw.slot_mut(slot) = parsed;
        }
        Ok(raw)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Renders the parameters in the same format `parse` accepts.
    pub fn to_param_file(&self) -> String {
        let mut out = String::new();
        for (slot, key) in KEYS.iter().enumerate() {
            let _ = writeln!(out, "{key} = {:e}", self.slot(slot));
        }
        out
    }

    fn slot(&self, slot: usize) -> f64 {
        match slot {
            0 => self.m,
            1 => self.delta_x,
            2 => self.d,
            3 => self.sigma,
            4 => self.hbar,
            _ => self.g,
        }
    }

    fn slot_mut(&mut self, slot: usize) -> &mut f64 {
        match slot {
            0 => &mut self.m,
            1 => &mut self.delta_x,
            2 => &mut self.d,
            3 => &mut self.sigma,
            4 => &mut self.hbar,
            _ => &mut self.g,
        }
    }
}

/// Conversion between SI and the internal units (length `sigma`, momentum
/// `hbar / sigma`, action `hbar`, time in seconds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitSystem {
    pub length_unit: f64,
    pub momentum_unit: f64,
    pub action_unit: f64,
}

impl UnitSystem {
    pub fn new(sigma: f64, hbar: f64) -> Self {
        Self {
            length_unit: sigma,
            momentum_unit: hbar / sigma,
            action_unit: hbar,
        }
    }

    #[inline]
    pub fn length_to_internal(&self, x: f64) -> f64 {
        x / self.length_unit
    }

    #[inline]
    pub fn length_to_si(&self, x: f64) -> f64 {
        x * self.length_unit
    }

    #[inline]
    pub fn momentum_to_internal(&self, p: f64) -> f64 {
        p / self.momentum_unit
    }

    #[inline]
    pub fn momentum_to_si(&self, p: f64) -> f64 {
        p * self.momentum_unit
    }

    /// A force in newtons expressed as internal momentum gained per second.
    #[inline]
    pub fn force_to_internal(&self, f: f64) -> f64 {
        f / self.momentum_unit
    }
}

/// Validated parameters plus every derived constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub m: f64,
    pub delta_x: f64,
    pub d: f64,
    pub sigma: f64,
    pub hbar: f64,
    pub g: f64,
    /// G m^2 (J m).
    pub kappa: f64,
    /// 2 sigma^2 / hbar^2, the momentum-Gaussian exponent.
    pub alpha: f64,
    /// 1 / (2 sigma^2), the position-Gaussian exponent.
    pub beta: f64,
    /// 4 (1 + exp(-delta_x^2 / 8 sigma^2))^2.
    pub norm_n: f64,
    pub units: UnitSystem,
}

impl Params {
    pub fn derive(raw: RawParams) -> Result<Self> {
        let fields = [
            ("m", raw.m),
            ("delta_x", raw.delta_x),
            ("d", raw.d),
            ("sigma", raw.sigma),
            ("hbar", raw.hbar),
            ("G", raw.g),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositive { name, value });
            }
        }
        if !(raw.sigma < raw.delta_x && raw.delta_x < raw.d) {
            return Err(Error::OrderingViolation {
                sigma: raw.sigma,
                delta_x: raw.delta_x,
                d: raw.d,
            });
        }
        let overlap = (-raw.delta_x * raw.delta_x / (8.0 * raw.sigma * raw.sigma)).exp();
        Ok(Self {
            m: raw.m,
            delta_x: raw.delta_x,
            d: raw.d,
            sigma: raw.sigma,
            hbar: raw.hbar,
            g: raw.g,
            kappa: raw.g * raw.m * raw.m,
            alpha: 2.0 * raw.sigma * raw.sigma / (raw.hbar * raw.hbar),
            beta: 1.0 / (2.0 * raw.sigma * raw.sigma),
            norm_n: 4.0 * (1.0 + overlap) * (1.0 + overlap),
            units: UnitSystem::new(raw.sigma, raw.hbar),
        })
    }

    pub fn standard() -> Self {
        Self::derive(RawParams::default()).expect("default parameters are valid")
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            m: self.m,
            delta_x: self.delta_x,
            d: self.d,
            sigma: self.sigma,
            hbar: self.hbar,
            g: self.g,
        }
    }

    /// The fringe momentum scale hbar / delta_x (kg m/s).
    pub fn fringe_momentum(&self) -> f64 {
        self.hbar / self.delta_x
    }

    /// Position drift rate hbar / (m sigma^2) in 1/s: internal position
    /// change per second per unit internal momentum.
    pub fn drift_rate(&self) -> f64 {
        self.hbar / (self.m * self.sigma * self.sigma)
    }

    // Internal-unit shorthands used throughout the dynamics.

    pub(crate) fn d_int(&self) -> f64 {
        self.d / self.sigma
    }

    pub(crate) fn delta_x_int(&self) -> f64 {
        self.delta_x / self.sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_for_default_values() {
        let raw = RawParams {
            hbar: 1.0546e-34,
            g: 6.674e-11,
            ..RawParams::default()
        };
        let p = Params::derive(raw).unwrap();
        assert!((p.kappa - 6.674e-39).abs() <= 1e-15 * 6.674e-39);
    }

    #[test]
    fn norm_is_four_when_arms_are_well_separated() {
        // delta_x^2 / 8 sigma^2 = 78.125, exp(-78.125) ~ 1e-34
        let p = Params::standard();
        assert!(((p.norm_n - 4.0) / 4.0).abs() <= 1e-30);
        let exponent: f64 = p.delta_x * p.delta_x / (8.0 * p.sigma * p.sigma);
        assert!((exponent - 78.125).abs() < 1e-12);
    }

    #[test]
    fn derived_closed_forms() {
        let raw = RawParams {
            sigma: 1e-4,
            ..RawParams::default()
        };
        let p = Params::derive(raw).unwrap();
        let e = (-(2.5f64 * 2.5) / 8.0).exp();
        assert!((p.norm_n - 4.0 * (1.0 + e).powi(2)).abs() <= 4.0 * f64::EPSILON * p.norm_n);
        assert_eq!(p.alpha, 2.0 * 1e-8 / (DEFAULT_HBAR * DEFAULT_HBAR));
        assert_eq!(p.beta, 1.0 / 2e-8);
    }

    #[test]
    fn ordering_is_enforced() {
        let raw = RawParams {
            sigma: 3e-4,
            ..RawParams::default()
        };
        assert!(matches!(
            Params::derive(raw),
            Err(Error::OrderingViolation { .. })
        ));
        let raw = RawParams {
            delta_x: 5e-4,
            ..RawParams::default()
        };
        assert!(matches!(
            Params::derive(raw),
            Err(Error::OrderingViolation { .. })
        ));
    }

    #[test]
    fn non_positive_is_rejected() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let raw = RawParams {
                m: bad,
                ..RawParams::default()
            };
            assert!(matches!(
                Params::derive(raw),
                Err(Error::NonPositive { name: "m", .. })
            ));
        }
    }

    #[test]
    fn parse_param_file() {
        let text = "# geometry\nm_kg = 2e-14\n\n d_m=5e-4   # wider\nG_si = 6.674e-11\n";
        let raw = RawParams::parse(text).unwrap();
        assert_eq!(raw.m, 2e-14);
        assert_eq!(raw.d, 5e-4);
        assert_eq!(raw.g, 6.674e-11);
        assert_eq!(raw.sigma, RawParams::default().sigma);
    }

    #[test]
    fn parse_rejects_unknown_and_duplicate_keys() {
        assert!(matches!(
            RawParams::parse("mass = 1e-14"),
            Err(Error::ParamFile { line: 1, .. })
        ));
        assert!(matches!(
            RawParams::parse("m_kg = 1\n# c\nm_kg = 2"),
            Err(Error::ParamFile { line: 3, .. })
        ));
        assert!(matches!(
            RawParams::parse("m_kg 1e-14"),
            Err(Error::ParamFile { .. })
        ));
        assert!(matches!(
            RawParams::parse("m_kg = heavy"),
            Err(Error::ParamFile { .. })
        ));
    }

    #[test]
    fn param_file_round_trip() {
        let raw = RawParams::default();
        assert_eq!(RawParams::parse(&raw.to_param_file()).unwrap(), raw);
    }

    #[test]
    fn derive_is_deterministic() {
        let a = Params::derive(RawParams::default()).unwrap();
        let b = Params::derive(RawParams::default()).unwrap();
        assert_eq!(a.kappa.to_bits(), b.kappa.to_bits());
        assert_eq!(a.norm_n.to_bits(), b.norm_n.to_bits());
        assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn unit_round_trip(x in -1e-2f64..1e-2, p in -1e-28f64..1e-28) {
                let u = Params::standard().units;
                let x_back = u.length_to_si(u.length_to_internal(x));
                let p_back = u.momentum_to_si(u.momentum_to_internal(p));
                prop_assert!((x_back - x).abs() <= 1e-14 * x.abs());
                prop_assert!((p_back - p).abs() <= 1e-14 * p.abs());
            }

            #[test]
            fn norm_bounds_and_monotone(ratio in 1.01f64..40.0) {
                let raw = |r: f64| RawParams {
                    sigma: 1e-5,
                    delta_x: r * 1e-5,
                    d: 2.0 * r * 1e-5,
                    ..RawParams::default()
                };
                let n = Params::derive(raw(ratio)).unwrap().norm_n;
                prop_assert!((4.0..=16.0).contains(&n));
                let wider = Params::derive(raw(ratio * 1.1)).unwrap().norm_n;
                prop_assert!(wider <= n);
            }
        }
    }
}
