//! Named initial states and control signals.
//!
//! Presets are parsed from short tokens such as `poly:4`, `sine:2` or
//! `const:0.5`; these are the only function inputs the experiment runner accepts.

use std::fmt;
use std::str::FromStr;

use crate::discretization::{Grid, GridFunction};
use crate::error::{Error, Result};

/// Largest polynomial degree / sine frequency accepted by a preset token.
pub const MAX_PRESET_ORDER: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatePreset {
    /// `x ≡ 1`.
    One,
    /// `sinh(1 - ω)`, which vanishes at `ω = 1`.
    SinhBc,
    /// `(1 - ω)^k`.
    Poly(u32),
    /// `sin(kπω)`.
    Sine(u32),
    Zero,
}

impl StatePreset {
    pub fn sample(&self, grid: &Grid) -> GridFunction {
        use std::f64::consts::PI;
        match *self {
            StatePreset::One => grid.sample_real(|_| 1.0),
            StatePreset::SinhBc => grid.sample_real(|w| (1.0 - w).sinh()),
            StatePreset::Poly(k) => grid.sample_real(|w| (1.0 - w).powi(k as i32)),
            StatePreset::Sine(k) => grid.sample_real(|w| (k as f64 * PI * w).sin()),
            StatePreset::Zero => grid.zeros(),
        }
    }
}

impl fmt::Display for StatePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatePreset::One => write!(f, "one"),
            StatePreset::SinhBc => write!(f, "sinh_bc"),
            StatePreset::Poly(k) => write!(f, "poly:{k}"),
            StatePreset::Sine(k) => write!(f, "sine:{k}"),
            StatePreset::Zero => write!(f, "zero"),
        }
    }
}

fn parse_order(token: &str, arg: &str) -> Result<u32> {
    match arg.parse::<u32>() {
        Ok(k) if k <= MAX_PRESET_ORDER => Ok(k),
        _ => Err(Error::UnknownPreset(token.to_string())),
    }
}

fn parse_finite(token: &str, arg: &str) -> Result<f64> {
    match arg.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::UnknownPreset(token.to_string())),
    }
}

impl FromStr for StatePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let token = s.trim();
        match token.split_once(':') {
            None => match token {
                "one" => Ok(StatePreset::One),
                "sinh_bc" => Ok(StatePreset::SinhBc),
                "zero" => Ok(StatePreset::Zero),
                _ => Err(Error::UnknownPreset(token.to_string())),
            },
            Some(("poly", k)) => Ok(StatePreset::Poly(parse_order(token, k)?)),
            Some(("sine", k)) => Ok(StatePreset::Sine(parse_order(token, k)?)),
            Some(_) => Err(Error::UnknownPreset(token.to_string())),
        }
    }
}

/// Scalar control presets; all of them are continuously differentiable in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlPreset {
    Zero,
    /// `u(t) = c`.
    Const(f64),
    /// `u(t) = c t`.
    Ramp(f64),
}

impl ControlPreset {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ControlPreset::Zero => 0.0,
            ControlPreset::Const(c) => c,
            ControlPreset::Ramp(c) => c * t,
        }
    }
}

impl fmt::Display for ControlPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlPreset::Zero => write!(f, "zero"),
            ControlPreset::Const(c) => write!(f, "const:{c}"),
            ControlPreset::Ramp(c) => write!(f, "ramp:{c}"),
        }
    }
}

impl FromStr for ControlPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let token = s.trim();
        match token.split_once(':') {
            None if token == "zero" => Ok(ControlPreset::Zero),
            Some(("const", c)) => Ok(ControlPreset::Const(parse_finite(token, c)?)),
            Some(("ramp", c)) => Ok(ControlPreset::Ramp(parse_finite(token, c)?)),
            _ => Err(Error::UnknownPreset(token.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::make_uniform_grid;

    #[test]
    fn parses_state_presets() {
        assert_eq!("one".parse::<StatePreset>().unwrap(), StatePreset::One);
        assert_eq!(" poly:4 ".parse::<StatePreset>().unwrap(), StatePreset::Poly(4));
        assert_eq!("sine:3".parse::<StatePreset>().unwrap(), StatePreset::Sine(3));
        for bad in ["", "poly", "poly:", "poly:-1", "poly:x", "sine:99999999", "cosh", "one:1"] {
            assert!(bad.parse::<StatePreset>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn parses_control_presets() {
        assert_eq!("const:0.5".parse::<ControlPreset>().unwrap(), ControlPreset::Const(0.5));
        assert_eq!("ramp:-2".parse::<ControlPreset>().unwrap(), ControlPreset::Ramp(-2.0));
        for bad in ["const", "const:nan", "ramp:inf", "zero:1", "sin:1"] {
            assert!(bad.parse::<ControlPreset>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn display_round_trips() {
        for p in [StatePreset::One, StatePreset::SinhBc, StatePreset::Poly(7), StatePreset::Sine(2), StatePreset::Zero] {
            assert_eq!(p.to_string().parse::<StatePreset>().unwrap(), p);
        }
        for p in [ControlPreset::Zero, ControlPreset::Const(0.25), ControlPreset::Ramp(-1.5)] {
            assert_eq!(p.to_string().parse::<ControlPreset>().unwrap(), p);
        }
    }

    #[test]
    fn samples_boundary_values() {
        let g = make_uniform_grid(11).unwrap();
        let s = StatePreset::SinhBc.sample(&g);
        assert!(s.right_value().norm() < 1e-15);
        assert!((s.left_value().re - 1f64.sinh()).abs() < 1e-15);
        assert!(StatePreset::Sine(1).sample(&g).right_value().norm() < 1e-15);
        assert_eq!(StatePreset::Poly(0).sample(&g), StatePreset::One.sample(&g));
    }
}
