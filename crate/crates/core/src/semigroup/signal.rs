use nalgebra::DVector;

use crate::discretization::{DiscreteSystem, GridFunction, ModelTag};
use crate::error::{Error, Result};
use crate::presets::ControlPreset;
use crate::C64;

/// Number of uniform steps of size `dt` covering `[0, t_final]`.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be positive, got {dt}"),
        });
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_final",
            reason: format!("must be positive, got {t_final}"),
        });
    }
    let k = (t_final / dt).round();
    if (k * dt - t_final).abs() > 1e-9 * t_final.max(1.0) || k < 1.0 {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("t_final = {t_final} is not a whole number of steps of {dt}"),
        });
    }
    if k > 1e7 {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("{k} time steps is too many"),
        });
    }
    Ok(k as usize)
}

/// Input samples `u(t_k)` on the uniform grid `t_k = k dt`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    dt: f64,
    values: Vec<DVector<C64>>,
    preset_tag: String,
    smooth: bool,
}

impl ControlSignal {
    /// Samples a scalar preset on `[0, t_final]`.
    pub fn from_preset(preset: ControlPreset, t_final: f64, dt: f64) -> Result<Self> {
        let k = step_count(t_final, dt)?;
        let values = (0..=k)
            .map(|i| DVector::from_element(1, C64::new(preset.eval(i as f64 * dt), 0.0)))
            .collect();
        Ok(Self {
            dt,
            values,
            preset_tag: preset.to_string(),
            smooth: true,
        })
    }

    /// Arbitrary samples; not assumed to be continuously differentiable.
    pub fn from_samples(dt: f64, values: Vec<DVector<C64>>, tag: impl Into<String>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be positive, got {dt}"),
            });
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "need at least two time nodes".into(),
            });
        }
        let m = values[0].len();
        if let Some(bad) = values.iter().find(|v| v.len() != m) {
            return Err(Error::Dimension {
                expected: m,
                found: bad.len(),
            });
        }
        Ok(Self {
            dt,
            values,
            preset_tag: tag.into(),
            smooth: false,
        })
    }

    /// `u ≡ 0` with `m` inputs.
    pub fn zero(m: usize, t_final: f64, dt: f64) -> Result<Self> {
        let k = step_count(t_final, dt)?;
        Ok(Self {
            dt,
            values: vec![DVector::zeros(m); k + 1],
            preset_tag: ControlPreset::Zero.to_string(),
            smooth: true,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn t_final(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn values(&self) -> &[DVector<C64>] {
        &self.values
    }

    pub fn input_dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn preset_tag(&self) -> &str {
        &self.preset_tag
    }

    /// Whether the generating preset is continuously differentiable in time.
    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    /// `||u||_{L²(0,T)}` by the trapezoidal rule.
    pub fn l2_norm(&self) -> f64 {
        let k = self.steps();
        let sum: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if i == 0 || i == k { 0.5 } else { 1.0 };
                w * v.norm_squared()
            })
            .sum();
        (self.dt * sum).sqrt()
    }

    pub(crate) fn check_dim(&self, sys: &DiscreteSystem) -> Result<()> {
        if self.input_dim() != sys.input_dim() {
            return Err(Error::Dimension {
                expected: sys.input_dim(),
                found: self.input_dim(),
            });
        }
        Ok(())
    }
}

/// Sampled mild solution `x_u(t_k; x_0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub(crate) dt: f64,
    pub(crate) states: Vec<GridFunction>,
    pub(crate) system_tag: ModelTag,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.states.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn states(&self) -> &[GridFunction] {
        &self.states
    }

    pub fn initial(&self) -> &GridFunction {
        &self.states[0]
    }

    pub fn last(&self) -> &GridFunction {
        &self.states[self.states.len() - 1]
    }

    pub fn system_tag(&self) -> ModelTag {
        self.system_tag
    }
}

/// Output samples `y(t_k) = B* x(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSignal {
    pub(crate) dt: f64,
    pub(crate) values: Vec<DVector<C64>>,
}

impl OutputSignal {
    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn values(&self) -> &[DVector<C64>] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_requires_alignment() {
        assert_eq!(step_count(1.0, 0.01).unwrap(), 100);
        assert_eq!(step_count(0.2, 1e-3).unwrap(), 200);
        assert!(step_count(1.0, 0.3).is_err());
        assert!(step_count(0.0, 0.1).is_err());
        assert!(step_count(1.0, -0.1).is_err());
        assert!(step_count(1.0, f64::NAN).is_err());
    }

    #[test]
    fn preset_signal_samples() {
        let u = ControlSignal::from_preset(ControlPreset::Ramp(2.0), 1.0, 0.25).unwrap();
        assert_eq!(u.steps(), 4);
        assert_eq!(u.values()[2][0], C64::new(1.0, 0.0));
        assert!(u.is_smooth());
        assert_eq!(u.preset_tag(), "ramp:2");
        let c = ControlSignal::from_preset(ControlPreset::Const(3.0), 2.0, 0.5).unwrap();
        assert!((c.l2_norm() - 3.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sampled_signal_checks_shape() {
        let v = vec![DVector::zeros(2), DVector::zeros(1)];
        assert!(matches!(ControlSignal::from_samples(0.1, v, "x"), Err(Error::Dimension { .. })));
        let v = vec![DVector::zeros(2); 3];
        let u = ControlSignal::from_samples(0.1, v, "x").unwrap();
        assert!(!u.is_smooth());
        assert_eq!(u.input_dim(), 2);
    }
}
