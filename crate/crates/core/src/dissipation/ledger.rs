use nalgebra::{DMatrix, DVector};

use super::toolkit::DissipationToolkit;
use crate::discretization::{same_grid, DiscreteSystem, GridFunction, PropagatorHint};
use crate::error::{Error, Result};
use crate::linalg::{c, scale_rows};
use crate::semigroup::{mild_solution, semigroup_matrix, ControlSignal, Trajectory};
use crate::C64;

/// Time-sampled energy balance of one trajectory.
///
/// `residual[k] = (H(t_k) - H(0)) - supplied[k] + dissipated[k]`; the balance
/// holds exactly in continuous time, so the residual measures quadrature error.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    pub supply_rate: Vec<f64>,
    pub dissipation_rate: Vec<f64>,
    pub supplied: Vec<f64>,
    pub dissipated: Vec<f64>,
    pub residual: Vec<f64>,
}

impl EnergyLedger {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total_dissipated(&self) -> f64 {
        self.dissipated[self.len() - 1]
    }

    pub fn total_supplied(&self) -> f64 {
        self.supplied[self.len() - 1]
    }

    pub fn final_residual(&self) -> f64 {
        self.residual[self.len() - 1]
    }

    /// Smallest sampled dissipation rate; negative only through rounding.
    pub fn min_dissipation_rate(&self) -> f64 {
        self.dissipation_rate.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Non-decreasing up to rounding of order `1e-12` relative.
    pub fn dissipated_is_monotone(&self) -> bool {
        self.dissipated.windows(2).all(|p| p[1] >= p[0] - 1e-12 * p[0].abs().max(1.0))
    }
}

struct Rates<'a> {
    tk: &'a DissipationToolkit,
    weights: &'a DVector<f64>,
    bw: DMatrix<C64>,
}

impl Rates<'_> {
    fn energy(&self, x: &DVector<C64>) -> f64 {
        0.5 * x.iter().zip(self.weights.iter()).map(|(v, w)| w * v.norm_sqr()).sum::<f64>()
    }

    fn supply(&self, x: &DVector<C64>, u: &DVector<C64>) -> f64 {
        (&self.bw * x).dotc(u).re
    }

    fn dissipation(&self, x: &DVector<C64>) -> f64 {
        x.dotc(&(self.tk.f_matrix() * x)).re
    }
}

/// Two-point Gauss–Legendre nodes on `[0, 1]`.
const GAUSS_NODES: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

/// Energy ledger of `traj` driven by `u`.
///
/// Shift-propagated trajectories are piecewise exact between grid-aligned
/// nodes and use the trapezoidal rule. Matrix-propagated trajectories are
/// integrated with two-point Gauss–Legendre per step, re-propagating from each
/// node with the same scheme as the solver, which keeps the residual well below
/// the trapezoidal `O(dt²)` level for smooth data.
pub fn energy_audit(sys: &DiscreteSystem, tk: &DissipationToolkit, traj: &Trajectory, u: &ControlSignal) -> Result<EnergyLedger> {
    same_grid(sys.grid(), tk.grid())?;
    u.check_dim(sys)?;
    if traj.states().len() != u.values().len() || (traj.dt() - u.dt()).abs() > 1e-12 * u.dt() {
        return Err(Error::InvalidParameter {
            name: "trajectory",
            reason: format!(
                "{} states at dt = {} do not match {} control samples at dt = {}",
                traj.states().len(),
                traj.dt(),
                u.values().len(),
                u.dt()
            ),
        });
    }
    for x in traj.states() {
        same_grid(sys.grid(), x.grid())?;
    }

    let rates = Rates {
        tk,
        weights: sys.weights(),
        bw: scale_rows(sys.weights(), sys.b_matrix()).adjoint(),
    };
    let dt = traj.dt();
    let states = traj.states();
    let controls = u.values();
    let hamiltonian: Vec<f64> = states.iter().map(|x| rates.energy(x.values())).collect();
    let supply_rate: Vec<f64> = states.iter().zip(controls).map(|(x, v)| rates.supply(x.values(), v)).collect();
    let dissipation_rate: Vec<f64> = states.iter().map(|x| rates.dissipation(x.values())).collect();

    let steps = states.len() - 1;
    let mut supplied = vec![0.0; steps + 1];
    let mut dissipated = vec![0.0; steps + 1];
    match sys.propagator_hint() {
        PropagatorHint::Shift => {
            for k in 0..steps {
                supplied[k + 1] = supplied[k] + 0.5 * dt * (supply_rate[k] + supply_rate[k + 1]);
                dissipated[k + 1] = dissipated[k] + 0.5 * dt * (dissipation_rate[k] + dissipation_rate[k + 1]);
            }
        }
        PropagatorHint::Eigen | PropagatorHint::Generic => {
            let b = sys.b_matrix();
            let sub: Vec<(f64, DMatrix<C64>)> = GAUSS_NODES
                .iter()
                .map(|s| Ok((s * dt, semigroup_matrix(sys, s * dt)?)))
                .collect::<Result<_>>()?;
            for k in 0..steps {
                let (mut s_sum, mut d_sum) = (0.0, 0.0);
                for (&theta, (tau, prop)) in GAUSS_NODES.iter().zip(&sub) {
                    let half = c(0.5 * tau);
                    let uk = &controls[k];
                    let ut: DVector<C64> = uk * c(1.0 - theta) + &controls[k + 1] * c(theta);
                    let x = prop * (states[k].values() + b * uk * half) + b * &ut * half;
                    s_sum += rates.supply(&x, &ut);
                    d_sum += rates.dissipation(&x);
                }
                supplied[k + 1] = supplied[k] + 0.5 * dt * s_sum;
                // Monotone by construction whenever the sampled rates are non-negative.
                dissipated[k + 1] = dissipated[k] + 0.5 * dt * d_sum;
            }
        }
    }

    let h0 = hamiltonian[0];
    let residual = (0..=steps).map(|k| (hamiltonian[k] - h0) - supplied[k] + dissipated[k]).collect();
    Ok(EnergyLedger {
        times: traj.times(),
        hamiltonian,
        supply_rate,
        dissipation_rate,
        supplied,
        dissipated,
        residual,
    })
}

/// Outcome of [`rt_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `sqrt(∫_0^T r[x(t)] dt)`.
    pub lhs: f64,
    /// `sqrt(T) ||B|| ||u|| + ||x0|| / sqrt(2)`.
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub ledger: EnergyLedger,
}

/// Absolute slack allowed in [`rt_bound_check`].
pub const BOUND_TOL: f64 = 1e-8;

/// Checks `||R_T(x0, u)||_{L²(0,T)} <= sqrt(T) ||B|| ||u||_{L²} + ||x0|| / sqrt(2)`.
pub fn rt_bound_check(sys: &DiscreteSystem, tk: &DissipationToolkit, x0: &GridFunction, u: &ControlSignal) -> Result<BoundReport> {
    let traj = mild_solution(sys, x0, u)?;
    let ledger = energy_audit(sys, tk, &traj, u)?;
    let lhs = ledger.total_dissipated().max(0.0).sqrt();
    let rhs = u.t_final().sqrt() * sys.b_norm() * u.l2_norm() + x0.norm_l2() / 2f64.sqrt();
    let slack = rhs - lhs;
    Ok(BoundReport {
        lhs,
        rhs,
        slack,
        holds: slack >= -BOUND_TOL,
        ledger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_heat, assemble_skew_damped, assemble_transport, make_uniform_grid};
    use crate::dissipation::build_toolkit;
    use crate::presets::{ControlPreset, StatePreset};
    use std::f64::consts::PI;

    #[test]
    fn transport_loses_half() {
        let g = make_uniform_grid(201).unwrap();
        let sys = assemble_transport(&g).unwrap();
        let tk = build_toolkit(&sys).unwrap();
        let x0 = StatePreset::One.sample(&g);
        let u = ControlSignal::zero(1, 1.0, g.h()).unwrap();
        let traj = mild_solution(&sys, &x0, &u).unwrap();
        let l = energy_audit(&sys, &tk, &traj, &u).unwrap();
        assert!((l.hamiltonian[0] - 0.5).abs() < 1e-12);
        assert!(l.hamiltonian[l.len() - 1].abs() < 1e-15);
        assert!((l.total_dissipated() - 0.5).abs() < 1e-3);
        assert!(l.final_residual().abs() < 1e-3);
        assert!(l.dissipated_is_monotone());
    }

    #[test]
    fn heat_mode_balance_is_tight() {
        let g = make_uniform_grid(201).unwrap();
        let sys = assemble_heat(&g).unwrap();
        let tk = build_toolkit(&sys).unwrap();
        let x0 = StatePreset::Sine(1).sample(&g);
        let u = ControlSignal::zero(1, 0.2, 1e-3).unwrap();
        let traj = mild_solution(&sys, &x0, &u).unwrap();
        let l = energy_audit(&sys, &tk, &traj, &u).unwrap();
        assert!(l.final_residual().abs() < 1e-6, "{}", l.final_residual());
        // Continuum oracle: H(t) = e^{-2π²t} / 4.
        let h_t = (-2.0 * PI * PI * 0.2).exp() / 4.0;
        assert!((l.hamiltonian[l.len() - 1] - h_t).abs() < 1e-4);
    }

    #[test]
    fn zero_data_gives_zero_ledger() {
        let g = make_uniform_grid(21).unwrap();
        for sys in [assemble_transport(&g).unwrap(), assemble_heat(&g).unwrap(), assemble_skew_damped(&g, 0.3).unwrap()] {
            let tk = build_toolkit(&sys).unwrap();
            let u = ControlSignal::zero(1, 0.5, 0.05).unwrap();
            let traj = mild_solution(&sys, &g.zeros(), &u).unwrap();
            let l = energy_audit(&sys, &tk, &traj, &u).unwrap();
            for col in [&l.hamiltonian, &l.supply_rate, &l.dissipation_rate, &l.supplied, &l.dissipated, &l.residual] {
                assert!(col.iter().all(|v| *v == 0.0));
            }
        }
    }

    #[test]
    fn forced_heat_residual_is_second_order() {
        let g = make_uniform_grid(51).unwrap();
        let sys = assemble_heat(&g).unwrap();
        let tk = build_toolkit(&sys).unwrap();
        let x0 = StatePreset::Sine(1).sample(&g);
        let res: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&dt| {
                let u = ControlSignal::from_preset(ControlPreset::Ramp(1.0), 0.2, dt).unwrap();
                let traj = mild_solution(&sys, &x0, &u).unwrap();
                energy_audit(&sys, &tk, &traj, &u).unwrap().final_residual().abs()
            })
            .collect();
        assert!(res[2] < res[1] && res[1] < res[0], "{res:?}");
        assert!(res[1] / res[2] > 3.0, "{res:?}");
    }

    #[test]
    fn misaligned_signals_are_rejected() {
        let g = make_uniform_grid(21).unwrap();
        let sys = assemble_heat(&g).unwrap();
        let tk = build_toolkit(&sys).unwrap();
        let u = ControlSignal::zero(1, 0.5, 0.05).unwrap();
        let traj = mild_solution(&sys, &g.zeros(), &u).unwrap();
        let short = ControlSignal::zero(1, 0.25, 0.05).unwrap();
        assert!(matches!(energy_audit(&sys, &tk, &traj, &short), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn bound_equality_case() {
        let g = make_uniform_grid(201).unwrap();
        let sys = assemble_transport(&g).unwrap();
        let tk = build_toolkit(&sys).unwrap();
        let u = ControlSignal::zero(1, 1.0, g.h()).unwrap();
        let r = rt_bound_check(&sys, &tk, &StatePreset::One.sample(&g), &u).unwrap();
        assert!((r.lhs - 0.5f64.sqrt()).abs() < 1e-3);
        assert!((r.rhs - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(r.holds && r.slack < 1e-3);

        let z = rt_bound_check(&sys, &tk, &g.zeros(), &u).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        assert!(z.holds);
    }

    #[test]
    fn heat_bound_has_positive_slack() {
        let g = make_uniform_grid(51).unwrap();
        let sys = assemble_heat(&g).unwrap();
        let tk = build_toolkit(&sys).unwrap();
        for (k, cval) in [(1, 0.5), (2, -1.0), (3, 2.0)] {
            let u = ControlSignal::from_preset(ControlPreset::Const(cval), 0.5, 5e-3).unwrap();
            let r = rt_bound_check(&sys, &tk, &StatePreset::Sine(k).sample(&g), &u).unwrap();
            assert!(r.holds && r.slack > 0.0, "{r:?}");
        }
    }
}
