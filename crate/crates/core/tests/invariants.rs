use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use phdiss::discretization::{
    assemble_heat, assemble_skew_damped, assemble_transport, graph_inner, inner_l2, make_uniform_grid, psd_sqrt,
    DiscreteSystem, Grid, GridFunction,
};
use phdiss::dissipation::{build_toolkit, dissipation_rate, energy_audit, form_r, q_identity_residual, rt_bound_check, DissipationToolkit};
use phdiss::semigroup::{mild_solution, output_signal, propagate_matrix, propagate_shift, ControlSignal};
use phdiss::C64;
use proptest::prelude::*;

const N: usize = 41;

struct Fixture {
    grid: Grid,
    systems: Vec<(DiscreteSystem, DissipationToolkit)>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let grid = make_uniform_grid(N).unwrap();
        let systems = [assemble_transport(&grid), assemble_heat(&grid), assemble_skew_damped(&grid, 0.3)]
            .into_iter()
            .map(|s| {
                let s = s.unwrap();
                let tk = build_toolkit(&s).unwrap();
                (s, tk)
            })
            .collect();
        Fixture { grid, systems }
    })
}

/// Smooth state: a few sine modes plus a complex cosine tilt.
fn smooth(grid: &Grid, c: &[f64]) -> GridFunction {
    grid.sample(|w| {
        let re: f64 = c[..4].iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * PI * w).sin()).sum();
        C64::new(re + c[4] * (2.0 * w).cos(), c[5] * (3.0 * w).sin())
    })
}

fn rough(grid: &Grid, v: &[(f64, f64)]) -> GridFunction {
    GridFunction::new(grid, DVector::from_iterator(grid.n(), v.iter().map(|&(a, b)| C64::new(a, b)))).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 6)
}

fn nodal() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), N)
}

fn scale(sys: &DiscreteSystem, x: &GridFunction) -> f64 {
    1.0 + graph_inner(sys, x, x).unwrap().re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rate_identity_and_sign(c in coeffs(), v in nodal()) {
        let f = fixture();
        for (sys, tk) in &f.systems {
            let x = smooth(&f.grid, &c);
            let r = form_r(sys, &x, &x).unwrap();
            prop_assert!((dissipation_rate(tk, &x).unwrap() - r.re).abs() < 1e-10);
            prop_assert!(r.re >= -1e-10 && r.im.abs() < 1e-10);

            let y = rough(&f.grid, &v);
            let r = form_r(sys, &y, &y).unwrap().re;
            prop_assert!((dissipation_rate(tk, &y).unwrap() - r).abs() < 1e-10 * (1.0 + r));
            prop_assert!(r >= -1e-10 * scale(sys, &y));
        }
    }

    #[test]
    fn q_identity(c in coeffs(), v in nodal()) {
        let f = fixture();
        for (sys, tk) in &f.systems {
            for x in [smooth(&f.grid, &c), rough(&f.grid, &v)] {
                prop_assert!(q_identity_residual(tk, &x).unwrap() < 1e-10 * scale(sys, &x));
            }
        }
    }

    #[test]
    fn form_is_hermitian_sesquilinear(c in coeffs(), v in nodal()) {
        let f = fixture();
        let (x, y) = (smooth(&f.grid, &c), rough(&f.grid, &v));
        for (sys, _) in &f.systems {
            let xy = form_r(sys, &x, &y).unwrap();
            let yx = form_r(sys, &y, &x).unwrap();
            prop_assert!((xy - yx.conj()).norm() < 1e-10 * scale(sys, &y));
        }
    }

    #[test]
    fn graph_norm_dominates_l2(v in nodal()) {
        let f = fixture();
        let x = rough(&f.grid, &v);
        let l2 = inner_l2(&x, &x).unwrap().re;
        for (sys, _) in &f.systems {
            prop_assert!(graph_inner(sys, &x, &x).unwrap().re >= l2);
        }
    }

    #[test]
    fn semigroups_contract(c in coeffs(), k in 0usize..N, t in 0.0..0.5f64) {
        let f = fixture();
        let x = smooth(&f.grid, &c);
        let shifted = propagate_shift(&x, k as f64 * f.grid.h(), &f.grid).unwrap();
        prop_assert!(shifted.norm_l2() <= x.norm_l2() + 1e-14);
        for (sys, _) in &f.systems[1..] {
            prop_assert!(propagate_matrix(sys, &x, t).unwrap().norm_l2() <= x.norm_l2() * (1.0 + 1e-10));
        }
    }

    #[test]
    fn semigroup_law(c in coeffs(), a in 0usize..25, b in 0usize..25, t in 0.0..0.3f64, s in 0.0..0.3f64) {
        let f = fixture();
        let x = smooth(&f.grid, &c);
        let h = f.grid.h();
        let once = propagate_shift(&x, (a + b) as f64 * h, &f.grid).unwrap();
        let twice = propagate_shift(&propagate_shift(&x, b as f64 * h, &f.grid).unwrap(), a as f64 * h, &f.grid).unwrap();
        prop_assert_eq!(once, twice);
        for (sys, _) in &f.systems[1..] {
            let once = propagate_matrix(sys, &x, t + s).unwrap();
            let twice = propagate_matrix(sys, &propagate_matrix(sys, &x, s).unwrap(), t).unwrap();
            prop_assert!(once.sub(&twice).unwrap().norm_l2() < 1e-9 * (1.0 + x.norm_l2()));
        }
    }

    #[test]
    fn mild_solution_is_linear(c in coeffs(), d in coeffs(), u1 in -2.0..2.0f64, u2 in -2.0..2.0f64, alpha in -2.0..2.0f64) {
        let f = fixture();
        let (x1, x2) = (smooth(&f.grid, &c), smooth(&f.grid, &d));
        let dt = f.grid.h();
        let sig = |a: f64, b: f64| {
            let vals = (0..=10).map(|k| DVector::from_element(1, C64::new(a + b * k as f64 * dt, 0.0))).collect();
            ControlSignal::from_samples(dt, vals, "lin").unwrap()
        };
        for (sys, _) in &f.systems {
            let combo_x = x1.add(&x2.scale(C64::new(alpha, 0.0))).unwrap();
            let lhs = mild_solution(sys, &combo_x, &sig(u1 + alpha * u2, 1.0 + alpha)).unwrap();
            let s1 = mild_solution(sys, &x1, &sig(u1, 1.0)).unwrap();
            let s2 = mild_solution(sys, &x2, &sig(u2, 1.0)).unwrap();
            let rhs = s1.last().add(&s2.last().scale(C64::new(alpha, 0.0))).unwrap();
            prop_assert!(lhs.last().sub(&rhs).unwrap().norm_l2() < 1e-10 * (1.0 + rhs.norm_l2()));
        }
    }

    #[test]
    fn output_is_weighted_adjoint(v in nodal(), cols in prop::collection::vec(-1.0..1.0f64, 3 * N), u in prop::collection::vec(-1.0..1.0f64, 3)) {
        let f = fixture();
        let x = rough(&f.grid, &v);
        let b = DMatrix::from_iterator(N, 3, cols.iter().map(|&r| C64::new(r, 0.5 * r)));
        let uv = DVector::from_iterator(3, u.iter().map(|&r| C64::new(r, -r)));
        let sys = f.systems[1].0.clone().with_input(b.clone()).unwrap();
        let ctrl = ControlSignal::from_samples(0.1, vec![DVector::zeros(3); 2], "zero").unwrap();
        let traj = mild_solution(&sys, &x, &ctrl).unwrap();
        let out = output_signal(&sys, &traj).unwrap();
        let y = &out.values()[0];
        let bu = GridFunction::new(&f.grid, &b * &uv).unwrap();
        let lhs = inner_l2(&bu, &x).unwrap();
        let rhs = y.dotc(&uv);
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn psd_sqrt_squares_back(entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 36), w in prop::collection::vec(0.5..2.0f64, 6)) {
        let c = DMatrix::from_iterator(6, 6, entries.iter().map(|&(a, b)| C64::new(a, b)));
        let h = c.adjoint() * &c;
        let gram = DMatrix::from_diagonal(&DVector::from_iterator(6, w.iter().map(|&v| C64::new(v, 0.0))));
        let m = DMatrix::from_fn(6, 6, |i, j| h[(i, j)] / gram[(i, i)]);
        let s = psd_sqrt(&m, &gram, 1e-10 * h.norm()).unwrap();
        prop_assert!((&s * &s - &m).norm() < 1e-9 * (1.0 + m.norm()));
        let gs = &gram * &s;
        prop_assert!((&gs - gs.adjoint()).norm() < 1e-9 * (1.0 + m.norm()));
    }

    #[test]
    fn bound_holds_on_rough_controls(c in coeffs(), u in prop::collection::vec(-2.0..2.0f64, 11)) {
        let f = fixture();
        let x0 = smooth(&f.grid, &c);
        let dt = f.grid.h();
        let vals = u.iter().map(|&v| DVector::from_element(1, C64::new(v, 0.0))).collect();
        let ctrl = ControlSignal::from_samples(dt, vals, "random").unwrap();
        for (sys, tk) in &f.systems {
            let rep = rt_bound_check(sys, tk, &x0, &ctrl).unwrap();
            prop_assert!(rep.holds, "{}: {} > {}", sys.model(), rep.lhs, rep.rhs);
            prop_assert!(rep.ledger.dissipated_is_monotone());
            prop_assert!(rep.ledger.min_dissipation_rate() >= -1e-10);
        }
    }
}

#[test]
fn energy_residual_is_second_order_in_dt() {
    let f = fixture();
    // Classical data: the state must satisfy the boundary conditions.
    let x0 = smooth(&f.grid, &[1.0, -0.5, 0.25, 0.1, 0.0, 0.0]);
    for (sys, tk) in &f.systems[1..] {
        let res: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&dt| {
                let u = ControlSignal::zero(1, 0.2, dt).unwrap();
                let traj = mild_solution(sys, &x0, &u).unwrap();
                energy_audit(sys, tk, &traj, &u).unwrap().final_residual().abs()
            })
            .collect();
        let at_rounding = res.iter().all(|r| *r < 1e-12);
        assert!(at_rounding || (res[0] / res[1] > 3.0 && res[1] / res[2] > 3.0), "{}: {res:?}", sys.model());
    }
}

#[test]
fn transport_rate_converges_for_smooth_states() {
    // States with x(1) = 0: the discrete rate is ½|x(0)|² at every resolution.
    for n in [101, 201, 401] {
        let g = make_uniform_grid(n).unwrap();
        let sys = assemble_transport(&g).unwrap();
        let tk = build_toolkit(&sys).unwrap();
        for x in [g.sample_real(|w| (1.0 - w).sinh()), g.sample_real(|w| (1.0 - w) * (3.0 * w).cos())] {
            let expect = 0.5 * x.left_value().norm_sqr();
            assert!((dissipation_rate(&tk, &x).unwrap() - expect).abs() < 1e-12);
        }
    }
}
