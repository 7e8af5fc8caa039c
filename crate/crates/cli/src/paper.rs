//! Fixed battery of closed-form reference values for the transport model.

use std::fmt::Write as _;

use phdiss::discretization::{assemble_transport, graph_inner, make_uniform_grid, GridFunction};
use phdiss::dissipation::{build_toolkit, closability_probe, dissipation_rate, rt_bound_check, ProbeSequence, Verdict};
use phdiss::presets::StatePreset;
use phdiss::semigroup::ControlSignal;

use crate::report::fmt_num;

#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Passes when `|value - reference| <= tolerance`.
    Value { value: f64, reference: f64, tolerance: f64 },
    /// Passes on an exact label match.
    Label { value: String, reference: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub group: char,
    pub quantity: String,
    pub check: Reference,
}

impl CheckRow {
    fn value(group: char, quantity: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            group,
            quantity: quantity.into(),
            check: Reference::Value {
                value,
                reference,
                tolerance,
            },
        }
    }

    pub fn passed(&self) -> bool {
        match &self.check {
            Reference::Value {
                value,
                reference,
                tolerance,
            } => (value - reference).abs() <= *tolerance,
            Reference::Label { value, reference } => value == reference,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Battery {
    pub n_grid: usize,
    pub rows: Vec<CheckRow>,
}

impl Battery {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(CheckRow::passed)
    }

    pub fn passed_count(&self) -> usize {
        self.rows.iter().filter(|r| r.passed()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,quantity,value,reference,tolerance,verdict\n");
        for r in &self.rows {
            let (v, rf, tol) = match &r.check {
                Reference::Value {
                    value,
                    reference,
                    tolerance,
                } => (fmt_num(*value), fmt_num(*reference), fmt_num(*tolerance)),
                Reference::Label { value, reference } => (value.clone(), reference.clone(), "exact".to_string()),
            };
            let verdict = if r.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{},{},{},{},{},{}", r.group, r.quantity, v, rf, tol, verdict);
        }
        s
    }
}

/// `e √2 / √(e⁴ - 1)`, the amplitude of the rank-one root on the transport model.
pub fn rank_one_amplitude() -> f64 {
    let e = std::f64::consts::E;
    e * 2f64.sqrt() / (e.powi(4) - 1.0).sqrt()
}

/// Runs the battery at grid size `n_grid` (at least 3).
pub fn verify_paper(n_grid: usize) -> phdiss::Result<Battery> {
    let g = make_uniform_grid(n_grid)?;
    let sys = assemble_transport(&g)?;
    let tk = build_toolkit(&sys)?;
    let mut rows = Vec::new();

    let sinh = StatePreset::SinhBc.sample(&g);
    let norm_sq = graph_inner(&sys, &sinh, &sinh)?.re;
    rows.push(CheckRow::value('a', "graph_norm_sq(sinh(1-w))", norm_sq, 2f64.sinh() / 2.0, 2e-3));

    let classical = [
        ("sinh(1-w)", sinh.clone()),
        ("(1-w)^2", StatePreset::Poly(2).sample(&g)),
        ("1-w", StatePreset::Poly(1).sample(&g)),
    ];
    for (name, x) in &classical {
        let x0 = x.left_value();
        let closed = g.sample(|w| x0 * rank_one_amplitude() * (1.0 - w).sinh());
        let diff = tk.apply_m_sqrt(x)?.sub(&closed)?;
        let rel = (graph_inner(&sys, &diff, &diff)?.re / graph_inner(&sys, &closed, &closed)?.re).sqrt();
        rows.push(CheckRow::value('b', format!("m_sqrt_rel_err({name})"), rel, 0.0, 0.05));
    }
    for (name, x) in &classical {
        let expect = 0.5 * x.left_value().norm_sqr();
        let rate = dissipation_rate(&tk, x)?;
        rows.push(CheckRow::value('c', format!("dissipation_rate({name})"), rate, expect, 0.05 * expect));
    }

    let probe = closability_probe(&sys, &ProbeSequence::Power, 8)?;
    for r in &probe.rows {
        let n = r.index;
        let expect = (2.0 * n as f64 + 1.0).powf(-0.5);
        rows.push(CheckRow::value('d', format!("norm_l2(x_{n})"), r.norm_l2, expect, 1e-3));
        rows.push(CheckRow::value('d', format!("r(x_{n})"), r.r_xn, 0.5, 0.05));
        rows.push(CheckRow::value('d', format!("max_pairwise_r(x_{n})"), r.max_pairwise_r, 0.0, 0.05));
    }
    rows.push(CheckRow {
        group: 'd',
        quantity: "probe_verdict(power)".into(),
        check: Reference::Label {
            value: probe.verdict.to_string(),
            reference: Verdict::NonClosableEvidence.to_string(),
        },
    });

    let u = ControlSignal::zero(sys.input_dim(), 1.0, g.h())?;
    let one: GridFunction = StatePreset::One.sample(&g);
    let bound = rt_bound_check(&sys, &tk, &one, &u)?;
    rows.push(CheckRow::value('e', "dissipated(x0=1,T=1)", bound.ledger.total_dissipated(), 0.5, 1e-3));
    rows.push(CheckRow::value('e', "energy_residual(x0=1,T=1)", bound.ledger.final_residual(), 0.0, 1e-3));
    rows.push(CheckRow::value('e', "rt_bound_lhs(x0=1,T=1)", bound.lhs, 0.5f64.sqrt(), 1e-3));
    rows.push(CheckRow::value('e', "rt_bound_slack(x0=1,T=1)", bound.slack, 0.0, 1e-3));

    Ok(Battery { n_grid, rows })
}
