//! CSV writers. Numbers use 17 significant digits in scientific notation so
//! that every value round-trips and repeated runs are byte-identical.

use std::fmt::Write as _;

use phdiss::discretization::GridFunction;
use phdiss::dissipation::{EnergyLedger, ProbeReport, StudyReport};

pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        // Folds -0.0 into 0.0.
        return format!("{:.16e}", 0.0);
    }
    format!("{v:.16e}")
}

pub const LEDGER_HEADER: &str = "t,H,supply_rate,dissipation_rate,supplied_cum,dissipated_cum,residual";
pub const PROBE_HEADER: &str = "n,norm_l2,r_xn,max_pairwise_r,verdict";

pub fn ledger_csv(l: &EnergyLedger) -> String {
    let mut s = format!("{LEDGER_HEADER}\n");
    for k in 0..l.len() {
        let cols = [
            l.times[k],
            l.hamiltonian[k],
            l.supply_rate[k],
            l.dissipation_rate[k],
            l.supplied[k],
            l.dissipated[k],
            l.residual[k],
        ];
        let row: Vec<String> = cols.iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// One row per index; the verdict is repeated on every row.
pub fn probe_csv(r: &ProbeReport) -> String {
    let mut s = format!("{PROBE_HEADER}\n");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            row.index,
            fmt_num(row.norm_l2),
            fmt_num(row.r_xn),
            fmt_num(row.max_pairwise_r),
            r.verdict
        );
    }
    s
}

pub fn refine_csv(st: &StudyReport) -> String {
    let mut s = String::from("quantity,n_grid,value,stable,order\n");
    for q in &st.quantities {
        let order = q.order.map(fmt_num).unwrap_or_default();
        for (n, v) in st.sizes.iter().zip(&q.values) {
            let _ = writeln!(s, "{},{},{},{},{}", q.name, n, fmt_num(*v), q.stable, order);
        }
    }
    s
}

pub fn state_csv(x: &GridFunction) -> String {
    let mut s = String::from("omega,re,im\n");
    for (w, v) in x.grid().nodes().iter().zip(x.values().iter()) {
        let _ = writeln!(s, "{},{},{}", fmt_num(*w), fmt_num(v.re), fmt_num(v.im));
    }
    s
}
