use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::toolkit::form_matrix;
use crate::discretization::{assemble, make_uniform_grid, same_grid, DiscreteSystem, Grid, GridFunction, ModelTag};
use crate::error::{Error, Result};
use crate::linalg::c;
use crate::presets::StatePreset;
use crate::C64;

/// Norm level below which a sequence counts as vanishing.
pub const EPS_NORM: f64 = 0.05;
/// Form-Cauchy threshold, relative to `max(1, r[x_1])`.
pub const EPS_FORM_REL: f64 = 0.05;
/// Floor for `r[x_n]`, relative to `r[x_1]`, that signals a non-closable form.
pub const DELTA_REL: f64 = 0.1;
/// A tail whose norms fall at least this fast in log-log scale counts as
/// vanishing even if it has not yet reached [`EPS_NORM`].
pub const NORM_DECAY_SLOPE: f64 = -0.25;
/// Relative change between the two finest grids tolerated by a stable quantity.
pub const STABLE_REL: f64 = 0.05;

/// Sequences `x_1, x_2, ...` fed to [`closability_probe`].
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeSequence {
    /// `(1 - ω)^n`.
    Power,
    /// `n^{-1/2} sin(nπω)`.
    ScaledSine,
    /// `x / n` for a fixed preset `x`.
    Scaled(StatePreset),
    Zero,
    /// Explicit members on a fixed grid.
    Sampled(Vec<GridFunction>),
}

impl ProbeSequence {
    pub fn member(&self, grid: &Grid, n: usize) -> Result<GridFunction> {
        use std::f64::consts::PI;
        let k = n as f64;
        match self {
            ProbeSequence::Power => Ok(grid.sample_real(|w| (1.0 - w).powi(n as i32))),
            ProbeSequence::ScaledSine => Ok(grid.sample_real(|w| (k * PI * w).sin() / k.sqrt())),
            ProbeSequence::Scaled(p) => Ok(p.sample(grid).scale(c(1.0 / k))),
            ProbeSequence::Zero => Ok(grid.zeros()),
            ProbeSequence::Sampled(list) => {
                let x = list.get(n - 1).ok_or(Error::InvalidParameter {
                    name: "n_max",
                    reason: format!("sampled sequence has only {} members", list.len()),
                })?;
                same_grid(grid, x.grid())?;
                Ok(x.clone())
            }
        }
    }
}

impl fmt::Display for ProbeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbeSequence::Power => write!(f, "power"),
            ProbeSequence::ScaledSine => write!(f, "scaled_sine"),
            ProbeSequence::Scaled(p) => write!(f, "scaled:{p}"),
            ProbeSequence::Zero => write!(f, "zero"),
            ProbeSequence::Sampled(_) => write!(f, "sampled"),
        }
    }
}

impl FromStr for ProbeSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let token = s.trim();
        match token {
            "power" => Ok(ProbeSequence::Power),
            "scaled_sine" => Ok(ProbeSequence::ScaledSine),
            "zero" => Ok(ProbeSequence::Zero),
            _ => match token.strip_prefix("scaled:") {
                Some(p) => Ok(ProbeSequence::Scaled(p.parse()?)),
                None => Err(Error::UnknownPreset(token.to_string())),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ClosableConsistent,
    NonClosableEvidence,
    PremiseNotMet,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ClosableConsistent => "closable-consistent",
            Verdict::NonClosableEvidence => "non-closable-evidence",
            Verdict::PremiseNotMet => "premise-not-met",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub index: usize,
    pub norm_l2: f64,
    pub r_xn: f64,
    /// `max_{m > n} r[x_n - x_m]`, zero on the last row.
    pub max_pairwise_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub sequence_tag: String,
    pub rows: Vec<ProbeRow>,
    pub verdict: Verdict,
    /// Largest `r[x_n - x_m]` with both indices in the tail.
    pub tail_form_distance: f64,
    /// Smallest `r[x_n]` in the tail.
    pub tail_min_r: f64,
    pub norm_vanishing: bool,
}

fn form_value(f: &DMatrix<C64>, x: &GridFunction) -> f64 {
    x.values().dotc(&(f * x.values())).re
}

fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(_, y)| y.is_nan() || y <= 0.0) {
        return None;
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Finite-index test of the closability criterion: if `x_n → 0` and
/// `r[x_n - x_m] → 0`, a closable form forces `r[x_n] → 0`.
///
/// The limits are judged on the tail `n >= n_max / 2`. This is evidence, not
/// a proof: no finite table decides a limit statement.
pub fn closability_probe(sys: &DiscreteSystem, sequence: &ProbeSequence, n_max: usize) -> Result<ProbeReport> {
    if n_max < 2 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: format!("need at least 2 members, got {n_max}"),
        });
    }
    let f = form_matrix(sys);
    let members = (1..=n_max)
        .map(|n| sequence.member(sys.grid(), n))
        .collect::<Result<Vec<_>>>()?;

    let mut pair = vec![vec![0.0; n_max]; n_max];
    for i in 0..n_max {
        for j in i + 1..n_max {
            let d = form_value(&f, &members[i].sub(&members[j])?);
            pair[i][j] = d;
            pair[j][i] = d;
        }
    }
    let rows: Vec<ProbeRow> = members
        .iter()
        .enumerate()
        .map(|(i, x)| ProbeRow {
            index: i + 1,
            norm_l2: x.norm_l2(),
            r_xn: form_value(&f, x),
            max_pairwise_r: pair[i][i + 1..].iter().copied().fold(0.0, f64::max),
        })
        .collect();

    let tail = (n_max / 2).min(n_max - 2);
    let r1 = rows[0].r_xn;
    let eps_form = EPS_FORM_REL * r1.max(1.0);
    let delta = DELTA_REL * r1;

    let tail_form_distance = (tail..n_max)
        .flat_map(|i| (tail..n_max).map(move |j| (i, j)))
        .map(|(i, j)| pair[i][j])
        .fold(0.0, f64::max);
    let tail_min_r = rows[tail..].iter().map(|r| r.r_xn).fold(f64::INFINITY, f64::min);

    let tail_norms: Vec<(f64, f64)> = rows[tail..].iter().map(|r| (r.index as f64, r.norm_l2)).collect();
    let decreasing = tail_norms.windows(2).all(|p| p[1].1 <= p[0].1);
    let slope_ok = log_log_slope(&tail_norms).is_some_and(|s| s <= NORM_DECAY_SLOPE);
    let norm_vanishing = rows[n_max - 1].norm_l2 < EPS_NORM || (decreasing && slope_ok);

    let verdict = if !(norm_vanishing && tail_form_distance < eps_form) {
        Verdict::PremiseNotMet
    } else if tail_min_r > delta && delta > 0.0 {
        Verdict::NonClosableEvidence
    } else {
        Verdict::ClosableConsistent
    };

    Ok(ProbeReport {
        sequence_tag: sequence.to_string(),
        rows,
        verdict,
        tail_form_distance,
        tail_min_r,
        norm_vanishing,
    })
}

/// Refinement behaviour of one probe scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityTrend {
    pub name: String,
    /// One value per grid size.
    pub values: Vec<f64>,
    /// Relative change between the two finest grids is within [`STABLE_REL`].
    pub stable: bool,
    /// Observed order of convergence from the three finest grids; `None` when
    /// the finest difference is at rounding level.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub model: ModelTag,
    pub sizes: Vec<usize>,
    pub reports: Vec<ProbeReport>,
    pub verdict_stable: bool,
    pub quantities: Vec<QuantityTrend>,
}

impl StudyReport {
    pub fn all_stable(&self) -> bool {
        self.verdict_stable && self.quantities.iter().all(|q| q.stable)
    }
}

fn trend(name: String, sizes: &[usize], values: Vec<f64>) -> QuantityTrend {
    let k = values.len();
    let (v1, v2, v3) = (values[k - 3], values[k - 2], values[k - 1]);
    let scale = v3.abs().max(v2.abs());
    let stable = (v3 - v2).abs() <= STABLE_REL * scale + 1e-10;
    let (d1, d2) = (v1 - v2, v2 - v3);
    let order = if d2.abs() <= 1e-13 * scale.max(1.0) || d1 == 0.0 {
        None
    } else {
        let h2 = 1.0 / (sizes[k - 2] - 1) as f64;
        let h3 = 1.0 / (sizes[k - 1] - 1) as f64;
        Some((d1 / d2).abs().ln() / (h2 / h3).ln())
    };
    QuantityTrend {
        name,
        values,
        stable,
        order,
    }
}

/// Runs [`closability_probe`] on a sequence of refined grids and reports which
/// scalars settle down. A heuristic: stable values suggest continuum behaviour,
/// drifting ones suggest discretization artifacts.
pub fn refinement_study(model: ModelTag, damping: f64, sizes: &[usize], sequence: &ProbeSequence, n_max: usize) -> Result<StudyReport> {
    if sizes.len() < 3 || sizes.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Refinement(sizes.to_vec()));
    }
    if matches!(sequence, ProbeSequence::Sampled(_)) {
        return Err(Error::InvalidParameter {
            name: "sequence",
            reason: "sampled sequences are tied to one grid".into(),
        });
    }
    let reports = sizes
        .iter()
        .map(|&n| {
            let sys = assemble(model, &make_uniform_grid(n)?, damping)?;
            closability_probe(&sys, sequence, n_max)
        })
        .collect::<Result<Vec<_>>>()?;

    let verdict_stable = reports.windows(2).all(|p| p[0].verdict == p[1].verdict);
    let mut quantities = Vec::with_capacity(2 * n_max);
    for i in 0..n_max {
        let norms = reports.iter().map(|r| r.rows[i].norm_l2).collect();
        quantities.push(trend(format!("norm_l2[{}]", i + 1), sizes, norms));
        let forms = reports.iter().map(|r| r.rows[i].r_xn).collect();
        quantities.push(trend(format!("r_xn[{}]", i + 1), sizes, forms));
    }
    Ok(StudyReport {
        model,
        sizes: sizes.to_vec(),
        reports,
        verdict_stable,
        quantities,
    })
}
