//! Executes an [`ExperimentConfig`] and writes its reports.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use phdiss::discretization::{assemble, graph_inner, make_uniform_grid, DiscreteSystem, Grid, GridFunction};
use phdiss::dissipation::{
    build_toolkit, closability_probe, energy_audit, q_identity_residual, refinement_study, rt_bound_check, DissipationToolkit,
    EnergyLedger, ProbeSequence,
};
use phdiss::semigroup::{classical_check, mild_solution, ControlSignal, Trajectory};
use phdiss::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{parse_config, ConfigError, ExperimentConfig, Task};
use crate::report::{ledger_csv, probe_csv, refine_csv, state_csv};

/// Environment variable that overrides `out_dir`.
pub const OUT_ENV: &str = "PHDISS_OUT";

/// Rounding slack for sign checks on the dissipation rate.
const SIGN_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub task: String,
    pub status: Status,
    pub details: Map<String, Value>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub tasks: Vec<TaskOutcome>,
    pub summary: Value,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.tasks.iter().all(|t| t.status == Status::Pass)
    }
}

/// Reads `path`, runs every task and writes the reports into `out_dir`
/// (or `$PHDISS_OUT` when set).
pub fn run_config(path: &Path) -> Result<RunOutcome, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg = parse_config(&text)?;
    let out_dir = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| cfg.out_dir.clone());
    run_experiment(&cfg, &out_dir)
}

struct Session<'a> {
    cfg: &'a ExperimentConfig,
    grid: Grid,
    sys: Option<DiscreteSystem>,
    toolkit: Option<DissipationToolkit>,
    trajectory: Option<(Trajectory, ControlSignal)>,
    files: Vec<(String, String)>,
    probes_written: usize,
}

type TaskResult = phdiss::Result<(Status, Map<String, Value>)>;

impl Session<'_> {
    fn system(&mut self) -> phdiss::Result<&DiscreteSystem> {
        if self.sys.is_none() {
            self.sys = Some(assemble(self.cfg.model, &self.grid, self.cfg.damping)?);
        }
        Ok(self.sys.as_ref().expect("assembled above"))
    }

    fn toolkit(&mut self) -> phdiss::Result<&DissipationToolkit> {
        if self.toolkit.is_none() {
            let tk = build_toolkit(self.system()?)?;
            self.toolkit = Some(tk);
        }
        Ok(self.toolkit.as_ref().expect("built above"))
    }

    fn control(&self) -> phdiss::Result<ControlSignal> {
        ControlSignal::from_preset(self.cfg.u_preset, self.cfg.t_final, self.cfg.resolved_dt())
    }

    fn trajectory(&mut self) -> phdiss::Result<&(Trajectory, ControlSignal)> {
        if self.trajectory.is_none() {
            let u = self.control()?;
            let x0 = self.cfg.x0_preset.sample(&self.grid);
            let traj = mild_solution(self.system()?, &x0, &u)?;
            self.trajectory = Some((traj, u));
        }
        Ok(self.trajectory.as_ref().expect("solved above"))
    }

    fn ledger(&mut self) -> phdiss::Result<EnergyLedger> {
        self.toolkit()?;
        self.trajectory()?;
        let (traj, u) = self.trajectory.as_ref().expect("solved above");
        energy_audit(
            self.sys.as_ref().expect("assembled above"),
            self.toolkit.as_ref().expect("built above"),
            traj,
            u,
        )
    }

    fn simulate(&mut self) -> TaskResult {
        let x0 = self.cfg.x0_preset.sample(&self.grid);
        let u = self.control()?;
        let report = classical_check(self.system()?, &x0, &u);
        let (traj, _) = self.trajectory()?;
        let last = traj.last().clone();
        let finite = traj.states().iter().all(|x| x.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        self.files.push(("state_final.csv".into(), state_csv(&last)));
        let mut d = Map::new();
        d.insert("steps".into(), json!(u.steps()));
        d.insert("final_norm_l2".into(), json!(last.norm_l2()));
        d.insert("classical".into(), json!(report.classical));
        d.insert("boundary_residual".into(), json!(report.boundary_residual));
        Ok((if finite { Status::Pass } else { Status::Fail }, d))
    }

    fn audit(&mut self) -> TaskResult {
        let l = self.ledger()?;
        let scale = 1.0 + l.hamiltonian.iter().copied().fold(0.0, f64::max);
        let sign_ok = l.min_dissipation_rate() >= -SIGN_TOL * scale;
        let monotone = l.dissipated_is_monotone();
        self.files.push(("ledger.csv".into(), ledger_csv(&l)));
        let mut d = Map::new();
        d.insert("h_initial".into(), json!(l.hamiltonian[0]));
        d.insert("h_final".into(), json!(l.hamiltonian[l.len() - 1]));
        d.insert("supplied".into(), json!(l.total_supplied()));
        d.insert("dissipated".into(), json!(l.total_dissipated()));
        d.insert("residual".into(), json!(l.final_residual()));
        d.insert("min_dissipation_rate".into(), json!(l.min_dissipation_rate()));
        d.insert("dissipated_monotone".into(), json!(monotone));
        Ok((if sign_ok && monotone { Status::Pass } else { Status::Fail }, d))
    }

    fn rt_bound(&mut self) -> TaskResult {
        let x0 = self.cfg.x0_preset.sample(&self.grid);
        let u = self.control()?;
        self.toolkit()?;
        let r = rt_bound_check(self.sys.as_ref().expect("assembled above"), self.toolkit.as_ref().expect("built above"), &x0, &u)?;
        let mut d = Map::new();
        d.insert("lhs".into(), json!(r.lhs));
        d.insert("rhs".into(), json!(r.rhs));
        d.insert("slack".into(), json!(r.slack));
        Ok((if r.holds { Status::Pass } else { Status::Fail }, d))
    }

    fn probe(&mut self, seq: &ProbeSequence) -> TaskResult {
        let n_max = self.cfg.n_max;
        let rep = closability_probe(self.system()?, seq, n_max)?;
        let sign_ok = rep
            .rows
            .iter()
            .all(|r| r.norm_l2.is_finite() && r.r_xn >= -SIGN_TOL * (1.0 + r.r_xn.abs()) && r.max_pairwise_r >= -SIGN_TOL * (1.0 + r.max_pairwise_r.abs()));
        let name = if self.probes_written == 0 {
            "probe.csv".to_string()
        } else {
            format!("probe_{}.csv", rep.sequence_tag)
        };
        self.probes_written += 1;
        self.files.push((name.clone(), probe_csv(&rep)));
        let mut d = Map::new();
        d.insert("file".into(), json!(name));
        d.insert("verdict".into(), json!(rep.verdict.as_str()));
        d.insert("tail_form_distance".into(), json!(rep.tail_form_distance));
        d.insert("tail_min_r".into(), json!(rep.tail_min_r));
        Ok((if sign_ok { Status::Pass } else { Status::Fail }, d))
    }

    fn refine(&mut self) -> TaskResult {
        let seq = self
            .cfg
            .tasks
            .iter()
            .find_map(|t| match t {
                Task::Probe(s) => Some(s.clone()),
                _ => None,
            })
            .unwrap_or(ProbeSequence::Power);
        let st = refinement_study(self.cfg.model, self.cfg.damping, &self.cfg.refine_sizes, &seq, self.cfg.n_max)?;
        self.files.push(("refine.csv".into(), refine_csv(&st)));
        let verdicts: Vec<&str> = st.reports.iter().map(|r| r.verdict.as_str()).collect();
        let unstable: Vec<&str> = st.quantities.iter().filter(|q| !q.stable).map(|q| q.name.as_str()).collect();
        let mut d = Map::new();
        d.insert("sequence".into(), json!(seq.to_string()));
        d.insert("sizes".into(), json!(st.sizes));
        d.insert("verdicts".into(), json!(verdicts));
        d.insert("verdict_stable".into(), json!(st.verdict_stable));
        d.insert("unstable_quantities".into(), json!(unstable));
        Ok((Status::Pass, d))
    }

    fn q_check(&mut self) -> TaskResult {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let states: Vec<GridFunction> = (0..self.cfg.samples).map(|_| random_smooth_state(&self.grid, &mut rng)).collect();
        self.toolkit()?;
        let sys = self.sys.as_ref().expect("assembled above");
        let tk = self.toolkit.as_ref().expect("built above");
        let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
        for x in &states {
            let r = q_identity_residual(tk, x)?;
            let scale = 1.0 + graph_inner(sys, x, x)?.re;
            max_abs = max_abs.max(r);
            max_rel = max_rel.max(r / scale);
        }
        let mut d = Map::new();
        d.insert("samples".into(), json!(states.len()));
        d.insert("q_max_residual".into(), json!(max_abs));
        d.insert("q_max_relative_residual".into(), json!(max_rel));
        d.insert("q_min_eigenvalue".into(), json!(tk.q_eigenvalues()[0]));
        Ok((if max_rel < 1e-10 { Status::Pass } else { Status::Fail }, d))
    }
}

/// Random combination of six low sine/cosine modes with complex coefficients
/// decaying like `1/k`.
pub fn random_smooth_state(grid: &Grid, rng: &mut impl Rng) -> GridFunction {
    let coef: Vec<(C64, C64)> = (1..=6)
        .map(|k| {
            let s = 1.0 / k as f64;
            (
                C64::new(rng.gen_range(-s..s), rng.gen_range(-s..s)),
                C64::new(rng.gen_range(-s..s), rng.gen_range(-s..s)),
            )
        })
        .collect();
    grid.sample(|w| {
        coef.iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let f = (k + 1) as f64 * PI * w;
                a * f.sin() + b * f.cos()
            })
            .sum()
    })
}

/// Runs `cfg` and writes `summary.json` plus every report the tasks produced.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let grid = make_uniform_grid(cfg.n_grid).map_err(|e| ConfigError::Invalid {
        key: "n_grid",
        reason: e.to_string(),
    })?;
    let mut session = Session {
        cfg,
        grid,
        sys: None,
        toolkit: None,
        trajectory: None,
        files: Vec::new(),
        probes_written: 0,
    };
    let mut tasks = Vec::with_capacity(cfg.tasks.len());
    for task in &cfg.tasks {
        let result = match task {
            Task::Simulate => session.simulate(),
            Task::Audit => session.audit(),
            Task::RtBound => session.rt_bound(),
            Task::Probe(seq) => session.probe(seq),
            Task::Refine => session.refine(),
            Task::QCheck => session.q_check(),
        };
        let (status, details) = result.unwrap_or_else(|e| {
            let mut d = Map::new();
            d.insert("error".into(), json!(e.to_string()));
            (Status::Error, d)
        });
        tasks.push(TaskOutcome {
            task: task.to_string(),
            status,
            details,
        });
    }

    let summary = summary_json(cfg, &tasks);
    fs::create_dir_all(out_dir).map_err(|source| RunError::Write {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut text = serde_json::to_string_pretty(&summary).expect("json values serialize");
    text.push('\n');
    session.files.push(("summary.json".into(), text));
    for (name, body) in &session.files {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|source| RunError::Write { path, source })?;
    }
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        tasks,
        summary,
    })
}

fn summary_json(cfg: &ExperimentConfig, tasks: &[TaskOutcome]) -> Value {
    let mut top = Map::new();
    top.insert(
        "config".into(),
        json!({
            "model": cfg.model.as_str(),
            "n_grid": cfg.n_grid,
            "damping": cfg.damping,
            "t_final": cfg.t_final,
            "dt": cfg.resolved_dt(),
            "x0_preset": cfg.x0_preset.to_string(),
            "u_preset": cfg.u_preset.to_string(),
            "tasks": cfg.tasks.iter().map(Task::to_string).collect::<Vec<_>>(),
        }),
    );
    let list: Vec<Value> = tasks
        .iter()
        .map(|t| {
            let mut m = t.details.clone();
            m.insert("task".into(), json!(t.task));
            m.insert("status".into(), json!(t.status.as_str()));
            Value::Object(m)
        })
        .collect();
    if let Some(q) = tasks.iter().rev().find_map(|t| t.details.get("q_max_residual")) {
        top.insert("q_max_residual".into(), q.clone());
    }
    top.insert("tasks".into(), Value::Array(list));
    top.insert("all_passed".into(), json!(tasks.iter().all(|t| t.status == Status::Pass)));
    Value::Object(top)
}
