//! Flat `key = value` experiment configs.
//!
//! ```text
//! # transport dissipates half its energy by t = 1
//! model = transport
//! n_grid = 201
//! t_final = 1
//! dt = auto
//! x0_preset = one
//! tasks = audit, rt_bound
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use phdiss::discretization::ModelTag;
use phdiss::dissipation::ProbeSequence;
use phdiss::presets::{ControlPreset, StatePreset};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("missing key: {0}")]
    MissingKey(&'static str),
    #[error("unknown key: {0}")]
    UnknownKey(String),
    #[error("duplicate key: {0}")]
    DuplicateKey(String),
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("invalid value for {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    /// `dt = h`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Simulate,
    Audit,
    RtBound,
    Probe(ProbeSequence),
    Refine,
    QCheck,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Simulate => write!(f, "simulate"),
            Task::Audit => write!(f, "audit"),
            Task::RtBound => write!(f, "rt_bound"),
            Task::Probe(s) => write!(f, "probe:{s}"),
            Task::Refine => write!(f, "refine"),
            Task::QCheck => write!(f, "q_check"),
        }
    }
}

impl FromStr for Task {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "simulate" => Ok(Task::Simulate),
            "audit" => Ok(Task::Audit),
            "rt_bound" => Ok(Task::RtBound),
            "refine" => Ok(Task::Refine),
            "q_check" => Ok(Task::QCheck),
            other => match other.strip_prefix("probe:") {
                Some(seq @ ("power" | "scaled_sine")) => Ok(Task::Probe(seq.parse().map_err(|_| invalid("tasks", other))?)),
                _ => Err(invalid("tasks", format!("unknown task {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelTag,
    pub n_grid: usize,
    pub damping: f64,
    pub t_final: f64,
    pub dt: TimeStep,
    pub x0_preset: StatePreset,
    pub u_preset: ControlPreset,
    pub tasks: Vec<Task>,
    pub out_dir: PathBuf,
    /// Probe sequence length.
    pub n_max: usize,
    /// Grid sizes for `refine`; defaults to the `n_grid` grid and two coarsenings.
    pub refine_sizes: Vec<usize>,
    /// Random states drawn by `q_check`.
    pub samples: usize,
    pub seed: u64,
}

/// Largest accepted `n_grid`; dense eigensolvers beyond this are impractical.
pub const MAX_GRID: usize = 2001;

impl ExperimentConfig {
    pub fn resolved_dt(&self) -> f64 {
        match self.dt {
            TimeStep::Auto => 1.0 / (self.n_grid - 1) as f64,
            TimeStep::Fixed(dt) => dt,
        }
    }
}

fn parse_num<T: FromStr>(key: &'static str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| invalid(key, format!("cannot parse {v:?}")))
}

fn parse_grid(key: &'static str, v: &str) -> Result<usize, ConfigError> {
    let n: usize = parse_num(key, v)?;
    if !(3..=MAX_GRID).contains(&n) {
        return Err(invalid(key, format!("{n} is outside 3..={MAX_GRID}")));
    }
    Ok(n)
}

fn parse_positive(key: &'static str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse_num(key, v)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(key, format!("must be positive and finite, got {v}")));
    }
    Ok(x)
}

const KEYS: &[&str] = &[
    "model", "n_grid", "damping", "t_final", "dt", "x0_preset", "u_preset", "tasks", "out_dir", "n_max", "refine_sizes",
    "samples", "seed",
];

/// Parses config text. Every error names the offending key or line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut kv: BTreeMap<&'static str, String> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let k = k.trim();
        let key = *KEYS.iter().find(|&&known| known == k).ok_or_else(|| ConfigError::UnknownKey(k.to_string()))?;
        if kv.insert(key, v.trim().to_string()).is_some() {
            return Err(ConfigError::DuplicateKey(k.to_string()));
        }
    }
    let get = |k: &'static str| kv.get(k).map(String::as_str);
    let need = |k: &'static str| get(k).ok_or(ConfigError::MissingKey(k));

    let model: ModelTag = need("model")?.parse().map_err(|_| invalid("model", need("model").unwrap_or_default()))?;
    if model == ModelTag::Custom {
        return Err(invalid("model", "expected transport, heat or skew_damped"));
    }
    let n_grid = parse_grid("n_grid", need("n_grid")?)?;
    let damping = match get("damping") {
        None => 0.0,
        Some(_) if model != ModelTag::SkewDamped => return Err(invalid("damping", "only used by model = skew_damped")),
        Some(v) => {
            let d: f64 = parse_num("damping", v)?;
            if !(d >= 0.0 && d.is_finite()) {
                return Err(invalid("damping", format!("must be finite and non-negative, got {v}")));
            }
            d
        }
    };
    let t_final = parse_positive("t_final", need("t_final")?)?;
    let dt = match get("dt") {
        None | Some("auto") => TimeStep::Auto,
        Some(v) => TimeStep::Fixed(parse_positive("dt", v)?),
    };
    let x0_preset: StatePreset = {
        let v = need("x0_preset")?;
        v.parse().map_err(|_| invalid("x0_preset", format!("unknown preset {v:?}")))?
    };
    let u_preset = match get("u_preset") {
        None => ControlPreset::Zero,
        Some(v) => v.parse().map_err(|_| invalid("u_preset", format!("unknown preset {v:?}")))?,
    };
    let tasks = need("tasks")?
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Task>, _>>()?;
    if tasks.is_empty() {
        return Err(invalid("tasks", "no tasks listed"));
    }
    let out_dir = PathBuf::from(get("out_dir").unwrap_or("out"));
    let n_max = match get("n_max") {
        None => 8,
        Some(v) => match parse_num::<usize>("n_max", v)? {
            k @ 2..=64 => k,
            k => return Err(invalid("n_max", format!("{k} is outside 2..=64"))),
        },
    };
    let refine_sizes = match get("refine_sizes") {
        Some(v) => {
            let sizes = v.split(',').map(|s| parse_grid("refine_sizes", s.trim())).collect::<Result<Vec<_>, _>>()?;
            if sizes.len() < 3 || sizes.windows(2).any(|p| p[1] <= p[0]) {
                return Err(invalid("refine_sizes", "need at least three increasing sizes"));
            }
            sizes
        }
        None => {
            let cells = n_grid - 1;
            if cells % 4 != 0 || cells < 8 {
                if tasks.contains(&Task::Refine) {
                    return Err(invalid("refine_sizes", "n_grid - 1 is not a multiple of 4; list the sizes explicitly"));
                }
                Vec::new()
            } else {
                vec![cells / 4 + 1, cells / 2 + 1, n_grid]
            }
        }
    };
    let samples = match get("samples") {
        None => 100,
        Some(v) => match parse_num::<usize>("samples", v)? {
            k @ 1..=10_000 => k,
            k => return Err(invalid("samples", format!("{k} is outside 1..=10000"))),
        },
    };
    let seed = match get("seed") {
        None => 0,
        Some(v) => parse_num("seed", v)?,
    };

    let cfg = ExperimentConfig {
        model,
        n_grid,
        damping,
        t_final,
        dt,
        x0_preset,
        u_preset,
        tasks,
        out_dir,
        n_max,
        refine_sizes,
        samples,
        seed,
    };
    check_time_grid(&cfg)?;
    Ok(cfg)
}

fn check_time_grid(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let dt = cfg.resolved_dt();
    let steps = (cfg.t_final / dt).round();
    if (steps * dt - cfg.t_final).abs() > 1e-9 * cfg.t_final.max(1.0) || steps < 1.0 {
        return Err(invalid("dt", format!("t_final = {} is not a whole number of steps of {dt}", cfg.t_final)));
    }
    if steps > 1e6 {
        return Err(invalid("dt", format!("{steps} time steps is too many")));
    }
    if cfg.model == ModelTag::Transport {
        let h = 1.0 / (cfg.n_grid - 1) as f64;
        let k = (dt / h).round();
        if k < 1.0 || (k * h - dt).abs() > 1e-9 * h {
            return Err(invalid("dt", format!("transport needs a whole multiple of h = {h}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "model = transport\nn_grid = 201\nt_final = 1\nx0_preset = one\ntasks = audit\n";

    #[test]
    fn parses_full_config() {
        let text = "# comment\nmodel = skew_damped  # trailing\nn_grid = 41\ndamping = 0.3\nt_final = 0.5\ndt = 0.01\n\
                    x0_preset = sine:2\nu_preset = const:0.5\ntasks = simulate, probe:power, q_check\nout_dir = runs/a\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.model, ModelTag::SkewDamped);
        assert_eq!(cfg.damping, 0.3);
        assert_eq!(cfg.dt, TimeStep::Fixed(0.01));
        assert_eq!(cfg.x0_preset, StatePreset::Sine(2));
        assert_eq!(cfg.u_preset, ControlPreset::Const(0.5));
        assert_eq!(cfg.tasks, vec![Task::Simulate, Task::Probe(ProbeSequence::Power), Task::QCheck]);
        assert_eq!(cfg.out_dir, PathBuf::from("runs/a"));
        assert_eq!(cfg.refine_sizes, vec![11, 21, 41]);
    }

    #[test]
    fn defaults() {
        let cfg = parse_config(BASE).unwrap();
        assert_eq!(cfg.dt, TimeStep::Auto);
        assert!((cfg.resolved_dt() - 0.005).abs() < 1e-15);
        assert_eq!(cfg.u_preset, ControlPreset::Zero);
        assert_eq!(cfg.n_max, 8);
        assert_eq!(cfg.samples, 100);
    }

    #[test]
    fn missing_model() {
        let err = parse_config("n_grid = 11\nt_final = 1\nx0_preset = one\ntasks = audit\n").unwrap_err();
        assert_eq!(err.to_string(), "missing key: model");
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            (BASE.replace("transport", "wave"), "model"),
            (BASE.replace("201", "2"), "n_grid"),
            (BASE.replace("t_final = 1", "t_final = -1"), "t_final"),
            (format!("{BASE}dt = 0.003\n"), "dt"),
            (BASE.replace("= one", "= poly:x"), "x0_preset"),
            (format!("{BASE}u_preset = sin:1\n"), "u_preset"),
            (BASE.replace("audit", "audit, probe:cosine"), "tasks"),
            (format!("{BASE}damping = 0.3\n"), "damping"),
            (format!("{BASE}colour = red\n"), "colour"),
            (format!("{BASE}model = heat\n"), "model"),
            (format!("{BASE}n_max = 1\n"), "n_max"),
            (format!("{BASE}refine_sizes = 11, 5, 21\n"), "refine_sizes"),
        ];
        for (text, key) in cases {
            let err = parse_config(&text).unwrap_err().to_string();
            assert!(err.contains(key), "{err:?} should name {key}");
        }
        assert_eq!(parse_config("model transport").unwrap_err(), ConfigError::Syntax { line: 1 });
    }

    #[test]
    fn transport_dt_alignment() {
        assert!(parse_config(&format!("{BASE}dt = 0.01\n")).is_ok());
        assert!(parse_config(&format!("{BASE}dt = 0.0075\n")).is_err());
        let heat = BASE.replace("transport", "heat");
        assert!(parse_config(&format!("{heat}dt = 0.001\n")).is_ok());
    }

    #[test]
    fn refine_needs_sizes() {
        let text = BASE.replace("201", "50").replace("audit", "refine");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("refine_sizes"), "{err}");
        assert!(parse_config(&format!("{text}refine_sizes = 11,21,41\n")).is_ok());
    }

    #[test]
    fn task_display_round_trips() {
        for t in [Task::Simulate, Task::Audit, Task::RtBound, Task::Probe(ProbeSequence::ScaledSine), Task::Refine, Task::QCheck] {
            assert_eq!(t.to_string().parse::<Task>().unwrap(), t);
        }
    }
}
