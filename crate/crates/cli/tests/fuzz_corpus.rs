//! Replays the checked-in fuzz seeds through the fuzz targets' assertions.

use std::fs;
use std::path::PathBuf;

use phdiss::discretization::make_uniform_grid;
use phdiss::dissipation::ProbeSequence;
use phdiss::presets::{ControlPreset, StatePreset};
use phdiss_cli::config::{parse_config, Task};

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for s in seeds("config_parser") {
        if let Ok(cfg) = parse_config(&s) {
            accepted += 1;
            assert!(cfg.n_grid >= 3 && cfg.t_final > 0.0 && cfg.resolved_dt() > 0.0);
            for t in &cfg.tasks {
                assert_eq!(t.to_string().parse::<Task>().as_ref(), Ok(t));
            }
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn preset_seeds() {
    let g = make_uniform_grid(5).unwrap();
    for s in seeds("state_preset") {
        if let Ok(p) = s.parse::<StatePreset>() {
            assert_eq!(p.to_string().parse::<StatePreset>().unwrap(), p);
            assert!(p.sample(&g).values().iter().all(|v| v.re.is_finite()));
        }
    }
    for s in seeds("control_preset") {
        if let Ok(p) = s.parse::<ControlPreset>() {
            assert_eq!(p.to_string().parse::<ControlPreset>().unwrap(), p);
            assert!(p.eval(0.5).is_finite());
        }
    }
    for s in seeds("probe_sequence") {
        if let Ok(seq) = s.parse::<ProbeSequence>() {
            assert_eq!(seq.to_string().parse::<ProbeSequence>().unwrap(), seq);
        }
    }
}
