#![no_main]
use libfuzzer_sys::fuzz_target;
use phdiss_cli::config::{parse_config, Task};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_config(s) {
            assert!(cfg.n_grid >= 3 && cfg.t_final > 0.0 && cfg.resolved_dt() > 0.0);
            assert!(!cfg.tasks.is_empty());
            for t in &cfg.tasks {
                assert_eq!(t.to_string().parse::<Task>().as_ref(), Ok(t));
            }
        }
    }
});
