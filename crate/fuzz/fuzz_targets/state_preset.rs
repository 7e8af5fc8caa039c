#![no_main]
use libfuzzer_sys::fuzz_target;
use phdiss::discretization::make_uniform_grid;
use phdiss::presets::StatePreset;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(p) = s.parse::<StatePreset>() {
            assert_eq!(p.to_string().parse::<StatePreset>().unwrap(), p);
            let g = make_uniform_grid(5).unwrap();
            assert!(p.sample(&g).values().iter().all(|v| v.re.is_finite()));
        }
    }
});
