#![no_main]
use libfuzzer_sys::fuzz_target;
use phdiss::presets::ControlPreset;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(p) = s.parse::<ControlPreset>() {
            assert_eq!(p.to_string().parse::<ControlPreset>().unwrap(), p);
            assert!(p.eval(0.5).is_finite());
        }
    }
});
