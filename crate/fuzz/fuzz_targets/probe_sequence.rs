#![no_main]
use libfuzzer_sys::fuzz_target;
use phdiss::dissipation::ProbeSequence;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(seq) = s.parse::<ProbeSequence>() {
            assert_eq!(seq.to_string().parse::<ProbeSequence>().unwrap(), seq);
        }
    }
});
