#![no_main]

use hotpie_core::analysis::{gap_report, merge_coverage, parse_profiles};
use hotpie_core::RepresentationLevel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(profiles) = parse_profiles(text) {
        if let Ok(matrix) = merge_coverage(&profiles) {
            assert_eq!(matrix.gaps(RepresentationLevel::Represented), gap_report(&profiles, RepresentationLevel::Represented));
        }
    }
});
