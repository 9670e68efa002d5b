#![no_main]

use hotpie_core::io::{load_project, save_project};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(project) = load_project(text) {
        let saved = save_project(&project);
        let reloaded = load_project(&saved).expect("saved project reloads");
        assert_eq!(reloaded, project);
        assert_eq!(save_project(&reloaded), saved);
    }
});
