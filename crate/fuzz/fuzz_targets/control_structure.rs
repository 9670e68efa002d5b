#![no_main]

use hotpie_core::model::{OpContext, Project};
use hotpie_core::stpa::{import_control_structure, materialize, prompts_for_relations};
use hotpie_core::taxonomy::default_catalog;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cs) = import_control_structure(text) {
        let ctx = OpContext::now("fuzz");
        let mut p = Project::new("fuzz", "fuzz", &ctx);
        let mapping = materialize(&mut p, &cs, &ctx);
        assert_eq!(materialize(&mut p, &cs, &ctx), mapping);
        let prompts = prompts_for_relations(&p, default_catalog(), &cs, &mapping).expect("every node is mapped");
        assert!(prompts.len() <= 36 * cs.relations.len());
    }
});
