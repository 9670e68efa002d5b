#![no_main]

use hotpie_core::taxonomy::{load_catalog, ReferenceCatalog};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cat) = load_catalog(data) {
        let again = ReferenceCatalog::from_json(&cat.to_json()).expect("serialized catalog reloads");
        assert_eq!(again, cat);
    }
});
