#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(inst) = cbdec::instance::parse_instance(text) {
            let again = cbdec::instance::instance_to_json(&inst).to_string();
            assert_eq!(cbdec::instance::parse_instance(&again).ok(), Some(inst));
        }
    }
});
