#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(entries) = cbdec::testkit::parse_manifest(text) {
            let again = cbdec::testkit::format_manifest(&entries);
            assert_eq!(cbdec::testkit::parse_manifest(&again).ok(), Some(entries));
        }
    }
});
