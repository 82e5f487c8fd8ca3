#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = rept::exact::ExactSummary::from_json(text) {
        let encoded = doc.to_json().unwrap();
        assert_eq!(rept::exact::ExactSummary::from_json(&encoded).unwrap(), doc);
    }
});
