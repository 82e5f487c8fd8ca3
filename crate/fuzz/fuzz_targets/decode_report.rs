#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = rept::EstimateReport::from_json(text) {
        assert_eq!(report.per_processor.len(), report.c as usize);
        let encoded = report.to_json().unwrap();
        rept::EstimateReport::from_json(&encoded).unwrap();
    }
});
