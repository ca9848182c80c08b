#![no_main]

use c1pk::study::StudyReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = StudyReport::from_json(text) {
        let _ = report.to_csv();
        let _ = report.to_table();
        let _ = report.config.validate();
    }
});
