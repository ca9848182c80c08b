#![no_main]

use c1pk::study::{rows_from_csv, rows_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = rows_from_csv(text) {
        // anything accepted must survive a round trip
        let again = rows_from_csv(&rows_to_csv(&rows)).expect("re-parse of emitted CSV");
        assert_eq!(again.len(), rows.len());
    }
});
