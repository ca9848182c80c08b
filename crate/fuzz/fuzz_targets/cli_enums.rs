#![no_main]

use c1pk::assembly::SolverKind;
use c1pk::element::Family;
use c1pk::solver::PrecondKind;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = s.parse::<Family>() {
        assert_eq!(f.as_str().parse::<Family>().ok(), Some(f));
    }
    let _ = s.parse::<SolverKind>();
    let _ = s.parse::<PrecondKind>();
});
