#![no_main]

use libfuzzer_sys::fuzz_target;
use relout::fixture::parse_fixture;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(fx) = parse_fixture(s) {
        let again = parse_fixture(&fx.to_json()).expect("serialized fixtures parse");
        assert_eq!(again.to_json(), fx.to_json());
    }
});
