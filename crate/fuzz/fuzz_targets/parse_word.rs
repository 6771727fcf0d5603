#![no_main]

use libfuzzer_sys::fuzz_target;
use relout::fixture::{load_bundled, parse_word_bounded};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    for name in ["FIB", "LOLLI", "W3"] {
        let fx = load_bundled(name).unwrap();
        if let Ok(w) = parse_word_bounded(&fx.fs, s) {
            // normal forms print and parse back to themselves
            assert_eq!(fx.fs.parse_word(&fx.fs.format_word(&w)).unwrap(), w);
        }
    }
});
