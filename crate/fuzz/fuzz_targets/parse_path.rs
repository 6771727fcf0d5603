#![no_main]

use libfuzzer_sys::fuzz_target;
use relout::fixture::{format_path, load_bundled, parse_path};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    for (name, point) in [("FIB", "rose-unit"), ("LOLLI", "X")] {
        let fx = load_bundled(name).unwrap();
        let x = fx.point(point).unwrap();
        if let Ok(p) = parse_path(&x.graph, x.base, s) {
            let back = parse_path(&x.graph, x.base, &format_path(&x.graph, &p)).unwrap();
            assert_eq!(format_path(&x.graph, &back), format_path(&x.graph, &p));
        }
    }
});
