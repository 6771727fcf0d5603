//! Replays the checked-in fuzz seeds through the fuzz targets' round-trip checks.

use std::path::Path;

use relout::fixture::{format_path, load_bundled, parse_fixture, parse_path, parse_word_bounded};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn word_seeds_roundtrip() {
    let mut parsed = 0;
    for (_, s) in seeds("parse_word") {
        for name in ["FIB", "LOLLI", "W3"] {
            let fx = load_bundled(name).unwrap();
            if let Ok(w) = parse_word_bounded(&fx.fs, &s) {
                assert_eq!(fx.fs.parse_word(&fx.fs.format_word(&w)).unwrap(), w);
                parsed += 1;
            }
        }
    }
    assert!(parsed > 0);
}

#[test]
fn path_seeds_roundtrip() {
    let mut parsed = 0;
    for (_, s) in seeds("parse_path") {
        for (name, point) in [("FIB", "rose-unit"), ("LOLLI", "X")] {
            let fx = load_bundled(name).unwrap();
            let x = fx.point(point).unwrap();
            if let Ok(p) = parse_path(&x.graph, x.base, &s) {
                let back = parse_path(&x.graph, x.base, &format_path(&x.graph, &p)).unwrap();
                assert_eq!(format_path(&x.graph, &back), format_path(&x.graph, &p));
                parsed += 1;
            }
        }
    }
    assert!(parsed > 0);
}

#[test]
fn fixture_seeds_roundtrip() {
    for (file, s) in seeds("parse_fixture") {
        let fx = parse_fixture(&s).unwrap_or_else(|e| panic!("{file}: {e}"));
        assert_eq!(parse_fixture(&fx.to_json()).unwrap().to_json(), fx.to_json());
    }
}
