//! Replays the checked-in fuzz seeds through the checks the fuzz targets make.

use std::path::PathBuf;

use kreinkit::io;
use kreinkit::relations::{classify, relation_inertia};
use kreinkit::spectral::{inertia_of, SymmetricMatrix, ToleranceProfile};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn matrix_seeds() {
    let mut parsed = 0;
    for (path, data) in seeds("fuzz_matrix_file") {
        let Ok(m) = io::parse_matrix(&data) else {
            continue;
        };
        parsed += 1;
        let again = io::parse_matrix(io::emit_matrix(&m).as_bytes()).unwrap();
        assert_eq!(again, m, "{}", path.display());
        if let Ok(s) = SymmetricMatrix::new(m) {
            assert_eq!(inertia_of(&s, &ToleranceProfile::DEFAULT).unwrap().dim(), s.dim());
        }
    }
    assert!(parsed > 0);
}

#[test]
fn relation_seeds() {
    let tol = ToleranceProfile::DEFAULT;
    for target in ["fuzz_relation_file", "fuzz_relation_cayley"] {
        for (path, data) in seeds(target) {
            let _ = io::parse_any(&data);
            let Ok(a) = io::parse_relation(&data) else {
                continue;
            };
            let again = io::parse_relation(io::emit_relation(&a).as_bytes()).unwrap();
            assert_eq!(again.graph_dim(), a.graph_dim(), "{}", path.display());
            assert_eq!(a.cayley().graph_dim(), a.graph_dim());
            let _ = classify(&a, &tol);
            let _ = relation_inertia(&a, &tol);
        }
    }
}
