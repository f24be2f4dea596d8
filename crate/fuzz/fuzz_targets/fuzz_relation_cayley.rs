#![no_main]

use kreinkit::io;
use kreinkit::relations::{classify, relation_inertia};
use kreinkit::spectral::ToleranceProfile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(a) = io::parse_relation(data) else {
        return;
    };
    if a.space_dim() > 12 {
        return;
    }
    let tol = ToleranceProfile::DEFAULT;
    let image = a.cayley();
    assert_eq!(image.graph_dim(), a.graph_dim());
    let _ = classify(&a, &tol);
    let _ = relation_inertia(&a, &tol);
    let _ = image.as_bounded_operator(&tol);
});
