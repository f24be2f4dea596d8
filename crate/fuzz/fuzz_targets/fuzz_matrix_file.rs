#![no_main]

use kreinkit::io;
use kreinkit::spectral::{inertia_of, SymmetricMatrix, ToleranceProfile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(m) = io::parse_matrix(data) else {
        return;
    };
    let again = io::parse_matrix(io::emit_matrix(&m).as_bytes()).expect("emitted matrix parses");
    assert_eq!(again, m);
    if m.nrows() <= 16 {
        if let Ok(s) = SymmetricMatrix::new(m) {
            let i = inertia_of(&s, &ToleranceProfile::DEFAULT).expect("inertia of a parsed matrix");
            assert_eq!(i.dim(), s.dim());
        }
    }
});
