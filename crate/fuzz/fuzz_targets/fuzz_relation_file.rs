#![no_main]

use kreinkit::io;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = io::parse_any(data);
    let Ok(a) = io::parse_relation(data) else {
        return;
    };
    let again = io::parse_relation(io::emit_relation(&a).as_bytes()).expect("emitted relation parses");
    assert_eq!(again.space_dim(), a.space_dim());
    assert_eq!(again.graph_dim(), a.graph_dim());
});
