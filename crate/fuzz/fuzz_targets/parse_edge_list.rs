#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((stream, stats)) = rept::stream::parse_edge_list(text) else {
        return;
    };
    assert_eq!(stats.edges, stream.len());
    for e in stream.edges() {
        assert!(e.u() < e.v());
        assert!((e.v() as usize) < stream.node_count());
    }
    // serialized form must parse back to the same stream
    let (again, _) = rept::stream::parse_edge_list(&stream.to_edge_list()).unwrap();
    assert_eq!(again, stream);
});
