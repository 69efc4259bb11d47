//! The shipped fixtures match the seeded corpus and round-trip byte for byte.

use mvb::corpus;
use mvb::format;
use std::path::PathBuf;

#[test]
fn fixtures_on_disk_match_the_corpus() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for f in corpus::fixtures() {
        let on_disk = std::fs::read_to_string(dir.join(f.file_name())).unwrap();
        assert_eq!(on_disk, f.text(), "{} is stale; rerun the write_fixtures example", f.name);
        let reparsed = format::parse(on_disk.as_bytes()).unwrap();
        assert_eq!(format::write(&reparsed), on_disk, "{} does not round-trip", f.name);
    }
}
