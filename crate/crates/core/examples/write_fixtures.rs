//! Regenerates `fixtures/` from the seeded corpus.

use std::path::Path;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir)?;
    for f in mvb::corpus::fixtures() {
        let path = dir.join(f.file_name());
        std::fs::write(&path, f.text())?;
        println!("{}", path.display());
    }
    Ok(())
}
