//! Regenerates the JSON fixture corpus.
//!
//! ```text
//! cargo run --example write_corpus [-- DIR]
//! ```

use std::path::PathBuf;

use annograph::corpus;
use annograph::io::write_documents;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    for (rel, docs) in corpus::files() {
        let path = root.join(rel);
        write_documents(&path, &docs)?;
        println!("{}", path.display());
    }
    Ok(())
}
