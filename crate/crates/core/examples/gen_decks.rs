//! Regenerates `decks/*.deck` from the surrogate builders.
//!
//! `cargo run -p vibrakit-core --example gen_decks [out-dir]`

use std::path::PathBuf;

use vibrakit_core::model::write_deck;
use vibrakit_core::surrogate::sample_decks;

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../decks")
    });
    std::fs::create_dir_all(&dir)?;
    let dir = dir.canonicalize()?;
    for (name, model) in sample_decks() {
        let path = dir.join(format!("{name}.deck"));
        std::fs::write(&path, write_deck(&model))?;
        println!("{}", path.display());
    }
    Ok(())
}
