//! Regenerates the bundled example data.
//!
//! ```text
//! cargo run -p mfdb --example write_data -- data
//! ```

use std::path::PathBuf;

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"));
    if let Err(e) = mfdb::bundle::write_bundle(&dir) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
    println!("wrote {}", dir.display());
}
