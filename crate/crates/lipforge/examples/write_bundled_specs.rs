//! Regenerate the bundled spec files: `cargo run --example
//! write_bundled_specs -- <dir>` (defaults to `specs/`).

use lipforge::specs;
use std::path::PathBuf;

fn main() {
    let dir: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "specs".into()).into();
    std::fs::create_dir_all(&dir).expect("create output directory");
    for (name, spec) in specs::bundled() {
        let path = dir.join(format!("{name}.json"));
        spec.save(&path).expect("write spec");
        println!("wrote {}", path.display());
    }
}
