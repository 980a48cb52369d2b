//! Regenerates the shipped system files from the reference models.
//!
//! cargo run -p brst-lab --example write_systems -- systems

use std::path::PathBuf;

use brst_core::models;
use brst_lab::system::{to_file, to_pretty_json};

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "systems".into()));
    std::fs::create_dir_all(&dir)?;
    for sys in [
        models::abelian_m1(),
        models::abelian_m2(),
        models::su2_spin_half_plus_trivial(),
        models::su2_spin_one_plus_trivial(),
    ] {
        let file = to_file(&sys.name, &sys.constants, &sys.g, None);
        let path = dir.join(format!("{}.json", sys.name));
        std::fs::write(&path, to_pretty_json(&file))?;
        println!("{}", path.display());
    }
    Ok(())
}
