//! Writes the bundled game files: `cargo run --example write_games -- games`.
use polyce::fixtures::{constant_game, embedded_trap, unique_ce_quadratic};

fn main() -> std::io::Result<()> {
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "games".into()));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("quadratic.json"), unique_ce_quadratic().to_json())?;
    std::fs::write(dir.join("embedded.json"), embedded_trap().to_json())?;
    std::fs::write(dir.join("constant.json"), constant_game(2, 1.0).to_json())?;
    Ok(())
}
