pub mod dataset;
pub mod distort;
pub mod eval;
pub mod matching;
pub mod project;
pub mod stitch;
pub mod weights;

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Lists the `.png` files directly under `dir`, sorted by name so every
/// run visits them in the same order regardless of filesystem order.
pub fn png_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|entry| {
            let path = entry.ok()?.path();
            (path.is_file() && path.extension().and_then(|e| e.to_str()) == Some("png"))
                .then_some(path)
        })
        .collect();
    files.sort_unstable();
    if files.is_empty() {
        return Err(CliError::io(format!(
            "no .png files found in {}",
            dir.display()
        )));
    }
    Ok(files)
}

/// Writes `text` to `path`, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}
