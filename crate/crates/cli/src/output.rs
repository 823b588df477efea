use std::fs;
use std::io::{IsTerminal, Write};
use std::path::Path;

use tempfile::NamedTempFile;

use crate::CliError;

/// Write `contents` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    let wrap = |source| CliError::Write {
        path: path.clone(),
        source,
    };
    fs::create_dir_all(dir).map_err(wrap)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(contents).map_err(wrap)?;
    tmp.as_file().sync_all().map_err(wrap)?;
    tmp.persist(&path).map_err(|e| wrap(e.error))?;
    Ok(())
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// ANSI colors only on a terminal and only when ATOMGRID_NO_COLOR is unset.
pub fn use_color() -> bool {
    std::env::var_os("ATOMGRID_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}
