//! CSV artifacts: atomic file writes, or stdout when no path is given.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::experiments::Table;

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Where each table goes: a lone table at `out` itself, several at
/// `<stem>-<table>.<ext>` beside it.
pub fn table_paths(out: &Path, tables: &[Table]) -> Vec<PathBuf> {
    if tables.len() == 1 {
        return vec![out.to_path_buf()];
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    tables.iter().map(|t| out.with_file_name(format!("{stem}-{}.{ext}", t.name))).collect()
}

/// Emits every table; returns the paths written (empty for stdout).
pub fn emit(tables: &[Table], out: Option<&Path>) -> io::Result<Vec<PathBuf>> {
    match out {
        Some(out) => {
            let paths = table_paths(out, tables);
            for (t, p) in tables.iter().zip(&paths) {
                write_atomic(p, &t.csv)?;
            }
            Ok(paths)
        }
        None => {
            let mut stdout = io::stdout().lock();
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    stdout.write_all(b"\n")?;
                }
                stdout.write_all(&t.csv)?;
            }
            stdout.flush()?;
            Ok(Vec::new())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(name: &str) -> Table {
        Table { name: name.into(), csv: b"a,b\n1,2\n".to_vec() }
    }

    #[test]
    fn several_tables_get_suffixed_paths() {
        let paths = table_paths(Path::new("out/run.csv"), &[table("x"), table("y")]);
        assert_eq!(paths, vec![PathBuf::from("out/run-x.csv"), PathBuf::from("out/run-y.csv")]);
        assert_eq!(table_paths(Path::new("r.csv"), &[table("x")]), vec![PathBuf::from("r.csv")]);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/r.csv");
        write_atomic(&p, b"old\n").unwrap();
        write_atomic(&p, b"new\n").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"new\n");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
