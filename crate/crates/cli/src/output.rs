//! All-or-nothing output: files are staged next to their targets and renamed
//! into place only after every one of them was written.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a file at `name`, relative to the output directory.
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn commit(self, dir: &Path) -> std::io::Result<()> {
        let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(self.files.len());
        let result = (|| {
            for (name, bytes) in &self.files {
                let target = dir.join(name);
                if let Some(parent) = target.parent() {
                    fs::create_dir_all(parent)?;
                }
                let file_name = target.file_name().expect("output names are files").to_string_lossy();
                let tmp = target.with_file_name(format!(".{file_name}.partial"));
                staged.push((tmp.clone(), target));
                let mut f = fs::File::create(&tmp)?;
                f.write_all(bytes)?;
                f.sync_all()?;
            }
            for (tmp, target) in &staged {
                fs::rename(tmp, target)?;
            }
            Ok(())
        })();
        if result.is_err() {
            for (tmp, _) in &staged {
                let _ = fs::remove_file(tmp);
            }
        }
        result
    }
}
