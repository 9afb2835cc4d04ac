//! Output files, each stamped with the manifest hash.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::manifest::RunManifest;
use crate::CliError;

pub struct Outputs {
    dir: PathBuf,
    hash: String,
}

impl Outputs {
    /// Creates the output directory and writes `manifest.json` into it.
    pub fn create(manifest: &RunManifest) -> Result<Self, CliError> {
        fs::create_dir_all(&manifest.out)?;
        let out = Self { dir: manifest.out.clone(), hash: manifest.hash() };
        out.json("manifest.json", serde_json::to_value(manifest)?)?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// A CSV writer whose first line is `# manifest-sha256: <hash>`.
    pub fn csv(&self, name: &str, columns: &str) -> Result<CsvFile, CliError> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        writeln!(w, "# manifest-sha256: {}", self.hash)?;
        writeln!(w, "{columns}")?;
        Ok(CsvFile { w })
    }

    /// JSON files carry the hash as a `manifest_sha256` field.
    pub fn json(&self, name: &str, value: Value) -> Result<(), CliError> {
        let mut obj = match value {
            Value::Object(m) => m,
            other => Map::from_iter([("value".to_string(), other)]),
        };
        obj.insert("manifest_sha256".into(), Value::String(self.hash.clone()));
        fs::write(self.path(name), serde_json::to_string_pretty(&Value::Object(obj))? + "\n")?;
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

pub struct CsvFile {
    w: BufWriter<File>,
}

impl CsvFile {
    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        writeln!(self.w, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w.flush()?;
        Ok(())
    }
}
