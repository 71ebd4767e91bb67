//! Input manifest: one recording per row.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sonolab::factor::Variety;

use crate::CliError;

pub const MANIFEST_HEADER: [&str; 5] = ["wav", "annotation", "speaker", "variety", "notes"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub wav: PathBuf,
    pub annotation: PathBuf,
    pub speaker: String,
    pub variety: Variety,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Reads a manifest CSV; relative paths resolve against the manifest's directory.
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| e.to_string())?.clone();
        let expected: Vec<&str> = MANIFEST_HEADER.to_vec();
        let got: Vec<&str> = header.iter().collect();
        if got != expected && got != expected[..4] {
            return Err(format!(
                "line 1: header must be {}",
                MANIFEST_HEADER.join(",")
            ));
        }
        let mut entries = Vec::new();
        for (i, row) in rdr.deserialize::<ManifestEntry>().enumerate() {
            let mut e = row.map_err(|err| format!("line {}: {err}", i + 2))?;
            e.wav = base.join(&e.wav);
            e.annotation = base.join(&e.annotation);
            entries.push(e);
        }
        Ok(Manifest { entries })
    }

    /// Writes paths as given, relative or absolute.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(MANIFEST_HEADER).expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                e.wav.to_string_lossy().as_ref(),
                e.annotation.to_string_lossy().as_ref(),
                e.speaker.as_str(),
                e.variety.as_str(),
                e.notes.as_str(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
    }
}
