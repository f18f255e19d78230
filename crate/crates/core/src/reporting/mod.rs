//! Artifact emission: measurement CSVs, SVG plots, HTML summary, manifest.

mod html;
mod svg;
mod table;

pub use html::{html_summary, HtmlInputs};
pub use svg::{plot_convergence_svg, plot_points_svg, plot_shift_svg, ERROR_FLOOR, INTERFACE_SAMPLES};
pub use table::{measurements_csv_string, read_measurements_csv, shift_csv_string, write_measurements_csv, CSV_HEADER};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    Csv,
    Json,
    Svg,
    Html,
}

impl ArtifactKind {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(ArtifactKind::Csv),
            "json" => Some(ArtifactKind::Json),
            "svg" => Some(ArtifactKind::Svg),
            "html" => Some(ArtifactKind::Html),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub kind: ArtifactKind,
    pub bytes: u64,
    pub command: String,
}

/// Index of everything a run wrote, stored as `manifest.json` in the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactManifest {
    pub output_dir: String,
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl ArtifactManifest {
    pub fn new(output_dir: &Path) -> Self {
        ArtifactManifest {
            output_dir: output_dir.display().to_string(),
            entries: Vec::new(),
        }
    }

    /// Records an existing, non-empty file below the output directory.
    pub fn record(&mut self, path: &Path, command: &str) -> Result<()> {
        let root = Path::new(&self.output_dir);
        let rel = path
            .strip_prefix(root)
            .map_err(|_| Error::invalid(format!("{} is outside {}", path.display(), root.display())))?;
        let kind = ArtifactKind::from_path(path)
            .ok_or_else(|| Error::invalid(format!("unknown artifact type: {}", path.display())))?;
        let bytes = fs::metadata(path).map_err(|e| Error::io(path, e))?.len();
        if bytes == 0 {
            return Err(Error::invalid(format!("artifact {} is empty", path.display())));
        }
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        self.entries.retain(|e| e.path != rel);
        self.entries.push(ManifestEntry {
            path: rel,
            kind,
            bytes,
            command: command.to_string(),
        });
        Ok(())
    }

    /// Merges entries from an existing manifest (same output directory); newer entries win.
    pub fn merge_existing(&mut self) {
        let path = Path::new(&self.output_dir).join(MANIFEST_FILE);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(old) = serde_json::from_str::<ArtifactManifest>(&text) {
                let mut merged: Vec<ManifestEntry> = old
                    .entries
                    .into_iter()
                    .filter(|e| !self.entries.iter().any(|n| n.path == e.path))
                    .filter(|e| Path::new(&self.output_dir).join(&e.path).is_file())
                    .collect();
                merged.append(&mut self.entries);
                self.entries = merged;
            }
        }
    }

    pub fn write(&self) -> Result<PathBuf> {
        let path = Path::new(&self.output_dir).join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// `root/{csv,plots,summary}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactLayout {
    pub root: PathBuf,
}

impl ArtifactLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ArtifactLayout { root: root.into() }
    }

    pub fn csv_dir(&self) -> PathBuf {
        self.root.join("csv")
    }

    pub fn plots_dir(&self) -> PathBuf {
        self.root.join("plots")
    }

    pub fn summary_dir(&self) -> PathBuf {
        self.root.join("summary")
    }

    pub fn create(&self) -> Result<()> {
        for d in [self.csv_dir(), self.plots_dir(), self.summary_dir()] {
            fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
        Ok(())
    }
}

/// File-name-safe form of an identifier.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
