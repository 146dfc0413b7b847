use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;
use xxz_lindblad::Trajectory64;

use crate::error::CliError;

/// Directory that receives a run's files. Every write goes through a
/// temporary file in the same directory and is renamed into place.
#[derive(Clone, Debug)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(format!("creating {}", root.display()), e))?;
        Ok(Self { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn subdir(&self, name: &str) -> Result<Self, CliError> {
        Self::create(self.root.join(name))
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.root.join(name);
        let ctx = || format!("writing {}", target.display());
        let mut tmp = NamedTempFile::new_in(&self.root).map_err(|e| CliError::io(ctx(), e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(ctx(), e))?;
        tmp.as_file().sync_all().map_err(|e| CliError::io(ctx(), e))?;
        tmp.persist(&target).map_err(|e| CliError::io(ctx(), e.error))?;
        Ok(target)
    }

    pub fn write_json<S: Serialize>(&self, name: &str, value: &S) -> Result<PathBuf, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(format!("{name}: {e}")))?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// `t,distance` rows in shortest round-trip float form.
    pub fn write_trajectory(&self, name: &str, traj: &Trajectory64) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Output(format!("{name}: {e}"));
        w.write_record(["t", "distance"]).map_err(csv_err)?;
        for (t, d) in traj.times.iter().zip(&traj.distances) {
            w.serialize((t, d)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(format!("{name}: {e}")))?;
        self.write_bytes(name, &bytes)
    }
}

/// Reads a trajectory file back as `(times, distances)`.
pub fn read_trajectory(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    let headers = r.headers().map_err(|e| CliError::Output(e.to_string()))?;
    if headers != vec!["t", "distance"] {
        return Err(CliError::Output(format!("{}: unexpected header {headers:?}", path.display())));
    }
    let mut times = Vec::new();
    let mut distances = Vec::new();
    for row in r.deserialize() {
        let (t, d): (f64, f64) = row.map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        times.push(t);
        distances.push(d);
    }
    Ok((times, distances))
}
