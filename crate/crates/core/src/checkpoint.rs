//! JSON checkpoints of trained models and atomic file output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::TrainedModel;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub software_version: String,
    pub model: TrainedModel,
}

impl Checkpoint {
    pub fn new(model: TrainedModel) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            model,
        }
    }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(
        ".{}.tmp-{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn write_json_atomic<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn save_checkpoint(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    model.check_consistent()?;
    write_json_atomic(path, &Checkpoint::new(model.clone()))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text)
}

pub fn parse_checkpoint(text: &str) -> Result<TrainedModel> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let checkpoint: Checkpoint = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Checkpoint(format!("{} at `{}`", e.inner(), e.path())))?;
    if checkpoint.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {} is not supported (expected {CHECKPOINT_FORMAT_VERSION})",
            checkpoint.format_version
        )));
    }
    checkpoint.model.check_consistent()?;
    Ok(checkpoint.model)
}
