//! Reading inputs with their digests and writing outputs that carry the
//! run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use rado_core::adversary::{CandidateDecomposer, MachineEntry};
use rado_core::coloring::ColoringFile;
use rado_core::paths::{DecompositionFile, TraceFile};
use rado_core::{Coloring, DecompState, Trace};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// SHA-256 digests of the files a run read, keyed by role.
pub type Inputs = BTreeMap<String, String>;

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_json<T: DeserializeOwned>(path: &Path, role: &str, inputs: &mut Inputs) -> Result<T, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    inputs.insert(role.to_string(), digest(&bytes));
    serde_json::from_slice(&bytes).map_err(|e| CliError::Parse { path: path.display().to_string(), msg: e.to_string() })
}

fn malformed(path: &Path, e: rado_core::Error) -> CliError {
    CliError::Parse { path: path.display().to_string(), msg: e.to_string() }
}

pub fn read_coloring(path: &Path, inputs: &mut Inputs) -> Result<Coloring, CliError> {
    let file: ColoringFile = read_json(path, "coloring", inputs)?;
    Coloring::from_file(&file).map_err(|e| malformed(path, e))
}

pub fn read_decomposition(path: &Path, inputs: &mut Inputs) -> Result<DecompState, CliError> {
    let file: DecompositionFile = read_json(path, "decomposition", inputs)?;
    DecompState::from_file(&file).map_err(|e| malformed(path, e))
}

pub fn read_trace(path: &Path, inputs: &mut Inputs) -> Result<Trace, CliError> {
    let file: TraceFile = read_json(path, "trace", inputs)?;
    Trace::from_file(&file).map_err(|e| malformed(path, e))
}

pub fn read_machines(path: &Path, inputs: &mut Inputs) -> Result<Vec<MachineEntry>, CliError> {
    read_json(path, "machines", inputs)
}

pub fn read_candidates(path: &Path, inputs: &mut Inputs) -> Result<Vec<CandidateDecomposer>, CliError> {
    read_json(path, "candidates", inputs)
}

/// Serializes `body` (which must be a JSON object), adds `extra` fields and
/// the `config` / `inputs` echo, and writes it with a trailing newline.
pub fn write_output(
    path: &Path,
    body: &impl Serialize,
    extra: Vec<(&str, Value)>,
    cfg: &RunConfig,
    inputs: &Inputs,
) -> Result<(), CliError> {
    let mut value = serde_json::to_value(body).map_err(|e| CliError::Failure(format!("serializing output: {e}")))?;
    let Value::Object(map) = &mut value else {
        return Err(CliError::Failure("output body is not a JSON object".into()));
    };
    for (k, v) in extra {
        map.insert(k.to_string(), v);
    }
    map.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    map.insert("inputs".into(), serde_json::to_value(inputs).expect("digests serialize"));
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("core types serialize")
}
