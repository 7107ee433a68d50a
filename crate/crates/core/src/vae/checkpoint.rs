//! Checkpoint file layout:
//!
//! ```text
//! "ARCVAE1" | header length (u32 LE) | JSON header | f32 LE blobs in header layer order
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Hyperparams, VaeParams};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 7] = b"ARCVAE1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerShape {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub hyperparams: Hyperparams,
    pub layers: Vec<LayerShape>,
    pub epoch: usize,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
}

impl CheckpointHeader {
    pub fn new(params: &VaeParams, hyperparams: &Hyperparams, epoch: usize, metrics: BTreeMap<String, f64>) -> Self {
        CheckpointHeader {
            hyperparams: hyperparams.clone(),
            layers: params
                .params()
                .into_iter()
                .map(|p| LayerShape {
                    name: p.name,
                    shape: p.shape,
                })
                .collect(),
            epoch,
            metrics,
        }
    }
}

pub fn encode_checkpoint(params: &VaeParams, header: &CheckpointHeader) -> Vec<u8> {
    let json = serde_json::to_vec(header).expect("header serializes");
    let mut out = Vec::with_capacity(11 + json.len() + 4 * params.params().iter().map(|p| p.data.len()).sum::<usize>());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for p in params.params() {
        for v in p.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Writes atomically via a temporary sibling file.
pub fn write_checkpoint(path: impl AsRef<Path>, params: &VaeParams, header: &CheckpointHeader) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_checkpoint(params, header);
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(VaeParams, CheckpointHeader)> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    if bytes.len() < 11 || &bytes[..7] != CHECKPOINT_MAGIC {
        return Err(bad("missing ARCVAE1 magic"));
    }
    let len = u32::from_le_bytes(bytes[7..11].try_into().expect("4 bytes")) as usize;
    let json = bytes.get(11..11 + len).ok_or_else(|| bad("truncated header"))?;
    let header: CheckpointHeader =
        serde_json::from_slice(json).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
    let mut params = VaeParams::new(&header.hyperparams)?;
    let expected: Vec<LayerShape> = params
        .params()
        .into_iter()
        .map(|p| LayerShape {
            name: p.name,
            shape: p.shape,
        })
        .collect();
    if expected != header.layers {
        return Err(bad("layer table does not match the hyperparameters"));
    }
    let mut blob = &bytes[11 + len..];
    for slot in params.params_mut() {
        let need = slot.len() * 4;
        if blob.len() < need {
            return Err(bad("truncated weights"));
        }
        for (v, chunk) in slot.iter_mut().zip(blob[..need].chunks_exact(4)) {
            *v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        }
        blob = &blob[need..];
    }
    if !blob.is_empty() {
        return Err(bad("trailing bytes after weights"));
    }
    Ok((params, header))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<(VaeParams, CheckpointHeader)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
