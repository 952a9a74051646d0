//! Binary checkpoint container.
//!
//! Layout: the 8-byte magic `SEGSUMCK`, a little-endian `u32` format
//! version, a `u64` header length, the JSON header, then every tensor's data
//! as little-endian `f64` in header order (value, then Adam `m` and `v` when
//! optimizer state is present).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ParameterStore, Tensor};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SEGSUMCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub value: Tensor,
    pub adam: Option<(Tensor, Tensor)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub format_version: u32,
    pub model_kind: String,
    pub hyperparameters: serde_json::Value,
    pub seed: u64,
    pub step: u64,
    pub tensors: Vec<NamedTensor>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model_kind: String,
    hyperparameters: serde_json::Value,
    seed: u64,
    step: u64,
    tensors: Vec<TensorEntry>,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    optimizer_state: bool,
}

impl Checkpoint {
    pub fn from_store(
        store: &ParameterStore,
        model_kind: &str,
        hyperparameters: serde_json::Value,
        include_optimizer: bool,
    ) -> Self {
        let tensors = store
            .params()
            .map(|(name, p)| NamedTensor {
                name: name.to_string(),
                value: p.value.clone(),
                adam: include_optimizer.then(|| (p.m.clone(), p.v.clone())),
            })
            .collect();
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            model_kind: model_kind.to_string(),
            hyperparameters,
            seed: store.seed(),
            step: store.step(),
            tensors,
        }
    }

    /// Overwrite the values (and optimizer state, if saved) of an already
    /// constructed store. Names and shapes must match exactly.
    pub fn restore_into(&self, store: &mut ParameterStore) -> Result<()> {
        let expected: Vec<&str> = store.names().collect();
        let found: Vec<&str> = self.tensors.iter().map(|t| t.name.as_str()).collect();
        if expected != found {
            return Err(Error::Checkpoint(format!(
                "parameter names differ from the model ({} expected, {} found)",
                expected.len(),
                found.len()
            )));
        }
        for t in &self.tensors {
            let p = store.param_mut(&t.name);
            if p.value.shape() != t.value.shape() {
                return Err(Error::Checkpoint(format!(
                    "`{}` has shape {:?}, model expects {:?}",
                    t.name,
                    t.value.shape(),
                    p.value.shape()
                )));
            }
            p.value = t.value.clone();
            if let Some((m, v)) = &t.adam {
                p.m = m.clone();
                p.v = v.clone();
            }
        }
        store.set_step(self.step);
        Ok(())
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.model_kind != kind {
            return Err(Error::Checkpoint(format!(
                "checkpoint holds a `{}` model, expected `{kind}`",
                self.model_kind
            )));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            model_kind: self.model_kind.clone(),
            hyperparameters: self.hyperparameters.clone(),
            seed: self.seed,
            step: self.step,
            tensors: self
                .tensors
                .iter()
                .map(|t| TensorEntry {
                    name: t.name.clone(),
                    shape: t.value.shape().to_vec(),
                    optimizer_state: t.adam.is_some(),
                })
                .collect(),
        };
        let header = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&self.format_version.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for t in &self.tensors {
            let mut parts = vec![&t.value];
            if let Some((m, v)) = &t.adam {
                parts.push(m);
                parts.push(v);
            }
            for part in parts {
                for x in part.data() {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut reader = Reader { bytes, pos: 0 };
        if reader.take(8)? != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(reader.take(4)?.try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
            )));
        }
        let header_len = u64::from_le_bytes(reader.take(8)?.try_into().unwrap()) as usize;
        let header: Header = serde_json::from_slice(reader.take(header_len)?)
            .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for entry in header.tensors {
            let mut read = |shape: &[usize]| -> Result<Tensor> {
                let n: usize = shape.iter().product();
                let raw = reader.take(n * 8)?;
                let data = raw
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                Tensor::from_vec(shape, data)
            };
            let value = read(&entry.shape)?;
            let adam = if entry.optimizer_state {
                Some((read(&entry.shape)?, read(&entry.shape)?))
            } else {
                None
            };
            tensors.push(NamedTensor {
                name: entry.name,
                value,
                adam,
            });
        }
        if reader.pos != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes after tensor data",
                bytes.len() - reader.pos
            )));
        }
        Ok(Checkpoint {
            format_version: version,
            model_kind: header.model_kind,
            hyperparameters: header.hyperparameters,
            seed: header.seed,
            step: header.step,
            tensors,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint("checkpoint is truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}
