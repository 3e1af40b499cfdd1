//! JSON model files.
//!
//! Numbers are written with the shortest decimal form that parses back to
//! the same `f64`, so a saved and reloaded model reproduces forward outputs
//! bit for bit. Loads are all-or-nothing: every invariant is checked before a
//! model is returned.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activation::{ActivationKind, ActivationScope};
use crate::baseline::MlpModel;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::model::{validate_alphas, LocalPairNet, PairNetModel, Provenance, MAX_INPUTS};
use crate::partition::{Partition, SubspaceId};

pub const FORMAT_VERSION: u32 = 1;
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub n: usize,
    pub activation: ActivationKind,
    pub scope: ActivationScope,
    /// Interior-and-boundary breakpoints per dimension, ascending.
    pub partition: Vec<Vec<f64>>,
    pub subspaces: Vec<SubspaceRecord>,
    pub provenance: ProvenanceRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceRecord {
    pub index: usize,
    pub alphas: Vec<f64>,
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceRecord {
    pub seed: Option<u64>,
    pub fitted_at: u64,
    pub library_version: String,
}

impl ModelFile {
    pub fn from_model(model: &PairNetModel) -> Self {
        let p = model.provenance();
        ModelFile {
            format_version: FORMAT_VERSION,
            n: model.dim(),
            activation: p.activation,
            scope: p.scope,
            partition: model.partition().breakpoints().to_vec(),
            subspaces: model
                .locals()
                .iter()
                .enumerate()
                .map(|(index, l)| SubspaceRecord {
                    index,
                    alphas: l.alphas().to_vec(),
                    c: l.c().to_vec(),
                    gamma: l.gamma().to_vec(),
                    fallback_mean: l.fallback_mean(),
                })
                .collect(),
            provenance: ProvenanceRecord {
                seed: p.seed,
                fitted_at: p.fitted_at,
                library_version: LIBRARY_VERSION.to_string(),
            },
        }
    }

    /// Checks every invariant and builds the model.
    pub fn into_model(self) -> Result<PairNetModel> {
        let invariant = |field: String, message: String| Error::Invariant { field, message };
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Version(format!(
                "format_version {} (this build reads {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.n == 0 || self.n > MAX_INPUTS {
            return Err(invariant("n".into(), format!("{} is outside 1..={MAX_INPUTS}", self.n)));
        }
        self.activation
            .validate()
            .map_err(|e| invariant("activation".into(), e.to_string()))?;
        if self.partition.len() != self.n {
            return Err(invariant(
                "partition".into(),
                format!("{} dimensions, expected n = {}", self.partition.len(), self.n),
            ));
        }
        let partition =
            Partition::from_breakpoints(self.partition).map_err(|e| invariant("partition".into(), e.to_string()))?;
        if self.subspaces.len() != partition.len() {
            return Err(invariant(
                "subspaces".into(),
                format!("{} records for {} subspaces", self.subspaces.len(), partition.len()),
            ));
        }
        let domain = partition.domain();
        let terms = 1usize << self.n;
        let mut locals = Vec::with_capacity(self.subspaces.len());
        for (j, rec) in self.subspaces.into_iter().enumerate() {
            let field = |name: &str| format!("subspaces[{j}].{name}");
            if rec.index != j {
                return Err(invariant(field("index"), format!("{} out of order, expected {j}", rec.index)));
            }
            if rec.alphas.len() != self.n {
                return Err(invariant(field("alphas"), format!("{} entries, expected {}", rec.alphas.len(), self.n)));
            }
            validate_alphas(&rec.alphas).map_err(|e| invariant(field("alphas"), e.to_string()))?;
            for (name, v) in [("c", &rec.c), ("gamma", &rec.gamma)] {
                if v.len() != terms {
                    return Err(invariant(field(name), format!("{} entries, expected {terms}", v.len())));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(invariant(field(name), "non-finite value".into()));
                }
            }
            if rec.fallback_mean.is_some_and(|m| !m.is_finite()) {
                return Err(invariant(field("fallback_mean"), "non-finite value".into()));
            }
            let subspace = partition.subspace(SubspaceId(j));
            let frame = match self.scope {
                ActivationScope::Subspace => subspace.clone(),
                ActivationScope::Domain => domain.clone(),
            };
            let mut local = LocalPairNet::with_frame(rec.alphas, rec.c, rec.gamma, subspace, frame, self.activation)
                .map_err(|e| invariant(field("alphas"), e.to_string()))?;
            local.set_fallback_mean(rec.fallback_mean);
            locals.push(local);
        }
        let provenance = Provenance {
            seed: self.provenance.seed,
            alphas: locals[0].alphas().to_vec(),
            activation: self.activation,
            scope: self.scope,
            fitted_at: self.provenance.fitted_at,
        };
        PairNetModel::new(partition, locals, provenance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    /// Parses `text`; `path` is only used in error messages.
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_error(path, &e))?;
        check_version(&value)?;
        serde_json::from_value(value).map_err(|e| {
            let message = e.to_string();
            if message.starts_with("unknown field") {
                Error::Version(message)
            } else {
                Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message,
                }
            }
        })
    }
}

fn parse_error(path: &Path, e: &serde_json::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    }
}

fn check_version(value: &serde_json::Value) -> Result<()> {
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(FORMAT_VERSION) => Ok(()),
        Some(v) => Err(Error::Version(format!(
            "format_version {v} (this build reads {FORMAT_VERSION})"
        ))),
        None => Err(Error::Version("missing `format_version`".into())),
    }
}

/// Writes `model` atomically as JSON.
pub fn save_model(model: &PairNetModel, path: impl AsRef<Path>) -> Result<()> {
    let text = ModelFile::from_model(model).to_json();
    write_atomic(path.as_ref(), |w| w.write_all(text.as_bytes()))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PairNetModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelFile::from_json(&text, path)?.into_model()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpFile {
    format_version: u32,
    kind: String,
    model: MlpModel,
}

/// Writes an MLP baseline, standardizers included.
pub fn save_mlp(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let file = MlpFile {
        format_version: FORMAT_VERSION,
        kind: "mlp".into(),
        model: model.clone(),
    };
    let text = serde_json::to_string_pretty(&file).expect("mlp serializes");
    write_atomic(path.as_ref(), |w| w.write_all(text.as_bytes()))
}

pub fn load_mlp(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_error(path, &e))?;
    check_version(&value)?;
    let file: MlpFile = serde_json::from_value(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    if file.kind != "mlp" {
        return Err(Error::Invariant {
            field: "kind".into(),
            message: format!("expected `mlp`, found `{}`", file.kind),
        });
    }
    let m = file.model;
    MlpModel::new(m.layers, m.inputs, m.target).map_err(|e| Error::Invariant {
        field: "model.layers".into(),
        message: e.to_string(),
    })
}
