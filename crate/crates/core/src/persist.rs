//! Versioned JSON envelopes for trained models.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: expected a `{expected}` model, found `{found}`")]
    WrongKind {
        path: String,
        expected: String,
        found: String,
    },
    #[error("{path}: unsupported format version {found} (this build reads {FORMAT_VERSION})")]
    Version { path: String, found: u32 },
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    kind: String,
    version: u32,
    model: T,
}

pub fn save<T: Serialize>(path: &Path, kind: &str, model: &T) -> Result<(), PersistError> {
    let env = Envelope {
        kind: kind.to_string(),
        version: FORMAT_VERSION,
        model,
    };
    let body = serde_json::to_string(&env).map_err(|source| PersistError::Json {
        path: path.display().to_string(),
        source,
    })?;
    fs::write(path, body).map_err(|source| PersistError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T, PersistError> {
    let p = path.display().to_string();
    let body = fs::read_to_string(path).map_err(|source| PersistError::Io {
        path: p.clone(),
        source,
    })?;
    let env: Envelope<T> = serde_json::from_str(&body).map_err(|source| PersistError::Json {
        path: p.clone(),
        source,
    })?;
    if env.kind != kind {
        return Err(PersistError::WrongKind {
            path: p,
            expected: kind.to_string(),
            found: env.kind,
        });
    }
    if env.version != FORMAT_VERSION {
        return Err(PersistError::Version {
            path: p,
            found: env.version,
        });
    }
    Ok(env.model)
}
