//! Versioned JSON files.
//!
//! Every file written by the tool is an envelope
//! `{format_version, tool_version, kind, config?, payload}`. Wall-clock data
//! never goes into it; [`write_sidecar`] puts that in `<path>.meta.json` so
//! two runs with the same arguments produce byte-identical primary files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use epsrand_core::cert::PureStateNet;

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Payload kinds stored in envelopes.
pub mod kind {
    pub const MATRIX: &str = "matrix";
    pub const CHANNEL: &str = "channel";
    pub const ENSEMBLE: &str = "ensemble";
    pub const NET: &str = "net";
    pub const CERTIFICATION: &str = "certification";
    pub const ISOTROPY: &str = "isotropy";
    pub const EXPERIMENT: &str = "experiment";
    pub const NET_PLAN: &str = "net_plan";
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error at byte {offset} (line {line}, column {column}): {message}")]
    Parse {
        path: PathBuf,
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: format version {found} is not supported (this build reads version {expected})")]
    IncompatibleVersion { path: PathBuf, found: u64, expected: u32 },
    #[error("{path}: expected a `{expected}` file, found `{found}`")]
    WrongKind { path: PathBuf, expected: String, found: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub format_version: u32,
    pub tool_version: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    pub payload: T,
}

impl<T> Envelope<T> {
    pub fn new(kind: &str, payload: T) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            kind: kind.to_string(),
            config: None,
            payload,
        }
    }

    pub fn with_config(mut self, config: Value) -> Self {
        self.config = Some(config);
        self
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| IoError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save<T: Serialize>(path: &Path, envelope: &Envelope<T>) -> Result<(), IoError> {
    write_text(path, &to_json_string(envelope)?)
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn parse_error(path: &Path, text: &str, e: serde_json::Error) -> IoError {
    IoError::Parse {
        path: path.to_path_buf(),
        offset: byte_offset(text, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Reads an envelope of `expected` kind. Files without a `format_version`
/// key are read as a bare payload, which keeps hand-written ensemble and
/// channel files short.
pub fn load<T: DeserializeOwned>(path: &Path, expected: &str) -> Result<Envelope<T>, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(path, &text, expected)
}

pub fn parse<T: DeserializeOwned>(path: &Path, text: &str, expected: &str) -> Result<Envelope<T>, IoError> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_error(path, text, e))?;
    let Some(version) = value.get("format_version") else {
        let payload = serde_json::from_str(text).map_err(|e| parse_error(path, text, e))?;
        let mut env = Envelope::new(expected, payload);
        env.tool_version = String::new();
        return Ok(env);
    };
    let found = version.as_u64().ok_or_else(|| IoError::Invalid {
        path: path.to_path_buf(),
        message: "format_version must be an unsigned integer".into(),
    })?;
    if found != FORMAT_VERSION as u64 {
        return Err(IoError::IncompatibleVersion {
            path: path.to_path_buf(),
            found,
            expected: FORMAT_VERSION,
        });
    }
    let found_kind = value.get("kind").and_then(Value::as_str).unwrap_or("");
    if found_kind != expected {
        return Err(IoError::WrongKind {
            path: path.to_path_buf(),
            expected: expected.to_string(),
            found: found_kind.to_string(),
        });
    }
    // Re-parse from text so that errors inside the payload carry offsets.
    serde_json::from_str(text).map_err(|e| parse_error(path, text, e))
}

/// Loads a net and checks its structural invariants.
pub fn load_net(path: &Path) -> Result<PureStateNet, IoError> {
    let env: Envelope<PureStateNet> = load(path, kind::NET)?;
    env.payload.validate().map_err(|e| IoError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(env.payload)
}

/// Run metadata kept out of the primary output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub tool_version: String,
    pub created_unix_seconds: u64,
    pub elapsed_seconds: f64,
    pub argv: Vec<String>,
}

impl Sidecar {
    pub fn now(elapsed_seconds: f64, argv: Vec<String>) -> Self {
        let created_unix_seconds = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool_version: TOOL_VERSION.to_string(),
            created_unix_seconds,
            elapsed_seconds,
            argv,
        }
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

pub fn write_sidecar(out: &Path, meta: &Sidecar) -> Result<PathBuf, IoError> {
    let path = sidecar_path(out);
    write_text(&path, &to_json_string(meta)?)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_follow_lines() {
        let text = "{\n  \"a\": 1,\n  oops\n}";
        let e = serde_json::from_str::<Value>(text).unwrap_err();
        let off = byte_offset(text, e.line(), e.column());
        assert_eq!(&text[off..off + 1], "o");
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/r.json")), PathBuf::from("out/r.json.meta.json"));
    }

    #[test]
    fn version_and_kind_checks() {
        let p = Path::new("x.json");
        let env = Envelope::new(kind::MATRIX, 3u32);
        let text = to_json_string(&env).unwrap();
        let back: Envelope<u32> = parse(p, &text, kind::MATRIX).unwrap();
        assert_eq!(back, env);
        assert!(matches!(parse::<u32>(p, &text, kind::NET), Err(IoError::WrongKind { .. })));
        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(
            parse::<u32>(p, &bumped, kind::MATRIX),
            Err(IoError::IncompatibleVersion { found: 2, .. })
        ));
        let bare: Envelope<u32> = parse(p, "7", kind::MATRIX).unwrap();
        assert_eq!(bare.payload, 7);
    }
}
