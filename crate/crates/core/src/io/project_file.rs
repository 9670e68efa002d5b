use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{Project, SCHEMA_VERSION};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("malformed project document: {0}")]
    Malformed(String),
    #[error("unsupported schema_version {0} (expected \"1\")")]
    SchemaMismatch(String),
    #[error("project data violates an invariant: {0}")]
    IntegrityError(String),
    #[error("{0}")]
    Io(String),
}

impl IoError {
    pub fn name(&self) -> &'static str {
        match self {
            IoError::Malformed(_) => "MalformedProject",
            IoError::SchemaMismatch(_) => "SchemaMismatch",
            IoError::IntegrityError(_) => "IntegrityError",
            IoError::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e.to_string())
    }
}

fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sort_keys(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Pretty JSON with recursively sorted object keys and a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    let mut out = serde_json::to_string_pretty(&sort_keys(v)).expect("JSON value prints");
    out.push('\n');
    out
}

pub fn save_project(project: &Project) -> String {
    canonical_json(project)
}

/// Parses a project document and checks every model invariant.
pub fn load_project(doc: &str) -> Result<Project, IoError> {
    let raw: Value = serde_json::from_str(doc).map_err(|e| IoError::Malformed(e.to_string()))?;
    match raw.get("schema_version") {
        Some(Value::String(s)) if s == SCHEMA_VERSION => {}
        Some(other) => return Err(IoError::SchemaMismatch(other.to_string())),
        None => return Err(IoError::SchemaMismatch("<missing>".into())),
    }
    let project: Project = serde_json::from_value(raw).map_err(|e| IoError::Malformed(e.to_string()))?;
    project.validate().map_err(IoError::IntegrityError)?;
    Ok(project)
}

pub fn load_project_file(path: &Path) -> Result<Project, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
    load_project(&text)
}

/// Writes through a temporary sibling file and renames it into place.
pub fn save_project_file(project: &Project, path: &Path) -> Result<(), IoError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| IoError::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(save_project(project).as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
