//! Versioned project store backed by a directory of project files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock as StdRwLock};

use chrono::{DateTime, Utc};
use hotpie_core::io::{load_project, load_project_file, save_project_file, IoError};
use hotpie_core::model::{
    Abstraction, CausalEndpoint, Classification, LifecyclePhase, ModelError, NewEvidence, NewObject, NewPath,
    OpContext, Project, UNKNOWN_AUTHOR,
};
use hotpie_core::bundled;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;
use tokio::sync::RwLock;

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(Utc::now)
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no project with id '{0}'")]
    UnknownProject(String),
    #[error("project '{0}' already exists")]
    ProjectExists(String),
    #[error("invalid project id '{0}' (use letters, digits, '-' or '_', at most 64 characters)")]
    InvalidProjectId(String),
    #[error("unknown example '{0}' (available: arp4761)")]
    UnknownExample(String),
    #[error("project is at version {current}, request expected {expected}")]
    VersionConflict { expected: u64, current: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl StoreError {
    pub fn name(&self) -> &'static str {
        match self {
            StoreError::UnknownProject(_) => "UnknownProject",
            StoreError::ProjectExists(_) => "ProjectExists",
            StoreError::InvalidProjectId(_) => "InvalidProjectId",
            StoreError::UnknownExample(_) => "UnknownExample",
            StoreError::VersionConflict { .. } => "VersionConflict",
            StoreError::Model(e) => e.name(),
            StoreError::Io(e) => e.name(),
        }
    }
}

fn default_author() -> String {
    UNKNOWN_AUTHOR.to_string()
}

fn author_or_default(author: &str) -> &str {
    if author.trim().is_empty() {
        UNKNOWN_AUTHOR
    } else {
        author
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectRequest {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "macro_level")]
    pub abstraction: Abstraction,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default = "default_author")]
    pub author: String,
}

fn macro_level() -> Abstraction {
    Abstraction::Macro
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathRequest {
    pub source: CausalEndpoint,
    pub target: CausalEndpoint,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub narrative: String,
    pub initial: Classification,
    /// Defaults to the project's current phase.
    #[serde(default)]
    pub phase: Option<LifecyclePhase>,
    #[serde(default = "default_author")]
    pub author: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceRequest {
    pub text: String,
    pub resulting: Classification,
    /// Defaults to the project's current phase.
    #[serde(default)]
    pub phase: Option<LifecyclePhase>,
    #[serde(default = "default_author")]
    pub author: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRequest {
    pub phase: LifecyclePhase,
    #[serde(default = "default_author")]
    pub author: String,
}

/// One accepted-or-rejected write against a project. Each variant maps to
/// exactly one core operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    AddObject(ObjectRequest),
    AddPath(PathRequest),
    RecordEvidence { path_id: String, evidence: EvidenceRequest },
    AdvancePhase(PhaseRequest),
}

impl Mutation {
    fn actor(&self) -> &str {
        let a = match self {
            Mutation::AddObject(r) => &r.author,
            Mutation::AddPath(r) => &r.author,
            Mutation::RecordEvidence { evidence, .. } => &evidence.author,
            Mutation::AdvancePhase(r) => &r.author,
        };
        author_or_default(a)
    }

    /// Applies the mutation at time `at` and returns the response payload.
    pub fn apply(&self, project: &mut Project, at: DateTime<Utc>) -> Result<Value, ModelError> {
        let ctx = OpContext::new(at, self.actor());
        match self {
            Mutation::AddObject(r) => {
                let mut new = NewObject::named(r.name.clone())
                    .description(r.description.clone())
                    .abstraction(r.abstraction);
                new.tags = r.tags.clone();
                let id = project.add_object(new, &ctx)?;
                Ok(json!({ "object": project.object(id.as_str()) }))
            }
            Mutation::AddPath(r) => {
                let id = project.add_path(
                    NewPath {
                        source: r.source.clone(),
                        target: r.target.clone(),
                        keywords: r.keywords.clone(),
                        narrative: r.narrative.clone(),
                        initial: r.initial,
                        phase: r.phase.unwrap_or(project.current_phase()),
                    },
                    &ctx,
                )?;
                Ok(json!({ "path": project.path(id.as_str()) }))
            }
            Mutation::RecordEvidence { path_id, evidence } => {
                let phase = evidence.phase.unwrap_or(project.current_phase());
                project.record_evidence(
                    path_id,
                    NewEvidence {
                        text: evidence.text.clone(),
                        author: evidence.author.clone(),
                        resulting: evidence.resulting,
                        phase,
                    },
                    &ctx,
                )?;
                Ok(json!({ "path": project.path(path_id) }))
            }
            Mutation::AdvancePhase(r) => {
                project.advance_phase(r.phase, &ctx)?;
                Ok(json!({ "current_phase": project.current_phase() }))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub project: Arc<Project>,
    pub version: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectSummary {
    pub id: String,
    pub name: String,
    pub current_phase: LifecyclePhase,
    pub version: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Accepted {
    pub version: u64,
    #[serde(flatten)]
    pub payload: Value,
}

type Slot = Arc<RwLock<Snapshot>>;

/// Project files live at `<root>/<id>.json`; the version counter of each
/// project is kept next to it in `<root>/<id>.version`.
pub struct ProjectStore {
    root: PathBuf,
    index: StdRwLock<BTreeMap<String, Slot>>,
    clock: Clock,
}

pub fn valid_project_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn version_path(root: &Path, id: &str) -> PathBuf {
    root.join(format!("{id}.version"))
}

fn read_version(path: &Path) -> Result<u64, IoError> {
    match fs::read_to_string(path) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| IoError::Malformed(format!("{}: not a version counter", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(0),
        Err(e) => Err(IoError::Io(format!("{}: {e}", path.display()))),
    }
}

fn write_version(path: &Path, version: u64) -> Result<(), IoError> {
    let tmp = path.with_extension("version.tmp");
    fs::write(&tmp, format!("{version}\n"))
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| IoError::Io(format!("{}: {e}", path.display())))
}

impl ProjectStore {
    /// Opens `root`, creating it if needed, and loads every project file in it.
    pub fn open(root: impl Into<PathBuf>, clock: Clock) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| IoError::Io(format!("{}: {e}", root.display())))?;
        let entries = fs::read_dir(&root).map_err(|e| IoError::Io(format!("{}: {e}", root.display())))?;
        let mut index = BTreeMap::new();
        for entry in entries {
            let path = entry.map_err(|e| IoError::Io(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let project = load_project_file(&path)?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            if stem != project.id() {
                return Err(IoError::IntegrityError(format!(
                    "{}: file name does not match project id '{}'",
                    path.display(),
                    project.id()
                ))
                .into());
            }
            let version = read_version(&version_path(&root, stem))?;
            index.insert(
                stem.to_string(),
                Arc::new(RwLock::new(Snapshot {
                    project: Arc::new(project),
                    version,
                })),
            );
        }
        Ok(ProjectStore {
            root,
            index: StdRwLock::new(index),
            clock,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn now(&self) -> DateTime<Utc> {
        (self.clock)()
    }

    fn slot(&self, id: &str) -> Result<Slot, StoreError> {
        self.index
            .read()
            .expect("index lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownProject(id.to_string()))
    }

    fn persist(&self, project: &Project, version: u64) -> Result<(), StoreError> {
        save_project_file(project, &self.root.join(format!("{}.json", project.id())))?;
        write_version(&version_path(&self.root, project.id()), version)?;
        Ok(())
    }

    pub async fn list(&self) -> Vec<ProjectSummary> {
        let slots: Vec<Slot> = self.index.read().expect("index lock poisoned").values().cloned().collect();
        let mut out = Vec::with_capacity(slots.len());
        for slot in slots {
            let snap = slot.read().await;
            out.push(ProjectSummary {
                id: snap.project.id().to_string(),
                name: snap.project.name().to_string(),
                current_phase: snap.project.current_phase(),
                version: snap.version,
            });
        }
        out
    }

    pub async fn get(&self, id: &str) -> Result<Snapshot, StoreError> {
        let slot = self.slot(id)?;
        let snap = slot.read().await;
        Ok(snap.clone())
    }

    /// Creates a project at version 0, either empty or seeded from a
    /// bundled example.
    pub fn create(&self, id: &str, name: &str, example: Option<&str>, author: &str) -> Result<Snapshot, StoreError> {
        if !valid_project_id(id) {
            return Err(StoreError::InvalidProjectId(id.to_string()));
        }
        let project = match example {
            None => {
                if name.trim().is_empty() {
                    return Err(ModelError::EmptyName.into());
                }
                Project::new(id, name, &OpContext::new(self.now(), author_or_default(author)))
            }
            Some("arp4761") => {
                let mut doc: Value = serde_json::from_str(bundled::arp4761_project_json())
                    .map_err(|e| IoError::Malformed(e.to_string()))?;
                doc["id"] = Value::String(id.to_string());
                if !name.trim().is_empty() {
                    doc["name"] = Value::String(name.to_string());
                }
                load_project(&doc.to_string())?
            }
            Some(other) => return Err(StoreError::UnknownExample(other.to_string())),
        };
        let mut index = self.index.write().expect("index lock poisoned");
        if index.contains_key(id) {
            return Err(StoreError::ProjectExists(id.to_string()));
        }
        self.persist(&project, 0)?;
        let snap = Snapshot {
            project: Arc::new(project),
            version: 0,
        };
        index.insert(id.to_string(), Arc::new(RwLock::new(snap.clone())));
        Ok(snap)
    }

    /// Applies `mutation` if the project is still at `expected`. Writes to
    /// one project are serialized; the version advances by one per accepted
    /// mutation and the new state is on disk before the call returns.
    pub async fn mutate(&self, id: &str, expected: u64, mutation: &Mutation) -> Result<Accepted, StoreError> {
        let slot = self.slot(id)?;
        let mut snap = slot.write().await;
        if snap.version != expected {
            return Err(StoreError::VersionConflict {
                expected,
                current: snap.version,
            });
        }
        let mut next = (*snap.project).clone();
        let payload = mutation.apply(&mut next, self.now())?;
        let version = snap.version + 1;
        self.persist(&next, version)?;
        *snap = Snapshot {
            project: Arc::new(next),
            version,
        };
        Ok(Accepted { version, payload })
    }
}
