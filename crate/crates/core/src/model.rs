//! Causal-relationship model: objects, factor-to-factor causal paths, the
//! Definite/Plausible/Discharged classification and its evidence history.
//!
//! A [`Project`] is only mutated through its operation methods. Every
//! accepted operation appends to the event log; every rejected operation
//! returns an error before touching state.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, DurationRound, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::taxonomy::{normalize_keyword, PrimaryFactor, SecondaryFactor};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("name must not be empty")]
    EmptyName,
    #[error("unknown object '{0}'")]
    UnknownObject(String),
    #[error("causal path would start and end on object '{0}'")]
    SelfLoop(String),
    #[error("a new path must start as Definite or Plausible")]
    InvalidInitial,
    #[error("secondary factor {secondary} does not belong to {primary}")]
    FactorMismatch {
        primary: PrimaryFactor,
        secondary: SecondaryFactor,
    },
    #[error("unknown causal path '{0}'")]
    UnknownPath(String),
    #[error("phase {requested} does not come after {current}")]
    PhaseRegression {
        current: LifecyclePhase,
        requested: LifecyclePhase,
    },
    #[error("phase {requested} is later than the project phase {current}")]
    FuturePhase {
        current: LifecyclePhase,
        requested: LifecyclePhase,
    },
    #[error("object '{0}' still has causal paths attached")]
    ObjectInUse(String),
}

impl ModelError {
    pub fn name(&self) -> &'static str {
        match self {
            ModelError::EmptyName => "EmptyName",
            ModelError::UnknownObject(_) => "UnknownObject",
            ModelError::SelfLoop(_) => "SelfLoop",
            ModelError::InvalidInitial => "InvalidInitial",
            ModelError::FactorMismatch { .. } => "FactorMismatch",
            ModelError::UnknownPath(_) => "UnknownPath",
            ModelError::PhaseRegression { .. } => "PhaseRegression",
            ModelError::FuturePhase { .. } => "FuturePhase",
            ModelError::ObjectInUse(_) => "ObjectInUse",
        }
    }
}

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }

        impl PartialEq<str> for $name {
            fn eq(&self, other: &str) -> bool {
                self.0 == other
            }
        }

        impl PartialEq<&str> for $name {
            fn eq(&self, other: &&str) -> bool {
                self.0 == *other
            }
        }
    };
}

string_id!(ObjectId);
string_id!(PathId);

/// Orders ids so that embedded numbers compare numerically ("CP2" < "CP10").
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    if a.is_empty() || b.is_empty() {
        return a.cmp(b);
    }
    for (x, y) in chunks(a).into_iter().zip(chunks(b)) {
        let ord = match (x, y) {
            ((true, xs), (true, ys)) => {
                let xt = xs.trim_start_matches('0');
                let yt = ys.trim_start_matches('0');
                xt.len().cmp(&yt.len()).then(xt.cmp(yt)).then(xs.len().cmp(&ys.len()))
            }
            ((_, xs), (_, ys)) => xs.cmp(ys),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    chunks(a).len().cmp(&chunks(b).len()).then(a.cmp(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Abstraction {
    Macro,
    Micro,
}

impl FromStr for Abstraction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "macro" => Ok(Abstraction::Macro),
            "micro" => Ok(Abstraction::Micro),
            _ => Err(format!("unknown abstraction '{s}' (expected macro or micro)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// Confirmed safety-critical; feeds hazard analysis.
    Definite,
    /// Suspected but uncertain; tracked until information arrives.
    Plausible,
    /// Resolved as not safety-critical. Kept for the record.
    Discharged,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Definite => "Definite",
            Classification::Plausible => "Plausible",
            Classification::Discharged => "Discharged",
        })
    }
}

impl FromStr for Classification {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "definite" => Ok(Classification::Definite),
            "plausible" => Ok(Classification::Plausible),
            "discharged" => Ok(Classification::Discharged),
            _ => Err(format!("unknown classification '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LifecyclePhase {
    Design,
    Acquisition,
    Validation,
    Deployment,
    Operation,
}

impl LifecyclePhase {
    pub const ALL: [LifecyclePhase; 5] = [
        LifecyclePhase::Design,
        LifecyclePhase::Acquisition,
        LifecyclePhase::Validation,
        LifecyclePhase::Deployment,
        LifecyclePhase::Operation,
    ];
}

impl fmt::Display for LifecyclePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LifecyclePhase::Design => "Design",
            LifecyclePhase::Acquisition => "Acquisition",
            LifecyclePhase::Validation => "Validation",
            LifecyclePhase::Deployment => "Deployment",
            LifecyclePhase::Operation => "Operation",
        })
    }
}

impl FromStr for LifecyclePhase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LifecyclePhase::ALL
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown lifecycle phase '{s}'"))
    }
}

/// RFC 3339 UTC timestamps at millisecond precision.
pub(crate) mod timestamp {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Millis, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| super::truncate(t.with_timezone(&Utc)))
            .map_err(serde::de::Error::custom)
    }
}

fn truncate(t: DateTime<Utc>) -> DateTime<Utc> {
    t.duration_trunc(Duration::milliseconds(1)).unwrap_or(t)
}

/// Who performs an operation and when. The timestamp is clamped so the
/// project log never goes backwards.
#[derive(Debug, Clone)]
pub struct OpContext {
    pub at: DateTime<Utc>,
    pub actor: String,
}

impl OpContext {
    pub fn new(at: DateTime<Utc>, actor: impl Into<String>) -> Self {
        OpContext {
            at,
            actor: actor.into(),
        }
    }

    pub fn now(actor: impl Into<String>) -> Self {
        Self::new(Utc::now(), actor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemObject {
    pub id: ObjectId,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub abstraction: Abstraction,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausalEndpoint {
    pub object: ObjectId,
    pub primary: PrimaryFactor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<SecondaryFactor>,
}

impl CausalEndpoint {
    pub fn new(object: impl Into<ObjectId>, primary: PrimaryFactor) -> Self {
        CausalEndpoint {
            object: object.into(),
            primary,
            secondary: None,
        }
    }

    /// Endpoint on a secondary factor; the primary is its parent.
    pub fn secondary(object: impl Into<ObjectId>, secondary: SecondaryFactor) -> Self {
        CausalEndpoint {
            object: object.into(),
            primary: secondary.parent(),
            secondary: Some(secondary),
        }
    }

    fn check(&self) -> Result<(), ModelError> {
        match self.secondary {
            Some(s) if s.parent() != self.primary => Err(ModelError::FactorMismatch {
                primary: self.primary,
                secondary: s,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for CausalEndpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.secondary {
            Some(s) => write!(f, "{}:{}/{}", self.object, self.primary, s),
            None => write!(f, "{}:{}", self.object, self.primary),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceEntry {
    #[serde(with = "timestamp")]
    pub timestamp: DateTime<Utc>,
    pub phase: LifecyclePhase,
    pub author: String,
    pub text: String,
    pub resulting_classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausalPath {
    pub id: PathId,
    pub source: CausalEndpoint,
    pub target: CausalEndpoint,
    pub keywords: Vec<String>,
    pub narrative: String,
    pub initial_classification: Classification,
    pub classification: Classification,
    pub created_phase: LifecyclePhase,
    #[serde(with = "timestamp")]
    pub created_at: DateTime<Utc>,
    pub evidence: Vec<EvidenceEntry>,
}

impl CausalPath {
    /// Phase of the most recent information about this path.
    pub fn last_touched_phase(&self) -> LifecyclePhase {
        self.evidence
            .last()
            .map(|e| e.phase)
            .unwrap_or(self.created_phase)
    }

    pub fn factor_pair(&self) -> (PrimaryFactor, PrimaryFactor) {
        (self.source.primary, self.target.primary)
    }

    /// True when the path was Definite at some point and is now Discharged.
    pub fn retired_from_definite(&self) -> bool {
        self.classification == Classification::Discharged
            && (self.initial_classification == Classification::Definite
                || self
                    .evidence
                    .iter()
                    .any(|e| e.resulting_classification == Classification::Definite))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    #[serde(with = "timestamp")]
    pub timestamp: DateTime<Utc>,
    pub actor: String,
    pub action: String,
}

#[derive(Debug, Clone)]
pub struct NewObject {
    pub name: String,
    pub description: String,
    pub abstraction: Abstraction,
    pub tags: Vec<String>,
}

impl NewObject {
    pub fn named(name: impl Into<String>) -> Self {
        NewObject {
            name: name.into(),
            description: String::new(),
            abstraction: Abstraction::Macro,
            tags: Vec::new(),
        }
    }

    pub fn description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into();
        self
    }

    pub fn abstraction(mut self, a: Abstraction) -> Self {
        self.abstraction = a;
        self
    }

    pub fn tag(mut self, t: impl Into<String>) -> Self {
        self.tags.push(t.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct NewPath {
    pub source: CausalEndpoint,
    pub target: CausalEndpoint,
    pub keywords: Vec<String>,
    pub narrative: String,
    pub initial: Classification,
    pub phase: LifecyclePhase,
}

#[derive(Debug, Clone)]
pub struct NewEvidence {
    pub text: String,
    pub author: String,
    pub resulting: Classification,
    pub phase: LifecyclePhase,
}

pub const UNKNOWN_AUTHOR: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Project {
    pub(crate) schema_version: String,
    pub(crate) id: String,
    pub(crate) name: String,
    pub(crate) current_phase: LifecyclePhase,
    pub(crate) objects: Vec<SystemObject>,
    pub(crate) paths: Vec<CausalPath>,
    pub(crate) event_log: Vec<Event>,
    #[serde(default)]
    pub(crate) metadata: BTreeMap<String, Value>,
}

/// Lowercase ASCII slug used to derive readable object ids.
pub fn slugify(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

impl Project {
    pub fn new(id: impl Into<String>, name: impl Into<String>, ctx: &OpContext) -> Self {
        let name = name.into();
        let mut p = Project {
            schema_version: SCHEMA_VERSION.to_string(),
            id: id.into(),
            name: name.clone(),
            current_phase: LifecyclePhase::Design,
            objects: Vec::new(),
            paths: Vec::new(),
            event_log: Vec::new(),
            metadata: BTreeMap::new(),
        };
        p.log(ctx, format!("create project '{name}'"));
        p
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema_version(&self) -> &str {
        &self.schema_version
    }

    pub fn current_phase(&self) -> LifecyclePhase {
        self.current_phase
    }

    pub fn objects(&self) -> &[SystemObject] {
        &self.objects
    }

    pub fn paths(&self) -> &[CausalPath] {
        &self.paths
    }

    pub fn event_log(&self) -> &[Event] {
        &self.event_log
    }

    pub fn metadata(&self) -> &BTreeMap<String, Value> {
        &self.metadata
    }

    pub fn object(&self, id: &str) -> Option<&SystemObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Resolves an object by id, falling back to a case-insensitive name
    /// match when exactly one object carries that name.
    pub fn resolve_object(&self, key: &str) -> Result<&SystemObject, ModelError> {
        if let Some(o) = self.object(key) {
            return Ok(o);
        }
        let mut by_name = self
            .objects
            .iter()
            .filter(|o| o.name.eq_ignore_ascii_case(key.trim()));
        match (by_name.next(), by_name.next()) {
            (Some(o), None) => Ok(o),
            _ => Err(ModelError::UnknownObject(key.to_string())),
        }
    }

    pub fn path(&self, id: &str) -> Option<&CausalPath> {
        self.paths.iter().find(|p| p.id == id)
    }

    fn stamp(&self, ctx: &OpContext) -> DateTime<Utc> {
        let t = truncate(ctx.at);
        match self.event_log.last() {
            Some(last) if last.timestamp > t => last.timestamp,
            _ => t,
        }
    }

    fn log(&mut self, ctx: &OpContext, action: String) -> DateTime<Utc> {
        let timestamp = self.stamp(ctx);
        self.event_log.push(Event {
            timestamp,
            actor: ctx.actor.clone(),
            action,
        });
        timestamp
    }

    fn fresh_object_id(&self, name: &str) -> ObjectId {
        let base = match slugify(name) {
            s if s.is_empty() => "object".to_string(),
            s => s,
        };
        let mut candidate = base.clone();
        let mut n = 2;
        while self.object(&candidate).is_some() {
            candidate = format!("{base}-{n}");
            n += 1;
        }
        ObjectId(candidate)
    }

    fn fresh_path_id(&self) -> PathId {
        let mut n = self.paths.len() + 1;
        loop {
            let candidate = format!("CP{n}");
            if self.path(&candidate).is_none() {
                return PathId(candidate);
            }
            n += 1;
        }
    }

    pub fn add_object(&mut self, obj: NewObject, ctx: &OpContext) -> Result<ObjectId, ModelError> {
        let name = obj.name.trim();
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        let id = self.fresh_object_id(name);
        self.objects.push(SystemObject {
            id: id.clone(),
            name: name.to_string(),
            description: obj.description,
            abstraction: obj.abstraction,
            tags: obj.tags,
        });
        self.log(ctx, format!("add object {id} '{name}'"));
        Ok(id)
    }

    /// Removes an object that no causal path references.
    pub fn remove_object(&mut self, id: &str, ctx: &OpContext) -> Result<(), ModelError> {
        let idx = self
            .objects
            .iter()
            .position(|o| o.id == id)
            .ok_or_else(|| ModelError::UnknownObject(id.to_string()))?;
        if self
            .paths
            .iter()
            .any(|p| p.source.object == id || p.target.object == id)
        {
            return Err(ModelError::ObjectInUse(id.to_string()));
        }
        self.objects.remove(idx);
        self.log(ctx, format!("remove object {id}"));
        Ok(())
    }

    fn check_phase_not_future(&self, phase: LifecyclePhase) -> Result<(), ModelError> {
        if phase > self.current_phase {
            return Err(ModelError::FuturePhase {
                current: self.current_phase,
                requested: phase,
            });
        }
        Ok(())
    }

    pub fn add_path(&mut self, new: NewPath, ctx: &OpContext) -> Result<PathId, ModelError> {
        for end in [&new.source, &new.target] {
            if self.object(end.object.as_str()).is_none() {
                return Err(ModelError::UnknownObject(end.object.to_string()));
            }
        }
        if new.source.object == new.target.object {
            return Err(ModelError::SelfLoop(new.source.object.to_string()));
        }
        if new.initial == Classification::Discharged {
            return Err(ModelError::InvalidInitial);
        }
        new.source.check()?;
        new.target.check()?;
        self.check_phase_not_future(new.phase)?;

        let id = self.fresh_path_id();
        let keywords = new
            .keywords
            .iter()
            .map(|k| normalize_keyword(k))
            .filter(|k| !k.is_empty())
            .collect();
        let created_at = self.log(
            ctx,
            format!(
                "add path {id} {} -> {} as {}",
                new.source, new.target, new.initial
            ),
        );
        self.paths.push(CausalPath {
            id: id.clone(),
            source: new.source,
            target: new.target,
            keywords,
            narrative: new.narrative,
            initial_classification: new.initial,
            classification: new.initial,
            created_phase: new.phase,
            created_at,
            evidence: Vec::new(),
        });
        Ok(id)
    }

    /// Appends evidence and reclassifies. Any transition is allowed,
    /// including no-change entries and reopening a discharged path.
    pub fn record_evidence(
        &mut self,
        path_id: &str,
        ev: NewEvidence,
        ctx: &OpContext,
    ) -> Result<&CausalPath, ModelError> {
        let idx = self
            .paths
            .iter()
            .position(|p| p.id == path_id)
            .ok_or_else(|| ModelError::UnknownPath(path_id.to_string()))?;
        let floor = self.paths[idx].last_touched_phase();
        if ev.phase < floor {
            return Err(ModelError::PhaseRegression {
                current: floor,
                requested: ev.phase,
            });
        }
        self.check_phase_not_future(ev.phase)?;

        let author = match ev.author.trim() {
            "" => UNKNOWN_AUTHOR.to_string(),
            a => a.to_string(),
        };
        let from = self.paths[idx].classification;
        let timestamp = self.log(
            ctx,
            format!(
                "record evidence on {path_id}: {from} -> {} at {}",
                ev.resulting, ev.phase
            ),
        );
        let path = &mut self.paths[idx];
        path.evidence.push(EvidenceEntry {
            timestamp,
            phase: ev.phase,
            author,
            text: ev.text,
            resulting_classification: ev.resulting,
        });
        path.classification = ev.resulting;
        Ok(&self.paths[idx])
    }

    /// Strictly advances the project lifecycle phase.
    pub fn advance_phase(&mut self, phase: LifecyclePhase, ctx: &OpContext) -> Result<(), ModelError> {
        if phase <= self.current_phase {
            return Err(ModelError::PhaseRegression {
                current: self.current_phase,
                requested: phase,
            });
        }
        let from = self.current_phase;
        self.current_phase = phase;
        self.log(ctx, format!("advance phase {from} -> {phase}"));
        Ok(())
    }

    pub fn set_metadata(&mut self, key: impl Into<String>, value: Value, ctx: &OpContext) {
        let key = key.into();
        self.log(ctx, format!("set metadata '{key}'"));
        self.metadata.insert(key, value);
    }

    /// Plausible paths, optionally limited to those created at or before
    /// `phase_filter`, ordered by (created phase, id).
    pub fn open_uncertainties(&self, phase_filter: Option<LifecyclePhase>) -> Vec<&CausalPath> {
        let mut out: Vec<&CausalPath> = self
            .paths
            .iter()
            .filter(|p| p.classification == Classification::Plausible)
            .filter(|p| phase_filter.is_none_or(|f| p.created_phase <= f))
            .collect();
        out.sort_by(|a, b| {
            a.created_phase
                .cmp(&b.created_phase)
                .then_with(|| natural_cmp(a.id.as_str(), b.id.as_str()))
        });
        out
    }

    pub fn path_history(&self, path_id: &str) -> Result<&[EvidenceEntry], ModelError> {
        self.path(path_id)
            .map(|p| p.evidence.as_slice())
            .ok_or_else(|| ModelError::UnknownPath(path_id.to_string()))
    }

    /// Macro-level relations, derived from the micro-level paths: an
    /// ordered object pair is related iff some path links them.
    pub fn macro_relations(&self) -> BTreeSet<(ObjectId, ObjectId)> {
        self.paths
            .iter()
            .map(|p| (p.source.object.clone(), p.target.object.clone()))
            .collect()
    }

    pub fn paths_between(&self, source: &str, target: &str) -> impl Iterator<Item = &CausalPath> {
        let (s, t) = (source.to_string(), target.to_string());
        self.paths
            .iter()
            .filter(move |p| p.source.object == s.as_str() && p.target.object == t.as_str())
    }

    /// Checks every structural invariant; used when loading stored data.
    pub fn validate(&self) -> Result<(), String> {
        let mut ids = BTreeSet::new();
        for o in &self.objects {
            if o.name.trim().is_empty() {
                return Err(format!("object {} has an empty name", o.id));
            }
            if o.id.as_str().is_empty() || !ids.insert(o.id.as_str()) {
                return Err(format!("duplicate or empty object id '{}'", o.id));
            }
        }
        let mut path_ids = BTreeSet::new();
        for p in &self.paths {
            if p.id.as_str().is_empty() || !path_ids.insert(p.id.as_str()) {
                return Err(format!("duplicate or empty path id '{}'", p.id));
            }
            for end in [&p.source, &p.target] {
                if !ids.contains(end.object.as_str()) {
                    return Err(format!(
                        "path {} references missing object '{}'",
                        p.id, end.object
                    ));
                }
                end.check().map_err(|e| format!("path {}: {e}", p.id))?;
            }
            if p.source.object == p.target.object {
                return Err(format!("path {} is a self-loop", p.id));
            }
            if p.initial_classification == Classification::Discharged {
                return Err(format!("path {} starts Discharged", p.id));
            }
            let expected = p
                .evidence
                .last()
                .map(|e| e.resulting_classification)
                .unwrap_or(p.initial_classification);
            if p.classification != expected {
                return Err(format!(
                    "path {} is {} but its history ends in {}",
                    p.id, p.classification, expected
                ));
            }
            if p.created_phase > self.current_phase {
                return Err(format!("path {} created in a future phase", p.id));
            }
            let mut phase = p.created_phase;
            let mut at = p.created_at;
            for e in &p.evidence {
                if e.phase < phase || e.phase > self.current_phase {
                    return Err(format!("path {} evidence phases out of order", p.id));
                }
                if e.timestamp < at {
                    return Err(format!("path {} evidence timestamps out of order", p.id));
                }
                phase = e.phase;
                at = e.timestamp;
            }
        }
        if self
            .event_log
            .windows(2)
            .any(|w| w[1].timestamp < w[0].timestamp)
        {
            return Err("event log timestamps decrease".into());
        }
        Ok(())
    }
}
