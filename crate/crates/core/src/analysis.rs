//! Suggestion prompts, architectural-view coverage and stale-uncertainty
//! reporting. Everything here is a pure function of its inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{natural_cmp, CausalPath, Classification, LifecyclePhase, ModelError, ObjectId, Project};
use crate::taxonomy::{FactorRef, PathTemplate, PrimaryFactor, ReferenceCatalog};

const BUNDLED_MODAF: &str = include_str!("../data/modaf_profiles.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("duplicate view id '{0}'")]
    DuplicateViewId(String),
    #[error("unknown view '{0}'")]
    UnknownView(String),
    #[error("malformed view profiles: {0}")]
    MalformedProfiles(String),
}

impl AnalysisError {
    pub fn name(&self) -> &'static str {
        match self {
            AnalysisError::DuplicateViewId(_) => "DuplicateViewId",
            AnalysisError::UnknownView(_) => "UnknownView",
            AnalysisError::MalformedProfiles(_) => "MalformedProfiles",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum RepresentationLevel {
    #[default]
    NotRepresented,
    PartiallyRepresented,
    Represented,
}

impl RepresentationLevel {
    pub fn code(self) -> &'static str {
        match self {
            RepresentationLevel::NotRepresented => "N",
            RepresentationLevel::PartiallyRepresented => "P",
            RepresentationLevel::Represented => "R",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RepresentationLevel::NotRepresented => "Not represented",
            RepresentationLevel::PartiallyRepresented => "Partially represented",
            RepresentationLevel::Represented => "Represented",
        }
    }
}

impl fmt::Display for RepresentationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RepresentationLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "n" | "not" | "notrepresented" => Ok(RepresentationLevel::NotRepresented),
            "p" | "partial" | "partially" | "partiallyrepresented" => {
                Ok(RepresentationLevel::PartiallyRepresented)
            }
            "r" | "represented" => Ok(RepresentationLevel::Represented),
            _ => Err(format!("unknown representation level '{s}'")),
        }
    }
}

impl Serialize for RepresentationLevel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for RepresentationLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(de::Error::custom)
    }
}

/// A total map from the six primary factors to a representation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FactorLevels([RepresentationLevel; 6]);

impl FactorLevels {
    pub fn uniform(level: RepresentationLevel) -> Self {
        FactorLevels([level; 6])
    }

    pub fn from_fn(f: impl Fn(PrimaryFactor) -> RepresentationLevel) -> Self {
        FactorLevels(PrimaryFactor::ALL.map(f))
    }

    pub fn get(&self, factor: PrimaryFactor) -> RepresentationLevel {
        self.0[factor.index()]
    }

    pub fn set(&mut self, factor: PrimaryFactor, level: RepresentationLevel) {
        self.0[factor.index()] = level;
    }

    pub fn iter(&self) -> impl Iterator<Item = (PrimaryFactor, RepresentationLevel)> + '_ {
        PrimaryFactor::ALL.into_iter().map(|f| (f, self.get(f)))
    }

    pub fn as_array(&self) -> [RepresentationLevel; 6] {
        self.0
    }

    fn max(self, other: FactorLevels) -> FactorLevels {
        FactorLevels::from_fn(|f| self.get(f).max(other.get(f)))
    }
}

impl Serialize for FactorLevels {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(6))?;
        for (f, l) in self.iter() {
            map.serialize_entry(f.name(), &l)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for FactorLevels {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, RepresentationLevel>::deserialize(d)?;
        let mut seen = [false; 6];
        let mut levels = FactorLevels::default();
        for (k, v) in raw {
            let f: PrimaryFactor = k.parse().map_err(de::Error::custom)?;
            if seen[f.index()] {
                return Err(de::Error::custom(format!("factor {f} given twice")));
            }
            seen[f.index()] = true;
            levels.set(f, v);
        }
        if let Some(missing) = PrimaryFactor::ALL.iter().find(|f| !seen[f.index()]) {
            return Err(de::Error::custom(format!("missing level for {missing}")));
        }
        Ok(levels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViewCategory {
    Tabular,
    Structural,
    Behavioural,
    Mapping,
    Ontology,
    Pictorial,
    Timeline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewProfile {
    pub view_id: String,
    pub title: String,
    pub category: ViewCategory,
    pub levels: FactorLevels,
    /// Verbatim qualifiers on partially represented cells.
    #[serde(default)]
    pub notes: BTreeMap<PrimaryFactor, String>,
}

/// Parses a view-profiles document (a JSON list of profiles).
pub fn parse_profiles(text: &str) -> Result<Vec<ViewProfile>, AnalysisError> {
    let profiles: Vec<ViewProfile> =
        serde_json::from_str(text).map_err(|e| AnalysisError::MalformedProfiles(e.to_string()))?;
    let mut seen = BTreeSet::new();
    for p in &profiles {
        if p.view_id.trim().is_empty() {
            return Err(AnalysisError::MalformedProfiles("empty view_id".into()));
        }
        if !seen.insert(p.view_id.as_str()) {
            return Err(AnalysisError::DuplicateViewId(p.view_id.clone()));
        }
    }
    Ok(profiles)
}

pub fn bundled_profiles_json() -> &'static str {
    BUNDLED_MODAF
}

/// The ten bundled MoDAF operational and system view profiles.
pub fn modaf_profiles() -> &'static [ViewProfile] {
    static PROFILES: OnceLock<Vec<ViewProfile>> = OnceLock::new();
    PROFILES.get_or_init(|| parse_profiles(BUNDLED_MODAF).expect("bundled profiles are valid"))
}

/// Picks profiles by view id, in the order requested. An empty selection
/// returns every profile.
pub fn select_views(profiles: &[ViewProfile], ids: &[&str]) -> Result<Vec<ViewProfile>, AnalysisError> {
    if ids.is_empty() {
        return Ok(profiles.to_vec());
    }
    ids.iter()
        .map(|id| {
            profiles
                .iter()
                .find(|p| p.view_id.eq_ignore_ascii_case(id.trim()))
                .cloned()
                .ok_or_else(|| AnalysisError::UnknownView(id.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageMatrix {
    pub rows: Vec<ViewProfile>,
    pub merged: FactorLevels,
}

impl CoverageMatrix {
    pub fn gaps(&self, threshold: RepresentationLevel) -> Vec<(PrimaryFactor, RepresentationLevel)> {
        self.merged.iter().filter(|(_, l)| *l < threshold).collect()
    }
}

fn merged_levels(profiles: &[ViewProfile]) -> FactorLevels {
    profiles
        .iter()
        .fold(FactorLevels::default(), |acc, p| acc.max(p.levels))
}

/// Per-factor maximum over the given views.
pub fn merge_coverage(profiles: &[ViewProfile]) -> Result<CoverageMatrix, AnalysisError> {
    let mut seen = BTreeSet::new();
    for p in profiles {
        if !seen.insert(p.view_id.as_str()) {
            return Err(AnalysisError::DuplicateViewId(p.view_id.clone()));
        }
    }
    Ok(CoverageMatrix {
        rows: profiles.to_vec(),
        merged: merged_levels(profiles),
    })
}

/// Factors whose merged level falls strictly below `threshold`, in H,O,T,P,I,E order.
pub fn gap_report(
    profiles: &[ViewProfile],
    threshold: RepresentationLevel,
) -> Vec<(PrimaryFactor, RepresentationLevel)> {
    merged_levels(profiles)
        .iter()
        .filter(|(_, l)| *l < threshold)
        .collect()
}

/// An unexplored (or, with `covered`, already explored) ordered factor
/// pair between two objects, carrying the catalog keywords to consider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuggestionPrompt {
    pub source_object: ObjectId,
    pub target_object: ObjectId,
    pub source_factor: PrimaryFactor,
    pub target_factor: PrimaryFactor,
    /// Catalog templates under the source factor.
    pub templates: Vec<PathTemplate>,
    /// Catalog templates under the target factor, for drill-down.
    pub target_templates: Vec<PathTemplate>,
    pub covered: bool,
}

impl SuggestionPrompt {
    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.templates.iter().map(|t| t.keyword.as_str())
    }
}

fn check_pair(project: &Project, source: &str, target: &str) -> Result<(ObjectId, ObjectId), ModelError> {
    let s = project
        .object(source)
        .ok_or_else(|| ModelError::UnknownObject(source.to_string()))?;
    let t = project
        .object(target)
        .ok_or_else(|| ModelError::UnknownObject(target.to_string()))?;
    if s.id == t.id {
        return Err(ModelError::SelfLoop(s.id.to_string()));
    }
    Ok((s.id.clone(), t.id.clone()))
}

/// Enumerates all 36 ordered primary-factor pairs for `source -> target`.
pub fn suggest_paths(
    project: &Project,
    catalog: &ReferenceCatalog,
    source: &str,
    target: &str,
    include_covered: bool,
) -> Result<Vec<SuggestionPrompt>, ModelError> {
    let (source_id, target_id) = check_pair(project, source, target)?;
    let covered: BTreeSet<(PrimaryFactor, PrimaryFactor)> = project
        .paths_between(source_id.as_str(), target_id.as_str())
        .map(CausalPath::factor_pair)
        .collect();
    let templates_for = |f: PrimaryFactor| -> Vec<PathTemplate> {
        catalog
            .lookup(FactorRef::Primary(f))
            .into_iter()
            .cloned()
            .collect()
    };
    let by_factor: Vec<Vec<PathTemplate>> = PrimaryFactor::ALL.iter().map(|f| templates_for(*f)).collect();

    let mut prompts = Vec::with_capacity(36);
    for sf in PrimaryFactor::ALL {
        for tf in PrimaryFactor::ALL {
            let is_covered = covered.contains(&(sf, tf));
            if is_covered && !include_covered {
                continue;
            }
            prompts.push(SuggestionPrompt {
                source_object: source_id.clone(),
                target_object: target_id.clone(),
                source_factor: sf,
                target_factor: tf,
                templates: by_factor[sf.index()].clone(),
                target_templates: by_factor[tf.index()].clone(),
                covered: is_covered,
            });
        }
    }
    Ok(prompts)
}

/// Endpoint counts per object and factor vertex. Every object of the
/// project appears, with zero counts for its unexplored vertices.
pub fn factor_usage(project: &Project) -> BTreeMap<ObjectId, BTreeMap<PrimaryFactor, usize>> {
    let mut usage: BTreeMap<ObjectId, BTreeMap<PrimaryFactor, usize>> = project
        .objects()
        .iter()
        .map(|o| {
            (
                o.id.clone(),
                PrimaryFactor::ALL.iter().map(|f| (*f, 0)).collect(),
            )
        })
        .collect();
    for p in project.paths() {
        for end in [&p.source, &p.target] {
            if let Some(counts) = usage.get_mut(&end.object) {
                *counts.entry(end.primary).or_insert(0) += 1;
            }
        }
    }
    usage
}

/// Plausible paths that received no new information since a phase
/// strictly earlier than `as_of`, oldest first.
pub fn stale_report(project: &Project, as_of: LifecyclePhase) -> Vec<&CausalPath> {
    let mut out: Vec<&CausalPath> = project
        .paths()
        .iter()
        .filter(|p| p.classification == Classification::Plausible)
        .filter(|p| p.last_touched_phase() < as_of)
        .collect();
    out.sort_by(|a, b| {
        a.last_touched_phase()
            .cmp(&b.last_touched_phase())
            .then_with(|| natural_cmp(a.id.as_str(), b.id.as_str()))
    });
    out
}
