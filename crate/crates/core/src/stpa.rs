//! Bridge between an STPA safety control structure and the causal model.
//!
//! Control-structure nodes become objects, control relations become the
//! object pairs to walk with suggestion prompts, and non-discharged paths
//! between mapped objects flow back as findings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analysis::{suggest_paths, SuggestionPrompt};
use crate::model::{Classification, ModelError, NewObject, ObjectId, OpContext, PathId, Project};
use crate::taxonomy::{PrimaryFactor, ReferenceCatalog};

/// Project metadata key holding the node id -> object id mapping.
pub const MAPPING_KEY: &str = "stpa_mapping";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StpaError {
    #[error("malformed control structure: {0}")]
    MalformedStructure(String),
    #[error("relation {index} references undeclared node '{node}'")]
    DanglingRelation { index: usize, node: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl StpaError {
    pub fn name(&self) -> &'static str {
        match self {
            StpaError::MalformedStructure(_) => "MalformedStructure",
            StpaError::DanglingRelation { .. } => "DanglingRelation",
            StpaError::Model(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Controller,
    Actuator,
    ControlledProcess,
    Sensor,
    Human,
}

impl NodeKind {
    pub fn tag(self) -> &'static str {
        match self {
            NodeKind::Controller => "stpa:controller",
            NodeKind::Actuator => "stpa:actuator",
            NodeKind::ControlledProcess => "stpa:controlled-process",
            NodeKind::Sensor => "stpa:sensor",
            NodeKind::Human => "stpa:human",
        }
    }

    /// Factors to surface first when this node is the source of a relation.
    /// Ordering only; prompts are never filtered by it.
    pub fn factor_hints(self) -> &'static [PrimaryFactor] {
        match self {
            NodeKind::Controller | NodeKind::Human => {
                &[PrimaryFactor::Human, PrimaryFactor::Organisation]
            }
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    ControlAction,
    Feedback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlNode {
    pub id: String,
    pub name: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlRelation {
    pub from: String,
    pub to: String,
    pub kind: RelationKind,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlStructure {
    pub nodes: Vec<ControlNode>,
    pub relations: Vec<ControlRelation>,
}

impl ControlStructure {
    pub fn node(&self, id: &str) -> Option<&ControlNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    fn validate(&self) -> Result<(), StpaError> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if n.id.trim().is_empty() {
                return Err(StpaError::MalformedStructure("empty node id".into()));
            }
            if n.name.trim().is_empty() {
                return Err(StpaError::MalformedStructure(format!("node '{}' has no name", n.id)));
            }
            if !ids.insert(n.id.as_str()) {
                return Err(StpaError::MalformedStructure(format!("duplicate node id '{}'", n.id)));
            }
        }
        for (index, r) in self.relations.iter().enumerate() {
            for end in [&r.from, &r.to] {
                if !ids.contains(end.as_str()) {
                    return Err(StpaError::DanglingRelation {
                        index,
                        node: end.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a control-structure document.
pub fn import_control_structure(doc: &str) -> Result<ControlStructure, StpaError> {
    let cs: ControlStructure =
        serde_json::from_str(doc).map_err(|e| StpaError::MalformedStructure(e.to_string()))?;
    cs.validate()?;
    Ok(cs)
}

/// Node id -> object id.
pub type NodeMapping = BTreeMap<String, ObjectId>;

/// The mapping recorded by earlier [`materialize`] runs, if any.
pub fn stored_mapping(project: &Project) -> NodeMapping {
    project
        .metadata()
        .get(MAPPING_KEY)
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or_default()
}

/// Creates one object per node not already mapped. Re-running on the same
/// project creates nothing and returns the same mapping.
pub fn materialize(project: &mut Project, structure: &ControlStructure, ctx: &OpContext) -> NodeMapping {
    let mut mapping = stored_mapping(project);
    mapping.retain(|_, obj| project.object(obj.as_str()).is_some());
    let mut changed = false;
    for node in &structure.nodes {
        if mapping.contains_key(&node.id) {
            continue;
        }
        let id = project
            .add_object(
                NewObject::named(node.name.clone())
                    .description(format!("STPA control-structure node '{}'", node.id))
                    .tag(node.kind.tag()),
                ctx,
            )
            .expect("validated node names are non-empty");
        mapping.insert(node.id.clone(), id);
        changed = true;
    }
    if changed || stored_mapping(project) != mapping {
        let value: Value = serde_json::to_value(&mapping).expect("mapping serializes");
        project.set_metadata(MAPPING_KEY, value, ctx);
    }
    structure
        .nodes
        .iter()
        .map(|n| (n.id.clone(), mapping[&n.id].clone()))
        .collect()
}

/// Uncovered prompts for every control relation, in relation order, with
/// repeated ordered object pairs visited once. Relations from a node to
/// itself produce no prompts.
pub fn prompts_for_relations(
    project: &Project,
    catalog: &ReferenceCatalog,
    structure: &ControlStructure,
    mapping: &NodeMapping,
) -> Result<Vec<SuggestionPrompt>, StpaError> {
    let resolve = |node: &str| -> Result<&ObjectId, StpaError> {
        mapping
            .get(node)
            .ok_or_else(|| ModelError::UnknownObject(format!("unmapped node '{node}'")).into())
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for rel in &structure.relations {
        let source = resolve(&rel.from)?;
        let target = resolve(&rel.to)?;
        if source == target || !seen.insert((source.clone(), target.clone())) {
            continue;
        }
        let mut prompts = suggest_paths(project, catalog, source.as_str(), target.as_str(), false)?;
        let hints = structure
            .node(&rel.from)
            .map(|n| n.kind.factor_hints())
            .unwrap_or(&[]);
        prompts.sort_by_key(|p| !hints.contains(&p.source_factor));
        out.extend(prompts);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Disposition {
    /// Definite: feed back into the STPA analysis.
    FeedToSTPA,
    /// Plausible: document as a tracked finding.
    TrackAsUncertain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationFinding {
    pub path_id: PathId,
    pub disposition: Disposition,
}

/// Non-discharged paths whose endpoints both belong to the mapped objects.
pub fn export_findings(project: &Project, mapping: &NodeMapping) -> Vec<AugmentationFinding> {
    let mapped: BTreeSet<&ObjectId> = mapping.values().collect();
    project
        .paths()
        .iter()
        .filter(|p| mapped.contains(&p.source.object) && mapped.contains(&p.target.object))
        .filter_map(|p| {
            let disposition = match p.classification {
                Classification::Definite => Disposition::FeedToSTPA,
                Classification::Plausible => Disposition::TrackAsUncertain,
                Classification::Discharged => return None,
            };
            Some(AugmentationFinding {
                path_id: p.id.clone(),
                disposition,
            })
        })
        .collect()
}
