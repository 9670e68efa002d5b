//! Reference catalog of causal factors and causal-path keywords.
//!
//! The six primary factors (the HOT-PIE hexagon) and their fifteen secondary
//! refinements are fixed enumerations. The keyword templates under each
//! secondary factor are data: they ship as a bundled JSON document and can be
//! replaced by a user-supplied catalog that passes the same validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED_CATALOG: &str = include_str!("../data/catalog.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("malformed catalog: {0}")]
    MalformedCatalog(String),
    #[error("unknown causal factor '{0}'")]
    UnknownFactor(String),
    #[error("duplicate template '{keyword}' under {secondary}")]
    DuplicateTemplate { keyword: String, secondary: String },
    #[error("secondary factor {0} has no templates")]
    EmptySecondary(String),
}

impl TaxonomyError {
    pub fn name(&self) -> &'static str {
        match self {
            TaxonomyError::MalformedCatalog(_) => "MalformedCatalog",
            TaxonomyError::UnknownFactor(_) => "UnknownFactor",
            TaxonomyError::DuplicateTemplate { .. } => "DuplicateTemplate",
            TaxonomyError::EmptySecondary(_) => "EmptySecondary",
        }
    }
}

/// One of the six primary causal factors. Declaration order is the fixed
/// H, O, T, P, I, E enumeration order used everywhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrimaryFactor {
    Human,
    Organisation,
    Technology,
    Process,
    Information,
    Environment,
}

impl PrimaryFactor {
    pub const ALL: [PrimaryFactor; 6] = [
        PrimaryFactor::Human,
        PrimaryFactor::Organisation,
        PrimaryFactor::Technology,
        PrimaryFactor::Process,
        PrimaryFactor::Information,
        PrimaryFactor::Environment,
    ];

    /// Single-letter code, also used as the DOT port name.
    pub fn code(self) -> char {
        match self {
            PrimaryFactor::Human => 'H',
            PrimaryFactor::Organisation => 'O',
            PrimaryFactor::Technology => 'T',
            PrimaryFactor::Process => 'P',
            PrimaryFactor::Information => 'I',
            PrimaryFactor::Environment => 'E',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PrimaryFactor::Human => "Human",
            PrimaryFactor::Organisation => "Organisation",
            PrimaryFactor::Technology => "Technology",
            PrimaryFactor::Process => "Process",
            PrimaryFactor::Information => "Information",
            PrimaryFactor::Environment => "Environment",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn secondaries(self) -> impl Iterator<Item = SecondaryFactor> {
        SecondaryFactor::ALL
            .into_iter()
            .filter(move |s| s.parent() == self)
    }
}

impl fmt::Display for PrimaryFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrimaryFactor {
    type Err = TaxonomyError;

    /// Accepts the full name (any case) or the single-letter code.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        PrimaryFactor::ALL
            .into_iter()
            .find(|p| {
                p.name().eq_ignore_ascii_case(t)
                    || (t.len() == 1 && t.eq_ignore_ascii_case(&p.code().to_string()))
            })
            .ok_or_else(|| TaxonomyError::UnknownFactor(s.to_string()))
    }
}

/// The fifteen secondary causal factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SecondaryFactor {
    H1,
    H2,
    H3,
    O1,
    O2,
    O3,
    T1,
    T2,
    T3,
    P1,
    P2,
    I1,
    I2,
    E1,
    E2,
}

impl SecondaryFactor {
    pub const ALL: [SecondaryFactor; 15] = [
        SecondaryFactor::H1,
        SecondaryFactor::H2,
        SecondaryFactor::H3,
        SecondaryFactor::O1,
        SecondaryFactor::O2,
        SecondaryFactor::O3,
        SecondaryFactor::T1,
        SecondaryFactor::T2,
        SecondaryFactor::T3,
        SecondaryFactor::P1,
        SecondaryFactor::P2,
        SecondaryFactor::I1,
        SecondaryFactor::I2,
        SecondaryFactor::E1,
        SecondaryFactor::E2,
    ];

    pub fn id(self) -> &'static str {
        use SecondaryFactor::*;
        match self {
            H1 => "H1",
            H2 => "H2",
            H3 => "H3",
            O1 => "O1",
            O2 => "O2",
            O3 => "O3",
            T1 => "T1",
            T2 => "T2",
            T3 => "T3",
            P1 => "P1",
            P2 => "P2",
            I1 => "I1",
            I2 => "I2",
            E1 => "E1",
            E2 => "E2",
        }
    }

    pub fn name(self) -> &'static str {
        use SecondaryFactor::*;
        match self {
            H1 => "Manpower",
            H2 => "Mental state",
            H3 => "Action",
            O1 => "Management",
            O2 => "Policy",
            O3 => "Resource",
            T1 => "Machine",
            T2 => "Property",
            T3 => "Support",
            P1 => "Nature",
            P2 => "Phase",
            I1 => "Knowledge",
            I2 => "Error",
            E1 => "Physical",
            E2 => "Non-physical",
        }
    }

    pub fn parent(self) -> PrimaryFactor {
        use SecondaryFactor::*;
        match self {
            H1 | H2 | H3 => PrimaryFactor::Human,
            O1 | O2 | O3 => PrimaryFactor::Organisation,
            T1 | T2 | T3 => PrimaryFactor::Technology,
            P1 | P2 => PrimaryFactor::Process,
            I1 | I2 => PrimaryFactor::Information,
            E1 | E2 => PrimaryFactor::Environment,
        }
    }
}

impl fmt::Display for SecondaryFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SecondaryFactor {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        SecondaryFactor::ALL
            .into_iter()
            .find(|f| f.id().eq_ignore_ascii_case(t))
            .ok_or_else(|| TaxonomyError::UnknownFactor(s.to_string()))
    }
}

impl TryFrom<String> for SecondaryFactor {
    type Error = TaxonomyError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<SecondaryFactor> for String {
    fn from(value: SecondaryFactor) -> Self {
        value.id().to_string()
    }
}

/// Either level of the factor hierarchy, as accepted by [`ReferenceCatalog::lookup`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorRef {
    Primary(PrimaryFactor),
    Secondary(SecondaryFactor),
}

impl FromStr for FactorRef {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(sec) = s.parse::<SecondaryFactor>() {
            return Ok(FactorRef::Secondary(sec));
        }
        s.parse::<PrimaryFactor>()
            .map(FactorRef::Primary)
            .map_err(|_| TaxonomyError::UnknownFactor(s.to_string()))
    }
}

impl From<PrimaryFactor> for FactorRef {
    fn from(p: PrimaryFactor) -> Self {
        FactorRef::Primary(p)
    }
}

impl From<SecondaryFactor> for FactorRef {
    fn from(s: SecondaryFactor) -> Self {
        FactorRef::Secondary(s)
    }
}

/// A keyword naming a known causal path under one secondary factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathTemplate {
    pub keyword: String,
    pub secondary: SecondaryFactor,
    /// Reference numbers as printed in the source table. Opaque labels.
    pub citations: Vec<u32>,
}

impl PathTemplate {
    pub fn primary(&self) -> PrimaryFactor {
        self.secondary.parent()
    }

    fn sort_key(&self) -> (&'static str, &str) {
        (self.secondary.id(), self.keyword.as_str())
    }
}

/// Lowercase, trim, and collapse internal whitespace.
pub fn normalize_keyword(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct CatalogDoc {
    version: String,
    #[serde(default)]
    provenance: String,
    #[serde(default)]
    factors: Vec<FactorDoc>,
    templates: Vec<TemplateDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FactorDoc {
    id: String,
    name: String,
    parent: String,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TemplateDoc {
    keyword: String,
    secondary: String,
    #[serde(default)]
    citations: Vec<u32>,
}

/// A validated, immutable catalog. Templates are held in (secondary id,
/// keyword) order so every query result is a stable subsequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceCatalog {
    version: String,
    provenance: String,
    templates: Vec<PathTemplate>,
}

impl ReferenceCatalog {
    /// Parses and validates a catalog document.
    pub fn from_json(text: &str) -> Result<Self, TaxonomyError> {
        if text.trim().is_empty() {
            return Err(TaxonomyError::MalformedCatalog("empty document".into()));
        }
        let doc: CatalogDoc = serde_json::from_str(text)
            .map_err(|e| TaxonomyError::MalformedCatalog(e.to_string()))?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: CatalogDoc) -> Result<Self, TaxonomyError> {
        for factor in &doc.factors {
            let sec: SecondaryFactor = factor.id.parse()?;
            let parent: PrimaryFactor = factor.parent.parse()?;
            if sec.parent() != parent {
                return Err(TaxonomyError::MalformedCatalog(format!(
                    "factor {} declared under {} but belongs to {}",
                    sec,
                    parent,
                    sec.parent()
                )));
            }
        }

        let mut seen = BTreeSet::new();
        let mut templates = Vec::with_capacity(doc.templates.len());
        for t in doc.templates {
            let secondary: SecondaryFactor = t.secondary.parse()?;
            let keyword = normalize_keyword(&t.keyword);
            if keyword.is_empty() {
                return Err(TaxonomyError::MalformedCatalog(format!(
                    "empty keyword under {secondary}"
                )));
            }
            if !seen.insert((secondary, keyword.clone())) {
                return Err(TaxonomyError::DuplicateTemplate {
                    keyword,
                    secondary: secondary.id().to_string(),
                });
            }
            templates.push(PathTemplate {
                keyword,
                secondary,
                citations: t.citations,
            });
        }

        for sec in SecondaryFactor::ALL {
            if !templates.iter().any(|t| t.secondary == sec) {
                return Err(TaxonomyError::EmptySecondary(sec.id().to_string()));
            }
        }

        templates.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Ok(ReferenceCatalog {
            version: doc.version,
            provenance: doc.provenance,
            templates,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn templates(&self) -> &[PathTemplate] {
        &self.templates
    }

    /// All templates under a factor; a primary factor yields the union over
    /// its secondaries.
    pub fn lookup(&self, factor: FactorRef) -> Vec<&PathTemplate> {
        self.templates
            .iter()
            .filter(|t| match factor {
                FactorRef::Primary(p) => t.primary() == p,
                FactorRef::Secondary(s) => t.secondary == s,
            })
            .collect()
    }

    /// Case-insensitive substring search over keywords. An empty query
    /// matches nothing.
    pub fn search(&self, query: &str) -> Vec<&PathTemplate> {
        let needle = query.trim().to_lowercase();
        if needle.is_empty() {
            return Vec::new();
        }
        self.templates
            .iter()
            .filter(|t| t.keyword.contains(&needle))
            .collect()
    }

    pub fn contains_keyword(&self, keyword: &str) -> bool {
        let k = normalize_keyword(keyword);
        self.templates.iter().any(|t| t.keyword == k)
    }

    /// Keywords not present anywhere in the catalog. Callers surface these
    /// as warnings; free-form keywords are allowed on paths.
    pub fn unknown_keywords<'a>(&self, keywords: &'a [String]) -> Vec<&'a str> {
        keywords
            .iter()
            .filter(|k| !self.contains_keyword(k))
            .map(String::as_str)
            .collect()
    }

    pub fn counts_by_secondary(&self) -> BTreeMap<SecondaryFactor, usize> {
        let mut counts = BTreeMap::new();
        for t in &self.templates {
            *counts.entry(t.secondary).or_insert(0) += 1;
        }
        counts
    }

    /// Serializes back to the catalog file format.
    pub fn to_json(&self) -> String {
        let doc = CatalogDoc {
            version: self.version.clone(),
            provenance: self.provenance.clone(),
            factors: SecondaryFactor::ALL
                .into_iter()
                .map(|s| FactorDoc {
                    id: s.id().into(),
                    name: s.name().into(),
                    parent: s.parent().name().into(),
                })
                .collect(),
            templates: self
                .templates
                .iter()
                .map(|t| TemplateDoc {
                    keyword: t.keyword.clone(),
                    secondary: t.secondary.id().into(),
                    citations: t.citations.clone(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("catalog serializes");
        out.push('\n');
        out
    }
}

/// Reads and validates a catalog document from any reader.
pub fn load_catalog<R: Read>(mut source: R) -> Result<ReferenceCatalog, TaxonomyError> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| TaxonomyError::MalformedCatalog(e.to_string()))?;
    ReferenceCatalog::from_json(&text)
}

/// Templates under a factor given by id ("H1") or primary name/code.
pub fn lookup_templates<'a>(
    catalog: &'a ReferenceCatalog,
    factor: &str,
) -> Result<Vec<&'a PathTemplate>, TaxonomyError> {
    Ok(catalog.lookup(factor.parse()?))
}

pub fn search_keywords<'a>(catalog: &'a ReferenceCatalog, query: &str) -> Vec<&'a PathTemplate> {
    catalog.search(query)
}

/// The raw bundled catalog document.
pub fn bundled_catalog_json() -> &'static str {
    BUNDLED_CATALOG
}

/// The bundled catalog, parsed once.
pub fn default_catalog() -> &'static ReferenceCatalog {
    static CATALOG: OnceLock<ReferenceCatalog> = OnceLock::new();
    CATALOG.get_or_init(|| {
        ReferenceCatalog::from_json(BUNDLED_CATALOG).expect("bundled catalog is valid")
    })
}
