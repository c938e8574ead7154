//! Data-driven registry of IFC type names: supertype edges, reporting
//! groups and per-schema availability.
//!
//! This is intentionally not an EXPRESS compiler. It carries the subset of
//! the type tree the census, georeferencing and geometry modules need.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spf::SpfHeader;

/// Registry shipped with the crate.
pub const DEFAULT_REGISTRY: &str = include_str!("../data/ifc_types.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemaVersion {
    #[serde(rename = "IFC2X3")]
    Ifc2x3,
    #[serde(rename = "IFC4")]
    Ifc4,
}

impl SchemaVersion {
    pub const ALL: [SchemaVersion; 2] = [SchemaVersion::Ifc2x3, SchemaVersion::Ifc4];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ifc2x3 => "IFC2X3",
            Self::Ifc4 => "IFC4",
        }
    }

    /// Picks the version declared in FILE_SCHEMA, if it is one of ours.
    pub fn from_header(header: &SpfHeader) -> Option<Self> {
        header.file_schema.iter().find_map(|s| s.parse().ok())
    }
}

impl fmt::Display for SchemaVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemaVersion {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "IFC2X3" | "IFC2X3_TC1" => Ok(Self::Ifc2x3),
            "IFC4" | "IFC4_ADD1" | "IFC4_ADD2" | "IFC4_ADD2_TC1" => Ok(Self::Ifc4),
            other => Err(SchemaError::UnknownSchema(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReportGroup {
    Metadata,
    SpatialStructure,
    Units,
    Quantities,
    BuildingElements,
    Geometry,
    Relationships,
    PropertiesAndMaterials,
    Other,
}

impl ReportGroup {
    pub const ALL: [ReportGroup; 9] = [
        Self::Metadata,
        Self::SpatialStructure,
        Self::Units,
        Self::Quantities,
        Self::BuildingElements,
        Self::Geometry,
        Self::Relationships,
        Self::PropertiesAndMaterials,
        Self::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Metadata => "Metadata",
            Self::SpatialStructure => "SpatialStructure",
            Self::Units => "Units",
            Self::Quantities => "Quantities",
            Self::BuildingElements => "BuildingElements",
            Self::Geometry => "Geometry",
            Self::Relationships => "Relationships",
            Self::PropertiesAndMaterials => "PropertiesAndMaterials",
            Self::Other => "Other",
        }
    }
}

impl fmt::Display for ReportGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportGroup {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| SchemaError::UnknownGroup(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("unknown type {0}")]
    UnknownType(String),
    #[error("unknown schema {0}")]
    UnknownSchema(String),
    #[error("unknown report group {0}")]
    UnknownGroup(String),
    #[error("registry line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("supertype cycle through {0}")]
    Cycle(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeEntry {
    pub supertype: Option<String>,
    pub group: ReportGroup,
    pub ifc2x3: bool,
    pub ifc4: bool,
}

impl TypeEntry {
    pub fn available_in(&self, schema: SchemaVersion) -> bool {
        match schema {
            SchemaVersion::Ifc2x3 => self.ifc2x3,
            SchemaVersion::Ifc4 => self.ifc4,
        }
    }
}

/// Immutable after load.
#[derive(Debug, Clone)]
pub struct TypeRegistry {
    entries: BTreeMap<String, TypeEntry>,
}

impl TypeRegistry {
    /// Parses `TYPE;SUPERTYPE;GROUP;IFC2X3|IFC4|BOTH` lines. Blank lines and
    /// `#` comments are skipped. Fails on unknown supertypes and cycles.
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| SchemaError::BadLine {
                line: n + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split(';').map(str::trim).collect();
            let [name, supertype, group, availability] = fields[..] else {
                return Err(bad("expected four ';'-separated fields"));
            };
            if name.is_empty() {
                return Err(bad("empty type name"));
            }
            let group: ReportGroup = group.parse().map_err(|_| bad("unknown group"))?;
            let (ifc2x3, ifc4) = match availability {
                "IFC2X3" => (true, false),
                "IFC4" => (false, true),
                "BOTH" => (true, true),
                _ => return Err(bad("availability must be IFC2X3, IFC4 or BOTH")),
            };
            let entry = TypeEntry {
                supertype: (!supertype.is_empty()).then(|| supertype.to_ascii_uppercase()),
                group,
                ifc2x3,
                ifc4,
            };
            if entries.insert(name.to_ascii_uppercase(), entry).is_some() {
                return Err(bad("duplicate type"));
            }
        }
        let registry = Self { entries };
        registry.check_edges()?;
        Ok(registry)
    }

    fn check_edges(&self) -> Result<(), SchemaError> {
        for entry in self.entries.values() {
            if let Some(s) = &entry.supertype {
                if !self.entries.contains_key(s) {
                    return Err(SchemaError::UnknownType(s.clone()));
                }
            }
        }
        self.topological_order().map(|_| ())
    }

    /// Types ordered so that every supertype precedes its subtypes.
    pub fn topological_order(&self) -> Result<Vec<&str>, SchemaError> {
        let mut order = Vec::with_capacity(self.entries.len());
        let mut done: BTreeSet<&str> = BTreeSet::new();
        for start in self.entries.keys() {
            let mut chain = Vec::new();
            let mut current = Some(start.as_str());
            while let Some(name) = current {
                if done.contains(name) {
                    break;
                }
                if chain.contains(&name) {
                    return Err(SchemaError::Cycle(name.to_string()));
                }
                chain.push(name);
                current = self.entries[name].supertype.as_deref();
            }
            for name in chain.into_iter().rev() {
                done.insert(name);
                order.push(name);
            }
        }
        Ok(order)
    }

    pub fn get(&self, name: &str) -> Option<&TypeEntry> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn supertype_of(&self, name: &str) -> Option<&str> {
        self.entries.get(name)?.supertype.as_deref()
    }

    /// Reflexive-transitive closure over supertype edges.
    pub fn is_subtype_of(&self, a: &str, b: &str) -> Result<bool, SchemaError> {
        for name in [a, b] {
            if !self.contains(name) {
                return Err(SchemaError::UnknownType(name.to_string()));
            }
        }
        let mut current = Some(a);
        while let Some(name) = current {
            if name == b {
                return Ok(true);
            }
            current = self.supertype_of(name);
        }
        Ok(false)
    }

    /// Unknown names fall into [`ReportGroup::Other`].
    pub fn group_of(&self, name: &str) -> ReportGroup {
        self.entries
            .get(name)
            .map_or(ReportGroup::Other, |e| e.group)
    }

    pub fn available_in(&self, name: &str, schema: SchemaVersion) -> bool {
        self.entries
            .get(name)
            .is_some_and(|e| e.available_in(schema))
    }
}

impl Default for TypeRegistry {
    fn default() -> Self {
        Self::parse(DEFAULT_REGISTRY).expect("bundled registry is well formed")
    }
}
