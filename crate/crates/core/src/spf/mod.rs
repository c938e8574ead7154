//! ISO 10303-21 (STEP Physical File) reading and writing.
//!
//! Only the subset used by IFC exchange files is supported: one HEADER
//! section, one DATA section, simple (non-complex) entity instances.

mod parse;
pub mod text;
mod value;
mod write;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use parse::parse_spf;
pub use value::{format_real, AttributeValue, Real, SpfText, TypedValue};
pub use write::{write_spf, write_spf_to};

#[derive(Debug, Error)]
pub enum SpfError {
    #[error("malformed file at line {line}: {reason}")]
    MalformedFile {
        offset: usize,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("instance #{0} not found")]
pub struct NotFound(pub u64);

/// Recoverable anomalies found while reading a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    DuplicateInstanceId { id: u64 },
    DanglingReference { from: u64, to: u64 },
    UnknownEscape { id: Option<u64>, escape: String },
    IntegerOverflow { id: u64, lexeme: String },
    MissingHeaderRecord { record: String },
    MissingTerminator,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateInstanceId { id } => {
                write!(f, "duplicate instance id #{id}; last definition kept")
            }
            Self::DanglingReference { from, to } => {
                write!(f, "#{from} references missing instance #{to}")
            }
            Self::UnknownEscape {
                id: Some(id),
                escape,
            } => {
                write!(f, "unknown string escape {escape:?} in #{id}")
            }
            Self::UnknownEscape { id: None, escape } => {
                write!(f, "unknown string escape {escape:?} in header")
            }
            Self::IntegerOverflow { id, lexeme } => {
                write!(f, "integer {lexeme} in #{id} overflows; read as real")
            }
            Self::MissingHeaderRecord { record } => write!(f, "header lacks {record}"),
            Self::MissingTerminator => f.write_str("missing END-ISO-10303-21 terminator"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FileName {
    pub name: String,
    pub time_stamp: String,
    pub author: Vec<String>,
    pub organization: Vec<String>,
    pub preprocessor_version: String,
    pub originating_system: String,
    pub authorization: String,
}

/// A header record other than the three mandatory ones.
#[derive(Debug, Clone, PartialEq)]
pub struct HeaderRecord {
    pub name: String,
    pub parameters: Vec<AttributeValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpfHeader {
    pub description: Vec<String>,
    pub implementation_level: String,
    pub file_name: FileName,
    pub file_schema: Vec<String>,
    #[serde(skip)]
    pub extra: Vec<HeaderRecord>,
}

impl Default for SpfHeader {
    fn default() -> Self {
        Self {
            description: vec!["ViewDefinition [CoordinationView]".to_string()],
            implementation_level: "2;1".to_string(),
            file_name: FileName::default(),
            file_schema: Vec::new(),
            extra: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityInstance {
    pub id: u64,
    pub type_name: Arc<str>,
    pub attributes: Vec<AttributeValue>,
}

impl EntityInstance {
    pub fn attr(&self, index: usize) -> Option<&AttributeValue> {
        self.attributes.get(index)
    }

    pub fn for_each_reference(&self, mut f: impl FnMut(u64)) {
        for a in &self.attributes {
            a.for_each_reference(&mut f);
        }
    }

    pub fn is(&self, type_name: &str) -> bool {
        &*self.type_name == type_name
    }
}

/// Parsed content of one file. Immutable once built.
#[derive(Debug, Clone)]
pub struct InstanceGraph {
    header: SpfHeader,
    instances: Vec<EntityInstance>,
    index: HashMap<u64, usize>,
    byte_size: u64,
    diagnostics: Vec<Diagnostic>,
}

impl InstanceGraph {
    fn assemble(
        header: SpfHeader,
        instances: Vec<EntityInstance>,
        index: HashMap<u64, usize>,
        byte_size: u64,
        mut diagnostics: Vec<Diagnostic>,
    ) -> Self {
        for inst in &instances {
            inst.for_each_reference(|to| {
                if !index.contains_key(&to) {
                    diagnostics.push(Diagnostic::DanglingReference { from: inst.id, to });
                }
            });
        }
        Self {
            header,
            instances,
            index,
            byte_size,
            diagnostics,
        }
    }

    pub fn header(&self) -> &SpfHeader {
        &self.header
    }

    pub fn instances(&self) -> &[EntityInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Size in bytes of the source text, or of the serialized form for
    /// graphs built in memory.
    pub fn byte_size(&self) -> u64 {
        self.byte_size
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn resolve(&self, id: u64) -> Result<&EntityInstance, NotFound> {
        self.index
            .get(&id)
            .map(|&i| &self.instances[i])
            .ok_or(NotFound(id))
    }

    pub fn instances_of<'a>(
        &'a self,
        type_name: &'a str,
    ) -> impl Iterator<Item = &'a EntityInstance> + 'a {
        self.instances.iter().filter(move |i| i.is(type_name))
    }

    /// Follows the reference held in attribute `index` of `inst`.
    pub fn follow(&self, inst: &EntityInstance, index: usize) -> Option<&EntityInstance> {
        let id = inst.attr(index)?.as_reference()?;
        self.resolve(id).ok()
    }

    /// Copy of this graph with `keep` applied to every instance. Dangling
    /// references created by the filter show up as diagnostics.
    pub fn filtered(&self, mut keep: impl FnMut(&EntityInstance) -> bool) -> InstanceGraph {
        let mut builder = GraphBuilder::new(self.header.clone());
        for inst in self.instances.iter().filter(|i| keep(i)) {
            builder.insert(inst.clone());
        }
        builder.build()
    }

    /// Copy of this graph with every instance passed through `map`.
    pub fn mapped(&self, mut map: impl FnMut(EntityInstance) -> EntityInstance) -> InstanceGraph {
        let mut builder = GraphBuilder::new(self.header.clone());
        for inst in &self.instances {
            builder.insert(map(inst.clone()));
        }
        builder.build()
    }
}

/// Structural identity: header, ids, type names and attribute trees.
impl PartialEq for InstanceGraph {
    fn eq(&self, other: &Self) -> bool {
        self.header == other.header && self.instances == other.instances
    }
}

/// Incrementally assembles a graph with fresh instance ids.
#[derive(Debug)]
pub struct GraphBuilder {
    header: SpfHeader,
    instances: Vec<EntityInstance>,
    index: HashMap<u64, usize>,
    names: HashMap<String, Arc<str>>,
    next_id: u64,
}

impl GraphBuilder {
    pub fn new(header: SpfHeader) -> Self {
        Self {
            header,
            instances: Vec::new(),
            index: HashMap::new(),
            names: HashMap::new(),
            next_id: 1,
        }
    }

    fn intern(&mut self, name: &str) -> Arc<str> {
        if let Some(n) = self.names.get(name) {
            return n.clone();
        }
        let n: Arc<str> = Arc::from(name);
        self.names.insert(name.to_string(), n.clone());
        n
    }

    /// Adds an instance under the next free id and returns that id.
    pub fn add(&mut self, type_name: &str, attributes: Vec<AttributeValue>) -> u64 {
        let id = self.next_id;
        let type_name = self.intern(type_name);
        self.insert(EntityInstance {
            id,
            type_name,
            attributes,
        });
        id
    }

    /// Inserts an instance with its own id; a later insert with the same id
    /// replaces the earlier one.
    pub fn insert(&mut self, instance: EntityInstance) {
        self.next_id = self.next_id.max(instance.id + 1);
        match self.index.get(&instance.id) {
            Some(&slot) => self.instances[slot] = instance,
            None => {
                self.index.insert(instance.id, self.instances.len());
                self.instances.push(instance);
            }
        }
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn header_mut(&mut self) -> &mut SpfHeader {
        &mut self.header
    }

    pub fn instances(&self) -> &[EntityInstance] {
        &self.instances
    }

    pub fn build(self) -> InstanceGraph {
        let mut graph =
            InstanceGraph::assemble(self.header, self.instances, self.index, 0, Vec::new());
        let mut counter = ByteCounter(0);
        write_spf_to(&graph, &mut counter).expect("counting writer cannot fail");
        graph.byte_size = counter.0;
        graph
    }
}

struct ByteCounter(u64);

impl std::io::Write for ByteCounter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0 += buf.len() as u64;
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "ISO-10303-21;\nHEADER;\nFILE_DESCRIPTION(('ViewDefinition [CoordinationView]'),'2;1');\nFILE_NAME('min.ifc','2020-01-01T00:00:00',('a'),('o'),'pp','os','');\nFILE_SCHEMA(('IFC2X3'));\nENDSEC;\nDATA;\n#1=IFCBUILDING($,$,'B',$,$,$,$,$,$,$,$,$);\nENDSEC;\nEND-ISO-10303-21;\n";

    #[test]
    fn resolve_existing_and_missing() {
        let g = parse_spf(MINIMAL.as_bytes()).unwrap();
        assert_eq!(g.resolve(1).unwrap().type_name.as_ref(), "IFCBUILDING");
        assert_eq!(g.resolve(999), Err(NotFound(999)));
    }

    #[test]
    fn builder_assigns_fresh_ids_and_byte_size() {
        let mut b = GraphBuilder::new(SpfHeader::default());
        let p = b.add(
            "IFCCARTESIANPOINT",
            vec![AttributeValue::reals(&[0.0, 0.0, 0.0])],
        );
        let d = b.add(
            "IFCDIRECTION",
            vec![AttributeValue::reals(&[0.0, 0.0, 1.0])],
        );
        assert_eq!((p, d), (1, 2));
        let g = b.build();
        assert_eq!(g.byte_size(), write_spf(&g).len() as u64);
        assert!(g.diagnostics().is_empty());
    }

    #[test]
    fn filtering_reports_dangling_references() {
        let mut b = GraphBuilder::new(SpfHeader::default());
        let p = b.add(
            "IFCCARTESIANPOINT",
            vec![AttributeValue::reals(&[0.0, 0.0, 0.0])],
        );
        b.add(
            "IFCAXIS2PLACEMENT3D",
            vec![
                AttributeValue::Reference(p),
                AttributeValue::Unset,
                AttributeValue::Unset,
            ],
        );
        let g = b.build().filtered(|i| !i.is("IFCCARTESIANPOINT"));
        assert_eq!(
            g.diagnostics(),
            &[Diagnostic::DanglingReference { from: 2, to: 1 }]
        );
    }
}
