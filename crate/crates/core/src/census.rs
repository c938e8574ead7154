//! Per-type instance counts and signed differences between two models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::schema::{ReportGroup, SchemaVersion, TypeRegistry};
use crate::spf::InstanceGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Census {
    /// Exact type name to count; zero counts are never stored.
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
    pub byte_size: u64,
    pub schema: Option<SchemaVersion>,
}

impl Census {
    pub fn from_counts(
        counts: impl IntoIterator<Item = (String, u64)>,
        byte_size: u64,
        schema: Option<SchemaVersion>,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (name, n) in counts {
            *map.entry(name).or_insert(0) += n;
        }
        map.retain(|_, n| *n > 0);
        let total = map.values().sum();
        Self {
            counts: map,
            total,
            byte_size,
            schema,
        }
    }

    pub fn count(&self, type_name: &str) -> u64 {
        self.counts.get(type_name).copied().unwrap_or(0)
    }
}

/// Counts every instance by its exact type name.
pub fn census(graph: &InstanceGraph) -> Census {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    // Count on the interned names first; a graph has few distinct types.
    let mut by_name: std::collections::HashMap<&str, u64> = std::collections::HashMap::new();
    for inst in graph.instances() {
        *by_name.entry(&inst.type_name).or_insert(0) += 1;
    }
    for (name, n) in by_name {
        counts.insert(name.to_string(), n);
    }
    Census {
        total: counts.values().sum(),
        counts,
        byte_size: graph.byte_size(),
        schema: SchemaVersion::from_header(graph.header()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusDiff {
    /// exported − reference, non-zero entries only.
    pub deltas: BTreeMap<String, i64>,
    pub lost_types: BTreeSet<String>,
    pub gained_types: BTreeSet<String>,
    /// Non-zero group sums of `deltas`.
    pub grouped_deltas: BTreeMap<ReportGroup, i64>,
    pub size_delta_bytes: i64,
    pub diagnostics: Vec<String>,
}

impl CensusDiff {
    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty() && self.lost_types.is_empty() && self.gained_types.is_empty()
    }
}

pub fn diff(registry: &TypeRegistry, reference: &Census, exported: &Census) -> CensusDiff {
    let mut deltas = BTreeMap::new();
    let mut lost_types = BTreeSet::new();
    let mut gained_types = BTreeSet::new();
    let names: BTreeSet<&String> = reference
        .counts
        .keys()
        .chain(exported.counts.keys())
        .collect();
    for name in names {
        let a = reference.count(name);
        let b = exported.count(name);
        let d = b as i64 - a as i64;
        if d != 0 {
            deltas.insert(name.clone(), d);
        }
        if a > 0 && b == 0 {
            lost_types.insert(name.clone());
        }
        if a == 0 && b > 0 {
            gained_types.insert(name.clone());
        }
    }
    let mut grouped_deltas = BTreeMap::new();
    let mut unknown = Vec::new();
    for (name, d) in &deltas {
        if !registry.contains(name) {
            unknown.push(name.as_str());
        }
        *grouped_deltas.entry(registry.group_of(name)).or_insert(0) += d;
    }
    grouped_deltas.retain(|_, d| *d != 0);

    let mut diagnostics = Vec::new();
    if reference.schema != exported.schema {
        diagnostics.push(format!(
            "cross-schema comparison: reference {}, exported {}",
            schema_label(reference.schema),
            schema_label(exported.schema)
        ));
    }
    if !unknown.is_empty() {
        diagnostics.push(format!(
            "types not in registry, grouped as Other: {}",
            unknown.join(", ")
        ));
    }
    CensusDiff {
        deltas,
        lost_types,
        gained_types,
        grouped_deltas,
        size_delta_bytes: exported.byte_size as i64 - reference.byte_size as i64,
        diagnostics,
    }
}

fn schema_label(schema: Option<SchemaVersion>) -> &'static str {
    schema.map_or("unknown", SchemaVersion::as_str)
}

/// Sum of deltas over a family of related types. Zero with non-zero member
/// deltas means a pure reclassification.
pub fn family_balance<S: AsRef<str>>(diff: &CensusDiff, family: &[S]) -> i64 {
    let members: BTreeSet<&str> = family.iter().map(AsRef::as_ref).collect();
    members.iter().filter_map(|t| diff.deltas.get(*t)).sum()
}

/// Families whose members are alternative encodings of the same objects.
pub const FAMILIES: &[(&str, &[&str])] = &[
    ("wall", &["IFCWALL", "IFCWALLSTANDARDCASE", "IFCWALLTYPE"]),
    (
        "stair",
        &["IFCSTAIR", "IFCSTAIRFLIGHT", "IFCSTAIRFLIGHTTYPE"],
    ),
    ("member", &["IFCMEMBER", "IFCMEMBERTYPE"]),
    (
        "proxy",
        &["IFCBUILDINGELEMENTPROXY", "IFCBUILDINGELEMENTPROXYTYPE"],
    ),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffRow {
    #[serde(rename = "type")]
    pub type_name: String,
    pub reference: u64,
    pub exported: u64,
    pub delta: i64,
    pub group: ReportGroup,
}

/// One row per type present in either census, sorted by group then name.
pub fn diff_rows(registry: &TypeRegistry, reference: &Census, exported: &Census) -> Vec<DiffRow> {
    let names: BTreeSet<&String> = reference
        .counts
        .keys()
        .chain(exported.counts.keys())
        .collect();
    let mut rows: Vec<DiffRow> = names
        .into_iter()
        .map(|name| {
            let a = reference.count(name);
            let b = exported.count(name);
            DiffRow {
                type_name: name.clone(),
                reference: a,
                exported: b,
                delta: b as i64 - a as i64,
                group: registry.group_of(name),
            }
        })
        .collect();
    rows.sort_by(|x, y| (x.group, &x.type_name).cmp(&(y.group, &y.type_name)));
    rows
}

pub fn rows_to_csv(rows: &[DiffRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["type", "reference", "exported", "delta", "group"])
        .expect("in-memory csv");
    for r in rows {
        w.write_record([
            r.type_name.clone(),
            r.reference.to_string(),
            r.exported.to_string(),
            r.delta.to_string(),
            r.group.to_string(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv output is utf-8")
}

pub fn rows_to_markdown(rows: &[DiffRow]) -> String {
    let mut out =
        String::from("| type | reference | exported | delta | group |\n|---|---:|---:|---:|---|\n");
    for r in rows {
        let delta = match r.delta {
            0 => "0".to_string(),
            d => format!("{d:+}"),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            r.type_name, r.reference, r.exported, delta, r.group
        );
    }
    out
}

/// Census rows (type, count, group), sorted by group then name.
pub fn census_rows<'a>(registry: &TypeRegistry, c: &'a Census) -> Vec<(ReportGroup, &'a str, u64)> {
    let mut rows: Vec<_> = c
        .counts
        .iter()
        .map(|(t, n)| (registry.group_of(t), t.as_str(), *n))
        .collect();
    rows.sort();
    rows
}
