use std::collections::BTreeMap;

use serde::Serialize;

use crate::census::{census, diff, family_balance, Census, CensusDiff, FAMILIES};
use crate::georef::{detect_georef, LoGeoRefReport};
use crate::schema::{SchemaVersion, TypeRegistry};
use crate::spf::InstanceGraph;

/// Export/reference size ratios counted as unchanged.
pub const SIZE_RATIO_BAND: (f64, f64) = (0.98, 1.02);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteropReport {
    pub reference_census: Census,
    pub export_census: Census,
    pub diff: CensusDiff,
    pub family_balances: BTreeMap<String, i64>,
    pub unchanged: bool,
    pub georef_before: LoGeoRefReport,
    pub georef_after: LoGeoRefReport,
    pub georef_levels_changed: bool,
    pub size_ratio: f64,
}

fn georef(graph: &InstanceGraph) -> LoGeoRefReport {
    let schema = SchemaVersion::from_header(graph.header());
    let mut report = detect_georef(graph, schema.unwrap_or(SchemaVersion::Ifc2x3));
    if schema.is_none() {
        report
            .diagnostics
            .push("no recognised FILE_SCHEMA; read as IFC2X3".to_string());
    }
    report
}

/// Compares an exported model with the model it was exported from.
pub fn roundtrip_report(
    registry: &TypeRegistry,
    reference: &InstanceGraph,
    exported: &InstanceGraph,
) -> InteropReport {
    let reference_census = census(reference);
    let export_census = census(exported);
    let diff = diff(registry, &reference_census, &export_census);
    let family_balances = FAMILIES
        .iter()
        .map(|(name, members)| (name.to_string(), family_balance(&diff, members)))
        .collect();
    let size_ratio = match (reference_census.byte_size, export_census.byte_size) {
        (0, 0) => 1.0,
        (r, e) => e as f64 / r as f64,
    };
    let in_band = (SIZE_RATIO_BAND.0..=SIZE_RATIO_BAND.1).contains(&size_ratio);
    let georef_before = georef(reference);
    let georef_after = georef(exported);
    InteropReport {
        unchanged: diff.is_empty() && in_band,
        georef_levels_changed: georef_before.levels() != georef_after.levels(),
        reference_census,
        export_census,
        diff,
        family_balances,
        georef_before,
        georef_after,
        size_ratio,
    }
}
