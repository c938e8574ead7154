//! Generator for the geometry conformance suite: thirty representation
//! items laid out on a six by five grid, including deliberately invalid
//! ones.

mod guid;
mod recipes;
pub mod spine;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::geomcheck::{ItemKind, ProfileKind, Reason, ValidityVerdict};
use crate::schema::SchemaVersion;
use crate::spf::{EntityInstance, GraphBuilder, InstanceGraph, SpfHeader};

pub use guid::{encode as encode_guid, GuidGen};
pub use recipes::{dims, generate_item};
pub use spine::{georef_fixture, AddressSpec, GeorefSpec, MapConversionSpec, Spine, SpineConfig};

pub const DEFAULT_SPACING: f64 = 5.0;
pub const DEFAULT_PRECISION: f64 = 1e-5;

/// Timestamp written when no clock is injected.
pub fn default_timestamp() -> DateTime<Utc> {
    DateTime::from_timestamp(1_577_836_800, 0).expect("fixed epoch is in range")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("item {slot} is not available in {schema}")]
    UnavailableItem { slot: Slot, schema: SchemaVersion },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Grid position: row letter and 1-based column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub row: u8,
    pub column: u8,
}

impl Slot {
    pub const fn new(row: char, column: u8) -> Self {
        Self {
            row: row as u8 - b'A',
            column,
        }
    }

    pub fn row_letter(self) -> char {
        (b'A' + self.row) as char
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.row_letter(), self.column)
    }
}

impl FromStr for Slot {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GenError::InvalidParameter(format!("bad slot {s:?}"));
        let mut chars = s.chars();
        let row = chars
            .next()
            .filter(char::is_ascii_uppercase)
            .ok_or_else(bad)?;
        let column: u8 = chars.as_str().parse().map_err(|_| bad())?;
        if column == 0 {
            return Err(bad());
        }
        Ok(Slot::new(row, column))
    }
}

impl Serialize for Slot {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    Nominal,
    NegativeDepth,
    ZeroDepth,
    NonNormalizedDirection,
    DirectionParallelToProfile,
    Slanted,
    ParamRangeOutsideCurve,
    Subtraction,
    Intersection,
    Union,
    HalfspaceClip,
    BelowPrecisionDepth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryTestItem {
    pub slot: Slot,
    pub definition_name: String,
    pub kind: ItemKind,
    pub profile: ProfileKind,
    pub variant: Variant,
    pub available_in: BTreeSet<SchemaVersion>,
    pub expected_validity: ValidityVerdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl GeometryTestItem {
    pub fn is_available(&self, schema: SchemaVersion) -> bool {
        self.available_in.contains(&schema)
    }

    /// IFC type of the representation item.
    pub fn root_entity(&self) -> &'static str {
        self.kind.entity()
    }
}

use ItemKind as K;
use ProfileKind as P;
use Variant as Va;

const TABLE: [(&str, &str, ItemKind, ProfileKind, Variant); 30] = [
    (
        "A1",
        "IfcBooleanResult_1",
        K::BooleanResult,
        P::None,
        Va::Subtraction,
    ),
    (
        "A2",
        "IfcBooleanResult_2",
        K::BooleanResult,
        P::None,
        Va::Intersection,
    ),
    (
        "A3",
        "IfcBooleanResult_3",
        K::BooleanResult,
        P::None,
        Va::Union,
    ),
    (
        "A4",
        "IfcBooleanClippingResult_1",
        K::BooleanClippingResult,
        P::None,
        Va::HalfspaceClip,
    ),
    (
        "A5",
        "IfcShellBasedSurfaceModel_1",
        K::ShellBasedSurfaceModel,
        P::None,
        Va::Nominal,
    ),
    (
        "B1",
        "IfcFacetedBrep_1",
        K::FacetedBrep,
        P::None,
        Va::Nominal,
    ),
    (
        "B2",
        "IfcExtrudedAreaSolid_1",
        K::ExtrudedAreaSolid,
        P::Rectangle,
        Va::Nominal,
    ),
    (
        "B3",
        "IfcExtrudedAreaSolid_2",
        K::ExtrudedAreaSolid,
        P::Rectangle,
        Va::NegativeDepth,
    ),
    (
        "B4",
        "IfcExtrudedAreaSolid_3",
        K::ExtrudedAreaSolid,
        P::Rectangle,
        Va::ZeroDepth,
    ),
    (
        "B5",
        "IfcExtrudedAreaSolid_4",
        K::ExtrudedAreaSolid,
        P::Rectangle,
        Va::NonNormalizedDirection,
    ),
    (
        "C1",
        "IfcExtrudedAreaSolid_7",
        K::ExtrudedAreaSolid,
        P::Rectangle,
        Va::DirectionParallelToProfile,
    ),
    (
        "C2",
        "IfcExtrudedAreaSolid_10",
        K::ExtrudedAreaSolid,
        P::Rectangle,
        Va::Slanted,
    ),
    (
        "C3",
        "IfcExtrudedAreaSolid_13",
        K::ExtrudedAreaSolid,
        P::Ellipse,
        Va::Nominal,
    ),
    (
        "C4",
        "IfcExtrudedAreaSolid_16",
        K::ExtrudedAreaSolid,
        P::Ellipse,
        Va::NonNormalizedDirection,
    ),
    (
        "C5",
        "IfcExtrudedAreaSolid_19",
        K::ExtrudedAreaSolid,
        P::Ellipse,
        Va::DirectionParallelToProfile,
    ),
    (
        "D1",
        "IfcExtrudedAreaSolid_22",
        K::ExtrudedAreaSolid,
        P::Ellipse,
        Va::Slanted,
    ),
    (
        "D2",
        "IfcExtrudedAreaSolid_25",
        K::ExtrudedAreaSolid,
        P::IShape,
        Va::Nominal,
    ),
    (
        "D3",
        "IfcExtrudedAreaSolid_28",
        K::ExtrudedAreaSolid,
        P::IShape,
        Va::NonNormalizedDirection,
    ),
    (
        "D4",
        "IfcExtrudedAreaSolid_31",
        K::ExtrudedAreaSolid,
        P::IShape,
        Va::DirectionParallelToProfile,
    ),
    (
        "D5",
        "IfcExtrudedAreaSolid_34",
        K::ExtrudedAreaSolid,
        P::IShape,
        Va::Slanted,
    ),
    (
        "E1",
        "IfcExtrudedAreaSolid_37",
        K::ExtrudedAreaSolid,
        P::CraneRailAShape,
        Va::Nominal,
    ),
    (
        "E2",
        "IfcExtrudedAreaSolid_40",
        K::ExtrudedAreaSolid,
        P::CraneRailAShape,
        Va::NonNormalizedDirection,
    ),
    (
        "E3",
        "IfcExtrudedAreaSolid_43",
        K::ExtrudedAreaSolid,
        P::CraneRailAShape,
        Va::DirectionParallelToProfile,
    ),
    (
        "E4",
        "IfcExtrudedAreaSolid_46",
        K::ExtrudedAreaSolid,
        P::CraneRailAShape,
        Va::Slanted,
    ),
    (
        "E5",
        "IfcRevolvedAreaSolid_1",
        K::RevolvedAreaSolid,
        P::Rectangle,
        Va::Nominal,
    ),
    (
        "F1",
        "IfcRevolvedAreaSolid_2",
        K::RevolvedAreaSolid,
        P::Ellipse,
        Va::Nominal,
    ),
    (
        "F2",
        "IfcRevolvedAreaSolid_3",
        K::RevolvedAreaSolid,
        P::IShape,
        Va::Nominal,
    ),
    (
        "F3",
        "IfcRevolvedAreaSolid_4",
        K::RevolvedAreaSolid,
        P::CraneRailAShape,
        Va::Nominal,
    ),
    (
        "F4",
        "IfcSweptDiskSolid_1",
        K::SweptDiskSolid,
        P::Disk,
        Va::Nominal,
    ),
    (
        "F5",
        "IfcSweptDiskSolid_2",
        K::SweptDiskSolid,
        P::Disk,
        Va::ParamRangeOutsideCurve,
    ),
];

/// Slots left out of the IFC4 suite.
pub const IFC2X3_ONLY: [&str; 7] = ["E1", "E2", "E3", "E4", "F3", "F4", "F5"];

fn expected_validity(variant: Variant) -> ValidityVerdict {
    ValidityVerdict::from_reasons(match variant {
        Va::NegativeDepth | Va::ZeroDepth => Some(Reason::PositiveLength),
        Va::DirectionParallelToProfile => Some(Reason::ValidExtrusionDirection),
        Va::ParamRangeOutsideCurve => Some(Reason::ParamRange),
        Va::BelowPrecisionDepth => Some(Reason::BelowPrecision),
        _ => None,
    })
}

fn notes(slot: &str, profile: ProfileKind, variant: Variant) -> Vec<String> {
    let mut out = Vec::new();
    if slot == "F4" {
        out.push(
            "left out of the IFC4 set to match the reference layout, although IfcSweptDiskSolid exists in IFC4"
                .to_string(),
        );
    }
    if profile == P::IShape {
        out.push("fillet radii are written; viewers may ignore them".to_string());
    }
    if profile == P::CraneRailAShape {
        out.push("IfcCraneRailAShapeProfileDef was removed in IFC4".to_string());
    }
    if variant == Va::NonNormalizedDirection {
        out.push("valid, but the non-normalized direction may render differently".to_string());
    }
    out
}

/// The thirty canonical items in grid order.
pub fn catalogue() -> Vec<GeometryTestItem> {
    TABLE
        .iter()
        .map(|&(slot, name, kind, profile, variant)| {
            let available_in = if IFC2X3_ONLY.contains(&slot) {
                BTreeSet::from([SchemaVersion::Ifc2x3])
            } else {
                BTreeSet::from(SchemaVersion::ALL)
            };
            GeometryTestItem {
                slot: slot.parse().expect("table slots are well formed"),
                definition_name: name.to_string(),
                kind,
                profile,
                variant,
                available_in,
                expected_validity: expected_validity(variant),
                notes: notes(slot, profile, variant),
            }
        })
        .collect()
}

/// Optional extra item: a rectangle extruded by a tenth of the precision.
pub fn below_precision_item() -> GeometryTestItem {
    GeometryTestItem {
        slot: Slot::new('G', 1),
        definition_name: "IfcExtrudedAreaSolid_BelowPrecision".to_string(),
        kind: K::ExtrudedAreaSolid,
        profile: P::Rectangle,
        variant: Va::BelowPrecisionDepth,
        available_in: BTreeSet::from(SchemaVersion::ALL),
        expected_validity: expected_validity(Va::BelowPrecisionDepth),
        notes: vec!["depth is positive but below the context precision".to_string()],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub spacing: f64,
    pub precision: f64,
    pub timestamp: DateTime<Utc>,
    pub with_below_precision: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            spacing: DEFAULT_SPACING,
            precision: DEFAULT_PRECISION,
            timestamp: default_timestamp(),
            with_below_precision: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteManifest {
    pub schema: SchemaVersion,
    pub grid_spacing: f64,
    pub precision: f64,
    pub items: Vec<GeometryTestItem>,
}

impl SuiteManifest {
    pub fn item(&self, slot: Slot) -> Option<&GeometryTestItem> {
        self.items.iter().find(|i| i.slot == slot)
    }
}

/// The canonical suite for `schema`.
pub fn generate_geometry_suite(
    schema: SchemaVersion,
    config: &SuiteConfig,
) -> Result<(InstanceGraph, SuiteManifest), GenError> {
    let mut items: Vec<GeometryTestItem> = catalogue()
        .into_iter()
        .filter(|i| i.is_available(schema))
        .collect();
    if config.with_below_precision {
        items.push(below_precision_item());
    }
    generate_items(schema, items, config)
}

/// A suite holding exactly `items`; any item unavailable in `schema` is an
/// error.
pub fn generate_items(
    schema: SchemaVersion,
    items: Vec<GeometryTestItem>,
    config: &SuiteConfig,
) -> Result<(InstanceGraph, SuiteManifest), GenError> {
    if !(config.spacing > 0.0 && config.spacing.is_finite()) {
        return Err(GenError::InvalidParameter(format!(
            "spacing {}",
            config.spacing
        )));
    }
    if !(config.precision > 0.0 && config.precision.is_finite()) {
        return Err(GenError::InvalidParameter(format!(
            "precision {}",
            config.precision
        )));
    }
    if let Some(bad) = items.iter().find(|i| !i.is_available(schema)) {
        return Err(GenError::UnavailableItem {
            slot: bad.slot,
            schema,
        });
    }
    let spine_config = SpineConfig {
        schema,
        precision: config.precision,
        timestamp: config.timestamp,
        file_name: format!(
            "geometry-suite-{}.ifc",
            schema.as_str().to_ascii_lowercase()
        ),
        project_name: "Geometry suite".to_string(),
    };
    let mut spine = Spine::new(&spine_config, &GeorefSpec::default());
    for item in &items {
        let root = generate_item(&mut spine.builder, item, schema, config.precision)?;
        let origin = [
            f64::from(item.slot.column - 1) * config.spacing,
            f64::from(item.slot.row) * config.spacing,
            0.0,
        ];
        spine.add_proxy(
            &item.definition_name,
            &item.slot.to_string(),
            origin,
            recipes::representation_type(item.kind),
            root,
        );
    }
    let manifest = SuiteManifest {
        schema,
        grid_spacing: config.spacing,
        precision: config.precision,
        items,
    };
    Ok((spine.finish(), manifest))
}

/// The instances one item contributes, with ids starting at 1.
pub fn item_fragment(
    item: &GeometryTestItem,
    schema: SchemaVersion,
    precision: f64,
) -> Result<Vec<EntityInstance>, GenError> {
    let mut b = GraphBuilder::new(SpfHeader::default());
    generate_item(&mut b, item, schema, precision)?;
    Ok(b.instances().to_vec())
}
