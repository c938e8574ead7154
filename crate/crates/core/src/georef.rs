//! Level-of-georeferencing detection (LoGeoRef 10 to 50).

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::schema::SchemaVersion;
use crate::spf::{AttributeValue, EntityInstance, InstanceGraph};

const SITE_PLACEMENT: usize = 5;
const SITE_LATITUDE: usize = 9;
const SITE_LONGITUDE: usize = 10;
const SITE_ELEVATION: usize = 11;
const SITE_ADDRESS: usize = 13;
const BUILDING_ADDRESS: usize = 11;
const PROJECT_CONTEXTS: usize = 7;
const PROJECT_UNITS: usize = 8;
const CONTEXT_TYPE: usize = 1;
const CONTEXT_WCS: usize = 4;
const CONTEXT_TRUE_NORTH: usize = 5;

/// Coordinates with an absolute value at or below this are treated as zero.
pub const ORIGIN_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LoGeoRefLevel {
    #[serde(rename = "LoGeoRef10")]
    L10,
    #[serde(rename = "LoGeoRef20")]
    L20,
    #[serde(rename = "LoGeoRef30")]
    L30,
    #[serde(rename = "LoGeoRef40")]
    L40,
    #[serde(rename = "LoGeoRef50")]
    L50,
}

impl LoGeoRefLevel {
    pub const ALL: [LoGeoRefLevel; 5] = [Self::L10, Self::L20, Self::L30, Self::L40, Self::L50];

    pub fn number(self) -> u8 {
        match self {
            Self::L10 => 10,
            Self::L20 => 20,
            Self::L30 => 30,
            Self::L40 => 40,
            Self::L50 => 50,
        }
    }
}

impl fmt::Display for LoGeoRefLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LoGeoRef{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AddressHost {
    Site,
    Building,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostalAddress {
    pub host: AddressHost,
    pub address_lines: Vec<String>,
    pub town: Option<String>,
    pub region: Option<String>,
    pub postal_code: Option<String>,
    pub country: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteLocation {
    pub latitude: f64,
    pub longitude: f64,
    pub elevation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferencePoint {
    pub location: [f64; 3],
    pub axis: Option<[f64; 3]>,
    pub ref_direction: Option<[f64; 3]>,
    pub length_unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldCoordinateSystem {
    pub origin: [f64; 3],
    pub axis: Option<[f64; 3]>,
    pub ref_direction: Option<[f64; 3]>,
    pub true_north: Option<[f64; 2]>,
    pub length_unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapConversion {
    pub eastings: f64,
    pub northings: f64,
    pub orthogonal_height: f64,
    pub x_axis_abscissa: Option<f64>,
    pub x_axis_ordinate: Option<f64>,
    pub scale: Option<f64>,
    pub crs_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GeoParams {
    Address(PostalAddress),
    Location(SiteLocation),
    Placement(ReferencePoint),
    Context(WorldCoordinateSystem),
    Map(MapConversion),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoGeoRefReport {
    pub detected: BTreeMap<LoGeoRefLevel, GeoParams>,
    pub diagnostics: Vec<String>,
}

impl LoGeoRefReport {
    pub fn levels(&self) -> Vec<LoGeoRefLevel> {
        self.detected.keys().copied().collect()
    }

    pub fn has(&self, level: LoGeoRefLevel) -> bool {
        self.detected.contains_key(&level)
    }

    /// `{levels, params, diagnostics}` with sorted object keys.
    pub fn to_json(&self) -> serde_json::Value {
        let params: serde_json::Map<String, serde_json::Value> = self
            .detected
            .iter()
            .map(|(level, p)| {
                (
                    level.to_string(),
                    serde_json::to_value(p).expect("params serialize"),
                )
            })
            .collect();
        serde_json::json!({
            "levels": self.detected.keys().map(ToString::to_string).collect::<Vec<_>>(),
            "params": params,
            "diagnostics": self.diagnostics,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AngleError {
    #[error("compound angle components have mixed signs")]
    MixedSign,
    #[error("compound angle needs 3 or 4 components, got {0}")]
    BadLength(usize),
}

/// Degrees, minutes, seconds and optional millionths of a second to decimal
/// degrees.
pub fn compound_angle_to_degrees(measure: &[i64]) -> Result<f64, AngleError> {
    if !(3..=4).contains(&measure.len()) {
        return Err(AngleError::BadLength(measure.len()));
    }
    let negative = measure.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0);
    if measure.iter().any(|&c| c != 0 && (c < 0) != negative) {
        return Err(AngleError::MixedSign);
    }
    let c = |i: usize| measure.get(i).map_or(0.0, |v| v.unsigned_abs() as f64);
    let magnitude = c(0) + c(1) / 60.0 + c(2) / 3600.0 + c(3) / 3.6e9;
    Ok(if negative { -magnitude } else { magnitude })
}

/// Read-only detection over an immutable graph.
pub fn detect_georef(graph: &InstanceGraph, schema: SchemaVersion) -> LoGeoRefReport {
    let mut report = LoGeoRefReport::default();
    let length_unit = length_unit_name(graph, &mut report.diagnostics);

    let mut sites = graph.instances_of("IFCSITE");
    let site = sites.next();
    if sites.next().is_some() {
        report
            .diagnostics
            .push("several IfcSite instances; the first is analysed".to_string());
    }
    if site.is_none() {
        report.diagnostics.push("no IfcSite instance".to_string());
    }

    if let Some(address) = detect_address(graph, site, &mut report.diagnostics) {
        report
            .detected
            .insert(LoGeoRefLevel::L10, GeoParams::Address(address));
    }
    if let Some(site) = site {
        if let Some(loc) = detect_lat_lon(site, &mut report.diagnostics) {
            report
                .detected
                .insert(LoGeoRefLevel::L20, GeoParams::Location(loc));
        }
        if let Some(point) =
            detect_site_placement(graph, site, &length_unit, &mut report.diagnostics)
        {
            report
                .detected
                .insert(LoGeoRefLevel::L30, GeoParams::Placement(point));
        }
    }
    if let Some(wcs) = detect_context(graph, &length_unit, &mut report.diagnostics) {
        report
            .detected
            .insert(LoGeoRefLevel::L40, GeoParams::Context(wcs));
    }
    let map = detect_map_conversion(graph, &mut report.diagnostics);
    match (map, schema) {
        (Some(m), SchemaVersion::Ifc4) => {
            report
                .detected
                .insert(LoGeoRefLevel::L50, GeoParams::Map(m));
        }
        (Some(_), SchemaVersion::Ifc2x3) => report
            .diagnostics
            .push("IfcMapConversion ignored: not part of IFC2X3".to_string()),
        (None, _) => {}
    }
    report
}

fn text_attr(inst: &EntityInstance, i: usize) -> Option<String> {
    inst.attr(i)
        .and_then(AttributeValue::as_text)
        .map(str::to_string)
}

fn number_attr(inst: &EntityInstance, i: usize) -> Option<f64> {
    inst.attr(i).and_then(AttributeValue::as_f64)
}

fn detect_address(
    graph: &InstanceGraph,
    site: Option<&EntityInstance>,
    diagnostics: &mut Vec<String>,
) -> Option<PostalAddress> {
    let on_site = site
        .and_then(|s| graph.follow(s, SITE_ADDRESS))
        .filter(|a| a.is("IFCPOSTALADDRESS"));
    let on_building = graph
        .instances_of("IFCBUILDING")
        .find_map(|b| graph.follow(b, BUILDING_ADDRESS))
        .filter(|a| a.is("IFCPOSTALADDRESS"));
    let (host, addr) = match (on_site, on_building) {
        (Some(s), Some(_)) => {
            diagnostics.push(
                "postal address on both IfcSite and IfcBuilding; the site address is reported"
                    .to_string(),
            );
            (AddressHost::Site, s)
        }
        (Some(s), None) => (AddressHost::Site, s),
        (None, Some(b)) => (AddressHost::Building, b),
        (None, None) => return None,
    };
    let address_lines = addr
        .attr(4)
        .and_then(AttributeValue::as_list)
        .map(|l| {
            l.iter()
                .filter_map(|v| v.as_text().map(str::to_string))
                .collect()
        })
        .unwrap_or_default();
    Some(PostalAddress {
        host,
        address_lines,
        town: text_attr(addr, 6),
        region: text_attr(addr, 7),
        postal_code: text_attr(addr, 8),
        country: text_attr(addr, 9),
    })
}

fn compound_attr(inst: &EntityInstance, i: usize) -> Option<Vec<i64>> {
    let list = inst.attr(i)?.as_list()?;
    list.iter().map(AttributeValue::as_i64).collect()
}

fn detect_lat_lon(site: &EntityInstance, diagnostics: &mut Vec<String>) -> Option<SiteLocation> {
    let lat = compound_attr(site, SITE_LATITUDE);
    let lon = compound_attr(site, SITE_LONGITUDE);
    let (lat, lon) = match (lat, lon) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => return None,
        _ => {
            diagnostics.push("IfcSite has only one of RefLatitude and RefLongitude".to_string());
            return None;
        }
    };
    let convert = |v: &[i64], what: &str, limit: f64, diagnostics: &mut Vec<String>| {
        match compound_angle_to_degrees(v) {
            Ok(d) if d.abs() <= limit => Some(d),
            Ok(d) => {
                diagnostics.push(format!("{what} {d} outside [-{limit}, {limit}]"));
                None
            }
            Err(e) => {
                diagnostics.push(format!("{what}: {e}"));
                None
            }
        }
    };
    let latitude = convert(&lat, "RefLatitude", 90.0, diagnostics);
    let longitude = convert(&lon, "RefLongitude", 180.0, diagnostics);
    Some(SiteLocation {
        latitude: latitude?,
        longitude: longitude?,
        elevation: number_attr(site, SITE_ELEVATION),
    })
}

fn coordinates(inst: &EntityInstance) -> Option<Vec<f64>> {
    inst.attr(0)?
        .as_list()?
        .iter()
        .map(AttributeValue::as_f64)
        .collect()
}

fn point3(graph: &InstanceGraph, id: u64) -> Option<[f64; 3]> {
    let inst = graph.resolve(id).ok()?;
    let c = coordinates(inst)?;
    match c.as_slice() {
        [x, y] => Some([*x, *y, 0.0]),
        [x, y, z] => Some([*x, *y, *z]),
        _ => None,
    }
}

fn optional_direction3(graph: &InstanceGraph, inst: &EntityInstance, i: usize) -> Option<[f64; 3]> {
    let id = inst.attr(i)?.as_reference()?;
    point3(graph, id)
}

struct Placement {
    location: [f64; 3],
    axis: Option<[f64; 3]>,
    ref_direction: Option<[f64; 3]>,
}

fn axis_placement(graph: &InstanceGraph, inst: &EntityInstance) -> Option<Placement> {
    let location = point3(graph, inst.attr(0)?.as_reference()?)?;
    let (axis, ref_direction) = if inst.is("IFCAXIS2PLACEMENT2D") {
        (None, optional_direction3(graph, inst, 1))
    } else {
        (
            optional_direction3(graph, inst, 1),
            optional_direction3(graph, inst, 2),
        )
    };
    Some(Placement {
        location,
        axis,
        ref_direction,
    })
}

fn is_origin(p: &[f64; 3]) -> bool {
    p.iter().all(|c| c.abs() <= ORIGIN_THRESHOLD)
}

fn detect_site_placement(
    graph: &InstanceGraph,
    site: &EntityInstance,
    unit: &str,
    diagnostics: &mut Vec<String>,
) -> Option<ReferencePoint> {
    let local = graph.follow(site, SITE_PLACEMENT)?;
    if !local.is("IFCLOCALPLACEMENT") {
        diagnostics.push(format!(
            "site placement #{} is not an IfcLocalPlacement",
            local.id
        ));
        return None;
    }
    if local.attr(0).is_some_and(|v| !v.is_unset()) {
        diagnostics.push("site placement is relative to another placement".to_string());
    }
    let Some(p) = graph
        .follow(local, 1)
        .and_then(|a| axis_placement(graph, a))
    else {
        diagnostics.push("site placement does not resolve to a Cartesian point".to_string());
        return None;
    };
    let explicit_axes = p.axis.is_some() || p.ref_direction.is_some();
    (!is_origin(&p.location) || explicit_axes).then(|| ReferencePoint {
        location: p.location,
        axis: p.axis,
        ref_direction: p.ref_direction,
        length_unit: unit.to_string(),
    })
}

fn model_context(graph: &InstanceGraph) -> Option<&EntityInstance> {
    let is_context = |i: &&EntityInstance| i.is("IFCGEOMETRICREPRESENTATIONCONTEXT");
    let from_project: Vec<&EntityInstance> = graph
        .instances_of("IFCPROJECT")
        .next()
        .and_then(|p| p.attr(PROJECT_CONTEXTS))
        .and_then(AttributeValue::as_list)
        .map(|l| {
            l.iter()
                .filter_map(|v| graph.resolve(v.as_reference()?).ok())
                .filter(is_context)
                .collect()
        })
        .unwrap_or_default();
    let candidates = if from_project.is_empty() {
        graph.instances().iter().filter(is_context).collect()
    } else {
        from_project
    };
    candidates
        .iter()
        .find(|c| text_attr(c, CONTEXT_TYPE).as_deref() == Some("Model"))
        .or(candidates.first())
        .copied()
}

fn detect_context(
    graph: &InstanceGraph,
    unit: &str,
    diagnostics: &mut Vec<String>,
) -> Option<WorldCoordinateSystem> {
    let ctx = model_context(graph)?;
    let Some(wcs) = graph
        .follow(ctx, CONTEXT_WCS)
        .and_then(|a| axis_placement(graph, a))
    else {
        diagnostics
            .push("representation context has no resolvable WorldCoordinateSystem".to_string());
        return None;
    };
    let true_north = graph
        .follow(ctx, CONTEXT_TRUE_NORTH)
        .and_then(coordinates)
        .and_then(|c| match c.as_slice() {
            [x, y, ..] => Some([*x, *y]),
            _ => None,
        });
    let identity = is_origin(&wcs.location)
        && wcs.axis.is_none_or(|a| same_direction(a, [0.0, 0.0, 1.0]))
        && wcs
            .ref_direction
            .is_none_or(|r| same_direction(r, [1.0, 0.0, 0.0]));
    (!identity || true_north.is_some()).then(|| WorldCoordinateSystem {
        origin: wcs.location,
        axis: wcs.axis,
        ref_direction: wcs.ref_direction,
        true_north,
        length_unit: unit.to_string(),
    })
}

fn same_direction(a: [f64; 3], b: [f64; 3]) -> bool {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    n > 0.0 && (0..3).all(|i| (a[i] / n - b[i]).abs() <= ORIGIN_THRESHOLD)
}

fn detect_map_conversion(
    graph: &InstanceGraph,
    diagnostics: &mut Vec<String>,
) -> Option<MapConversion> {
    let map = graph.instances_of("IFCMAPCONVERSION").next()?;
    let Some(crs) = graph.follow(map, 1).filter(|c| c.is("IFCPROJECTEDCRS")) else {
        diagnostics.push("IfcMapConversion without an IfcProjectedCRS target".to_string());
        return None;
    };
    let (Some(eastings), Some(northings), Some(orthogonal_height)) = (
        number_attr(map, 2),
        number_attr(map, 3),
        number_attr(map, 4),
    ) else {
        diagnostics.push("IfcMapConversion lacks eastings, northings or height".to_string());
        return None;
    };
    let x_axis_abscissa = number_attr(map, 5);
    let x_axis_ordinate = number_attr(map, 6);
    if x_axis_abscissa == Some(0.0) && x_axis_ordinate == Some(0.0) {
        diagnostics.push("IfcMapConversion rotation (0, 0) is undefined".to_string());
        return None;
    }
    Some(MapConversion {
        eastings,
        northings,
        orthogonal_height,
        x_axis_abscissa,
        x_axis_ordinate,
        scale: number_attr(map, 7),
        crs_name: text_attr(crs, 0).unwrap_or_default(),
    })
}

/// Name of the project's length unit, e.g. "METRE" or "MILLIMETRE".
pub fn length_unit_name(graph: &InstanceGraph, diagnostics: &mut Vec<String>) -> String {
    let assigned: Vec<&EntityInstance> = graph
        .instances_of("IFCPROJECT")
        .next()
        .and_then(|p| graph.follow(p, PROJECT_UNITS))
        .and_then(|ua| ua.attr(0))
        .and_then(AttributeValue::as_list)
        .map(|l| {
            l.iter()
                .filter_map(|v| graph.resolve(v.as_reference()?).ok())
                .collect()
        })
        .unwrap_or_default();
    // UnitType is attribute 1 for both SI and conversion-based units.
    let is_length =
        |u: &&&EntityInstance| u.attr(1).and_then(AttributeValue::as_enum) == Some("LENGTHUNIT");
    let unit = assigned.iter().find(is_length).copied();
    match unit {
        Some(u) if u.is("IFCSIUNIT") => {
            let prefix = u.attr(2).and_then(AttributeValue::as_enum).unwrap_or("");
            let name = u
                .attr(3)
                .and_then(AttributeValue::as_enum)
                .unwrap_or("METRE");
            format!("{prefix}{name}")
        }
        Some(u) => text_attr(u, 2).unwrap_or_else(|| "UNKNOWN".to_string()),
        None => {
            diagnostics.push("no length unit assigned; METRE assumed".to_string());
            "METRE".to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compound_angles() {
        assert_eq!(compound_angle_to_degrees(&[0, 0, 0]), Ok(0.0));
        assert_eq!(compound_angle_to_degrees(&[-52, -30, 0]), Ok(-52.5));
        assert_eq!(compound_angle_to_degrees(&[52, 30, 0, 0]), Ok(52.5));
        assert_eq!(compound_angle_to_degrees(&[0, -30, 0]), Ok(-0.5));
        assert_eq!(
            compound_angle_to_degrees(&[52, -30, 0]),
            Err(AngleError::MixedSign)
        );
        assert_eq!(
            compound_angle_to_degrees(&[52, 30]),
            Err(AngleError::BadLength(2))
        );
    }

    #[test]
    fn level_names() {
        assert_eq!(LoGeoRefLevel::L30.to_string(), "LoGeoRef30");
        assert_eq!(
            serde_json::to_string(&LoGeoRefLevel::L50).unwrap(),
            "\"LoGeoRef50\""
        );
    }

    #[test]
    fn missing_site_is_a_diagnostic() {
        let src = "ISO-10303-21;HEADER;FILE_DESCRIPTION((''),'2;1');FILE_NAME('','',(''),(''),'','','');FILE_SCHEMA(('IFC4'));ENDSEC;DATA;#1=IFCBUILDING($,$,'B',$,$,$,$,$,$,$,$,$);ENDSEC;END-ISO-10303-21;";
        let g = crate::spf::parse_spf(src.as_bytes()).unwrap();
        let r = detect_georef(&g, SchemaVersion::Ifc4);
        assert!(r.detected.is_empty());
        assert!(r.diagnostics.iter().any(|d| d.contains("no IfcSite")));
    }
}
