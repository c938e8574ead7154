//! Project, site, building and storey scaffolding shared by every generated
//! file, with optional georeferencing content.

use chrono::{DateTime, Utc};

use super::guid::GuidGen;
use crate::schema::SchemaVersion;
use crate::spf::{AttributeValue as V, FileName, GraphBuilder, InstanceGraph, SpfHeader};

#[derive(Debug, Clone, PartialEq)]
pub struct AddressSpec {
    pub on_building: bool,
    pub lines: Vec<String>,
    pub town: String,
    pub region: String,
    pub postal_code: String,
    pub country: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapConversionSpec {
    pub eastings: f64,
    pub northings: f64,
    pub orthogonal_height: f64,
    pub x_axis_abscissa: f64,
    pub x_axis_ordinate: f64,
    pub scale: Option<f64>,
    pub crs_name: String,
}

/// Georeferencing content written into the spine. The default is a model
/// at the local origin with no location information.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeorefSpec {
    pub address: Option<AddressSpec>,
    /// Compound latitude, longitude and optional elevation.
    pub lat_lon: Option<(Vec<i64>, Vec<i64>, Option<f64>)>,
    pub site_origin: [f64; 3],
    /// Explicit (axis, ref_direction) on the site placement.
    pub site_axes: Option<([f64; 3], [f64; 3])>,
    pub wcs_origin: [f64; 3],
    pub true_north: Option<[f64; 2]>,
    pub map_conversion: Option<MapConversionSpec>,
    /// SI prefix of the length unit, e.g. "MILLI".
    pub length_prefix: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpineConfig {
    pub schema: SchemaVersion,
    pub precision: f64,
    pub timestamp: DateTime<Utc>,
    pub file_name: String,
    pub project_name: String,
}

impl SpineConfig {
    pub fn new(schema: SchemaVersion) -> Self {
        Self {
            schema,
            precision: 1e-5,
            timestamp: super::default_timestamp(),
            file_name: "model.ifc".to_string(),
            project_name: "Project".to_string(),
        }
    }
}

pub struct Spine {
    pub builder: GraphBuilder,
    pub schema: SchemaVersion,
    pub owner_history: u64,
    pub context: u64,
    pub storey_placement: u64,
    storey: u64,
    guids: GuidGen,
    contained: Vec<u64>,
}

fn point(b: &mut GraphBuilder, c: [f64; 3]) -> u64 {
    b.add("IFCCARTESIANPOINT", vec![V::reals(&c)])
}

fn direction(b: &mut GraphBuilder, c: &[f64]) -> u64 {
    b.add("IFCDIRECTION", vec![V::reals(c)])
}

fn placement3(b: &mut GraphBuilder, origin: [f64; 3], axes: Option<([f64; 3], [f64; 3])>) -> u64 {
    let p = point(b, origin);
    let (axis, refd) = match axes {
        Some((a, r)) => (
            V::Reference(direction(b, &a)),
            V::Reference(direction(b, &r)),
        ),
        None => (V::Unset, V::Unset),
    };
    b.add("IFCAXIS2PLACEMENT3D", vec![V::Reference(p), axis, refd])
}

fn text_or_unset(s: &str) -> V {
    if s.is_empty() {
        V::Unset
    } else {
        V::text(s)
    }
}

impl Spine {
    pub fn new(config: &SpineConfig, georef: &GeorefSpec) -> Self {
        let header = SpfHeader {
            file_name: FileName {
                name: config.file_name.clone(),
                time_stamp: config.timestamp.format("%Y-%m-%dT%H:%M:%S").to_string(),
                author: vec!["ifcaudit".to_string()],
                organization: vec![String::new()],
                preprocessor_version: format!("ifcaudit {}", env!("CARGO_PKG_VERSION")),
                originating_system: "ifcaudit".to_string(),
                authorization: String::new(),
            },
            file_schema: vec![config.schema.as_str().to_string()],
            ..SpfHeader::default()
        };
        let mut b = GraphBuilder::new(header);
        let seed = match config.schema {
            SchemaVersion::Ifc2x3 => 0x2_0003,
            SchemaVersion::Ifc4 => 0x4_0000,
        };
        let mut guids = GuidGen::new(seed);
        let mut guid = || V::text(&guids.next_guid());

        let person = b.add(
            "IFCPERSON",
            vec![
                V::Unset,
                V::text("Auditor"),
                V::Unset,
                V::Unset,
                V::Unset,
                V::Unset,
                V::Unset,
                V::Unset,
            ],
        );
        let org = b.add(
            "IFCORGANIZATION",
            vec![V::Unset, V::text("ifcaudit"), V::Unset, V::Unset, V::Unset],
        );
        let pao = b.add(
            "IFCPERSONANDORGANIZATION",
            vec![V::Reference(person), V::Reference(org), V::Unset],
        );
        let app = b.add(
            "IFCAPPLICATION",
            vec![
                V::Reference(org),
                V::text(env!("CARGO_PKG_VERSION")),
                V::text("ifcaudit"),
                V::text("ifcaudit"),
            ],
        );
        let owner_history = b.add(
            "IFCOWNERHISTORY",
            vec![
                V::Reference(pao),
                V::Reference(app),
                V::Unset,
                V::enumeration("ADDED"),
                V::Unset,
                V::Unset,
                V::Unset,
                V::Integer(config.timestamp.timestamp()),
            ],
        );
        let oh = V::Reference(owner_history);

        let length_prefix = georef
            .length_prefix
            .as_deref()
            .map_or(V::Unset, V::enumeration);
        let length = b.add(
            "IFCSIUNIT",
            vec![
                V::Derived,
                V::enumeration("LENGTHUNIT"),
                length_prefix,
                V::enumeration("METRE"),
            ],
        );
        let angle = b.add(
            "IFCSIUNIT",
            vec![
                V::Derived,
                V::enumeration("PLANEANGLEUNIT"),
                V::Unset,
                V::enumeration("RADIAN"),
            ],
        );
        let units = b.add("IFCUNITASSIGNMENT", vec![V::refs(&[length, angle])]);

        let wcs = placement3(&mut b, georef.wcs_origin, None);
        let north = georef
            .true_north
            .map_or(V::Unset, |n| V::Reference(direction(&mut b, &n)));
        let context = b.add(
            "IFCGEOMETRICREPRESENTATIONCONTEXT",
            vec![
                V::Unset,
                V::text("Model"),
                V::Integer(3),
                V::real(config.precision),
                V::Reference(wcs),
                north,
            ],
        );
        let project = b.add(
            "IFCPROJECT",
            vec![
                guid(),
                oh.clone(),
                V::text(&config.project_name),
                V::Unset,
                V::Unset,
                V::Unset,
                V::Unset,
                V::refs(&[context]),
                V::Reference(units),
            ],
        );

        let site_axis = placement3(&mut b, georef.site_origin, georef.site_axes);
        let site_placement = b.add("IFCLOCALPLACEMENT", vec![V::Unset, V::Reference(site_axis)]);
        let address = georef.address.as_ref().map(|a| {
            let id = b.add(
                "IFCPOSTALADDRESS",
                vec![
                    V::Unset,
                    V::Unset,
                    V::Unset,
                    V::Unset,
                    V::List(a.lines.iter().map(|l| V::text(l)).collect()),
                    V::Unset,
                    text_or_unset(&a.town),
                    text_or_unset(&a.region),
                    text_or_unset(&a.postal_code),
                    text_or_unset(&a.country),
                ],
            );
            (a.on_building, id)
        });
        let compound = |v: &[i64]| V::List(v.iter().map(|&c| V::Integer(c)).collect());
        let (lat, lon, elev) = match &georef.lat_lon {
            Some((lat, lon, elev)) => {
                (compound(lat), compound(lon), elev.map_or(V::Unset, V::real))
            }
            None => (V::Unset, V::Unset, V::Unset),
        };
        let site_address = match address {
            Some((false, id)) => V::Reference(id),
            _ => V::Unset,
        };
        let site = b.add(
            "IFCSITE",
            vec![
                guid(),
                oh.clone(),
                V::text("Site"),
                V::Unset,
                V::Unset,
                V::Reference(site_placement),
                V::Unset,
                V::Unset,
                V::enumeration("ELEMENT"),
                lat,
                lon,
                elev,
                V::Unset,
                site_address,
            ],
        );

        let building_axis = placement3(&mut b, [0.0; 3], None);
        let building_placement = b.add(
            "IFCLOCALPLACEMENT",
            vec![V::Reference(site_placement), V::Reference(building_axis)],
        );
        let building_address = match address {
            Some((true, id)) => V::Reference(id),
            _ => V::Unset,
        };
        let building = b.add(
            "IFCBUILDING",
            vec![
                guid(),
                oh.clone(),
                V::text("Building"),
                V::Unset,
                V::Unset,
                V::Reference(building_placement),
                V::Unset,
                V::Unset,
                V::enumeration("ELEMENT"),
                V::Unset,
                V::Unset,
                building_address,
            ],
        );
        let storey_axis = placement3(&mut b, [0.0; 3], None);
        let storey_placement = b.add(
            "IFCLOCALPLACEMENT",
            vec![V::Reference(building_placement), V::Reference(storey_axis)],
        );
        let storey = b.add(
            "IFCBUILDINGSTOREY",
            vec![
                guid(),
                oh.clone(),
                V::text("Storey"),
                V::Unset,
                V::Unset,
                V::Reference(storey_placement),
                V::Unset,
                V::Unset,
                V::enumeration("ELEMENT"),
                V::real(0.0),
            ],
        );
        for (parent, child) in [(project, site), (site, building), (building, storey)] {
            b.add(
                "IFCRELAGGREGATES",
                vec![
                    guid(),
                    oh.clone(),
                    V::Unset,
                    V::Unset,
                    V::Reference(parent),
                    V::refs(&[child]),
                ],
            );
        }

        if let Some(m) = &georef.map_conversion {
            let crs = b.add(
                "IFCPROJECTEDCRS",
                vec![
                    V::text(&m.crs_name),
                    V::Unset,
                    V::Unset,
                    V::Unset,
                    V::Unset,
                    V::Unset,
                    V::Unset,
                ],
            );
            b.add(
                "IFCMAPCONVERSION",
                vec![
                    V::Reference(context),
                    V::Reference(crs),
                    V::real(m.eastings),
                    V::real(m.northings),
                    V::real(m.orthogonal_height),
                    V::real(m.x_axis_abscissa),
                    V::real(m.x_axis_ordinate),
                    m.scale.map_or(V::Unset, V::real),
                ],
            );
        }

        Self {
            builder: b,
            schema: config.schema,
            owner_history,
            context,
            storey_placement,
            storey,
            guids,
            contained: Vec::new(),
        }
    }

    pub fn guid(&mut self) -> V {
        V::text(&self.guids.next_guid())
    }

    /// Adds a proxy at `origin` relative to the storey, carrying one body
    /// representation item.
    pub fn add_proxy(
        &mut self,
        name: &str,
        description: &str,
        origin: [f64; 3],
        representation_type: &str,
        item: u64,
    ) -> u64 {
        let guid = self.guid();
        let b = &mut self.builder;
        let axis = placement3(b, origin, None);
        let placement = b.add(
            "IFCLOCALPLACEMENT",
            vec![V::Reference(self.storey_placement), V::Reference(axis)],
        );
        let rep = b.add(
            "IFCSHAPEREPRESENTATION",
            vec![
                V::Reference(self.context),
                V::text("Body"),
                V::text(representation_type),
                V::refs(&[item]),
            ],
        );
        let shape = b.add(
            "IFCPRODUCTDEFINITIONSHAPE",
            vec![V::Unset, V::Unset, V::refs(&[rep])],
        );
        let last = match self.schema {
            SchemaVersion::Ifc2x3 => V::Unset,
            SchemaVersion::Ifc4 => V::enumeration("NOTDEFINED"),
        };
        let proxy = b.add(
            "IFCBUILDINGELEMENTPROXY",
            vec![
                guid,
                V::Reference(self.owner_history),
                V::text(name),
                V::text(description),
                V::Unset,
                V::Reference(placement),
                V::Reference(shape),
                V::Unset,
                last,
            ],
        );
        self.contained.push(proxy);
        proxy
    }

    pub fn finish(mut self) -> InstanceGraph {
        if !self.contained.is_empty() {
            let guid = self.guid();
            self.builder.add(
                "IFCRELCONTAINEDINSPATIALSTRUCTURE",
                vec![
                    guid,
                    V::Reference(self.owner_history),
                    V::Unset,
                    V::Unset,
                    V::refs(&self.contained),
                    V::Reference(self.storey),
                ],
            );
        }
        self.builder.build()
    }
}

/// A spine-only model carrying the given georeferencing content.
pub fn georef_fixture(config: &SpineConfig, georef: &GeorefSpec) -> InstanceGraph {
    Spine::new(config, georef).finish()
}
