use ifcaudit::geomgen::{georef_fixture, AddressSpec, GeorefSpec, SpineConfig};
use ifcaudit::georef::{detect_georef, AddressHost, GeoParams, LoGeoRefLevel as L};
use ifcaudit::schema::SchemaVersion;
use ifcaudit::spf::{parse_spf, write_spf, InstanceGraph};

fn fixture(schema: SchemaVersion, spec: &GeorefSpec) -> InstanceGraph {
    parse_spf(&write_spf(&georef_fixture(&SpineConfig::new(schema), spec))).unwrap()
}

fn address(on_building: bool) -> AddressSpec {
    AddressSpec {
        on_building,
        lines: vec!["Main Street 1".into(), "Unit 4".into()],
        town: "Gavle".into(),
        region: String::new(),
        postal_code: "80176".into(),
        country: "Sweden".into(),
    }
}

#[test]
fn bare_spine_has_no_levels() {
    for schema in SchemaVersion::ALL {
        let r = detect_georef(&fixture(schema, &GeorefSpec::default()), schema);
        assert!(r.levels().is_empty(), "{schema}: {:?}", r.levels());
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    }
}

#[test]
fn building_address_is_reported_with_its_host() {
    let spec = GeorefSpec {
        address: Some(address(true)),
        ..Default::default()
    };
    let r = detect_georef(
        &fixture(SchemaVersion::Ifc2x3, &spec),
        SchemaVersion::Ifc2x3,
    );
    let GeoParams::Address(a) = &r.detected[&L::L10] else {
        panic!("{r:?}")
    };
    assert_eq!(a.host, AddressHost::Building);
    assert_eq!(a.address_lines, ["Main Street 1", "Unit 4"]);
    assert_eq!(a.region, None);
}

#[test]
fn out_of_range_latitude_is_a_diagnostic() {
    let spec = GeorefSpec {
        lat_lon: Some((vec![95, 0, 0], vec![10, 0, 0], None)),
        ..Default::default()
    };
    let r = detect_georef(
        &fixture(SchemaVersion::Ifc2x3, &spec),
        SchemaVersion::Ifc2x3,
    );
    assert!(!r.has(L::L20));
    assert!(
        r.diagnostics.iter().any(|d| d.contains("RefLatitude")),
        "{:?}",
        r.diagnostics
    );
}

#[test]
fn mixed_sign_angle_is_a_diagnostic() {
    let spec = GeorefSpec {
        lat_lon: Some((vec![-52, 10, 0], vec![4, 0, 0], None)),
        ..Default::default()
    };
    let r = detect_georef(
        &fixture(SchemaVersion::Ifc2x3, &spec),
        SchemaVersion::Ifc2x3,
    );
    assert!(!r.has(L::L20));
    assert!(r.diagnostics.iter().any(|d| d.contains("mixed signs")));
}

#[test]
fn site_axes_alone_give_level_30() {
    let spec = GeorefSpec {
        site_axes: Some(([0.0, 0.0, 1.0], [0.0, 1.0, 0.0])),
        length_prefix: Some("MILLI".into()),
        ..Default::default()
    };
    let r = detect_georef(&fixture(SchemaVersion::Ifc4, &spec), SchemaVersion::Ifc4);
    assert_eq!(r.levels(), [L::L30]);
    let GeoParams::Placement(p) = &r.detected[&L::L30] else {
        panic!()
    };
    assert_eq!(p.ref_direction, Some([0.0, 1.0, 0.0]));
    assert_eq!(p.length_unit, "MILLIMETRE");
}

#[test]
fn shifted_world_origin_gives_level_40() {
    let spec = GeorefSpec {
        wcs_origin: [1000.0, 2000.0, 0.0],
        ..Default::default()
    };
    let r = detect_georef(
        &fixture(SchemaVersion::Ifc2x3, &spec),
        SchemaVersion::Ifc2x3,
    );
    assert_eq!(r.levels(), [L::L40]);
    let json = r.to_json();
    assert_eq!(json["levels"][0], "LoGeoRef40");
    assert_eq!(json["params"]["LoGeoRef40"]["origin"][1], 2000.0);
}

#[test]
fn levels_combine() {
    let spec = GeorefSpec {
        address: Some(address(false)),
        lat_lon: Some((vec![60, 40, 30], vec![17, 8, 0, 250_000], Some(12.0))),
        site_origin: [5.0, 0.0, 0.0],
        true_north: Some([0.0, 1.0]),
        ..Default::default()
    };
    let r = detect_georef(
        &fixture(SchemaVersion::Ifc2x3, &spec),
        SchemaVersion::Ifc2x3,
    );
    assert_eq!(r.levels(), [L::L10, L::L20, L::L30, L::L40]);
}
