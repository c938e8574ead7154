use std::collections::BTreeMap;
use std::f64::consts::PI;

use ifcaudit::geomcheck::{
    check_validity, evaluate, evaluate_or_hidden, suite_entries, EvalOptions, EvalWarning, Reason,
    ZRelation,
};
use ifcaudit::geomgen::{generate_geometry_suite, SuiteConfig};
use ifcaudit::schema::SchemaVersion;
use ifcaudit::spf::InstanceGraph;

fn suite(schema: SchemaVersion) -> (InstanceGraph, BTreeMap<String, u64>) {
    let (graph, _) = generate_geometry_suite(schema, &SuiteConfig::default()).unwrap();
    let roots = suite_entries(&graph)
        .unwrap()
        .into_iter()
        .map(|e| (e.description.unwrap(), e.root))
        .collect();
    (graph, roots)
}

fn local(segments: usize) -> EvalOptions {
    EvalOptions {
        segments,
        ..EvalOptions::default()
    }
}

#[test]
fn validity_matches_manifest() {
    for schema in SchemaVersion::ALL {
        let (graph, manifest) = generate_geometry_suite(schema, &SuiteConfig::default()).unwrap();
        let entries = suite_entries(&graph).unwrap();
        assert_eq!(entries.len(), manifest.items.len());
        for (entry, item) in entries.iter().zip(&manifest.items) {
            assert_eq!(
                entry.description.as_deref(),
                Some(item.slot.to_string().as_str())
            );
            let verdict = check_validity(&graph, entry.root, manifest.precision).unwrap();
            assert_eq!(verdict, item.expected_validity, "{}", item.slot);
        }
    }
}

#[test]
fn polyhedral_volumes() {
    let (graph, roots) = suite(SchemaVersion::Ifc2x3);
    let expect = [
        ("A1", 0.5),
        ("A2", 0.5),
        ("A3", 1.5),
        ("A4", 0.5),
        ("B1", 1.0),
        ("B2", 2.0),
        ("B3", 2.0),
        ("B5", 2.0),
    ];
    for (slot, v) in expect {
        let out = evaluate(&graph, roots[slot], &local(64)).unwrap();
        assert!(
            (out.volume().unwrap() - v).abs() < 1e-9,
            "{slot}: {:?}",
            out.volume()
        );
    }
    let a5 = evaluate(&graph, roots["A5"], &local(64)).unwrap();
    assert!((a5.area().unwrap() - 6.0).abs() < 1e-9);
}

#[test]
fn slanted_prism_keeps_base_times_height() {
    let (graph, roots) = suite(SchemaVersion::Ifc2x3);
    let out = evaluate(&graph, roots["C2"], &local(64)).unwrap();
    // Depth 2 along (0, 0.6, 0.8): height 1.6 over a unit base.
    assert!((out.volume().unwrap() - 1.6).abs() < 1e-9);
}

#[test]
fn negative_depth_lies_below_zero() {
    let (graph, roots) = suite(SchemaVersion::Ifc2x3);
    let b2 = evaluate(&graph, roots["B2"], &local(64)).unwrap();
    let b3 = evaluate(&graph, roots["B3"], &local(64)).unwrap();
    assert_eq!(b2.z_relation, Some(ZRelation::AboveZ0));
    assert_eq!(b3.z_relation, Some(ZRelation::BelowZ0));
    assert!(b3.warnings.contains(&EvalWarning::NegativeDepth));
}

#[test]
fn non_normalized_twin_matches_nominal() {
    let (graph, roots) = suite(SchemaVersion::Ifc2x3);
    for (nominal, twin) in [("B2", "B5"), ("C3", "C4"), ("D2", "D3"), ("E1", "E2")] {
        let a = evaluate(&graph, roots[nominal], &local(64)).unwrap();
        let b = evaluate(&graph, roots[twin], &local(64)).unwrap();
        assert!(b.warnings.contains(&EvalWarning::NonNormalizedDirection));
        let (ma, mb) = (a.mesh.unwrap(), b.mesh.unwrap());
        assert_eq!(ma.vertices.len(), mb.vertices.len());
        for (p, q) in ma.vertices.iter().zip(&mb.vertices) {
            assert!((p - q).norm() < 1e-9, "{twin}");
        }
    }
}

#[test]
fn hidden_items() {
    let (graph, roots) = suite(SchemaVersion::Ifc2x3);
    for slot in ["B4", "C1", "C5", "D4", "E3"] {
        let out = evaluate_or_hidden(&graph, roots[slot], &local(64)).unwrap();
        assert!(!out.displayed, "{slot}");
        assert!(out.mesh.is_none());
    }
}

#[test]
fn curved_volumes_within_two_percent() {
    let (graph, roots) = suite(SchemaVersion::Ifc2x3);
    let ellipse = PI * 1.0 * 0.5;
    let expect = [
        ("C3", ellipse * 2.0),
        ("F4", PI * 0.25 * 0.25 * 3.0),
        ("E5", 2.0 * PI * 2.0 * 1.0),
        ("F1", 2.0 * PI * 2.0 * ellipse),
    ];
    for (slot, v) in expect {
        let got = evaluate(&graph, roots[slot], &local(64))
            .unwrap()
            .volume()
            .unwrap();
        assert!(((got - v) / v).abs() < 0.02, "{slot}: {got} vs {v}");
    }
}

#[test]
fn swept_disk_clamps_parameters() {
    let (graph, roots) = suite(SchemaVersion::Ifc2x3);
    let f4 = evaluate(&graph, roots["F4"], &local(64)).unwrap();
    let f5 = evaluate(&graph, roots["F5"], &local(64)).unwrap();
    assert!(f5.warnings.contains(&EvalWarning::ClampedParameters));
    assert!((f4.volume().unwrap() - f5.volume().unwrap()).abs() < 1e-9);
    let v = check_validity(&graph, roots["F5"], 1e-5).unwrap();
    assert!(v.reasons.contains(&Reason::ParamRange));
}

#[test]
fn every_displayable_item_is_closed_and_positive() {
    let (graph, roots) = suite(SchemaVersion::Ifc2x3);
    for (slot, root) in &roots {
        let out = evaluate_or_hidden(&graph, *root, &local(64)).unwrap();
        if let Some(mesh) = &out.mesh {
            if slot != "A5" {
                assert!(mesh.is_closed(), "{slot}");
                assert!(mesh.signed_volume() > 0.0, "{slot}");
            }
        }
    }
}
