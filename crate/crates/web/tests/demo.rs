use ifcaudit_web::{agreement, mesh, overview, suite_file, tessellation};
use serde_json::Value;

#[test]
fn overview_lists_every_item() {
    let v: Vec<Value> = serde_json::from_str(&overview("ifc4").unwrap()).unwrap();
    assert_eq!(v.len(), 23);
    let invalid = v.iter().filter(|r| r["valid"] == false).count();
    assert_eq!(invalid, 5);
    assert!(overview("ifc5").is_err());
}

#[test]
fn tessellation_rows_grow() {
    let v: Vec<Value> = serde_json::from_str(&tessellation("ifc2x3", "C3").unwrap()).unwrap();
    let tris: Vec<u64> = v.iter().map(|r| r["triangles"].as_u64().unwrap()).collect();
    assert!(tris.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(v[0]["smooth"], false);
    assert_eq!(v[5]["smooth"], true);
}

#[test]
fn mesh_is_triangle_soup() {
    let m = mesh("ifc2x3", "B2", 64).unwrap();
    assert_eq!(m.len() % 9, 0);
    assert_eq!(m.len() / 9, 12);
    assert!(mesh("ifc2x3", "B4", 64).unwrap().is_empty());
    assert!(mesh("ifc2x3", "Z9", 64).is_err());
}

#[test]
fn agreement_examples() {
    let v: Value = serde_json::from_str(&agreement("a, a, b\nbox,box,box").unwrap()).unwrap();
    assert!((v["questions"][0]["score"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!((v["consistency"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!(agreement("single").is_err());
}

#[test]
fn suite_file_is_spf() {
    let text = suite_file("ifc2x3").unwrap();
    assert!(text.starts_with("ISO-10303-21;"));
}
