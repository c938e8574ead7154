use std::collections::BTreeMap;
use std::f64::consts::PI;

use ifcaudit::geomcheck::boolean::{cells_to_mesh, combine, BoolOp, Region};
use ifcaudit::geomcheck::{
    evaluate, evaluate_or_hidden, suite_entries, Aabb, EvalOptions, TriMesh,
};
use ifcaudit::geomgen::{dims, generate_geometry_suite, SuiteConfig};
use ifcaudit::schema::SchemaVersion;
use ifcaudit::spf::InstanceGraph;
use nalgebra::{Point3, Vector3};
use proptest::prelude::*;

fn suite() -> (InstanceGraph, BTreeMap<String, u64>) {
    let (graph, _) =
        generate_geometry_suite(SchemaVersion::Ifc2x3, &SuiteConfig::default()).unwrap();
    let roots = suite_entries(&graph)
        .unwrap()
        .into_iter()
        .map(|e| (e.description.unwrap(), e.root))
        .collect();
    (graph, roots)
}

fn at(segments: usize) -> EvalOptions {
    EvalOptions {
        segments,
        ..EvalOptions::default()
    }
}

/// Moller-Trumbore crossing count along a slightly skewed ray.
fn inside(mesh: &TriMesh, p: Point3<f64>) -> bool {
    let dir = Vector3::new(1.0, 0.000_123_7, 0.000_271_3);
    let mut hits = 0;
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
        let (e1, e2) = (b - a, c - a);
        let h = dir.cross(&e2);
        let det = e1.dot(&h);
        if det.abs() < 1e-14 {
            continue;
        }
        let s = p - a;
        let u = s.dot(&h) / det;
        let q = s.cross(&e1);
        let v = dir.dot(&q) / det;
        if u < 0.0 || v < 0.0 || u + v > 1.0 {
            continue;
        }
        if e2.dot(&q) / det > 0.0 {
            hits += 1;
        }
    }
    hits % 2 == 1
}

/// Voxel-centre volume estimate with step `h`.
fn voxel_volume(mesh: &TriMesh, h: f64) -> f64 {
    let bb = mesh.bbox().unwrap();
    let n: Vec<usize> = (0..3)
        .map(|k| ((bb.max[k] - bb.min[k]) / h).ceil() as usize)
        .collect();
    let mut count = 0u64;
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                let p = Point3::new(
                    bb.min[0] + (i as f64 + 0.5) * h,
                    bb.min[1] + (j as f64 + 0.5) * h,
                    bb.min[2] + (k as f64 + 0.5) * h,
                );
                count += u64::from(inside(mesh, p));
            }
        }
    }
    count as f64 * h.powi(3)
}

#[test]
fn divergence_volume_agrees_with_voxels() {
    let (graph, roots) = suite();
    for (slot, root) in &roots {
        let out = evaluate_or_hidden(&graph, *root, &at(16)).unwrap();
        let Some(mesh) = out.mesh.filter(TriMesh::is_closed) else {
            continue;
        };
        let bb = mesh.bbox().unwrap();
        let h = (bb.volume() / 6000.0).cbrt();
        let estimate = voxel_volume(&mesh, h);
        // Every misclassified voxel centre lies within h of the surface.
        let bound = mesh.surface_area() * h * 3f64.sqrt();
        assert!(
            (estimate - mesh.volume()).abs() <= bound,
            "{slot}: voxels {estimate}, mesh {}, bound {bound}",
            mesh.volume()
        );
    }
}

fn i_shape_area() -> f64 {
    let (w, d, tw, tf, r) = (
        dims::I_WIDTH,
        dims::I_DEPTH,
        dims::I_WEB,
        dims::I_FLANGE,
        dims::I_FILLET,
    );
    2.0 * w * tf + (d - 2.0 * tf) * tw + 4.0 * (r * r - PI * r * r / 4.0)
}

#[test]
fn refinement_never_increases_error() {
    let (graph, roots) = suite();
    let ellipse = PI * dims::ELLIPSE_A * dims::ELLIPSE_B;
    let r = dims::REVOLUTION_OFFSET;
    let cases = [
        ("C3", ellipse * dims::DEPTH),
        ("D1", ellipse * dims::DEPTH * 0.8),
        ("D2", i_shape_area() * dims::DEPTH),
        ("E5", 2.0 * PI * r * dims::RECT * dims::RECT),
        ("F1", 2.0 * PI * r * ellipse),
        ("F2", 2.0 * PI * r * i_shape_area()),
        (
            "F4",
            PI * dims::DISK_RADIUS.powi(2) * dims::DIRECTRIX_LENGTH,
        ),
    ];
    for (slot, exact) in cases {
        let errors: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&s| {
                let v = evaluate(&graph, roots[slot], &at(s))
                    .unwrap()
                    .volume()
                    .unwrap();
                ((v - exact) / exact).abs()
            })
            .collect();
        assert!(errors[0] < 0.02, "{slot}: {errors:?}");
        assert!(
            errors[1] <= errors[0] && errors[2] <= errors[1],
            "{slot}: {errors:?}"
        );
    }
}

#[test]
fn crane_rail_prism_volume() {
    // Section area from the trapezoids between the declared breakpoints.
    let (graph, roots) = suite();
    let v = evaluate(&graph, roots["E1"], &at(64))
        .unwrap()
        .volume()
        .unwrap();
    assert!((v - 0.38 * dims::DEPTH).abs() < 1e-9, "{v}");
}

fn boxes() -> impl Strategy<Value = Aabb> {
    (
        prop::array::uniform3(-2i32..2),
        prop::array::uniform3(1i32..4),
    )
        .prop_map(|(o, s)| {
            // Quarter-unit lattice keeps the oracle exact.
            let min = o.map(|v| f64::from(v) / 4.0);
            let max = [0, 1, 2].map(|k| min[k] + f64::from(s[k]) / 4.0);
            Aabb::new(min, max)
        })
}

fn overlap(a: &Aabb, b: &Aabb) -> f64 {
    (0..3)
        .map(|k| (a.max[k].min(b.max[k]) - a.min[k].max(b.min[k])).max(0.0))
        .product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn box_booleans_match_inclusion_exclusion(a in boxes(), b in boxes()) {
        let i = overlap(&a, &b);
        let (va, vb) = (a.volume(), b.volume());
        for (op, expected) in [(BoolOp::Union, va + vb - i), (BoolOp::Intersection, i), (BoolOp::Difference, va - i)] {
            let cells = combine(op, &Region::Boxes(vec![a]), &Region::Boxes(vec![b])).unwrap();
            let cell_volume: f64 = cells.iter().map(Aabb::volume).sum();
            prop_assert!((cell_volume - expected).abs() < 1e-12);
            let mesh = cells_to_mesh(&cells, 1e-9);
            prop_assert!((mesh.volume() - expected).abs() < 1e-9, "{:?}: {} vs {}", op, mesh.volume(), expected);
            if expected > 0.0 {
                prop_assert!(mesh.is_closed());
            }
        }
    }
}
