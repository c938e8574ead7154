//! Booleans over unions of axis-aligned boxes, clipped optionally by
//! axis-aligned half-spaces. Exact for the configurations the suite uses.

use nalgebra::Point3;
use serde::Serialize;

use super::mesh::{Aabb, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoolOp {
    Union,
    Intersection,
    Difference,
}

impl BoolOp {
    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "UNION" => Some(Self::Union),
            "INTERSECTION" => Some(Self::Intersection),
            "DIFFERENCE" => Some(Self::Difference),
            _ => None,
        }
    }

    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Self::Union => a || b,
            Self::Intersection => a && b,
            Self::Difference => a && !b,
        }
    }
}

/// Points with `coordinate[axis] <= offset` (or `>=` when `below` is
/// false).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisHalfSpace {
    pub axis: usize,
    pub offset: f64,
    pub below: bool,
}

impl AxisHalfSpace {
    fn contains(&self, p: [f64; 3]) -> bool {
        if self.below {
            p[self.axis] <= self.offset
        } else {
            p[self.axis] >= self.offset
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Union of boxes; may overlap.
    Boxes(Vec<Aabb>),
    HalfSpace(AxisHalfSpace),
}

impl Region {
    fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            Self::Boxes(b) => b.iter().any(|b| b.contains(p)),
            Self::HalfSpace(h) => h.contains(p),
        }
    }

    fn breakpoints(&self, axis: usize, out: &mut Vec<f64>) {
        match self {
            Self::Boxes(b) => {
                for b in b {
                    out.push(b.min[axis]);
                    out.push(b.max[axis]);
                }
            }
            Self::HalfSpace(h) if h.axis == axis => out.push(h.offset),
            Self::HalfSpace(_) => {}
        }
    }
}

/// `a op b` as a set of disjoint grid cells. Unbounded results (union with a
/// half-space) return `None`.
pub fn combine(op: BoolOp, a: &Region, b: &Region) -> Option<Vec<Aabb>> {
    let bounded = |r: &Region| matches!(r, Region::Boxes(_));
    let extent_from: Vec<&Region> = match op {
        BoolOp::Union if bounded(a) && bounded(b) => vec![a, b],
        BoolOp::Union => return None,
        BoolOp::Intersection if bounded(a) => vec![a],
        BoolOp::Intersection if bounded(b) => vec![b],
        BoolOp::Intersection => return None,
        BoolOp::Difference if bounded(a) => vec![a],
        BoolOp::Difference => return None,
    };
    let mut lines: [Vec<f64>; 3] = Default::default();
    for (axis, line) in lines.iter_mut().enumerate() {
        for r in &extent_from {
            r.breakpoints(axis, line);
        }
        let (lo, hi) = line
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                (l.min(v), h.max(v))
            });
        for r in [a, b] {
            r.breakpoints(axis, line);
        }
        line.retain(|&v| v >= lo && v <= hi);
        line.sort_by(f64::total_cmp);
        line.dedup();
    }
    let mut cells = Vec::new();
    for i in 0..lines[0].len().saturating_sub(1) {
        for j in 0..lines[1].len().saturating_sub(1) {
            for k in 0..lines[2].len().saturating_sub(1) {
                let cell = Aabb::new(
                    [lines[0][i], lines[1][j], lines[2][k]],
                    [lines[0][i + 1], lines[1][j + 1], lines[2][k + 1]],
                );
                let c = cell.center();
                if op.apply(a.contains(c), b.contains(c)) {
                    cells.push(cell);
                }
            }
        }
    }
    Some(cells)
}

/// Boundary of a union of disjoint grid cells: faces not shared by two
/// cells, oriented outward and welded.
pub fn cells_to_mesh(cells: &[Aabb], tolerance: f64) -> TriMesh {
    let mut mesh = TriMesh::default();
    for (ci, c) in cells.iter().enumerate() {
        for axis in 0..3 {
            for upper in [false, true] {
                let plane = if upper { c.max[axis] } else { c.min[axis] };
                let shared = cells.iter().enumerate().any(|(oi, o)| {
                    oi != ci
                        && (if upper { o.min[axis] } else { o.max[axis] } - plane).abs()
                            <= tolerance
                        && (0..3).filter(|&k| k != axis).all(|k| {
                            (o.min[k] - c.min[k]).abs() <= tolerance
                                && (o.max[k] - c.max[k]).abs() <= tolerance
                        })
                });
                if !shared {
                    mesh.append(&face(c, axis, upper));
                }
            }
        }
    }
    mesh.welded(tolerance)
}

fn face(c: &Aabb, axis: usize, upper: bool) -> TriMesh {
    let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
    let w = if upper { c.max[axis] } else { c.min[axis] };
    let pt = |a: f64, b: f64| {
        let mut p = [0.0; 3];
        p[axis] = w;
        p[u] = a;
        p[v] = b;
        Point3::from(p)
    };
    let vertices = vec![
        pt(c.min[u], c.min[v]),
        pt(c.max[u], c.min[v]),
        pt(c.max[u], c.max[v]),
        pt(c.min[u], c.max[v]),
    ];
    // (u, v, axis) is right-handed, so counter-clockwise in (u, v) faces +axis.
    let triangles = if upper {
        vec![[0, 1, 2], [0, 2, 3]]
    } else {
        vec![[0, 2, 1], [0, 3, 2]]
    };
    TriMesh::new(vertices, triangles)
}
