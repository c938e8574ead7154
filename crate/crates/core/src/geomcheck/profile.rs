//! Planar profiles as closed polygons, and the sweeps that turn them into
//! meshes.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Point2, Point3, Rotation3, Unit, Vector3};

use super::mesh::TriMesh;

/// Counter-clockwise simple polygon without repeated closing vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon(pub Vec<Point2<f64>>);

impl Polygon {
    pub fn signed_area(&self) -> f64 {
        let p = &self.0;
        (0..p.len())
            .map(|i| {
                let (a, b) = (p[i], p[(i + 1) % p.len()]);
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
            / 2.0
    }

    pub fn centroid(&self) -> Point2<f64> {
        let p = &self.0;
        let a = self.signed_area();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..p.len() {
            let (u, v) = (p[i], p[(i + 1) % p.len()]);
            let cross = u.x * v.y - v.x * u.y;
            cx += (u.x + v.x) * cross;
            cy += (u.y + v.y) * cross;
        }
        Point2::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    fn ccw(mut self) -> Self {
        if self.signed_area() < 0.0 {
            self.0.reverse();
        }
        self
    }

    /// Applies a 2D placement: rotation taking +x to `ref_dir`, then
    /// translation to `location`.
    pub fn placed(&self, location: Point2<f64>, ref_dir: [f64; 2]) -> Polygon {
        let n = (ref_dir[0] * ref_dir[0] + ref_dir[1] * ref_dir[1]).sqrt();
        let (c, s) = if n > 0.0 {
            (ref_dir[0] / n, ref_dir[1] / n)
        } else {
            (1.0, 0.0)
        };
        Polygon(
            self.0
                .iter()
                .map(|p| {
                    Point2::new(
                        location.x + c * p.x - s * p.y,
                        location.y + s * p.x + c * p.y,
                    )
                })
                .collect(),
        )
        .ccw()
    }
}

/// Points on a circle arc, `steps` intervals, both ends included.
fn arc(center: Point2<f64>, r: f64, from: f64, to: f64, steps: usize) -> Vec<Point2<f64>> {
    (0..=steps)
        .map(|k| {
            let t = from + (to - from) * k as f64 / steps as f64;
            Point2::new(center.x + r * t.cos(), center.y + r * t.sin())
        })
        .collect()
}

pub fn rectangle(x: f64, y: f64) -> Polygon {
    let (hx, hy) = (x / 2.0, y / 2.0);
    Polygon(vec![
        Point2::new(-hx, -hy),
        Point2::new(hx, -hy),
        Point2::new(hx, hy),
        Point2::new(-hx, hy),
    ])
}

/// Inscribed polygon with `segments` vertices.
pub fn ellipse(a: f64, b: f64, segments: usize) -> Polygon {
    let n = segments.max(3);
    Polygon(
        (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                Point2::new(a * t.cos(), b * t.sin())
            })
            .collect(),
    )
}

pub fn circle(r: f64, segments: usize) -> Polygon {
    ellipse(r, r, segments)
}

/// Symmetric I-section centred on the origin. Web-to-flange fillets are
/// tessellated at the same angular density as full circles.
pub fn i_shape(
    width: f64,
    depth: f64,
    web: f64,
    flange: f64,
    fillet: f64,
    segments: usize,
) -> Polygon {
    let (hw, hd, ht) = (width / 2.0, depth / 2.0, web / 2.0);
    let inner = hd - flange;
    let steps = (segments / 4).max(1);
    let mut pts = vec![
        Point2::new(-hw, -hd),
        Point2::new(hw, -hd),
        Point2::new(hw, -inner),
    ];
    let corner =
        |c: Point2<f64>, from: f64, to: f64, sharp: Point2<f64>, pts: &mut Vec<Point2<f64>>| {
            if fillet > 0.0 {
                pts.extend(arc(c, fillet, from, to, steps));
            } else {
                pts.push(sharp);
            }
        };
    // Lower right, upper right, upper left, lower left fillets.
    corner(
        Point2::new(ht + fillet, -inner + fillet),
        -FRAC_PI_2,
        -PI,
        Point2::new(ht, -inner),
        &mut pts,
    );
    corner(
        Point2::new(ht + fillet, inner - fillet),
        PI,
        FRAC_PI_2,
        Point2::new(ht, inner),
        &mut pts,
    );
    pts.push(Point2::new(hw, inner));
    pts.push(Point2::new(hw, hd));
    pts.push(Point2::new(-hw, hd));
    pts.push(Point2::new(-hw, inner));
    corner(
        Point2::new(-ht - fillet, inner - fillet),
        FRAC_PI_2,
        0.0,
        Point2::new(-ht, inner),
        &mut pts,
    );
    corner(
        Point2::new(-ht - fillet, -inner + fillet),
        0.0,
        -FRAC_PI_2,
        Point2::new(-ht, -inner),
        &mut pts,
    );
    pts.push(Point2::new(-hw, -inner));
    Polygon(pts)
}

/// Crane rail A-section as a symmetric polygon; the head radius is not
/// modelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CraneRailA {
    pub overall_height: f64,
    pub base_width2: f64,
    pub head_width: f64,
    pub head_depth2: f64,
    pub head_depth3: f64,
    pub web_thickness: f64,
    pub base_width4: f64,
    pub base_depth1: f64,
    pub base_depth2: f64,
    pub base_depth3: f64,
}

pub fn crane_rail_a(p: &CraneRailA) -> Polygon {
    let h = p.overall_height / 2.0;
    let half = [
        (p.base_width2 / 2.0, -h),
        (p.base_width2 / 2.0, -h + p.base_depth3),
        (p.base_width4 / 2.0, -h + p.base_depth2),
        (p.web_thickness / 2.0, -h + p.base_depth1),
        (p.web_thickness / 2.0, h - p.head_depth3),
        (p.head_width / 2.0, h - p.head_depth2),
        (p.head_width / 2.0, h),
    ];
    let mut pts: Vec<Point2<f64>> = half.iter().map(|&(x, y)| Point2::new(x, y)).collect();
    pts.extend(half.iter().rev().map(|&(x, y)| Point2::new(-x, y)));
    Polygon(pts)
}

fn cross2(o: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Ear-clipping triangulation of a simple polygon; returned triangles are
/// counter-clockwise.
pub fn triangulate(poly: &[Point2<f64>]) -> Vec<[usize; 3]> {
    let n = poly.len();
    if n < 3 {
        return Vec::new();
    }
    let area: f64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    let mut idx: Vec<usize> = if area >= 0.0 {
        (0..n).collect()
    } else {
        (0..n).rev().collect()
    };
    let mut out = Vec::with_capacity(n - 2);
    let mut guard = 0;
    while idx.len() > 3 && guard < 2 * n * n {
        guard += 1;
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ip, ic, inx) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (poly[ip], poly[ic], poly[inx]);
            let turn = cross2(a, b, c);
            if turn <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ip || j == ic || j == inx {
                    return false;
                }
                let p = poly[j];
                cross2(a, b, p) >= 0.0 && cross2(b, c, p) >= 0.0 && cross2(c, a, p) >= 0.0
            });
            if blocked {
                continue;
            }
            out.push([ip, ic, inx]);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            // Collinear remainder: drop the flattest vertex.
            let m = idx.len();
            let flat = (0..m)
                .min_by(|&i, &j| {
                    let t = |k: usize| {
                        cross2(
                            poly[idx[(k + m - 1) % m]],
                            poly[idx[k]],
                            poly[idx[(k + 1) % m]],
                        )
                        .abs()
                    };
                    t(i).total_cmp(&t(j))
                })
                .unwrap_or(0);
            idx.remove(flat);
        }
    }
    if idx.len() == 3 && cross2(poly[idx[0]], poly[idx[1]], poly[idx[2]]) > 0.0 {
        out.push([idx[0], idx[1], idx[2]]);
    }
    out
}

/// Prism swept from `poly` (in the local XY plane) along `offset`.
pub fn extrude(poly: &Polygon, offset: Vector3<f64>) -> TriMesh {
    let n = poly.0.len();
    let mut vertices: Vec<Point3<f64>> =
        poly.0.iter().map(|p| Point3::new(p.x, p.y, 0.0)).collect();
    vertices.extend(vertices.clone().into_iter().map(|p| p + offset));
    let cap = triangulate(&poly.0);
    let mut triangles = Vec::with_capacity(2 * cap.len() + 2 * n);
    for t in &cap {
        triangles.push([t[0] as u32, t[2] as u32, t[1] as u32]);
        triangles.push([(t[0] + n) as u32, (t[1] + n) as u32, (t[2] + n) as u32]);
    }
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b, c, d) = (i as u32, j as u32, (j + n) as u32, (i + n) as u32);
        triangles.push([a, b, c]);
        triangles.push([a, c, d]);
    }
    let mut mesh = TriMesh::new(vertices, triangles);
    mesh.orient_outward();
    mesh
}

/// Solid of revolution of `poly` (local XY plane) about the axis through
/// `origin` along `axis`, over `angle` radians with `segments` steps per
/// full turn.
pub fn revolve(
    poly: &Polygon,
    origin: Point3<f64>,
    axis: Vector3<f64>,
    angle: f64,
    segments: usize,
) -> TriMesh {
    let n = poly.0.len();
    let full = (angle.abs() - TAU).abs() < 1e-12;
    let steps = ((segments.max(3) as f64) * angle.abs() / TAU)
        .ceil()
        .max(1.0) as usize;
    let rings = if full { steps } else { steps + 1 };
    let axis = Unit::new_normalize(axis);
    let profile: Vec<Point3<f64>> = poly.0.iter().map(|p| Point3::new(p.x, p.y, 0.0)).collect();
    let mut vertices = Vec::with_capacity(rings * n);
    for k in 0..rings {
        let rot = Rotation3::from_axis_angle(&axis, angle * k as f64 / steps as f64);
        vertices.extend(profile.iter().map(|p| origin + rot * (p - origin)));
    }
    let mut triangles = Vec::new();
    for k in 0..steps {
        let (r0, r1) = (k * n, ((k + 1) % rings) * n);
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b, c, d) = (
                (r0 + i) as u32,
                (r0 + j) as u32,
                (r1 + j) as u32,
                (r1 + i) as u32,
            );
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    if !full {
        let last = (rings - 1) * n;
        for t in triangulate(&poly.0) {
            triangles.push([t[0] as u32, t[2] as u32, t[1] as u32]);
            triangles.push([
                (last + t[0]) as u32,
                (last + t[1]) as u32,
                (last + t[2]) as u32,
            ]);
        }
    }
    let mut mesh = TriMesh::new(vertices, triangles);
    mesh.orient_outward();
    mesh
}

/// Straight tube of radius `r` from `a` to `b`.
pub fn tube(a: Point3<f64>, b: Point3<f64>, r: f64, segments: usize) -> TriMesh {
    let dir = b - a;
    let len = dir.norm();
    let z = dir / len;
    let helper = if z.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let x = helper.cross(&z).normalize();
    let y = z.cross(&x);
    let m = nalgebra::Matrix4::from_columns(&[
        x.push(0.0),
        y.push(0.0),
        z.push(0.0),
        a.coords.push(1.0),
    ]);
    extrude(&circle(r, segments), Vector3::new(0.0, 0.0, len)).transformed(&m)
}
