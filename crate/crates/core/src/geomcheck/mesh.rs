use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use nalgebra::{Matrix4, Point3, Vector3};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn volume(&self) -> f64 {
        (0..3)
            .map(|i| (self.max[i] - self.min[i]).max(0.0))
            .product()
    }

    pub fn center(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| 0.5 * (self.min[i] + self.max[i]))
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

/// Indexed triangle mesh. Closed meshes are oriented with outward normals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Self {
        debug_assert!(triangles
            .iter()
            .all(|t| t.iter().all(|&i| (i as usize) < vertices.len())));
        Self {
            vertices,
            triangles,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    fn corners(&self, t: &[u32; 3]) -> [Point3<f64>; 3] {
        t.map(|i| self.vertices[i as usize])
    }

    /// Signed volume by the divergence theorem; positive for outward
    /// orientation of a closed mesh.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = self.corners(t);
                a.coords.dot(&b.coords.cross(&c.coords))
            })
            .sum::<f64>()
            / 6.0
    }

    pub fn volume(&self) -> f64 {
        self.signed_volume().abs()
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = self.corners(t);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }

    /// Volume centroid for closed meshes, area centroid otherwise.
    pub fn centroid(&self) -> Option<Point3<f64>> {
        if self.is_empty() {
            return None;
        }
        let v = self.signed_volume();
        if self.is_closed() && v.abs() > 0.0 {
            let mut acc = Vector3::zeros();
            for t in &self.triangles {
                let [a, b, c] = self.corners(t);
                let w = a.coords.dot(&b.coords.cross(&c.coords)) / 6.0;
                acc += w * (a.coords + b.coords + c.coords) / 4.0;
            }
            return Some(Point3::from(acc / v));
        }
        let mut acc = Vector3::zeros();
        let mut total = 0.0;
        for t in &self.triangles {
            let [a, b, c] = self.corners(t);
            let w = 0.5 * (b - a).cross(&(c - a)).norm();
            acc += w * (a.coords + b.coords + c.coords) / 3.0;
            total += w;
        }
        (total > 0.0).then(|| Point3::from(acc / total))
    }

    pub fn bbox(&self) -> Option<Aabb> {
        let mut it = self
            .triangles
            .iter()
            .flat_map(|t| t.iter())
            .map(|&i| self.vertices[i as usize]);
        let first = it.next()?;
        let mut min = [first.x, first.y, first.z];
        let mut max = min;
        for p in it {
            for i in 0..3 {
                min[i] = min[i].min(p[i]);
                max[i] = max[i].max(p[i]);
            }
        }
        Some(Aabb { min, max })
    }

    /// Every directed edge is matched by exactly one opposite edge.
    pub fn is_closed(&self) -> bool {
        if self.is_empty() {
            return false;
        }
        let mut edges: HashMap<(u32, u32), i32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if a < b {
                    *edges.entry((a, b)).or_insert(0) += 1;
                } else {
                    *edges.entry((b, a)).or_insert(0) -= 1;
                }
            }
        }
        edges.values().all(|&n| n == 0)
    }

    /// Appends `other`, keeping both index spaces apart.
    pub fn append(&mut self, other: &TriMesh) {
        let offset = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + offset)));
    }

    pub fn transformed(&self, m: &Matrix4<f64>) -> TriMesh {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v = m.transform_point(v);
        }
        if m.fixed_view::<3, 3>(0, 0).determinant() < 0.0 {
            out.flip();
        }
        out
    }

    pub fn flip(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
    }

    /// Flips a closed mesh whose signed volume is negative.
    pub fn orient_outward(&mut self) -> bool {
        if self.signed_volume() < 0.0 {
            self.flip();
            true
        } else {
            false
        }
    }

    /// Merges vertices closer than `tolerance` and drops triangles that
    /// collapse or whose area is below `tolerance²`.
    pub fn welded(&self, tolerance: f64) -> TriMesh {
        let cell = tolerance.max(f64::MIN_POSITIVE);
        let key = |p: &Point3<f64>| [p.x, p.y, p.z].map(|c| (c / cell).floor() as i64);
        let mut grid: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        let mut vertices: Vec<Point3<f64>> = Vec::new();
        let mut remap = Vec::with_capacity(self.vertices.len());
        for p in &self.vertices {
            let k = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(ids) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                            if let Some(&id) = ids
                                .iter()
                                .find(|&&id| (vertices[id as usize] - p).norm() < tolerance)
                            {
                                found = Some(id);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                let id = vertices.len() as u32;
                vertices.push(*p);
                grid.entry(k).or_default().push(id);
                id
            });
            remap.push(id);
        }
        let min_area = tolerance * tolerance;
        let triangles = self
            .triangles
            .iter()
            .map(|t| t.map(|i| remap[i as usize]))
            .filter(|t| {
                t[0] != t[1] && t[1] != t[2] && t[0] != t[2] && {
                    let [a, b, c] = t.map(|i| vertices[i as usize]);
                    0.5 * (b - a).cross(&(c - a)).norm() >= min_area
                }
            })
            .collect();
        let mut out = TriMesh::new(vertices, triangles);
        out.compact();
        out
    }

    /// Drops vertices no triangle refers to.
    pub fn compact(&mut self) {
        let mut used: BTreeMap<u32, u32> = BTreeMap::new();
        for t in &self.triangles {
            for &i in t {
                used.entry(i).or_insert(0);
            }
        }
        let mut vertices = Vec::with_capacity(used.len());
        for (old, new) in used.iter_mut() {
            *new = vertices.len() as u32;
            vertices.push(self.vertices[*old as usize]);
        }
        for t in &mut self.triangles {
            *t = t.map(|i| used[&i]);
        }
        self.vertices = vertices;
    }

    /// One triangle per line: nine coordinates separated by spaces.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        for t in &self.triangles {
            let [a, b, c] = self.corners(t);
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {} {}",
                a.x, a.y, a.z, b.x, b.y, b.z, c.x, c.y, c.z
            );
        }
        out
    }

    /// Box `[min, max]` with outward-facing triangles.
    pub fn cuboid(min: [f64; 3], max: [f64; 3]) -> TriMesh {
        let v = |i: usize| {
            Point3::new(
                if i & 1 == 0 { min[0] } else { max[0] },
                if i & 2 == 0 { min[1] } else { max[1] },
                if i & 4 == 0 { min[2] } else { max[2] },
            )
        };
        let vertices = (0..8).map(v).collect();
        let quads = [
            [0, 2, 3, 1],
            [4, 5, 7, 6],
            [0, 1, 5, 4],
            [2, 6, 7, 3],
            [0, 4, 6, 2],
            [1, 3, 7, 5],
        ];
        let triangles = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        TriMesh::new(vertices, triangles)
    }
}
