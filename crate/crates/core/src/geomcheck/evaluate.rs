use std::f64::consts::TAU;

use nalgebra::{Matrix4, Point2, Point3, Vector3};

use super::boolean::{cells_to_mesh, combine, AxisHalfSpace, BoolOp, Region};
use super::profile::{self, CraneRailA, Polygon};
use super::read::{self, number, optional_number, required};
use super::{
    EvalWarning, EvaluationOutcome, GeomError, ItemKind, ProfileKind, ShapeClass, TriMesh,
    ZRelation, SMOOTH_SEGMENTS,
};
use crate::spf::{AttributeValue, EntityInstance, InstanceGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Tessellation segments per full circle.
    pub segments: usize,
    /// Point-equality tolerance of the representation context.
    pub precision: f64,
    /// Applied to the item mesh before measuring, e.g. the product placement.
    pub transform: Matrix4<f64>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            segments: super::DEFAULT_SEGMENTS,
            precision: 1e-5,
            transform: Matrix4::identity(),
        }
    }
}

/// Kind and profile of the representation item as written in the file.
pub fn classify_shape(graph: &InstanceGraph, root: u64) -> Result<ShapeClass, GeomError> {
    let inst = read::instance(graph, root)?;
    let kind = ItemKind::from_entity(&inst.type_name)
        .ok_or_else(|| GeomError::UnsupportedShape(inst.type_name.to_string()))?;
    let profile = match kind {
        ItemKind::ExtrudedAreaSolid | ItemKind::RevolvedAreaSolid => {
            profile_kind(required(graph, inst, 0)?)?
        }
        ItemKind::SweptDiskSolid => ProfileKind::Disk,
        _ => ProfileKind::None,
    };
    Ok(ShapeClass { kind, profile })
}

fn profile_kind(p: &EntityInstance) -> Result<ProfileKind, GeomError> {
    Ok(match &*p.type_name {
        "IFCRECTANGLEPROFILEDEF" => ProfileKind::Rectangle,
        "IFCELLIPSEPROFILEDEF" => ProfileKind::Ellipse,
        "IFCISHAPEPROFILEDEF" => ProfileKind::IShape,
        "IFCCRANERAILASHAPEPROFILEDEF" => ProfileKind::CraneRailAShape,
        "IFCCIRCLEPROFILEDEF" => ProfileKind::Disk,
        other => return Err(GeomError::UnsupportedShape(other.to_string())),
    })
}

/// Evaluates one representation item to a mesh and answers the follow-up
/// questions about it. Shapes without volume yield `NotEvaluable`.
pub fn evaluate(
    graph: &InstanceGraph,
    root: u64,
    options: &EvalOptions,
) -> Result<EvaluationOutcome, GeomError> {
    let shape = classify_shape(graph, root)?;
    let mut ev = Evaluator {
        graph,
        options,
        warnings: Vec::new(),
        curved: false,
        shape,
    };
    let inst = read::instance(graph, root)?;
    let solid = ev.item(inst)?;
    let mesh = solid
        .mesh
        .transformed(&options.transform)
        .welded(options.precision);
    let measure = if shape.kind.is_surface() {
        mesh.surface_area() > options.precision.powi(2)
    } else {
        mesh.volume() > options.precision.powi(3)
    };
    let displayed = !mesh.is_empty() && measure;
    let z_relation = mesh
        .bbox()
        .filter(|_| displayed)
        .map(|b| ZRelation::from_extent(b.min[2], b.max[2], options.precision));
    let mut warnings = ev.warnings;
    warnings.sort();
    warnings.dedup();
    Ok(EvaluationOutcome {
        displayed,
        z_relation,
        shape_class: shape,
        smooth_curves: displayed && ev.curved && options.segments >= SMOOTH_SEGMENTS,
        mesh: displayed.then_some(mesh),
        warnings,
    })
}

/// Like `evaluate`, but a shape without geometric realization becomes a
/// hidden outcome instead of an error.
pub fn evaluate_or_hidden(
    graph: &InstanceGraph,
    root: u64,
    options: &EvalOptions,
) -> Result<EvaluationOutcome, GeomError> {
    match evaluate(graph, root, options) {
        Err(GeomError::NotEvaluable { shape, .. }) => {
            Ok(EvaluationOutcome::hidden(shape, Vec::new()))
        }
        other => other,
    }
}

struct Solid {
    mesh: TriMesh,
    region: Option<Region>,
}

impl Solid {
    fn from_mesh(mesh: TriMesh) -> Self {
        // A mesh filling its bounding box is an axis-aligned box.
        let region = mesh.bbox().and_then(|b| {
            let v = b.volume();
            (v > 0.0 && (mesh.volume() - v).abs() <= 1e-12 * v.max(1.0))
                .then(|| Region::Boxes(vec![b]))
        });
        Self { mesh, region }
    }
}

struct Evaluator<'a> {
    graph: &'a InstanceGraph,
    options: &'a EvalOptions,
    warnings: Vec<EvalWarning>,
    curved: bool,
    shape: ShapeClass,
}

impl Evaluator<'_> {
    fn not_evaluable(&self, reason: &str) -> GeomError {
        GeomError::NotEvaluable {
            shape: self.shape,
            reason: reason.to_string(),
        }
    }

    fn item(&mut self, inst: &EntityInstance) -> Result<Solid, GeomError> {
        match &*inst.type_name {
            "IFCEXTRUDEDAREASOLID" => self.extrusion(inst).map(Solid::from_mesh),
            "IFCREVOLVEDAREASOLID" => self.revolution(inst).map(Solid::from_mesh),
            "IFCSWEPTDISKSOLID" => self.swept_disk(inst).map(Solid::from_mesh),
            "IFCBLOCK" => self.block(inst).map(Solid::from_mesh),
            "IFCBOOLEANRESULT" | "IFCBOOLEANCLIPPINGRESULT" => self.boolean(inst),
            "IFCFACETEDBREP" => {
                let shell = required(self.graph, inst, 0)?;
                let mut mesh = self.shell(shell)?.welded(self.options.precision);
                if mesh.is_closed() && mesh.orient_outward() {
                    self.warnings.push(EvalWarning::ReorientedShell);
                }
                Ok(Solid::from_mesh(mesh))
            }
            "IFCSHELLBASEDSURFACEMODEL" => {
                let mut mesh = TriMesh::default();
                for shell in read::references(self.graph, inst, 0)? {
                    mesh.append(&self.shell(shell)?);
                }
                Ok(Solid { mesh, region: None })
            }
            other => Err(GeomError::UnsupportedShape(other.to_string())),
        }
    }

    fn profile(&mut self, p: &EntityInstance) -> Result<Polygon, GeomError> {
        let seg = self.options.segments;
        let poly = match profile_kind(p)? {
            ProfileKind::Rectangle => profile::rectangle(number(p, 3)?, number(p, 4)?),
            ProfileKind::Ellipse => {
                self.curved = true;
                profile::ellipse(number(p, 3)?, number(p, 4)?, seg)
            }
            ProfileKind::Disk => {
                self.curved = true;
                profile::circle(number(p, 3)?, seg)
            }
            ProfileKind::IShape => {
                let fillet = optional_number(p, 7).unwrap_or(0.0);
                if fillet > 0.0 {
                    self.curved = true;
                    self.warnings.push(EvalWarning::FilletsTessellated);
                }
                profile::i_shape(
                    number(p, 3)?,
                    number(p, 4)?,
                    number(p, 5)?,
                    number(p, 6)?,
                    fillet,
                    seg,
                )
            }
            ProfileKind::CraneRailAShape => profile::crane_rail_a(&CraneRailA {
                overall_height: number(p, 3)?,
                base_width2: number(p, 4)?,
                head_width: number(p, 6)?,
                head_depth2: number(p, 7)?,
                head_depth3: number(p, 8)?,
                web_thickness: number(p, 9)?,
                base_width4: number(p, 10)?,
                base_depth1: number(p, 11)?,
                base_depth2: number(p, 12)?,
                base_depth3: number(p, 13)?,
            }),
            ProfileKind::None => unreachable!("profile_kind never yields None"),
        };
        let (loc, dir) = read::profile_placement(self.graph, p)?;
        Ok(poly.placed(loc, dir))
    }

    fn extrusion(&mut self, inst: &EntityInstance) -> Result<TriMesh, GeomError> {
        let poly = self.profile(required(self.graph, inst, 0)?)?;
        let position = read::optional_placement(self.graph, inst, 1)?;
        let dir = Vector3::from(read::triple(required(self.graph, inst, 2)?)?);
        let depth = number(inst, 3)?;
        if depth == 0.0 {
            return Err(self.not_evaluable("zero extrusion depth"));
        }
        let norm = dir.norm();
        if norm == 0.0 {
            return Err(self.not_evaluable("zero extrusion direction"));
        }
        if (norm - 1.0).abs() > 1e-12 {
            self.warnings.push(EvalWarning::NonNormalizedDirection);
        }
        if depth < 0.0 {
            self.warnings.push(EvalWarning::NegativeDepth);
        }
        if depth > 0.0 && depth < self.options.precision {
            self.warnings.push(EvalWarning::BelowPrecision);
        }
        let offset = dir / norm * depth;
        if offset.z.abs() <= self.options.precision {
            return Err(self.not_evaluable("extrusion direction lies in the profile plane"));
        }
        Ok(profile::extrude(&poly, offset).transformed(&position))
    }

    fn revolution(&mut self, inst: &EntityInstance) -> Result<TriMesh, GeomError> {
        let poly = self.profile(required(self.graph, inst, 0)?)?;
        let position = read::optional_placement(self.graph, inst, 1)?;
        let axis = required(self.graph, inst, 2)?;
        let origin = read::point(self.graph, axis, 0)?;
        let dir = read::direction(self.graph, axis, 1)?.unwrap_or_else(Vector3::z);
        let angle = number(inst, 3)? * read::plane_angle_factor(self.graph);
        if angle == 0.0 {
            return Err(self.not_evaluable("zero revolution angle"));
        }
        self.curved = true;
        let angle = angle.clamp(-TAU, TAU);
        Ok(
            profile::revolve(&poly, origin, dir, angle, self.options.segments)
                .transformed(&position),
        )
    }

    fn swept_disk(&mut self, inst: &EntityInstance) -> Result<TriMesh, GeomError> {
        let points = read::polyline_points(self.graph, required(self.graph, inst, 0)?)?;
        if points.len() < 2 {
            return Err(self.not_evaluable("directrix has fewer than two points"));
        }
        let radius = number(inst, 1)?;
        if optional_number(inst, 2).is_some_and(|r| r > 0.0) {
            return Err(GeomError::UnsupportedShape("hollow swept disk".to_string()));
        }
        let (first, last) = (points[0], points[points.len() - 1]);
        let axis = last - first;
        let straight = points
            .iter()
            .all(|p| (p - first).cross(&axis).norm() <= self.options.precision * axis.norm());
        if !straight {
            return Err(GeomError::UnsupportedShape("curved directrix".to_string()));
        }
        let end = (points.len() - 1) as f64;
        let (mut t0, mut t1) = (
            optional_number(inst, 3).unwrap_or(0.0),
            optional_number(inst, 4).unwrap_or(end),
        );
        if t0 < 0.0 || t1 > end {
            self.warnings.push(EvalWarning::ClampedParameters);
            t0 = t0.clamp(0.0, end);
            t1 = t1.clamp(0.0, end);
        }
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        let at = |t: f64| {
            let i = (t.floor() as usize).min(points.len() - 2);
            let f = t - i as f64;
            points[i] + (points[i + 1] - points[i]) * f
        };
        let (a, b) = (at(t0), at(t1));
        if radius <= 0.0 || (b - a).norm() <= self.options.precision {
            return Err(self.not_evaluable("degenerate sweep"));
        }
        self.curved = true;
        Ok(profile::tube(a, b, radius, self.options.segments))
    }

    fn block(&mut self, inst: &EntityInstance) -> Result<TriMesh, GeomError> {
        let position = read::optional_placement(self.graph, inst, 0)?;
        let size = [number(inst, 1)?, number(inst, 2)?, number(inst, 3)?];
        if size.iter().any(|&s| s <= 0.0) {
            return Err(self.not_evaluable("non-positive block size"));
        }
        Ok(TriMesh::cuboid([0.0; 3], size).transformed(&position))
    }

    fn operand_region(&mut self, inst: &EntityInstance) -> Result<Region, GeomError> {
        if inst.is("IFCHALFSPACESOLID") || inst.is("IFCBOXEDHALFSPACE") {
            return self.half_space(inst).map(Region::HalfSpace);
        }
        self.item(inst)?.region.ok_or_else(|| {
            GeomError::UnsupportedShape(format!(
                "boolean operand #{} is not an axis-aligned box",
                inst.id
            ))
        })
    }

    fn half_space(&mut self, inst: &EntityInstance) -> Result<AxisHalfSpace, GeomError> {
        let surface = required(self.graph, inst, 0)?;
        if !surface.is("IFCPLANE") {
            return Err(GeomError::UnsupportedShape(format!(
                "half-space on {}",
                surface.type_name
            )));
        }
        let m = read::axis2_placement(self.graph, required(self.graph, surface, 0)?)?;
        let normal = Vector3::new(m[(0, 2)], m[(1, 2)], m[(2, 2)]);
        let origin = Point3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]);
        let axis = (0..3)
            .find(|&i| (normal[i].abs() - 1.0).abs() <= 1e-12)
            .ok_or_else(|| GeomError::UnsupportedShape("oblique half-space".to_string()))?;
        let agreement = inst.attr(1).and_then(AttributeValue::as_enum) != Some("F");
        // With agreement the normal points away from the material.
        let below = (normal[axis] > 0.0) == agreement;
        Ok(AxisHalfSpace {
            axis,
            offset: origin[axis],
            below,
        })
    }

    fn boolean(&mut self, inst: &EntityInstance) -> Result<Solid, GeomError> {
        let op = inst
            .attr(0)
            .and_then(AttributeValue::as_enum)
            .and_then(BoolOp::from_token)
            .ok_or_else(|| read::malformed(inst, "unknown boolean operator"))?;
        let a = self.operand_region(required(self.graph, inst, 1)?)?;
        let b = self.operand_region(required(self.graph, inst, 2)?)?;
        let cells = combine(op, &a, &b)
            .ok_or_else(|| GeomError::UnsupportedShape("unbounded boolean result".to_string()))?;
        if cells.is_empty() {
            return Err(self.not_evaluable("empty boolean result"));
        }
        Ok(Solid {
            mesh: cells_to_mesh(&cells, self.options.precision),
            region: Some(Region::Boxes(cells)),
        })
    }

    /// Triangulated faces of an open or closed shell.
    fn shell(&mut self, shell: &EntityInstance) -> Result<TriMesh, GeomError> {
        let mut mesh = TriMesh::default();
        for face in read::references(self.graph, shell, 0)? {
            let bounds = read::references(self.graph, face, 0)?;
            let [bound] = bounds.as_slice() else {
                return Err(GeomError::UnsupportedShape(
                    "face with inner bounds".to_string(),
                ));
            };
            let lp = required(self.graph, bound, 0)?;
            if !lp.is("IFCPOLYLOOP") {
                return Err(GeomError::UnsupportedShape(lp.type_name.to_string()));
            }
            let mut pts: Vec<Point3<f64>> = read::references(self.graph, lp, 0)?
                .into_iter()
                .map(|p| read::triple(p).map(Point3::from))
                .collect::<Result<_, _>>()?;
            if bound.attr(1).and_then(AttributeValue::as_enum) == Some("F") {
                pts.reverse();
            }
            mesh.append(&planar_polygon(&pts));
        }
        Ok(mesh)
    }
}

/// Triangulates a planar 3D polygon, keeping its winding.
fn planar_polygon(pts: &[Point3<f64>]) -> TriMesh {
    let mut n = Vector3::zeros();
    for i in 0..pts.len() {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        n += Vector3::new(
            (a.y - b.y) * (a.z + b.z),
            (a.z - b.z) * (a.x + b.x),
            (a.x - b.x) * (a.y + b.y),
        );
    }
    let Some(n) = n.try_normalize(0.0) else {
        return TriMesh::default();
    };
    let helper = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u = helper.cross(&n).normalize();
    let v = n.cross(&u);
    let flat: Vec<Point2<f64>> = pts
        .iter()
        .map(|p| Point2::new(p.coords.dot(&u), p.coords.dot(&v)))
        .collect();
    let triangles = profile::triangulate(&flat)
        .into_iter()
        .map(|t| t.map(|i| i as u32))
        .collect();
    TriMesh::new(pts.to_vec(), triangles)
}
