//! Typed access to the geometric resource entities of an instance graph.

use nalgebra::{Matrix4, Point2, Point3, Vector3};

use super::GeomError;
use crate::spf::{AttributeValue, EntityInstance, InstanceGraph};

pub(crate) fn instance(graph: &InstanceGraph, id: u64) -> Result<&EntityInstance, GeomError> {
    graph.resolve(id).map_err(GeomError::from)
}

pub(crate) fn reference<'g>(
    graph: &'g InstanceGraph,
    inst: &EntityInstance,
    index: usize,
) -> Result<Option<&'g EntityInstance>, GeomError> {
    match inst.attr(index) {
        Some(AttributeValue::Reference(id)) => instance(graph, *id).map(Some),
        _ => Ok(None),
    }
}

pub(crate) fn required<'g>(
    graph: &'g InstanceGraph,
    inst: &EntityInstance,
    index: usize,
) -> Result<&'g EntityInstance, GeomError> {
    reference(graph, inst, index)?
        .ok_or_else(|| malformed(inst, &format!("attribute {index} is not a reference")))
}

pub(crate) fn references<'g>(
    graph: &'g InstanceGraph,
    inst: &EntityInstance,
    index: usize,
) -> Result<Vec<&'g EntityInstance>, GeomError> {
    let Some(list) = inst.attr(index).and_then(AttributeValue::as_list) else {
        return Err(malformed(inst, &format!("attribute {index} is not a list")));
    };
    list.iter()
        .map(|v| {
            v.as_reference()
                .ok_or_else(|| malformed(inst, "list member is not a reference"))
                .and_then(|id| instance(graph, id))
        })
        .collect()
}

pub(crate) fn number(inst: &EntityInstance, index: usize) -> Result<f64, GeomError> {
    inst.attr(index)
        .and_then(AttributeValue::as_f64)
        .ok_or_else(|| malformed(inst, &format!("attribute {index} is not a number")))
}

pub(crate) fn optional_number(inst: &EntityInstance, index: usize) -> Option<f64> {
    inst.attr(index).and_then(AttributeValue::as_f64)
}

pub(crate) fn malformed(inst: &EntityInstance, what: &str) -> GeomError {
    GeomError::Malformed {
        id: inst.id,
        reason: format!("{}: {what}", inst.type_name),
    }
}

/// Coordinates or direction ratios, padded to three components.
pub(crate) fn triple(inst: &EntityInstance) -> Result<[f64; 3], GeomError> {
    let list = inst
        .attr(0)
        .and_then(AttributeValue::as_list)
        .ok_or_else(|| malformed(inst, "expected a coordinate list"))?;
    let mut out = [0.0; 3];
    if list.len() < 2 || list.len() > 3 {
        return Err(malformed(inst, "expected 2 or 3 coordinates"));
    }
    for (o, v) in out.iter_mut().zip(list) {
        *o = v
            .as_f64()
            .ok_or_else(|| malformed(inst, "non-numeric coordinate"))?;
    }
    Ok(out)
}

pub(crate) fn point(
    graph: &InstanceGraph,
    inst: &EntityInstance,
    index: usize,
) -> Result<Point3<f64>, GeomError> {
    let p = required(graph, inst, index)?;
    Ok(Point3::from(triple(p)?))
}

pub(crate) fn direction(
    graph: &InstanceGraph,
    inst: &EntityInstance,
    index: usize,
) -> Result<Option<Vector3<f64>>, GeomError> {
    reference(graph, inst, index)?
        .map(|d| triple(d).map(Vector3::from))
        .transpose()
}

/// Local-to-parent matrix of an IfcAxis2Placement3D or 2D.
pub(crate) fn axis2_placement(
    graph: &InstanceGraph,
    inst: &EntityInstance,
) -> Result<Matrix4<f64>, GeomError> {
    let loc = point(graph, inst, 0)?;
    let (z, x) = if inst.is("IFCAXIS2PLACEMENT2D") {
        (None, direction(graph, inst, 1)?)
    } else if inst.is("IFCAXIS2PLACEMENT3D") {
        (direction(graph, inst, 1)?, direction(graph, inst, 2)?)
    } else {
        return Err(GeomError::UnsupportedShape(inst.type_name.to_string()));
    };
    frame(loc, z, x).ok_or_else(|| malformed(inst, "degenerate axes"))
}

pub(crate) fn frame(
    loc: Point3<f64>,
    z: Option<Vector3<f64>>,
    x: Option<Vector3<f64>>,
) -> Option<Matrix4<f64>> {
    let z = z.unwrap_or_else(Vector3::z).try_normalize(0.0)?;
    let x0 = x.unwrap_or_else(|| {
        if z.x.abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        }
    });
    let x = (x0 - z * x0.dot(&z)).try_normalize(0.0)?;
    let y = z.cross(&x);
    Some(Matrix4::from_columns(&[
        x.push(0.0),
        y.push(0.0),
        z.push(0.0),
        loc.coords.push(1.0),
    ]))
}

pub(crate) fn optional_placement(
    graph: &InstanceGraph,
    inst: &EntityInstance,
    index: usize,
) -> Result<Matrix4<f64>, GeomError> {
    match reference(graph, inst, index)? {
        Some(p) => axis2_placement(graph, p),
        None => Ok(Matrix4::identity()),
    }
}

/// 2D placement of a profile: location and x-axis direction.
pub(crate) fn profile_placement(
    graph: &InstanceGraph,
    profile: &EntityInstance,
) -> Result<(Point2<f64>, [f64; 2]), GeomError> {
    let Some(p) = reference(graph, profile, 2)? else {
        return Ok((Point2::origin(), [1.0, 0.0]));
    };
    let loc = point(graph, p, 0)?;
    let dir = direction(graph, p, 1)?.map_or([1.0, 0.0], |d| [d.x, d.y]);
    Ok((Point2::new(loc.x, loc.y), dir))
}

/// Composite matrix of an IfcLocalPlacement chain.
pub fn object_placement(
    graph: &InstanceGraph,
    placement: &EntityInstance,
) -> Result<Matrix4<f64>, GeomError> {
    let mut m = Matrix4::identity();
    let mut current = Some(placement);
    let mut depth = 0;
    while let Some(p) = current {
        depth += 1;
        if depth > 64 || !p.is("IFCLOCALPLACEMENT") {
            return Err(malformed(p, "unsupported placement chain"));
        }
        m = axis2_placement(graph, required(graph, p, 1)?)? * m;
        current = reference(graph, p, 0)?;
    }
    Ok(m)
}

pub(crate) fn polyline_points(
    graph: &InstanceGraph,
    curve: &EntityInstance,
) -> Result<Vec<Point3<f64>>, GeomError> {
    if !curve.is("IFCPOLYLINE") {
        return Err(GeomError::UnsupportedShape(format!(
            "directrix {}",
            curve.type_name
        )));
    }
    references(graph, curve, 0)?
        .into_iter()
        .map(|p| triple(p).map(Point3::from))
        .collect()
}

/// Factor from the model's plane angle unit to radians.
pub(crate) fn plane_angle_factor(graph: &InstanceGraph) -> f64 {
    let units = graph
        .instances_of("IFCPROJECT")
        .next()
        .and_then(|p| graph.follow(p, 8))
        .and_then(|ua| ua.attr(0))
        .and_then(AttributeValue::as_list)
        .map(|l| {
            l.iter()
                .filter_map(|v| graph.resolve(v.as_reference()?).ok())
                .collect::<Vec<_>>()
        })
        .unwrap_or_default();
    for u in units {
        if u.attr(1).and_then(AttributeValue::as_enum) != Some("PLANEANGLEUNIT") {
            continue;
        }
        if u.is("IFCCONVERSIONBASEDUNIT") {
            if let Some(factor) = graph
                .follow(u, 3)
                .and_then(|mwu| mwu.attr(0))
                .and_then(AttributeValue::as_f64)
            {
                return factor;
            }
            let named_degree = u
                .attr(2)
                .and_then(AttributeValue::as_text)
                .is_some_and(|n| n.eq_ignore_ascii_case("degree"));
            return if named_degree {
                std::f64::consts::PI / 180.0
            } else {
                1.0
            };
        }
        return 1.0;
    }
    1.0
}
