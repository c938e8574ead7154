use std::collections::{BTreeSet, HashSet};

use super::read::{self, number, optional_number, required};
use super::{GeomError, ItemKind, Reason, ValidityVerdict};
use crate::spf::{AttributeValue, EntityInstance, InstanceGraph};

/// A z component of the extrusion direction at or below this magnitude
/// counts as parallel to the profile plane.
pub const EXTRUSION_DIRECTION_TOLERANCE: f64 = 1e-12;

/// Attributes declared as positive length measures, by entity.
const POSITIVE_LENGTHS: &[(&str, &[usize])] = &[
    ("IFCEXTRUDEDAREASOLID", &[3]),
    ("IFCRECTANGLEPROFILEDEF", &[3, 4]),
    ("IFCELLIPSEPROFILEDEF", &[3, 4]),
    ("IFCCIRCLEPROFILEDEF", &[3]),
    ("IFCISHAPEPROFILEDEF", &[3, 4, 5, 6]),
    (
        "IFCCRANERAILASHAPEPROFILEDEF",
        &[3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13],
    ),
    ("IFCBLOCK", &[1, 2, 3]),
    ("IFCSWEPTDISKSOLID", &[1, 2]),
];

/// Checks the rules the suite exercises on the representation item `root`
/// and everything it references.
pub fn check_validity(
    graph: &InstanceGraph,
    root: u64,
    precision: f64,
) -> Result<ValidityVerdict, GeomError> {
    let root = read::instance(graph, root)?;
    if ItemKind::from_entity(&root.type_name).is_none() && !root.is("IFCBLOCK") {
        return Err(GeomError::UnsupportedShape(root.type_name.to_string()));
    }
    let mut reasons = BTreeSet::new();
    for inst in reachable(graph, root)? {
        positive_lengths(inst, &mut reasons);
        if inst.is("IFCEXTRUDEDAREASOLID") {
            let dir = read::triple(required(graph, inst, 2)?)?;
            if dir[2].abs() <= EXTRUSION_DIRECTION_TOLERANCE {
                reasons.insert(Reason::ValidExtrusionDirection);
            }
            let depth = number(inst, 3)?;
            if depth > 0.0 && depth < precision {
                reasons.insert(Reason::BelowPrecision);
            }
        } else if inst.is("IFCSWEPTDISKSOLID") {
            let points = read::polyline_points(graph, required(graph, inst, 0)?)?;
            let end = points.len().saturating_sub(1) as f64;
            let out_of_range = |v: Option<f64>| v.is_some_and(|t| !(0.0..=end).contains(&t));
            if out_of_range(optional_number(inst, 3)) || out_of_range(optional_number(inst, 4)) {
                reasons.insert(Reason::ParamRange);
            }
        }
    }
    Ok(ValidityVerdict::from_reasons(reasons))
}

fn positive_lengths(inst: &EntityInstance, reasons: &mut BTreeSet<Reason>) {
    let mut flag = |v: &AttributeValue| {
        if v.as_f64().is_some_and(|x| x <= 0.0) {
            reasons.insert(Reason::PositiveLength);
        }
    };
    if let Some((_, attrs)) = POSITIVE_LENGTHS.iter().find(|(t, _)| inst.is(t)) {
        for &i in *attrs {
            if let Some(v) = inst.attr(i).filter(|v| !v.is_unset()) {
                flag(v);
            }
        }
    }
    fn typed(v: &AttributeValue, flag: &mut impl FnMut(&AttributeValue)) {
        match v {
            AttributeValue::Typed(t) if &*t.type_name == "IFCPOSITIVELENGTHMEASURE" => flag(v),
            AttributeValue::List(items) => items.iter().for_each(|i| typed(i, flag)),
            _ => {}
        }
    }
    for a in &inst.attributes {
        typed(a, &mut flag);
    }
}

/// `root` and every instance reachable from it, depth first.
fn reachable<'g>(
    graph: &'g InstanceGraph,
    root: &'g EntityInstance,
) -> Result<Vec<&'g EntityInstance>, GeomError> {
    let mut seen = HashSet::from([root.id]);
    let mut stack = vec![root];
    let mut out = Vec::new();
    while let Some(inst) = stack.pop() {
        out.push(inst);
        let mut next = Vec::new();
        inst.for_each_reference(|id| {
            if seen.insert(id) {
                next.push(id);
            }
        });
        for id in next.into_iter().rev() {
            stack.push(read::instance(graph, id)?);
        }
    }
    Ok(out)
}
