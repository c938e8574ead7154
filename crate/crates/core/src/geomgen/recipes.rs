use std::f64::consts::TAU;

use super::{GenError, GeometryTestItem, Variant};
use crate::geomcheck::{ItemKind, ProfileKind};
use crate::schema::SchemaVersion;
use crate::spf::{AttributeValue as V, GraphBuilder};

/// Declared dimensions of the suite shapes, in metres.
pub mod dims {
    pub const CUBE: f64 = 1.0;
    pub const BOOLEAN_OFFSET: f64 = 0.5;
    pub const CLIP_HEIGHT: f64 = 0.5;
    pub const RECT: f64 = 1.0;
    pub const ELLIPSE_A: f64 = 1.0;
    pub const ELLIPSE_B: f64 = 0.5;
    pub const DEPTH: f64 = 2.0;
    pub const REVOLUTION_OFFSET: f64 = 2.0;
    pub const DISK_RADIUS: f64 = 0.25;
    pub const DIRECTRIX_LENGTH: f64 = 3.0;
    pub const DIRECTRIX_HEIGHT: f64 = 0.5;

    pub const I_WIDTH: f64 = 1.0;
    pub const I_DEPTH: f64 = 1.0;
    pub const I_WEB: f64 = 0.1;
    pub const I_FLANGE: f64 = 0.1;
    pub const I_FILLET: f64 = 0.05;

    pub const RAIL_HEIGHT: f64 = 1.0;
    pub const RAIL_BASE_WIDTH2: f64 = 1.0;
    pub const RAIL_RADIUS: f64 = 0.05;
    pub const RAIL_HEAD_WIDTH: f64 = 0.5;
    pub const RAIL_HEAD_DEPTH2: f64 = 0.15;
    pub const RAIL_HEAD_DEPTH3: f64 = 0.3;
    pub const RAIL_WEB: f64 = 0.15;
    pub const RAIL_BASE_WIDTH4: f64 = 0.6;
    pub const RAIL_BASE_DEPTH1: f64 = 0.3;
    pub const RAIL_BASE_DEPTH2: f64 = 0.15;
    pub const RAIL_BASE_DEPTH3: f64 = 0.1;
}

pub(super) fn representation_type(kind: ItemKind) -> &'static str {
    match kind {
        ItemKind::BooleanResult => "CSG",
        ItemKind::BooleanClippingResult => "Clipping",
        ItemKind::ShellBasedSurfaceModel => "SurfaceModel",
        ItemKind::FacetedBrep => "Brep",
        ItemKind::ExtrudedAreaSolid | ItemKind::RevolvedAreaSolid => "SweptSolid",
        ItemKind::SweptDiskSolid => "AdvancedSweptSolid",
    }
}

fn point(b: &mut GraphBuilder, c: &[f64]) -> u64 {
    b.add("IFCCARTESIANPOINT", vec![V::reals(c)])
}

fn direction(b: &mut GraphBuilder, c: &[f64]) -> u64 {
    b.add("IFCDIRECTION", vec![V::reals(c)])
}

fn placement3(b: &mut GraphBuilder, origin: [f64; 3]) -> u64 {
    let p = point(b, &origin);
    b.add(
        "IFCAXIS2PLACEMENT3D",
        vec![V::Reference(p), V::Unset, V::Unset],
    )
}

fn placement2(b: &mut GraphBuilder, origin: [f64; 2]) -> u64 {
    let p = point(b, &origin);
    b.add("IFCAXIS2PLACEMENT2D", vec![V::Reference(p), V::Unset])
}

fn block(b: &mut GraphBuilder, origin: [f64; 3]) -> u64 {
    let pos = placement3(b, origin);
    b.add(
        "IFCBLOCK",
        vec![
            V::Reference(pos),
            V::real(dims::CUBE),
            V::real(dims::CUBE),
            V::real(dims::CUBE),
        ],
    )
}

fn profile(
    b: &mut GraphBuilder,
    kind: ProfileKind,
    origin: [f64; 2],
    schema: SchemaVersion,
) -> Result<u64, GenError> {
    let pos = placement2(b, origin);
    let head = |name: &str| vec![V::enumeration("AREA"), V::text(name), V::Reference(pos)];
    let id = match kind {
        ProfileKind::Rectangle => {
            let mut a = head("Rectangle");
            a.extend([V::real(dims::RECT), V::real(dims::RECT)]);
            b.add("IFCRECTANGLEPROFILEDEF", a)
        }
        ProfileKind::Ellipse => {
            let mut a = head("Ellipse");
            a.extend([V::real(dims::ELLIPSE_A), V::real(dims::ELLIPSE_B)]);
            b.add("IFCELLIPSEPROFILEDEF", a)
        }
        ProfileKind::IShape => {
            let mut a = head("I-shape");
            a.extend(
                [
                    dims::I_WIDTH,
                    dims::I_DEPTH,
                    dims::I_WEB,
                    dims::I_FLANGE,
                    dims::I_FILLET,
                ]
                .map(V::real),
            );
            if schema == SchemaVersion::Ifc4 {
                a.extend([V::Unset, V::Unset]);
            }
            b.add("IFCISHAPEPROFILEDEF", a)
        }
        ProfileKind::CraneRailAShape => {
            if schema != SchemaVersion::Ifc2x3 {
                return Err(GenError::InvalidParameter(
                    "crane rail profiles exist only in IFC2X3".to_string(),
                ));
            }
            let mut a = head("Crane rail A");
            a.extend(
                [
                    dims::RAIL_HEIGHT,
                    dims::RAIL_BASE_WIDTH2,
                    dims::RAIL_RADIUS,
                    dims::RAIL_HEAD_WIDTH,
                    dims::RAIL_HEAD_DEPTH2,
                    dims::RAIL_HEAD_DEPTH3,
                    dims::RAIL_WEB,
                    dims::RAIL_BASE_WIDTH4,
                    dims::RAIL_BASE_DEPTH1,
                    dims::RAIL_BASE_DEPTH2,
                    dims::RAIL_BASE_DEPTH3,
                ]
                .map(V::real),
            );
            a.push(V::Unset);
            b.add("IFCCRANERAILASHAPEPROFILEDEF", a)
        }
        ProfileKind::Disk | ProfileKind::None => {
            return Err(GenError::InvalidParameter(format!(
                "{kind:?} is not an area profile"
            )))
        }
    };
    Ok(id)
}

fn extrusion(b: &mut GraphBuilder, swept: u64, dir: &[f64], depth: f64) -> u64 {
    let pos = placement3(b, [0.0; 3]);
    let d = direction(b, dir);
    b.add(
        "IFCEXTRUDEDAREASOLID",
        vec![
            V::Reference(swept),
            V::Reference(pos),
            V::Reference(d),
            V::typed("IFCPOSITIVELENGTHMEASURE", V::real(depth)),
        ],
    )
}

/// Writes the instances of one item and returns the representation item id.
pub fn generate_item(
    b: &mut GraphBuilder,
    item: &GeometryTestItem,
    schema: SchemaVersion,
    precision: f64,
) -> Result<u64, GenError> {
    if !item.is_available(schema) {
        return Err(GenError::UnavailableItem {
            slot: item.slot,
            schema,
        });
    }
    let id = match item.kind {
        ItemKind::BooleanResult => {
            let op = match item.variant {
                Variant::Subtraction => "DIFFERENCE",
                Variant::Intersection => "INTERSECTION",
                Variant::Union => "UNION",
                v => return Err(GenError::InvalidParameter(format!("{v:?} boolean"))),
            };
            let first = block(b, [0.0; 3]);
            let second = block(b, [dims::BOOLEAN_OFFSET, 0.0, 0.0]);
            b.add(
                "IFCBOOLEANRESULT",
                vec![
                    V::enumeration(op),
                    V::Reference(first),
                    V::Reference(second),
                ],
            )
        }
        ItemKind::BooleanClippingResult => {
            let half = dims::CUBE / 2.0;
            let rect = profile(b, ProfileKind::Rectangle, [half, half], schema)?;
            let cube = extrusion(b, rect, &[0.0, 0.0, 1.0], dims::CUBE);
            let origin = point(b, &[0.0, 0.0, dims::CLIP_HEIGHT]);
            let z = direction(b, &[0.0, 0.0, 1.0]);
            let x = direction(b, &[1.0, 0.0, 0.0]);
            let pos = b.add(
                "IFCAXIS2PLACEMENT3D",
                vec![V::Reference(origin), V::Reference(z), V::Reference(x)],
            );
            let plane = b.add("IFCPLANE", vec![V::Reference(pos)]);
            let space = b.add(
                "IFCHALFSPACESOLID",
                vec![V::Reference(plane), V::boolean(true)],
            );
            b.add(
                "IFCBOOLEANCLIPPINGRESULT",
                vec![
                    V::enumeration("DIFFERENCE"),
                    V::Reference(cube),
                    V::Reference(space),
                ],
            )
        }
        ItemKind::ShellBasedSurfaceModel => {
            let shell = cube_shell(b, "IFCOPENSHELL");
            b.add("IFCSHELLBASEDSURFACEMODEL", vec![V::refs(&[shell])])
        }
        ItemKind::FacetedBrep => {
            let shell = cube_shell(b, "IFCCLOSEDSHELL");
            b.add("IFCFACETEDBREP", vec![V::Reference(shell)])
        }
        ItemKind::ExtrudedAreaSolid => {
            let swept = profile(b, item.profile, [0.0, 0.0], schema)?;
            let (dir, depth): (&[f64], f64) = match item.variant {
                Variant::Nominal => (&[0.0, 0.0, 1.0], dims::DEPTH),
                Variant::NegativeDepth => (&[0.0, 0.0, 1.0], -dims::DEPTH),
                Variant::ZeroDepth => (&[0.0, 0.0, 1.0], 0.0),
                Variant::NonNormalizedDirection => (&[0.0, 0.0, 2.0], dims::DEPTH),
                Variant::DirectionParallelToProfile => (&[1.0, 0.0, 0.0], dims::DEPTH),
                Variant::Slanted => (&[0.0, 0.6, 0.8], dims::DEPTH),
                Variant::BelowPrecisionDepth => (&[0.0, 0.0, 1.0], precision / 10.0),
                v => return Err(GenError::InvalidParameter(format!("{v:?} extrusion"))),
            };
            extrusion(b, swept, dir, depth)
        }
        ItemKind::RevolvedAreaSolid => {
            // Profile centred at distance REVOLUTION_OFFSET from the local x axis.
            let swept = profile(b, item.profile, [0.0, dims::REVOLUTION_OFFSET], schema)?;
            let pos = placement3(b, [0.0; 3]);
            let origin = point(b, &[0.0, 0.0, 0.0]);
            let x = direction(b, &[1.0, 0.0, 0.0]);
            let axis = b.add(
                "IFCAXIS1PLACEMENT",
                vec![V::Reference(origin), V::Reference(x)],
            );
            b.add(
                "IFCREVOLVEDAREASOLID",
                vec![
                    V::Reference(swept),
                    V::Reference(pos),
                    V::Reference(axis),
                    V::real(TAU),
                ],
            )
        }
        ItemKind::SweptDiskSolid => {
            let h = dims::DIRECTRIX_HEIGHT;
            let p0 = point(b, &[0.0, 0.0, h]);
            let p1 = point(b, &[dims::DIRECTRIX_LENGTH, 0.0, h]);
            let line = b.add("IFCPOLYLINE", vec![V::refs(&[p0, p1])]);
            let (start, end) = match item.variant {
                Variant::Nominal => (0.0, 1.0),
                Variant::ParamRangeOutsideCurve => (-1.0, 2.0),
                v => return Err(GenError::InvalidParameter(format!("{v:?} swept disk"))),
            };
            b.add(
                "IFCSWEPTDISKSOLID",
                vec![
                    V::Reference(line),
                    V::real(dims::DISK_RADIUS),
                    V::Unset,
                    V::real(start),
                    V::real(end),
                ],
            )
        }
    };
    Ok(id)
}

/// Unit cube as six outward-wound quadrilateral faces over eight points.
fn cube_shell(b: &mut GraphBuilder, shell_type: &str) -> u64 {
    let e = dims::CUBE;
    let corners: Vec<u64> = (0..8)
        .map(|i| {
            let c = [
                (i & 1) as f64 * e,
                ((i >> 1) & 1) as f64 * e,
                ((i >> 2) & 1) as f64 * e,
            ];
            point(b, &c)
        })
        .collect();
    const QUADS: [[usize; 4]; 6] = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let faces: Vec<u64> = QUADS
        .iter()
        .map(|q| {
            let pts: Vec<u64> = q.iter().map(|&i| corners[i]).collect();
            let lp = b.add("IFCPOLYLOOP", vec![V::refs(&pts)]);
            let bound = b.add(
                "IFCFACEOUTERBOUND",
                vec![V::Reference(lp), V::boolean(true)],
            );
            b.add("IFCFACE", vec![V::refs(&[bound])])
        })
        .collect();
    b.add(shell_type, vec![V::refs(&faces)])
}
