//! Validity rules, shape evaluation to triangle meshes, and import/export
//! tuple classification.

pub mod boolean;
mod evaluate;
pub mod mesh;
pub mod profile;
mod read;
mod validity;

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::Matrix4;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::spf::{AttributeValue, InstanceGraph, NotFound};

pub use evaluate::{classify_shape, evaluate, evaluate_or_hidden, EvalOptions};
pub use mesh::{Aabb, TriMesh};
pub use read::object_placement;
pub use validity::{check_validity, EXTRUSION_DIRECTION_TOLERANCE};

/// Tessellation density from which curved surfaces count as smooth.
pub const SMOOTH_SEGMENTS: usize = 32;
pub const DEFAULT_SEGMENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("not evaluable: {reason}")]
    NotEvaluable { shape: ShapeClass, reason: String },
    #[error("#{id}: {reason}")]
    Malformed { id: u64, reason: String },
    #[error(transparent)]
    NotFound(#[from] NotFound),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ItemKind {
    BooleanResult,
    BooleanClippingResult,
    ShellBasedSurfaceModel,
    FacetedBrep,
    ExtrudedAreaSolid,
    RevolvedAreaSolid,
    SweptDiskSolid,
}

impl ItemKind {
    pub fn entity(self) -> &'static str {
        match self {
            Self::BooleanResult => "IFCBOOLEANRESULT",
            Self::BooleanClippingResult => "IFCBOOLEANCLIPPINGRESULT",
            Self::ShellBasedSurfaceModel => "IFCSHELLBASEDSURFACEMODEL",
            Self::FacetedBrep => "IFCFACETEDBREP",
            Self::ExtrudedAreaSolid => "IFCEXTRUDEDAREASOLID",
            Self::RevolvedAreaSolid => "IFCREVOLVEDAREASOLID",
            Self::SweptDiskSolid => "IFCSWEPTDISKSOLID",
        }
    }

    pub fn from_entity(name: &str) -> Option<Self> {
        [
            Self::BooleanResult,
            Self::BooleanClippingResult,
            Self::ShellBasedSurfaceModel,
            Self::FacetedBrep,
            Self::ExtrudedAreaSolid,
            Self::RevolvedAreaSolid,
            Self::SweptDiskSolid,
        ]
        .into_iter()
        .find(|k| k.entity() == name)
    }

    pub fn is_surface(self) -> bool {
        self == Self::ShellBasedSurfaceModel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ProfileKind {
    Rectangle,
    Ellipse,
    IShape,
    CraneRailAShape,
    Disk,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ShapeClass {
    pub kind: ItemKind,
    pub profile: ProfileKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Reason {
    PositiveLength,
    ValidExtrusionDirection,
    ParamRange,
    BelowPrecision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Valid,
    Invalid,
}

/// Invalid iff `reasons` is non-empty; `BelowPrecision` only ever appears
/// in `warnings`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidityVerdict {
    pub status: Status,
    pub reasons: BTreeSet<Reason>,
    pub warnings: BTreeSet<Reason>,
}

impl ValidityVerdict {
    pub fn valid() -> Self {
        Self::from_reasons([])
    }

    pub fn from_reasons(reasons: impl IntoIterator<Item = Reason>) -> Self {
        let mut verdict = Self {
            status: Status::Valid,
            reasons: BTreeSet::new(),
            warnings: BTreeSet::new(),
        };
        for r in reasons {
            verdict.add(r);
        }
        verdict
    }

    pub fn add(&mut self, reason: Reason) {
        if reason == Reason::BelowPrecision {
            self.warnings.insert(reason);
        } else {
            self.reasons.insert(reason);
            self.status = Status::Invalid;
        }
    }

    pub fn is_valid(&self) -> bool {
        self.status == Status::Valid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ZRelation {
    AboveZ0,
    BelowZ0,
    StraddlesZ0,
    OnZ0,
}

impl ZRelation {
    /// Position of `[min_z, max_z]` relative to z = 0 with a tolerance band.
    pub fn from_extent(min_z: f64, max_z: f64, band: f64) -> Self {
        let above = min_z >= -band;
        let below = max_z <= band;
        match (above, below) {
            (true, true) => Self::OnZ0,
            (true, false) => Self::AboveZ0,
            (false, true) => Self::BelowZ0,
            (false, false) => Self::StraddlesZ0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EvalWarning {
    NonNormalizedDirection,
    NegativeDepth,
    ClampedParameters,
    BelowPrecision,
    ReorientedShell,
    FilletsTessellated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationOutcome {
    pub displayed: bool,
    pub z_relation: Option<ZRelation>,
    pub shape_class: ShapeClass,
    pub smooth_curves: bool,
    pub mesh: Option<TriMesh>,
    pub warnings: Vec<EvalWarning>,
}

impl EvaluationOutcome {
    /// Outcome for a shape with no geometric realization.
    pub fn hidden(shape_class: ShapeClass, warnings: Vec<EvalWarning>) -> Self {
        Self {
            displayed: false,
            z_relation: None,
            shape_class,
            smooth_curves: false,
            mesh: None,
            warnings,
        }
    }

    pub fn volume(&self) -> Option<f64> {
        self.mesh.as_ref().map(TriMesh::volume)
    }

    pub fn area(&self) -> Option<f64> {
        self.mesh.as_ref().map(TriMesh::surface_area)
    }

    pub fn centroid(&self) -> Option<[f64; 3]> {
        let c = self.mesh.as_ref()?.centroid()?;
        Some([c.x, c.y, c.z])
    }

    pub fn bbox(&self) -> Option<Aabb> {
        self.mesh.as_ref()?.bbox()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observation {
    Y,
    N,
    Unknown,
}

impl Observation {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::Y
        } else {
            Self::N
        }
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Y => "Y",
            Self::N => "N",
            Self::Unknown => "?",
        })
    }
}

impl Serialize for Observation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TupleFlag {
    NeverExported,
    LoosenCandidate,
    PractitionerProblem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TupleClassification {
    pub exported: Observation,
    pub imported: Observation,
    pub valid: Observation,
    pub flags: BTreeSet<TupleFlag>,
}

impl fmt::Display for TupleClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.exported, self.imported, self.valid)
    }
}

/// `<exported, imported, valid>` with the states of interest flagged.
pub fn classify_tuple(
    verdict: &ValidityVerdict,
    displayed: bool,
    exported: Option<bool>,
) -> TupleClassification {
    let exported = exported.map_or(Observation::Unknown, Observation::from_bool);
    let imported = Observation::from_bool(displayed);
    let valid = Observation::from_bool(verdict.is_valid());
    let mut flags = BTreeSet::new();
    match (exported, imported, valid) {
        (Observation::N, _, _) => {
            flags.insert(TupleFlag::NeverExported);
        }
        (Observation::Y, Observation::Y, Observation::N) => {
            flags.insert(TupleFlag::LoosenCandidate);
        }
        (Observation::Y, Observation::N, _) => {
            flags.insert(TupleFlag::PractitionerProblem);
        }
        _ => {}
    }
    TupleClassification {
        exported,
        imported,
        valid,
        flags,
    }
}

/// A product carrying one body representation item.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub product: u64,
    pub name: Option<String>,
    pub description: Option<String>,
    pub root: u64,
    pub placement: Matrix4<f64>,
}

/// Every IfcBuildingElementProxy with a body representation, in file order.
pub fn suite_entries(graph: &InstanceGraph) -> Result<Vec<SuiteEntry>, GeomError> {
    let mut out = Vec::new();
    for proxy in graph.instances_of("IFCBUILDINGELEMENTPROXY") {
        let Some(shape) = read::reference(graph, proxy, 6)? else {
            continue;
        };
        let reps = read::references(graph, shape, 2)?;
        let body = reps
            .iter()
            .find(|r| r.attr(1).and_then(AttributeValue::as_text) == Some("Body"))
            .or(reps.first());
        let Some(body) = body else { continue };
        let Some(root) = read::references(graph, body, 3)?.first().map(|i| i.id) else {
            continue;
        };
        let placement = match read::reference(graph, proxy, 5)? {
            Some(p) => object_placement(graph, p)?,
            None => Matrix4::identity(),
        };
        let text = |i: usize| {
            proxy
                .attr(i)
                .and_then(AttributeValue::as_text)
                .map(str::to_string)
        };
        out.push(SuiteEntry {
            product: proxy.id,
            name: text(2),
            description: text(3),
            root,
            placement,
        });
    }
    Ok(out)
}

/// Precision of the first 3D geometric representation context.
pub fn context_precision(graph: &InstanceGraph) -> Option<f64> {
    graph
        .instances_of("IFCGEOMETRICREPRESENTATIONCONTEXT")
        .find_map(|c| c.attr(3).and_then(AttributeValue::as_f64))
}
